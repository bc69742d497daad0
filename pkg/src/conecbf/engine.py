"""Deterministic closed-loop scenario execution.

Each step, at the step's start state: evaluate the reference controller,
gate obstacles by the perception boundary, evaluate the configured
barrier per gated obstacle, filter the reference through the QP, log,
then integrate vehicle and obstacles with the filtered input held
constant. Identical scenarios produce identical logs.
"""

from dataclasses import dataclass, field, replace
from math import atan2, hypot, isfinite, radians

from ._backend import kernel
from .cbf import CBF_KINDS, c3bf_eval, effective_radius, ellipse_cbf_eval, hocbf_eval
from .controllers import PGains, ReferencePath, p_controller, p_speed_bicycle, p_velocity, stanley_lateral
from .errors import SimulationError, ValidationError
from .models import MODEL_KINDS, ModelParams, STATE_TYPES, integrate_step
from .qpfilter import FilterConfig, FilterResult, activation_gate, filter_qp

# halt margin below the effective radius before declaring a collision
COLLISION_SLACK = 1e-6
# consecutive degenerate-filter steps tolerated before aborting
DEGENERATE_STEP_BUDGET = 200

# behavior-label thresholds (documented constants, see classify_behavior)
TURN_THRESHOLD_DEG = 15.0
BRAKE_SPEED_FRACTION = 0.10


@dataclass(frozen=True)
class ControllerSpec:
    """Declarative reference-controller choice for a scenario.

    kind 'p'       -- proportional law (per-model semantics)
    kind 'stanley' -- bicycle only: P speed + Stanley lateral tracking
    kind 'zero'    -- zero reference (filter acts alone)
    """

    kind: str = "p"
    k1: float = 1.0
    k2: float = 0.0
    v_des: float = 0.0
    v_des_vec: tuple = None
    k_e: float = 1.0
    path: ReferencePath = None
    a_max: float = None

    def __post_init__(self):
        if self.kind not in ("p", "stanley", "zero"):
            raise ValidationError(f"unknown controller kind {self.kind!r}")
        if self.kind == "stanley" and self.path is None:
            raise ValidationError("stanley controller needs a path")

    def gains(self) -> PGains:
        return PGains(self.k1, self.k2, self.v_des)


@dataclass(frozen=True)
class Scenario:
    """Complete declarative experiment description."""

    name: str
    model: str
    params: ModelParams
    initial_state: object
    obstacles: tuple
    controller: ControllerSpec
    filter: FilterConfig
    dt: float = 0.01
    duration: float = 10.0
    cbf: str = "c3bf"
    hocbf_gamma1: float = 1.0
    saturate_speed: bool = False

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise ValidationError(f"unknown model kind {self.model!r}")
        if self.cbf not in CBF_KINDS:
            raise ValidationError(f"unknown cbf kind {self.cbf!r}")
        if not isinstance(self.initial_state, STATE_TYPES[self.model]):
            raise ValidationError(
                f"initial state type {type(self.initial_state).__name__} does not "
                f"match model {self.model!r}"
            )
        if self.dt <= 0 or self.duration <= 0 or self.dt > self.duration:
            raise ValidationError(
                f"need 0 < dt <= duration, got dt={self.dt}, duration={self.duration}"
            )
        for o in self.obstacles:
            r = effective_radius(o, self.params)
            if r >= self.filter.activation_radius:
                raise ValidationError(
                    f"activation_radius {self.filter.activation_radius} must exceed "
                    f"effective radius {r}"
                )
        if self.cbf == "hocbf" and self.model == "bicycle":
            if any(o.moves() for o in self.obstacles):
                raise ValidationError(
                    "hocbf with a moving obstacle is invalid for the bicycle model"
                )
        if self.controller.kind == "stanley" and self.model != "bicycle":
            raise ValidationError("stanley controller is bicycle-only")
        if self.model == "bicycle" and self.filter.input_bounds is not None:
            lo, hi = self.filter.input_bounds[1]
            if lo < -self.params.beta_max or hi > self.params.beta_max:
                raise ValidationError(
                    f"bicycle slip bounds [{lo}, {hi}] exceed beta_max={self.params.beta_max}"
                )


@dataclass
class TrajectoryLog:
    """Column-oriented per-step record of one run."""

    scenario: Scenario
    t: list = field(default_factory=list)
    states: list = field(default_factory=list)
    u_ref: list = field(default_factory=list)
    u_star: list = field(default_factory=list)
    h: list = field(default_factory=list)
    psi: list = field(default_factory=list)
    dist: list = field(default_factory=list)
    active: list = field(default_factory=list)
    penetration: list = field(default_factory=list)
    degenerate: list = field(default_factory=list)
    infeasible: list = field(default_factory=list)
    collided: bool = False
    collision_step: int = None
    collision_obstacle: int = None

    def __len__(self):
        return len(self.t)


def _reference_input(sc: Scenario, state):
    c = sc.controller
    if c.kind == "zero":
        return (0.0, 0.0)
    if sc.model == "unicycle":
        u = p_controller(state, c.gains())
        if c.a_max is not None:
            u = (min(max(u[0], -c.a_max), c.a_max), u[1])
        return u
    if sc.model == "bicycle":
        a = p_speed_bicycle(state, c.gains(), c.a_max)
        if c.kind == "stanley":
            beta = stanley_lateral(state, c.path, c.k_e, sc.params)
        else:
            beta = 0.0
        return (a, beta)
    u = p_velocity(state, c.k1, c.v_des_vec or (c.v_des, 0.0))
    if c.a_max is not None:
        u = (min(max(u[0], -c.a_max), c.a_max), min(max(u[1], -c.a_max), c.a_max))
    return u


def _evaluate(sc: Scenario, state, obs_now):
    """Per-obstacle barrier evaluations at the current instant.

    Returns (evals, gated) where gated marks obstacles inside the
    perception boundary. With cbf='none' the cone barrier is still
    evaluated for the log, but nothing is gated in.
    """
    kind = sc.cbf if sc.cbf != "none" else "c3bf"
    evals = []
    gated = []
    for o in obs_now:
        if kind == "c3bf":
            e = c3bf_eval(sc.model, state, o, sc.params)
        elif kind == "ellipse":
            e = ellipse_cbf_eval(sc.model, state, o)
        else:
            e = hocbf_eval(sc.model, state, o, sc.hocbf_gamma1, sc.params)
        evals.append(e)
        gated.append(sc.cbf != "none" and activation_gate(e.dist, sc.filter))
    return evals, gated


def run_scenario(sc: Scenario) -> TrajectoryLog:
    """Execute a scenario to completion or until a collision verdict.

    The log gains one record per step boundary, floor(duration/dt)+1 in
    total. Raises SimulationError on integrator divergence or when the
    filter stays degenerate for more than DEGENERATE_STEP_BUDGET
    consecutive steps.
    """
    n_steps = int(sc.duration / sc.dt + 1e-9)
    log = TrajectoryLog(scenario=sc)
    state = sc.initial_state
    radii = [effective_radius(o, sc.params) for o in sc.obstacles]
    bounds = sc.filter.input_bounds
    if bounds is None and sc.model == "bicycle":
        # keep the small-slip model valid: the QP may not exceed beta_max
        bounds = ((float("-inf"), float("inf")), (-sc.params.beta_max, sc.params.beta_max))
    cfg = replace(sc.filter, input_bounds=bounds)
    degenerate_run = 0
    for k in range(n_steps + 1):
        t = k * sc.dt
        obs_now = [
            replace(o, cx=s[0], cy=s[1], vx=s[2], vy=s[3], segments=())
            for o, s in ((o, o.state_at(t)) for o in sc.obstacles)
        ]
        u_ref = _reference_input(sc, state)
        evals, gated = _evaluate(sc, state, obs_now)
        live = [e for e, g in zip(evals, gated) if g]
        live_idx = [i for i, g in enumerate(gated) if g]
        if live:
            res = filter_qp(u_ref, live, cfg)
        else:
            res = FilterResult(tuple(u_ref), (0.0, 0.0))
        # the applied input: on infeasible steps the violation minimizer
        # may exceed the box, but actuators saturate regardless
        u_cmd = res.u_star
        if cfg.input_bounds is not None:
            (lo0, hi0), (lo1, hi1) = cfg.input_bounds
            u_cmd = (min(max(u_cmd[0], lo0), hi0), min(max(u_cmd[1], lo1), hi1))
        active = [False] * len(evals)
        for j in res.active_set:
            active[live_idx[j]] = True
        gamma = sc.filter.gamma
        log.t.append(t)
        log.states.append(state.as_tuple())
        log.u_ref.append(tuple(u_ref))
        log.u_star.append(u_cmd)
        log.h.append(tuple(e.h for e in evals))
        log.psi.append(
            tuple(
                e.lfh + e.lgh[0] * u_ref[0] + e.lgh[1] * u_ref[1] + gamma * e.h
                for e in evals
            )
        )
        log.dist.append(tuple(e.dist for e in evals))
        log.active.append(tuple(active))
        log.penetration.append(tuple(e.penetration for e in evals))
        log.degenerate.append(res.degenerate)
        log.infeasible.append(res.infeasible)
        for i, (e, r) in enumerate(zip(evals, radii)):
            if e.dist <= r - COLLISION_SLACK:
                log.collided = True
                log.collision_step = k
                log.collision_obstacle = i
                return log
        degenerate_run = degenerate_run + 1 if res.degenerate else 0
        if degenerate_run > DEGENERATE_STEP_BUDGET:
            raise SimulationError(
                f"filter degenerate for {degenerate_run} consecutive steps", step=k
            )
        if k == n_steps:
            break
        try:
            state = integrate_step(sc.model, state, u_cmd, sc.dt, sc.params)
        except ValidationError as exc:
            raise SimulationError(f"integration failed at step {k}: {exc}", step=k)
        if sc.saturate_speed and sc.model in ("unicycle", "bicycle"):
            if abs(state.v) > sc.params.v_max:
                vclip = sc.params.v_max if state.v > 0 else -sc.params.v_max
                state = replace(state, v=vclip)
        if not all(isfinite(c) for c in state.as_tuple()):
            raise SimulationError(f"non-finite state at step {k + 1}", step=k + 1)
    return log


def _speed_series(log: TrajectoryLog):
    if log.scenario.model == "pointmass":
        return [hypot(s[2], s[3]) for s in log.states]
    return [s[3] for s in log.states]


def _heading_series(log: TrajectoryLog):
    """Unwrapped heading; for the point mass, the velocity direction."""
    if log.scenario.model == "pointmass":
        vd = log.scenario.controller.v_des_vec
        prev = atan2(vd[1], vd[0]) if vd and hypot(*vd) > 0 else 0.0
        raw = []
        for s in log.states:
            if hypot(s[2], s[3]) > 1e-3:
                prev = atan2(s[3], s[2])
            raw.append(prev)
    else:
        raw = [s[2] for s in log.states]
    out = [raw[0]]
    for th in raw[1:]:
        out.append(out[-1] + kernel.wrap_angle(th - out[-1]))
    return out


def _target_speed(sc: Scenario) -> float:
    if sc.controller.kind == "zero":
        return 0.0
    if sc.model == "pointmass":
        vd = sc.controller.v_des_vec or (sc.controller.v_des, 0.0)
        return hypot(*vd)
    return sc.controller.v_des


def classify_behavior(log: TrajectoryLog):
    """Qualitative labels for a completed run (possibly several).

    braking    -- speed drops below 10% of the target after having
                  reached 90% of it, with heading change under 15
                  degrees and no reversal
    turning    -- heading change of at least 15 degrees without reversing
    reversing  -- signed speed crosses below zero (unicycle/bicycle)
    overtaking -- a moving obstacle's along-track position relative to
                  the vehicle flips from ahead to behind
    """
    if not log.t:
        return ()
    labels = []
    speeds = _speed_series(log)
    headings = _heading_series(log)
    v_des = _target_speed(log.scenario)
    turn = max(abs(th - headings[0]) for th in headings)
    turn_limit = radians(TURN_THRESHOLD_DEG)
    v_min = min(speeds)
    reversed_ = log.scenario.model != "pointmass" and v_min < -1e-9
    if reversed_:
        labels.append("reversing")
    if turn >= turn_limit and not reversed_:
        labels.append("turning")
    if v_des > 0 and not reversed_ and turn < turn_limit:
        up = next((k for k, v in enumerate(speeds) if v >= 0.9 * v_des), None)
        if up is not None and min(speeds[up:]) < BRAKE_SPEED_FRACTION * v_des:
            labels.append("braking")
    # overtaking: along-track relative position flips sign ahead -> behind
    start = log.states[0]
    end = log.states[-1]
    track = (end[0] - start[0], end[1] - start[1])
    norm = hypot(*track)
    if norm > 1e-9:
        tx, ty = track[0] / norm, track[1] / norm
        for i, o in enumerate(log.scenario.obstacles):
            if not o.moves():
                continue
            s_rel = []
            for k, t in enumerate(log.t):
                cx, cy, _, _ = o.state_at(t)
                vx, vy = log.states[k][0], log.states[k][1]
                s_rel.append((vx - cx) * tx + (vy - cy) * ty)
            if s_rel[0] < 0 and s_rel[-1] > 0:
                labels.append("overtaking")
                break
    return tuple(labels)


@dataclass(frozen=True)
class SafetyMetrics:
    """Run summary used by reports and the acceptance gate."""

    min_clearance: tuple
    min_clearance_overall: float
    min_h: float
    active_fraction: float
    max_u_safe: float
    max_abs_beta: float = None


def safety_metrics(log: TrajectoryLog) -> SafetyMetrics:
    """Clearance, barrier, and filter-effort summary of a completed log."""
    sc = log.scenario
    radii = [effective_radius(o, sc.params) for o in sc.obstacles]
    if sc.obstacles and log.t:
        per_obs = tuple(
            min(log.dist[k][i] - radii[i] for k in range(len(log.t)))
            for i in range(len(sc.obstacles))
        )
        min_h = min(min(hs) for hs in log.h)
        overall = min(per_obs)
    else:
        per_obs = ()
        min_h = float("inf")
        overall = float("inf")
    if log.t:
        n_active = sum(1 for flags in log.active if any(flags))
        frac = n_active / len(log.t)
        max_us = max(hypot(us[0] - ur[0], us[1] - ur[1]) for us, ur in zip(log.u_star, log.u_ref))
    else:
        frac = 0.0
        max_us = 0.0
    max_beta = None
    if sc.model == "bicycle":
        max_beta = max(abs(u[1]) for u in log.u_star) if log.t else 0.0
    return SafetyMetrics(per_obs, overall, min_h, frac, max_us, max_beta)
