"""Vehicle models: states, parameters, control-affine derivatives, stepping.

Three acceleration-controlled models are supported:

* unicycle  -- state (x, y, theta, v, omega), inputs (a, alpha)
* bicycle   -- state (x, y, theta, v), inputs (a, beta), small slip angle
* pointmass -- state (x, y, vx, vy), inputs (ax, ay)

All operations are pure functions; states are immutable. Inputs are plain
(u0, u1) tuples whose meaning depends on the model.
"""

from dataclasses import dataclass
from math import atan, cos, isfinite, pi, sin, tan

from ._backend import kernel
from .errors import ValidationError

MODEL_KINDS = ("unicycle", "bicycle", "pointmass")

ControlInput = tuple[float, float]


def _require_finite(name, *values):
    for v in values:
        if not isfinite(v):
            raise ValidationError(f"{name}: non-finite value {v!r}")


@dataclass(frozen=True)
class UnicycleState:
    """Pose, speed and yaw rate; theta is normalized to (-pi, pi]."""

    x: float
    y: float
    theta: float
    v: float
    omega: float

    def __post_init__(self):
        _require_finite("UnicycleState", self.x, self.y, self.theta, self.v, self.omega)
        object.__setattr__(self, "theta", kernel.wrap_angle(self.theta))

    def as_tuple(self):
        return (self.x, self.y, self.theta, self.v, self.omega)


@dataclass(frozen=True)
class BicycleState:
    """Center-of-mass pose and speed; theta is normalized to (-pi, pi]."""

    x: float
    y: float
    theta: float
    v: float

    def __post_init__(self):
        _require_finite("BicycleState", self.x, self.y, self.theta, self.v)
        object.__setattr__(self, "theta", kernel.wrap_angle(self.theta))

    def as_tuple(self):
        return (self.x, self.y, self.theta, self.v)


@dataclass(frozen=True)
class PointMassState:
    """Planar double-integrator state."""

    x: float
    y: float
    vx: float
    vy: float

    def __post_init__(self):
        _require_finite("PointMassState", self.x, self.y, self.vx, self.vy)

    def as_tuple(self):
        return (self.x, self.y, self.vx, self.vy)


@dataclass(frozen=True)
class ModelParams:
    """Geometry and validity limits shared by the vehicle models.

    l        -- body-center offset from the differential-drive axis (unicycle)
    l_f, l_r -- front/rear axle distances from the center of mass (bicycle)
    w        -- maximum vehicle width, absorbed into the effective radius
    beta_max -- slip-angle magnitude cap keeping the small-angle model valid
    v_max    -- speed cap, applied only when a scenario requests saturation
    """

    l: float = 0.0
    l_f: float = 1.0
    l_r: float = 1.0
    w: float = 0.0
    beta_max: float = 0.2
    v_max: float = float("inf")

    def __post_init__(self):
        _require_finite("ModelParams", self.l, self.l_f, self.l_r, self.w, self.beta_max)
        if self.l < 0:
            raise ValidationError(f"body-center offset l must be >= 0, got {self.l}")
        if self.l_f <= 0 or self.l_r <= 0:
            raise ValidationError("axle distances l_f, l_r must be > 0")
        if self.w < 0:
            raise ValidationError(f"vehicle width must be >= 0, got {self.w}")
        if not 0 < self.beta_max < pi / 2:
            raise ValidationError(f"beta_max must lie in (0, pi/2), got {self.beta_max}")


STATE_TYPES = {
    "unicycle": UnicycleState,
    "bicycle": BicycleState,
    "pointmass": PointMassState,
}

STATE_FIELDS = {
    "unicycle": ("x", "y", "theta", "v", "omega"),
    "bicycle": ("x", "y", "theta", "v"),
    "pointmass": ("x", "y", "vx", "vy"),
}


def unicycle_derivative(s: UnicycleState, u: ControlInput):
    """Time derivative (x', y', theta', v', omega') for inputs (a, alpha)."""
    a, alpha = u
    _require_finite("unicycle input", a, alpha)
    return (s.v * cos(s.theta), s.v * sin(s.theta), s.omega, a, alpha)


def bicycle_derivative(s: BicycleState, u: ControlInput, p: ModelParams):
    """Time derivative (x', y', theta', v') for inputs (a, beta).

    Valid only within the small-slip regime |beta| <= beta_max.
    """
    a, beta = u
    _require_finite("bicycle input", a, beta)
    if abs(beta) > p.beta_max:
        raise ValidationError(
            f"|beta|={abs(beta):.4f} exceeds beta_max={p.beta_max}; small-angle model invalid"
        )
    ct = cos(s.theta)
    st = sin(s.theta)
    return (
        s.v * ct - s.v * beta * st,
        s.v * st + s.v * beta * ct,
        s.v * beta / p.l_r,
        a,
    )


def pointmass_derivative(s: PointMassState, u: ControlInput):
    """Time derivative (x', y', vx', vy') of the double integrator."""
    ax, ay = u
    _require_finite("pointmass input", ax, ay)
    return (s.vx, s.vy, ax, ay)


def slip_from_steering(delta: float, p: ModelParams) -> float:
    """Slip angle at the center of mass for a given steering angle."""
    if not abs(delta) < pi / 2:
        raise ValidationError(f"steering angle must satisfy |delta| < pi/2, got {delta}")
    return atan(p.l_r / (p.l_f + p.l_r) * tan(delta))


def integrate_step(model: str, s, u: ControlInput, dt: float, p: ModelParams = None):
    """Advance one state by a fixed RK4 step with zero-order-hold input.

    Heading states are renormalized after the step. Raises ValidationError
    when the result is non-finite.
    """
    if dt <= 0:
        raise ValidationError(f"dt must be > 0, got {dt}")
    if model == "unicycle":
        nxt = kernel.rk4_unicycle(s.x, s.y, s.theta, s.v, s.omega, u[0], u[1], dt)
        out = UnicycleState(*nxt)
    elif model == "bicycle":
        if p is None:
            raise ValidationError("bicycle integration needs ModelParams (l_r)")
        if abs(u[1]) > p.beta_max:
            raise ValidationError(
                f"|beta|={abs(u[1]):.4f} exceeds beta_max={p.beta_max}"
            )
        nxt = kernel.rk4_bicycle(s.x, s.y, s.theta, s.v, u[0], u[1], p.l_r, dt)
        out = BicycleState(*nxt)
    elif model == "pointmass":
        nxt = kernel.rk4_pointmass(s.x, s.y, s.vx, s.vy, u[0], u[1], dt)
        out = PointMassState(*nxt)
    else:
        raise ValidationError(f"unknown model kind {model!r}")
    return out
