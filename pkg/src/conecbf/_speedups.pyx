# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of conecbf._pykernel (same functions, same semantics).

Kept in lockstep with the pure module; the backend tests assert the two
agree to machine precision on random inputs.
"""

from libc.math cimport cos, fabs, fmod, sin, sqrt
from libc.stdlib cimport free, malloc

backend_name = "compiled"

cdef double PI = 3.141592653589793238462643383279502884
cdef double TWO_PI = 6.283185307179586476925286766559005768
cdef double FEAS_TOL = 1e-10


cdef inline double _wrap(double theta) nogil:
    cdef double t = fmod(theta + PI, TWO_PI)
    if t <= 0.0:
        t += TWO_PI
    return t - PI


def wrap_angle(double theta):
    """Normalize an angle to (-pi, pi]."""
    return _wrap(theta)


# ---------------------------------------------------------------------------
# collision-cone barrier (see _pykernel for the conventions)
# ---------------------------------------------------------------------------

cdef struct ConeTerms:
    double h
    double ax, ay      # dh/dp_rel
    double bx, by      # dh/dv_rel
    double dist
    double pen


cdef inline ConeTerms _cone_terms(double px, double py, double vx, double vy,
                                  double r) nogil:
    cdef ConeTerms out
    cdef double d2 = px * px + py * py
    cdef double dot = px * vx + py * vy
    cdef double n2 = vx * vx + vy * vy
    cdef double s, n, k1, k2
    out.dist = sqrt(d2)
    if d2 <= r * r:
        out.h = dot
        out.ax = vx; out.ay = vy
        out.bx = px; out.by = py
        out.pen = 1.0
        return out
    s = sqrt(d2 - r * r)
    n = sqrt(n2)
    out.h = dot + n * s
    out.pen = 0.0
    if n == 0.0:
        out.ax = vx; out.ay = vy
        out.bx = px; out.by = py
        return out
    k1 = n / s
    k2 = s / n
    out.ax = vx + k1 * px
    out.ay = vy + k1 * py
    out.bx = px + k2 * vx
    out.by = py + k2 * vy
    return out


def c3bf_unicycle(double x, double y, double th, double v, double om, double l,
                  double cx, double cy, double cxd, double cyd, double r):
    cdef double ct = cos(th)
    cdef double st = sin(th)
    cdef double px = cx - (x + l * ct)
    cdef double py = cy - (y + l * st)
    cdef double vx = cxd - (v * ct - l * om * st)
    cdef double vy = cyd - (v * st + l * om * ct)
    cdef ConeTerms c = _cone_terms(px, py, vx, vy, r)
    cdef double dfx = v * om * st + l * om * om * ct
    cdef double dfy = -v * om * ct + l * om * om * st
    cdef double lfh = c.ax * vx + c.ay * vy + c.bx * dfx + c.by * dfy
    cdef double lg0 = -(c.bx * ct + c.by * st)
    cdef double lg1 = l * (c.bx * st - c.by * ct)
    return c.h, lfh, lg0, lg1, c.dist, c.pen


def c3bf_bicycle(double x, double y, double th, double v, double lr,
                 double cx, double cy, double cxd, double cyd, double r):
    cdef double ct = cos(th)
    cdef double st = sin(th)
    cdef double px = cx - x
    cdef double py = cy - y
    cdef double vx = cxd - v * ct
    cdef double vy = cyd - v * st
    cdef ConeTerms c = _cone_terms(px, py, vx, vy, r)
    cdef double lfh = c.ax * vx + c.ay * vy
    cdef double lg0 = -(c.bx * ct + c.by * st)
    cdef double a_en = c.ax * st - c.ay * ct
    cdef double b_en = c.bx * st - c.by * ct
    cdef double lg1 = v * a_en + (v * v / lr) * b_en
    return c.h, lfh, lg0, lg1, c.dist, c.pen


def c3bf_pointmass(double x, double y, double vx_s, double vy_s,
                   double cx, double cy, double cxd, double cyd, double r):
    cdef double px = cx - x
    cdef double py = cy - y
    cdef double vx = cxd - vx_s
    cdef double vy = cyd - vy_s
    cdef ConeTerms c = _cone_terms(px, py, vx, vy, r)
    cdef double lfh = c.ax * vx + c.ay * vy
    return c.h, lfh, -c.bx, -c.by, c.dist, c.pen


# ---------------------------------------------------------------------------
# elliptical distance barrier baseline
# ---------------------------------------------------------------------------

def ellipse_unicycle(double x, double y, double th, double v,
                     double cx, double cy, double cxd, double cyd,
                     double c1, double c2):
    cdef double dxn = (cx - x) / (c1 * c1)
    cdef double dyn = (cy - y) / (c2 * c2)
    cdef double h = (cx - x) * dxn + (cy - y) * dyn - 1.0
    cdef double lfh = 2.0 * dxn * (cxd - v * cos(th)) + 2.0 * dyn * (cyd - v * sin(th))
    cdef double dist = sqrt((cx - x) * (cx - x) + (cy - y) * (cy - y))
    return h, lfh, 0.0, 0.0, dist, 0.0


def ellipse_bicycle(double x, double y, double th, double v,
                    double cx, double cy, double cxd, double cyd,
                    double c1, double c2):
    cdef double ct = cos(th)
    cdef double st = sin(th)
    cdef double dxn = (cx - x) / (c1 * c1)
    cdef double dyn = (cy - y) / (c2 * c2)
    cdef double h = (cx - x) * dxn + (cy - y) * dyn - 1.0
    cdef double lfh = 2.0 * dxn * (cxd - v * ct) + 2.0 * dyn * (cyd - v * st)
    cdef double lg1 = 2.0 * dxn * v * st - 2.0 * dyn * v * ct
    cdef double dist = sqrt((cx - x) * (cx - x) + (cy - y) * (cy - y))
    return h, lfh, 0.0, lg1, dist, 0.0


def ellipse_pointmass(double x, double y, double vx_s, double vy_s,
                      double cx, double cy, double cxd, double cyd,
                      double c1, double c2):
    cdef double dxn = (cx - x) / (c1 * c1)
    cdef double dyn = (cy - y) / (c2 * c2)
    cdef double h = (cx - x) * dxn + (cy - y) * dyn - 1.0
    cdef double lfh = 2.0 * dxn * (cxd - vx_s) + 2.0 * dyn * (cyd - vy_s)
    cdef double dist = sqrt((cx - x) * (cx - x) + (cy - y) * (cy - y))
    return h, lfh, 0.0, 0.0, dist, 0.0


# ---------------------------------------------------------------------------
# second-order extension of the ellipse barrier
# ---------------------------------------------------------------------------

def hocbf_unicycle(double x, double y, double th, double v, double om,
                   double cx, double cy, double cxd, double cyd,
                   double c1, double c2, double gamma1):
    cdef double ct = cos(th)
    cdef double st = sin(th)
    cdef double q1 = 2.0 / (c1 * c1)
    cdef double q2 = 2.0 / (c2 * c2)
    cdef double dx = cx - x
    cdef double dy = cy - y
    cdef double vxr = cxd - v * ct
    cdef double vyr = cyd - v * st
    cdef double h1 = 0.5 * q1 * dx * dx + 0.5 * q2 * dy * dy - 1.0
    cdef double h2 = q1 * dx * vxr + q2 * dy * vyr + gamma1 * h1
    cdef double lfh = (q1 * (vxr + gamma1 * dx) * vxr
                       + q2 * (vyr + gamma1 * dy) * vyr
                       + om * v * (q1 * dx * st - q2 * dy * ct))
    cdef double lg0 = -(q1 * dx * ct + q2 * dy * st)
    cdef double dist = sqrt(dx * dx + dy * dy)
    return h2, lfh, lg0, 0.0, dist, 0.0


def hocbf_bicycle(double x, double y, double th, double v, double lr,
                  double cx, double cy, double cxd, double cyd,
                  double c1, double c2, double gamma1):
    cdef double ct = cos(th)
    cdef double st = sin(th)
    cdef double q1 = 2.0 / (c1 * c1)
    cdef double q2 = 2.0 / (c2 * c2)
    cdef double dx = cx - x
    cdef double dy = cy - y
    cdef double vxr = cxd - v * ct
    cdef double vyr = cyd - v * st
    cdef double h1 = 0.5 * q1 * dx * dx + 0.5 * q2 * dy * dy - 1.0
    cdef double h2 = q1 * dx * vxr + q2 * dy * vyr + gamma1 * h1
    cdef double lfh = q1 * (vxr + gamma1 * dx) * vxr + q2 * (vyr + gamma1 * dy) * vyr
    cdef double lg0 = -(q1 * dx * ct + q2 * dy * st)
    cdef double lg1 = (v * st * q1 * (vxr + gamma1 * dx)
                       - v * ct * q2 * (vyr + gamma1 * dy)
                       + (v / lr) * v * (q1 * dx * st - q2 * dy * ct))
    cdef double dist = sqrt(dx * dx + dy * dy)
    return h2, lfh, lg0, lg1, dist, 0.0


def hocbf_pointmass(double x, double y, double vx_s, double vy_s,
                    double cx, double cy, double cxd, double cyd,
                    double c1, double c2, double gamma1):
    cdef double q1 = 2.0 / (c1 * c1)
    cdef double q2 = 2.0 / (c2 * c2)
    cdef double dx = cx - x
    cdef double dy = cy - y
    cdef double vxr = cxd - vx_s
    cdef double vyr = cyd - vy_s
    cdef double h1 = 0.5 * q1 * dx * dx + 0.5 * q2 * dy * dy - 1.0
    cdef double h2 = q1 * dx * vxr + q2 * dy * vyr + gamma1 * h1
    cdef double lfh = q1 * (vxr + gamma1 * dx) * vxr + q2 * (vyr + gamma1 * dy) * vyr
    cdef double dist = sqrt(dx * dx + dy * dy)
    return h2, lfh, -q1 * dx, -q2 * dy, dist, 0.0


# ---------------------------------------------------------------------------
# classical fixed-step RK4
# ---------------------------------------------------------------------------

def rk4_unicycle(double x, double y, double th, double v, double om,
                 double a, double al, double dt):
    cdef double h2 = 0.5 * dt
    cdef double w = dt / 6.0
    # k1
    cdef double k1x = v * cos(th), k1y = v * sin(th), k1t = om
    # k2
    cdef double v2 = v + h2 * a, t2 = th + h2 * k1t, o2 = om + h2 * al
    cdef double k2x = v2 * cos(t2), k2y = v2 * sin(t2), k2t = o2
    # k3
    cdef double t3 = th + h2 * k2t
    cdef double k3x = v2 * cos(t3), k3y = v2 * sin(t3), k3t = o2
    # k4
    cdef double v4 = v + dt * a, t4 = th + dt * k3t, o4 = om + dt * al
    cdef double k4x = v4 * cos(t4), k4y = v4 * sin(t4), k4t = o4
    return (
        x + w * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        y + w * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
        _wrap(th + w * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)),
        v + dt * a,
        om + dt * al,
    )


def rk4_bicycle(double x, double y, double th, double v,
                double a, double be, double lr, double dt):
    cdef double h2 = 0.5 * dt
    cdef double w = dt / 6.0
    cdef double ct = cos(th), st = sin(th)
    cdef double k1x = v * ct - v * be * st, k1y = v * st + v * be * ct, k1t = v * be / lr
    cdef double v2 = v + h2 * a, t2 = th + h2 * k1t
    cdef double c2_ = cos(t2), s2 = sin(t2)
    cdef double k2x = v2 * c2_ - v2 * be * s2, k2y = v2 * s2 + v2 * be * c2_, k2t = v2 * be / lr
    cdef double t3 = th + h2 * k2t
    cdef double c3_ = cos(t3), s3 = sin(t3)
    cdef double k3x = v2 * c3_ - v2 * be * s3, k3y = v2 * s3 + v2 * be * c3_, k3t = v2 * be / lr
    cdef double v4 = v + dt * a, t4 = th + dt * k3t
    cdef double c4_ = cos(t4), s4 = sin(t4)
    cdef double k4x = v4 * c4_ - v4 * be * s4, k4y = v4 * s4 + v4 * be * c4_, k4t = v4 * be / lr
    return (
        x + w * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        y + w * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
        _wrap(th + w * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)),
        v + dt * a,
    )


def rk4_pointmass(double x, double y, double vx, double vy,
                  double ax, double ay, double dt):
    return (
        x + dt * vx + 0.5 * dt * dt * ax,
        y + dt * vy + 0.5 * dt * dt * ay,
        vx + dt * ax,
        vy + dt * ay,
    )


# ---------------------------------------------------------------------------
# minimal-deviation QP in two variables
# ---------------------------------------------------------------------------

cdef int _violation_c(double u0, double u1, double* g0, double* g1, double* b,
                      int m, int s0, int s1) nogil:
    cdef int worst = -1
    cdef int i
    cdef double worst_v = FEAS_TOL
    cdef double vi
    for i in range(m):
        if i == s0 or i == s1:
            continue
        vi = (b[i] - (g0[i] * u0 + g1[i] * u1)) / (1.0 + fabs(b[i]))
        if vi > worst_v:
            worst_v = vi
            worst = i
    return worst


cdef bint _feasible_c(double u0, double u1, double* g0, double* g1, double* b,
                      int m) nogil:
    cdef int i
    for i in range(m):
        if b[i] - (g0[i] * u0 + g1[i] * u1) > FEAS_TOL * (1.0 + fabs(b[i])):
            return False
    return True


cdef _enumerate_qp_c(double ur0, double ur1, double* g0, double* g1, double* b,
                     int m):
    cdef double best_d2 = 0.0
    cdef int best_i = -2, best_j = -2
    cdef bint have = False
    cdef int i, j
    cdef double gg, lam, u0, u1, det, scale, d2
    if _feasible_c(ur0, ur1, g0, g1, b, m):
        return ur0, ur1, (), True
    for i in range(m):
        gg = g0[i] * g0[i] + g1[i] * g1[i]
        if gg <= 0.0:
            continue
        lam = (b[i] - (g0[i] * ur0 + g1[i] * ur1)) / gg
        u0 = ur0 + lam * g0[i]
        u1 = ur1 + lam * g1[i]
        if _feasible_c(u0, u1, g0, g1, b, m):
            d2 = (u0 - ur0) * (u0 - ur0) + (u1 - ur1) * (u1 - ur1)
            if not have or d2 < best_d2:
                have = True
                best_d2 = d2
                best_i = i
                best_j = -1
    for i in range(m):
        for j in range(i + 1, m):
            det = g0[i] * g1[j] - g1[i] * g0[j]
            scale = fabs(g0[i]) + fabs(g1[i]) + fabs(g0[j]) + fabs(g1[j])
            if fabs(det) <= 1e-14 * scale * scale:
                continue
            u0 = (b[i] * g1[j] - g1[i] * b[j]) / det
            u1 = (g0[i] * b[j] - b[i] * g0[j]) / det
            if _feasible_c(u0, u1, g0, g1, b, m):
                d2 = (u0 - ur0) * (u0 - ur0) + (u1 - ur1) * (u1 - ur1)
                if not have or d2 < best_d2:
                    have = True
                    best_d2 = d2
                    best_i = i
                    best_j = j
    if not have:
        u0, u1 = _least_violation_c(ur0, ur1, g0, g1, b, m)
        return u0, u1, (), False
    if best_j == -1:
        i = best_i
        gg = g0[i] * g0[i] + g1[i] * g1[i]
        lam = (b[i] - (g0[i] * ur0 + g1[i] * ur1)) / gg
        return ur0 + lam * g0[i], ur1 + lam * g1[i], (best_i,), True
    i = best_i
    j = best_j
    det = g0[i] * g1[j] - g1[i] * g0[j]
    u0 = (b[i] * g1[j] - g1[i] * b[j]) / det
    u1 = (g0[i] * b[j] - b[i] * g0[j]) / det
    return u0, u1, (best_i, best_j), True


cdef (double, double) _least_violation_c(double ur0, double ur1, double* g0,
                                         double* g1, double* b, int m) nogil:
    cdef double u0 = ur0, u1 = ur1
    cdef double a00, a01, a11, r0, r1, det, n0, n1, nrm, gx, gy, t_star, off
    cdef int it, i, count
    for it in range(12):
        a00 = a01 = a11 = r0 = r1 = 0.0
        count = 0
        for i in range(m):
            if g0[i] * u0 + g1[i] * u1 >= b[i] - FEAS_TOL:
                continue
            count += 1
            a00 += g0[i] * g0[i]
            a01 += g0[i] * g1[i]
            a11 += g1[i] * g1[i]
            r0 += g0[i] * b[i]
            r1 += g1[i] * b[i]
        if count == 0:
            break
        det = a00 * a11 - a01 * a01
        if fabs(det) > 1e-14 * (a00 + a11) * (a00 + a11):
            n0 = (a11 * r0 - a01 * r1) / det
            n1 = (a00 * r1 - a01 * r0) / det
        else:
            nrm = sqrt(a00 + a11)
            if nrm == 0.0:
                break
            if a00 >= a11:
                gx = sqrt(a00)
                gy = a01 / gx
            else:
                gy = sqrt(a11)
                gx = a01 / gy
            gx /= nrm
            gy /= nrm
            t_star = (r0 * gx + r1 * gy) / (a00 * gx * gx + 2 * a01 * gx * gy + a11 * gy * gy)
            off = u0 * gx + u1 * gy
            n0 = u0 + (t_star - off) * gx
            n1 = u1 + (t_star - off) * gy
        if fabs(n0 - u0) <= 1e-14 * (1 + fabs(u0)) and fabs(n1 - u1) <= 1e-14 * (1 + fabs(u1)):
            u0 = n0
            u1 = n1
            break
        u0 = n0
        u1 = n1
    return u0, u1


def solve_qp2(double ur0, double ur1, g0s, g1s, bs):
    """Solve min ||u - u_ref||^2 s.t. g_i . u >= b_i over u in R^2."""
    cdef int m = len(bs)
    if m == 0:
        return ur0, ur1, (), True
    cdef double* g0 = <double*> malloc(3 * m * sizeof(double))
    if g0 == NULL:
        raise MemoryError()
    cdef double* g1 = g0 + m
    cdef double* b = g0 + 2 * m
    cdef int i, jj, nxt, wi, wj, wn
    cdef double gg, lam, u0, u1, det, scale, du0, du1, li, lj
    try:
        for i in range(m):
            g0[i] = g0s[i]
            g1[i] = g1s[i]
            b[i] = bs[i]
        nxt = _violation_c(ur0, ur1, g0, g1, b, m, -1, -1)
        if nxt < 0:
            return ur0, ur1, (), True
        wi = nxt
        wj = -1
        wn = 1
        u0 = ur0
        u1 = ur1
        for _ in range(2 * m + 8):
            if wn == 1:
                i = wi
                gg = g0[i] * g0[i] + g1[i] * g1[i]
                if gg <= 0.0:
                    return _enumerate_qp_c(ur0, ur1, g0, g1, b, m)
                lam = (b[i] - (g0[i] * ur0 + g1[i] * ur1)) / gg
                if lam < 0.0:
                    u0 = ur0
                    u1 = ur1
                    wn = 0
                    wi = -1
                else:
                    u0 = ur0 + lam * g0[i]
                    u1 = ur1 + lam * g1[i]
            elif wn == 2:
                i = wi
                jj = wj
                det = g0[i] * g1[jj] - g1[i] * g0[jj]
                scale = fabs(g0[i]) + fabs(g1[i]) + fabs(g0[jj]) + fabs(g1[jj])
                if fabs(det) <= 1e-14 * scale * scale:
                    return _enumerate_qp_c(ur0, ur1, g0, g1, b, m)
                u0 = (b[i] * g1[jj] - g1[i] * b[jj]) / det
                u1 = (g0[i] * b[jj] - b[i] * g0[jj]) / det
                du0 = u0 - ur0
                du1 = u1 - ur1
                li = (du0 * g1[jj] - g0[jj] * du1) / det
                lj = (g0[i] * du1 - du0 * g1[i]) / det
                if li < -1e-12 or lj < -1e-12:
                    if li <= lj:
                        wi = jj
                    wj = -1
                    wn = 1
                    continue
            else:
                u0 = ur0
                u1 = ur1
            nxt = _violation_c(u0, u1, g0, g1, b, m, wi, wj)
            if nxt < 0:
                if wn == 0:
                    return u0, u1, (), True
                if wn == 1:
                    return u0, u1, (wi,), True
                return (u0, u1, (wi, wj) if wi < wj else (wj, wi), True)
            if wn >= 2:
                return _enumerate_qp_c(ur0, ur1, g0, g1, b, m)
            if wn == 0:
                wi = nxt
                wn = 1
            else:
                wj = nxt
                wn = 2
        return _enumerate_qp_c(ur0, ur1, g0, g1, b, m)
    finally:
        free(g0)
