"""Characteristic flow, Radon reconstruction of gradients, a brute-force oracle
and equilibria of the gradient system ``v' = -v1 v + Q v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit
from scipy.integrate import solve_ivp

from .criteria import verdict_from_coefficients, with_time
from .decisive import as_gradient, build_q, coefficients, first_positive_root
from .errors import BlowupCrossedError, InvalidInputError, NumericalFailure
from .linalg2 import (
    ComplexPair,
    RealDistinct,
    RealRepeatedDefective,
    RealRepeatedDiagonalizable,
    as_matrix,
    jordanize,
)

ORACLE_T_MAX = 50.0
ORACLE_THRESHOLD = 1e8
ORACLE_RTOL = 1e-10
ORACLE_ATOL = 1e-12


# ---------------------------------------------------------------------------
# characteristics: V' = Q V, x' = V1


@dataclass(frozen=True)
class CharState:
    t: float
    x: float
    V1: float
    V2: float


def _psi(j: int, x: float) -> float:
    """``int_0^1 w^j e^{x w} dw``."""
    if abs(x) <= 1.0:
        total, term = 0.0, 1.0
        for n in range(40):
            total += term / (n + j + 1)
            term *= x / (n + 1)
        return total
    val = math.expm1(x) / x
    ex = math.exp(x)
    for i in range(1, j + 1):
        val = (ex - i * val) / x
    return val


def _phi1c(z: complex) -> complex:
    """``(e^z - 1)/z`` for complex z without cancellation near the imaginary axis."""
    if z == 0:
        return 1.0 + 0.0j
    a, b = z.real, z.imag
    em1 = complex(math.expm1(a) * math.cos(b) - 2.0 * math.sin(0.5 * b) ** 2, math.exp(a) * math.sin(b))
    return em1 / z


def _phi1(x: float) -> float:
    return 1.0 if x == 0.0 else math.expm1(x) / x


def exp_and_integral(Q, t: float) -> tuple[np.ndarray, np.ndarray]:
    """``exp(Q t)`` and ``int_0^t exp(Q s) ds`` in closed form.

    With ``tau = tr Q / 2`` and ``N = Q - tau I`` one has ``N @ N = sigma I``;
    the sign of ``sigma`` selects hyperbolic, parabolic or trigonometric
    functions. Near ``sigma t^2 = 0`` short series in ``sigma`` are used.
    """
    Q = as_matrix(Q)
    t = float(t)
    tau = 0.5 * Q.trace
    N = np.array([[Q.a - tau, Q.b], [Q.c, Q.d - tau]])
    sigma = 0.25 * (Q.a - Q.d) ** 2 + Q.b * Q.c
    x = sigma * t * t
    et = math.exp(tau * t)
    if abs(x) < 1e-6:
        ch = et * (1.0 + x / 2 + x * x / 24)
        sh = et * t * (1.0 + x / 6 + x * x / 120)
        m = [t ** (j + 1) * _psi(j, tau * t) for j in range(6)]
        ich = m[0] + sigma * m[2] / 2 + sigma**2 * m[4] / 24
        ish = m[1] + sigma * m[3] / 6 + sigma**2 * m[5] / 120
    elif sigma > 0.0:
        s = math.sqrt(sigma)
        ch = et * math.cosh(s * t)
        sh = et * math.sinh(s * t) / s
        p, m_ = _phi1((tau + s) * t), _phi1((tau - s) * t)
        ich = 0.5 * t * (p + m_)
        ish = t * (p - m_) / (2.0 * s)
    else:
        w = math.sqrt(-sigma)
        ch = et * math.cos(w * t)
        sh = et * math.sin(w * t) / w
        P = t * _phi1c(complex(tau * t, w * t))
        ich = P.real
        ish = P.imag / w
    eye = np.eye(2)
    return ch * eye + sh * N, ich * eye + ish * N


def solve_characteristic(Q, V0, x0: float, t: float) -> CharState:
    """State ``(x, V)`` at time ``t`` on the characteristic starting at ``x0``.

    >>> s = solve_characteristic([[0, 0], [0, 0]], (1.0, 0.0), 0.0, 2.0)
    >>> (s.x, s.V1, s.V2)
    (2.0, 1.0, 0.0)
    """
    if not t >= 0:
        raise InvalidInputError("t must be non-negative")
    E, I = exp_and_integral(Q, t)
    V0 = np.asarray(V0, dtype=float)
    V = E @ V0
    return CharState(float(t), float(x0 + I[0] @ V0), float(V[0]), float(V[1]))


# ---------------------------------------------------------------------------
# gradients along a characteristic


@dataclass(frozen=True)
class DerivativeState:
    t: float
    v1: float
    v2: float


def _jordan_flow(spec, w1: float, w2: float, t: float) -> tuple[float, float]:
    """``exp(J t) w`` for the canonical blocks used by ``jordanize``."""
    if isinstance(spec, RealDistinct):
        return math.exp(spec.lam1 * t) * w1, math.exp(spec.lam2 * t) * w2
    if isinstance(spec, RealRepeatedDiagonalizable):
        e = math.exp(spec.lam * t)
        return e * w1, e * w2
    if isinstance(spec, RealRepeatedDefective):
        e = math.exp(spec.lam * t)
        return e * (w1 + w2 * t), e * w2
    e = math.exp(spec.alpha * t)
    c, s = math.cos(spec.beta * t), math.sin(spec.beta * t)
    return e * (w1 * c + w2 * s), e * (w2 * c - w1 * s)


def radon_derivatives(Q, v0, t: float) -> DerivativeState:
    """Gradients at time ``t`` from the linearized system ``v = A^-1 u / q``.

    Raises ``BlowupCrossedError`` when q vanishes somewhere on ``[0, t]``.
    """
    if not t >= 0:
        raise InvalidInputError("t must be non-negative")
    v0 = as_gradient(v0)
    jd = jordanize(Q)
    co = coefficients(jd, v0)
    q = build_q(co)
    t_star = first_positive_root(q, t_max=t) if t > 0 else None
    if t_star is not None:
        raise BlowupCrossedError(t_star)
    w1, w2 = jd.A.apply(v0.v1, v0.v2)
    u1, u2 = _jordan_flow(co.spectrum, w1, w2, t)
    qt = float(q(t))
    v1, v2 = jd.A_inv.apply(u1 / qt, u2 / qt)
    return DerivativeState(float(t), v1, v2)


def gradient_rhs(Q, v) -> np.ndarray:
    Q = as_matrix(Q)
    v1, v2 = v
    return np.array([Q.a * v1 + Q.b * v2 - v1 * v1, Q.c * v1 + Q.d * v2 - v1 * v2])


def integrate_derivatives(Q, v0, t_eval, rtol: float = 1e-12, atol: float = 1e-14) -> np.ndarray:
    """Direct high-order integration of the gradient system at the times ``t_eval``.

    Returns an array of shape ``(len(t_eval), 2)``. Used as an independent
    check of the closed-form reconstruction.
    """
    Q = as_matrix(Q)
    a, b, c, d = Q.a, Q.b, Q.c, Q.d
    t_eval = np.asarray(t_eval, dtype=float)

    def rhs(_t, y):
        return [a * y[0] + b * y[1] - y[0] * y[0], c * y[0] + d * y[1] - y[0] * y[1]]

    sol = solve_ivp(rhs, (0.0, float(t_eval[-1])), list(as_gradient(v0)), method="DOP853",
                    t_eval=t_eval, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise NumericalFailure(sol.message)
    return sol.y.T


# ---------------------------------------------------------------------------
# brute-force oracle


@dataclass(frozen=True)
class OracleVerdict:
    blew_up: Optional[bool]
    t_blow: Optional[float]
    max_norm: float

    def __post_init__(self):
        if self.blew_up is True and self.t_blow is None:
            raise InvalidInputError("a blow-up verdict needs t_blow")


@njit(cache=True)
def _rhs(a, b, c, d, y1, y2):
    return a * y1 + b * y2 - y1 * y1, c * y1 + d * y2 - y1 * y2


@njit(cache=True)
def _dp_step(a, b, c, d, y1, y2, k1a, k1b, h):
    """One Dormand-Prince 5(4) step; returns the 5th-order state, its slope and error."""
    s1, s2 = y1 + h * 0.2 * k1a, y2 + h * 0.2 * k1b
    k2a, k2b = _rhs(a, b, c, d, s1, s2)
    s1 = y1 + h * (3.0 / 40 * k1a + 9.0 / 40 * k2a)
    s2 = y2 + h * (3.0 / 40 * k1b + 9.0 / 40 * k2b)
    k3a, k3b = _rhs(a, b, c, d, s1, s2)
    s1 = y1 + h * (44.0 / 45 * k1a - 56.0 / 15 * k2a + 32.0 / 9 * k3a)
    s2 = y2 + h * (44.0 / 45 * k1b - 56.0 / 15 * k2b + 32.0 / 9 * k3b)
    k4a, k4b = _rhs(a, b, c, d, s1, s2)
    s1 = y1 + h * (19372.0 / 6561 * k1a - 25360.0 / 2187 * k2a + 64448.0 / 6561 * k3a
                   - 212.0 / 729 * k4a)
    s2 = y2 + h * (19372.0 / 6561 * k1b - 25360.0 / 2187 * k2b + 64448.0 / 6561 * k3b
                   - 212.0 / 729 * k4b)
    k5a, k5b = _rhs(a, b, c, d, s1, s2)
    s1 = y1 + h * (9017.0 / 3168 * k1a - 355.0 / 33 * k2a + 46732.0 / 5247 * k3a
                   + 49.0 / 176 * k4a - 5103.0 / 18656 * k5a)
    s2 = y2 + h * (9017.0 / 3168 * k1b - 355.0 / 33 * k2b + 46732.0 / 5247 * k3b
                   + 49.0 / 176 * k4b - 5103.0 / 18656 * k5b)
    k6a, k6b = _rhs(a, b, c, d, s1, s2)
    n1 = y1 + h * (35.0 / 384 * k1a + 500.0 / 1113 * k3a + 125.0 / 192 * k4a
                   - 2187.0 / 6784 * k5a + 11.0 / 84 * k6a)
    n2 = y2 + h * (35.0 / 384 * k1b + 500.0 / 1113 * k3b + 125.0 / 192 * k4b
                   - 2187.0 / 6784 * k5b + 11.0 / 84 * k6b)
    k7a, k7b = _rhs(a, b, c, d, n1, n2)
    e1 = h * (71.0 / 57600 * k1a - 71.0 / 16695 * k3a + 71.0 / 1920 * k4a
              - 17253.0 / 339200 * k5a + 22.0 / 525 * k6a - 1.0 / 40 * k7a)
    e2 = h * (71.0 / 57600 * k1b - 71.0 / 16695 * k3b + 71.0 / 1920 * k4b
              - 17253.0 / 339200 * k5b + 22.0 / 525 * k6b - 1.0 / 40 * k7b)
    return n1, n2, k7a, k7b, e1, e2


@njit(cache=True)
def _closest_approach(a, b, c, d, y1, y2, k1a, k1b, n1, n2, k7a, k7b, h, p1, p2):
    """Distance from ``p`` to the arc of one accepted step.

    A cubic Hermite scan locates the closest sample; when that is already
    near, golden-section search over partial steps refines it.
    """
    best, s_best = math.inf, 0.0
    for i in range(33):
        s = i / 32.0
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        z1 = h00 * y1 + h10 * h * k1a + h01 * n1 + h11 * h * k7a
        z2 = h00 * y2 + h10 * h * k1b + h01 * n2 + h11 * h * k7b
        dist = math.hypot(z1 - p1, z2 - p2)
        if dist < best:
            best, s_best = dist, s
    if best > 1e-2 * max(1.0, math.hypot(p1, p2)):
        return best
    lo, hi = max(0.0, s_best - 1.0 / 32), min(1.0, s_best + 1.0 / 32)
    g = 0.5 * (math.sqrt(5.0) - 1.0)
    for _ in range(60):
        m1 = hi - g * (hi - lo)
        m2 = lo + g * (hi - lo)
        z1, z2, _a, _b, _e, _f = _dp_step(a, b, c, d, y1, y2, k1a, k1b, m1 * h)
        f1 = math.hypot(z1 - p1, z2 - p2)
        z1, z2, _a, _b, _e, _f = _dp_step(a, b, c, d, y1, y2, k1a, k1b, m2 * h)
        f2 = math.hypot(z1 - p1, z2 - p2)
        if f1 < f2:
            hi = m2
        else:
            lo = m1
        best = min(best, f1, f2)
    return best


@njit(cache=True)
def _dopri(a, b, c, d, y1, y2, t_max, threshold, rtol, atol):
    """Adaptive Dormand-Prince 5(4) run of the gradient system.

    Returns (status, t_end, t_blow, peak, recurrent, y1, y2) where status is
    0 = reached t_max, 1 = threshold crossed, 2 = step underflow. The orbit is
    recurrent when, after the midpoint of the run, it moves away from the
    midpoint state and later returns to it.
    """
    t = 0.0
    half = 0.5 * t_max
    n0 = math.sqrt(y1 * y1 + y2 * y2)
    peak = n0
    recorded = False
    left = False
    p1 = p2 = 0.0
    far = 0.0
    gap = math.inf
    k1a, k1b = _rhs(a, b, c, d, y1, y2)
    scale = max(abs(a), abs(b), abs(c), abs(d)) + n0
    h = 0.01 / max(1.0, scale)
    while t < t_max:
        if t + h > t_max:
            h = t_max - t
        n1, n2, k7a, k7b, e1, e2 = _dp_step(a, b, c, d, y1, y2, k1a, k1b, h)
        sc1 = atol + rtol * max(abs(y1), abs(n1))
        sc2 = atol + rtol * max(abs(y2), abs(n2))
        err = math.sqrt(0.5 * ((e1 / sc1) ** 2 + (e2 / sc2) ** 2))
        if not math.isfinite(err):
            err = 1e10
        if err <= 1.0:
            t_new = t + h
            nn = math.sqrt(n1 * n1 + n2 * n2)
            if nn > threshold:
                # 1/|v| is close to linear in t just before escape
                r0, r1 = 1.0 / n0, 1.0 / nn
                frac = (r0 - 1.0 / threshold) / (r0 - r1)
                return 1, t_new, t + frac * h, max(peak, nn), False, n1, n2
            if recorded:
                dist = math.hypot(n1 - p1, n2 - p2)
                if left:
                    gap = min(gap, _closest_approach(a, b, c, d, y1, y2, k1a, k1b,
                                                     n1, n2, k7a, k7b, h, p1, p2))
                far = max(far, dist)
                if not left and far > 1e-8 and dist < 0.5 * far:
                    left = True
            elif t_new >= half:
                recorded = True
                p1, p2 = n1, n2
            t = t_new
            y1, y2 = n1, n2
            k1a, k1b = k7a, k7b
            n0 = nn
            peak = max(peak, nn)
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h *= fac
        if h < 1e-14 * max(1.0, t):
            return 2, t, t, peak, False, y1, y2
    return 0, t, t, peak, left and gap <= 1e-5 * far, y1, y2


def integrate_extended_oracle(Q, v0, t_max: float = ORACLE_T_MAX,
                              blow_threshold: float = ORACLE_THRESHOLD,
                              rtol: float = ORACLE_RTOL) -> OracleVerdict:
    """Brute-force verdict from direct adaptive integration of the gradient system.

    Crossing ``blow_threshold`` or step-size underflow counts as escape. A run
    reaching ``t_max`` is declared bounded when it has settled at an
    equilibrium or closed up on itself during the second half of the run;
    anything else is undecided (``blew_up is None``).
    """
    if not t_max > 0:
        raise InvalidInputError("t_max must be positive")
    if not blow_threshold >= 1e6:
        raise InvalidInputError("blow_threshold must be at least 1e6")
    Q = as_matrix(Q)
    v0 = as_gradient(v0)
    status, _t, t_blow, peak, recurrent, y1, y2 = _dopri(Q.a, Q.b, Q.c, Q.d, v0.v1, v0.v2, float(t_max),
                                               float(blow_threshold), float(rtol), ORACLE_ATOL)
    if status == 1:
        return OracleVerdict(True, float(t_blow), max(peak, blow_threshold))
    if status == 2:
        return OracleVerdict(True, float(t_blow), peak)
    f1, f2 = _rhs(Q.a, Q.b, Q.c, Q.d, y1, y2)
    settled = math.hypot(f1, f2) <= 1e-6 * max(1.0, math.hypot(y1, y2))
    if settled or recurrent:
        return OracleVerdict(False, None, peak)
    return OracleVerdict(None, None, peak)


# ---------------------------------------------------------------------------
# equilibria


@dataclass(frozen=True)
class EquilibriumReport:
    label: str
    location: tuple[float, float]
    mu1: complex
    mu2: complex
    kind: str
    stability: str


def numerical_jacobian(Q, v, h: float = 1e-3) -> np.ndarray:
    """Central-difference Jacobian of the gradient system.

    The field is quadratic, so the difference quotient has no truncation error
    and a fairly large step keeps rounding small.
    """
    v = np.asarray(v, dtype=float)
    step = h * max(1.0, float(np.max(np.abs(v))))
    cols = []
    for i in range(2):
        e = np.zeros(2)
        e[i] = step
        cols.append((gradient_rhs(Q, v + e) - gradient_rhs(Q, v - e)) / (2 * step))
    return np.column_stack(cols)


def _kind(mus, jac: np.ndarray, tol: float) -> str:
    mu = np.asarray(mus, dtype=complex)
    if np.min(np.abs(mu)) <= tol:
        return "non-hyperbolic"
    if abs(mu[0].imag) > tol:
        return "center" if abs(mu[0].real) <= tol else "focus"
    r1, r2 = sorted(mu.real)
    if r1 * r2 < 0:
        return "saddle"
    if abs(r1 - r2) > tol:
        return "node"
    lam = 0.5 * (r1 + r2)
    if np.max(np.abs(jac - lam * np.eye(2))) <= math.sqrt(tol):
        return "dicritical-node"
    return "degenerate-node"


def _stability(label: str, mus, spec, tol: float) -> str:
    re = [m.real for m in mus]
    if all(r < -tol for r in re):
        return "asymptotically-stable"
    if any(r > tol for r in re):
        return "unstable"
    # linearization is silent: fall back on the special-case table
    if label == "B1":
        return "non-asymptotically-stable" if isinstance(spec, ComplexPair) else "unstable"
    if label in ("B2", "B3", "B4"):
        return "unstable"
    return "undetermined-by-linearization"


def equilibria(Q, eps: float = 1e-10) -> list[EquilibriumReport]:
    """Isolated equilibria B1..B4 of the gradient system with kind and stability.

    Points are found on the Jordan plane and mapped back through ``A^-1``.
    Points coinciding with the origin are omitted. For ``Q = lam I`` the line
    ``v1 = lam`` is entirely stationary and only its representative B3 is
    reported.
    """
    Q = as_matrix(Q)
    jd = jordanize(Q, eps)
    spec = coefficients(jd, (0.0, 0.0)).spectrum
    A, det = jd.A, jd.detA
    tol = 1e-9 * max(1.0, Q.max_norm)
    cands = []
    if isinstance(spec, ComplexPair):
        cands.append(("B1", (0.0, 0.0), (complex(spec.alpha, spec.beta), complex(spec.alpha, -spec.beta))))
    elif isinstance(spec, RealRepeatedDefective):
        lam = spec.lam
        cands.append(("B1", (0.0, 0.0), (complex(lam), complex(lam))))
        if A.d != 0.0 and lam != 0.0:
            cands.append(("B4", (lam * det / A.d, 0.0), (complex(-lam), 0j)))
    else:
        l1, l2 = spec.eigenvalues
        cands.append(("B1", (0.0, 0.0), (complex(l1), complex(l2))))
        if A.b != 0.0 and l2 != 0.0:
            cands.append(("B2", (0.0, -l2 * det / A.b), (complex(l1 - l2), complex(-l2))))
        if A.d != 0.0 and l1 != 0.0:
            cands.append(("B3", (l1 * det / A.d, 0.0), (complex(-l1), complex(l2 - l1))))
    reports = []
    for label, w, mus in cands:
        v = jd.A_inv.apply(*w)
        v = (v[0] + 0.0, v[1] + 0.0)
        jac = numerical_jacobian(Q, v)
        # trace and determinant stay well conditioned when mu1 = mu2
        scale = max(1.0, Q.max_norm, abs(v[0]), abs(v[1]))
        gap_tr = abs(np.trace(jac) - (mus[0] + mus[1]))
        gap_det = abs(np.linalg.det(jac) - mus[0] * mus[1])
        if gap_tr > 1e-8 * scale or gap_det > 1e-8 * scale * scale:
            raise NumericalFailure(f"linearization at {label} disagrees with the analytic eigenvalues")
        reports.append(EquilibriumReport(label, v, mus[0], mus[1], _kind(mus, jac, tol),
                                         _stability(label, mus, spec, tol)))
    return reports


# ---------------------------------------------------------------------------


def global_blowup_time(Q, v0_samples) -> Optional[float]:
    """Earliest blow-up time over sampled characteristics ``(x0, v0)``, or None."""
    samples = list(v0_samples)
    if not samples:
        raise InvalidInputError("need at least one sample")
    jd = jordanize(Q)
    best = None
    for _x0, v0 in samples:
        co = coefficients(jd, as_gradient(v0))
        verdict = verdict_from_coefficients(co)
        if verdict.blows_up:
            t_star = with_time(verdict, build_q(co)).t_star
            if best is None or t_star < best:
                best = t_star
    return best


@dataclass(frozen=True)
class TraceRow:
    t: float
    x: float
    V1: float
    V2: float
    v1: float
    v2: float
    blowup: bool


def trace_characteristic(Q, V0, v0, x0: float, t_max: float, dt: float) -> list[TraceRow]:
    """Sample state and gradients on ``t = 0, dt, 2 dt, ...`` up to ``t_max``.

    If the gradients blow up first, sampling stops and a final row at the
    blow-up time carries the signed infinite gradients with ``blowup`` set.
    """
    if not (t_max > 0 and dt > 0):
        raise InvalidInputError("t_max and dt must be positive")
    v0 = as_gradient(v0)
    jd = jordanize(Q)
    co = coefficients(jd, v0)
    q = build_q(co)
    t_star = first_positive_root(q, t_max=t_max)
    w1, w2 = jd.A.apply(v0.v1, v0.v2)
    rows = []
    n_steps = int(math.floor(t_max / dt + 1e-9))
    for i in range(n_steps + 1):
        t = i * dt
        if t_star is not None and t >= t_star:
            break
        ch = solve_characteristic(Q, V0, x0, t)
        u1, u2 = _jordan_flow(co.spectrum, w1, w2, t)
        qt = float(q(t))
        v1, v2 = jd.A_inv.apply(u1 / qt, u2 / qt)
        rows.append(TraceRow(t, ch.x, ch.V1, ch.V2, v1, v2, False))
    if t_star is not None:
        ch = solve_characteristic(Q, V0, x0, t_star)
        u1, u2 = _jordan_flow(co.spectrum, w1, w2, t_star)
        p1, p2 = jd.A_inv.apply(u1, u2)
        # v = p / q with q -> 0+, so each gradient diverges with the sign of p
        rows.append(TraceRow(t_star, ch.x, ch.V1, ch.V2, _signed_inf(p1), _signed_inf(p2), True))
    return rows


def _signed_inf(p: float) -> float:
    return 0.0 if p == 0.0 else math.copysign(math.inf, p)
