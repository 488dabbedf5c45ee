"""Closed-form decisive function q(t) and its first positive root.

Along a characteristic the gradients are ``v(t) = A^-1 u(t) / q(t)`` where
``u' = J u`` and ``q' = (a22*u1 - a12*u2)/det A``, ``q(0) = 1``. The
derivative of q is therefore a short exponential sum whose two coefficients
``C1, C2`` depend linearly on the initial gradients:

* real diagonal form:  ``q' = C1 exp(lam1 t) + C2 exp(lam2 t)``
* Jordan cell:         ``q' = (C1 + C2 t) exp(lam t)``
* rotation block:      ``q' = exp(alpha t) (C1 sin(beta t) + C2 cos(beta t))``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidInputError, NumericalFailure
from .linalg2 import (
    ComplexPair,
    JordanData,
    RealDistinct,
    RealRepeatedDefective,
    RealRepeatedDiagonalizable,
    SpectralClass,
)

ZERO_EIG_RTOL = 1e-10
ROOT_TOL = 1e-12


@dataclass(frozen=True)
class GradientPair:
    """Initial gradients ``(V_x, E_x)`` at the foot of a characteristic."""

    v1: float
    v2: float

    def __post_init__(self):
        for name in ("v1", "v2"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidInputError(f"{name}={value!r} is not finite")
            object.__setattr__(self, name, value)

    def __iter__(self):
        return iter((self.v1, self.v2))


def as_gradient(v0) -> GradientPair:
    if isinstance(v0, GradientPair):
        return v0
    v1, v2 = v0
    return GradientPair(v1, v2)


@dataclass(frozen=True)
class DecisiveCoefficients:
    spectrum: SpectralClass
    C1: float
    C2: float


def _snap(lam: float, tol: float) -> float:
    return 0.0 if abs(lam) <= tol else lam


def coefficients(jd: JordanData, v0) -> DecisiveCoefficients:
    """Decisive constants C1, C2 for initial gradients ``v0``.

    Eigenvalues within ``1e-10 * max(1, |Q|)`` of zero are replaced by an
    exact zero so downstream formulas take their dedicated branches.
    """
    v0 = as_gradient(v0)
    A = jd.A
    det = jd.detA
    w1, w2 = A.apply(v0.v1, v0.v2)
    tol = ZERO_EIG_RTOL * max(1.0, jd.Q.max_norm)
    spec = jd.spectrum
    if isinstance(spec, (RealDistinct, RealRepeatedDiagonalizable)):
        C1 = A.d * w1 / det
        C2 = -A.b * w2 / det
        if isinstance(spec, RealDistinct):
            spec = RealDistinct(_snap(spec.lam1, tol), _snap(spec.lam2, tol))
        else:
            spec = RealRepeatedDiagonalizable(_snap(spec.lam, tol))
    elif isinstance(spec, RealRepeatedDefective):
        # q' = (a22 u1 - a12 u2)/det with u1 = (w1 + w2 t) e^{lam t}, u2 = w2 e^{lam t}
        C1 = (A.d * w1 - A.b * w2) / det
        C2 = A.d * w2 / det
        spec = RealRepeatedDefective(_snap(spec.lam, tol))
    else:
        # u1 = e^{at}(w1 cos + w2 sin), u2 = e^{at}(w2 cos - w1 sin)
        C1 = (A.b * w1 + A.d * w2) / det
        C2 = (A.d * w1 - A.b * w2) / det
        spec = replace(spec, alpha=_snap(spec.alpha, tol))
    return DecisiveCoefficients(spec, C1 + 0.0, C2 + 0.0)


# ---------------------------------------------------------------------------
# stable building blocks


def _phi1(x):
    """``expm1(x)/x`` with the removable singularity filled in."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.where(x == 0.0, 1.0, np.expm1(x) / np.where(x == 0.0, 1.0, x))
    return out


def _phi2(x):
    """``(x e^x - expm1(x)) / x**2``, so that ``int_0^t s e^{lam s} ds = t^2 phi2(lam t)``."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    xs = np.where(small, x, 0.0)
    series = 0.5 + xs * (1 / 3 + xs * (1 / 8 + xs * (1 / 30 + xs * (1 / 144 + xs / 840))))
    xb = np.where(small, 1.0, x)
    with np.errstate(over="ignore", invalid="ignore"):
        direct = (xb * np.exp(xb) - np.expm1(xb)) / (xb * xb)
    return np.where(small, series, direct)


def _mode(c: float, values):
    # a zero coefficient must not meet an overflowed exponential (0 * inf = nan)
    return 0.0 if c == 0.0 else c * values


def _real_q(spec: SpectralClass, C1: float, C2: float, t, kappa: float = 0.0):
    """``q(t) e^{-kappa t}`` for the real spectral classes.

    Each mode contributes ``c int_0^t e^{lam s} ds`` (or the Jordan-cell
    moment). Once ``|lam t| >= 1`` its constant ``-c/lam`` is folded into the
    leading 1 before the exponentials are added, which keeps q accurate when it
    decays to a tiny value; below that the ``phi`` forms avoid cancellation.
    Zero coefficients are skipped so an overflowed exponential never meets 0.
    """
    t = np.asarray(t, dtype=float)
    const = np.ones_like(t)
    var = np.zeros_like(t)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        damp = np.exp(-kappa * t)

        def add_mode(lam: float, c: float) -> None:
            nonlocal const, var
            if c == 0.0:
                return
            if lam == 0.0:
                var = var + (c * t) * damp
                return
            x = lam * t
            big = np.abs(x) >= 1.0
            const = const - np.where(big, c / lam, 0.0)
            grow = np.exp(x - kappa * t)
            var = var + np.where(big, (c / lam) * grow, c * t * _phi1(np.where(big, 0.0, x)) * damp)

        def add_cell(lam: float, c: float) -> None:
            nonlocal const, var
            if c == 0.0:
                return
            x = lam * t
            big = np.abs(x) >= 1.0
            small_x = np.where(big, 0.0, x)
            # (c t) t ordering keeps huge t with tiny c finite
            small = (c * t) * t * _phi2(small_x) * damp
            if lam == 0.0:
                var = var + small
                return
            lam_b = lam
            const = const + np.where(big, c / (lam_b * lam_b), 0.0)
            grow = np.exp(x - kappa * t)
            var = var + np.where(big, c * grow * (t / lam_b - 1.0 / (lam_b * lam_b)), small)

        if isinstance(spec, RealDistinct):
            add_mode(spec.lam1, C1)
            add_mode(spec.lam2, C2)
        elif isinstance(spec, RealRepeatedDiagonalizable):
            add_mode(spec.lam, C1 + C2)
        else:
            add_mode(spec.lam, C1)
            add_cell(spec.lam, C2)
        return const * damp + var


def _scalar_or_array(values, t):
    if np.ndim(t) == 0:
        return float(values)
    return values


@dataclass(frozen=True)
class DecisiveFunction:
    """Closed-form q(t) for one characteristic."""

    coeffs: DecisiveCoefficients

    @property
    def spectrum(self) -> SpectralClass:
        return self.coeffs.spectrum

    @property
    def C1(self) -> float:
        return self.coeffs.C1

    @property
    def C2(self) -> float:
        return self.coeffs.C2

    def __call__(self, t):
        tt = np.asarray(t, dtype=float)
        spec, C1, C2 = self.spectrum, self.C1, self.C2
        with np.errstate(over="ignore", invalid="ignore"):
            if not isinstance(spec, ComplexPair):
                val = _real_q(spec, C1, C2, tt)
            else:
                a, b = spec.alpha, spec.beta
                P = C1 * a + C2 * b
                R = C2 * a - C1 * b
                bt = b * tt
                ea = np.exp(a * tt)
                # e^{at} cos(bt) - 1 written without cancellation near t = 0
                ecm1 = np.expm1(a * tt) * np.cos(bt) - 2.0 * np.sin(0.5 * bt) ** 2
                val = 1.0 + (P * ea * np.sin(bt) + R * ecm1) / (a * a + b * b)
        return _scalar_or_array(val, t)

    def derivative(self, t):
        tt = np.asarray(t, dtype=float)
        spec, C1, C2 = self.spectrum, self.C1, self.C2
        with np.errstate(over="ignore", invalid="ignore"):
            if isinstance(spec, RealDistinct):
                val = _mode(C1, np.exp(spec.lam1 * tt)) + _mode(C2, np.exp(spec.lam2 * tt))
            elif isinstance(spec, RealRepeatedDiagonalizable):
                val = _mode(C1 + C2, np.exp(spec.lam * tt))
            elif isinstance(spec, RealRepeatedDefective):
                val = (C1 + C2 * tt) * np.exp(spec.lam * tt)
            else:
                bt = spec.beta * tt
                val = np.exp(spec.alpha * tt) * (C1 * np.sin(bt) + C2 * np.cos(bt))
        return _scalar_or_array(val, t)

    # -- analytic structure ---------------------------------------------------

    def critical_time(self) -> float | None:
        """The unique positive zero of q' for the real cases, if any."""
        spec, C1, C2 = self.spectrum, self.C1, self.C2
        if isinstance(spec, RealDistinct):
            if C1 * C2 < 0.0:
                t = math.log(-C2 / C1) / (spec.lam1 - spec.lam2)
                return t if 0.0 < t < math.inf else None
            return None
        if isinstance(spec, RealRepeatedDefective):
            if C2 != 0.0:
                t = -C1 / C2
                return t if 0.0 < t < math.inf else None
            return None
        if isinstance(spec, RealRepeatedDiagonalizable):
            return None
        raise TypeError("rotation block has a lattice of critical times")

    def _phase(self) -> float:
        # C1 sin x + C2 cos x = rho sin(x + psi)
        return math.atan2(self.C2, self.C1)

    def first_minimum_time(self) -> float | None:
        """First positive local minimum of q for the rotation block."""
        spec = self.spectrum
        if not isinstance(spec, ComplexPair):
            raise TypeError("only defined for a complex pair")
        if self.C1 == 0.0 and self.C2 == 0.0:
            return None
        psi = self._phase()
        x = -psi if psi < 0.0 else 2.0 * math.pi - psi
        return x / spec.beta

    def minimum_value_at(self, t: float, scaled: bool = False) -> float:
        """q at a local minimum of the rotation block, ``L - beta*rho*e^{alpha t}/|lam|^2``.

        With ``scaled`` and ``alpha > 0`` the value is multiplied by
        ``e^{-alpha t}``, which never overflows.
        """
        spec = self.spectrum
        a, b = spec.alpha, spec.beta
        rho = math.hypot(self.C1, self.C2)
        m2 = a * a + b * b
        if scaled and a > 0.0:
            return self.rotation_offset() * math.exp(-a * t) - b * rho / m2
        return self.rotation_offset() - b * rho * math.exp(a * t) / m2

    def rotation_offset(self) -> float:
        """Centre ``1 - (C2 alpha - C1 beta)/(alpha^2 + beta^2)`` of the rotation-block oscillation."""
        a, b = self.spectrum.alpha, self.spectrum.beta
        return 1.0 - (self.C2 * a - self.C1 * b) / (a * a + b * b)

    def limit(self) -> float:
        """``lim q(t)`` as t -> inf; +-inf when unbounded, nan when oscillating."""
        spec, C1, C2 = self.spectrum, self.C1, self.C2
        if isinstance(spec, (RealDistinct, RealRepeatedDiagonalizable)):
            if isinstance(spec, RealRepeatedDiagonalizable):
                terms = [(spec.lam, C1 + C2)]
            else:
                terms = [(spec.lam1, C1), (spec.lam2, C2)]
            growing = [(lam, c) for lam, c in terms if c != 0.0 and lam >= 0.0]
            if growing:
                lam, c = max(growing)
                return math.copysign(math.inf, c)
            return 1.0 - sum(c / lam for lam, c in terms if c != 0.0)
        if isinstance(spec, RealRepeatedDefective):
            lam = spec.lam
            if lam >= 0.0:
                lead = C2 if C2 != 0.0 else C1
                return 1.0 if lead == 0.0 else math.copysign(math.inf, lead)
            return 1.0 - C1 / lam + C2 / lam**2
        if C1 == 0.0 and C2 == 0.0:
            return 1.0
        if spec.alpha < 0.0:
            return self.rotation_offset()
        return math.nan

    def infimum(self) -> float:
        """``inf_{t >= 0} q(t)``, computed from the extremum structure."""
        spec = self.spectrum
        if isinstance(spec, ComplexPair):
            if self.C1 == 0.0 and self.C2 == 0.0:
                return 1.0
            if spec.alpha > 0.0:
                return -math.inf
            t_min = self.first_minimum_time()
            return min(1.0, self.minimum_value_at(t_min))
        candidates = [1.0]
        t_c = self.critical_time()
        if t_c is not None:
            candidates.append(self(t_c))
        lim = self.limit()
        if not math.isnan(lim):
            candidates.append(lim)
        return min(candidates)

    def growth_rate(self) -> float:
        """Largest non-negative exponential rate present in q."""
        spec = self.spectrum
        if isinstance(spec, RealDistinct):
            # a mode with a zero coefficient contributes nothing
            rates = [lam for lam, c in ((spec.lam1, self.C1), (spec.lam2, self.C2)) if c != 0.0]
            return max([0.0] + rates)
        if isinstance(spec, ComplexPair):
            return max(0.0, spec.alpha)
        return max(0.0, spec.lam)

    def scaled(self, t: float, kappa: float) -> float:
        """``q(t) * exp(-kappa t)`` evaluated without overflow.

        For the rotation block ``kappa`` must equal ``alpha`` once
        ``kappa t >= 600``.
        """
        spec, C1, C2 = self.spectrum, self.C1, self.C2
        if not isinstance(spec, ComplexPair):
            return float(_real_q(spec, C1, C2, t, kappa))
        if kappa * t < 600.0:
            return float(self(t)) * math.exp(-kappa * t)
        a, b = spec.alpha, spec.beta
        if kappa != a:
            raise ValueError("rotation block is scaled by its own rate")
        damp = math.exp(-kappa * t)
        P, R = C1 * a + C2 * b, C2 * a - C1 * b
        return damp + (P * math.sin(b * t) + R * (math.cos(b * t) - damp)) / (a * a + b * b)


def build_q(coeffs: DecisiveCoefficients) -> DecisiveFunction:
    """Closed-form decisive function for the given constants.

    >>> from gradcat.linalg2 import RealRepeatedDefective
    >>> q = build_q(DecisiveCoefficients(RealRepeatedDefective(0.0), 1.0, -2.0))
    >>> q(0.0), q(1.0)
    (1.0, 1.0)
    """
    return DecisiveFunction(coeffs)


def _bracketed_root(f, lo: float, hi: float, tol: float) -> float:
    end = f(hi)
    # a positive value within tol at ``hi`` is a touching minimum; a genuine
    # sign change is always refined, however small q has become
    if end == 0.0 or 0.0 < end <= tol:
        return hi
    try:
        t = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    except (RuntimeError, ValueError) as exc:
        raise NumericalFailure(f"root refinement failed on [{lo}, {hi}]: {exc}") from exc
    return t


def _tail_bracket(f, start: float, t_max: float, max_doublings: int = 2000):
    """Bracket a sign change of ``f`` on a monotone tail beyond ``start``."""
    step = 1.0
    lo = start
    for _ in range(max_doublings):
        hi = min(lo + step, t_max)
        if f(hi) <= 0.0:
            return lo, hi
        if hi >= t_max:
            return None
        lo = hi
        step *= 2.0
    raise NumericalFailure("could not bracket the root on the monotone tail")


def first_positive_root(q: DecisiveFunction, t_max: float = math.inf, tol: float = ROOT_TOL):
    """Smallest ``t* in (0, t_max]`` with ``q(t*) = 0``, or None.

    The search walks the analytic extrema of q (at most one for the real
    cases, the first decisive minimum of the rotation block), so every
    bracket passed to the refinement step contains exactly one sign change.
    A local minimum with ``q <= tol`` is reported as the root itself.
    """
    if not t_max > 0 or not tol > 0:
        raise InvalidInputError("t_max and tol must be positive")
    spec = q.spectrum
    if isinstance(spec, ComplexPair):
        return _rotation_root(q, t_max, tol)

    # signs are read from q e^{-kappa t}, which cannot overflow
    kappa = q.growth_rate()
    scaled = lambda t: q.scaled(t, kappa)  # noqa: E731
    t_c = q.critical_time()
    lo = 0.0
    if t_c is not None and t_c <= t_max:
        # q is monotone on [0, t_c]; an early sign change is found without
        # evaluating q at a possibly astronomical t_c
        early = _tail_bracket(scaled, 0.0, t_c)
        if early is not None:
            return _bracketed_root(scaled, *early, tol * math.exp(-kappa * early[1]))
        if scaled(t_c) <= tol * math.exp(-kappa * t_c):
            return t_c
        lo = t_c
    # q is monotone on [lo, inf)
    if math.isinf(t_max):
        if not q.limit() < 0.0:
            return None
    elif scaled(t_max) > 0.0:
        return None
    bracket = _tail_bracket(scaled, lo, t_max)
    if bracket is None:
        return None
    return _bracketed_root(scaled, *bracket, tol * math.exp(-kappa * bracket[1]))


def _rotation_root(q: DecisiveFunction, t_max: float, tol: float):
    spec = q.spectrum
    a, b = spec.alpha, spec.beta
    t_min = q.first_minimum_time()
    if t_min is None:
        return None
    period = 2.0 * math.pi / b
    # for a > 0 every sign test uses q e^{-a t}, which cannot overflow
    kappa = max(0.0, a)
    scaled = lambda t: q.scaled(t, kappa)  # noqa: E731

    def min_below(t: float) -> float:
        return q.minimum_value_at(t, scaled=True) - tol * math.exp(-kappa * t)

    if a > 0.0 and min_below(t_min) > 0.0:
        # minima deepen like e^{a t}; jump to the first one below zero
        rho = math.hypot(q.C1, q.C2)
        K = (a * a + b * b) * q.rotation_offset() / (b * rho)
        if K > 0.0:
            n = max(0, math.ceil((math.log(K) / a - t_min) / period))
            t_min += n * period
            while min_below(t_min) > 0.0:
                t_min += period
    if t_min > t_max:
        lo = max(0.0, t_min - 0.5 * period)
        if lo >= t_max or scaled(t_max) > 0.0:
            return None
        return _bracketed_root(scaled, lo, t_max, tol * math.exp(-kappa * t_max))
    if min_below(t_min) > 0.0:
        return None
    if q.minimum_value_at(t_min, scaled=True) >= -tol * math.exp(-kappa * t_min):
        return t_min
    lo = max(0.0, t_min - 0.5 * period)
    return _bracketed_root(scaled, lo, t_min, tol * math.exp(-kappa * t_min))


def decisive_function(jd: JordanData, v0) -> DecisiveFunction:
    return build_q(coefficients(jd, v0))
