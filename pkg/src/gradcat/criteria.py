"""Closed-form blow-up criteria for every Jordan case, plus the dispatcher.

Clause labels are stable strings ("Cor3.1-1b", "Cor3.6-3", ...) naming the
corollary and the item that fired; a smooth verdict carries "<Cor>-none".
Inequalities on the value of q at its decisive minimum use a tie tolerance
``TIE_TOL``: a minimum touching zero counts as blow-up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .decisive import (
    ROOT_TOL,
    DecisiveCoefficients,
    DecisiveFunction,
    as_gradient,
    build_q,
    coefficients,
    first_positive_root,
)
from .errors import InvalidInputError, NumericalFailure, WrongCaseError
from .linalg2 import (
    DEFAULT_EPS,
    ComplexPair,
    RealDistinct,
    RealRepeatedDefective,
    RealRepeatedDiagonalizable,
    jordanize,
)

TIE_TOL = ROOT_TOL


@dataclass(frozen=True)
class BlowupVerdict:
    blows_up: bool
    clause: str
    t_star: float | None = None

    def __post_init__(self):
        if not self.blows_up and self.t_star is not None:
            raise InvalidInputError("a smooth verdict cannot carry a blow-up time")

    def as_dict(self) -> dict:
        return {"blows_up": self.blows_up, "clause": self.clause, "t_star": self.t_star}


def _hit(label: str) -> BlowupVerdict:
    return BlowupVerdict(True, label)


def _miss(corollary: str) -> BlowupVerdict:
    return BlowupVerdict(False, f"{corollary}-none")


def _pow(base: float, exponent: float) -> float:
    try:
        return math.pow(base, exponent)
    except OverflowError:
        return math.inf


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


# ---------------------------------------------------------------------------
# real diagonal form


def extremum_value_distinct(lam1: float, lam2: float, C1: float, C2: float) -> float:
    """q at ``t = ln(-C2/C1)/(lam1 - lam2)`` for the real diagonal form."""
    ratio = -C2 / C1
    scale = C1 * _pow(ratio, lam1 / (lam1 - lam2))
    coef = 1.0 / lam1 - 1.0 / lam2
    if math.isinf(scale):
        return math.copysign(math.inf, scale * coef)
    return scale * coef + 1.0 - C1 / lam1 - C2 / lam2


def criterion_A_distinct(lam1: float, lam2: float, C1: float, C2: float) -> BlowupVerdict:
    """Distinct nonzero real eigenvalues.

    Examples
    --------
    >>> criterion_A_distinct(1.0, -1.0, -1.0, 0.5).clause
    'Cor3.1-1a'
    >>> criterion_A_distinct(1.0, -1.0, 1.0, -3.0).blows_up
    False
    """
    if lam1 == lam2 or lam1 == 0.0 or lam2 == 0.0:
        raise WrongCaseError("Cor3.1 needs two distinct nonzero eigenvalues")
    if lam1 < lam2:
        lam1, lam2, C1, C2 = lam2, lam1, C2, C1
    dip = C1 > 0.0 and C2 < 0.0 and C1 + C2 < 0.0
    if lam1 > 0.0:
        if C1 < 0.0:
            return _hit("Cor3.1-1a")
        if dip and extremum_value_distinct(lam1, lam2, C1, C2) <= TIE_TOL:
            return _hit("Cor3.1-1b")
        if C1 == 0.0 and C2 < 0.0 and lam2 > 0.0:
            return _hit("Cor3.1-1c")
        if C1 == 0.0 and C2 < lam2 and lam2 < 0.0:
            return _hit("Cor3.1-1d")
        return _miss("Cor3.1")
    if dip and extremum_value_distinct(lam1, lam2, C1, C2) <= TIE_TOL:
        return _hit("Cor3.1-2a")
    if C1 < 0.0 and C1 / lam1 + C2 / lam2 > 1.0:
        return _hit("Cor3.1-2b")
    if C1 == 0.0 and C2 < 0.0 and lam2 > 0.0:
        return _hit("Cor3.1-2c")
    if C1 == 0.0 and C2 < lam2 and lam2 < 0.0:
        return _hit("Cor3.1-2d")
    return _miss("Cor3.1")


def criterion_A_repeated(lam: float, C1: float, C2: float) -> BlowupVerdict:
    """Scalar matrix ``lam*I`` with ``lam != 0``."""
    if lam == 0.0:
        raise WrongCaseError("Cor3.2 needs a nonzero eigenvalue")
    s = C1 + C2
    if lam > 0.0 and s < 0.0:
        return _hit("Cor3.2-1")
    if lam < 0.0 and s < lam:
        return _hit("Cor3.2-2")
    return _miss("Cor3.2")


def criterion_zero_matrix(C1: float, C2: float) -> BlowupVerdict:
    """``Q = 0``: q(t) = 1 + (C1 + C2) t."""
    if C1 + C2 < 0.0:
        return _hit("ZeroQ-1")
    return _miss("ZeroQ")


def _cor33(lam1: float, C1: float, C2: float) -> BlowupVerdict:
    # lam1 > 0, lam2 = 0
    if C1 < 0.0:
        return _hit("Cor3.3-1")
    if C1 == 0.0 and C2 < 0.0:
        return _hit("Cor3.3-2")
    if C1 > 0.0 and C2 < 0.0 and C1 + C2 < 0.0:
        q_min = 1.0 + C2 / lam1 * math.log(-C2 / C1) - (C1 + C2) / lam1
        if q_min <= TIE_TOL:
            return _hit("Cor3.3-3")
    return _miss("Cor3.3")


def _cor34(lam2: float, C1: float, C2: float) -> BlowupVerdict:
    # lam1 = 0, lam2 < 0
    if C1 < 0.0:
        return _hit("Cor3.4-1")
    if C1 == 0.0 and C2 < lam2:
        return _hit("Cor3.4-2")
    if C1 > 0.0 and C2 < 0.0 and C1 + C2 < 0.0:
        q_min = 1.0 + C1 / lam2 * math.log(-C1 / C2) - (C1 + C2) / lam2
        if q_min <= TIE_TOL:
            return _hit("Cor3.4-3")
    return _miss("Cor3.4")


def criterion_A_one_zero(lam_nonzero: float, zero_position: str, C1: float, C2: float) -> BlowupVerdict:
    """One zero and one nonzero real eigenvalue.

    ``zero_position`` says which of ``(lam1, lam2)`` is zero; ``C1`` always
    pairs with ``lam1``. Layouts other than ``lam1 > 0 = lam2`` and
    ``0 = lam1 > lam2`` are relabeled by swapping the two modes.
    """
    if lam_nonzero == 0.0:
        raise WrongCaseError("exactly one eigenvalue must be zero")
    if zero_position == "second":
        if lam_nonzero > 0.0:
            return _cor33(lam_nonzero, C1, C2)
        return _cor34(lam_nonzero, C2, C1)
    if zero_position == "first":
        if lam_nonzero < 0.0:
            return _cor34(lam_nonzero, C1, C2)
        return _cor33(lam_nonzero, C2, C1)
    raise WrongCaseError(f"zero_position must be 'first' or 'second', got {zero_position!r}")


# ---------------------------------------------------------------------------
# Jordan cell


def extremum_value_cell(lam: float, C1: float, C2: float) -> float:
    """q at ``t = -C1/C2`` for a Jordan cell with ``lam != 0``."""
    E = _exp(-C1 * lam / C2)
    if math.isinf(E):
        return -math.copysign(math.inf, C2)
    return 1.0 - C1 / lam - C2 * (E - 1.0) / lam**2


def criterion_B(lam: float, C1: float, C2: float) -> BlowupVerdict:
    """Jordan cell; ``lam == 0`` uses the parabola criterion.

    >>> criterion_B(0.0, -2.0, 1.0).clause
    'Cor3.6-3'
    """
    if lam == 0.0:
        if C2 < 0.0:
            return _hit("Cor3.6-1")
        if C2 == 0.0 and C1 < 0.0:
            return _hit("Cor3.6-2")
        if C2 > 0.0 and C1 < 0.0 and C1 * C1 >= 2.0 * C2 * (1.0 - TIE_TOL):
            return _hit("Cor3.6-3")
        return _miss("Cor3.6")
    dip = C1 < 0.0 and C2 > 0.0
    if lam > 0.0:
        if C2 < 0.0:
            return _hit("Cor3.5-1a")
        if dip and extremum_value_cell(lam, C1, C2) <= TIE_TOL:
            return _hit("Cor3.5-1b")
        if C2 == 0.0 and C1 < 0.0:
            return _hit("Cor3.5-1c")
        return _miss("Cor3.5")
    if C2 < 0.0 and 1.0 - C1 / lam + C2 / lam**2 < 0.0:
        return _hit("Cor3.5-2a")
    if dip and extremum_value_cell(lam, C1, C2) <= TIE_TOL:
        return _hit("Cor3.5-2b")
    if C2 == 0.0 and C1 < lam:
        return _hit("Cor3.5-2c")
    return _miss("Cor3.5")


# ---------------------------------------------------------------------------
# rotation block


def criterion_C(alpha: float, beta: float, C1: float, C2: float) -> BlowupVerdict:
    """Complex pair ``alpha +- i beta``.

    For ``alpha < 0`` the sign quadrant of ``(C1, C2)`` picks the first
    positive minimum of q, ``t = (2 pi m - atan2(C2, C1))/beta``, and every
    minimum satisfies ``q = 1 - (C2 a - C1 b + b rho e^{a t})/(a^2 + b^2)``.

    >>> criterion_C(0.0, 1.0, -0.6, 0.0).blows_up
    True
    """
    if not beta > 0.0:
        raise WrongCaseError("the rotation block needs beta > 0")
    if C1 == 0.0 and C2 == 0.0:
        return _miss("Cor3.7")
    if alpha > 0.0:
        return _hit("Cor3.7-1")
    if alpha == 0.0:
        if beta * beta + 2.0 * C1 * beta <= C2 * C2 + TIE_TOL * beta:
            return _hit("Cor3.7-2")
        return _miss("Cor3.7")
    psi = math.atan2(C2, C1)
    if 0.0 <= psi <= 0.5 * math.pi:
        label, x_min = "3a", 2.0 * math.pi - psi
    elif psi > 0.5 * math.pi:
        label, x_min = "3b", 2.0 * math.pi - psi
    elif psi >= -0.5 * math.pi:
        label, x_min = "3c", -psi
    else:
        label, x_min = "3d", -psi
    t_min = x_min / beta
    rho = math.hypot(C1, C2)
    lhs = -beta * math.exp(alpha * t_min) * rho
    rhs = C2 * alpha - C1 * beta - alpha * alpha - beta * beta
    if lhs <= rhs + TIE_TOL * (alpha * alpha + beta * beta):
        return _hit(f"Cor3.7-{label}")
    return _miss("Cor3.7")


# ---------------------------------------------------------------------------
# dispatcher


def verdict_from_coefficients(coeffs: DecisiveCoefficients) -> BlowupVerdict:
    """Route constants to the criterion for their spectral case."""
    spec, C1, C2 = coeffs.spectrum, coeffs.C1, coeffs.C2
    if isinstance(spec, RealDistinct):
        if spec.lam1 == 0.0 and spec.lam2 == 0.0:
            return criterion_zero_matrix(C1, C2)
        if spec.lam2 == 0.0:
            return criterion_A_one_zero(spec.lam1, "second", C1, C2)
        if spec.lam1 == 0.0:
            return criterion_A_one_zero(spec.lam2, "first", C1, C2)
        return criterion_A_distinct(spec.lam1, spec.lam2, C1, C2)
    if isinstance(spec, RealRepeatedDiagonalizable):
        if spec.lam == 0.0:
            return criterion_zero_matrix(C1, C2)
        return criterion_A_repeated(spec.lam, C1, C2)
    if isinstance(spec, RealRepeatedDefective):
        return criterion_B(spec.lam, C1, C2)
    if isinstance(spec, ComplexPair):
        return criterion_C(spec.alpha, spec.beta, C1, C2)
    raise TypeError(f"unknown spectral class {spec!r}")


def with_time(verdict: BlowupVerdict, q: DecisiveFunction) -> BlowupVerdict:
    """Attach the first root of q to a blow-up verdict."""
    if not verdict.blows_up:
        return verdict
    t_star = first_positive_root(q)
    if t_star is None:
        raise NumericalFailure(f"criterion {verdict.clause} fired but q has no positive root")
    return BlowupVerdict(True, verdict.clause, t_star)


def blows_up(Q, v0, want_time: bool = False, eps: float = DEFAULT_EPS) -> BlowupVerdict:
    """Decide whether gradients starting at ``v0`` blow up for ``dV/dt = QV``.

    Examples
    --------
    >>> blows_up([[0, -1], [1, 0]], (0.0, 0.6)).blows_up
    True
    >>> round(blows_up([[0, 1], [0, 0]], (1.0, -2.0), want_time=True).t_star, 9)
    1.618033989
    """
    jd = jordanize(Q, eps)
    coeffs = coefficients(jd, as_gradient(v0))
    verdict = verdict_from_coefficients(coeffs)
    if want_time:
        verdict = with_time(verdict, build_q(coeffs))
    return verdict
