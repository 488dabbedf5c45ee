"""First integrals of ``dV2/dV1 = (c V1 + d V2)/(a V1 + b V2)`` and simple-wave gradients."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GradientSingularity, InvalidInputError, OutsideBranchError, SingularLocusError
from .linalg2 import (
    ComplexPair,
    JordanData,
    RealRepeatedDefective,
    SpectralClass,
    as_matrix,
)


@dataclass(frozen=True)
class FirstIntegralValue:
    value: float
    case: SpectralClass
    W1: float
    W2: float


def _log_abs(w: float, line: str) -> float:
    if w == 0.0:
        raise SingularLocusError(line)
    return math.log(abs(w))


def first_integral(jd: JordanData, V1: float, V2: float) -> FirstIntegralValue:
    """Value of the conserved quantity of the linear flow at ``(V1, V2)``.

    In Jordan coordinates ``W = A V`` it reads

    * diagonal:   ``lam1 ln|W2| - lam2 ln|W1|``
    * Jordan cell: ``lam W1 / W2 - ln|W2|``
    * rotation:   ``beta ln(W1^2 + W2^2) + 2 alpha arctan(W2 / W1)``
    """
    W1, W2 = jd.A.apply(float(V1), float(V2))
    spec = jd.spectrum
    if isinstance(spec, ComplexPair):
        if W1 == 0.0:
            raise SingularLocusError("W1=0")
        value = spec.beta * math.log(W1 * W1 + W2 * W2) + 2.0 * spec.alpha * math.atan(W2 / W1)
    elif isinstance(spec, RealRepeatedDefective):
        if W2 == 0.0:
            raise SingularLocusError("W2=0")
        value = spec.lam * W1 / W2 - math.log(abs(W2))
    else:
        lam1, lam2 = spec.eigenvalues
        value = 0.0
        if lam1 != 0.0:
            value += lam1 * _log_abs(W2, "W2=0")
        if lam2 != 0.0:
            value -= lam2 * _log_abs(W1, "W1=0")
    return FirstIntegralValue(value, spec, W1, W2)


def is_constant_along(jd: JordanData, path) -> bool:
    """Whether the first integral is constant (to 1e-6, relative) along ``path``.

    For a rotation block the arctan term is continued across ``W1 = 0`` so
    that branch jumps of ``2 pi alpha`` between neighbouring points vanish.
    """
    pts = [tuple(p) for p in path]
    if not pts:
        raise InvalidInputError("path must contain at least one point")
    values = np.array([first_integral(jd, *p).value for p in pts])
    spec = jd.spectrum
    if isinstance(spec, ComplexPair) and spec.alpha != 0.0 and len(values) > 1:
        jump = 2.0 * math.pi * spec.alpha
        steps = np.diff(values)
        steps -= jump * np.round(steps / jump)
        values = np.concatenate(([values[0]], values[0] + np.cumsum(steps)))
    spread = float(values.max() - values.min())
    return spread <= 1e-6 * (1.0 + float(np.median(np.abs(values))))


def bounded_integral_curves(Q) -> bool:
    """Integral curves are bounded exactly when the origin is a center.

    >>> bounded_integral_curves([[0, -1], [1, 0]])
    True
    >>> bounded_integral_curves([[1, 0], [0, -1]])
    False
    """
    Q = as_matrix(Q)
    return abs(Q.a + Q.d) <= 1e-12 and Q.d * Q.d + Q.b * Q.c < 0.0


# ---------------------------------------------------------------------------
# Euler-Poisson simple waves, Q = [[0, k], [N, 0]]


def _check_model(k: int, N: int) -> None:
    if k not in (-1, 1):
        raise InvalidInputError(f"k must be +1 or -1, got {k!r}")
    if N not in (0, 1):
        raise InvalidInputError(f"N must be 0 or 1, got {N!r}")


def _field_branch(k: int, N: int, V: float, C: float, sign: int) -> float:
    radicand = k * (N * V * V - C)
    if radicand < 0.0:
        raise OutsideBranchError(f"k (N V^2 - C) = {radicand!r} is negative")
    return sign * math.sqrt(radicand)


def _check_sign(sign: int) -> None:
    if sign not in (-1, 1):
        raise InvalidInputError(f"sign must be +1 or -1, got {sign!r}")


def simple_wave_constant(k: int, N: int, V0: float, dV0: float, C: float, sign: int) -> float:
    """Constant ``Ctilde`` fixed by ``V0`` and ``V0'`` at the foot of a characteristic.

    ``sign`` selects the branch of the field ``E = sign * sqrt(k (N V^2 - C))``.
    A flat profile (``dV0 == 0``) gives an infinite constant, i.e. ``v`` stays 0.
    """
    _check_model(k, N)
    _check_sign(sign)
    E0 = _field_branch(k, N, V0, C, sign)
    if dV0 == 0.0:
        return math.inf
    return E0 / dV0 - k * V0


def ep_simple_wave_gradient(k: int, N: int, V: float, C: float, Ctilde: float, sign: int) -> float:
    """Simple-wave gradient ``v = V_x = E(V) / (sign(k) V + Ctilde)``."""
    _check_model(k, N)
    _check_sign(sign)
    E = _field_branch(k, N, V, C, sign)
    denom = k * V + Ctilde
    if denom == 0.0:
        raise GradientSingularity(f"sign(k) V + Ctilde vanishes at V={V!r}")
    return E / denom


def ep_simple_wave_companion(k: int, N: int, V: float, v: float, C: float, sign: int) -> float:
    """Field gradient ``e = E_x = N V v / (k E(V))`` paired with ``v``."""
    _check_model(k, N)
    _check_sign(sign)
    E = _field_branch(k, N, V, C, sign)
    num = N * V * v
    if num == 0.0:
        return 0.0
    if E == 0.0:
        raise GradientSingularity("E(V) vanishes while N V v does not")
    return num / (k * E)
