"""2x2 linear algebra: spectra, classification and a deterministic Jordan form.

The Jordan decomposition is written as ``A @ Q @ inv(A) == J``, so the rows
of ``A`` are (generalized) left eigenvectors of ``Q``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidInputError

DEFAULT_EPS = 1e-10
SPLIT_REL = 1e-6


@dataclass(frozen=True)
class Matrix2:
    """Real 2x2 matrix ``[[a, b], [c, d]]``."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError) as exc:
                raise InvalidInputError(f"entry {name}={value!r} is not a real number") from exc
            if not math.isfinite(value):
                raise InvalidInputError(f"entry {name}={value!r} is not finite")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, arr) -> "Matrix2":
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (2, 2):
            raise InvalidInputError(f"expected a 2x2 array, got shape {arr.shape}")
        return cls(arr[0, 0], arr[0, 1], arr[1, 0], arr[1, 1])

    @classmethod
    def identity(cls) -> "Matrix2":
        return cls(1.0, 0.0, 0.0, 1.0)

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def to_list(self) -> list[list[float]]:
        return [[self.a, self.b], [self.c, self.d]]

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def max_norm(self) -> float:
        return max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))

    def __matmul__(self, other: "Matrix2") -> "Matrix2":
        return Matrix2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def apply(self, x1: float, x2: float) -> tuple[float, float]:
        return self.a * x1 + self.b * x2, self.c * x1 + self.d * x2

    def inverse(self) -> "Matrix2":
        det = self.det
        if det == 0.0:
            raise InvalidInputError("matrix is singular")
        return Matrix2(self.d / det, -self.b / det, -self.c / det, self.a / det)


def as_matrix(Q) -> Matrix2:
    """Coerce a Matrix2, nested sequence or ndarray into a Matrix2."""
    if isinstance(Q, Matrix2):
        return Q
    return Matrix2.from_array(Q)


# ---------------------------------------------------------------------------
# spectral classes


@dataclass(frozen=True)
class RealDistinct:
    lam1: float
    lam2: float
    kind = "distinct"

    @property
    def eigenvalues(self):
        return (self.lam1, self.lam2)


@dataclass(frozen=True)
class RealRepeatedDiagonalizable:
    lam: float
    kind = "diagonalizable-repeated"

    @property
    def eigenvalues(self):
        return (self.lam, self.lam)


@dataclass(frozen=True)
class RealRepeatedDefective:
    lam: float
    kind = "defective"

    @property
    def eigenvalues(self):
        return (self.lam, self.lam)


@dataclass(frozen=True)
class ComplexPair:
    alpha: float
    beta: float
    kind = "complex"

    @property
    def eigenvalues(self):
        return (complex(self.alpha, self.beta), complex(self.alpha, -self.beta))


SpectralClass = Union[RealDistinct, RealRepeatedDiagonalizable, RealRepeatedDefective, ComplexPair]


def _scale(Q: Matrix2) -> float:
    return max(1.0, Q.max_norm ** 2)


def classify_spectrum(Q, eps: float = DEFAULT_EPS) -> SpectralClass:
    """Classify the eigenstructure of ``Q``.

    The discriminant ``(a - d)**2 + 4*b*c`` is compared with ``eps * s`` where
    ``s = max(1, max|Q|**2)``; inside that band the eigenvalue is treated as
    repeated unless ``Q - lam*I`` is large compared with the split. Its size
    then decides between a scalar matrix and a Jordan cell.

    Examples
    --------
    >>> classify_spectrum([[0, 1], [1, 0]])
    RealDistinct(lam1=1.0, lam2=-1.0)
    >>> classify_spectrum([[0, -1], [1, 0]])
    ComplexPair(alpha=0.0, beta=1.0)
    """
    Q = as_matrix(Q)
    if not eps > 0:
        raise InvalidInputError("eps must be positive")
    s = _scale(Q)
    half_tr = 0.5 * Q.trace
    disc = (Q.a - Q.d) ** 2 + 4.0 * Q.b * Q.c
    if abs(disc) <= eps * s:
        lam = half_tr
        off = max(abs(Q.a - lam), abs(Q.b), abs(Q.c), abs(Q.d - lam))
        if off <= eps * s:
            return RealRepeatedDiagonalizable(lam)
        # (Q - lam I)^2 = disc/4 I: a nilpotent-like remainder is a Jordan cell,
        # otherwise the eigenvalues are split and the eigenbasis is well conditioned
        if abs(disc) <= 4.0 * SPLIT_REL * off * off:
            return RealRepeatedDefective(lam)
    if disc < 0.0:
        return ComplexPair(half_tr, 0.5 * math.sqrt(-disc))
    root = 0.5 * math.sqrt(disc)
    # larger-magnitude root first, the other from the determinant
    big = half_tr + math.copysign(root, half_tr) if half_tr != 0.0 else root
    small = Q.det / big if big != 0.0 else -root
    lam1, lam2 = (big, small) if big > small else (small, big)
    return RealDistinct(lam1, lam2)


# ---------------------------------------------------------------------------
# Jordan form


@dataclass(frozen=True)
class JordanData:
    """Similarity triple with ``A @ Q @ A_inv == J``."""

    spectrum: SpectralClass
    J: Matrix2
    A: Matrix2
    A_inv: Matrix2
    detA: float
    Q: Matrix2

    @property
    def kind(self) -> str:
        return self.spectrum.kind

    def residual(self) -> float:
        """Max-norm of ``A Q A^-1 - J``."""
        r = self.A.to_array() @ self.Q.to_array() @ self.A_inv.to_array() - self.J.to_array()
        return float(np.max(np.abs(r)))

    def with_rows_scaled(self, s: float, r: float) -> "JordanData":
        """Same decomposition with the rows of ``A`` multiplied by ``s`` and ``r``.

        ``J`` is conjugated accordingly, so only ``s == r`` keeps the Jordan
        cell and the rotation block in canonical form.
        """
        A = Matrix2(s * self.A.a, s * self.A.b, r * self.A.c, r * self.A.d)
        J = Matrix2(self.J.a, self.J.b * s / r, self.J.c * r / s, self.J.d)
        return JordanData(self.spectrum, J, A, A.inverse(), A.det, self.Q)


def _normalize_real(y: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(y)))
    return y / y[k]


def _left_eigvec(Q: Matrix2, lam):
    """Left null vector of ``Q - lam*I`` from the better-conditioned column."""
    cand1 = np.array([Q.c, lam - Q.a])
    cand2 = np.array([Q.d - lam, -Q.b])
    return cand1 if np.linalg.norm(cand1) >= np.linalg.norm(cand2) else cand2


def jordanize(Q, eps: float = DEFAULT_EPS) -> JordanData:
    """Jordan normal form of ``Q`` with a deterministic transition matrix.

    Rows of ``A`` are left eigenvectors scaled so that their largest-magnitude
    entry equals +1. For a Jordan cell only the eigenvector row is normalized
    this way; the generalized row is the minimum-norm solution of
    ``a1 (Q - lam I) = a2``. For a complex pair ``a1 + i*a2`` is the left
    eigenvector of ``alpha - i*beta`` scaled so its largest-modulus entry is 1.
    """
    Q = as_matrix(Q)
    spec = classify_spectrum(Q, eps)
    if isinstance(spec, RealDistinct):
        rows = [_normalize_real(_left_eigvec(Q, lam)) for lam in (spec.lam1, spec.lam2)]
        J = Matrix2(spec.lam1, 0.0, 0.0, spec.lam2)
    elif isinstance(spec, RealRepeatedDiagonalizable):
        rows = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        J = Matrix2(spec.lam, 0.0, 0.0, spec.lam)
    elif isinstance(spec, RealRepeatedDefective):
        lam = spec.lam
        nil = Q.to_array() - lam * np.eye(2)
        a2 = _normalize_real(_left_eigvec(Q, lam))
        a1 = np.linalg.lstsq(nil.T, a2, rcond=None)[0]
        rows = [a1, a2]
        J = Matrix2(lam, 1.0, 0.0, lam)
    else:
        mu = complex(spec.alpha, -spec.beta)
        cand1 = np.array([Q.c, mu - Q.a], dtype=complex)
        cand2 = np.array([Q.d - mu, -Q.b], dtype=complex)
        z = cand1 if np.linalg.norm(cand1) >= np.linalg.norm(cand2) else cand2
        z = z / z[int(np.argmax(np.abs(z)))]
        rows = [z.real.copy(), z.imag.copy()]
        J = Matrix2(spec.alpha, spec.beta, -spec.beta, spec.alpha)
    # + 0.0 turns negative zeros into plain zeros
    A = Matrix2(rows[0][0] + 0.0, rows[0][1] + 0.0, rows[1][0] + 0.0, rows[1][1] + 0.0)
    return JordanData(spec, J, A, A.inverse(), A.det, Q)


def eigenvalues(Q) -> tuple[complex, complex]:
    """Both eigenvalues as complex numbers, larger real part first."""
    Q = as_matrix(Q)
    half_tr = 0.5 * Q.trace
    root = cmath.sqrt(0.25 * ((Q.a - Q.d) ** 2 + 4.0 * Q.b * Q.c))
    l1, l2 = half_tr + root, half_tr - root
    return (l1, l2) if (l1.real, l1.imag) >= (l2.real, l2.imag) else (l2, l1)
