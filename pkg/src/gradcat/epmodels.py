"""Cold-plasma Euler-Poisson specializations ``Q = [[-gamma, k], [N, 0]]``."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .criteria import verdict_from_coefficients, with_time, blows_up
from .decisive import as_gradient, build_q, coefficients
from .errors import (
    InvalidInputError,
    NotApplicableError,
    NumericalFailure,
    UnsupportedSpecialization,
)
from .linalg2 import Matrix2, as_matrix, jordanize

MARGIN = 1e-9


@dataclass(frozen=True)
class EPModel:
    k: int
    N: int
    gamma: float = 0.0

    def __post_init__(self):
        if self.k not in (-1, 1):
            raise InvalidInputError(f"k must be +1 or -1, got {self.k!r}")
        if self.N not in (0, 1):
            raise InvalidInputError(f"N must be 0 or 1, got {self.N!r}")
        gamma = float(self.gamma)
        if not (math.isfinite(gamma) and gamma >= 0.0):
            raise InvalidInputError(f"gamma must be finite and non-negative, got {self.gamma!r}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "gamma", gamma)

    @property
    def case(self) -> int:
        """Model case 1..4: (k, N) = (1, 0), (-1, 0), (1, 1), (-1, 1)."""
        return {(1, 0): 1, (-1, 0): 2, (1, 1): 3, (-1, 1): 4}[(self.k, self.N)]


def model_matrix(m: EPModel) -> Matrix2:
    return Matrix2(-m.gamma, m.k, m.N, 0.0)


def field_from_density(x, n0, N: int, anchor: float) -> np.ndarray:
    """Electric field ``E0`` with ``E0' = N - n0`` and ``E0(x[0]) = anchor``.

    The grid must be uniform; the trapezoidal rule makes the result
    second-order accurate in the spacing.
    """
    x = np.asarray(x, dtype=float)
    n0 = np.asarray(n0, dtype=float)
    if x.ndim != 1 or x.shape != n0.shape or x.size < 2:
        raise InvalidInputError("x and n0 must be 1-D arrays of equal length >= 2")
    if N not in (0, 1):
        raise InvalidInputError(f"N must be 0 or 1, got {N!r}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(n0)) and math.isfinite(anchor)):
        raise InvalidInputError("non-finite input")
    dx = np.diff(x)
    h = (x[-1] - x[0]) / (x.size - 1)
    if not h > 0 or np.max(np.abs(dx - h)) > 1e-9 * abs(h):
        raise InvalidInputError("x must be a uniform increasing grid")
    return anchor + cumulative_trapezoid(N - n0, x, initial=0.0)


# ---------------------------------------------------------------------------
# smoothness regions for gamma = 0


def printed_region_blows_up(m: EPModel, v0) -> Optional[bool]:
    """Closed-form blow-up inequality for cases 1, 2 and 4 (None for case 3).

    Returns None as well when ``v0`` lies within ``MARGIN`` of the boundary.
    """
    if m.gamma != 0.0:
        raise UnsupportedSpecialization("closed-form regions exist only for gamma = 0")
    v1, v2 = as_gradient(v0)
    if m.case == 4:
        gap = v1 * v1 - (1.0 - 2.0 * v2)
        return None if abs(gap) <= MARGIN else gap > 0.0
    if m.case == 3:
        return None
    # cases 1 and 2 share the Jordan-cell criterion with C2 = k v2
    c2 = m.k * v2
    if abs(c2) <= MARGIN or abs(v1) <= MARGIN or abs(v1 * v1 - 2.0 * c2) <= MARGIN:
        return None
    if c2 < 0.0:
        return True
    return v1 < 0.0 and v1 * v1 >= 2.0 * c2


def smooth_region_predicate(m: EPModel, v0) -> bool:
    """True when gradients starting at ``v0`` stay bounded for all time."""
    if m.gamma != 0.0:
        raise UnsupportedSpecialization("use criteria.blows_up for gamma > 0")
    smooth = not blows_up(model_matrix(m), v0).blows_up
    printed = printed_region_blows_up(m, v0)
    if printed is not None and printed == smooth:
        raise NumericalFailure(f"dispatcher and closed-form region disagree at v0={tuple(as_gradient(v0))}")
    return smooth


# ---------------------------------------------------------------------------
# grid sampling


@dataclass(frozen=True)
class RegionGrid:
    """Verdicts on a rectangular grid; arrays are indexed ``[iy, ix]``."""

    xr: tuple[float, float]
    yr: tuple[float, float]
    nx: int
    ny: int
    verdicts: np.ndarray
    t_stars: Optional[np.ndarray]

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.xr[0], self.xr[1], self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.yr[0], self.yr[1], self.ny)

    def rows(self):
        """``(v1, v2, blows_up, t_star)`` in row-major order, y outer."""
        xs, ys = self.xs, self.ys
        for j in range(self.ny):
            for i in range(self.nx):
                hit = bool(self.verdicts[j, i])
                t = None
                if self.t_stars is not None and hit:
                    t = float(self.t_stars[j, i])
                yield float(xs[i]), float(ys[j]), hit, t

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["v1", "v2", "blows_up", "t_star"])
        for v1, v2, hit, t in self.rows():
            writer.writerow([format(v1, ".17g"), format(v2, ".17g"), int(hit),
                             "" if t is None else format(t, ".17g")])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "xr": list(self.xr),
            "yr": list(self.yr),
            "nx": self.nx,
            "ny": self.ny,
            "order": "row-major, y outer",
            "with_times": self.t_stars is not None,
            "nodes": [
                {"v1": v1, "v2": v2, "blows_up": hit, "t_star": t} for v1, v2, hit, t in self.rows()
            ],
        }
        return json.dumps(doc, indent=1) + "\n"


def _as_q(Q_or_model) -> Matrix2:
    if isinstance(Q_or_model, EPModel):
        return model_matrix(Q_or_model)
    return as_matrix(Q_or_model)


def sample_region(Q_or_model, xr, yr, nx: int, ny: int, want_times: bool = False,
                  workers: int = 1) -> RegionGrid:
    """Blow-up verdict at every node of an ``nx`` by ``ny`` grid of initial gradients.

    Rows are farmed out to ``workers`` threads; results do not depend on the
    worker count.
    """
    if nx < 2 or ny < 2:
        raise InvalidInputError("grids need nx >= 2 and ny >= 2")
    xr = (float(xr[0]), float(xr[1]))
    yr = (float(yr[0]), float(yr[1]))
    if not all(math.isfinite(v) for v in xr + yr) or xr[0] >= xr[1] or yr[0] >= yr[1]:
        raise InvalidInputError("ranges must be finite increasing intervals")
    jd = jordanize(_as_q(Q_or_model))
    xs = np.linspace(xr[0], xr[1], nx)
    ys = np.linspace(yr[0], yr[1], ny)

    def row(j: int):
        hits = np.zeros(nx, dtype=bool)
        times = np.full(nx, np.nan)
        for i in range(nx):
            co = coefficients(jd, (xs[i], ys[j]))
            verdict = verdict_from_coefficients(co)
            if verdict.blows_up and want_times:
                verdict = with_time(verdict, build_q(co))
                times[i] = verdict.t_star
            hits[i] = verdict.blows_up
        return hits, times

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(row, range(ny)))
    else:
        results = [row(j) for j in range(ny)]
    verdicts = np.array([r[0] for r in results])
    t_stars = np.array([r[1] for r in results]) if want_times else None
    return RegionGrid(xr, yr, nx, ny, verdicts, t_stars)


# ---------------------------------------------------------------------------


def asymptotic_report(m: EPModel, v0, V0=None) -> str:
    """Long-time behaviour label of a globally smooth solution.

    ``V0`` (the state at the foot of the characteristic) is accepted for
    completeness; the label depends only on the model case.
    """
    if m.gamma != 0.0:
        raise UnsupportedSpecialization("asymptotic labels are defined for gamma = 0")
    if V0 is not None and not all(math.isfinite(float(x)) for x in V0):
        raise InvalidInputError("V0 must be finite")
    if blows_up(model_matrix(m), v0).blows_up:
        raise NotApplicableError("gradients blow up; no long-time behaviour")
    return {1: "stabilizes-to-zero", 2: "stabilizes-to-zero", 3: "stabilizes-to-affine", 4: "periodic"}[m.case]
