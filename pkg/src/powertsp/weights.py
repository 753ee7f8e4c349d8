"""Edge weight functions equivalent to Euclidean distance.

A weight function h assigns every pair of unit-square points a symmetric
cost squeezed between c1*d and c2*d, d the Euclidean distance.  Edge
weights raise h to a power alpha > 0.  Three built-in kinds:

  euclidean          h = d                                   c1 = c2 = 1
  coordinate_metric  h = |(1+x1)^2-(1+y1)^2| + same in x2,y2 c1 = 1, c2 = 3*sqrt(2)
  radial_metric      h = d(u,v) + |d(u,0)-d(v,0)|/2          c1 = 1, c2 = 3/2

The radial kind scales linearly (h(au,av) = a*h(u,v)) and grows at most by
h0 = 3/2 under a common shift of both endpoints; the coordinate kind does
neither.  Custom weight functions declare their own constants and are vetted
numerically by verify_equivalence before use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import as_coords

ROOT2 = math.sqrt(2.0)

BUILTIN_KINDS = ("euclidean", "coordinate_metric", "radial_metric")


def check_alpha(alpha: float) -> float:
    if not (alpha > 0.0 and math.isfinite(alpha)):
        raise ValueError(f"edge weight exponent must be a positive real, got {alpha}")
    return float(alpha)


@dataclass(frozen=True)
class WeightFunction:
    """A pairwise cost h with its equivalence constants.

    ``func`` maps two (..., 2) coordinate arrays to elementwise costs.
    ``h0`` is the shift-growth constant (None when unknown);
    ``scale_invariant`` records whether h(au, av) = a*h(u, v).
    """

    kind: str
    c1: float
    c2: float
    is_metric: bool
    h0: float | None = None
    scale_invariant: bool = False
    func: Callable[[np.ndarray, np.ndarray], np.ndarray] = field(repr=False, default=None)

    def h(self, u, v) -> float:
        """Cost of the single pair (u, v), evaluated on the canonically
        ordered pair so that h(u, v) and h(v, u) are bit-identical."""
        uu = as_coords([u])[0]
        vv = as_coords([v])[0]
        if (vv[0], vv[1]) < (uu[0], uu[1]):
            uu, vv = vv, uu
        return float(self.func(uu, vv))

    def h_pairs(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Vectorized costs for matched rows of two (m, 2) arrays, with the
        same canonical-ordering guarantee as ``h``."""
        u = np.asarray(u, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        swap = (v[..., 0] < u[..., 0]) | ((v[..., 0] == u[..., 0]) & (v[..., 1] < u[..., 1]))
        lo = np.where(swap[..., None], v, u)
        hi = np.where(swap[..., None], u, v)
        return self.func(lo, hi)


def _euclid(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    d = u - v
    return np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2)


def _coordinate(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.abs((1.0 + u[..., 0]) ** 2 - (1.0 + v[..., 0]) ** 2) + np.abs(
        (1.0 + u[..., 1]) ** 2 - (1.0 + v[..., 1]) ** 2
    )


def _radial(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    d = _euclid(u, v)
    ru = np.sqrt(u[..., 0] ** 2 + u[..., 1] ** 2)
    rv = np.sqrt(v[..., 0] ** 2 + v[..., 1] ** 2)
    return d + 0.5 * np.abs(ru - rv)


def make_weight_function(kind: str, **params) -> WeightFunction:
    """Build one of the named weight functions, or wrap a custom one.

    Custom functions must pass func (vectorized on (..., 2) arrays), c1, c2
    and may declare h0, is_metric and scale_invariant; the declared constants
    are the caller's claim and should be vetted with verify_equivalence.
    """
    if kind == "euclidean":
        return WeightFunction(kind, c1=1.0, c2=1.0, is_metric=True, h0=1.0,
                              scale_invariant=True, func=_euclid)
    if kind == "coordinate_metric":
        return WeightFunction(kind, c1=1.0, c2=3.0 * ROOT2, is_metric=True, h0=None,
                              scale_invariant=False, func=_coordinate)
    if kind == "radial_metric":
        return WeightFunction(kind, c1=1.0, c2=1.5, is_metric=True, h0=1.5,
                              scale_invariant=True, func=_radial)
    if kind == "custom":
        func = params.pop("func")
        c1 = float(params.pop("c1"))
        c2 = float(params.pop("c2"))
        if not (0.0 < c1 <= c2):
            raise ValueError(f"need 0 < c1 <= c2, got c1={c1}, c2={c2}")
        wf = WeightFunction(
            kind="custom",
            c1=c1,
            c2=c2,
            is_metric=bool(params.pop("is_metric", False)),
            h0=params.pop("h0", None),
            scale_invariant=bool(params.pop("scale_invariant", False)),
            func=func,
        )
        if params:
            raise ValueError(f"unknown custom weight parameters: {sorted(params)}")
        return wf
    raise ValueError(f"unknown weight kind {kind!r}; expected one of {BUILTIN_KINDS + ('custom',)}")


def edge_weight(wf: WeightFunction, alpha: float, u, v) -> float:
    """Weight h(u, v)^alpha of the edge between u and v."""
    check_alpha(alpha)
    return wf.h(u, v) ** alpha


def edge_weight_pairs(wf: WeightFunction, alpha: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorized h^alpha over matched rows of two coordinate arrays."""
    check_alpha(alpha)
    return wf.h_pairs(u, v) ** alpha


def weight_matrix(wf: WeightFunction, alpha: float, points) -> np.ndarray:
    """Full symmetric n x n matrix of edge weights, zero diagonal.

    Built from the upper triangle and mirrored, so W[i, j] and W[j, i] are
    bit-identical.
    """
    check_alpha(alpha)
    pts = as_coords(points)
    n = pts.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    w = wf.func(pts[iu], pts[ju]) ** alpha
    mat = np.zeros((n, n), dtype=np.float64)
    mat[iu, ju] = w
    mat[ju, iu] = w
    return mat


@dataclass
class EquivalenceReport:
    """Outcome of the numerical vetting of a weight function."""

    kind: str
    samples: int
    passed: bool
    violations: list[dict]

    def summary(self) -> str:
        status = "pass" if self.passed else f"fail ({len(self.violations)} violations)"
        return f"verify_equivalence[{self.kind}] over {self.samples} samples: {status}"


def verify_equivalence(wf: WeightFunction, sample_count: int, seed: int = 0) -> EquivalenceReport:
    """Monte Carlo check of the declared constants: c1*d <= h <= c2*d,
    symmetry, and (for metrics) the triangle inequality on sampled triples.

    Violations are reported with the witnessing points; up to 20 are kept.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, 0x7E57))))
    tol = 1e-9
    violations: list[dict] = []

    def record(kind_, pts, lhs, rhs):
        if len(violations) < 20:
            violations.append({"check": kind_, "points": [list(p) for p in pts],
                               "lhs": float(lhs), "rhs": float(rhs)})

    u = rng.uniform(-0.5, 0.5, size=(sample_count, 2))
    v = rng.uniform(-0.5, 0.5, size=(sample_count, 2))
    d = _euclid(u, v)
    hv = wf.h_pairs(u, v)
    hv_swapped = wf.h_pairs(v, u)

    bad = hv < wf.c1 * d - tol
    for i in np.flatnonzero(bad)[:5]:
        record("lower_equivalence", (u[i], v[i]), hv[i], wf.c1 * d[i])
    bad = hv > wf.c2 * d + tol
    for i in np.flatnonzero(bad)[:5]:
        record("upper_equivalence", (u[i], v[i]), hv[i], wf.c2 * d[i])
    bad = hv != hv_swapped
    for i in np.flatnonzero(bad)[:5]:
        record("symmetry", (u[i], v[i]), hv[i], hv_swapped[i])

    if wf.is_metric:
        w = rng.uniform(-0.5, 0.5, size=(sample_count, 2))
        lhs = wf.h_pairs(u, w)
        rhs = wf.h_pairs(u, v) + wf.h_pairs(v, w)
        bad = lhs > rhs + tol
        for i in np.flatnonzero(bad)[:5]:
            record("triangle", (u[i], v[i], w[i]), lhs[i], rhs[i])

    return EquivalenceReport(kind=wf.kind, samples=sample_count,
                             passed=not violations, violations=violations)
