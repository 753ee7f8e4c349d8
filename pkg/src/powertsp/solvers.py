"""Tour and spanning-path solvers over power-weighted edges.

Exact solvers: a full permutation scan (oracle, n <= 10) and a bitmask
dynamic program (n <= 18), both returning the lexicographically smallest
canonical optimal order.  Constructive solver: the cell-chained tour that
strings nearest-neighbor paths through dense cells (>= 3 nodes) and sparse
cells (1-2 nodes) of a tiling in serpentine label order and merges the two
chains into a spanning cycle.  Plus 2-opt polishing, exact/heuristic
minimum-weight spanning paths, the in/cross/out decomposition path, and the
dense/sparse label-gap statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .geometry import Tiling, as_coords, cell_bounds, cell_index_array
from .weights import WeightFunction, check_alpha, edge_weight_pairs, weight_matrix

BRUTEFORCE_MAX_N = 10
EXACT_TOUR_MAX_N = 18
EXACT_PATH_MAX_N = 16
DEFAULT_TWO_OPT_PASSES = 40


@dataclass(frozen=True)
class Tour:
    """A spanning cycle: canonical vertex order plus its cached weight."""

    order: tuple[int, ...]
    weight: float


@dataclass(frozen=True)
class SpanningPath:
    """A spanning path (no wraparound edge); ``exact`` is False when the
    order came from the nearest-neighbor fallback rather than the DP."""

    order: tuple[int, ...]
    weight: float
    endpoints: tuple[int, int]
    exact: bool = True


@dataclass(frozen=True)
class GapStatistics:
    """Dense/sparse cell labels of a tiling and their alpha-powered label-gap
    sums; z_alpha is None when either class of cell is absent."""

    dense_indices: tuple[int, ...]
    sparse_indices: tuple[int, ...]
    q: int
    l: int
    s_alpha: float
    v_alpha: float
    z_alpha: float | None


@dataclass(frozen=True)
class ApproxPathRecord:
    """Decomposition bookkeeping for the in/cross/out spanning path."""

    n_in: int
    n_out: int
    in_weight: float
    cross_weight: float
    out_weight: float
    in_exact: bool
    out_exact: bool


def _validate_permutation(order, n: int) -> list[int]:
    order = [int(i) for i in order]
    if sorted(order) != list(range(n)):
        raise ValueError(f"order is not a permutation of 0..{n - 1}")
    return order


def canonical_cycle(order) -> tuple[int, ...]:
    """Rotate to start at index 0 and reflect so the second element is
    smaller than the last."""
    order = list(order)
    i = order.index(0)
    rot = order[i:] + order[:i]
    if len(rot) >= 3 and rot[1] > rot[-1]:
        rot = [rot[0]] + rot[:0:-1]
    return tuple(rot)


def tour_weight(points, order, wf: WeightFunction, alpha: float) -> float:
    """Total weight of the cycle visiting ``order``, wraparound edge included
    (two nodes give the doubled edge)."""
    pts = as_coords(points)
    n = pts.shape[0]
    if n < 2:
        raise ValueError("a tour needs at least 2 nodes")
    order = _validate_permutation(order, n)
    po = pts[order]
    return float(np.sum(edge_weight_pairs(wf, alpha, po, np.roll(po, -1, axis=0))))


def tsp_bruteforce(points, wf: WeightFunction, alpha: float) -> Tour:
    """Minimum-weight spanning cycle by scanning all (n-1)!/2 distinct
    cycles; ties (within float-rounding tolerance, so mathematically equal
    tours summed in different orders still count as tied) keep the
    lexicographically smallest canonical order."""
    pts = as_coords(points)
    n = pts.shape[0]
    if not (2 <= n <= BRUTEFORCE_MAX_N):
        raise ValueError(f"brute force handles 2 <= n <= {BRUTEFORCE_MAX_N}, got {n}")
    mat = weight_matrix(wf, alpha, pts).tolist()
    row0 = mat[0]

    def cycle_weight(perm):
        w = row0[perm[0]]
        prev = perm[0]
        for node in perm[1:]:
            w += mat[prev][node]
            prev = node
        return w + mat[prev][0]

    best_w = math.inf
    for perm in permutations(range(1, n)):
        if perm[0] > perm[-1]:
            continue  # reflection of an earlier cycle
        best_w = min(best_w, cycle_weight(perm))
    tol = 1e-12 * (1.0 + abs(best_w))
    for perm in permutations(range(1, n)):
        if perm[0] > perm[-1]:
            continue
        if cycle_weight(perm) <= best_w + tol:
            order = (0,) + perm
            return Tour(order=order, weight=tour_weight(pts, order, wf, alpha))
    raise AssertionError("no cycle matched its own minimum")


def _completion_table(mat: np.ndarray, close_to_start: bool) -> np.ndarray:
    """h[mask, j]: minimum cost of finishing a route that stands at j with
    ``mask`` already visited — visiting every remaining node once, plus the
    edge back to node 0 when ``close_to_start``.

    Entries for j outside mask are filled but never read.
    """
    n = mat.shape[0]
    full = (1 << n) - 1
    h = np.full((1 << n, n), np.inf)
    h[full, :] = mat[:, 0] if close_to_start else 0.0
    for mask in range(full - 1, 0, -1):
        if close_to_start and not (mask & 1):
            continue
        rem = [t for t in range(n) if not (mask >> t) & 1]
        if not rem:
            continue
        vals = np.array([h[mask | (1 << t), t] for t in rem])
        h[mask, :] = np.min(mat[:, rem] + vals[None, :], axis=1)
    return h


def _greedy_reconstruct(mat: np.ndarray, h: np.ndarray, start: int, n: int) -> list[int]:
    """Walk the completion table choosing the smallest next node that still
    achieves the optimal remaining cost (up to float-tie tolerance)."""
    full = (1 << n) - 1
    tol = 1e-12 * (1.0 + abs(float(h[(1 << start), start])))
    mask, j = 1 << start, start
    order = [start]
    while mask != full:
        target = h[mask, j]
        for t in range(n):
            if (mask >> t) & 1:
                continue
            if mat[j, t] + h[mask | (1 << t), t] <= target + tol:
                order.append(t)
                mask |= 1 << t
                j = t
                break
        else:
            raise AssertionError("completion table inconsistent")
    return order


def tsp_exact(points, wf: WeightFunction, alpha: float) -> Tour:
    """Minimum-weight spanning cycle via subset dynamic programming,
    matching the brute-force tie-breaking rule."""
    pts = as_coords(points)
    n = pts.shape[0]
    if not (2 <= n <= EXACT_TOUR_MAX_N):
        raise ValueError(f"exact solver handles 2 <= n <= {EXACT_TOUR_MAX_N}, got {n}")
    mat = weight_matrix(wf, alpha, pts)
    if n == 2:
        return Tour(order=(0, 1), weight=tour_weight(pts, (0, 1), wf, alpha))
    h = _completion_table(mat, close_to_start=True)
    order = canonical_cycle(_greedy_reconstruct(mat, h, start=0, n=n))
    return Tour(order=order, weight=tour_weight(pts, order, wf, alpha))


def _nearest_neighbor_order(mat_row, candidates: list[int]) -> int:
    """Index (into candidates) of the cheapest candidate; first wins ties."""
    best, best_w = 0, math.inf
    for idx, c in enumerate(candidates):
        w = mat_row[c]
        if w < best_w:
            best, best_w = idx, w
    return best


def _path_two_opt(mat: np.ndarray, order: list[int], fixed_start: bool) -> list[int]:
    """2-opt on an open path: segment reversals, endpoints free unless the
    start is pinned."""
    n = len(order)
    o = np.asarray(order)
    tol = 1e-12 * (1.0 + float(np.sum(mat[o[:-1], o[1:]])))
    for _ in range(DEFAULT_TWO_OPT_PASSES):
        improved = False
        i_lo = 1 if fixed_start else 0
        for i in range(i_lo, n - 1):
            js = np.arange(i + 1, n - 1)
            if js.size:
                delta = mat[o[i], o[js + 1]] - mat[o[js], o[js + 1]]
                if i >= 1:
                    delta = delta + mat[o[i - 1], o[js]] - mat[o[i - 1], o[i]]
                k = int(np.argmin(delta))
                if delta[k] < -tol:
                    j = int(js[k])
                    o[i : j + 1] = o[i : j + 1][::-1]
                    improved = True
                    continue
            if i >= 1:  # reverse the suffix [i..n-1], moving the right endpoint
                d_suffix = mat[o[i - 1], o[n - 1]] - mat[o[i - 1], o[i]]
                if d_suffix < -tol:
                    o[i:] = o[i:][::-1]
                    improved = True
        if not improved:
            break
    return [int(v) for v in o]


def min_weight_spanning_path(
    points, wf: WeightFunction, alpha: float, required_endpoint: int | None = None
) -> SpanningPath:
    """Minimum-weight spanning path, exact (subset DP) up to 16 nodes and
    nearest-neighbor plus 2-opt beyond; honors a required endpoint."""
    pts = as_coords(points)
    n = pts.shape[0]
    if n < 1:
        raise ValueError("a spanning path needs at least 1 node")
    if required_endpoint is not None and not (0 <= required_endpoint < n):
        raise ValueError(f"required endpoint {required_endpoint} out of range")
    if n == 1:
        return SpanningPath(order=(0,), weight=0.0, endpoints=(0, 0), exact=True)
    mat = weight_matrix(wf, alpha, pts)
    if n <= EXACT_PATH_MAX_N:
        h = _completion_table(mat, close_to_start=False)
        if required_endpoint is not None:
            start = required_endpoint
        else:
            starts = np.array([h[1 << s, s] for s in range(n)])
            best = float(starts.min())
            tol = 1e-12 * (1.0 + abs(best))
            start = int(np.flatnonzero(starts <= best + tol)[0])
        order = _greedy_reconstruct(mat, h, start=start, n=n)
        exact = True
    else:
        start = required_endpoint if required_endpoint is not None else 0
        remaining = [i for i in range(n) if i != start]
        order = [start]
        while remaining:
            k = _nearest_neighbor_order(mat[order[-1]], remaining)
            order.append(remaining.pop(k))
        order = _path_two_opt(mat, order, fixed_start=required_endpoint is not None)
        exact = False
    if required_endpoint is None and order[0] > order[-1]:
        order = order[::-1]
    weight = float(np.sum(mat[order[:-1], order[1:]]))
    return SpanningPath(order=tuple(order), weight=weight,
                        endpoints=(order[0], order[-1]), exact=exact)


def two_opt(points, tour: Tour, wf: WeightFunction, alpha: float,
            max_passes: int = DEFAULT_TWO_OPT_PASSES) -> Tour:
    """Polish a tour with segment reversals until a 2-opt local optimum or
    the pass budget; the weight never increases."""
    pts = as_coords(points)
    n = pts.shape[0]
    order = _validate_permutation(tour.order, n)
    if n < 4:
        order = canonical_cycle(order)
        return Tour(order=order, weight=tour_weight(pts, order, wf, alpha))
    mat = weight_matrix(wf, alpha, pts)
    o = np.asarray(order)
    tol = 1e-12 * (1.0 + tour.weight)
    for _ in range(max_passes):
        improved = False
        for i in range(n - 2):
            a, b = o[i], o[i + 1]
            j_hi = n - 1 if i > 0 else n - 2
            js = np.arange(i + 2, j_hi + 1)
            if not js.size:
                continue
            c = o[js]
            d = o[(js + 1) % n]
            delta = mat[a, c] + mat[b, d] - mat[a, b] - mat[c, d]
            k = int(np.argmin(delta))
            if delta[k] < -tol:
                j = int(js[k])
                o[i + 1 : j + 1] = o[i + 1 : j + 1][::-1]
                improved = True
        if not improved:
            break
    order = canonical_cycle(int(v) for v in o)
    return Tour(order=order, weight=tour_weight(pts, order, wf, alpha))


def _cells_of(points: np.ndarray, tiling: Tiling) -> dict[int, list[int]]:
    labels = cell_index_array(tiling, points)
    cells: dict[int, list[int]] = {}
    for idx, lab in enumerate(labels):
        cells.setdefault(int(lab), []).append(idx)
    return cells


def _nn_within(pts: np.ndarray, wf: WeightFunction, alpha: float,
               nodes: list[int], entry: int) -> list[int]:
    """Nearest-neighbor spanning order of one cell's nodes from ``entry``."""
    seq = [entry]
    remaining = [v for v in nodes if v != entry]
    while remaining:
        w = edge_weight_pairs(wf, alpha, pts[seq[-1]][None, :], pts[remaining])
        seq.append(remaining.pop(int(np.argmin(w))))
    return seq


def _chain_cells(pts: np.ndarray, wf: WeightFunction, alpha: float,
                 cells: dict[int, list[int]], labels: list[int]) -> list[int]:
    """Concatenate per-cell nearest-neighbor paths over ``labels`` in label
    order, entering each cell at its node cheapest from the chain tail (the
    connector must attach at the path end to keep the union a simple path)."""
    order: list[int] = []
    for lab in labels:
        nodes = cells[lab]
        if not order:
            entry = nodes[0]
        elif len(nodes) == 1:
            entry = nodes[0]
        else:
            w = edge_weight_pairs(wf, alpha, pts[order[-1]][None, :], pts[nodes])
            entry = nodes[int(np.argmin(w))]
        if len(nodes) == 1:
            order.append(entry)
        else:
            order.extend(_nn_within(pts, wf, alpha, nodes, entry))
    return order


def grid_tour(points, wf: WeightFunction, alpha: float, tiling: Tiling) -> Tour:
    """The constructive spanning cycle over a tiling.

    Dense cells (>= 3 nodes) are chained into one path in serpentine label
    order, sparse occupied cells (1-2 nodes) into another; edges between the
    first endpoints and the last endpoints close the two paths into a cycle.
    With fewer than two dense or two sparse cells the construction
    degenerates to a single serpentine chain over all occupied cells, closed
    into a cycle.
    """
    check_alpha(alpha)
    pts = as_coords(points)
    n = pts.shape[0]
    if n < 2:
        raise ValueError("the constructive tour needs at least 2 nodes")
    cells = _cells_of(pts, tiling)
    occupied = sorted(cells)
    dense = [lab for lab in occupied if len(cells[lab]) >= 3]
    sparse = [lab for lab in occupied if len(cells[lab]) <= 2]
    if len(dense) >= 2 and len(sparse) >= 2:
        dense_path = _chain_cells(pts, wf, alpha, cells, dense)
        sparse_path = _chain_cells(pts, wf, alpha, cells, sparse)
        cycle = dense_path + sparse_path[::-1]
    else:
        cycle = _chain_cells(pts, wf, alpha, cells, occupied)
    order = canonical_cycle(cycle)
    return Tour(order=order, weight=tour_weight(pts, order, wf, alpha))


def _distance_to_rect(pts: np.ndarray, rect: tuple[float, float, float, float]) -> np.ndarray:
    x0, x1, y0, y1 = rect
    dx = np.maximum(np.maximum(x0 - pts[:, 0], pts[:, 0] - x1), 0.0)
    dy = np.maximum(np.maximum(y0 - pts[:, 1], pts[:, 1] - y1), 0.0)
    return np.hypot(dx, dy)


def approx_tsp_path(points, wf: WeightFunction, alpha: float,
                    tiling: Tiling) -> tuple[SpanningPath, ApproxPathRecord]:
    """The in/cross/out decomposition path anchored at node 0.

    Takes the half-size square concentric with node 0's cell, solves a
    minimum-weight spanning path on the nodes inside it (node 0 always
    counts as inside), crosses to the outside node nearest the square, and
    continues with a minimum-weight spanning path over the outside nodes
    pinned at that crossing node.
    """
    check_alpha(alpha)
    pts = as_coords(points)
    n = pts.shape[0]
    if n < 3:
        raise ValueError("the decomposition path needs at least 3 nodes")
    lab0 = int(cell_index_array(tiling, pts[0][None, :])[0])
    x0, x1, y0, y1 = cell_bounds(tiling, lab0)
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    quarter = 0.25 * (x1 - x0)
    rect = (cx - quarter, cx + quarter, cy - quarter, cy + quarter)
    in_rect = (
        (pts[:, 0] >= rect[0]) & (pts[:, 0] <= rect[1])
        & (pts[:, 1] >= rect[2]) & (pts[:, 1] <= rect[3])
    )
    in_rect[0] = True  # node 0 anchors the inside path even off-center in its cell
    inside = np.flatnonzero(in_rect)
    outside = np.flatnonzero(~in_rect)
    if outside.size == 0:
        raise ValueError("no node outside the half-size center square: cross edge undefined")

    dist_out = _distance_to_rect(pts[outside], rect)
    v_close = int(outside[int(np.argmin(dist_out))])

    p_in = min_weight_spanning_path(pts[inside], wf, alpha)
    in_order = [int(inside[i]) for i in p_in.order]
    e1, e2 = in_order[0], in_order[-1]
    d1 = math.hypot(pts[e1][0] - pts[v_close][0], pts[e1][1] - pts[v_close][1])
    d2 = math.hypot(pts[e2][0] - pts[v_close][0], pts[e2][1] - pts[v_close][1])
    if d1 < d2 or (d1 == d2 and e1 < e2):
        in_order = in_order[::-1]  # end the inside path at the endpoint nearer the crossing

    out_local = {int(g): i for i, g in enumerate(outside)}
    p_out = min_weight_spanning_path(pts[outside], wf, alpha,
                                     required_endpoint=out_local[v_close])
    out_order = [int(outside[i]) for i in p_out.order]

    order = in_order + out_order
    cross_w = float(edge_weight_pairs(wf, alpha, pts[in_order[-1]][None, :],
                                      pts[v_close][None, :])[0])
    po = pts[np.asarray(order)]
    weight = float(np.sum(edge_weight_pairs(wf, alpha, po[:-1], po[1:])))
    record = ApproxPathRecord(
        n_in=int(inside.size),
        n_out=int(outside.size),
        in_weight=p_in.weight,
        cross_weight=cross_w,
        out_weight=p_out.weight,
        in_exact=p_in.exact,
        out_exact=p_out.exact,
    )
    path = SpanningPath(order=tuple(order), weight=weight,
                        endpoints=(order[0], order[-1]),
                        exact=p_in.exact and p_out.exact)
    return path, record


def _gap_sum(indices: list[int], cell_count: int, alpha: float) -> float:
    """Sum of alpha powers of the label gaps, extended to zero or one index."""
    if not indices:
        return float(cell_count - 1) ** alpha
    gaps = [indices[0] - 1]
    gaps.extend(b - a for a, b in zip(indices, indices[1:]))
    gaps.append(cell_count - indices[-1])
    return float(sum(float(g) ** alpha for g in gaps))


def gap_statistics(points, tiling: Tiling, alpha: float) -> GapStatistics:
    """Classify every cell dense (>= 3 nodes) or sparse (<= 2, empty
    included) and compute the label-gap power sums for both classes plus the
    end-pair mismatch term when both classes are present."""
    check_alpha(alpha)
    pts = as_coords(points)
    labels = cell_index_array(tiling, pts)
    counts = np.bincount(labels, minlength=tiling.cell_count + 1)
    dense = [lab for lab in range(1, tiling.cell_count + 1) if counts[lab] >= 3]
    sparse = [lab for lab in range(1, tiling.cell_count + 1) if counts[lab] < 3]
    s_alpha = _gap_sum(dense, tiling.cell_count, alpha)
    v_alpha = _gap_sum(sparse, tiling.cell_count, alpha)
    z_alpha = None
    if dense and sparse:
        z_alpha = float(abs(dense[0] - sparse[0])) ** alpha + float(abs(dense[-1] - sparse[-1])) ** alpha
    return GapStatistics(
        dense_indices=tuple(dense),
        sparse_indices=tuple(sparse),
        q=len(dense),
        l=len(sparse),
        s_alpha=s_alpha,
        v_alpha=v_alpha,
        z_alpha=z_alpha,
    )
