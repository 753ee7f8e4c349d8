import math

import numpy as np
import pytest

from powertsp.sampling import (
    build_density,
    density_from_dict,
    make_rng,
    sample_binomial,
    sample_poisson,
)


def test_uniform_density():
    d = build_density("uniform", 1.0, 1.0)
    assert d.integral() == 1.0
    pts = np.array([[0.0, 0.0], [-0.5, 0.5], [0.49, -0.49]])
    assert np.all(d.value(pts) == 1.0)


def test_uniform_density_rejects_bounds_not_bracketing_one():
    with pytest.raises(ValueError):
        build_density("uniform", 1.2, 1.5)
    with pytest.raises(ValueError):
        build_density("uniform", 0.2, 0.9)


def test_checkerboard_2x2_needs_no_rescale():
    d = build_density("checkerboard", 0.5, 1.5, 2)
    assert d.integral() == pytest.approx(1.0, abs=1e-12)
    assert sorted(np.unique(d.grid)) == [0.5, 1.5]
    # top-left cell carries the low value
    assert d.value(np.array([[-0.25, 0.25]]))[0] == 0.5
    assert d.value(np.array([[0.25, 0.25]]))[0] == 1.5


def test_checkerboard_3x3_rescales_within_bounds():
    # 5 low cells, 4 high: pin high at 1.5, solve low = (9 - 6)/5 = 0.6
    d = build_density("checkerboard", 0.5, 1.5, 3)
    assert d.integral() == pytest.approx(1.0, abs=1e-12)
    vals = np.unique(d.grid)
    assert vals.min() == pytest.approx(0.6, abs=1e-12)
    assert vals.max() == pytest.approx(1.5, abs=1e-12)
    assert vals.min() >= d.eps1 - 1e-12 and vals.max() <= d.eps2 + 1e-12


def test_checkerboard_impossible_normalization():
    with pytest.raises(ValueError):
        build_density("checkerboard", 1.1, 1.5, 2)  # every value above 1
    with pytest.raises(ValueError):
        build_density("checkerboard", 0.2, 0.8, 2)  # every value below 1
    with pytest.raises(ValueError):
        build_density("checkerboard", 0.5, 1.5, 0)
    with pytest.raises(ValueError):
        build_density("nonuniform", 0.5, 1.5, 2)
    with pytest.raises(ValueError):
        build_density("uniform", 1.5, 0.5)


def test_density_from_dict_roundtrip():
    d = density_from_dict({"kind": "checkerboard", "eps1": 0.5, "eps2": 1.5, "k": 2})
    assert d.kind == "checkerboard" and d.k == 2


def test_sample_binomial_empty_and_exact_count():
    d = build_density("uniform", 1.0, 1.0)
    s0 = sample_binomial(d, 0, seed=1)
    assert s0.n == 0
    s = sample_binomial(d, 137, seed=1)
    assert s.n == 137
    assert np.all(s.points >= -0.5) and np.all(s.points <= 0.5)


def test_sample_binomial_reproducible():
    d = build_density("checkerboard", 0.5, 1.5, 2)
    a = sample_binomial(d, 500, seed=42, stream=(3, 7))
    b = sample_binomial(d, 500, seed=42, stream=(3, 7))
    assert np.array_equal(a.points, b.points)
    c = sample_binomial(d, 500, seed=42, stream=(3, 8))
    assert not np.array_equal(a.points, c.points)


def test_sample_binomial_no_exact_duplicates():
    d = build_density("uniform", 1.0, 1.0)
    s = sample_binomial(d, 2000, seed=9)
    assert len({(x, y) for x, y in s.points}) == 2000


def test_quadrant_counts_uniform():
    # each quadrant ~ Binomial(10^4, 1/4): stay within 4 sigma of 2500
    d = build_density("uniform", 1.0, 1.0)
    s = sample_binomial(d, 10_000, seed=5)
    sigma = math.sqrt(10_000 * 0.25 * 0.75)
    for sx in (-1, 1):
        for sy in (-1, 1):
            count = int(np.sum((np.sign(s.points[:, 0] + 1e-12) == sx) & (np.sign(s.points[:, 1] + 1e-12) == sy)))
            assert abs(count - 2500) < 4 * sigma


def test_checkerboard_cell_ratio():
    # heavy cells carry 3x the light-cell mass: counts approx 3750 vs 1250 per cell
    d = build_density("checkerboard", 0.5, 1.5, 2)
    s = sample_binomial(d, 10_000, seed=6)
    vals = d.value(s.points)
    heavy = int(np.sum(vals == 1.5))
    light = 10_000 - heavy
    p_heavy = 0.75
    sigma = math.sqrt(10_000 * p_heavy * (1 - p_heavy))
    assert abs(heavy - 7500) < 4 * sigma
    assert heavy > 2.5 * light


def test_cell_frequencies_respect_chernoff_band():
    # counts on a 5x5 grid are Binomial(n, 1/25) sums: a band whose Chernoff
    # failure bound is ~e^-20 must hold across every cell of one draw
    from powertsp.bounds import chernoff_tail
    from powertsp.geometry import build_tiling, cell_index_array

    n = 10_000
    d = build_density("uniform", 1.0, 1.0)
    s = sample_binomial(d, n, seed=21)
    tiling = build_tiling(25, 1.0)
    counts = np.bincount(cell_index_array(tiling, s.points), minlength=26)[1:]
    mu = 1.0 / 25.0
    eps = 0.45
    assert chernoff_tail(n, mu, eps, "upper") < 1e-8
    assert np.all(counts <= n * mu * (1 + eps))
    assert np.all(counts >= n * mu * (1 - eps))


def test_poisson_count_moments():
    d = build_density("uniform", 1.0, 1.0)
    counts = np.array([sample_poisson(d, 100, seed=8, stream=(t,)).n for t in range(10_000)])
    # mean within 3 * sqrt(100/10^4) * 10 = 3 of 100
    assert abs(counts.mean() - 100.0) < 3.0
    # variance approx 100 within 10%
    assert abs(counts.var(ddof=1) - 100.0) < 10.0


def test_poisson_deterministic():
    d = build_density("uniform", 1.0, 1.0)
    a = sample_poisson(d, 1, seed=123)
    b = sample_poisson(d, 1, seed=123)
    assert a.n == b.n and np.array_equal(a.points, b.points)


def test_validation():
    d = build_density("uniform", 1.0, 1.0)
    with pytest.raises(ValueError):
        sample_binomial(d, -1, seed=0)
    with pytest.raises(ValueError):
        sample_poisson(d, 0, seed=0)


def test_make_rng_streams_disjoint():
    a = make_rng(1, (2, 3)).uniform(size=8)
    b = make_rng(1, (2, 4)).uniform(size=8)
    assert not np.array_equal(a, b)
