import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, optimize
from scipy.stats import norm

from netsep.channels import (
    AwgnSpec,
    Dmc,
    Quantizer,
    awgn_capacity,
    awgn_transmit,
    bec,
    bsc,
    discretize_awgn,
    dmc_transmit,
    identity_channel,
    quantize,
    symmetric_channel,
    transmit_with_uniforms,
)
from netsep.coding_theorems import ba_capacity
from netsep.errors import InvalidArgument
from netsep.info_core import mutual_information
from netsep.rng import RngStream

from .strategies import stochastic_matrices


def toward_zero(x: np.ndarray, i: int) -> np.ndarray:
    """Independent quantizer oracle: truncate |x| onto the grid of step 1/sqrt(i), saturating at sqrt(i)."""
    d = 1.0 / math.sqrt(i)
    steps = np.minimum(np.floor(np.abs(x) / d + 1e-12), i)
    return np.sign(x) * steps * d


# -- DMC construction and transmission -------------------------------------------------------


def test_dmc_validation():
    with pytest.raises(InvalidArgument):
        Dmc(np.array([[0.5, 0.6]]))
    with pytest.raises(InvalidArgument):
        Dmc(np.array([[1.2, -0.2]]))
    with pytest.raises(InvalidArgument):
        Dmc(np.array([0.5, 0.5]))
    with pytest.raises(InvalidArgument):
        bsc(1.5)


def test_named_families():
    np.testing.assert_allclose(bsc(0.1).transitions, [[0.9, 0.1], [0.1, 0.9]])
    # outputs are 0, 1 and the erasure symbol last
    np.testing.assert_allclose(bec(0.2).transitions, [[0.8, 0.0, 0.2], [0.0, 0.8, 0.2]])
    np.testing.assert_array_equal(identity_channel(3).transitions, np.eye(3))
    w = symmetric_channel(4, 0.3).transitions
    assert np.allclose(np.diag(w), 0.7) and np.allclose(w.sum(axis=1), 1)


def test_identity_channel_is_transparent():
    x = RngStream(1).integers(0, 5, size=1000)
    np.testing.assert_array_equal(dmc_transmit(identity_channel(5), x, RngStream(2)), x)


def test_permutation_channel_is_deterministic():
    perm = np.eye(3)[[2, 0, 1]]
    x = np.array([0, 1, 2, 2, 1, 0])
    np.testing.assert_array_equal(dmc_transmit(Dmc(perm), x, RngStream(3)), [2, 0, 1, 1, 0, 2])


def test_bsc_half_flips_half():
    x = np.zeros(10_000, dtype=int)
    flips = dmc_transmit(bsc(0.5), x, RngStream(4)).mean()
    assert abs(flips - 0.5) <= 0.02


def test_bsc_flip_fraction_band_over_seeds():
    # a +-0.01 band is 3.33 standard deviations; the binomial tail puts
    # coverage near 99.9%, so at most a handful of 300 seeds may miss
    x = np.zeros(10_000, dtype=int)
    misses = sum(abs(dmc_transmit(bsc(0.1), x, RngStream(s)).mean() - 0.1) > 0.01 for s in range(300))
    assert misses <= 3


@given(stochastic_matrices(), st.integers(0, 2**32))
def test_transmission_is_deterministic_and_in_range(w, seed):
    ch = Dmc(w)
    x = RngStream(seed, ("x",)).integers(0, ch.input_size, size=50)
    y1 = dmc_transmit(ch, x, RngStream(seed, ("y",)))
    y2 = dmc_transmit(ch, x, RngStream(seed, ("y",)))
    np.testing.assert_array_equal(y1, y2)
    assert y1.min() >= 0 and y1.max() < ch.output_size


def test_transmit_with_uniforms_follows_rows():
    ch = Dmc(np.array([[0.2, 0.3, 0.5]]))
    u = RngStream(6).uniform(200_000)
    y = transmit_with_uniforms(ch, np.zeros_like(u, dtype=int), u)
    freq = np.bincount(y, minlength=3) / y.size
    assert np.all(np.abs(freq - [0.2, 0.3, 0.5]) < 4 * np.sqrt(0.25 / y.size))


def test_out_of_range_input_rejected():
    with pytest.raises(InvalidArgument):
        dmc_transmit(bsc(0.1), [0, 2], RngStream(0))


# -- quantizer ------------------------------------------------------------------------------------


def test_quantizer_examples():
    assert quantize(4, 0.0) == 0.0
    assert quantize(4, 0.7) == pytest.approx(0.5)
    assert quantize(4, -3.1) == pytest.approx(-2.0)
    q = Quantizer(4)
    np.testing.assert_allclose(q.levels, np.arange(-4, 5) * 0.5)
    assert q.num_levels == 9


@given(st.integers(1, 64), st.lists(st.floats(-50, 50), min_size=1, max_size=40))
def test_quantizer_truncates_toward_zero(i, xs):
    x = np.array(xs)
    qx = np.asarray(quantize(i, x), dtype=float)
    assert np.all(np.abs(qx) <= np.abs(x) + 1e-12)
    np.testing.assert_allclose(qx, toward_zero(x, i), atol=1e-12)
    # energy never increases, pathwise
    assert float(np.sum(qx**2)) <= float(np.sum(x**2)) + 1e-9


# -- AWGN ---------------------------------------------------------------------------------------


@pytest.mark.parametrize("p,n,c", [(1, 1, 0.5), (3, 1, 1.0), (1, 0.25, 1.160964)])
def test_awgn_capacity_examples(p, n, c):
    assert awgn_capacity(AwgnSpec(p, n)) == pytest.approx(c, abs=1e-6)


def test_awgn_spec_validation():
    with pytest.raises(InvalidArgument):
        AwgnSpec(0, 1)


def test_awgn_transmit_statistics():
    n = 100_000
    y = awgn_transmit(AwgnSpec(1, 1), np.zeros(n), RngStream(9, ("awgn",)))
    assert abs(y.mean()) <= 3 * math.sqrt(1 / n)
    # the sample variance has sd sqrt(2/n) = 0.0045, so +-1% is a 2.2 sigma band
    assert 0.99 <= y.var() <= 1.01
    y = awgn_transmit(AwgnSpec(1, 4), np.full(n, 2.5), RngStream(9, ("shift",)))
    assert abs(y.mean() - 2.5) <= 3 * math.sqrt(4 / n)


def test_awgn_variance_band_coverage_matches_chi_square():
    from scipy.stats import chi2

    n, runs = 100_000, 200
    lo, hi = chi2.cdf(0.99 * n, n - 1), chi2.cdf(1.01 * n, n - 1)
    coverage = hi - lo
    hits = sum(0.99 <= awgn_transmit(AwgnSpec(1, 1), np.zeros(n), RngStream(s, ("v",))).var(ddof=1) <= 1.01
               for s in range(runs))
    assert abs(hits / runs - coverage) <= 4 * math.sqrt(coverage * (1 - coverage) / runs)


def test_discretized_awgn_small_case_is_symmetric():
    ch = discretize_awgn(AwgnSpec(1, 1), 1, 1)
    w = ch.transitions
    assert w.shape == (3, 3)
    np.testing.assert_allclose(w.sum(axis=1), 1, atol=1e-9)
    np.testing.assert_allclose(w, w[::-1, ::-1], atol=1e-12)
    np.testing.assert_allclose(ch.input_cost, [1, 0, 1])


def _quad_matrix(spec: AwgnSpec, j: int, k: int) -> np.ndarray:
    """Oracle by numerical integration of the Gaussian density over each preimage."""
    din, dout = 1 / math.sqrt(j), 1 / math.sqrt(k)
    u = np.arange(-j, j + 1) * din
    edges = []
    for m in range(-k, k + 1):
        if m == 0:
            edges.append((-dout, dout))
        elif m == k:
            edges.append((m * dout, math.inf))
        elif m == -k:
            edges.append((-math.inf, m * dout))
        elif m > 0:
            edges.append((m * dout, (m + 1) * dout))
        else:
            edges.append(((m - 1) * dout, m * dout))
    s = math.sqrt(spec.noise)
    w = np.empty((u.size, len(edges)))
    for a, x in enumerate(u):
        for b, (lo, hi) in enumerate(edges):
            w[a, b] = integrate.quad(lambda z: norm.pdf(z, loc=x, scale=s), lo, hi, epsabs=1e-13)[0]
    return w


@pytest.mark.parametrize("j,k,noise", [(1, 1, 1.0), (2, 4, 0.5), (4, 3, 2.0)])
def test_discretized_awgn_matches_quadrature(j, k, noise):
    spec = AwgnSpec(1, noise)
    np.testing.assert_allclose(discretize_awgn(spec, j, k).transitions, _quad_matrix(spec, j, k), atol=1e-9)


def test_discretized_awgn_matches_simulation():
    spec, j, k = AwgnSpec(1, 1), 2, 3
    w = discretize_awgn(spec, j, k).transitions
    levels_out = np.arange(-k, k + 1) / math.sqrt(k)
    gen = np.random.default_rng(20240601)
    n = 1_000_000
    for a, x in enumerate(np.arange(-j, j + 1) / math.sqrt(j)):
        y = toward_zero(x + gen.standard_normal(n), k)
        idx = np.rint(y * math.sqrt(k)).astype(int) + k
        freq = np.bincount(idx, minlength=levels_out.size) / n
        se = np.sqrt(w[a] * (1 - w[a]) / n)
        assert np.all(np.abs(freq - w[a]) <= 3 * se + 1e-12)


@pytest.mark.parametrize("j,k", [(1, 1), (4, 4)])
def test_discretized_awgn_rows_merge_under_heavy_noise(j, k):
    span = 2 * math.sqrt(j)
    w = discretize_awgn(AwgnSpec(1, 1e4 * span**2), j, k).transitions
    tv = 0.5 * np.abs(w[:, None, :] - w[None, :, :]).sum(axis=-1)
    assert tv.max() <= 0.01


def _grid_capacity_oracle(w: np.ndarray, cost: np.ndarray, budget: float) -> float:
    """Independent oracle: multi-start SLSQP over the simplex under the cost constraint."""

    def neg(p):
        return -mutual_information(np.clip(p, 0, None)[:, None] * w / max(p.sum(), 1e-300))

    cons = [{"type": "eq", "fun": lambda p: p.sum() - 1.0}, {"type": "ineq", "fun": lambda p: budget - p @ cost}]
    best = math.inf
    rs = np.random.default_rng(0)
    m = w.shape[0]
    for _ in range(8):
        x0 = rs.dirichlet(np.ones(m))
        res = optimize.minimize(neg, x0, method="SLSQP", bounds=[(0, 1)] * m, constraints=cons,
                                options={"ftol": 1e-15, "maxiter": 2000})
        if res.success and res.x @ cost <= budget + 1e-9:
            best = min(best, res.fun)
    return -best


def test_discretized_capacity_small_cell_matches_oracle():
    ch = discretize_awgn(AwgnSpec(1, 1), 1, 1)
    c = ba_capacity(ch, power_budget=1.0).capacity
    assert c == pytest.approx(_grid_capacity_oracle(ch.transitions, ch.input_cost, 1.0), abs=1e-6)


def test_discretized_capacity_with_active_budget_matches_oracle():
    ch = discretize_awgn(AwgnSpec(0.5, 1), 2, 2)
    c = ba_capacity(ch, power_budget=0.5).capacity
    assert c == pytest.approx(_grid_capacity_oracle(ch.transitions, ch.input_cost, 0.5), abs=1e-5)


def test_fine_discretization_nears_the_gaussian_ceiling():
    spec = AwgnSpec(1, 1)
    c = ba_capacity(discretize_awgn(spec, 32, 32), power_budget=1.0).capacity
    assert 0.45 <= c <= awgn_capacity(spec) + 1e-6
