import math

import numpy as np
import pytest
from scipy import special, stats

import famablc as fb


def test_special_functions_match_scipy():
    for x in (0.0, 0.3, 2.5, 17.0):
        assert fb.bessel_j0(x) == pytest.approx(special.j0(x), abs=1e-14)
        assert fb.bessel_i_scaled(1.5, x) == pytest.approx(special.ive(1.5, x), rel=1e-12)
    for a, b in ((0.5, 1.0), (2.0, 0.7), (3.0, 4.0)):
        # Q_nu(a, b) is the survival function of a noncentral chi-square.
        want = stats.ncx2.sf(b * b, 2 * 1.5, a * a)
        assert fb.marcum_q(1.5, a, b) == pytest.approx(want, rel=1e-9)
    assert fb.reg_inc_beta(0.3, 2.0, 5.0) == pytest.approx(special.betainc(2.0, 5.0, 0.3), rel=1e-13)


def test_laguerre_rule_matches_scipy():
    nodes, weights = fb.gauss_laguerre_rule(2.0, 20)
    ref_nodes, ref_weights = special.roots_genlaguerre(20, 2.0)
    np.testing.assert_allclose(nodes, ref_nodes, rtol=1e-11)
    np.testing.assert_allclose(weights, ref_weights, rtol=1e-9)


def test_block_structure():
    blocks = fb.resolve_blocks(100, 1.0, delta=0.97, rho_th=1.0)
    assert blocks.lengths == [42, 38, 18, 2]
    assert blocks.B == 4 and blocks.ports == 100
    assert fb.resolve_blocks(100, 0.0).lengths == [100]
    with pytest.raises(fb.DomainError):
        fb.resolve_blocks(1, 1.0)
    ev = fb.jakes_eigenvalues(30, 1.0)
    assert sum(ev) == pytest.approx(30.0)


def test_outage_and_gains():
    blocks = fb.resolve_blocks(100, 1.0)
    cfg = fb.SystemConfig(5, 2, fb.db_to_linear(-3.0), 100, 1.0)
    slow = fb.op_slow(cfg, blocks)
    fast = fb.op_fast(cfg, blocks)
    bound = fb.op_slow(cfg, blocks, fb.Method.ub)
    assert 0.0 < fast.value < slow.value <= bound.value < 1.0
    assert float(slow) == slow.value

    # Single port: regularized incomplete beta.
    g = 0.8
    assert fb.single_port_op(g, 2, 4.0) == pytest.approx(special.betainc(2.0, 4.0, g / (1.0 + g)), rel=1e-12)

    params = fb.fast_params([2, 2, 2, 2])
    assert params["U_tilde"] == 8
    assert params["m_tilde"] * params["U_hat"] == pytest.approx(8.0)

    p = slow.value
    assert fb.mux_gain(5, p) == pytest.approx(5 * (1 - p))
    # O-FAMA gain is E[min(K, U)] with K ~ Bin(M, 1 - p).
    k = np.arange(0, 41)
    want = np.sum(np.minimum(k, 5) * stats.binom.pmf(k, 40, 1 - p))
    assert fb.ofama_gain(5, 40, p) == pytest.approx(want, rel=1e-10)
    assert fb.ofama_gain_approx(5, 40, p) == pytest.approx(min(5.0, 40 * (1 - p)))


def test_monte_carlo_agrees_with_quadrature():
    blocks = fb.resolve_blocks(40, 1.0)
    cfg = fb.SystemConfig(4, 2, fb.db_to_linear(-3.0), 40, 1.0)
    mc = fb.estimate_op(cfg, blocks, trials=100000, seed=3)
    quad = fb.op_slow(cfg, blocks).value
    assert abs(mc.value - quad) <= 3 * math.sqrt(quad * (1 - quad) / 100000)
    again = fb.estimate_op(cfg, blocks, trials=100000, seed=3, threads=2)
    assert again.value == mc.value


def test_errors_surface_as_python_exceptions():
    cfg = fb.SystemConfig(1, 2, 1.0, 10, 1.0)
    with pytest.raises(fb.DomainError):
        fb.op_slow(cfg, fb.resolve_blocks(10, 1.0))
    with pytest.raises(fb.DomainError):
        fb.db_to_linear(float("nan"))
