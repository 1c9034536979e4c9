import numpy as np
import pytest

from fracgl import (ModelParams, build_drift_system, dirichlet_energy,
                    discrete_fractional_laplacian, discrete_inner_seminorm,
                    kernel_constant, kernel_row, solve_stationary_profile,
                    truncation_error_bound)


def oracle_kernel_constant(gamma, cutoff=10 ** 6):
    """Partial sum of 2 sum_{z>=1} z^-(1+gamma) plus integral tail bound,
    then reciprocal."""
    z = np.arange(1, cutoff + 1, dtype=float)
    partial = np.sum(z ** (-(1.0 + gamma)))
    tail = (cutoff + 0.5) ** (-gamma) / gamma
    return 1.0 / (2.0 * (partial + tail))


def test_kernel_constant_against_partial_sum_oracle():
    assert kernel_constant(1.5) == pytest.approx(oracle_kernel_constant(1.5), abs=1e-12)
    assert kernel_constant(1.9) == pytest.approx(oracle_kernel_constant(1.9), abs=1e-12)
    # frozen oracle values
    assert kernel_constant(1.5) == pytest.approx(0.37272064814438854, abs=1e-12)
    assert kernel_constant(1.9) == pytest.approx(0.40878598975918595, abs=1e-12)


def test_kernel_constant_domain():
    for bad in (1.0, 2.0, 0.5, 2.5):
        with pytest.raises(ValueError):
            kernel_constant(bad)


def test_kernel_normalization_monotone():
    gamma = 1.5
    c = kernel_constant(gamma)
    z = np.arange(1, 2001, dtype=float)
    partial = 2.0 * c * np.cumsum(z ** (-(1.0 + gamma)))
    assert np.all(np.diff(partial) > 0)
    assert partial[-1] < 1.0
    assert partial[-1] > 0.999


def test_kernel_row_symmetry():
    p = ModelParams(32, 1.7)
    row = kernel_row(p)
    assert row[0] == 0.0
    P = build_drift_system(p).kernel_matrix
    assert np.array_equal(P, P.T)


def test_drift_system_n3_hand_assembled():
    gamma = 1.5
    p1 = kernel_constant(gamma)
    sys = build_drift_system(ModelParams(3, gamma))
    expected = 3.0 ** gamma * np.array([[-(p1 + 1.0), p1], [p1, -(p1 + 1.0)]])
    np.testing.assert_allclose(sys.m, expected, rtol=1e-14)


def test_equilibrium_constant_profile_is_fixed_point():
    phi = 0.7
    p = ModelParams(24, 1.3, phi, phi)
    sys = build_drift_system(p)
    drift = sys.drift(np.full(p.n_sites, phi))
    assert np.max(np.abs(drift)) < 1e-9


def test_diffusion_matrix_is_minus_two_m():
    for n, gamma in ((8, 1.2), (16, 1.5), (24, 1.9)):
        sys = build_drift_system(ModelParams(n, gamma))
        a = sys.diffusion_matrix()
        np.testing.assert_allclose(a, -2.0 * sys.m, rtol=0, atol=1e-11 * np.abs(sys.m).max())


def test_boundary_noise_edges_present():
    p = ModelParams(8, 1.5)
    sys = build_drift_system(p)
    boundary = [e for e in sys.a_edges if e[0] == e[1]]
    assert boundary == [(1, 1, pytest.approx(2 * p.speed)),
                        (7, 7, pytest.approx(2 * p.speed))]


def test_drift_matrix_negative_definite():
    for n, gamma in ((8, 1.1), (32, 1.5), (64, 1.9)):
        sys = build_drift_system(ModelParams(n, gamma))
        eig = np.linalg.eigvalsh(sys.m)
        assert eig.max() < 0


def test_laplacian_constant_is_zero():
    p = ModelParams(20, 1.6)
    lap = discrete_fractional_laplacian(p, np.full(p.n_sites, 3.2))
    assert np.max(np.abs(lap)) < 1e-9


def test_laplacian_fast_path_matches_dense():
    rng = np.random.default_rng(7)
    for n in (8, 32, 128):
        p = ModelParams(n, 1.5)
        g = rng.standard_normal(p.n_sites)
        dense = discrete_fractional_laplacian(p, g, method="dense")
        fast = discrete_fractional_laplacian(p, g, method="fft")
        np.testing.assert_allclose(fast, dense, rtol=1e-10, atol=1e-10)


def test_laplacian_of_stationary_profile_hits_boundary_terms_only():
    p = ModelParams(32, 1.5, 1.0, 2.0)
    prof = solve_stationary_profile(p)
    lap = discrete_fractional_laplacian(p, prof.profile)
    expected = np.zeros(p.n_sites)
    expected[0] = -p.speed * (p.phi_l - prof.profile[0])
    expected[-1] = -p.speed * (p.phi_r - prof.profile[-1])
    np.testing.assert_allclose(lap, expected, atol=1e-9)


def test_laplacian_dimension_mismatch():
    p = ModelParams(16, 1.5)
    with pytest.raises(ValueError):
        discrete_fractional_laplacian(p, np.zeros(p.n_sites + 1))


def test_seminorm_constant_vanishes():
    p = ModelParams(16, 1.4)
    rng = np.random.default_rng(3)
    g = rng.standard_normal(p.n_sites)
    assert discrete_inner_seminorm(p, np.ones(p.n_sites), g) == pytest.approx(0.0, abs=1e-12)


def test_seminorm_bilinear_symmetric():
    p = ModelParams(16, 1.5)
    rng = np.random.default_rng(5)
    f, g, h = rng.standard_normal((3, p.n_sites))
    s_fg = discrete_inner_seminorm(p, f, g)
    assert s_fg == pytest.approx(discrete_inner_seminorm(p, g, f), rel=1e-12)
    combined = discrete_inner_seminorm(p, f, 2.0 * g + 3.0 * h)
    assert combined == pytest.approx(2.0 * s_fg + 3.0 * discrete_inner_seminorm(p, f, h),
                                     rel=1e-10)
    assert discrete_inner_seminorm(p, f, f) >= 0.0


@pytest.mark.parametrize("n", [8, 32, 128])
def test_discrete_green_identity(n):
    p = ModelParams(n, 1.5)
    rng = np.random.default_rng(n)
    for _ in range(3):
        f, g = rng.standard_normal((2, p.n_sites))
        lhs = float(g @ discrete_fractional_laplacian(p, f)) / p.n
        rhs = -discrete_inner_seminorm(p, f, g)
        assert lhs == pytest.approx(rhs, abs=1e-10 * max(1.0, abs(rhs)))


def test_kernel_truncation():
    p = ModelParams(32, 1.5)
    full = build_drift_system(p)
    trunc = build_drift_system(p, truncation=4)
    # dropped edges are exactly the ones beyond the radius
    assert len(trunc.a_edges) < len(full.a_edges)
    assert all(abs(y - x) <= 4 or x == y for x, y, _ in trunc.a_edges)
    # the dropped off-diagonal rate mass is within the reported bound
    diff = full.m - trunc.m
    off = diff - np.diag(np.diag(diff))
    assert off.sum(axis=1).max() <= truncation_error_bound(p, 4)
    with pytest.raises(ValueError):
        kernel_row(p, truncation=0)


def test_dirichlet_energy_is_drift_quadratic_form():
    p = ModelParams(24, 1.6)
    sys = build_drift_system(p)
    rng = np.random.default_rng(11)
    f = rng.standard_normal(p.n_sites)
    direct = float(f @ (-sys.m) @ f) / p.n
    assert dirichlet_energy(p, f) == pytest.approx(direct, rel=1e-12)
    # equals the bulk seminorm for fields vanishing at the end sites
    f[0] = f[-1] = 0.0
    assert dirichlet_energy(p, f) == pytest.approx(
        discrete_inner_seminorm(p, f, f), rel=1e-12)
