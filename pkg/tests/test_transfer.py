import math

import numpy as np
import pytest

from tmwkb import (
    ChainOverflowError,
    ComplexMatrix2,
    ConfigError,
    ResonanceError,
    TurningPointError,
    chain_product,
    compute_tc_tm,
    discretize,
    exact_tc,
    make_constant,
    make_tabulated,
    step_matrix,
    tc_first_order,
)
from tmwkb.transfer import (
    _assemble,
    amplitudes,
    boundary_left,
    boundary_phases,
    boundary_right,
    chain_stack,
    step_matrices,
    wavenumbers,
)

from oracles import ode_tc

rng = np.random.default_rng(20240917)


def _random_barrier(n=200, seed=1):
    r = np.random.default_rng(seed)
    x = np.linspace(-2e-9, 2e-9, n)
    v = 3e-19 * r.uniform(-1, 1, n)
    v[:3] = v[-3:] = -5e-19
    return make_tabulated(list(zip(x, v)))


def _det(entries, logs):
    e = np.asarray(entries)
    return np.exp(2 * np.asarray(logs)) * (e[..., 0, 0] * e[..., 1, 1] - e[..., 0, 1] * e[..., 1, 0])


def test_wavenumber_branch():
    k = wavenumbers(-1e-19, np.array([-2e-19, 0.0, 1e-19]))
    assert k[0].imag == 0 and k[0].real > 0
    assert k[1].real == 0 and k[1].imag > 0
    assert k[2].imag > k[1].imag


def test_step_determinants_over_many_random_interfaces():
    pot = _random_barrier()
    g = discretize(pot, 0.0, 10_001)
    e, c = step_matrices(g)
    assert len(e) == 10_000
    expected = g.k[:-1] / g.k[1:]
    np.testing.assert_allclose(_det(e, c), expected, rtol=1e-13)
    assert np.any(g.k.imag > 0) and np.any(g.k.real > 0)


def test_step_matrix_enforces_continuity(sech2):
    # psi and psi' built from left and right coefficients agree at the interface
    g = discretize(sech2, -1e-19, 50)
    for l in (1, 17, 25, 49):
        M = step_matrix(g, l)
        ka, kb, x = g.k[l - 1], g.k[l], g.x_edges[l]
        ab = np.array([0.3 - 0.2j, 1.1 + 0.4j])
        cd = M.value() @ ab
        left = (ab[0] * np.exp(1j * ka * x) + ab[1] * np.exp(-1j * ka * x),
                1j * ka * (ab[0] * np.exp(1j * ka * x) - ab[1] * np.exp(-1j * ka * x)))
        right = (cd[0] * np.exp(1j * kb * x) + cd[1] * np.exp(-1j * kb * x),
                 1j * kb * (cd[0] * np.exp(1j * kb * x) - cd[1] * np.exp(-1j * kb * x)))
        assert right[0] == pytest.approx(left[0], rel=1e-12)
        assert right[1] == pytest.approx(left[1], rel=1e-12)


def test_step_matrix_indexing(parabola):
    g = discretize(parabola, 0.0, 20)
    e, c = step_matrices(g)
    m = step_matrix(g, 5)
    np.testing.assert_allclose(m.entries, e[4])
    assert m.scale_log == c[4]
    with pytest.raises(IndexError):
        step_matrix(g, 0)
    with pytest.raises(IndexError):
        step_matrix(g, 20)


def test_chain_determinant_telescopes(parabola):
    for E in (-2e-19, 0.0, 1.3e-19):
        g = discretize(parabola, E, 100_000)
        e, c = chain_stack(*step_matrices(g))
        assert complex(_det(e, c)) == pytest.approx(g.k1 / g.kN, rel=1e-8)


def test_identity_chain():
    eye = ComplexMatrix2.identity()
    M = chain_product([eye] * 7)
    np.testing.assert_array_equal(M.value(), np.eye(2))


def test_random_chain_matches_direct_product():
    mats = [ComplexMatrix2(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)), rng.uniform(-2, 2)) for _ in range(100)]
    direct = np.eye(2, dtype=complex)
    for m in mats:
        direct = m.value() @ direct
    M = chain_product(mats)
    scale = np.max(np.abs(direct))
    np.testing.assert_allclose(M.value() / scale, direct / scale, atol=1e-9)


def _scaled_unitary():
    q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return ComplexMatrix2(q, rng.uniform(-30, 30))


def test_random_chain_determinant_is_multiplicative():
    # scaled unitaries keep the product well conditioned, so its determinant is recoverable
    mats = [_scaled_unitary() for _ in range(100)]
    M = chain_product(mats)
    phase = np.prod([m.det_entries() for m in mats])
    assert M.log_abs_det() == pytest.approx(sum(m.log_abs_det() for m in mats), rel=1e-12)
    assert M.det_entries() / abs(M.det_entries()) == pytest.approx(phase / abs(phase), abs=1e-12)


def test_chain_order_is_right_to_left():
    a = ComplexMatrix2(np.array([[1, 1], [0, 1]], complex))
    b = ComplexMatrix2(np.array([[1, 0], [1, 1]], complex))
    np.testing.assert_allclose(chain_product([a, b]).value(), b.entries @ a.entries)


def test_chain_of_huge_matrices_stays_finite():
    mats = np.tile(np.array([[1e150, 0], [0, 1e-150]], complex), (64, 1, 1))
    e, c = chain_stack(mats, np.zeros(64))
    assert np.all(np.isfinite(e))
    assert c == pytest.approx(64 * 150 * math.log(10), rel=1e-12)


def test_chain_reports_overflow_index():
    mats = np.tile(np.eye(2, dtype=complex), (100, 1, 1))
    mats[37, 0, 1] = np.inf
    with pytest.raises(ChainOverflowError, match=r"segment index 37") as info:
        chain_stack(mats, np.zeros(100))
    assert info.value.index == 37


def test_chain_overflow_inside_product_points_near_source():
    mats = np.tile(np.eye(2, dtype=complex), (64, 1, 1))
    mats[40] = mats[41] = np.diag([1e300, 1.0])
    with pytest.raises(ChainOverflowError) as info:
        chain_stack(mats, np.zeros(64))
    assert 40 <= info.value.index <= 41


def test_chain_stack_input_checks():
    with pytest.raises(ValueError):
        chain_stack(np.zeros((0, 2, 2)), np.zeros(0))
    with pytest.raises(ValueError):
        chain_stack(np.zeros((3, 2, 2)), np.zeros(2))
    with pytest.raises(ValueError):
        chain_product([ComplexMatrix2.identity()])


@pytest.mark.parametrize("kind", ["pw", "wkb1", "wkb3"])
@pytest.mark.parametrize("n", [1, 10, 1000])
def test_constant_potential_transmits_fully(kind, n):
    for level, E in ((0.0, 1e-19), (-3e-19, -1e-19)):
        pot = make_constant(level, (-2e-9, 2e-9))
        assert compute_tc_tm(pot, E, n, kind).tc == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("E", [-2e-19, -1e-19, 0.0, 1e-19, 2e-19])
def test_flux_conservation(sech2, E):
    # |B0|^2 + T = 1 for both plane-wave and first-order WKB exterior waves
    g = discretize(sech2, E, 2000)
    interior = step_matrices(g)
    for kind in ("pw", "wkb1"):
        M = _assemble(boundary_left(g, kind), interior, boundary_right(g, kind))
        t = tc_first_order(M, g, kind).tc
        assert abs(amplitudes(M).B0) ** 2 + t == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("E", [-1e-19, 0.0, 1e-19])
@pytest.mark.parametrize("kind", ["pw", "wkb1"])
@pytest.mark.parametrize("name", ["parabola", "sech2"])
def test_tm_converges_to_direct_integration(request, name, kind, E):
    pot = request.getfixturevalue(name)
    ref = ode_tc(pot, E, "wkb" if kind == "wkb1" else "pw")
    assert compute_tc_tm(pot, E, 20_000, kind).tc == pytest.approx(ref, rel=1e-6)


@pytest.mark.parametrize("kind", ["pw", "wkb1"])
def test_reciprocity_for_mirrored_barrier(kind):
    pot = _random_barrier(seed=3)
    x = np.asarray(pot.x)
    mirrored = make_tabulated(list(zip(-x[::-1], np.asarray(pot.v)[::-1])))
    for E in (-1e-19, 2e-19):
        a = compute_tc_tm(pot, E, 4000, kind).tc
        b = compute_tc_tm(mirrored, E, 4000, kind).tc
        assert a == pytest.approx(b, rel=1e-9)


def test_third_order_reduces_to_first_order(parabola):
    for E in rng.uniform(-2e-19, 2e-19, 6):
        a = compute_tc_tm(parabola, E, 5000, "wkb3", first_order_phase=True).tc
        b = compute_tc_tm(parabola, E, 5000, "wkb1").tc
        assert a == pytest.approx(b, rel=1e-10)


def test_phase_reference_does_not_matter(sech2):
    for E in (1e-19, 2e-19):
        a = compute_tc_tm(sech2, E, 3000, "wkb3", phase_reference="left").tc
        b = compute_tc_tm(sech2, E, 3000, "wkb3", phase_reference="local").tc
        assert a == pytest.approx(b, rel=1e-12)


def test_left_reference_fails_through_turning_points(parabola):
    with pytest.raises(TurningPointError):
        boundary_phases(parabola, -1e-19, reference="left")
    assert compute_tc_tm(parabola, -1e-19, 1000, "wkb3").ok


def test_accuracy_ordering_single_energy(sech2):
    E = 1e-19
    ref = exact_tc(sech2, E)
    err = {k: abs(compute_tc_tm(sech2, E, 100_000, k).tc - ref) / ref for k in ("pw", "wkb1", "wkb3")}
    assert err["wkb3"] < err["wkb1"] < err["pw"]


def test_deep_tunneling_long_chain_is_finite(parabola):
    res = compute_tc_tm(parabola, -2e-19, 100_000, "wkb3")
    assert 0 < res.tc < 1e-3 and res.n_steps == 100_000 and res.method == "tm-wkb3"


def test_turning_point_at_boundary(parabola):
    with pytest.raises(TurningPointError):
        compute_tc_tm(parabola, -4e-18, 100, "pw")


def test_bad_arguments(parabola):
    with pytest.raises(ConfigError):
        compute_tc_tm(parabola, 0.0, 0, "pw")
    with pytest.raises(ConfigError):
        compute_tc_tm(parabola, 0.0, 10, "wkb2")
    g = discretize(parabola, 0.0, 10)
    with pytest.raises(ConfigError):
        tc_first_order(ComplexMatrix2.identity(), g, "wkb3")
    with pytest.raises(ConfigError):
        boundary_left(g, "wkb3")


def test_resonance_detected():
    M = ComplexMatrix2(np.array([[1, 0], [1, 0]], complex))
    with pytest.raises(ResonanceError):
        amplitudes(M)


def test_matrix_helpers():
    m = ComplexMatrix2(np.array([[2, 1], [1, 1]], complex), math.log(3.0))
    assert m.det() == pytest.approx(9.0)
    assert m.log_abs_det() == pytest.approx(math.log(9.0))
    assert (m.m11, m.m12, m.m21, m.m22) == (2, 1, 1, 1)
