import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risuav.channel import (bs_ris_gain, cascaded_gain, coherent_magnitude, direct_gain,
                            optimal_phases, optimal_snr, rate, ris_mt_gain, slot_cost, snr)
from risuav.errors import DegenerateGeometryError
from risuav.geometry import aoa_cosine, aod_cosine, distance
from risuav.world import ChannelParams

CP = ChannelParams()


def cp(**kw):
    from dataclasses import replace
    return replace(CP, **kw)


def test_single_element_gain_is_real_path_loss():
    g = bs_ris_gain((0, 0, 0), (30, 0, 40), cp(m_elements=1))
    assert g.shape == (1,)
    assert g[0] == pytest.approx(math.sqrt(10.0 * 50.0 ** -2.5), rel=1e-14)
    assert g[0].imag == 0


def test_vertical_link_has_flat_phase():
    g = bs_ris_gain((0, 0, 0), (0, 0, 80), cp(m_elements=8))
    assert np.allclose(g, g[0], rtol=0, atol=0)


def test_half_wavelength_progression():
    # horizontal 3, vertical sqrt(27): cosine exactly 0.5
    g = bs_ris_gain((0, 0, 0), (3, 0, math.sqrt(27)), cp(m_elements=4))
    phases = np.angle(g / abs(g[0]))
    expected = np.angle(np.exp(-1j * np.array([0, math.pi / 2, math.pi, 3 * math.pi / 2])))
    assert np.allclose(np.exp(1j * phases), np.exp(1j * expected), atol=1e-12)


def test_ris_mt_gain_mirrors_bs_side():
    uav, mt = (0, 0, math.sqrt(27)), (3, 0, 0)
    g = ris_mt_gain(uav, mt, cp(m_elements=4))
    assert np.allclose(g, bs_ris_gain(mt, uav, cp(m_elements=4)), rtol=1e-14)
    assert np.allclose(ris_mt_gain((0, 0, 50), (0, 0, 0), cp(m_elements=3)),
                       ris_mt_gain((0, 0, 50), (0, 0, 0), cp(m_elements=3))[0])


def test_coincident_points_raise():
    with pytest.raises(DegenerateGeometryError):
        bs_ris_gain((1, 1, 1), (1, 1, 1), CP)
    with pytest.raises(DegenerateGeometryError):
        slot_cost((0, 0, 0), (0, 0, 0), (1, 0, 0))


def test_direct_gain_is_deterministic_per_seed():
    a = direct_gain((0, 0, 30), (100, 0, 0), CP, np.random.default_rng(7))
    b = direct_gain((0, 0, 30), (100, 0, 0), CP, np.random.default_rng(7))
    assert a == b


def test_direct_gain_unit_variance_scatter():
    rng = np.random.default_rng(11)
    bs, mt = (0, 0, 0), (1, 0, 0)  # unit distance: amplitude sqrt(rho)
    g = np.array([direct_gain(bs, mt, cp(rho_db=0.0), rng) for _ in range(100_000)])
    assert abs(np.mean(np.abs(g) ** 2) - 1.0) < 0.02


def test_direct_gain_path_loss_law():
    c = cp(gamma=2.0)
    near = np.array([direct_gain((0, 0, 0), (50, 0, 0), c, np.random.default_rng(3))
                     for _ in range(1)])
    # same seed stream at double distance: sample scales by exactly 1/2 in amplitude
    far = direct_gain((0, 0, 0), (100, 0, 0), c, np.random.default_rng(3))
    assert abs(far) ** 2 == pytest.approx(abs(near[0]) ** 2 / 4, rel=1e-12)


def test_optimal_phases_examples():
    assert np.allclose(optimal_phases(0.3, 0.3, cp(varpi=1.25)), 1.25, atol=0)
    ph = optimal_phases(0.75, 0.25, cp(m_elements=3, varpi=0.0))
    assert np.allclose(ph, [0, math.pi / 2, math.pi], atol=1e-12)
    assert np.all((ph >= 0) & (ph < 2 * math.pi))


def test_cascaded_single_element():
    g1, g2 = np.array([0.5 + 0.5j]), np.array([2 - 1j])
    assert cascaded_gain(g1, g2, np.array([0.0])) == pytest.approx((2 + 1j) * (0.5 + 0.5j))


def test_cascaded_length_mismatch():
    with pytest.raises(ValueError):
        cascaded_gain(np.ones(3), np.ones(2), np.zeros(3))


positions = st.tuples(st.floats(-500, 500), st.floats(-500, 500), st.floats(0, 200))


def _coherent(bs, uav, mt, c):
    g1, g2 = bs_ris_gain(bs, uav, c), ris_mt_gain(uav, mt, c)
    return cascaded_gain(g1, g2, optimal_phases(aoa_cosine(bs, uav), aod_cosine(uav, mt), c))


@settings(max_examples=200)
@given(positions, positions, positions, st.sampled_from([1, 4, 16, 64]),
       st.floats(0, 2 * math.pi, exclude_max=True), st.floats(2, 4))
def test_coherent_combining_identity(bs, uav, mt, m, varpi, gamma):
    if distance(bs, uav) < 1 or distance(uav, mt) < 1:
        return
    c = cp(m_elements=m, varpi=varpi, gamma=gamma)
    closed = m * c.rho / (distance(bs, uav) * distance(uav, mt)) ** (gamma / 2)
    got = abs(_coherent(bs, uav, mt, c))
    assert abs(got - closed) <= 1e-9 * closed
    assert coherent_magnitude(bs, uav, mt, c) == pytest.approx(closed, rel=1e-12)


@settings(max_examples=50)
@given(positions, positions, positions)
def test_magnitude_invariant_under_global_phase(bs, uav, mt):
    if distance(bs, uav) < 1 or distance(uav, mt) < 1:
        return
    a = _coherent(bs, uav, mt, cp(varpi=0.0))
    b = _coherent(bs, uav, mt, cp(varpi=2.0))
    assert abs(b) == pytest.approx(abs(a), rel=1e-12)
    assert cmath.phase(b / a) == pytest.approx(2.0, abs=1e-9)


def test_random_phases_never_beat_optimal():
    rng = np.random.default_rng(5)
    bs, uav, mt = (0, 0, 25), (80, 30, 70), (150, 10, 0)
    c = cp(m_elements=16)
    best = abs(_coherent(bs, uav, mt, c))
    g1, g2 = bs_ris_gain(bs, uav, c), ris_mt_gain(uav, mt, c)
    for _ in range(1000):
        assert abs(cascaded_gain(g1, g2, rng.uniform(0, 2 * math.pi, 16))) <= best * (1 + 1e-12)


def test_snr_examples():
    assert snr(0j, 0j, CP) == 0
    amp = math.sqrt(CP.noise_w / CP.p_bs_w)
    assert snr(0j, amp * cmath.exp(0.7j), CP) == pytest.approx(1.0, rel=1e-12)
    assert snr(1e-3 + 2e-3j, -(1e-3 + 2e-3j), CP) == 0


@given(st.complex_numbers(max_magnitude=1e-3), st.complex_numbers(max_magnitude=1e-3),
       st.floats(-10, 10))
def test_snr_invariant_under_common_rotation(d, c, theta):
    rot = cmath.exp(1j * theta)
    assert snr(d * rot, c * rot, CP) == pytest.approx(snr(d, c, CP), rel=1e-9, abs=1e-300)


def test_rate_examples():
    assert rate(0) == 0 and rate(1) == 1 and rate(3) == 2


@given(st.floats(0, 1e12), st.floats(0, 1e12))
def test_rate_monotone(a, b):
    if a < b:
        assert rate(a) <= rate(b)


def test_slot_cost_examples():
    assert slot_cost((0, 0, 0), (100, 0, 0), (200, 0, 0)) == 1e4
    bs, uav, mt = (1, 2, 3), (40, -7, 60), (90, 5, 0)
    assert slot_cost(tuple(4 * x for x in bs), tuple(4 * x for x in uav),
                     tuple(4 * x for x in mt)) == pytest.approx(16 * slot_cost(bs, uav, mt))


def test_slot_cost_argmin_agrees_with_grid():
    # UAV restricted to a small ball; brute-force grid locates the same minimiser
    bs, mt = (0.0, 0.0, 30.0), (200.0, 0.0, 0.0)
    center, r = np.array([100.0, 20.0, 60.0]), 15.0
    g = np.linspace(-r, r, 31)
    grid = [center + (x, y, z) for x in g for y in g for z in g if x * x + y * y + z * z <= r * r]
    costs = [np.linalg.norm(p - bs) * np.linalg.norm(mt - p) for p in grid]
    best = grid[int(np.argmin(costs))]
    assert slot_cost(bs, tuple(best), mt) == pytest.approx(min(costs), rel=1e-12)
    # the minimiser pulls towards the BS-terminal baseline
    assert best[2] < center[2] and best[1] < center[1]


def test_product_and_closed_form_orderings_agree():
    rng = np.random.default_rng(9)
    bs, mt = (0.0, 0.0, 25.0), (150.0, 40.0, 0.0)
    pts = [tuple(rng.uniform([0, -50, 35], [200, 100, 130])) for _ in range(200)]
    by_cost = sorted(range(200), key=lambda i: slot_cost(bs, pts[i], mt))
    by_gain = sorted(range(200), key=lambda i: -coherent_magnitude(bs, pts[i], mt, CP))
    assert by_cost == by_gain


def test_optimal_snr_closed_form():
    bs, uav, mt = (0, 0, 25), (80, 30, 70), (150, 10, 0)
    d1, d2 = distance(bs, uav), distance(uav, mt)
    expected = CP.p_bs_w * CP.m_elements ** 2 * CP.rho ** 2 * (d1 * d2) ** -CP.gamma / CP.noise_w
    assert optimal_snr(bs, uav, mt, CP) == pytest.approx(expected, rel=1e-12)
