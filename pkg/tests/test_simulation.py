import math
import warnings

import numpy as np
import pytest

from memsl_imaging.errors import DomainError, OrderOutOfRange, ProtocolMismatch, SmallPhaseViolation
from memsl_imaging.geometry import slepian_projection
from memsl_imaging.light import ProbeSource, Protocol
from memsl_imaging.objects import (
    LOBE_CENTERS,
    PhaseObject,
    check_small_phase,
    small_phase_peak,
    three_lobe_object,
)
from memsl_imaging.optimizer import optimize
from memsl_imaging.pswf import noise_kernel
from memsl_imaging.simulation import (
    SimulationMode,
    lobe_positions,
    lobes_match,
    mean_image_quadrature,
    pointwise_variance,
    reconstruct,
    simulate_measurement,
)

M, N = 8, 6


@pytest.fixture(scope="module")
def memsl():
    return optimize(Protocol.MEMSL, M, N).source(M)


@pytest.fixture(scope="module")
def coherent():
    return ProbeSource(Protocol.COHERENT, M, math.sqrt(N))


def test_mode_parsing():
    assert SimulationMode.parse("pointwise") is SimulationMode.POINTWISE
    assert SimulationMode.parse("coefficient") is SimulationMode.COEFFICIENT
    with pytest.raises(ValueError):
        SimulationMode.parse("exact")


def test_small_phase_check(memsl, basis):
    zero = check_small_phase(PhaseObject.zero(), memsl.r, basis)
    assert zero.ok and zero.margin == math.inf
    odd = check_small_phase(PhaseObject.from_function(lambda s: 0.5 * s), memsl.r, basis)
    assert odd.ok
    stand_in = check_small_phase(three_lobe_object(), memsl.r, basis)
    assert stand_in.ok and stand_in.margin == pytest.approx(3.25, abs=0.01)
    assert small_phase_peak(memsl.r, basis) == pytest.approx(0.04 * stand_in.margin / 2, rel=1e-9)


def test_violation_warns_but_runs(memsl, basis):
    with pytest.warns(SmallPhaseViolation):
        m = simulate_measurement(three_lobe_object(1.0), memsl, basis, 4, seed=1)
    assert m.small_phase_margin < 1


def test_stand_in_object_needs_seven_orders(basis):
    obj = three_lobe_object()
    grid = np.linspace(-1, 1, 801)
    p7 = slepian_projection(basis, obj, 7, grid).values
    p5 = slepian_projection(basis, obj, 5, grid).values
    assert lobes_match(lobe_positions(grid, p7), LOBE_CENTERS)
    assert not lobes_match(lobe_positions(grid, p5), LOBE_CENTERS)


def test_zero_phase_gives_zero_mean(memsl, system):
    img = mean_image_quadrature(PhaseObject.zero(), memsl, system)
    assert np.all(img.values == 0)


def test_noise_free_run_equals_the_mean_field(memsl, basis, system):
    obj = three_lobe_object()
    m = simulate_measurement(obj, memsl, basis, 3, seed=0, noise=False)
    ref = mean_image_quadrature(obj, memsl, system, m.grid)
    np.testing.assert_array_equal(m.mean, ref.values)
    assert np.all(m.var == 0)


def test_noise_free_reconstruction_is_the_projection(memsl, basis):
    obj = three_lobe_object()
    for mode in SimulationMode:
        m = simulate_measurement(obj, memsl, basis, 2, seed=0, mode=mode, noise=False)
        rec = reconstruct(m, basis, 7, memsl, obj)
        proj = slepian_projection(basis, obj, 7, rec.grid).values
        assert np.max(np.abs(rec.phi_hat - proj)) < 1e-8


def test_determinism_and_prefix_stability(memsl, basis):
    obj = three_lobe_object()
    a = simulate_measurement(obj, memsl, basis, 1500, seed=42)
    b = simulate_measurement(obj, memsl, basis, 1500, seed=42)
    np.testing.assert_array_equal(a.mean, b.mean)
    np.testing.assert_array_equal(a.coef_cov, b.coef_cov)
    c = simulate_measurement(obj, memsl, basis, 3000, seed=42)
    np.testing.assert_array_equal(a.samples, c.samples)  # early trials do not move
    d = simulate_measurement(obj, memsl, basis, 1500, seed=43)
    assert not np.array_equal(a.mean, d.mean)


def test_seed_is_required(memsl, basis):
    with pytest.raises(DomainError):
        simulate_measurement(PhaseObject.zero(), memsl, basis, 10, seed=None)
    with pytest.raises(DomainError):
        simulate_measurement(PhaseObject.zero(), memsl, basis, 0, seed=1)


def test_pointwise_variance_law(memsl, coherent, basis):
    kern = noise_kernel(basis, np.linspace(-1, 1, 21))
    v_m = pointwise_variance(memsl, kern).values
    v_c = pointwise_variance(coherent, kern).values
    np.testing.assert_allclose(v_m / v_c, 1 / 97, rtol=1e-12)
    np.testing.assert_allclose(v_c, kern.values / (4 * M), rtol=1e-12)
    with pytest.raises(ProtocolMismatch):
        pointwise_variance(ProbeSource(Protocol.INDEPENDENT_SQUEEZED, M, 1.0, 0.5), kern)


def test_memsl_sample_variance_follows_the_kernel(memsl, basis):
    m = simulate_measurement(PhaseObject.zero(), memsl, basis, 50000, seed=5)
    law = pointwise_variance(memsl, noise_kernel(basis, m.grid)).values
    np.testing.assert_allclose(m.var, law, rtol=0.03)


def test_paths_agree_pointwise(coherent, basis):
    obj = three_lobe_object()
    T = 20000
    coef = simulate_measurement(obj, coherent, basis, T, seed=9)
    pts = simulate_measurement(obj, coherent, basis, T, seed=9, mode="pointwise")
    se_var = coef.var * math.sqrt(2 / T)
    assert np.all(np.abs(coef.var - pts.var) < 5 * math.sqrt(2) * se_var)
    se_mean = np.sqrt(coef.var / T)
    assert np.all(np.abs(coef.mean - pts.mean) < 5 * math.sqrt(2) * se_mean)


def test_pointwise_mode_rejects_independent_squeezing(basis):
    src = optimize(Protocol.INDEPENDENT_SQUEEZED, M, N).source(M)
    with pytest.raises(ProtocolMismatch):
        simulate_measurement(PhaseObject.zero(), src, basis, 5, seed=1, mode="pointwise")
    m = simulate_measurement(PhaseObject.zero(), src, basis, 5, seed=1)
    assert m.protocol is Protocol.INDEPENDENT_SQUEEZED


def test_reconstruction_is_unbiased(memsl, basis):
    obj = three_lobe_object()
    T = 10000
    m = simulate_measurement(obj, memsl, basis, T, seed=21)
    rec = reconstruct(m, basis, 7, memsl, obj)
    se = (rec.ci_high - rec.ci_low) / (2 * 1.96)
    assert np.all(np.abs(rec.phi_hat - rec.phi_projection) <= 3 * se + 1e-12)


def _sigma(src, basis, Q, T=4000, seed=3):
    m = simulate_measurement(PhaseObject.zero(), src, basis, T, seed=seed)
    return reconstruct(m, basis, Q, src).sigma_empirical


def test_empirical_error_scaling(basis):
    s1 = _sigma(optimize(Protocol.MEMSL, M, N).source(M), basis, 5)
    s2 = _sigma(optimize(Protocol.MEMSL, M, 2 * N).source(M), basis, 5)
    assert s2 / s1 == pytest.approx(0.5, rel=0.10)
    c1 = _sigma(ProbeSource(Protocol.COHERENT, M, math.sqrt(N)), basis, 5)
    c4 = _sigma(ProbeSource(Protocol.COHERENT, M, math.sqrt(4 * N)), basis, 5)
    assert c4 / c1 == pytest.approx(0.5, rel=0.10)


def test_lossy_memsl_error(basis):
    src = optimize(Protocol.MEMSL, M, N, 0.7).source(M)
    rec = reconstruct(simulate_measurement(PhaseObject.zero(), src, basis, 4000, seed=8), basis, 5, src)
    assert rec.sigma_empirical == pytest.approx(rec.sigma_predicted, rel=0.10)


def test_single_trial_is_flagged(memsl, basis):
    m = simulate_measurement(three_lobe_object(), memsl, basis, 1, seed=2)
    rec = reconstruct(m, basis, 5, memsl, three_lobe_object())
    assert rec.low_confidence and rec.trials == 1
    assert np.all(np.isfinite(rec.phi_hat))


def test_reconstruction_guards(memsl, basis):
    m = simulate_measurement(PhaseObject.zero(), memsl, basis, 2, seed=2)
    with pytest.raises(OrderOutOfRange):
        reconstruct(m, basis, 40, memsl)
    dark = ProbeSource(Protocol.MEMSL, M, 0.0, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m0 = simulate_measurement(PhaseObject.zero(), dark, basis, 2, seed=2)
    with pytest.raises(DomainError):
        reconstruct(m0, basis, 3, dark)


def test_lobe_matching():
    assert lobes_match([-0.79, 0.0, 0.85], LOBE_CENTERS)
    assert not lobes_match([-0.79, 0.85], LOBE_CENTERS)
    assert not lobes_match([-0.79, 0.2, 0.85], LOBE_CENTERS)
