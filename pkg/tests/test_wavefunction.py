"""
Tests for Gaussian wavefunction module
"""
import math
import numpy as np
import pytest
from scipy import integrate
from core.exceptions import DomainError, NodeError, PartitionError, PreconditionError, ValidationError
from physics.geometry import FourVector, SpacetimeEvent
from physics.wavefunction import (
    GaussianTerm, HitRecord, WaveState, apply_double_hit, apply_hit, bohm_momentum,
    brute_force_peaks, make_two_peak, peak_centers, peak_weight, peak_weights,
    sample, tail_shift_condition, two_peak_shift
)


@pytest.fixture
def two_peak():
    """Well separated two-peak state with weights 0.7 / 0.3"""
    return make_two_peak(math.sqrt(0.7), math.sqrt(0.3), alpha=1.0, z1=-5.0, z2=5.0)


def hit_at(z, beta=1.0, t=0.0):
    return HitRecord(SpacetimeEvent(t, z), beta)


def test_make_two_peak_normalized(two_peak):
    """Test two-peak state is normalized"""
    assert two_peak.norm_sq() == pytest.approx(1.0, rel=1e-12)
    z = np.linspace(-15.0, 15.0, 30001)
    numeric = integrate.trapezoid(np.abs(sample(two_peak, 0.0, z)) ** 2, z)
    assert numeric == pytest.approx(1.0, rel=1e-8)


def test_peak_weights(two_peak):
    """Test Born weights of separated peaks"""
    assert peak_weights(two_peak) == pytest.approx([0.7, 0.3], rel=1e-9)
    assert peak_weight(two_peak, 1) == pytest.approx(0.3, rel=1e-9)
    with pytest.raises(ValidationError):
        peak_weight(two_peak, 2)


def test_peak_weights_overlapping():
    """Test overlapping peaks raise PartitionError"""
    state = make_two_peak(1.0, 1.0, alpha=1.0, z1=-0.5, z2=0.5)
    with pytest.raises(PartitionError):
        peak_weights(state)


def test_peak_weights_sum_to_one_at_separation_bound():
    """Test weights sum to one when alpha times the squared separation is 25"""
    state = make_two_peak(1.0, 1.0, alpha=1.0, z1=-2.5, z2=2.5)
    weights = peak_weights(state)
    assert abs(sum(weights) - 1.0) < 1e-9
    assert weights == pytest.approx([0.5, 0.5], abs=1e-9)


def test_peak_weights_sum_to_one_after_hit():
    """Test weights of an unnormalized hit state still sum to one"""
    state = apply_hit(make_two_peak(0.8, 0.6, alpha=1.0, z1=-5.0, z2=5.0), hit_at(-5.0), renormalize=False)
    assert abs(sum(peak_weights(state)) - 1.0) < 1e-9


def test_single_peak_when_coefficient_zero():
    """Test zero coefficient drops the peak"""
    state = make_two_peak(1.0, 0.0, alpha=1.0, z1=-5.0, z2=5.0)
    assert peak_centers(state) == [-5.0]


def test_off_shell_term_rejected():
    """Test terms off the mass shell are rejected"""
    with pytest.raises(ValidationError):
        WaveState(terms=(GaussianTerm(1.0, 0.0, 1.0, energy=2.0, momentum=0.0),), mass=1.0)


def test_bohm_momentum_rest_frame(two_peak):
    """Test Bohm momentum of a state at rest is (m, 0) at a peak center"""
    p = bohm_momentum(two_peak, SpacetimeEvent(0.0, -5.0))
    assert p.t_component == pytest.approx(1.0, rel=1e-12)
    assert p.z_component == pytest.approx(0.0, abs=1e-9)


def test_bohm_momentum_moving_packet():
    """Test Bohm momentum of a moving packet at its center"""
    E = math.sqrt(1.0 + 0.75 ** 2)
    state = WaveState(terms=(GaussianTerm(1.0, 0.0, 1.0, energy=E, momentum=0.75),), mass=1.0)
    p = bohm_momentum(state, SpacetimeEvent(0.0, 0.0))
    assert (p.t_component, p.z_component) == pytest.approx((E, 0.75), rel=1e-12)


def test_bohm_momentum_at_node():
    """Test Bohm momentum at a node raises NodeError"""
    state = WaveState(terms=(GaussianTerm(1.0, -1.0, 1.0, energy=1.0),
                             GaussianTerm(-1.0, 1.0, 1.0, energy=1.0)))
    with pytest.raises(NodeError):
        bohm_momentum(state, SpacetimeEvent(0.0, 0.0))


def test_apply_hit_on_center_keeps_amplitude(two_peak):
    """Test hit at a peak center narrows it without moving or rescaling it"""
    hit = apply_hit(two_peak, hit_at(-5.0, beta=2.0), renormalize=False)
    first = hit.terms[0]
    assert first.center == -5.0
    assert first.width_coeff == pytest.approx(2.0)
    assert first.amplitude == two_peak.terms[0].amplitude


def test_apply_hit_kills_other_peak(two_peak):
    """Test hit on one peak suppresses the other"""
    hit = apply_hit(two_peak, hit_at(-5.0))
    assert hit.norm_sq() == pytest.approx(1.0, rel=1e-12)
    assert peak_weights(hit)[1] < 1e-6


def test_double_hit_order_independent(two_peak):
    """Test two spacelike hits give the same state in either order"""
    h1, h2 = hit_at(-5.0), hit_at(5.0)
    assert apply_double_hit(two_peak, h1, h2) == apply_double_hit(two_peak, h2, h1)


def test_double_hit_at_same_point_matches_single_strong_hit(two_peak):
    """Test two coincident hits equal one hit of double strength"""
    doubled = apply_double_hit(two_peak, hit_at(-5.0), hit_at(-5.0), renormalize=False)
    single = apply_hit(two_peak, hit_at(-5.0, beta=2.0), renormalize=False)
    for a, b in zip(doubled.terms, single.terms):
        assert a.center == pytest.approx(b.center)
        assert a.width_coeff == pytest.approx(b.width_coeff)
        assert abs(a.amplitude - b.amplitude) <= 1e-12 * abs(b.amplitude) + 1e-300


def test_double_hit_rejects_different_momenta(two_peak):
    """Test double hit with unequal momentum vectors raises PreconditionError"""
    moving = HitRecord(SpacetimeEvent(0.0, 5.0), 1.0, FourVector(2.0, 0.6))
    with pytest.raises(PreconditionError):
        apply_double_hit(two_peak, hit_at(-5.0), moving)


def test_single_hit_rejects_moving_momentum(two_peak):
    """Test a single hit with a spatial momentum component raises PreconditionError"""
    moving = HitRecord(SpacetimeEvent(0.0, -5.0), 1.0, FourVector(2.0, 0.6))
    with pytest.raises(PreconditionError):
        apply_hit(two_peak, moving)


def test_two_peak_shift_quarter_at_equal_strength():
    """Test peaks move a quarter of their separation when alpha == beta"""
    z1, z2 = two_peak_shift(1.0, 1.0, -10.0, 10.0)
    assert z1 == pytest.approx(-5.0, abs=1e-12)
    assert z2 == pytest.approx(5.0, abs=1e-12)


def test_two_peak_shift_rejects_nonpositive():
    """Test two_peak_shift domain"""
    with pytest.raises(DomainError):
        two_peak_shift(0.0, 1.0, -1.0, 1.0)


@pytest.mark.parametrize('alpha', [0.5, 1.0, 10.0, 100.0])
def test_two_peak_shift_matches_grid_maxima(alpha):
    """Test closed-form shift agrees with grid local maxima of |psi|"""
    beta = 1.0
    z1, z2 = -10.0, 10.0
    state = make_two_peak(1.0, 1.0, alpha, z1, z2)
    hit_state = apply_double_hit(state, hit_at(z1, beta), hit_at(z2, beta))
    spacing = 0.001
    z_grid = np.arange(-20.0, 20.0 + spacing, spacing)
    found = brute_force_peaks(hit_state, z_grid)
    expected = two_peak_shift(alpha, beta, z1, z2)
    assert len(found) == 2
    assert found[0] == pytest.approx(expected[0], abs=spacing)
    assert found[1] == pytest.approx(expected[1], abs=spacing)


def test_tail_shift_condition_boundary():
    """Test tail condition switches at exp(-alpha beta^2 s^2 / (4 (alpha+beta)^2)) = threshold"""
    alpha, beta, threshold = 1.0, 1.0, 1e-3
    boundary = math.sqrt(4 * (alpha + beta) ** 2 * math.log(1 / threshold) / (alpha * beta ** 2))
    assert not tail_shift_condition(alpha, beta, 0.99 * boundary, threshold)
    assert tail_shift_condition(alpha, beta, 1.01 * boundary, threshold)


def test_json_round_trip(two_peak):
    """Test wave state survives JSON serialization"""
    assert WaveState.from_json(two_peak.to_json()) == two_peak


def test_from_dict_malformed():
    """Test malformed document raises ValidationError"""
    with pytest.raises(ValidationError):
        WaveState.from_dict({'mass': 1.0})
