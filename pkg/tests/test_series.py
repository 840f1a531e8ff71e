"""
Tests for the collapse diagram series
"""
from fractions import Fraction
import math
import numpy as np
import pytest
from core.exceptions import DomainError, RegimeError, ValidationError
from collapse.models import CLOSED_SERIES, QUADRATURE, DiagramId
from collapse.series import (
    MAX_LAMBDA_T, SWEEP_COLUMNS, check_regime, diagram, diagram2, diagram_sums,
    expanded_coefficients, residual_slope, series_coefficients, series_sweep, total_probability,
    turning_point
)


def test_series_coefficients_reference():
    """Test coefficients at a2 = 0.7"""
    c0, c1, c2 = series_coefficients(0.7)
    assert c0 == pytest.approx(0.7)
    assert c1 == pytest.approx(0.084)
    assert c2 == pytest.approx(-0.17472)


@pytest.mark.parametrize('lambda_t, expected', [
    (0.1, 0.7066528),
    (0.05, 0.7037632),
])
def test_total_probability_reference(lambda_t, expected):
    """Test series total at a2 = 0.7"""
    assert total_probability(0.7, lambda_t) == pytest.approx(expected, abs=1e-12)


def test_total_probability_exact_with_fractions():
    """Test rational input stays rational"""
    p = total_probability(Fraction(7, 10), Fraction(1, 10))
    assert isinstance(p, Fraction)
    assert p == Fraction(7066528, 10000000)


@pytest.mark.parametrize('particle_count', [1, 2])
@pytest.mark.parametrize('a2', [Fraction(1, 5), Fraction(1, 2), Fraction(7, 10), Fraction(9, 10)])
def test_diagrams_expand_to_series(a2, particle_count):
    """Test summed truncated diagrams give the closed coefficients exactly"""
    assert expanded_coefficients(a2, particle_count) == series_coefficients(a2)


@pytest.mark.parametrize('a2', [0.0, 0.5, 1.0])
def test_born_rule_at_fixed_points(a2):
    """Test definite and balanced states are not shifted"""
    assert total_probability(a2, 0.2) == pytest.approx(a2, abs=1e-15)


@pytest.mark.parametrize('particle_count', [1, 2])
@pytest.mark.parametrize('a2', [Fraction(1, 10), Fraction(1, 5), Fraction(3, 10), Fraction(2, 5), Fraction(1, 2)])
@pytest.mark.parametrize('lambda_t', [Fraction(1, 100), Fraction(1, 20), Fraction(1, 5)])
def test_complementary_weights_sum_to_one(a2, lambda_t, particle_count):
    """Test P(a2) + P(1 - a2) = 1 exactly"""
    assert total_probability(a2, lambda_t, particle_count) + total_probability(1 - a2, lambda_t, particle_count) == 1


@pytest.mark.parametrize('a2', [0.15, 0.35, 0.45])
def test_complementary_weights_float(a2):
    """Test complementarity holds to round-off for float input"""
    total = total_probability(a2, 0.1) + total_probability(1.0 - a2, 0.1)
    assert total == pytest.approx(1.0, abs=1e-14)


def test_zero_delay_is_born_rule():
    """Test lambda T = 0 reproduces a2 in both modes"""
    assert total_probability(0.3, 0.0) == pytest.approx(0.3)
    assert total_probability(0.3, 0.0, mode=QUADRATURE) == pytest.approx(0.3)


def test_deviation_sign():
    """Test the larger peak gains probability"""
    assert total_probability(0.7, 0.1) > 0.7
    assert total_probability(0.3, 0.1) < 0.3


@pytest.mark.parametrize('particle_count', [1, 2])
def test_quadrature_close_to_series(particle_count):
    """Test full integrands agree with the expansion at small lambda T"""
    closed = total_probability(0.7, 0.05, particle_count)
    quad = total_probability(0.7, 0.05, particle_count, mode=QUADRATURE)
    assert abs(quad - closed) < 1e-3


@pytest.mark.parametrize('diagram_id', DiagramId.all(1) + DiagramId.all(2), ids=lambda d: d.label)
def test_residual_is_third_order(diagram_id):
    """Test truncated diagram matches its integrand through second order"""
    slope = residual_slope(diagram_id, 0.7, [0.005, 0.01, 0.02])
    assert 2.7 < slope < 3.3


def test_single_diagram_first_terms():
    """Test the no-hit diagram and the returning diagrams at first order"""
    no_hit = diagram(DiagramId(1, 'i'), Fraction(7, 10), Fraction(1, 10))
    assert no_hit.constant_part == Fraction(7, 10) * (1 - Fraction(3, 100) + Fraction(9, 20000))
    assert no_hit.p_coefficient == 0
    assert no_hit.mode == CLOSED_SERIES

    returning = diagram(DiagramId(1, 'ii'), 0.7, 0.0)
    assert returning.p_coefficient == 0
    assert returning.constant_part == 0


def test_diagram_sums_quadrature_mode():
    """Test quadrature sums give a small P-coefficient"""
    const, pcoef = diagram_sums(0.7, 0.1, mode=QUADRATURE)
    assert 0 < pcoef < 0.1
    assert const / (1 - pcoef) == pytest.approx(total_probability(0.7, 0.1, mode=QUADRATURE))


def test_diagram2_requires_two_particles():
    """Test diagram2 rejects single-particle diagrams"""
    assert diagram2(DiagramId(2, '2i'), 0.7, 0.1).constant_part > 0
    with pytest.raises(DomainError):
        diagram2(DiagramId(1, 'i'), 0.7, 0.1)


def test_unknown_diagram_label():
    """Test diagram ids are validated"""
    with pytest.raises(ValidationError):
        DiagramId(1, '2i')
    with pytest.raises(ValidationError):
        DiagramId(3, 'i')


@pytest.mark.parametrize('a2, lambda_t', [(-0.1, 0.1), (1.2, 0.1), (0.5, -0.01)])
def test_domain_errors(a2, lambda_t):
    """Test weights outside [0, 1] and negative delays are rejected"""
    with pytest.raises(DomainError):
        total_probability(a2, lambda_t)


def test_unknown_mode():
    """Test unknown evaluation mode"""
    with pytest.raises(DomainError):
        diagram(DiagramId(1, 'i'), 0.7, 0.1, mode='monte_carlo')


def test_regime_bound():
    """Test lambda T beyond the regime raises"""
    with pytest.raises(RegimeError):
        total_probability(0.7, 0.3)
    with pytest.raises(RegimeError):
        total_probability(0.7, 0.3, mode=QUADRATURE)
    # flat at a2 = 1/2, so only the lambda T cap applies
    assert total_probability(0.5, MAX_LAMBDA_T) == 0.5


@pytest.mark.parametrize('a2, expected', [
    (Fraction(7, 10), Fraction(25, 104)),
    (Fraction(9, 10), Fraction(25, 116)),
    (Fraction(3, 10), Fraction(25, 104)),
])
def test_turning_point(a2, expected):
    """Test the deviation peaks at 1 / (5 - 4 a2 (1 - a2))"""
    assert turning_point(a2) == expected
    c0, c1, c2 = series_coefficients(a2)
    assert c1 + 2 * c2 * expected == 0


@pytest.mark.parametrize('a2', [0.0, 0.5, 1.0])
def test_turning_point_flat_series(a2):
    """Test no turning point when P does not move"""
    assert turning_point(a2) is None


@pytest.mark.parametrize('a2', [0.7, 0.9])
def test_past_turning_point_out_of_regime(a2):
    """Test lambda T between the turning point and the cap raises"""
    peak = turning_point(a2)
    assert 0.2 <= peak < MAX_LAMBDA_T
    below = total_probability(a2, peak - 1e-6)
    assert below == pytest.approx(sum(c * (peak - 1e-6) ** k for k, c in enumerate(series_coefficients(a2))))
    with pytest.raises(RegimeError):
        total_probability(a2, peak + 1e-6)
    with pytest.raises(RegimeError):
        total_probability(a2, 0.28)


@pytest.mark.parametrize('a2', [0.6, 0.7, 0.8, 0.9])
def test_series_monotone_up_to_cap(a2):
    """Test in-regime series totals never decrease with lambda T up to the cap"""
    values = []
    for lambda_t in np.linspace(0.0, MAX_LAMBDA_T, 60):
        try:
            values.append(total_probability(a2, float(lambda_t)))
        except RegimeError:
            continue
    assert len(values) > 40
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_check_regime_p_coefficient():
    """Test a large summed P-coefficient is rejected"""
    check_regime(0.1, 0.49)
    with pytest.raises(RegimeError):
        check_regime(0.1, 0.5)
    with pytest.raises(RegimeError):
        check_regime(0.23, 0.1, a2=0.9)
    check_regime(0.23, 0.1)


def test_series_sweep_marks_out_of_regime():
    """Test sweep keeps out-of-regime cells as NaN"""
    frame = series_sweep([0.7], [0.05, 0.3])
    assert list(frame.columns) == SWEEP_COLUMNS
    assert len(frame) == 2
    first, second = frame.iloc[0], frame.iloc[1]
    assert first['P_series'] == pytest.approx(0.7037632)
    assert first['deviation_from_born'] == pytest.approx(0.0037632)
    assert abs(first['P_quadrature'] - first['P_series']) < 1e-3
    assert math.isnan(second['P_series'])
    assert math.isnan(second['P_quadrature'])


def test_series_sweep_empty_grid():
    """Test empty grids are rejected"""
    with pytest.raises(DomainError):
        series_sweep([], [0.1])


def test_pair_series_identical_to_single():
    """Test the two-particle series total equals the single-particle one bit for bit"""
    for lambda_t in (0.01, 0.02, 0.05, 0.1):
        assert total_probability(0.7, lambda_t, particle_count=2) == total_probability(0.7, lambda_t)
