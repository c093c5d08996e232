import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlsblow.params import (
    PhysParams,
    condition_A2,
    critical_power,
    exponent_table,
    min_admissible_k,
    power_case,
    validate_assumptions,
)


def test_remark_benchmark_applies():
    rep = validate_assumptions(PhysParams(N=3, alpha=2.0, lam=1j))
    assert rep.theorem_applies
    assert not rep.strict_required


def test_critical_power_needs_strict_inequality():
    rep = validate_assumptions(PhysParams(N=3, alpha=4.0, lam=1j))
    assert rep.strict_required
    assert rep.strict_coeff_ok  # 6 * 1 > 4 * 1
    assert rep.theorem_applies


def test_alpha_one_boundary_excluded():
    rep = validate_assumptions(PhysParams(N=1, alpha=1.0, lam=1j))
    assert not rep.theorem_applies


def test_weak_coefficient_inequality_can_fail():
    # (alpha+2) Im = 2 vs alpha |lam| = 2 sqrt(1.25) ~ 2.236
    rep = validate_assumptions(PhysParams(N=4, alpha=2.0, lam=1 + 0.5j))
    assert not rep.weak_coeff_ok
    assert not rep.theorem_applies


def test_equality_case_fails_when_strict_required():
    # N=3, alpha=4 requires strict; pick lam with (alpha+2) Im = alpha |lam|
    lam = complex(math.sqrt(1.25), 1.0)
    assert math.isclose(6 * lam.imag, 4 * abs(lam))
    rep = validate_assumptions(PhysParams(N=3, alpha=4.0, lam=lam))
    assert rep.weak_coeff_ok and not rep.strict_coeff_ok
    assert not rep.theorem_applies
    assert any("strict" in msg for msg in rep.failures())


def test_rejects_bad_dimension():
    with pytest.raises(ValueError):
        PhysParams(N=6, alpha=2.0, lam=1j)
    with pytest.raises(ValueError):
        PhysParams(N=0, alpha=2.0, lam=1j)


def test_exponent_values_against_arithmetic():
    tab = exponent_table(PhysParams(N=3, alpha=2.0, lam=1j, k=40.0))
    assert tab.mu1 == pytest.approx(0.4875, abs=1e-15)
    assert tab.mu2 == pytest.approx(0.4875 * (2 - 1.5) - 0.5 - 1 / 40, abs=1e-15)
    assert tab.mu2 == pytest.approx(-0.28125, abs=1e-15)
    # limit k -> infinity: mu1 -> 1 - 1/alpha
    tab_big = exponent_table(PhysParams(N=3, alpha=2.0, lam=1j, k=1e12))
    assert tab_big.mu1 == pytest.approx(0.5, abs=1e-9)
    assert tab_big.profile_lp(2.0) == pytest.approx(-0.5, abs=1e-9)


def test_exponent_consistency_relations():
    tab = exponent_table(PhysParams(N=1, alpha=2.0, lam=1j, k=6.0))
    assert tab.mu5 == min(tab.mu2, tab.mu3, tab.mu4)
    assert tab.mu5 <= tab.mu2 and tab.mu5 <= tab.mu4
    assert tab.predicted_mu == min(tab.mu1, 0.5 * (tab.mu5 + 1))
    assert tab.profile_lap_l2 == pytest.approx(-0.75)
    assert tab.profile_gradlap_l2 == pytest.approx(-11 / 12)


def test_exponents_monotone_in_inverse_k():
    p2 = exponent_table(PhysParams(N=3, alpha=2.0, lam=1j, k=10.0))
    p1 = exponent_table(PhysParams(N=3, alpha=2.0, lam=1j, k=20.0))
    # every field moves monotonically toward its k = inf limit
    assert p1.mu1 > p2.mu1
    assert p1.mu4 > p2.mu4
    assert p1.profile_lp(2.0) < p2.profile_lp(2.0)
    assert p1.profile_grad_lp(2.0) < p2.profile_grad_lp(2.0)


def test_condition_A2():
    assert condition_A2(PhysParams(N=3, alpha=2.0, lam=1j))
    assert not condition_A2(PhysParams(N=3, alpha=5.0, lam=1j))  # boundary 5 = 5
    assert not condition_A2(PhysParams(N=5, alpha=7 / 3, lam=1j))  # boundary 7/3
    assert condition_A2(PhysParams(N=1, alpha=100.0, lam=1j))  # bound is +inf


def test_min_admissible_k_is_minimal_even():
    k = min_admissible_k(1, 2.0, (2.0,))
    assert k % 2 == 0
    tab = exponent_table(PhysParams(N=1, alpha=2.0, lam=1j, k=float(k)))
    assert 0 < tab.mu1 < 1 and tab.mu5 > -1 and 2.0 * k / 2.0 > 1
    # the previous even candidate must violate at least one predicate
    prev = exponent_table(PhysParams(N=1, alpha=2.0, lam=1j, k=float(k - 2)))
    assert not (
        0 < prev.mu1 < 1 and prev.mu5 > -1 and 2.0 * (k - 2) / 2.0 > 1
    )


def test_min_admissible_k_brute_force_scan():
    # independent oracle: first even k where all three predicates hold
    for N, alpha, p_list in ((1, 2.0, (2.0, 4.0)), (3, 2.0, (2.0, 4.0)), (1, 2.0, ())):
        def ok(k):
            t = exponent_table(PhysParams(N=N, alpha=alpha, lam=1j, k=float(k)))
            tails = all(q * k / alpha > N for q in p_list)
            return tails and 0 < t.mu1 < 1 and t.mu5 > -1

        expected = next(k for k in range(2, 513, 2) if ok(k))
        assert min_admissible_k(N, alpha, p_list) == expected


def test_min_admissible_k_failure():
    with pytest.raises(ValueError):
        min_admissible_k(1, 0.5, (), k_max=64)  # mu1 <= 0 for alpha < 1


def test_power_case_branches():
    assert power_case(1.5, 4) == "low"
    assert power_case(3.0, 3) == "low"  # overlap resolved toward low
    assert power_case(4.0, 3) == "high"
    assert power_case(10.0, 1) == "low"  # N/(N-2) means +inf for N <= 2
    with pytest.raises(ValueError):
        power_case(5.0, 3)
    with pytest.raises(ValueError):
        power_case(1.9, 5)  # gap between 5/3 and 2


@given(st.floats(min_value=1e-3, max_value=50.0))
def test_weak_inequality_always_holds_for_unit_imaginary(alpha):
    rep = validate_assumptions(PhysParams(N=1, alpha=alpha, lam=1j))
    assert rep.weak_coeff_ok  # (alpha + 2) > alpha


@settings(max_examples=60, deadline=None)
@given(
    N=st.integers(min_value=1, max_value=5),
    alpha_frac=st.floats(min_value=0.05, max_value=0.95),
    re=st.floats(min_value=-0.3, max_value=0.3),
)
def test_admissible_sweep_has_good_exponents(N, alpha_frac, re):
    """Randomized sweep: admissible parameters with minimal k give usable rates."""
    hi = min(critical_power(N), 8.0)
    alpha = 1.0 + alpha_frac * (hi - 1.0)
    lam = complex(re, 1.0)
    p = PhysParams(N=N, alpha=alpha, lam=lam)
    rep = validate_assumptions(p)
    if not rep.theorem_applies:
        return
    k = min_admissible_k(N, alpha, (2.0, alpha + 2.0))
    tab = exponent_table(PhysParams(N=N, alpha=alpha, lam=lam, k=float(k)))
    assert 0 < tab.mu1 < 1
    assert tab.mu5 > -1
    assert tab.predicted_mu > 0
