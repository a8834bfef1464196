import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dicke_lqg.circuit import circuit_unitary, compile_circuit
from dicke_lqg.fock import TermBudgetExceeded, dicke_reference, mono_norm2
from dicke_lqg.sculpting import canonical_phase, fidelity_with_dicke
from dicke_lqg.simulation import (
    amplitude_by_permanent,
    canonical_amplitude,
    canonical_conditional_state,
    canonical_pattern,
    check_step,
    designed_patterns,
    evolve,
    evolve_factors,
    expanded_evolution,
    expanded_reference,
    feedforward_factor,
    find_feedforward,
    naive_permanent,
    numeric_optimal_splitting,
    optimal_splitting,
    permanent,
    restriction_filter,
    simulate_scheme,
    success_probability_closed_form,
)
from dicke_lqg.surd import Surd

STEP_SIZES = [(2, 1), (3, 1), (3, 2), (4, 2)]
ALL_NK = [(n, k) for n in range(2, 11) for k in range(1, n)]


# -- closed forms -------------------------------------------------------------------------

def test_four_two_closed_form():
    p = success_probability_closed_form(4, 2)
    assert p == Fraction(384, 113246208)
    assert f"{float(p):.2e}" == "3.39e-06"


def test_two_one_closed_form():
    assert success_probability_closed_form(2, 1) == Fraction(1, 128)


def test_k_equals_n_convention():
    # (n-k)^(n-k) = 0^0 = 1
    assert success_probability_closed_form(3, 3) == Fraction(
        math.factorial(3) ** 4, 2 ** 6 * 3 ** 8 * 4 ** 2)


@pytest.mark.parametrize("n, k", [(3, 0), (2, 3), (0, 0)])
def test_closed_form_invalid(n, k):
    with pytest.raises(ValueError):
        success_probability_closed_form(n, k)


def _p_mpmath(n, k):
    """Independent high-precision evaluation of the success-probability formula."""
    with mpmath.workdps(60):
        num = mpmath.binomial(n, k) * mpmath.factorial(k) ** 4 * mpmath.power(n - k, n - k)
        den = mpmath.power(2, 2 * n) * mpmath.power(n, n + 2 * k - 1) * mpmath.power(k + 1, n - 1)
        return num / den


@pytest.mark.parametrize("n, k", ALL_NK)
def test_closed_form_against_bignum(n, k):
    p = success_probability_closed_form(n, k)
    with mpmath.workdps(60):
        ref = _p_mpmath(n, k)
        assert abs(mpmath.mpf(p.numerator) / p.denominator - ref) < mpmath.mpf(10) ** -50 * ref


@pytest.mark.parametrize("n, k", ALL_NK)
def test_probability_amplitude_identity(n, k):
    amp = canonical_amplitude(n, k)
    lhs = amp * amp * feedforward_factor(n, k)
    assert lhs.is_rational()
    assert lhs.to_fraction() == success_probability_closed_form(n, k)


def test_amplitude_worked_value():
    a, b = Surd.coerce(Fraction(1, 2)), Surd.sqrt(Fraction(1, 2))
    # (k+1)^(n/2) = 3^2 here
    expected = Surd.sqrt(6) * 4 / (2 ** 6 * 16 * 9) * b ** 2 * a ** 2
    assert canonical_amplitude(4, 2, a, b) == expected
    assert (expected * expected * 192).to_fraction() == Fraction(384, 113246208)


def test_amplitude_float_inputs():
    a, b = optimal_splitting(4, 2, "float")
    exact = complex(canonical_amplitude(4, 2))
    assert abs(canonical_amplitude(4, 2, a, b) - exact.real) < 1e-18


def test_amplitude_k_equals_n():
    amp = canonical_amplitude(3, 3, Surd.sqrt(Fraction(1, 3)), Surd.coerce(0))
    assert amp == canonical_amplitude(3, 3)


@pytest.mark.parametrize("n, k, a, b", [(4, 2, Fraction(1, 4), Fraction(1, 2)), (2, 1, Fraction(1, 2), Fraction(1, 2))])
def test_optimal_splitting_values(n, k, a, b):
    alpha, beta = optimal_splitting(n, k)
    assert alpha * alpha == a and beta * beta == b


@pytest.mark.parametrize("n, k", ALL_NK)
def test_numeric_optimum(n, k):
    a, b = numeric_optimal_splitting(n, k)
    assert abs(a - math.sqrt(1 / n)) < 1e-6
    assert abs(b - math.sqrt((n - k) / n)) < 1e-6


@settings(max_examples=200)
@given(st.integers(2, 10).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n - 1))),
       st.floats(0.01, 0.99))
def test_optimum_dominates(nk, beta):
    from dicke_lqg.simulation import splitting_objective
    n, k = nk
    best = splitting_objective(n, k, math.sqrt((n - k) / n))
    assert splitting_objective(n, k, beta) <= best + 1e-15


# -- permanents ----------------------------------------------------------------------------

def test_permanent_identity():
    assert permanent(np.eye(4)) == 1


def test_permanent_two_by_two():
    a, b, c, d = 2, 3j, -1, 0.5
    assert abs(permanent([[a, b], [c, d]]) - (a * d + b * c)) < 1e-15


def test_permanent_empty_and_guards():
    assert permanent(np.zeros((0, 0))) == 1
    with pytest.raises(ValueError):
        permanent(np.ones((2, 3)))
    with pytest.raises(ValueError):
        permanent(np.ones((25, 25)))


@pytest.mark.parametrize("d", range(1, 8))
def test_ryser_matches_naive(d):
    rng = np.random.default_rng(d)
    for _ in range(5):
        m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        assert abs(permanent(m) - naive_permanent(m)) < 1e-10


def test_single_photon_amplitude():
    rng = np.random.default_rng(3)
    U = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    assert abs(amplitude_by_permanent(U, [0, 1, 0, 0], [0, 0, 0, 1]) - U[3, 1]) < 1e-15


def test_hong_ou_mandel():
    bs = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    assert abs(amplitude_by_permanent(bs, [1, 1], [1, 1])) < 1e-15
    assert abs(abs(amplitude_by_permanent(bs, [1, 1], [2, 0])) ** 2 - 0.5) < 1e-15


def test_photon_number_mismatch():
    with pytest.raises(ValueError):
        amplitude_by_permanent(np.eye(2), [1, 0], [1, 1])


@pytest.mark.parametrize("nk", [(2, 1), (3, 1)])
def test_permanent_oracle_on_accepted_patterns(nk):
    c = compile_circuit(*nk)
    U = np.array(circuit_unitary(c), dtype=complex)
    occ_in = [int(m in c.inputs) for m in range(c.num_modes)]
    state = evolve(c, keep=restriction_filter(c, "groups"))
    designed = set(designed_patterns(c))
    det = set(c.detectors)
    checked = 0
    for mono, coeff in state.terms.items():
        if tuple((m, e) for m, e in mono if m in det) not in designed:
            continue
        amp = amplitude_by_permanent(U, occ_in, dict(mono))
        assert abs(amp - complex(coeff) * math.sqrt(mono_norm2(mono))) < 1e-10
        checked += 1
    assert checked >= feedforward_factor(*nk)


def test_permanent_oracle_on_bunched_terms():
    c = compile_circuit(2, 1)
    U = np.array(circuit_unitary(c), dtype=complex)
    occ_in = [int(m in c.inputs) for m in range(c.num_modes)]
    bunched = [(m, co) for m, co in evolve(c).terms.items() if any(e > 1 for _, e in m)]
    assert bunched
    for mono, coeff in bunched[:200]:
        amp = amplitude_by_permanent(U, occ_in, dict(mono))
        assert abs(amp - complex(coeff) * math.sqrt(mono_norm2(mono))) < 1e-10


# -- intermediate steps ------------------------------------------------------------------------

@pytest.mark.parametrize("nk", STEP_SIZES)
@pytest.mark.parametrize("step", [2, 3, 4, 5])
def test_step_state(nk, step):
    c = compile_circuit(*nk)
    res = check_step(c, step)
    assert res.mismatched_groups == []
    assert res.prefactor == res.expected_prefactor
    assert res.passed


@pytest.mark.parametrize("step", [2, 3, 4, 5])
def test_step_state_fully_expanded_two_one(step):
    c = compile_circuit(2, 1)
    assert expanded_evolution(c, step) == expanded_reference(c, step)


def test_step_check_float_backend():
    c = compile_circuit(3, 1, backend="float")
    assert all(check_step(c, s).passed for s in (2, 3, 4, 5))


def test_step_check_detects_wrong_splitting():
    # a circuit compiled with non-optimal amplitudes still matches its own
    # references, but not the references of a different splitting
    good = compile_circuit(3, 1)
    other = compile_circuit(3, 1, Surd.sqrt(Fraction(1, 4)), Surd.sqrt(Fraction(3, 4)))
    res = check_step(good, 2, evolve_factors(other, 2))
    assert not res.passed


# -- heralding ------------------------------------------------------------------------------------

def test_two_one_report(sim_2_1):
    rep = sim_2_1
    assert rep.p_success_exact_match
    assert rep.p_success_simulated == Fraction(1, 128)
    assert rep.accepted_pattern_count == 16 == rep.feedforward_factor
    assert rep.circuit_fidelity == 1


def test_three_one_report(sim_3_1):
    rep = sim_3_1
    assert rep.p_success_simulated == Fraction(1, 1728) == rep.p_success_closed_form
    assert rep.count_matches_feedforward
    assert all(o.fidelity == 1 for o in rep.outcomes if o.accepted)


def test_three_two_float():
    rep = simulate_scheme(3, 2, backend="float")
    assert rep.p_success_relative_error < 1e-10
    assert rep.count_matches_feedforward
    assert all(abs(o.fidelity - 1) < 1e-10 for o in rep.outcomes if o.accepted)


def test_completeness_two_one():
    rep = simulate_scheme(2, 1, restriction="none")
    assert rep.p_total == 1
    assert rep.p_success_simulated == Fraction(1, 128)


def test_bunched_patterns_rejected():
    rep = simulate_scheme(2, 1, restriction="none", correct="all")
    bunched = [o for o in rep.outcomes if any(e > 1 for _, e in o.pattern)]
    assert bunched
    assert not any(o.accepted for o in bunched)
    assert any(complex(o.total_probability).real > 0 for o in bunched)


def test_correctable_superset(sim_2_1):
    rep = simulate_scheme(2, 1, correct="all")
    # outside the designed set some patterns are also locally correctable;
    # they are reported but not counted
    assert rep.correctable_pattern_count == 32
    assert rep.p_correctable_total == Fraction(1, 64)
    assert rep.p_success_simulated == sim_2_1.p_success_simulated


@pytest.mark.parametrize("nk", [(2, 1), (3, 1), (3, 2)])
def test_canonical_pattern_state(nk):
    n, k = nk
    cond = canonical_conditional_state(n, k)
    assert fidelity_with_dicke(cond, n, k) == 1
    ref = dicke_reference(n, k, "dual-rail")
    fixed = canonical_phase(cond, n, k)
    ratio = {fixed.terms[m] / ref.terms[m] for m in ref.terms}
    assert len(ratio) == 1
    amp2 = sum((v.abs2() for v in cond.terms.values()), Surd())
    assert amp2 == canonical_amplitude(n, k) ** 2


def test_canonical_pattern_is_designed():
    c = compile_circuit(3, 1)
    assert canonical_pattern(c) in designed_patterns(c)
    assert len(designed_patterns(c)) == feedforward_factor(3, 1)


def test_feedforward_rejects_unequal_magnitudes():
    bits = {(1, 0): Surd.coerce(1), (0, 1): Surd.coerce(2)}
    assert find_feedforward(bits, 2, 1) is None


def test_feedforward_finds_swap_and_phase():
    bits = {(0, 0): Surd.coerce(1), (1, 1): Surd.gaussian(0, 1)}
    ff = find_feedforward(bits, 2, 1)
    assert ff is not None
    assert sum(ff.swaps) == 1


def test_budget_guard():
    with pytest.raises(TermBudgetExceeded):
        simulate_scheme(3, 1, budget=50)


def test_unknown_restriction():
    with pytest.raises(ValueError):
        simulate_scheme(2, 1, restriction="some")


def test_report_json_and_csv(sim_2_1):
    doc = sim_2_1.to_json()
    assert doc["schema_version"] == 1
    assert doc["p_success_simulated_exact"] == "1/128"
    assert doc["count_matches_feedforward"] is True
    csv_text = sim_2_1.patterns_csv()
    assert csv_text.splitlines()[0] == "pattern,weight,total_probability,designed,accepted,correctable,fidelity"
    assert sum(line.split(",")[4] == "1" for line in csv_text.splitlines()[1:]) == 16
