"""Randomized benchmarking: group algebra against an independent route.

The oracle rebuilds every gate from matrix exponentials and predicts
survival from the channel algebra in closed form, so these tests fail if
either the hard-coded table or the density-matrix evolution drifts.
"""

import numpy as np
import pytest

import oracles
from maglab.benchmarking import (
    N_C,
    RBSequence,
    clifford_table,
    equal_up_to_phase,
    find_element,
    mean_native_gate_count,
    native_fidelity_to_p_dep,
    rb_fit,
    rb_generate,
    rb_simulate,
    rb_survival_probability,
)


@pytest.fixture(scope="module")
def table():
    return clifford_table()


@pytest.fixture(scope="module")
def oracle_unitaries(table):
    return [oracles.compose(e.sequence) for e in table]


def test_table_has_24_distinct_elements(table, oracle_unitaries):
    assert len(table) == 24
    assert len({e.label for e in table}) == 24
    for i in range(24):
        for j in range(i + 1, 24):
            assert not oracles.same_up_to_phase(oracle_unitaries[i], oracle_unitaries[j])


def test_unitaries_match_exponential_route(table, oracle_unitaries):
    for e, u in zip(table, oracle_unitaries):
        assert oracles.same_up_to_phase(e.unitary, u, tol=1e-12)


def test_identity_element_is_empty(table):
    assert table[0].sequence == ()
    assert np.allclose(table[0].unitary, np.eye(2))


def test_closure_under_multiplication(table, oracle_unitaries):
    """All 576 pairwise products stay inside the 24-element set."""
    for i in range(24):
        for j in range(24):
            prod = oracle_unitaries[j] @ oracle_unitaries[i]
            members = [k for k in range(24)
                       if oracles.same_up_to_phase(prod, oracle_unitaries[k])]
            assert len(members) == 1
            # the implementation's lookup agrees with the oracle's
            impl = find_element(table[j].unitary @ table[i].unitary)
            assert impl == members[0]


def test_inverses_exist_in_table(table, oracle_unitaries):
    for i, u in enumerate(oracle_unitaries):
        inv = u.conj().T
        assert any(oracles.same_up_to_phase(inv, v) for v in oracle_unitaries)
        assert find_element(table[i].unitary.conj().T) >= 0


def test_mean_native_gate_count(table):
    counted = [e.n_gates for e in table if e.n_gates > 0]
    assert mean_native_gate_count() == round(sum(counted) / len(counted), 3)
    assert mean_native_gate_count() == N_C == 3.217


def test_rb_generate_recovery_closes_sequence(rng):
    for n in (1, 2, 7, 31):
        seq = rb_generate(rng, n)
        assert seq.n_clifford == n
        u = oracles.compose(seq.native_gates())
        assert oracles.same_up_to_phase(u, np.eye(2))


def test_rb_generate_deterministic():
    a = rb_generate(123, 16)
    b = rb_generate(123, 16)
    assert a == b
    with pytest.raises(ValueError):
        rb_generate(123, 0)


def test_survival_probability_matches_channel_algebra(rng):
    worst = 0.0
    for _ in range(30):
        seq = rb_generate(rng, int(rng.integers(1, 40)))
        p = float(rng.uniform(0.0, 0.05))
        impl = rb_survival_probability(seq, p)
        ref = oracles.survival_direct(seq.native_gates(), p)
        worst = max(worst, abs(impl - ref))
    assert worst < 1e-12


def test_survival_limits(rng):
    seq = rb_generate(rng, 10)
    assert rb_survival_probability(seq, 0.0) == pytest.approx(1.0)
    deep = rb_survival_probability(seq, 0.5)
    assert 0.5 <= deep < 0.6
    with pytest.raises(ValueError):
        rb_survival_probability(seq, 1.5)


def test_rb_simulate_expectation_and_sampling(rng):
    seq = rb_generate(rng, 8)
    p_dep = 4.0e-4
    s = rb_survival_probability(seq, p_dep)
    exact = rb_simulate(seq, p_dep, shots=1000, visibility=0.7, baseline=0.15)
    assert exact == int(round((0.15 + 0.7 * s) * 1000))
    sampled = rb_simulate(seq, p_dep, shots=1000, visibility=0.7, baseline=0.15, rng=rng)
    assert 0 <= sampled <= 1000


def test_native_fidelity_conversion():
    assert native_fidelity_to_p_dep(1.0) == 0.0
    assert native_fidelity_to_p_dep(0.99980) == pytest.approx(4.0e-4)
    with pytest.raises(ValueError):
        native_fidelity_to_p_dep(0.4)


def test_rb_fit_recovers_depolarization(table, rng):
    """Sequence-averaged decay matches E[(1-p)^gates] per Clifford."""
    p_dep = native_fidelity_to_p_dep(0.99980)
    vis, base = 0.7, 0.15
    lengths = list(range(1, 129, 3))
    means, sigmas = [], []
    for n in lengths:
        vals = []
        for _ in range(20):
            seq = rb_generate(rng, n)
            vals.append(base + vis * rb_survival_probability(seq, p_dep))
        means.append(float(np.mean(vals)))
        sigmas.append(max(float(np.std(vals)) / np.sqrt(len(vals)), 1e-6))
    fit = rb_fit(lengths, means, sigma=sigmas, baseline=base + vis / 2.0)
    assert fit.converged
    alpha_ref = oracles.per_clifford_decay([e.n_gates for e in table], p_dep)
    assert fit.params["alpha"] == pytest.approx(alpha_ref, abs=2e-4)
    # fidelity algebra is exact given alpha
    alpha = fit.params["alpha"]
    assert fit.params["f_clifford"] == pytest.approx(1.0 - (1.0 - alpha) / 2.0, rel=1e-12)
    assert fit.params["f_native"] == pytest.approx(
        1.0 - (1.0 - fit.params["f_clifford"]) / N_C, rel=1e-12)


def test_rb_fit_flags_unphysical_alpha():
    lengths = [1, 10, 20, 40, 80]
    rising = [0.5, 0.55, 0.6, 0.7, 0.9]
    fit = rb_fit(lengths, rising)
    assert not fit.converged
    assert fit.meta.get("unphysical_alpha") is True
    assert fit.params["alpha"] > 1.0


def test_rb_fit_alpha_one_gives_unit_fidelities():
    # constant decay above a pinned asymptote forces alpha = 1 exactly
    lengths = [1, 11, 31, 71, 127]
    flat = [0.85] * len(lengths)
    fit = rb_fit(lengths, flat, baseline=0.575)
    assert fit.converged
    assert fit.params["alpha"] == pytest.approx(1.0, abs=1e-9)
    assert fit.params["f_clifford"] == pytest.approx(1.0, abs=1e-9)
    assert fit.params["f_native"] == pytest.approx(1.0, abs=1e-9)


def test_rb_sequence_native_gates_concatenation(table):
    seq = RBSequence((1, 4), find_element(
        (table[4].unitary @ table[1].unitary).conj().T))
    gates = seq.native_gates()
    expect = table[1].sequence + table[4].sequence + table[seq.recovery_index].sequence
    assert gates == expect
