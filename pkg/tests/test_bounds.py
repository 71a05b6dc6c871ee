import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from daqaoa.bounds import (
    BlockCensusEntry, BoundError, bound_report, census_from_schedule, census_from_timeline, closed_form_census,
    closed_form_first_norm, closed_form_second_norm, commutator_norms, delta_from_norms, delta_mu,
    fidelity_lower_bound,
)
from daqaoa.compiler import compile_schedule, x_gate_layers
from daqaoa.dynamics import build_timeline, steering_window
from daqaoa.problems import Problem, random_erdos_renyi
from daqaoa.resources import ResourceModel, build_resource
from oracles import dense_ising, x_sum

HOM = ResourceModel.homogeneous_model()


def test_delta_mu_edge_cases():
    assert delta_mu(6, 0, 1.0, 10) == 0.0
    assert delta_mu(6, 3, 0.0, 10) == 0.0
    with pytest.raises(BoundError):
        delta_mu(6, -1, 1.0, 1.0)
    # closed forms substituted into the generic expression
    n, s, t, a = 7, 2, 0.03, 40.0
    generic = delta_from_norms(t, a, closed_form_first_norm(n, s), closed_form_second_norm(n, s))
    assert delta_mu(n, s, t, a) == pytest.approx(generic, rel=1e-14)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_single_flip_norm_is_closed_form(n):
    for q in range(1, n + 1):
        first, second = commutator_norms(n, [q])
        assert first == pytest.approx(closed_form_first_norm(n, 1), abs=1e-8)
        assert second <= closed_form_second_norm(n, 1) + 1e-9


@given(st.integers(3, 7), st.data())
def test_second_norm_estimate_dominates(n, data):
    S = data.draw(st.sets(st.integers(1, n), min_size=1, max_size=n))
    assert commutator_norms(n, S)[1] <= closed_form_second_norm(n, len(S)) + 1e-9


def test_commutator_norms_guards():
    assert commutator_norms(5, []) == (0.0, 0.0)
    with pytest.raises(BoundError):
        commutator_norms(9, [1])


@pytest.mark.parametrize("S,alpha", [((2, 5), 100.0), ((1, 3, 4, 6), 30.0), ((1, 2, 3, 4, 5, 6), 10.0)])
def test_midpoint_split_error_below_delta(S, alpha):
    n = 6
    res = build_resource(HOM, n)
    HR = dense_ising(n, res.r)
    X = x_sum(n, S)
    t = steering_window(alpha)
    exact = expm(1j * t * (HR + alpha * X))
    half = expm(0.5j * t * HR)
    split = half @ expm(1j * t * alpha * X) @ half
    err = np.linalg.norm(exact - split, 2)
    assert err <= delta_from_norms(t, alpha, *commutator_norms(n, S))


def test_closed_form_census_counts():
    c = closed_form_census(6, 100.0, 0.4)
    assert sum(e.s == 4 for e in c) == 3
    assert sum(e.s == 2 for e in c) == 15 - 4
    assert c[-1].kind == "driver" and c[-1].s == 6 and c[-1].t == pytest.approx(0.004)


def test_census_from_schedule_matches_layers():
    H = Problem.maxcut(random_erdos_renyi(6, 0.7, 2)).hamiltonian()
    sched = compile_schedule(H, 1.0, build_resource(HOM, 6))
    census = census_from_schedule(sched, 50.0, 0.3)
    layers = x_gate_layers(sched).layers
    steer = [e for e in census if e.kind == "steering"]
    assert [e.s for e in steer] == [len(l) for l in layers]
    assert all(e.t == steering_window(50.0) for e in steer)
    assert sum(e.kind == "idle" for e in census) == len(sched.blocks)


def test_empty_census_bound_is_one():
    rep = fidelity_lower_bound([], 5, 100.0)
    assert rep.bound == 1.0 and rep.valid and rep.holds() is None


def test_bound_tends_to_one():
    sums = [fidelity_lower_bound(closed_form_census(8, a, 1.0), 8, a).sum_sq for a in (1e2, 1e3, 1e4, 1e5)]
    assert all(b < a for a, b in zip(sums, sums[1:]))
    slope = np.polyfit(np.log10([1e3, 1e4, 1e5]), np.log10(sums[1:]), 1)[0]
    # every delta scales as 1/alpha, so the squared sum falls as 1/alpha**2
    assert slope == pytest.approx(-2, abs=0.05)


def test_validity_flag():
    rep = fidelity_lower_bound(closed_form_census(8, 1.0, 1.0), 8, 1.0)
    assert not rep.valid
    assert fidelity_lower_bound(closed_form_census(8, 1e4, 1.0), 8, 1e4).valid


def test_inhomogeneous_uses_numeric_norms():
    res = build_resource(ResourceModel.power_law(3), 5)
    rep = fidelity_lower_bound([BlockCensusEntry(2, 0.01, "steering", (1, 2))], 5, 100.0, res)
    assert not rep.homogeneous and rep.notes
    assert rep.deltas[0] == pytest.approx(delta_from_norms(0.01, 100.0, *commutator_norms(5, (1, 2), res)))
    with pytest.raises(BoundError):
        fidelity_lower_bound([BlockCensusEntry(1, 0.01, "steering", (1,))], 9, 100.0, build_resource(ResourceModel.power_law(3), 9))


@pytest.mark.parametrize("n,alpha", [(5, 1e2), (6, 1e3), (7, 1e4)])
def test_measured_infidelity_below_sum(n, alpha):
    H = Problem.maxcut(random_erdos_renyi(n, 0.7, n)).hamiltonian()
    rep = bound_report(H, build_resource(HOM, n), alpha, [0.9], [0.5])
    assert rep.valid and rep.holds()
    d = rep.to_dict()
    assert d["bound"] == pytest.approx(1 - d["sum_delta_sq"]) and "measured_infidelity" in d


def test_census_from_timeline_kinds():
    H = Problem.maxcut(random_erdos_renyi(5, 0.7, 1)).hamiltonian()
    tl = build_timeline(H, build_resource(HOM, 5), 100.0, [1.0], [0.3])
    census = census_from_timeline(tl)
    assert len(census) == len(tl.segments)
    assert census[-1].kind == "driver" and census[-1].s == 5


def dense_double_commutators(n, S):
    HR = dense_ising(n, np.ones((n, n)) - np.eye(n))
    X = x_sum(n, S)
    C = HR @ X - X @ HR
    return np.linalg.norm(C @ X - X @ C, 2), np.linalg.norm(C @ HR - HR @ C, 2)


@pytest.mark.parametrize("n,S", [(3, (1,)), (5, (1, 2)), (5, (2, 4)), (6, (1, 3, 4, 6)), (7, (2, 5))])
def test_commutator_norms_match_kron_oracle(n, S):
    np.testing.assert_allclose(commutator_norms(n, S), dense_double_commutators(n, S), rtol=1e-10)


def test_first_norm_small_examples():
    assert commutator_norms(3, [1])[0] == pytest.approx(8.0, abs=1e-8)
    # two driven qubits sit above the closed form; the frozen value comes from the kron oracle
    assert commutator_norms(5, [1, 2])[0] == pytest.approx(dense_double_commutators(5, (1, 2))[0], rel=1e-12)
    assert commutator_norms(5, [1, 2])[0] > closed_form_first_norm(5, 2)


def test_delta_decays_inverse_alpha():
    alphas = np.logspace(2, 5, 7)
    for n, s in [(6, 2), (8, 4)]:
        d = [delta_mu(n, s, np.pi / a, a) for a in alphas]
        assert np.polyfit(np.log(alphas), np.log(d), 1)[0] == pytest.approx(-1, abs=0.05)


def test_census_of_reference_instance():
    from daqaoa.problems import regular_reference_graph
    H = Problem.maxcut(regular_reference_graph()).hamiltonian()
    res = build_resource(HOM, 8)
    census = census_from_schedule(compile_schedule(H, 1.0, res), 100.0, 0.5)
    assert {e.s for e in census if e.kind == "steering"} <= {2, 4}
    empty = census_from_schedule(compile_schedule(H, 0.0, res), 100.0, 0.5)
    assert [(e.kind, e.s, e.t) for e in empty] == [("driver", 8, 0.005)]
