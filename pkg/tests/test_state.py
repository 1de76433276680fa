"""Property tests for the state container and measurement primitives."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zenosim.state import (
    ATOL,
    BLOCKED,
    PARTICLE_PM,
    PH_ONE_H,
    PHOTON_COMPUTATIONAL,
    QUDIT_POSITION,
    ClassicalRegister,
    StateVector,
    add_subsystem,
    apply_local,
    branch_all,
    fidelity,
    level_weight,
    measure,
    new_state,
    norm_deficit,
    norm_sq,
    particle,
    photon,
    prune_failures,
    reorder,
)

BASES = [PHOTON_COMPUTATIONAL, PARTICLE_PM, QUDIT_POSITION]


def _random_layout(rng):
    specs = []
    n = rng.integers(1, 4)
    for i in range(n):
        if rng.random() < 0.5:
            specs.append(photon(f"p{i}"))
        else:
            specs.append(particle(f"b{i}", positions=int(rng.integers(2, 4))))
    return specs


def _random_state(rng, layout, norm=1.0):
    dims = tuple(s.dim for s in layout)
    amps = rng.normal(size=dims) + 1j * rng.normal(size=dims)
    amps *= norm / np.linalg.norm(amps)
    return StateVector(tuple(layout), amps.astype(np.complex128))


def _haar_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_unitary_preserves_norm(seed):
    rng = np.random.default_rng(seed)
    layout = _random_layout(rng)
    state = _random_state(rng, layout)
    target = layout[int(rng.integers(0, len(layout)))]
    u = _haar_unitary(rng, target.dim)
    out = apply_local(state, [target.name], u)
    assert abs(norm_sq(out) - norm_sq(state)) < 1e-10


@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(0.1, 1.0))
@settings(max_examples=40, deadline=None)
def test_contraction_never_grows_norm(seed, scale):
    rng = np.random.default_rng(seed)
    layout = _random_layout(rng)
    state = _random_state(rng, layout)
    target = layout[int(rng.integers(0, len(layout)))]
    op = scale * _haar_unitary(rng, target.dim)
    out = apply_local(state, [target.name], op)
    assert norm_sq(out) <= norm_sq(state) + ATOL


def test_expansion_rejected():
    state = new_state([photon("p")], [0])
    with pytest.raises(ValueError):
        apply_local(state, ["p"], 1.5 * np.eye(4))


@given(seed=st.integers(0, 2**32 - 1), basis_index=st.integers(0, 2))
@settings(max_examples=60, deadline=None)
def test_branch_weights_complete(seed, basis_index):
    rng = np.random.default_rng(seed)
    layout = _random_layout(rng)
    state = _random_state(rng, layout, norm=float(rng.uniform(0.3, 1.0)))
    basis = BASES[basis_index]
    kind = "photon" if basis == PHOTON_COMPUTATIONAL else "particle"
    names = [s.name for s in layout if s.kind == kind]
    if basis == PARTICLE_PM:
        names = [s.name for s in layout
                 if s.kind == "particle" and s.positions() == 2]
    if not names:
        return
    target = names[int(rng.integers(0, len(names)))]
    branches = branch_all(state, target, basis)
    total = sum(w for _, _, w in branches)
    assert abs(total - norm_sq(state)) < 1e-10
    for _, post, _ in branches:
        assert abs(norm_sq(post) - 1.0) < 1e-10


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_disjoint_ops_commute(seed):
    rng = np.random.default_rng(seed)
    layout = [photon("a"), particle("b", positions=3), photon("c")]
    state = _random_state(rng, layout)
    ua = _haar_unitary(rng, 4)
    ub = _haar_unitary(rng, 4)
    one = apply_local(apply_local(state, ["a"], ua), ["b"], ub)
    two = apply_local(apply_local(state, ["b"], ub), ["a"], ua)
    assert np.abs(one.amps - two.amps).max() < 1e-12


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_measure_reproducible_and_consistent(seed):
    rng = np.random.default_rng(seed)
    layout = _random_layout(rng)
    state = _random_state(rng, layout)
    target = layout[0]
    basis = PHOTON_COMPUTATIONAL if target.kind == "photon" else QUDIT_POSITION
    out1 = measure(state, target.name, basis, np.random.default_rng(seed))
    out2 = measure(state, target.name, basis, np.random.default_rng(seed))
    assert out1[0] == out2[0]
    assert out1[2] == out2[2]
    enumerated = {o: w for o, _, w in branch_all(state, target.name, basis)}
    assert out1[0] in enumerated
    assert abs(enumerated[out1[0]] - out1[2]) < 1e-12


def test_rank_one_measurement_removes_subsystem():
    state = new_state([photon("p"), particle("b")], [PH_ONE_H, BLOCKED])
    branches = branch_all(state, "p", PHOTON_COMPUTATIONAL)
    assert len(branches) == 1
    outcome, post, w = branches[0]
    assert outcome == 1
    assert [s.name for s in post.layout] == ["b"]
    assert abs(w - 1.0) < 1e-12


def test_pooled_photon_failure_keeps_subsystem():
    layout = [photon("p")]
    amps = np.array([0, 0.6, 0.8, 0], dtype=np.complex128)
    state = StateVector(tuple(layout), amps)
    branches = branch_all(state, "p", PHOTON_COMPUTATIONAL)
    by_outcome = {o: (post, w) for o, post, w in branches}
    assert set(by_outcome) == {1, 2}
    post, w = by_outcome[2]
    assert [s.name for s in post.layout] == ["p"]
    assert abs(w - 0.64) < 1e-12
    assert level_weight(post, "p", 2) == pytest.approx(1.0)


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_reorder_roundtrip(seed):
    rng = np.random.default_rng(seed)
    layout = [photon("a"), particle("b"), photon("c")]
    state = _random_state(rng, layout)
    order = ["c", "a", "b"]
    back = reorder(reorder(state, order), ["a", "b", "c"])
    assert np.abs(back.amps - state.amps).max() < 1e-14


def test_prune_failures_idempotent_and_monotone():
    rng = np.random.default_rng(5)
    layout = [photon("p"), particle("b", positions=3)]
    state = _random_state(rng, layout)
    once = prune_failures(state)
    twice = prune_failures(once)
    assert norm_sq(once) <= norm_sq(state) + ATOL
    assert np.abs(twice.amps - once.amps).max() == 0.0
    assert abs(norm_deficit(once) - (1.0 - norm_sq(once))) < 1e-12


def test_add_subsystem_and_level_weight():
    state = new_state([photon("p")], [0])
    state = add_subsystem(state, particle("b"), 1)
    assert level_weight(state, "b", 1) == pytest.approx(1.0)
    vec = np.array([0.6, 0.8, 0.0], dtype=np.complex128)
    state = add_subsystem(state, particle("q"), vec)
    assert level_weight(state, "q", 0) == pytest.approx(0.36)
    with pytest.raises(ValueError):
        add_subsystem(state, particle("r"), np.array([1.0, 1.0, 0.0]))


def test_fidelity_contract():
    a = new_state([photon("p")], [0])
    b = new_state([photon("p")], [PH_ONE_H])
    assert fidelity(a, a) == pytest.approx(1.0)
    assert fidelity(a, b) == pytest.approx(0.0)
    sub = StateVector(a.layout, a.amps * 0.5)
    with pytest.raises(ValueError):
        fidelity(a, sub)
    with pytest.raises(ValueError):
        fidelity(a, new_state([photon("x")], [0]))


def test_classical_register():
    reg = ClassicalRegister()
    reg.set("m", 1)
    assert reg.get("m") == 1
    assert "m" in reg
    assert reg.as_dict() == {"m": 1}
    with pytest.raises(KeyError):
        reg.get("missing")


def test_norm_overflow_rejected():
    with pytest.raises(ValueError):
        StateVector((photon("p"),), np.array([1.0, 1.0, 0, 0], dtype=np.complex128))
    with pytest.raises(ValueError):
        StateVector((photon("p"),), np.array([np.nan, 0, 0, 0], dtype=np.complex128))
