"""Tensor-product state vectors over photon and particle subsystems.

A photon carries four levels: the logical-0 mode, the logical-1 mode split
into horizontal and vertical polarization, and a sink level that collects
absorbed or lost amplitude.  A particle with d positions carries d+1 levels,
the last being the exploded level.  States may be sub-normalized: the norm
deficit 1 - sum|amp|^2 is the probability weight of failure events that were
pruned from the vector.

Amplitudes are stored dense, C-ordered, with the first subsystem in the
layout varying slowest.  All success probabilities reported by measurement
are pre-renormalization branch weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ATOL = 1e-12
BRANCH_CUTOFF = 1e-15

# photon levels
PH_ZERO = 0
PH_ONE_H = 1
PH_ONE_V = 2
PH_SINK = 3
PHOTON_DIM = 4

# particle positions (d = 2)
BLOCKED = 0
OPEN = 1

# measurement bases
PHOTON_COMPUTATIONAL = "photon_computational"
PARTICLE_PM = "particle_pm"
PARTICLE_COMPUTATIONAL = "particle_computational"
QUDIT_POSITION = "qudit_position"

# particle_pm outcomes
PM_PLUS = 0
PM_MINUS = 1
PM_EXPLODED = 2

# photon_computational pooled failure outcome (|1V> and sink together)
PHOTON_FAIL = 2


class ClassicalRegister:
    """Named measurement outcomes: bits (0/1) and qudit results (integers).

    Reading a name that was never written is an error; this catches
    corrections wired to a measurement that never ran.
    """

    def __init__(self):
        self._values: dict[str, int] = {}

    def set(self, name: str, value: int) -> None:
        self._values[name] = int(value)

    def get(self, name: str) -> int:
        if name not in self._values:
            raise KeyError(f"classical value {name!r} was never written")
        return self._values[name]

    def as_dict(self) -> dict[str, int]:
        return dict(self._values)

    def __contains__(self, name: str) -> bool:
        return name in self._values


@dataclass(frozen=True)
class SubsystemSpec:
    name: str
    kind: str  # "photon" or "particle"
    dim: int

    def positions(self) -> int:
        """Number of particle position levels (excludes the exploded level)."""
        if self.kind != "particle":
            raise ValueError(f"{self.name} is not a particle")
        return self.dim - 1

    def exploded_level(self) -> int:
        if self.kind != "particle":
            raise ValueError(f"{self.name} is not a particle")
        return self.dim - 1


def photon(name: str) -> SubsystemSpec:
    return SubsystemSpec(name, "photon", PHOTON_DIM)


def particle(name: str, positions: int = 2) -> SubsystemSpec:
    if positions < 2:
        raise ValueError("particle needs at least 2 positions")
    return SubsystemSpec(name, "particle", positions + 1)


@dataclass
class StateVector:
    layout: tuple[SubsystemSpec, ...]
    amps: np.ndarray  # shape = tuple of subsystem dims

    def __post_init__(self):
        dims = tuple(s.dim for s in self.layout)
        self.amps = np.ascontiguousarray(self.amps, dtype=np.complex128).reshape(dims)
        if not np.isfinite(self.amps).all():
            raise ValueError("non-finite amplitude")
        n = norm_sq(self)
        if n > 1 + ATOL:
            raise ValueError(f"norm^2 {n} exceeds 1")

    def axis(self, name: str) -> int:
        for i, s in enumerate(self.layout):
            if s.name == name:
                return i
        raise KeyError(f"unknown subsystem {name!r}")

    def spec(self, name: str) -> SubsystemSpec:
        return self.layout[self.axis(name)]

    def copy(self) -> "StateVector":
        return StateVector(self.layout, self.amps.copy())


def norm_sq(state: StateVector) -> float:
    return float(np.vdot(state.amps, state.amps).real)


def norm_deficit(state: StateVector) -> float:
    """Probability weight of pruned failure events."""
    return max(0.0, 1.0 - norm_sq(state))


def level_weight(state: StateVector, name: str, level: int) -> float:
    """Total probability weight with the named subsystem at one level."""
    axis = state.axis(name)
    sl = np.take(state.amps, level, axis=axis)
    return float(np.vdot(sl, sl).real)


def new_state(layout: list[SubsystemSpec], levels: list[int]) -> StateVector:
    """Product basis state with amplitude 1 at the given multi-index."""
    if len(layout) != len(levels):
        raise ValueError("layout/levels length mismatch")
    for spec, lv in zip(layout, levels):
        if not 0 <= lv < spec.dim:
            raise ValueError(f"level {lv} out of range for subsystem {spec.name!r}")
    dims = tuple(s.dim for s in layout)
    amps = np.zeros(dims, dtype=np.complex128)
    amps[tuple(levels)] = 1.0
    return StateVector(tuple(layout), amps)


def _targets_front(amps: np.ndarray, axes: list[int]) -> tuple[np.ndarray, tuple]:
    moved = np.moveaxis(amps, axes, range(len(axes)))
    shape = moved.shape
    block = int(np.prod(shape[: len(axes)], dtype=np.int64))
    return moved.reshape(block, -1), shape


def apply_local(state: StateVector, targets: list[str], op: np.ndarray) -> StateVector:
    """Apply a dense operator on the target slots, identity elsewhere.

    The operator indexes the targets big-endian in list order.  It must be a
    contraction (largest singular value <= 1 + 1e-12); the norm may shrink
    but never grow beyond tolerance.
    """
    axes = [state.axis(t) for t in targets]
    if len(set(axes)) != len(axes):
        raise ValueError("duplicate target")
    block = int(np.prod([state.layout[a].dim for a in axes], dtype=np.int64))
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (block, block):
        raise ValueError(f"operator shape {op.shape} does not match target dimension {block}")
    smax = float(np.linalg.svd(op, compute_uv=False)[0])
    if smax > 1 + ATOL:
        raise ValueError(f"operator is not a contraction (sigma_max = {smax})")
    mat, shape = _targets_front(state.amps, axes)
    out = (op @ mat).reshape(shape)
    out = np.moveaxis(out, range(len(axes)), axes)
    return StateVector(state.layout, out)


def _basis_vectors(spec: SubsystemSpec, basis: str) -> list[tuple[int, np.ndarray | None]]:
    """Outcome list as (outcome, factor vector); None marks the pooled photon
    failure outcome whose projection has rank 2."""
    d = spec.dim
    if basis == PHOTON_COMPUTATIONAL:
        if spec.kind != "photon":
            raise ValueError(f"{spec.name} is not a photon")
        e = np.eye(d, dtype=np.complex128)
        return [(0, e[PH_ZERO]), (1, e[PH_ONE_H]), (PHOTON_FAIL, None)]
    if spec.kind != "particle":
        raise ValueError(f"basis {basis!r} needs a particle, got {spec.name!r}")
    e = np.eye(d, dtype=np.complex128)
    if basis == PARTICLE_PM:
        if spec.positions() != 2:
            raise ValueError("particle_pm basis needs a 2-position particle")
        plus = (e[BLOCKED] + e[OPEN]) / np.sqrt(2)
        minus = (e[BLOCKED] - e[OPEN]) / np.sqrt(2)
        return [(PM_PLUS, plus), (PM_MINUS, minus), (PM_EXPLODED, e[2])]
    if basis in (PARTICLE_COMPUTATIONAL, QUDIT_POSITION):
        return [(k, e[k]) for k in range(d)]
    raise ValueError(f"unknown basis {basis!r}")


def _project_branch(state: StateVector, axis: int, factor: np.ndarray | None):
    """Branch amplitude block for one outcome.

    Rank-1 outcomes factor the subsystem out of the layout; the pooled
    failure outcome keeps it (its projector has rank 2)."""
    if factor is not None:
        amp = np.tensordot(factor.conj(), state.amps, axes=(0, axis))
        layout = tuple(s for i, s in enumerate(state.layout) if i != axis)
        return layout, amp
    keep = np.zeros(state.layout[axis].dim)
    keep[PH_ONE_V] = 1.0
    keep[PH_SINK] = 1.0
    shape = [1] * state.amps.ndim
    shape[axis] = state.layout[axis].dim
    amp = state.amps * keep.reshape(shape)
    return state.layout, amp


def branch_all(state: StateVector, target: str, basis: str):
    """Every measurement branch with weight above cutoff.

    Returns [(outcome, post_state, probability)] where probability is the
    pre-renormalization branch weight; post states are renormalized and, for
    rank-1 outcomes, no longer contain the measured subsystem.
    """
    axis = state.axis(target)
    spec = state.layout[axis]
    out = []
    for outcome, factor in _basis_vectors(spec, basis):
        layout, amp = _project_branch(state, axis, factor)
        w = float(np.vdot(amp, amp).real)
        if w > BRANCH_CUTOFF:
            out.append((outcome, StateVector(layout, amp / np.sqrt(w)), w))
    return out


def measure(state: StateVector, target: str, basis: str, rng: np.random.Generator):
    """Sample one measurement outcome with Born probabilities.

    The (possibly sub-normalized) weights are renormalized for sampling
    only; the returned probability is the raw branch weight.
    """
    branches = branch_all(state, target, basis)
    total = sum(w for _, _, w in branches)
    if total < BRANCH_CUTOFF:
        raise ValueError(f"impossible measurement: no weight on {target!r}")
    u = rng.random() * total
    acc = 0.0
    for outcome, post, w in branches[:-1]:
        acc += w
        if u < acc:
            return outcome, post, w
    return branches[-1]


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 for renormalized states over identical layouts."""
    if tuple(a.layout) != tuple(b.layout):
        raise ValueError("layout mismatch")
    for s, nm in ((a, "first"), (b, "second")):
        if abs(norm_sq(s) - 1.0) > 1e-9:
            raise ValueError(f"{nm} state is not renormalized")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def prune_failures(state: StateVector) -> StateVector:
    """Drop amplitude on sink and exploded levels; its weight moves to the
    norm deficit."""
    amps = state.amps.copy()
    for i, spec in enumerate(state.layout):
        idx = [slice(None)] * amps.ndim
        idx[i] = PH_SINK if spec.kind == "photon" else spec.exploded_level()
        amps[tuple(idx)] = 0.0
    return StateVector(state.layout, amps)


def add_subsystem(state: StateVector, spec: SubsystemSpec, init) -> StateVector:
    """Append a fresh subsystem, either at a basis level (int) or in an
    explicit normalized amplitude vector."""
    if any(s.name == spec.name for s in state.layout):
        raise ValueError(f"subsystem {spec.name!r} already present")
    if isinstance(init, (int, np.integer)):
        if not 0 <= init < spec.dim:
            raise ValueError(f"level {init} out of range for {spec.name!r}")
        e = np.zeros(spec.dim, dtype=np.complex128)
        e[int(init)] = 1.0
    else:
        e = np.asarray(init, dtype=np.complex128)
        if e.shape != (spec.dim,):
            raise ValueError(f"initial vector must have length {spec.dim}")
        if abs(float(np.vdot(e, e).real) - 1.0) > ATOL:
            raise ValueError("initial vector must be normalized")
    amps = np.multiply.outer(state.amps, e)
    return StateVector(state.layout + (spec,), amps)


def reorder(state: StateVector, names: list[str]) -> StateVector:
    """Permute the layout to the given subsystem order."""
    if sorted(names) != sorted(s.name for s in state.layout):
        raise ValueError("names do not match layout")
    perm = [state.axis(n) for n in names]
    layout = tuple(state.layout[p] for p in perm)
    return StateVector(layout, np.transpose(state.amps, perm))
