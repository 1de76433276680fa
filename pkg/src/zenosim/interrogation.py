"""N-cycle quantum interrogation and the photon-particle controlled-Z gate.

One cycle rotates the photon's polarization block by theta, lets each
listed particle absorb from the vertical component at its blocking
positions, then applies per-cycle photon loss.  A blocked particle keeps
re-projecting the photon onto |1H>, so the surviving weight after N ideal
cycles is exactly cos^(2N)(theta); an open interferometer composes the N
rotations into R(N*theta), which for theta = pi/N is a sign flip.

Rotation arithmetic runs in extended precision so that the composed sign
flip is exact at the 1e-15 level even for many cycles; amplitudes are
stored back as complex128.

Absorption transfers amplitude from |1V> at a blocked position jointly to
photon-sink x particle-exploded.  Each absorption step also clears that
sink slot first, so weight parked there by an earlier cycle moves to the
norm deficit; this keeps every step a contraction.  Per-cycle loss and the
end-of-run residual |1V> routing likewise end up in the norm deficit once
the run finishes (qi_run prunes sink levels before returning).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .state import (
    PH_ONE_H,
    PH_ONE_V,
    PH_SINK,
    BLOCKED,
    StateVector,
    new_state,
    prune_failures,
)

PI_OVER_N = "pi_over_n"
PI_OVER_2N = "pi_over_2n"
EXPLICIT = "explicit"
THETA_RULES = (PI_OVER_N, PI_OVER_2N, EXPLICIT)

ROUTE_TO_SINK = "route_to_sink"
KEEP = "keep"

_PI = np.longdouble("3.14159265358979323846264338327950288")


@dataclass(frozen=True)
class QiParams:
    """Interrogation parameters.

    cycles=None selects the exact N -> infinity limit of the pi/N wiring
    (a pure controlled phase); finite cycles run the full dynamics.
    """

    cycles: int | None = 10000
    theta_rule: str = PI_OVER_N
    theta: float | None = None
    absorb_prob: float = 1.0
    cycle_loss: float = 0.0
    residual_v_policy: str = ROUTE_TO_SINK

    def __post_init__(self):
        if self.cycles is not None and self.cycles < 1:
            raise ValueError("cycles must be >= 1")
        if self.theta_rule not in THETA_RULES:
            raise ValueError(f"unknown theta rule {self.theta_rule!r}")
        if self.cycles is None and self.theta_rule != PI_OVER_N:
            raise ValueError("the exact limit is defined for the pi/N rule only")
        if self.theta_rule == EXPLICIT and self.theta is None:
            raise ValueError("explicit theta rule needs a theta value")
        if not 0.0 <= self.absorb_prob <= 1.0:
            raise ValueError("absorb_prob must lie in [0, 1]")
        if not 0.0 <= self.cycle_loss < 1.0:
            raise ValueError("cycle_loss must lie in [0, 1)")
        if self.residual_v_policy not in (ROUTE_TO_SINK, KEEP):
            raise ValueError(f"unknown residual policy {self.residual_v_policy!r}")


def theta_value(params: QiParams) -> np.longdouble:
    """Rotation angle per cycle, in extended precision."""
    if params.theta_rule == PI_OVER_2N:
        return _PI / (2 * params.cycles)
    if params.theta_rule == PI_OVER_N:
        return _PI / params.cycles
    return np.longdouble(params.theta)


def absorber_matrix(positions: int, eps: float, blocking_position: int) -> np.ndarray:
    """Single-position absorber on the photon x particle block.

    Column |1V, blocked> splits into sqrt(1-eps) surviving plus sqrt(eps)
    on sink x exploded; the sink x exploded column itself is cleared (its
    prior content is accounted as norm deficit).  eps = 0 is the identity.
    """
    dim = 4 * (positions + 1)
    m = np.eye(dim, dtype=np.complex128)
    if eps == 0.0:
        return m
    exploded = positions
    col = PH_ONE_V * (positions + 1) + blocking_position
    sink_x = PH_SINK * (positions + 1) + exploded
    m[col, col] = np.sqrt(1.0 - eps)
    m[sink_x, col] = np.sqrt(eps)
    m[sink_x, sink_x] = 0.0
    return m


def _normalize_blocking(spec, blocking) -> tuple[int, ...]:
    if isinstance(blocking, (int, np.integer)):
        blocking = (int(blocking),)
    positions = spec.positions()
    out = tuple(sorted(int(b) for b in blocking))
    if len(set(out)) != len(out):
        raise ValueError(f"duplicate blocking position for {spec.name!r}")
    for b in out:
        if not 0 <= b < positions:
            raise ValueError(
                f"blocking position {b} invalid for {spec.name!r} "
                f"(positions 0..{positions - 1}; the exploded level cannot block)"
            )
    return out


def _rest_index(ndim_rest: int, axis: int, level: int) -> tuple:
    idx = [slice(None)] * ndim_rest
    idx[axis] = level
    return tuple(idx)


def _run_cycles(work, plan, theta, eps, lam, n):
    """Run n cycles in place on the photon-fronted view `work`."""
    c = np.cos(theta)
    s = np.sin(theta)
    h = work[PH_ONE_H].astype(np.clongdouble)
    v = work[PH_ONE_V].astype(np.clongdouble)
    sink = work[PH_SINK]
    root_eps = complex(np.sqrt(np.longdouble(eps)))
    keep_eps = np.clongdouble(np.sqrt(np.longdouble(1) - np.longdouble(eps)))
    keep_loss = np.clongdouble(np.sqrt(np.longdouble(1) - np.longdouble(lam)))
    for _ in range(n):
        h, v = c * h - s * v, s * h + c * v
        if eps > 0.0:
            for rest_axis, blocking, exploded in plan:
                idx_x = _rest_index(v.ndim, rest_axis, exploded)
                for b in blocking:
                    idx_b = _rest_index(v.ndim, rest_axis, b)
                    sink[idx_x] = np.asarray(root_eps * v[idx_b], dtype=np.complex128)
                    v[idx_b] *= keep_eps
        if lam > 0.0:
            h *= keep_loss
            v *= keep_loss
    work[PH_ONE_H] = h.astype(np.complex128)
    work[PH_ONE_V] = v.astype(np.complex128)


def _prepare(state: StateVector, photon: str, particles: list[str], blocking):
    p_axis = state.axis(photon)
    if state.layout[p_axis].kind != "photon":
        raise ValueError(f"{photon!r} is not a photon")
    if blocking is None:
        blocking = [BLOCKED] * len(particles)
    if len(blocking) != len(particles):
        raise ValueError("one blocking entry per particle required")
    plan = []
    seen = set()
    for name, blk in zip(particles, blocking):
        axis = state.axis(name)
        spec = state.layout[axis]
        if spec.kind != "particle":
            raise ValueError(f"{name!r} is not a particle")
        if axis in seen:
            raise ValueError(f"particle {name!r} listed twice")
        seen.add(axis)
        rest_axis = axis - 1 if axis > p_axis else axis
        plan.append((rest_axis, _normalize_blocking(spec, blk), spec.exploded_level()))
    return p_axis, plan


def qi_cycle(state: StateVector, photon: str, particles: list[str],
             blocking, params: QiParams) -> StateVector:
    """One rotation-absorb-loss cycle; sink amplitude is left inspectable."""
    if params.cycles is None:
        raise ValueError("qi_cycle needs a finite cycle count")
    p_axis, plan = _prepare(state, photon, particles, blocking)
    amps = state.amps.copy()
    work = np.moveaxis(amps, p_axis, 0)
    _run_cycles(work, plan, theta_value(params), params.absorb_prob,
                params.cycle_loss, 1)
    return StateVector(state.layout, amps)


def _apply_ideal_phase(work, plan, layout_rest_dims):
    """Exact limit of the pi/N wiring: sign flip where the photon is |1H>
    and every particle sits outside its blocking set."""
    grids = [np.arange(d) for d in layout_rest_dims]
    for rest_axis, blocking, exploded in plan:
        d = layout_rest_dims[rest_axis]
        allowed = [k for k in range(d) if k not in blocking and k != exploded]
        grids[rest_axis] = np.array(allowed, dtype=int)
    if any(g.size == 0 for g in grids):
        return
    if not grids:
        work[PH_ONE_H] *= -1.0
        return
    work[PH_ONE_H][np.ix_(*grids)] *= -1.0


def qi_run(state: StateVector, photon: str, particles: list[str],
           blocking, params: QiParams) -> StateVector:
    """Full interrogation: N cycles (or the exact limit), residual-|1V>
    policy, then pruning of sink and exploded levels into the norm deficit."""
    p_axis, plan = _prepare(state, photon, particles, blocking)
    amps = state.amps.copy()
    work = np.moveaxis(amps, p_axis, 0)
    if params.cycles is None:
        rest_dims = tuple(d for i, d in enumerate(state.amps.shape) if i != p_axis)
        _apply_ideal_phase(work, plan, rest_dims)
    else:
        _run_cycles(work, plan, theta_value(params), params.absorb_prob,
                    params.cycle_loss, params.cycles)
    if params.residual_v_policy == ROUTE_TO_SINK:
        # slice views stay writable even when work is one-dimensional
        sink = work[PH_SINK:PH_SINK + 1]
        v = work[PH_ONE_V:PH_ONE_V + 1]
        overlap = np.minimum(np.abs(sink), np.abs(v)).max() if sink.size else 0.0
        if overlap > 1e-12:
            raise ValueError("sink and residual |1V> supports overlap")
        sink += v
        v[...] = 0.0
    return prune_failures(StateVector(state.layout, amps))


def qicz(state: StateVector, photon: str, particle: str,
         params: QiParams) -> StateVector:
    """Controlled-Z between a photon and a 2-position particle: the particle
    blocks at position 0, so the sign flip lands exactly on |1H> x |open>."""
    spec = state.spec(particle)
    if spec.kind != "particle" or spec.positions() != 2:
        raise ValueError("qicz needs a 2-position particle")
    return qi_run(state, photon, [particle], [BLOCKED], params)


def qicz_multi(state: StateVector, photon: str, particles: list[str],
               params: QiParams, blocking=None) -> StateVector:
    """Multi-particle controlled phase: any particle sitting on a blocking
    position freezes the rotation; the sign flip occurs only when all are
    clear.  An empty particle list degenerates to an unconditional flip."""
    return qi_run(state, photon, list(particles), blocking, params)


def effective_map(params: QiParams, n_particles: int,
                  particle_positions: list[int] | None = None,
                  blocking=None) -> np.ndarray:
    """The linear map of qicz/qicz_multi, extracted column-by-column.

    Index convention: photon slowest, then particles in list order.
    Extraction costs one full run per column, so results are memoized on
    (params, positions, blocking).
    """
    if n_particles < 0:
        raise ValueError("particle count must be nonnegative")
    if particle_positions is None:
        particle_positions = [2] * n_particles
    if blocking is None:
        key_blocking = ((BLOCKED,),) * n_particles
    else:
        key_blocking = tuple(
            (b,) if isinstance(b, int) else tuple(sorted(b)) for b in blocking)
    return _effective_map_cached(params, tuple(particle_positions),
                                 key_blocking).copy()


@lru_cache(maxsize=64)
def _effective_map_cached(params: QiParams, particle_positions: tuple,
                          blocking: tuple) -> np.ndarray:
    from .state import particle, photon as photon_spec

    layout = [photon_spec("ph")] + [
        particle(f"b{i}", positions=d) for i, d in enumerate(particle_positions)
    ]
    names = [s.name for s in layout[1:]]
    dims = [s.dim for s in layout]
    total = int(np.prod(dims))
    out = np.zeros((total, total), dtype=np.complex128)
    for col in range(total):
        levels = list(np.unravel_index(col, dims))
        st = new_state(layout, levels)
        res = qi_run(st, "ph", names, list(blocking), params)
        out[:, col] = res.amps.reshape(-1)
    return out
