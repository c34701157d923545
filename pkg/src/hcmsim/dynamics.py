"""Event-driven percolation of the black half-edges.

The dynamic process pairs two distinct unpaired black half-edges at rate
Q(t) (the number of pairs still to form), so that the graph at time s has
each black edge of a uniform matching retained with probability 1-e^{-s}.
The modified process keeps its half-edges: events arrive at the constant
rate Q(0) and each inserts an extra edge between the owners of a uniform
half-edge pair, which makes the ordered component sizes a multiplicative
coalescent with mass and weight run at time s/(2Q(0)-1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvariantError, as_generator
from .coalescent import BlockSystem
from .graphs import ColoredMultigraph, component_table


def _require_unpaired_black(g: ColoredMultigraph):
    if g.black_match is not None:
        raise ValueError("percolation processes pair the black half-edges themselves; "
                         "pass the white-only graph G_n(0)")


def _death_times(q0: int, horizon: float, rng) -> np.ndarray:
    """Event times of the pure-death pairing clock: rate Q, Q-1, ... within horizon."""
    if q0 <= 0:
        return np.zeros(0)
    rates = np.arange(q0, 0, -1, dtype=float)
    times = np.cumsum(rng.exponential(1.0 / rates))
    return times[times <= horizon]


@dataclass
class PercolationState:
    graph: ColoredMultigraph
    mode: str  # "dynamic" | "modified"
    q0: int
    event_log: list  # (time, half_edge_a, half_edge_b)
    q_final: int
    paired: np.ndarray  # per black half-edge, True once consumed (dynamic only)

    def event_vertex_pairs(self) -> np.ndarray:
        if not self.event_log:
            return np.zeros((0, 2), dtype=np.int64)
        owner = self.graph.black_owner
        he = np.array([(a, b) for _, a, b in self.event_log], dtype=np.int64)
        return np.column_stack((owner[he[:, 0]], owner[he[:, 1]]))

    def component_sizes(self) -> np.ndarray:
        sizes, *_ = component_table(self.graph, self.event_vertex_pairs())
        return sizes

    def component_arrays(self):
        sizes, blacks, *_ = component_table(self.graph, self.event_vertex_pairs())
        return sizes, blacks

    def check_q(self):
        if self.mode == "dynamic" and self.q_final + len(self.event_log) != self.q0:
            raise InvariantError("Q(t) + #events != Q(0)")


def run_dynamic(g: ColoredMultigraph, s_max: float, rng_seed) -> PercolationState:
    """Algorithm: at each event of a rate-Q(t) clock, pair two distinct
    uniformly chosen unpaired black half-edges."""
    rng = as_generator(rng_seed)
    _require_unpaired_black(g)
    n_he = g.black_owner.size
    if n_he % 2:
        raise ValueError("black parity violated")
    q0 = n_he // 2
    times = _death_times(q0, s_max, rng)
    pool = np.arange(n_he, dtype=np.int64)
    m = n_he
    paired = np.zeros(n_he, dtype=bool)
    log = []
    for t in times:
        i = int(rng.integers(m))
        a = int(pool[i])
        pool[i], pool[m - 1] = pool[m - 1], pool[i]
        m -= 1
        j = int(rng.integers(m))
        b = int(pool[j])
        pool[j], pool[m - 1] = pool[m - 1], pool[j]
        m -= 1
        paired[a] = paired[b] = True
        log.append((float(t), a, b))
    state = PercolationState(g, "dynamic", q0, log, q0 - len(log), paired)
    state.check_q()
    return state


def run_modified(g: ColoredMultigraph, s_max: float, rng_seed) -> PercolationState:
    """Constant rate Q(0); the chosen half-edges remain available."""
    rng = as_generator(rng_seed)
    _require_unpaired_black(g)
    n_he = g.black_owner.size
    if n_he % 2:
        raise ValueError("black parity violated")
    q0 = n_he // 2
    n_events = rng.poisson(q0 * s_max)
    times = np.sort(rng.random(n_events) * s_max)
    log = []
    for t in times:
        a = int(rng.integers(n_he))
        b = int(rng.integers(n_he - 1))
        if b >= a:
            b += 1
        log.append((float(t), a, b))
    return PercolationState(g, "modified", q0, log, q0, np.zeros(n_he, dtype=bool))


@dataclass
class CoupledPair:
    dynamic: PercolationState
    modified: PercolationState


def run_coupled(g: ColoredMultigraph, s_max: float, rng_seed) -> CoupledPair:
    """Thinning coupling: modified events are generated first and the
    dynamic component accepts one exactly when both half-edges are still
    unpaired, so its edge set is a subset of the modified edge set at
    every time."""
    rng = as_generator(rng_seed)
    modified = run_modified(g, s_max, rng)
    n_he = g.black_owner.size
    paired = np.zeros(n_he, dtype=bool)
    dyn_log = []
    for t, a, b in modified.event_log:
        if not paired[a] and not paired[b]:
            paired[a] = paired[b] = True
            dyn_log.append((t, a, b))
    q0 = modified.q0
    dynamic = PercolationState(g, "dynamic", q0, dyn_log, q0 - len(dyn_log), paired)
    dynamic.check_q()
    if not set(dyn_log) <= set(modified.event_log):
        raise InvariantError("dynamic edge set escaped the modified edge set")
    return CoupledPair(dynamic=dynamic, modified=modified)


def refines(fine_labels: np.ndarray, coarse_labels: np.ndarray) -> bool:
    """True if every fine component is contained in one coarse component."""
    seen = {}
    for f, c in zip(fine_labels, coarse_labels):
        if f in seen and seen[f] != c:
            return False
        seen[f] = c
    return True


def q_trajectory_check(
    g: ColoredMultigraph,
    T: float,
    replicates: int,
    rng_seed,
    delta_exponent: float = 0.4,
    t_mean_check: float = 1.0,
) -> dict:
    """Deviation of Q(t)/n from the pure-death ODE solution (Q(0)/n) e^{-t}.

    Records sup_{t <= T/c_n} |Q(t)/n - (Q(0)/n) e^{-t}| per replicate and
    the exceedance rate of delta_n = n^{-delta_exponent}, to compare with
    the bound 2 gamma T / (delta_n^2 n c_n). Also reports the mean of
    Q(t)/n at ``t_mean_check`` against its exact value.
    """
    if replicates < 100:
        raise ValueError("trajectory check needs at least 1e2 replicates")
    rng = as_generator(rng_seed)
    n = g.n
    q0 = g.black_owner.size // 2
    c_n = g.seq.scaling.c_n
    gamma = g.black_owner.size / n
    horizon_sup = T / c_n
    horizon = max(horizon_sup, t_mean_check)
    delta_n = n ** (-delta_exponent)
    sups = np.empty(replicates)
    q_at_t = np.empty(replicates)
    for r in range(replicates):
        times = _death_times(q0, horizon, rng)
        k = np.searchsorted(times, horizon_sup, side="right")
        ts = times[:k]
        # Q/n is constant between events and the ODE curve is monotone, so the
        # sup is attained at event times (just before/after) or the endpoints.
        grid = np.concatenate(([0.0], ts, [horizon_sup]))
        q_left = q0 - np.concatenate(([0], np.arange(len(ts)), [len(ts)]))
        q_right = q0 - np.concatenate(([0], np.arange(1, len(ts) + 1), [len(ts)]))
        f = q0 * np.exp(-grid)
        dev = np.maximum(np.abs(q_left - f), np.abs(q_right - f)) / n
        sups[r] = dev.max()
        q_at_t[r] = (q0 - np.searchsorted(times, t_mean_check, side="right")) / n
    exceed = float(np.mean(sups > delta_n))
    bound = 2.0 * gamma * T / (delta_n**2 * n * c_n)
    se_exceed = float(np.sqrt(max(exceed * (1 - exceed), 1.0 / replicates) / replicates))
    mean_target = q0 * np.exp(-t_mean_check) / n
    sd = float(np.std(q_at_t, ddof=1))
    return {
        "sup_deviation_mean": float(np.mean(sups)),
        "delta_n": delta_n,
        "exceedance_rate": exceed,
        "exceedance_bound": bound,
        "exceedance_stderr": se_exceed,
        "exceedance_ok": bool(exceed <= bound + 4 * se_exceed),
        "mean_q_at_t": float(np.mean(q_at_t)),
        "mean_q_target": float(mean_target),
        "mean_q_sd": sd,
        "mean_ok": bool(abs(np.mean(q_at_t) - mean_target) <= 3 * sd / np.sqrt(replicates)),
    }


def edge_probability_estimate(
    g: ColoredMultigraph,
    component_i: np.ndarray,
    component_j: np.ndarray,
    s: float,
    replicates: int,
    rng_seed,
) -> float:
    """Monte Carlo frequency that a black edge joins the two components by
    time s*gamma_n/c_n in the dynamic process, given the initial graph."""
    vi = set(int(v) for v in component_i)
    vj = set(int(v) for v in component_j)
    if vi & vj:
        raise ValueError("components must be disjoint")
    rng = as_generator(rng_seed)
    gamma_n = g.black_owner.size / g.n
    horizon = s * gamma_n / g.seq.scaling.c_n
    owner = g.black_owner
    hits = 0
    for _ in range(replicates):
        state = run_dynamic(g, horizon, rng)
        for _, a, b in state.event_log:
            oa, ob = int(owner[a]), int(owner[b])
            if (oa in vi and ob in vj) or (oa in vj and ob in vi):
                hits += 1
                break
    return hits / replicates


def modified_block_view(g: ColoredMultigraph) -> BlockSystem:
    """Initial blocks of the modified process: one block per component of
    G_n(0) with mass = size and weight = incident black half-edges."""
    sizes, blacks, *_ = component_table(g)
    return BlockSystem(sizes.astype(float), blacks.astype(float))


def write_event_csv(state: PercolationState, path):
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "half_edge_a", "half_edge_b"])
        for t, a, b in state.event_log:
            writer.writerow([f"{t:.12g}", a, b])
