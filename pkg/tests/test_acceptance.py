"""Acceptance suite: one test per criterion, at the stated tolerances.

Each test prints a single PASS line when its assertions hold; run with
``pytest tests/test_acceptance.py -v -s`` to see them. Monte Carlo checks
use fixed seeds, so the suite is deterministic.
"""

import itertools

import numpy as np
import pytest
from scipy.stats import ks_2samp

from hcmsim.coalescent import (
    bipartite_bound_check,
    mcmw_batch,
    mcmw_graphical,
    sample_xi_batch,
    scaling_transform,
)
from hcmsim.core import stream_gen
from hcmsim.degrees import (
    DEFAULT_BULK_BLACK,
    DEFAULT_BULK_WHITE,
    DegreeSequence,
    build_degree_sequence,
    make_limit_parameters,
    make_scaling,
)
from hcmsim.dynamics import q_trajectory_check, run_dynamic, run_modified, modified_block_view
from hcmsim.exploration import explore
from hcmsim.graphs import (
    component_table,
    percolate_black,
    sample_black_matching,
    sample_white_matching,
)
from hcmsim.levy import sample_surplus_process, sample_thinned_levy
from hcmsim.paths import CadlagPath
from hcmsim.stats import ExperimentConfig, theorem_1_6_experiment, theorem_1_7_experiment


def _report(num, text):
    print(f"ACCEPTANCE {num:>2}: PASS - {text}")


def test_c01_exact_identity_suite():
    """1000 sampled graphs up to n=1000: Euler relation, walk-vs-union-find
    multiset equality, X(tau_k) = -2k, Y-increment identity (all exact)."""
    lim = make_limit_parameters(3.5, 8)
    rng = stream_gen(101, 0)
    sizes_checked = 0
    for i in range(1000):
        n = (50, 200, 1000)[i % 3]
        sc = make_scaling(n, 3.5)
        seq = build_degree_sequence(sc, lim, 8, DEFAULT_BULK_WHITE, rng, DEFAULT_BULK_BLACK)
        g = sample_white_matching(seq, rng)
        tr = explore(g, rng)
        comps = tr.components()
        # X hits -2k exactly at the hitting times
        assert np.array_equal(tr.X[tr.tau], -2 * np.arange(1, tr.tau.size + 1))
        # Euler relation per component, exact integers
        for c in comps:
            assert c.size == c.edge_count + 1 - c.surplus
        walk = sorted((c.size, c.black_half_edges) for c in comps)
        t_sizes, t_blacks, *_ = component_table(g)
        oracle = sorted(zip(t_sizes.tolist(), t_blacks.tolist()))
        assert walk == oracle
        sizes_checked += len(comps)
    _report(1, f"exact identities on 1000 graphs ({sizes_checked} components)")


def test_c02_mcmw_two_block_law():
    """P(merge by t) = 1 - exp(-y1 y2 t) within 3 binomial SE at 1e5 reps."""
    reps = 100_000
    for k, (y1, y2, t) in enumerate([(1.0, 1.0, np.log(2)), (2.0, 0.5, 1.0), (1.0, 3.0, 0.2)]):
        m = mcmw_batch([1.0, 1.0], [y1, y2], t, reps, stream_gen(202, k))
        p_hat = float(np.mean(m[:, 0] == 2.0))
        p = 1.0 - np.exp(-y1 * y2 * t)
        se = np.sqrt(p * (1 - p) / reps)
        assert abs(p_hat - p) <= 3 * se, (y1, y2, t, p_hat, p)
    _report(2, "two-block merge law at three (y1, y2, t) instances, 3 SE")


def test_c03_three_block_brute_force():
    """Ordered-mass distribution matches the 2^3 edge-pattern enumeration
    within 4-sigma multinomial bands at 1e5 reps."""
    x = np.array([1.0, 2.0, 4.0])
    t = 0.7
    p = 1.0 - np.exp(-t)
    exact = {}
    for pattern in itertools.product([0, 1], repeat=3):
        pr = float(np.prod([p if e else 1 - p for e in pattern]))
        parent = list(range(3))

        def find(i):
            while parent[i] != i:
                i = parent[i]
            return i

        for e, (i, j) in zip(pattern, [(0, 1), (0, 2), (1, 2)]):
            if e:
                parent[find(i)] = find(j)
        masses = {}
        for i in range(3):
            masses[find(i)] = masses.get(find(i), 0.0) + x[i]
        key = tuple(sorted(masses.values(), reverse=True))
        exact[key] = exact.get(key, 0.0) + pr
    reps = 100_000
    m = mcmw_batch(x, np.ones(3), t, reps, 303)
    counts = {}
    for row in m:
        key = tuple(v for v in row if v > 0)
        counts[key] = counts.get(key, 0) + 1
    assert set(counts) <= set(exact)
    for key, pr in exact.items():
        se = np.sqrt(pr * (1 - pr) / reps)
        assert abs(counts.get(key, 0) / reps - pr) <= 4 * se, key
    _report(3, f"three-block ordered-mass distribution over {len(exact)} partitions, 4 sigma")


def test_c04_speed_and_scaling_identities():
    """KS p > 1e-3 for (a) MC2(x,cx,t) vs MC1(x,c^2 t) and (b) the
    (a,b,c) = (2,1,4) scaling identity; largest-mass marginals, 1e5 reps."""
    reps = 100_000
    x = np.array([1.0, 0.7, 0.4])
    c = 2.0
    t = 0.22
    lhs = mcmw_batch(x, c * x, t, reps, 404)[:, 0]
    rhs = mcmw_batch(x, x, c * c * t, reps, 405)[:, 0]
    p_a = ks_2samp(lhs, rhs).pvalue
    assert p_a > 1e-3, p_a

    y = np.array([0.8, 0.5, 0.2])
    a, b, cc = 2.0, 1.0, 4.0
    lhs2 = mcmw_batch(a * x, b * y, cc * t, reps, 406)[:, 0]
    (xt, yt), scale = scaling_transform(x, y, a, b, cc)
    rhs2 = scale * mcmw_batch(xt, yt, t, reps, 407)[:, 0]
    p_b = ks_2samp(lhs2, rhs2).pvalue
    assert p_b > 1e-3, p_b
    _report(4, f"speed identity p={p_a:.3f}, scaling identity p={p_b:.3f}")


def test_c05_coupling_inequalities():
    """Per-realization assertions over 1e4 xi-coupled runs plus the
    closed-form tail envelope at s = 2||x||^2."""
    reps = 10_000
    n = 5
    x = np.array([0.5, 0.4, 0.3, 0.2, 0.1])
    y = np.array([0.4, 0.4, 0.3, 0.3, 0.2])
    x2 = x + 0.2
    y2 = y + 0.2
    t = 0.4
    rng = stream_gen(505, 0)
    xi = sample_xi_batch(n, reps, rng)

    # monotone edge inclusion under y <= y'
    iu, ju = np.triu_indices(n, 1)
    e1 = xi <= y[iu] * y[ju] * t
    e2 = xi <= y2[iu] * y2[ju] * t
    assert np.all(e2 | ~e1)

    # pathwise norm-difference inequality under the shared clocks
    base = mcmw_batch(x, y, t, reps, rng, xi_batch=xi)
    upper = mcmw_batch(x2, y2, t, reps, rng, xi_batch=xi)
    diff = np.sum((upper - base) ** 2, axis=1)
    gap = np.sum(upper**2, axis=1) - np.sum(base**2, axis=1)
    assert np.all(diff <= gap + 1e-9)

    # susceptibility chain: S(x,y,t) <= S(x+y,y,t) - ||y||^2 - 2<x,y>
    joint = mcmw_batch(x + y, y, t, reps, rng, xi_batch=xi)
    S_base = np.sum(base**2, axis=1)
    S_joint = np.sum(joint**2, axis=1)
    slack = S_joint - float(np.sum(y**2)) - 2.0 * float(np.sum(x * y)) - S_base
    assert np.min(slack) >= -1e-9

    # tail envelope for MC1(x, t) at s = 2||x||^2: P(S > s) <= t s ||x||^2/(s - ||x||^2)
    mc1_masses = mcmw_batch(x, x, t, reps, rng, xi_batch=xi)
    S1 = np.sum(mc1_masses**2, axis=1)
    norm_sq = float(np.sum(x**2))
    s_level = 2.0 * norm_sq
    bound = t * s_level * norm_sq / (s_level - norm_sq)
    p_hat = float(np.mean(S1 > s_level))
    se = np.sqrt(max(p_hat * (1 - p_hat), 1.0 / reps) / reps)
    assert p_hat <= bound + 4 * se, (p_hat, bound)
    _report(5, f"coupling inequalities on {reps} runs; envelope {p_hat:.4f} <= {bound:.4f} + 4se")


def test_c06_bipartite_bound():
    """Bipartite susceptibility-increment bound on 3 fixed 10-block
    instances, 1e5 reps, empirical lhs <= rhs + 4 sigma."""
    reps = 100_000
    instances = [
        (np.linspace(1.0, 0.1, 10), np.linspace(0.5, 0.1, 10), 5, 0.5, 0.4),
        (np.full(10, 0.3), np.full(10, 0.4), 4, 1.0, 0.3),
        (np.array([1.0, 0.8, 0.6, 0.5, 0.4, 0.3, 0.25, 0.2, 0.15, 0.1]),
         np.array([0.2, 0.3, 0.4, 0.2, 0.3, 0.4, 0.2, 0.3, 0.4, 0.2]), 6, 0.8, 0.5),
    ]
    for k, (x, y, m, t, eps) in enumerate(instances):
        rep = bipartite_bound_check(x, y, m, t, eps, reps, stream_gen(606, k))
        assert rep["holds"], rep
    _report(6, "bipartite bound holds on 3 fixed 10-block instances")


def test_c07_thinned_levy_identities():
    """Pathwise X/Y residuals < 1e-9 on the grid; E[Y(t)] within 3 SE of
    alpha t + sum beta_i (1 - exp(-theta_i kappa t)) at 1e5 realizations;
    Y-jump times a subset of X-jump times (exact)."""
    from hcmsim.degrees import LimitParameters

    params = LimitParameters(
        theta=np.array([1.0, 0.6, 0.45, 0.3, 0.2]),
        beta=np.array([0.5, 0.3, 0.2, 0.15, 0.1]),
        alpha=0.4,
        lam=0.1,
        kappa=1.7,
        gamma=1.0,
    )
    ts = np.array([0.5, 1.0, 2.0])
    reps = 100_000
    rng = stream_gen(707, 0)
    acc = np.empty((reps, ts.size))
    grid = np.linspace(0.0, 2.0, 33)
    for r in range(reps):
        real = sample_thinned_levy(params, T=2.0, rng_seed=rng)
        acc[r] = np.atleast_1d(real.Y_path.eval(ts))
        if r < 200:  # identity and jump-set checks on a prefix
            rx, ry = real.identity_residuals(grid)
            assert np.max(np.abs(rx)) < 1e-9
            assert np.max(np.abs(ry)) < 1e-9
            xt, _ = real.X_path.jumps()
            yt, _ = real.Y_path.jumps()
            assert set(yt.tolist()) <= set(xt.tolist())
    for j, t in enumerate(ts):
        target = params.alpha * t + float(np.sum(params.beta * (1 - np.exp(-params.theta * params.kappa * t))))
        se = acc[:, j].std(ddof=1) / np.sqrt(reps)
        assert abs(acc[:, j].mean() - target) <= 3 * se, (t, acc[:, j].mean(), target)
    _report(7, "pathwise identities < 1e-9 and E[Y(t)] within 3 SE at t in {0.5, 1, 2}")


def test_c08_surplus_process_poisson():
    """Constant reflected height h on [0,1]: N(1) mean and variance within
    3 sigma of Poisson(h) for h in {0.5, 1, 2}."""
    reps = 30_000
    for k, h in enumerate((0.5, 1.0, 2.0)):
        ramp = CadlagPath(np.array([0.0, 1e-9]), np.array([0.0, h]), np.array([h * 1e9, 0.0]), 1.0)
        rng = stream_gen(808, k)
        vals = np.array([sample_surplus_process(ramp, rng).final_value() for _ in range(reps)])
        se_mean = np.sqrt(h / reps)
        assert abs(vals.mean() - h) <= 3 * se_mean, h
        se_var = np.sqrt((h + 2 * h * h) / reps)  # Var of the sample variance for Poisson
        assert abs(vals.var(ddof=1) - h) <= 3 * se_var + 1e-3, h
    _report(8, "surplus counts match Poisson(h) moments for h in {0.5, 1, 2}")


def test_c09_dynamic_vs_static_law():
    """run_dynamic(s) vs percolate_black(1 - e^{-s}) on a fixed 100-vertex
    graph: largest-component KS p > 1e-3 at 1e4 reps, s in {0.1, 1}."""
    lim = make_limit_parameters(3.5, 5)
    sc = make_scaling(100, 3.5)
    seq = build_degree_sequence(sc, lim, 5, DEFAULT_BULK_WHITE, 909, DEFAULT_BULK_BLACK)
    g = sample_white_matching(seq, 910)
    reps = 10_000
    pvals = []
    for k, s in enumerate((0.1, 1.0)):
        rng = stream_gen(911, k)
        dyn = np.empty(reps)
        stat = np.empty(reps)
        p_keep = 1.0 - np.exp(-s)
        for r in range(reps):
            dyn[r] = run_dynamic(g, s, rng).component_sizes()[0]
            gp = percolate_black(sample_black_matching(g, rng), p_keep, rng)
            sizes, *_ = component_table(gp)
            stat[r] = sizes[0]
        p = ks_2samp(dyn, stat).pvalue
        pvals.append(p)
        assert p > 1e-3, (s, p)
    _report(9, f"dynamic = static percolation law, p = {pvals[0]:.3f} (s=0.1), {pvals[1]:.3f} (s=1)")


def test_c10_q_trajectory():
    """n = 1e4: mean Q(t)/n within 3 sigma/sqrt(reps) of (Q(0)/n) e^{-t} at
    t = 1; sup-deviation exceedance of delta_n = n^{-0.4} below the bound
    2 gamma T / (delta_n^2 n c_n) + 4 sigma at T = 1."""
    lim = make_limit_parameters(3.5, 10)
    sc = make_scaling(10_000, 3.5)
    seq = build_degree_sequence(sc, lim, 10, DEFAULT_BULK_WHITE, 1001, DEFAULT_BULK_BLACK)
    g = sample_white_matching(seq, 1002)
    rep = q_trajectory_check(g, T=1.0, replicates=300, rng_seed=1003)
    assert rep["mean_ok"], rep
    assert rep["exceedance_ok"], rep
    _report(
        10,
        f"Q-trajectory: mean dev {abs(rep['mean_q_at_t'] - rep['mean_q_target']):.2e}, "
        f"exceedance {rep['exceedance_rate']:.4f} <= {rep['exceedance_bound']:.4f} + 4se",
    )


def test_c11_modified_process_equals_mcmw():
    """run_modified largest component vs mcmw_graphical at matched time
    s/(2 Q0 - 1): KS p > 1e-3 at 1e4 reps on two small graphs."""
    small = [
        (np.array([2, 2, 1, 1, 1, 1]), np.array([2, 1, 2, 1, 1, 1]), 1.0),
        (np.array([3, 2, 2, 1, 1, 1, 1, 1]), np.array([2, 2, 1, 1, 1, 1, 1, 1]), 1.5),
    ]
    reps = 10_000
    lim = make_limit_parameters(3.5, 2)
    pvals = []
    for k, (white, black, s) in enumerate(small):
        sc = make_scaling(white.size, 3.5)
        seq = DegreeSequence(white, black, sc, lim, np.zeros(white.size, bool))
        g = sample_white_matching(seq, 1100 + k)
        blocks = modified_block_view(g)
        q0 = g.black_owner.size // 2
        rng = stream_gen(1101, k)
        mod = np.array([run_modified(g, s, rng).component_sizes()[0] for _ in range(reps)])
        ref = mcmw_batch(blocks.mass, blocks.weight, s / (2 * q0 - 1), reps, rng)[:, 0]
        p = ks_2samp(mod, ref).pvalue
        pvals.append(p)
        assert p > 1e-3, (k, p)
    _report(11, f"modified process = MCMW at matched time, p = {pvals[0]:.3f}, {pvals[1]:.3f}")


def test_c12_desk_scale_convergence_trends():
    """Limit laws as trends at (tau, lambda, mu) = (3.5, 0, 1): the KS
    statistic against the simulated limit is non-increasing across
    n in {1e3, 1e4, 1e5} in >= 2 of the 3 pairwise comparisons per
    theorem; tail masses reported (diagnostic)."""
    cfg = ExperimentConfig(
        n_grid=[1000, 10_000, 100_000],
        tau=3.5,
        lam=0.0,
        mu=1.0,
        replicates=600,
        replicates_by_n={1000: 2500, 10_000: 1500, 100_000: 600},
        limit_replicates=4000,
        master_seed=7,
        K_max=15,
        levy_horizon=40.0,
    )
    out16 = theorem_1_6_experiment(cfg)
    assert out16["trend"]["ok"], out16["size_stats"]
    ks16 = [f"{out16['size_stats'][n]:.4f}" for n in cfg.n_grid]
    tails16 = [f"{rec['tail_mass']:.3f}" for rec in out16["records"]]

    out17 = theorem_1_7_experiment(cfg)
    assert out17["trend"]["ok"], out17["size_stats"]
    ks17 = [f"{out17['size_stats'][n]:.4f}" for n in cfg.n_grid]
    fracs = [f"{rec['giant_fraction']:.3f}" for rec in out17["records"]]

    _report(12, f"thm16 KS {ks16} non-increasing; tail mass {tails16}")
    if out17["ks_saturated"]:
        print(
            "              thm17 KS saturated at 1.0 for all n (the percolated system "
            "sits beyond its own scaling window at desk scale; contamination decays "
            f"like 1/c_n) - giant fraction {fracs} is the informative trend"
            f" (decreasing: {out17['giant_fraction_decreasing']})"
        )
    _report(12, f"thm17 KS {ks17} non-increasing per the stated rule")


def test_c13_determinism_across_threads(tmp_path):
    """Identical config and seed give byte-identical outputs at 1 and 8
    threads."""
    from hcmsim.cli import EXIT_OK, main

    outs = {}
    for threads in (1, 8):
        out_dir = tmp_path / f"t{threads}"
        cfg = tmp_path / f"d{threads}.cfg"
        cfg.write_text(
            "experiment=thm16\nn_grid=200,300\nreplicates=30\nlimit_replicates=40\n"
            f"master_seed=13\nK_max=5\nthreads={threads}\nout_dir={out_dir}\n"
        )
        assert main(["--config", str(cfg)]) == EXIT_OK
        outs[threads] = {
            p.name: p.read_bytes() for p in sorted(out_dir.iterdir()) if p.name != "manifest.json"
        }
    assert outs[1] == outs[8]
    assert outs[1], "expected output files"
    _report(13, "byte-identical CSV/JSON outputs at 1 and 8 threads")
