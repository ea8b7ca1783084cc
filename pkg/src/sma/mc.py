"""Monte Carlo harness: simulation curves, error estimates, lemma checks.

Every experiment is a pure function of (config, master seed): trial t of
experiment e draws from the seed path ("e", ...)/("trial", t), so results
are bit-identical across runs and across any parallel schedule.  Aggregation
uses numpy's pairwise summation, which is order-insensitive here because
samples are always collected in trial order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import bounds
from .alloc import sample_neural, sample_select_flip
from .core import BitVector, SeedPath, hamming_distance, random_bitvector, \
    random_pair_at_distance
from .errors import UsageError


@dataclass
class StatSummary:
    mean: float
    std_error: float
    count: int
    ci95_low: float
    ci95_high: float

    @classmethod
    def from_samples(cls, samples) -> "StatSummary":
        samples = np.asarray(samples, dtype=float)
        count = len(samples)
        mean = float(np.mean(samples))
        se = float(np.std(samples, ddof=1) / math.sqrt(count)) if count > 1 else 0.0
        return cls(mean=mean, std_error=se, count=count,
                   ci95_low=mean - 1.96 * se, ci95_high=mean + 1.96 * se)


@dataclass
class ExperimentConfig:
    """Reproducible description of a Monte Carlo run."""

    allocator_kind: str = "neural"          # "select_flip" | "neural"
    n: int = 1000
    trials: int = 10
    master_seed: int = 20240
    density_grid: tuple = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5)
    distance_grid: tuple = (1, 3, 10, 30, 100)
    # neural parameters
    p: float = 2.5e-3
    c1: float = 0.5
    c2: float = 0.57
    gamma: float | None = None
    # select-flip parameter
    r_n: int = 100
    # averaging mode: fresh allocator per trial by default; a fixed allocator
    # isolates input randomness from allocator randomness
    fixed_allocator: bool = False
    # capacity-probe continuity surrogate: sampled unit perturbations plus one
    # random perturbation at each far distance (the full cube is untestable)
    continuity_unit_samples: int = 32
    continuity_far_distances: tuple = (3, 10, 30, 100)
    output_path: str | None = None

    def __post_init__(self):
        if self.allocator_kind not in ("select_flip", "neural"):
            raise UsageError(f"unknown allocator kind {self.allocator_kind!r}")
        if self.trials < 1:
            raise UsageError("trials must be >= 1")
        if not self.density_grid:
            raise UsageError("density grid must be nonempty")

    def root_seed(self) -> SeedPath:
        return SeedPath(self.master_seed)


def _allocator(cfg: ExperimentConfig, seed: SeedPath):
    if cfg.allocator_kind == "neural":
        return sample_neural(cfg.n, cfg.p, cfg.c1, cfg.c2, seed, gamma=cfg.gamma)
    return sample_select_flip(cfg.n, cfg.r_n, seed)


def _alloc_seed(cfg, experiment_seed, trial):
    if cfg.fixed_allocator:
        return cfg.root_seed().child("allocator")
    return experiment_seed.child("trial", trial).child("allocator")


# ---------------------------------------------------------------------------
# simulation curves
# ---------------------------------------------------------------------------

class StabilityRow(NamedTuple):
    input_density: float
    layer2_density: StatSummary
    output_density: StatSummary


class ExpansionRow(NamedTuple):
    input_density: float
    distance: int
    expansion_rate: StatSummary


def stability_curve(cfg: ExperimentConfig):
    """Mean activation density of the middle and output layers per input density."""
    if cfg.allocator_kind != "neural":
        raise UsageError("stability_curve requires the neural allocator")
    rows = []
    for di, density in enumerate(cfg.density_grid):
        root = cfg.root_seed().child("stability", di)
        mid_d = np.empty(cfg.trials)
        out_d = np.empty(cfg.trials)
        for t in range(cfg.trials):
            alloc = _allocator(cfg, _alloc_seed(cfg, root, t))
            x = random_bitvector(cfg.n, density, root.child("trial", t).child("input"))
            mid, out = alloc.forward(x)
            mid_d[t] = mid.weight / cfg.n
            out_d[t] = out.weight / cfg.n
        rows.append(StabilityRow(density, StatSummary.from_samples(mid_d),
                                 StatSummary.from_samples(out_d)))
    return rows


def expansion_curve(cfg: ExperimentConfig):
    """Mean expansion rate d_H(h(x), h(y)) / L per (input density, L)."""
    if cfg.allocator_kind != "neural":
        raise UsageError("expansion_curve requires the neural allocator")
    if any(L < 1 or L > cfg.n for L in cfg.distance_grid):
        raise UsageError("distance grid entries must be in 1..n")
    rows = []
    for di, density in enumerate(cfg.density_grid):
        for L in cfg.distance_grid:
            root = cfg.root_seed().child("expansion", di).child("distance", L)
            rates = np.empty(cfg.trials)
            for t in range(cfg.trials):
                alloc = _allocator(cfg, _alloc_seed(cfg, root, t))
                x, y = random_pair_at_distance(
                    cfg.n, density, L, root.child("trial", t).child("pair"))
                hx, hy = alloc.apply_pair(x, y)
                rates[t] = hamming_distance(hx, hy) / L
            rows.append(ExpansionRow(density, L, StatSummary.from_samples(rates)))
    return rows


# ---------------------------------------------------------------------------
# error probabilities and capacity probes
# ---------------------------------------------------------------------------

class PairwiseErrors(NamedTuple):
    stability: StatSummary
    continuity: StatSummary
    orthogonality: StatSummary


def _apply_pair(cfg, alloc, x, y):
    if cfg.allocator_kind == "neural":
        return alloc.apply_pair(x, y)
    return alloc.apply(x), alloc.apply(y)


def _stability_fails(params, weight):
    # Definition uses the open interval: landing on an endpoint is a failure
    return not ((1 - params.delta) * params.r_n < weight < (1 + params.delta) * params.r_n)


def pairwise_error_estimate(cfg: ExperimentConfig, params, x: BitVector, y: BitVector):
    """Frequencies of the three per-pair failure events over allocator draws.

    stability: |h(x)| leaves the open interval around r_n.
    continuity: d_H(h(x), h(y)) > mu * d_H(x, y).
    orthogonality: the inputs are farther than a_n apart but the outputs are
    not farther than b_n (counted only when the input gap condition holds).
    """
    root = cfg.root_seed().child("pairwise")
    d_in = hamming_distance(x, y)
    stab = np.empty(cfg.trials)
    cont = np.empty(cfg.trials)
    orth = np.empty(cfg.trials)
    for t in range(cfg.trials):
        alloc = _allocator(cfg, _alloc_seed(cfg, root, t))
        hx, hy = _apply_pair(cfg, alloc, x, y)
        d_out = hamming_distance(hx, hy)
        stab[t] = _stability_fails(params, hx.weight)
        cont[t] = d_out > params.mu * d_in
        orth[t] = (d_in > params.a_n) and (d_out <= params.b_n)
    return PairwiseErrors(StatSummary.from_samples(stab),
                          StatSummary.from_samples(cont),
                          StatSummary.from_samples(orth))


def _sample_far_apart_items(cfg, params, k, seed):
    """k items, densities cycled from the grid, pairwise farther than a_n."""
    items = []
    budget = 200 * k
    for attempt in range(budget):
        density = cfg.density_grid[len(items) % len(cfg.density_grid)]
        cand = random_bitvector(cfg.n, density, seed.child("item", attempt))
        if all(hamming_distance(cand, q) > params.a_n for q in items):
            items.append(cand)
            if len(items) == k:
                return items
    raise UsageError(f"could not sample {k} items pairwise > {params.a_n} apart "
                     f"within {budget} draws; loosen a_n or the density grid")


def _item_continuity_fails(cfg, alloc, x, hx, params, seed):
    """Sampled surrogate for the all-perturbations continuity quantifier."""
    rng = seed.generator()
    unit = min(cfg.continuity_unit_samples, cfg.n)
    positions = rng.choice(cfg.n, size=unit, replace=False)
    distances = [1] * unit + [d for d in cfg.continuity_far_distances if d <= cfg.n]
    for k, d in enumerate(distances):
        pos = positions[k] if d == 1 else rng.choice(cfg.n, size=d, replace=False)
        y = x.flip(pos)
        _, hy = _apply_pair(cfg, alloc, x, y)
        if hamming_distance(hx, hy) > params.mu * d:
            return True
    return False


def capacity_probe(cfg: ExperimentConfig, params, k: int) -> StatSummary:
    """Frequency of any Definition-level failure over a k-item set.

    Per trial: sample k items pairwise farther than a_n, draw one allocator,
    and check stability for every item, orthogonality for every pair, and
    continuity against each item's sampled perturbation neighborhood.
    """
    if k < 2:
        raise UsageError("need k >= 2")
    root = cfg.root_seed().child("capacity", k)
    fails = np.empty(cfg.trials)
    for t in range(cfg.trials):
        tseed = root.child("trial", t)
        items = _sample_far_apart_items(cfg, params, k, tseed.child("items"))
        alloc = _allocator(cfg, _alloc_seed(cfg, root, t))
        images = [alloc.apply(x) for x in items]
        failed = any(_stability_fails(params, hx.weight) for hx in images)
        if not failed:
            failed = any(hamming_distance(images[i], images[j]) <= params.b_n
                         for i in range(k) for j in range(i + 1, k))
        if not failed:
            failed = any(
                _item_continuity_fails(cfg, alloc, x, hx, params,
                                       tseed.child("continuity", i))
                for i, (x, hx) in enumerate(zip(items, images)))
        fails[t] = failed
    return StatSummary.from_samples(fails)


# ---------------------------------------------------------------------------
# lemma checks
# ---------------------------------------------------------------------------

class LemmaCheck(NamedTuple):
    empirical: StatSummary
    analytic: float
    abs_gap: float
    analytic_is_bound: bool
    extras: dict


def _walk_sums(rng, m, p, trials):
    """Sums of m i.i.d. {+1, 0, -1}(p, 1-2p, p) steps, via trinomial counts."""
    counts = rng.multinomial(m, [p, p, 1 - 2 * p], size=trials)
    return counts[:, 0] - counts[:, 1]


def lemma_check(lemma_id: int, params: dict, trials: int, seed: SeedPath) -> LemmaCheck:
    """Simulate one lemma's exact probabilistic setup against its analytic form.

    1: sign-balance gap 1/2 - Pr{S > 0} vs its closed-form upper bound
       (extras carry the exact and empirical Pr{S = 0}).
    2: one-bit flip probability vs its closed-form upper bound.
    3: flip probability for overlapping supports vs (1/pi) arccos(correlation).
    4: flip probability for eta-correlated near-half-density pairs vs the
       Gaussian-limit quadrature value.
    """
    rng = seed.generator()
    if lemma_id == 1:
        m, p = params["m"], params["p"]
        s = _walk_sums(rng, m, p, trials)
        gap_bound, _ = bounds.lemma12_bounds(m, p)
        p_zero, _ = bounds.lemma1_exact(m, p)
        emp = StatSummary.from_samples(0.5 - (s > 0))
        zero_emp = StatSummary.from_samples(s == 0)
        return LemmaCheck(emp, gap_bound, abs(emp.mean - gap_bound), True,
                          {"p_zero_exact": p_zero, "p_zero_empirical": zero_emp})
    if lemma_id == 2:
        m, p = params["m"], params["p"]
        s = _walk_sums(rng, m, p, trials)
        step = rng.choice([1, -1, 0], p=[p, p, 1 - 2 * p], size=trials)
        # toggled bit goes 0 -> 1: the sign rule output changes iff the extra
        # step crosses the decision boundary
        flipped = ((step == 1) & (s == 0)) | ((step == -1) & (s == 1))
        _, flip_bound = bounds.lemma12_bounds(m, p)
        emp = StatSummary.from_samples(flipped)
        return LemmaCheck(emp, flip_bound, abs(emp.mean - flip_bound), True, {})
    if lemma_id == 3:
        wx, wy, wxy, p = params["wx"], params["wy"], params["wxy"], params["p"]
        shared = _walk_sums(rng, wxy, p, trials) if wxy else np.zeros(trials, dtype=int)
        only_x = _walk_sums(rng, wx - wxy, p, trials) if wx > wxy else 0
        only_y = _walk_sums(rng, wy - wxy, p, trials) if wy > wxy else 0
        flipped = ((shared + only_x) > 0) != ((shared + only_y) > 0)
        analytic = bounds.lemma3_flip_prob(wx, wy, wxy).value
        emp = StatSummary.from_samples(flipped)
        return LemmaCheck(emp, analytic, abs(emp.mean - analytic), False, {})
    if lemma_id == 4:
        n, c, p, eta = params["n"], params["c"], params["p"], params["eta"]
        # joint law of (weight class, coordinate pair): weights are
        # {1-c, -c, 0} w.p. (p, p, 1-2p); pairs are (1,1)/(1,0)/(0,1)/(0,0)
        # w.p. ((1-eta)/2, eta/2, eta/2, (1-eta)/2), independent of weights
        pw = np.array([p, p, 1 - 2 * p])
        pxy = np.array([(1 - eta) / 2, eta / 2, eta / 2, (1 - eta) / 2])
        cnt = rng.multinomial(n, np.outer(pw, pxy).ravel(), size=trials)
        cnt = cnt.reshape(trials, 3, 4)
        bx = (1 - c) * (cnt[:, 0, 0] + cnt[:, 0, 1]) - c * (cnt[:, 1, 0] + cnt[:, 1, 1])
        by = (1 - c) * (cnt[:, 0, 0] + cnt[:, 0, 2]) - c * (cnt[:, 1, 0] + cnt[:, 1, 2])
        flipped = (bx > 0) != (by > 0)
        analytic = bounds.lemma4_flip_prob(n, c, p, eta)
        emp = StatSummary.from_samples(flipped)
        return LemmaCheck(emp, analytic, abs(emp.mean - analytic), False, {})
    raise UsageError(f"unknown lemma id {lemma_id}")


# ---------------------------------------------------------------------------
# vectorized select-and-flip studies
# ---------------------------------------------------------------------------

def _selectflip_batches(n, r_n, trials, rng, chunk=1024):
    """Yield (selected, flips) batches; each row is a fresh allocator draw."""
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        selected = np.argpartition(rng.random((size, n)), 2 * r_n - 1, axis=1)[:, :2 * r_n]
        flips = rng.integers(0, 2, size=(size, 2 * r_n), dtype=np.uint8)
        yield selected, flips
        done += size


def selectflip_weight_samples(n, r_n, x: BitVector, trials, seed: SeedPath):
    """|h(x)| over fresh select-and-flip draws (vectorized batches)."""
    rng = seed.generator()
    xv = x.to_array()
    out = np.empty(trials, dtype=np.int64)
    done = 0
    for selected, flips in _selectflip_batches(n, r_n, trials, rng):
        vals = flips ^ xv[selected]
        out[done:done + len(selected)] = vals.sum(axis=1)
        done += len(selected)
    return out


def selectflip_pair_distance_samples(n, r_n, x, y, trials, seed: SeedPath):
    """d_H(h(x), h(y)) over fresh draws: differing bits among the selected."""
    rng = seed.generator()
    diff = x.to_array() ^ y.to_array()
    out = np.empty(trials, dtype=np.int64)
    done = 0
    for selected, _ in _selectflip_batches(n, r_n, trials, rng):
        out[done:done + len(selected)] = diff[selected].sum(axis=1)
        done += len(selected)
    return out


def selectflip_continuity_failures(n, r_n, trials, seed: SeedPath, density=0.5):
    """Count (h, x, y) triples with d_H(h(x), h(y)) > d_H(x, y); must be zero."""
    rng = seed.generator()
    failures = 0
    done = 0
    for selected, _ in _selectflip_batches(n, r_n, trials, rng):
        size = len(selected)
        xv = rng.random((size, n)) < density
        yv = rng.random((size, n)) < density
        diff = xv ^ yv
        d_out = np.take_along_axis(diff, selected, axis=1).sum(axis=1)
        failures += int(np.sum(d_out > diff.sum(axis=1)))
        done += size
    return failures
