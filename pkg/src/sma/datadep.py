"""Data-dependent allocation: search for a map with guaranteed separation.

Given a concrete item set whose elements are pairwise far apart, find an
assignment of each item to a weight-r_n output so that all assigned outputs
are pairwise more than b_n apart.  Placement is greedy and incremental:
each image is drawn uniformly from the weight-r_n slice and redrawn while it
lands too close to an already-placed image.  (One-shot resampling of the
whole map succeeds exponentially more rarely; the per-item uniform marginal
is unchanged.)

The Lipschitz extension of a found map to the whole cube is non-constructive
and not implemented; a map at input gap a_n admits an extension with
Lipschitz constant 8 * r_n / a_n, which we report but cannot build.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .bounds import log_binom
from .core import BitVector, SeedPath, hamming_distance
from .errors import SearchFailure, UsageError


@dataclass
class InputSet:
    """Distinct items of equal length, with the minimum pairwise distance cached."""

    n: int
    items: list
    min_pairwise_distance: int = field(init=False)

    def __post_init__(self):
        if len(self.items) < 1:
            raise UsageError("input set must be nonempty")
        for item in self.items:
            if item.n != self.n:
                raise UsageError("all items must have the stated length")
        if len(set(self.items)) != len(self.items):
            raise UsageError("items must be distinct")
        self.min_pairwise_distance = min(
            (hamming_distance(a, b)
             for i, a in enumerate(self.items) for b in self.items[i + 1:]),
            default=self.n)

    def __len__(self):
        return len(self.items)


@dataclass
class OrthogonalMap:
    """Per-item images of weight exactly r_n, pairwise more than b_n apart."""

    assignments: list
    attempts_used: int


def lipschitz_extension_constant(r_n, a_n):
    """Reported constant of the (non-constructive) extension to the full cube."""
    return 8 * r_n / a_n


def pair_collision_log_prob(n, r_n, b_n):
    """Exact log Pr{d_H(u, v) <= b_n} for independent uniform weight-r_n u, v.

    Two weight-r_n vectors at distance 2k differ by moving k ones; summing
    C(r_n, k) C(n - r_n, k) / C(n, r_n) over k <= b_n/2 gives the closed
    form used by the existence argument.
    """
    k = np.arange(0, int(b_n // 2) + 1)
    terms = log_binom(r_n, k) + log_binom(n - r_n, k) - log_binom(n, r_n)
    return float(logsumexp(terms))


def search_orthogonal_map(s: InputSet, r_n, b_n, max_attempts, seed: SeedPath) -> OrthogonalMap:
    """Greedy rejection-sampling search for a separated assignment.

    Raises SearchFailure (carrying the best partial size) once the total
    draw budget is exhausted, which signals parameters above the existence
    threshold or plain bad luck.
    """
    if b_n > 2 * r_n:
        raise UsageError(f"need b_n <= 2*r_n, got b_n={b_n}, r_n={r_n}")
    if r_n > s.n:
        raise UsageError("r_n cannot exceed the vector length")
    rng = seed.generator()
    placed: list[BitVector] = []
    attempts = 0
    for _ in s.items:
        while True:
            if attempts >= max_attempts:
                raise SearchFailure(
                    f"placed {len(placed)}/{len(s)} items in {attempts} attempts",
                    placed=len(placed), attempts=attempts)
            attempts += 1
            image = BitVector.from_indices(s.n, rng.choice(s.n, size=r_n, replace=False))
            if all(hamming_distance(image, q) > b_n for q in placed):
                placed.append(image)
                break
    return OrthogonalMap(assignments=placed, attempts_used=attempts)


def verify_map(m: OrthogonalMap, s: InputSet, r_n, b_n):
    """Independently recheck every weight and pairwise-gap constraint.

    Returns (ok, violations); each violation is a human-readable string.
    """
    if len(m.assignments) != len(s):
        raise UsageError("assignment count does not match the input set")
    violations = []
    for i, image in enumerate(m.assignments):
        if image.weight != r_n:
            violations.append(f"item {i}: image weight {image.weight} != {r_n}")
    for i, a in enumerate(m.assignments):
        for j in range(i + 1, len(m.assignments)):
            d = hamming_distance(a, m.assignments[j])
            if d <= b_n:  # strict > required
                violations.append(f"pair ({i}, {j}): output distance {d} <= {b_n}")
    return len(violations) == 0, violations
