"""Allocator constructions: select-and-flip and the divisive-inhibition network.

Both map {0,1}^n -> {0,1}^n.  Select-and-flip picks a uniform 2*r_n-subset
of coordinates, XORs each with an independent fair coin, and zeroes the
rest; it is 1-Lipschitz by construction.  The neural allocator is a
three-layer feed-forward network with sparse random +/- synapses and
divisive thresholds: a neuron fires iff its positive drive P exceeds
C * (P + N), i.e. (1 - C) * P - C * N > 0 strictly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from ._kernels import accumulate_drive, column_edges
from .core import BitVector, SeedPath
from .errors import UsageError


@dataclass
class SmaParams:
    """Allocator quality parameters and (optional) capacity.

    delta: stability slack; the output weight must land in the open interval
        ((1-delta)*r_n, (1+delta)*r_n).
    mu: Lipschitz factor for continuity.
    kappa: minimum input density for which the guarantees are claimed.
    a_n / b_n: orthogonality gaps; inputs farther than a_n must map to
        outputs farther than b_n.
    r_n: target output weight.
    capacity: max item-set size, if known.
    """

    delta: float
    mu: float
    kappa: float
    a_n: int
    b_n: int
    r_n: int
    capacity: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.delta < 1.0:
            raise UsageError(f"delta must be in [0, 1), got {self.delta}")
        if not 0.0 <= self.kappa < 1.0:
            raise UsageError(f"kappa must be in [0, 1), got {self.kappa}")
        if self.mu < 0:
            raise UsageError("mu must be nonnegative")
        if self.r_n <= 0 or self.a_n <= 0 or self.b_n <= 0:
            raise UsageError("a_n, b_n, r_n must be positive")
        if self.b_n > 2 * self.r_n * (1 + self.delta):
            raise UsageError("b_n cannot exceed 2*r_n*(1+delta): outputs of "
                             "weight ~r_n cannot differ by more")


# ---------------------------------------------------------------------------
# select-and-flip
# ---------------------------------------------------------------------------

@dataclass
class SelectFlipAllocator:
    """A sampled 2*r_n-subset of coordinates plus per-coordinate flip bits."""

    n: int
    selected: np.ndarray   # distinct indices, length 2*r_n
    flips: np.ndarray      # 0/1, length 2*r_n

    @property
    def r_n(self):
        return len(self.selected) // 2

    def apply(self, x: BitVector) -> BitVector:
        return apply_select_flip(self, x)


def sample_select_flip(n: int, r_n: int, seed: SeedPath) -> SelectFlipAllocator:
    """Uniform 2*r_n-subset of {0..n-1} plus independent fair flip bits."""
    if 2 * r_n > n:
        raise UsageError(f"need 2*r_n <= n, got r_n={r_n}, n={n}")
    if r_n <= 0:
        raise UsageError("r_n must be positive")
    rng = seed.generator()
    selected = rng.choice(n, size=2 * r_n, replace=False).astype(np.int64)
    flips = rng.integers(0, 2, size=2 * r_n, dtype=np.uint8)
    return SelectFlipAllocator(n=n, selected=selected, flips=flips)


def apply_select_flip(h: SelectFlipAllocator, x: BitVector) -> BitVector:
    """Output bit at selected index i_j is flips_j XOR x_{i_j}; zero elsewhere."""
    if x.n != h.n:
        raise UsageError(f"length mismatch: input {x.n}, allocator {h.n}")
    vals = h.flips ^ x.to_array()[h.selected]
    return BitVector.from_indices(h.n, h.selected[vals == 1])


# ---------------------------------------------------------------------------
# neural allocator
# ---------------------------------------------------------------------------

@dataclass
class NetworkParams:
    """Derived network parameters for a target output weight.

    s is the standardized threshold offset Phi^{-1}(r_n/n) * sqrt(2/(n p));
    c2 = 1/2 - s / (2 * sqrt(2 - s^2)) is the second divisive threshold, and
    mu_n = z0 * r_n * s0^{-1/4} * n^{-(1+gamma)/4} * (log n)^2 the
    continuity factor (z0 is a configurable absolute constant).
    """

    s: float
    c2: float
    mu_n: float
    z0: float


def compute_network_params(n, p, r_n, s0=0.05, gamma=None, z0=1.0) -> NetworkParams:
    """Second-layer threshold and continuity factor for a target weight r_n."""
    if not 0 < r_n < n:
        raise UsageError(f"need 0 < r_n < n, got r_n={r_n}, n={n}")
    if p <= 0 or n * p < 1:
        raise UsageError(f"need p > 0 and n*p >= 1, got p={p}")
    if gamma is None:
        gamma = -math.log(p) / math.log(n)   # p = n^-gamma
    s = float(ndtri(r_n / n)) * math.sqrt(2.0 / (n * p))
    if s * s >= 2.0:
        raise UsageError(f"threshold formula needs |s| < sqrt(2), got s={s:.4g}; "
                         "increase n*p or move r_n/n toward 1/2")
    c2 = 0.5 - s / (2.0 * math.sqrt(2.0 - s * s))
    mu_n = z0 * r_n * s0 ** -0.25 * n ** (-(1 + gamma) / 4) * math.log(n) ** 2
    return NetworkParams(s=s, c2=c2, mu_n=mu_n, z0=z0)


def _fire(pos_drive, neg_drive, c) -> np.ndarray:
    # divisive rule P/(P+N) > c as the equivalent linear rule; ties and
    # zero-drive neurons do not fire
    return ((1.0 - c) * pos_drive - c * neg_drive) > 0.0


@dataclass
class NeuralAllocator:
    """Three-layer random network with divisive inhibition.

    Each edge between consecutive layers exists with probability 2p and is
    positive or inhibitory with probability p each.  Connectivity is
    regenerated lazily per source column from the layer seeds, so an
    allocator is a few integers, not a matrix.
    """

    n: int
    p: float
    c1: float
    c2: float
    layer1_seed: SeedPath
    layer2_seed: SeedPath
    gamma: float | None = None

    def __post_init__(self):
        if not 0.0 < 2 * self.p <= 1.0:
            raise UsageError(f"need 0 < 2p <= 1, got p={self.p}")
        for c in (self.c1, self.c2):
            if not 0.0 < c < 1.0:
                raise UsageError(f"thresholds must be in (0, 1), got {c}")
        self._states = (np.uint64(self.layer1_seed.state64()),
                        np.uint64(self.layer2_seed.state64()))

    # -- connectivity queries ----------------------------------------------

    def layer_edges(self, layer: int, source: int):
        """(targets, signs) of one source column in the given layer (1 or 2)."""
        state = self._layer_state(layer)
        targets = np.empty(self.n, dtype=np.int64)
        signs = np.empty(self.n, dtype=np.int8)
        count = column_edges(state, self.n, 2 * self.p, source, targets, signs)
        return targets[:count].copy(), signs[:count].copy()

    def synapse_sign(self, layer: int, source: int, target: int) -> int:
        """+1, -1 or 0; pure function of the layer seed."""
        targets, signs = self.layer_edges(layer, source)
        hit = np.searchsorted(targets, target)
        if hit < len(targets) and targets[hit] == target:
            return int(signs[hit])
        return 0

    def _layer_state(self, layer):
        if layer not in (1, 2):
            raise UsageError(f"layer must be 1 or 2, got {layer}")
        return self._states[layer - 1]

    # -- forward evaluation -------------------------------------------------

    def _drive(self, layer, cols, deltas=None, pos=None, neg=None):
        if pos is None:
            pos = np.zeros(self.n, dtype=np.int64)
            neg = np.zeros(self.n, dtype=np.int64)
        if deltas is None:
            deltas = np.ones(len(cols), dtype=np.int64)
        accumulate_drive(self._layer_state(layer), self.n, 2 * self.p,
                         np.asarray(cols, dtype=np.int64), deltas, pos, neg)
        return pos, neg

    def layer_forward(self, layer: int, x: BitVector, c: float) -> BitVector:
        """One layer of the network at threshold c."""
        if x.n != self.n:
            raise UsageError(f"length mismatch: input {x.n}, allocator {self.n}")
        pos, neg = self._drive(layer, x.active_indices())
        return BitVector.from_array(_fire(pos, neg, c))

    def forward(self, x: BitVector):
        """(middle, output) activations."""
        mid = self.layer_forward(1, x, self.c1)
        return mid, self.layer_forward(2, mid, self.c2)

    def apply(self, x: BitVector) -> BitVector:
        return self.forward(x)[1]

    def apply_pair(self, x: BitVector, y: BitVector):
        """(h(x), h(y)) computed with shared generation work.

        y's drive is x's drive plus the delta of the toggled columns, layer
        by layer; for nearby inputs this is far cheaper than two full passes
        and provably identical to them.
        """
        if x.n != self.n or y.n != self.n:
            raise UsageError("length mismatch")
        pos_x, neg_x = self._drive(1, x.active_indices())
        mid_x = _fire(pos_x, neg_x, self.c1)

        xa, ya = x.to_array(), y.to_array()
        toggled = np.flatnonzero(xa != ya).astype(np.int64)
        deltas = np.where(ya[toggled] == 1, 1, -1).astype(np.int64)
        pos_y, neg_y = pos_x.copy(), neg_x.copy()
        self._drive(1, toggled, deltas, pos_y, neg_y)
        mid_y = _fire(pos_y, neg_y, self.c1)

        pos2_x, neg2_x = self._drive(2, np.flatnonzero(mid_x).astype(np.int64))
        out_x = _fire(pos2_x, neg2_x, self.c2)

        mid_toggled = np.flatnonzero(mid_x != mid_y).astype(np.int64)
        mid_deltas = np.where(mid_y[mid_toggled], 1, -1).astype(np.int64)
        pos2_y, neg2_y = pos2_x.copy(), neg2_x.copy()
        self._drive(2, mid_toggled, mid_deltas, pos2_y, neg2_y)
        out_y = _fire(pos2_y, neg2_y, self.c2)

        return BitVector.from_array(out_x), BitVector.from_array(out_y)


def sample_neural(n, p, c1, c2, seed: SeedPath, gamma=None) -> NeuralAllocator:
    """Fix the two layer seeds; connectivity stays lazy and pure."""
    return NeuralAllocator(n=n, p=p, c1=c1, c2=c2,
                           layer1_seed=seed.child("layer", 1),
                           layer2_seed=seed.child("layer", 2),
                           gamma=gamma)


def layer_forward(h: NeuralAllocator, layer: int, x: BitVector, c: float) -> BitVector:
    return h.layer_forward(layer, x, c)


def apply_neural(h: NeuralAllocator, x: BitVector) -> BitVector:
    return h.apply(x)
