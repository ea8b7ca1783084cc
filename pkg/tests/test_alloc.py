import math

import numpy as np
import pytest

from sma.alloc import (NeuralAllocator, SelectFlipAllocator, SmaParams,
                       apply_select_flip, compute_network_params, sample_neural,
                       sample_select_flip)
from sma.core import BitVector, SeedPath, hamming_distance, random_bitvector
from sma.errors import UsageError

SEED = SeedPath(2024)


class TestSmaParams:
    def test_valid(self):
        p = SmaParams(delta=0.1, mu=2.0, kappa=0.05, a_n=100, b_n=50, r_n=100)
        assert p.capacity is None

    def test_output_gap_consistency(self):
        # outputs of weight ~r_n cannot be farther than 2*r_n*(1+delta) apart
        with pytest.raises(UsageError):
            SmaParams(delta=0.1, mu=1.0, kappa=0.0, a_n=10, b_n=221, r_n=100)

    @pytest.mark.parametrize("bad", [
        dict(delta=1.0), dict(delta=-0.1), dict(kappa=1.0), dict(mu=-1.0),
        dict(r_n=0), dict(a_n=0), dict(b_n=0)])
    def test_range_validation(self, bad):
        kwargs = dict(delta=0.1, mu=1.0, kappa=0.0, a_n=10, b_n=20, r_n=100)
        kwargs.update(bad)
        with pytest.raises(UsageError):
            SmaParams(**kwargs)


class TestSelectFlipSampling:
    def test_half_weight_selects_everything(self):
        h = sample_select_flip(10, 5, SEED.child("full"))
        assert sorted(h.selected) == list(range(10))

    def test_distinct_and_deterministic(self):
        a = sample_select_flip(10000, 500, SEED.child("d"))
        b = sample_select_flip(10000, 500, SEED.child("d"))
        assert len(set(a.selected)) == 1000
        assert np.array_equal(a.selected, b.selected)
        assert np.array_equal(a.flips, b.flips)

    def test_too_large(self):
        with pytest.raises(UsageError):
            sample_select_flip(10, 6, SEED)

    def test_inclusion_frequency(self):
        # each index lands in the selected set with probability 2*r_n/n
        n, r_n, reps = 20, 2, 10000
        counts = np.zeros(n)
        for i in range(reps):
            counts[sample_select_flip(n, r_n, SEED.child("inc", i)).selected] += 1
        freq = counts / reps
        se = math.sqrt(0.2 * 0.8 / reps)
        assert np.all(np.abs(freq - 2 * r_n / n) < 3 * se + 1e-12)


class TestSelectFlipApply:
    def test_zero_in_zero_out_without_flips(self):
        h = SelectFlipAllocator(n=10, selected=np.arange(4, dtype=np.int64),
                                flips=np.zeros(4, dtype=np.uint8))
        assert h.apply(BitVector.zeros(10)).weight == 0

    def test_output_support_and_weight_cap(self):
        n, r_n = 500, 40
        h = sample_select_flip(n, r_n, SEED.child("sup"))
        hx = h.apply(random_bitvector(n, 0.5, SEED.child("sx")))
        assert hx.weight <= 2 * r_n
        assert set(hx.active_indices()) <= set(h.selected)

    def test_length_mismatch(self):
        h = sample_select_flip(100, 10, SEED)
        with pytest.raises(UsageError):
            h.apply(BitVector.zeros(99))

    def test_distance_never_grows(self):
        # flips cancel: d_H(h(x), h(y)) counts differing selected bits only
        n, r_n = 300, 30
        for i in range(50):
            h = sample_select_flip(n, r_n, SEED.child("cont", i))
            x = random_bitvector(n, 0.4, SEED.child("cx", i))
            y = random_bitvector(n, 0.4, SEED.child("cy", i))
            d_out = hamming_distance(h.apply(x), h.apply(y))
            expected = int((x.to_array()[h.selected] != y.to_array()[h.selected]).sum())
            assert d_out == expected
            assert d_out <= hamming_distance(x, y)

    def test_weight_is_binomial(self):
        n, r_n, reps = 2000, 100, 20000
        x = random_bitvector(n, 0.3, SEED.child("bx"))
        from sma.mc import selectflip_weight_samples
        w = selectflip_weight_samples(n, r_n, x, reps, SEED.child("bw"))
        se = w.std(ddof=1) / math.sqrt(reps)
        assert abs(w.mean() - r_n) < 3 * se
        # Binomial(2r, 1/2) variance is r/2
        assert abs(w.var(ddof=1) / (r_n / 2) - 1) < 0.05


class TestNetworkParams:
    def test_half_density_threshold(self):
        params = compute_network_params(1000, 0.01, 500)
        assert params.s == 0.0
        assert params.c2 == 0.5

    def test_threshold_formula(self):
        params = compute_network_params(100000, 2.5e-3, 1500, gamma=0.92)
        # recompute from scratch with an independent quantile evaluation
        from scipy.stats import norm
        s = norm.ppf(0.015) * math.sqrt(2 / (100000 * 2.5e-3))
        assert abs(params.s - s) < 1e-12
        assert abs(params.c2 - (0.5 - s / (2 * math.sqrt(2 - s * s)))) < 1e-12

    def test_continuity_factor_formula(self):
        n, r_n, s0, gamma = 100000, 1500, 0.05, 0.92
        params = compute_network_params(n, 2.5e-3, r_n, s0=s0, gamma=gamma)
        direct = r_n * s0 ** -0.25 * n ** (-(1 + gamma) / 4) * math.log(n) ** 2
        assert abs(params.mu_n - direct) < 1e-9 * direct

    def test_degenerate_density(self):
        with pytest.raises(UsageError):
            compute_network_params(100, 0.1, 100)
        with pytest.raises(UsageError):
            compute_network_params(100, 0.1, 0)


class TestNeuralConnectivity:
    def test_fully_connected_at_max_p(self):
        h = sample_neural(50, 0.5, 0.5, 0.5, SEED.child("fc"))
        for col in range(5):
            targets, signs = h.layer_edges(1, col)
            assert len(targets) == 50
            assert set(np.unique(signs)) <= {-1, 1}

    def test_sign_query_pure(self):
        h = sample_neural(500, 0.01, 0.5, 0.57, SEED.child("pure"))
        probes = [(1, 3, 77), (1, 3, 78), (2, 0, 0), (2, 499, 499)]
        first = [h.synapse_sign(*q) for q in probes]
        assert [h.synapse_sign(*q) for q in probes] == first
        h2 = sample_neural(500, 0.01, 0.5, 0.57, SEED.child("pure"))
        assert [h2.synapse_sign(*q) for q in probes] == first

    def test_layers_differ(self):
        h = sample_neural(2000, 0.01, 0.5, 0.57, SEED.child("ld"))
        t1, _ = h.layer_edges(1, 0)
        t2, _ = h.layer_edges(2, 0)
        assert not np.array_equal(t1, t2)

    def test_edge_frequency_and_sign_balance(self):
        # 100 columns x 10^4 targets = 10^6 sampled (source, target) pairs
        n, p = 10000, 0.01
        h = sample_neural(n, p, 0.5, 0.57, SEED.child("freq"))
        edges = 0
        positives = 0
        for col in range(100):
            _, signs = h.layer_edges(1, col)
            edges += len(signs)
            positives += int((signs > 0).sum())
        pairs = 100 * n
        se_edge = math.sqrt(2 * p * (1 - 2 * p) / pairs)
        assert abs(edges / pairs - 2 * p) < 3 * se_edge
        se_sign = math.sqrt(0.25 / edges)
        assert abs(positives / edges - 0.5) < 3 * se_sign

    def test_invalid_parameters(self):
        with pytest.raises(UsageError):
            sample_neural(100, 0.6, 0.5, 0.5, SEED)
        with pytest.raises(UsageError):
            sample_neural(100, 0.01, 0.0, 0.5, SEED)


def dense_signs(h: NeuralAllocator, layer: int) -> np.ndarray:
    """Reconstruct the full sign matrix (target x source) from column queries."""
    w = np.zeros((h.n, h.n), dtype=np.int8)
    for col in range(h.n):
        targets, signs = h.layer_edges(layer, col)
        w[targets, col] = signs
    return w


class TestLayerForward:
    def test_zero_input_never_fires(self):
        h = sample_neural(300, 0.02, 0.5, 0.57, SEED.child("z"))
        assert h.apply(BitVector.zeros(300)).weight == 0
        assert h.layer_forward(1, BitVector.zeros(300), 0.5).weight == 0

    def test_sign_rule_oracle_exhaustive(self):
        # at c = 1/2 a neuron fires iff sum of +/- weights over active inputs
        # is strictly positive; check bit-for-bit against the dense matrix on
        # all 2^10 inputs supported on a fixed 10-coordinate mask
        n = 64
        h = sample_neural(n, 0.05, 0.5, 0.5, SEED.child("oracle"))
        w = dense_signs(h, 1)
        mask = np.array([2, 5, 11, 17, 23, 31, 40, 47, 55, 63])
        for code in range(1024):
            bits = np.zeros(n, dtype=np.uint8)
            bits[mask] = [(code >> i) & 1 for i in range(10)]
            x = BitVector.from_array(bits)
            expected = (w @ bits.astype(np.int64)) > 0
            got = h.layer_forward(1, x, 0.5).to_array().astype(bool)
            assert np.array_equal(got, expected)

    def test_single_positive_input_fires_above_half(self):
        h = sample_neural(400, 0.02, 0.5, 0.57, SEED.child("one"))
        targets, signs = h.layer_edges(1, 7)
        pos_targets = targets[signs > 0]
        assert len(pos_targets) > 0
        out = h.layer_forward(1, BitVector.from_indices(400, [7]), 0.57)
        # (1-c)*1 - c*0 > 0 for any c < 1: every positively-wired target fires
        assert set(pos_targets) <= set(out.active_indices())
        assert set(out.active_indices()).isdisjoint(targets[signs < 0])


class TestApplyNeural:
    def test_deterministic_across_runs(self):
        n = 3000
        x = random_bitvector(n, 0.3, SEED.child("dx"))
        outs = {sample_neural(n, 0.01, 0.5, 0.57, SEED.child("da")).apply(x)
                for _ in range(10)}
        assert len(outs) == 1

    def test_pair_matches_two_full_passes(self):
        n = 3000
        h = sample_neural(n, 0.01, 0.5, 0.57, SEED.child("pp"))
        x = random_bitvector(n, 0.3, SEED.child("px"))
        y = x.flip(SEED.child("pf").generator().choice(n, size=40, replace=False))
        hx, hy = h.apply_pair(x, y)
        assert hx == h.apply(x)
        assert hy == h.apply(y)

    def test_output_weight_binomial_across_seeds(self):
        # output bits are exchangeable, so |h(x)| is Binomial(n, q); the
        # empirical variance across allocator draws must stay near n*q*(1-q)
        n = 2000
        seed = SeedPath(123)
        x = random_bitvector(n, 0.3, seed.child("x"))
        w = np.array([sample_neural(n, 0.01, 0.5, 0.57, seed.child("a", i)).apply(x).weight
                      for i in range(400)])
        q = w.mean() / n
        ratio = w.var(ddof=1) / (n * q * (1 - q))
        assert 1 / 1.2 < ratio < 1.2
