"""Tour of the analytic bounds and their exact companions.

Each printed block pairs a closed-form value with the independent quantity
it bounds or approximates.
"""

import numpy as np

from sma import bounds

# capacity: entropy main term vs the exact log binomial-coefficient ratio
n, r, b = 2000, 200, 80
upper = bounds.capacity_upper_bound(n, r, b)
exact = bounds.exact_packing_log_ratio(n, r, b)
lower = bounds.datadep_capacity_lower(n, r, b)
print(f"packing capacity (log, nats) at n={n}, r={r}, b={b}:")
print(f"  entropy form      {upper:10.3f}")
print(f"  exact log-ratio   {exact:10.3f}  (rel gap {abs(upper - exact) / exact:.3%})")
print(f"  data-dependent    {lower:10.3f}  (existence threshold, always smaller)")

# sign-balance lemma: closed-form bound vs exact walk distribution
m, p = 400, 0.01
p_zero, p_one = bounds.lemma1_exact(m, p)
gap_bound, flip_bound = bounds.lemma12_bounds(m, p)
dist = bounds.lemma1_walk_distribution(m, p)
print(f"\ntrinomial walk, m={m}, p={p}:")
print(f"  Pr(S=0) exact {p_zero:.6f}  (walk DP {dist[m]:.6f})")
print(f"  sign-balance gap bound {gap_bound:.6f}, one-bit flip bound {flip_bound:.6f}")

# flip probabilities: overlap arccos form and the correlated-pair quadrature
print("\nsign-rule flip probabilities:")
for overlap in (1000, 900, 500, 0):
    val = bounds.lemma3_flip_prob(1000, 1000, overlap).value
    print(f"  overlap {overlap:4d}/1000 -> {val:.4f}")
for eta in (0.05, 0.1, 0.3):
    val = bounds.lemma4_flip_prob(100000, 0.5, 2.5e-3, eta)
    print(f"  disagreement eta={eta:.2f} -> {val:.4f} "
          f"(arccos(1-eta)/pi = {np.arccos(1 - eta) / np.pi:.4f})")

# network tail bounds at a scale where epsilon is feasible; the half-width
# shrinks slowly, so epsilon has to sit just above it for a nontrivial value
tb = bounds.theorem5_tail_bounds(n=10 ** 6, r_n=10 ** 4, s0=0.05, gamma=0.3,
                                 epsilon=0.17, t=4.0)
print(f"\nnetwork tail bounds at n=1e6: stability {tb.stability:.3e}, "
      f"continuity {tb.continuity:.3e}, orthogonality {tb.orthogonality:.3e}, "
      f"separation constant b {tb.b:.4f}")
