"""Walk through both allocator constructions on a small instance.

Shows: select-and-flip never increases Hamming distance, its output weight
is Binomial(2*r_n, 1/2); the neural allocator maps a wide range of input
densities to a narrow band of output densities.
"""

import numpy as np

from sma import (SeedPath, hamming_distance, random_bitvector, sample_neural,
                 sample_select_flip)

seed = SeedPath(7)
n, r_n = 4000, 200

x = random_bitvector(n, 0.3, seed.child("x"))
print(f"input: n={n}, |x|={x.weight}")

# --- select-and-flip -------------------------------------------------------
h = sample_select_flip(n, r_n, seed.child("sf"))
hx = h.apply(x)
print(f"\nselect-and-flip: |h(x)| = {hx.weight} (expect ~{r_n}, "
      f"Binomial({2 * r_n}, 1/2))")

y = x.flip(seed.child("perturb").generator().choice(n, size=25, replace=False))
print(f"d_H(x, y) = {hamming_distance(x, y)}, "
      f"d_H(h(x), h(y)) = {hamming_distance(hx, h.apply(y))}  (never larger)")

weights = [sample_select_flip(n, r_n, seed.child("w", i)).apply(x).weight
           for i in range(2000)]
print(f"|h(x)| over 2000 draws: mean {np.mean(weights):.1f}, "
      f"sd {np.std(weights):.1f} (Binomial sd {np.sqrt(r_n / 2):.1f})")

# --- divisive-inhibition network -------------------------------------------
net = sample_neural(n, p=0.01, c1=0.5, c2=0.57, seed=seed.child("net"))
print("\nneural allocator, input density sweep:")
for density in (0.1, 0.2, 0.3, 0.4, 0.5):
    xi = random_bitvector(n, density, seed.child("in", int(density * 100)))
    mid, out = net.forward(xi)
    print(f"  input {density:.2f} -> middle {mid.weight / n:.3f}, "
          f"output {out.weight / n:.3f}")
