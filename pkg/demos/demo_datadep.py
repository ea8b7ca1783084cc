"""Data-dependent allocation: place a concrete item set with guaranteed
pairwise output separation, then verify it independently."""

from sma import InputSet, SeedPath, random_bitvector, search_orthogonal_map, verify_map
from sma.datadep import lipschitz_extension_constant, pair_collision_log_prob

n, r_n, b_n, set_size = 300, 30, 14, 24
seed = SeedPath(3)

items = [random_bitvector(n, 0.5, seed.child("item", i)) for i in range(set_size)]
s = InputSet(n=n, items=items)
print(f"{set_size} items, min pairwise input distance {s.min_pairwise_distance}")

log_q = pair_collision_log_prob(n, r_n, b_n)
print(f"uniform-pair close-collision log-prob: {log_q:.3f} "
      f"(union bound over {set_size * (set_size - 1) // 2} pairs stays tiny)")

result = search_orthogonal_map(s, r_n, b_n, max_attempts=10000, seed=seed.child("search"))
ok, violations = verify_map(result, s, r_n, b_n)
print(f"search used {result.attempts_used} draws; verifier says ok={ok}")
assert ok, violations

gaps = [min(abs(a.weight - r_n) for a in result.assignments)]
print(f"all image weights exactly {r_n}: {all(a.weight == r_n for a in result.assignments)}")
print(f"reported Lipschitz extension constant 8*r_n/a_n at a_n={s.min_pairwise_distance}: "
      f"{lipschitz_extension_constant(r_n, s.min_pairwise_distance):.2f}")
