"""Small-scale version of the two headline simulation figures.

Full-scale runs (n = 100000) go through the CLI presets:

    sma stability --preset paper-fig1a --out runs/fig1a
    sma expansion --preset paper-fig1b --out runs/fig1b

This script uses n = 5000 so it finishes in seconds; the qualitative shape
(flat density bands, expansion rate falling with distance) is already
visible at this size.
"""

from sma.mc import ExperimentConfig, expansion_curve, stability_curve

cfg = ExperimentConfig(allocator_kind="neural", n=5000, p=0.01, c1=0.5,
                       c2=0.57, trials=5, master_seed=11,
                       density_grid=(0.05, 0.15, 0.25, 0.35, 0.5),
                       distance_grid=(1, 10, 100))

print("density bands (middle / output layer):")
for row in stability_curve(cfg):
    print(f"  input {row.input_density:.2f}: "
          f"middle {row.layer2_density.mean:.4f} +- {row.layer2_density.std_error:.4f}, "
          f"output {row.output_density.mean:.4f} +- {row.output_density.std_error:.4f}")

print("\nexpansion rate d_H(h(x), h(y)) / L:")
for row in expansion_curve(cfg):
    print(f"  input {row.input_density:.2f}, L={row.distance:3d}: "
          f"{row.expansion_rate.mean:8.2f} +- {row.expansion_rate.std_error:.2f}")
