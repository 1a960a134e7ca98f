"""
Choosing constraint gates: how often a target escapes them, and how far
apart targets must be before sampling interval stops mattering.
"""

import numpy as np

from posettrack import ConstraintGates, ScenarioSpec, custody_loss_rate, generate_scenario, separability_curve

## A synthetic air picture
# Twelve targets wandering through a 300 km box at up to 250 m/s, with a
# little position noise and some missed samples.
spec = ScenarioSpec(n_targets=12, duration=3600, sample_interval=10, speed_max=250,
                    box=(300e3, 300e3, 2e3), noise_sigma=(150, 150, 20), dropout=0.1, seed=3)
ds = generate_scenario(spec)
print(len(ds), "detections")

## Loss of custody under the default gates
gates = ConstraintGates()
report = custody_loss_rate(ds, gates)
print("mean loss (consecutive pairs):", round(report.mean_loss, 4))
print("mean loss (all forward pairs):", round(custody_loss_rate(ds, gates, "all_forward_pairs").mean_loss, 4))

## Tightening the time gate
# Dropouts leave gaps; a short time gate turns them into custody losses.
for dt_max in (15, 30, 60, 300):
    g = ConstraintGates(dt_max=dt_max)
    print(f"dt_max {dt_max:4d} s  loss {custody_loss_rate(ds, g).mean_loss:.4f}")

## Separability against sampling interval
# A pair is separable when the reachable slice is narrower than half the
# closest approach of the two paths.
intervals = np.arange(10, 301, 30)
curve = separability_curve(ds, gates, intervals)
for iv, frac in curve.samples:
    print(f"{iv:5.0f} s  {frac:.2f}")
