"""
Turning raw echo magnitudes into detections: align each pulse on its
strongest echo, then run cell-averaging CFAR and take centroids.
"""

import numpy as np

from posettrack import PulseMatrix, align_pulses, cfar_detect, poset_track, ConstraintGates

rng = np.random.default_rng(0)

## Synthesise a pulse train
# 200 pulses of 1500 samples at 29.4 Hz. The direct-path blast lands at a
# jittered offset in each pulse; a target echo drifts slowly outwards.
n_pulses, n_samples = 200, 1500
data = rng.uniform(0.5, 1.5, (n_pulses, n_samples))
offset = rng.integers(0, 40, n_pulses)
for p in range(n_pulses):
    data[p, offset[p]] = 200.0
    r = offset[p] + 400 + int(p * 1.5)
    data[p, r:r + 2] = [15.0, 12.0]
pm = PulseMatrix(data)

## Align, then detect
aligned = align_pulses(pm)
raw = cfar_detect(pm)
dets = cfar_detect(aligned)

def echo_ranges(ds):
    # the strongest detection in each pulse is the blast; the other is the echo
    return np.array([d.pos[0] for d in ds if d.strength < 100])


# alignment removes the pulse-to-pulse jitter from the echo track
for label, ds in (("raw", raw), ("aligned", dets)):
    steps = np.diff(echo_ranges(ds))
    print(f"{label:8s} {len(ds)} detections, echo step mean {steps.mean():.2f} std {steps.std():.2f} cells")

## Link echoes over time
# Range cells are not metres, so the gates here are in cells and seconds.
gates = ConstraintGates(dt_max=0.5, horiz_max=50, vert_max=1, speed_max=100)
tracks = poset_track(dets, gates, window=0.5)
print("longest track:", max(len(t) for t in tracks), "of", n_pulses, "pulses")
