"""
The width of the tracklet poset is a lower bound on how many tracks any
chain cover needs, and a rough count of simultaneously visible targets.
"""

from posettrack import ConstraintGates, ScenarioSpec, generate_scenario, poset_track, subsample, width
from posettrack.tracker import tracklet_graph

gates = ConstraintGates()
ds = generate_scenario(ScenarioSpec(n_targets=16, duration=1200, sample_interval=10,
                                    box=(400e3, 400e3, 1e3), seed=11))

## Width over the density / time-subsampling grid
# Dropping targets (m) lowers the width; dropping samples (n) mostly
# doesn't, until gaps approach the time gate.
for m in (1, 2, 4):
    for n in (1, 3, 9):
        sub = subsample(ds, m, n)
        g = tracklet_graph(sub, gates, 300.0)
        res = width(g)
        n_tracks = len(poset_track(sub, gates, 300.0))
        print(f"m={m} n={n}: {len(sub):5d} detections  width {res.width:3d}  greedy tracks {n_tracks:3d}")

## Window length
# Width depends only on reachability, so shrinking the window changes
# nothing while consecutive samples still link. Below the sample interval
# every detection becomes its own antichain member.
for window in (5, 30, 300):
    print("window", window, "width", width(tracklet_graph(subsample(ds, 4, 1), gates, window)).width)
