"""Expected record counts per (task, target) for a scene file.

Counts are derived from the template table (templates per task and target)
and the generation rules, without running the generator:
  perception  every frame, all objects present in that frame
  prediction  frames f with f + horizon < n_frames, objects present in every
  reasoning   frame f..f+horizon (scenario and ego targets: one per frame)
  multi       subsets of size 2..3, capped at `cap` when sampling is on

    python3 tests/oracles/enumerate_records.py tests/fixtures/scenes/scene_a.json 2
"""

import json
import sys
from math import comb

# (task, target) -> number of templates
TEMPLATES = {
    ("perception", "single_object"): 4, ("perception", "multi_objects"): 4,
    ("perception", "scenario"): 4, ("perception", "ego"): 0,
    ("prediction", "single_object"): 5, ("prediction", "multi_objects"): 4,
    ("prediction", "scenario"): 3, ("prediction", "ego"): 2,
    ("reasoning", "single_object"): 3, ("reasoning", "multi_objects"): 0,
    ("reasoning", "scenario"): 1, ("reasoning", "ego"): 2,
}


def multi(n, sampling, cap):
    k = comb(n, 2) + comb(n, 3)
    return min(k, cap) if sampling else k


def count(scene, horizon, sampling=True, cap=8):
    frames = [{o["id"] for o in f["objects"]} for f in scene["frames"]]
    out = {key: 0 for key in TEMPLATES}
    for f, present in enumerate(frames):
        for task in ("perception", "prediction", "reasoning"):
            if task == "perception":
                objs = len(present)
            elif horizon >= 2 and f + horizon < len(frames):
                objs = len(set.intersection(*frames[f:f + horizon + 1]))
            else:
                continue
            out[(task, "single_object")] += TEMPLATES[(task, "single_object")] * objs
            out[(task, "multi_objects")] += TEMPLATES[(task, "multi_objects")] * multi(objs, sampling, cap)
            out[(task, "scenario")] += TEMPLATES[(task, "scenario")]
            out[(task, "ego")] += TEMPLATES[(task, "ego")]
    return out


if __name__ == "__main__":
    scene = json.load(open(sys.argv[1]))
    horizon = int(sys.argv[2]) if len(sys.argv) > 2 else 6
    for sampling in (True, False):
        c = count(scene, horizon, sampling)
        print("sampling=%s total=%d" % (sampling, sum(c.values())))
        for (task, target), n in sorted(c.items()):
            print("  %-10s %-13s %d" % (task, target, n))
