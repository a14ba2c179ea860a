"""Pilot run that fixes the heavy-tail acceptance thresholds.

Runs pareto:2.5 entries on the homogeneous profile at n in {128, 256} with 500
trials each, on a seed distinct from the acceptance run, and writes the
thresholds to ``src/specrad/data/heavy_tail_calibration.json``.

The threshold for a 200-trial run is the n=256 pilot fraction minus three
binomial standard errors at 200 trials.
"""
import json
import math
import pathlib
import sys

import numpy as np

from specrad.harness import ExperimentConfig, run

DELTA = 0.5
FACTOR = 1.3
MAIN_TRIALS = 200
PILOT_SEED = 20240917


def main(out=None):
    cfg = ExperimentConfig(
        kind="heavy_tail_compare",
        profile={"kind": "homogeneous"},
        law="pareto:2.5",
        n_list=[128, 256],
        trials=500,
        master_seed=PILOT_SEED,
        experiment_id="heavy-tail-pilot",
        options={"calibration": {"delta": DELTA, "separation_factor": FACTOR,
                                 "min_bounded_fraction": 0.0, "min_separated_fraction": 0.0}},
    )
    res = run(cfg)
    pilot = {}
    for n in cfg.n_list:
        rows = [r for r in res.rows if r.n == n and r.ok]
        rho = np.array([r.rho for r in rows])
        ratio = np.array([r.extra2 for r in rows])
        pilot[str(n)] = {
            "trials": len(rows),
            "bounded_fraction": float(np.mean(rho <= 1.0 + DELTA)),
            "separated_fraction": float(np.mean(ratio >= FACTOR)),
        }

    def threshold(f):
        return max(0.0, f - 3.0 * math.sqrt(f * (1.0 - f) / MAIN_TRIALS))

    ref = pilot["256"]
    doc = {
        "delta": DELTA,
        "separation_factor": FACTOR,
        "main_trials": MAIN_TRIALS,
        "pilot_master_seed": PILOT_SEED,
        "pilot": pilot,
        "min_bounded_fraction": round(threshold(ref["bounded_fraction"]), 4),
        "min_separated_fraction": round(threshold(ref["separated_fraction"]), 4),
    }
    path = pathlib.Path(out) if out else pathlib.Path(__file__).resolve().parents[1] / "src/specrad/data/heavy_tail_calibration.json"
    path.write_text(json.dumps(doc, indent=2) + "\n")
    print(json.dumps(doc, indent=2))


if __name__ == "__main__":
    main(*sys.argv[1:])
