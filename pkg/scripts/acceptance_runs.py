"""Long acceptance simulations; each writes acceptance_results/<name>.json.

    python3 scripts/acceptance_runs.py regular|sweep|decay|irregular|training|toy [--out DIR]

The metrics are evaluated by tests/test_acceptance.py. Runs are expensive on
a single core (toy: ~3 min, decay: ~20 min, regular: ~4 h, sweep: >15 h); the irregular
200 s record and the multi-seed training are far beyond a desk budget but
are runnable here unchanged.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from wecsph.acceptance import (decay_run, irregular_run, regular_wave_run, sweep_run,
                               toy_sac_run, training_run)

RUNS = {"regular": regular_wave_run, "sweep": sweep_run, "decay": decay_run,
        "irregular": irregular_run, "training": training_run,
        "toy": toy_sac_run}


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("name", choices=sorted(RUNS))
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "acceptance_results"))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    tic = time.time()
    res = RUNS[args.name](seed=args.seed)
    res["wall_seconds"] = time.time() - tic
    stem = f"training_seed{args.seed}" if args.name == "training" else args.name
    path = os.path.join(args.out, f"{stem}.json")
    with open(path, "w") as fh:
        json.dump(res, fh, indent=1, default=lambda o: np.asarray(o).tolist())
    print(path)


if __name__ == "__main__":
    sys.exit(main())
