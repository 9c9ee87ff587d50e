"""Run the narrow-vs-wide MSE table for one or all configurations.

Examples:
    python3 scripts/reproduce_table1.py --config configs/table1_desk.json
    python3 scripts/reproduce_table1.py --all --trials 50 --out-dir results/
"""

import argparse
import logging
from pathlib import Path

from widthrelu import experiments


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", help="JSON file with 'experiment' and 'train' sections")
    ap.add_argument("--all", action="store_true", help="run every (n, k) pair with default grids and epochs")
    ap.add_argument("--n", type=int)
    ap.add_argument("--k", type=int)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    doc = experiments.load_config(args.config) if args.config else {}
    base = {"trials": args.trials, "seed": args.seed}
    pairs = experiments.table1_configs() if args.all else [(None, None)]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for n, k in pairs:
        overrides = {**base, "n": n or args.n, "k": k or args.k}
        spec, config = experiments.build_experiment(doc, overrides)
        res = experiments.run_table1(spec, config, jobs=args.jobs)
        path = out_dir / f"table1_n{spec.n}_k{spec.k}.csv"
        path.write_text(res.to_csv())
        print(res.summary())
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
