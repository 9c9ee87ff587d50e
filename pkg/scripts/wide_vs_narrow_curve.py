"""Sample one random wide target, fit a narrow approximator, dump both curves to CSV.

The CSV has columns ``x, target, approx`` on the full evaluation grid and is
meant for plotting the two functions on top of each other.
"""

import argparse

import numpy as np

from widthrelu.evaluation import emit_comparison_csv
from widthrelu.experiments import ExperimentSpec, default_train_config
from widthrelu.training import fit, init_network


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--epochs", type=int)
    ap.add_argument("--out", default="wide_vs_narrow.csv")
    args = ap.parse_args()

    spec = ExperimentSpec(n=1, k=args.k, trials=1, seed=args.seed)
    config = default_train_config(1)
    if args.epochs:
        config.epochs = args.epochs
    rng = np.random.default_rng(args.seed)
    target = init_network(spec.target_shape, rng, target=True)
    X = spec.grid()
    Y = target(X)
    res = fit(init_network(spec.approximator_shape, rng), (X[::2], Y[::2]), (X, Y), config)
    emit_comparison_csv(Y[:, 0], res.network(X)[:, 0], X, args.out)
    print(f"best mse {res.best_mse:.3e}; wrote {len(X)} rows to {args.out}")


if __name__ == "__main__":
    main()
