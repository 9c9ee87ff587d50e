"""Compare trained narrow nets with the constructed width-(n+4) approximator on a radial bump."""

import argparse

from widthrelu.experiments import phase_transition_probe, probe_report, radial_bump
from widthrelu.training import TrainConfig


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--widths", type=int, nargs="+")
    ap.add_argument("--depth", type=int, default=4)
    ap.add_argument("--epochs", type=int, default=50)
    ap.add_argument("--points-per-axis", type=int, default=100)
    ap.add_argument("--cells-per-axis", type=int, default=32)
    ap.add_argument("--epsilon", type=float, default=0.2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    widths = args.widths or [1, 2, args.n + 4]
    rows = phase_transition_probe(
        args.n, radial_bump(), widths, args.depth, TrainConfig(epochs=args.epochs, seed=args.seed),
        points_per_axis=args.points_per_axis, epsilon=args.epsilon, cells_per_axis=args.cells_per_axis,
    )
    print(probe_report(rows))


if __name__ == "__main__":
    main()
