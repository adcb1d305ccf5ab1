"""Show RLS parameter convergence on a noisy order-2 system.

Writes convergence.svg with one panel per estimated row and prints the
final parameter error for a few forgetting factors.

Usage:
    python3 scripts/convergence_demo.py [--out convergence.svg]
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ltgp_sysid.dataio import simulate_channels
from ltgp_sysid.ident import IdentDataset, RlsConfig, identify
from ltgp_sysid.model import make_second_order


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="convergence.svg")
    parser.add_argument("--n", type=int, default=5000)
    args = parser.parse_args()

    truth = make_second_order(0.9, 0.2, -0.1, 0.8, 1.0, 0.5)
    rng = np.random.default_rng(0)
    u = rng.normal(size=args.n)
    ch0, ch1 = simulate_channels(truth, u)
    scale = 0.01 * np.concatenate([ch0, ch1]).std()
    data = IdentDataset(ch0 + rng.normal(0, scale, args.n), ch1 + rng.normal(0, scale, args.n), u)

    names = truth.param_names()
    true_vals = np.array(list(truth.params().values()))
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for lam in (1.0, 0.995, 0.98):
        model, traces = identify(data, 2, RlsConfig(forgetting=lam))
        err = np.max(np.abs(np.array(list(model.params().values())) - true_vals))
        print(f"lambda={lam:<6} max |theta - theta_true| = {err:.2e}")
        for row, (ax, trace) in enumerate(zip(axes, traces)):
            ax.plot(trace.steps, trace.thetas, lw=0.8, label=[f"{n} ({lam})" for n in names[3 * row:3 * row + 3]])
    for ax in axes:
        ax.set_xlabel("update")
        ax.legend(fontsize=6)
    axes[0].set_ylabel("estimate")
    fig.tight_layout()
    fig.savefig(args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
