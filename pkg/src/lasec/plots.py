"""Figure rendering for the report path.

Renders the accuracy curves (with 95% CI bands) and sweep tradeoff plots
to image files next to the CSVs.  The CSV output remains the interface of
record; these are the human-readable companions.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def plot_accuracy_curves(results, out_path, title=None):
    """Plot mean online accuracy against rounds for one or more runs.

    ``results`` maps a label to an AggregateResult (or anything with
    checkpoints / mean_accuracy / ci_halfwidth arrays).
    """
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, res in results.items():
        ax.plot(res.checkpoints, res.mean_accuracy, label=label, linewidth=1.5)
        ax.fill_between(
            res.checkpoints,
            res.mean_accuracy - res.ci_halfwidth,
            res.mean_accuracy + res.ci_halfwidth,
            alpha=0.2,
        )
    ax.set_xlabel("examples")
    ax.set_ylabel("average accuracy")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_sweep(rows, out_path, title=None):
    """Plot accuracy against realized query rate from sweep rows."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    xs = [r.realized for r in rows]
    ys = [r.accuracy for r in rows]
    ax.plot(xs, ys, marker="o", linewidth=1.5)
    for r in rows:
        if not r.converged:
            ax.annotate("unconverged", (r.realized, r.accuracy), fontsize=7)
    ax.set_xlabel("fraction of queried labels")
    ax.set_ylabel("average accuracy")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
