"""Static report figures written next to the CSV/JSON outputs."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
}
# Stable PNG bytes across runs
_METADATA = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata=_METADATA)
    plt.close(fig)


def plot_convergence(trace, path):
    """Best-so-far fitness against cumulative evaluations for one run."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        pts = trace.best_curve()
        if pts:
            xs, ys = zip(*pts)
            ax.step(xs, ys, where="post", color="#1f5fa8", lw=1.4, label="best so far")
            ax.plot(xs[-1], ys[-1], "o", color="#c0392b", ms=4)
        if trace.best is not None:
            label = ", ".join(f"{n}={v}" for n, v in zip(trace.names, trace.best.params))
            ax.set_title(f"best {label}  fitness={trace.best.fitness:.6g}")
        ax.set_xlabel("evaluations")
        ax.set_ylabel("fitness")
        ax.legend(loc="lower right", frameon=False)
        _save(fig, path)


def plot_comparison(comparison, path):
    """Left: best-fitness spread per method.  Right: success rate per method."""
    methods = list(comparison.summary)
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.5, 3.2))
        data = [[r.best.fitness for r in comparison.records if r.method == m] for m in methods]
        ax1.boxplot(data)
        ax1.set_xticks(range(1, len(methods) + 1), methods)
        ax1.set_ylabel("best fitness")
        rates = [comparison.summary[m].success_rate for m in methods]
        ax2.bar(methods, [0.0 if r is None else r for r in rates], color="#1f5fa8")
        ax2.set_ylim(0, 1.05)
        ax2.set_ylabel("success rate")
        _save(fig, path)
