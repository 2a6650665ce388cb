"""Figure rendering for the report paths (written next to the tables)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_PNG_METADATA = {"Software": "spatmix"}


def ari_boxplot(report, path):
    """Boxplots of replicate ARI values, one box per (side, beta) cell."""
    cells = report.cells
    data = [cell.aris for cell in cells]
    labels = [f"N={cell.cfg.side}\nb={float(cell.cfg.beta[-1]):g}" for cell in cells]
    fig, ax = plt.subplots(figsize=(max(6, 1.1 * len(cells)), 4.5))
    ax.boxplot(data, tick_labels=labels)
    ax.set_ylabel("adjusted Rand index")
    ax.set_ylim(0, 1.05)
    ax.axhline(0.8, color="grey", linestyle=":", linewidth=1)
    ax.set_title("Label recovery by lattice size and interaction strength")
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_METADATA)
    plt.close(fig)


def bic_curve(sweep_result, path):
    """BIC against the number of components, the selected K marked."""
    ok = [rec for rec in sweep_result.records if rec.ok]
    if not ok:
        return
    ks = [rec.K for rec in ok]
    bics = [rec.bic for rec in ok]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, bics, "o-")
    if sweep_result.selected_K is not None:
        best = sweep_result.best()
        ax.plot([best.K], [best.bic], "r*", markersize=14, label=f"selected K={best.K}")
        ax.legend()
    ax.set_xlabel("number of components K")
    ax.set_ylabel("BIC (larger is better)")
    ax.set_xticks(ks)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_METADATA)
    plt.close(fig)
