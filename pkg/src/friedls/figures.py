"""Figure rendering for the report commands.

Every reporting subcommand that writes a delimited table also renders a
companion PNG next to it (same stem, .png suffix) unless figures are
switched off.  The CSV stays the canonical, byte-stable record; figures
are a convenience view of the same rows.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def figure_path(out_path):
    from pathlib import Path

    return str(Path(out_path).with_suffix(".png"))


def plot_convergence(rows, path, title="manufactured-solution convergence"):
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    h = [r["h"] for r in rows]
    ax.loglog(h, [r["err_l2"] for r in rows], "o-", label="L2 error")
    ax.loglog(h, [r["err_v"] for r in rows], "s-", label="solution-norm error")
    if len(h) > 1 and rows[-1]["err_v"] > 0:
        anchor = rows[-1]["err_v"]
        for slope, style in ((1, ":"), (2, "--")):
            ref = [anchor * (hi / h[-1]) ** slope for hi in h]
            ax.loglog(h, ref, "k" + style, lw=0.8, label=f"slope {slope}")
    ax.set_xlabel("h")
    ax.set_ylabel("error")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    _finish(fig, path)


def plot_infsup(rows, path, title="discrete inf-sup certification"):
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    levels = [r["level"] for r in rows]
    ax.plot(levels, [r["alpha_h"] for r in rows], "o-", label="alpha_h")
    bounds = [r["paper_bound"] for r in rows if r["paper_bound"] is not None]
    if bounds:
        ax.axhline(bounds[0], color="r", ls="--", label="certified lower bound")
    ax.set_xlabel("refinement level")
    ax.set_ylabel("inf-sup estimate")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    _finish(fig, path)


def plot_illposed(rows, path, title="sup-ratio decay of the naive form"):
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    n = [r["n"] for r in rows]
    ax.semilogy(n, [r["ratio"] for r in rows], "o-", label="sup ratio")
    ax.semilogy(n, [r["envelope"] for r in rows], "s--",
                label="ratio * w_norm / l2_norm")
    ax.set_xlabel("mode index n")
    ax.set_ylabel("value")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    _finish(fig, path)


def plot_checks(rows, path, title="verification battery"):
    fig, ax = plt.subplots(figsize=(6.4, 0.30 * max(len(rows), 4) + 1.2))
    names = [r["check"] for r in rows]
    margins = [r["measured"] - (r["bound"] + r["tolerance"]) for r in rows]
    colors = ["tab:green" if r["status"] == "pass" else "tab:red" for r in rows]
    ax.barh(range(len(rows)), margins, color=colors)
    ax.axvline(0.0, color="k", lw=0.8)
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(names, fontsize=6)
    ax.set_xlabel("measured - (bound + tolerance)   (negative = pass)")
    ax.set_xscale("symlog", linthresh=1e-14)
    ax.set_title(title)
    _finish(fig, path)
