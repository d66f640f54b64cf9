"""Figure rendering for the report-producing CLI paths."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def question4_figure(scan, path, dpi=150):
    """Entropy-sum scan: closed curve, grid markers, the S = 1 crossing."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(scan.ts, scan.s_closed, "-", color="tab:blue", label="closed form")
    ax.plot(scan.ts, scan.s_numeric, "o", ms=4, mfc="none", color="tab:orange",
            label="grid quadrature")
    ax.axhline(1.0, color="0.4", lw=0.8, ls="--")
    ax.axvline(scan.t_star, color="tab:red", lw=0.8, ls=":")
    ax.annotate(f"t* = {scan.t_star:.4f}", (scan.t_star, 1.0),
                textcoords="offset points", xytext=(6, -14), color="tab:red")
    ax.set_xlabel("t")
    ax.set_ylabel("S(t) = h(f^t) + h((f^t)$^\\circ$)")
    ax.set_title("Entropy sum along the power family")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path


def km_figure(sweep, path, dpi=150):
    """Section-body ratio against the entropic-constant limit."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.semilogx(sweep.ms, sweep.ratios, "o-", color="tab:blue", label="ratio at m")
    ax.axhline(sweep.limit, color="tab:red", lw=0.8, ls="--",
               label=f"limit {sweep.limit:.6f}")
    ax.set_xlabel("m")
    ax.set_ylabel("moment ratio")
    ax.set_title("Convergence of the section-body construction")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path


def slicing_table_figure(rows, path, dpi=150):
    """Bar chart of computed extremal constants against their closed values.

    ``rows`` are dicts with keys function, constant, n, value, reference.
    """
    labels = [f"{r['constant']}({r['function']}) n={r['n']}" for r in rows]
    values = [r["value"] for r in rows]
    refs = [r["reference"] for r in rows]
    x = range(len(rows))
    fig, ax = plt.subplots(figsize=(1.1 * len(rows) + 3, 4.5))
    ax.bar(x, values, width=0.55, color="tab:blue", label="computed")
    ax.plot(x, refs, "_", ms=22, mew=2, color="tab:red", label="closed value")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel("isotropic constant")
    ax.set_title("Extremal isotropic constants")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path
