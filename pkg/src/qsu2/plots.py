"""Figure rendering for the command-line reports.

Every renderer takes plain data already written to the delimited output,
so the figures never recompute anything; they are a view of the same
numbers. The Agg backend keeps rendering headless.
"""

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_UP_COLOR = "#1f77b4"
_DOWN_COLOR = "#d62728"


def save_spectrum_figure(rows, path):
    """Eigenvalue ladder: one marker per tower level, sized by multiplicity.

    rows are (eigenvalue, multiplicity, branch, j) tuples.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.4), dpi=130)
    for branch, color in (("up", _UP_COLOR), ("down", _DOWN_COLOR)):
        sel = [r for r in rows if r[2] == branch]
        if not sel:
            continue
        ax.scatter(
            [r[3] for r in sel],
            [r[0] for r in sel],
            s=[8.0 + r[1] / 3.0 for r in sel],
            color=color,
            alpha=0.75,
            edgecolors="none",
            label=f"{branch} tower",
        )
    ax.axhline(0.0, color="0.8", lw=0.8, zorder=0)
    ax.set_xlabel("level j")
    ax.set_ylabel("eigenvalue")
    ax.set_title("Dirac spectrum by level (marker area tracks multiplicity)")
    ax.legend(frameon=False)
    ax.grid(True, alpha=0.25)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_decay_figure(certificate, path):
    """Level-block norms on a log scale with the fitted decay line.

    certificate is a DecayCertificate JSON dict: block_norms as
    [level, norm] pairs, plus rate, constant, and the q echo.
    """
    pairs = [(float(j), float(n)) for j, n in certificate["block_norms"]]
    qv = float(certificate["q"])
    fig, ax = plt.subplots(figsize=(6.4, 4.4), dpi=130)
    pos = [(j, n) for j, n in pairs if n > 0.0]
    zero = [(j, n) for j, n in pairs if n <= 0.0]
    if pos:
        ax.semilogy(
            [j for j, _ in pos], [n for _, n in pos],
            "o", color=_UP_COLOR, label="block norm",
        )
    for j, _ in zero:
        ax.axvline(j, color="0.9", lw=0.6, zorder=0)
    rate = certificate.get("rate")
    constant = certificate.get("constant")
    if pos and rate is not None and constant is not None and constant > 0.0:
        lo = min(j for j, _ in pos)
        hi = max(j for j, _ in pos)
        grid = [lo + (hi - lo) * k / 64.0 for k in range(65)]
        ax.semilogy(
            grid,
            [constant * qv ** (rate * j) for j in grid],
            "-", color=_DOWN_COLOR, lw=1.2,
            label=f"fit: rate {rate:.3f}",
        )
    ax.set_xlabel("level j")
    ax.set_ylabel("block norm")
    ax.set_title(f"{certificate.get('label', 'operator')}: {certificate.get('verdict', '')}")
    ax.legend(frameon=False)
    ax.grid(True, alpha=0.25, which="both")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_growth_figure(jmaxes, norms, classification, path):
    """Commutator norm against the truncation level, log scale."""
    fig, ax = plt.subplots(figsize=(6.4, 4.4), dpi=130)
    if any(n > 0 for n in norms):
        ax.semilogy(jmaxes, norms, "o-", color=_UP_COLOR)
    else:
        ax.plot(jmaxes, norms, "o-", color=_UP_COLOR)
    ax.set_xlabel("truncation J")
    ax.set_ylabel("commutator norm")
    ax.set_title(f"norm growth across truncations: {classification}")
    ax.grid(True, alpha=0.25, which="both")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
