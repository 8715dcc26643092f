"""Figure rendering for the report paths of the CLI."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _band_split(grid):
    from .constants import Band

    l_mask = grid.band_mask(Band.L)
    return l_mask, ~l_mask


def save_profile_figure(grid, rows, path):
    """Received power, NLI coefficient, and ASE vs channel frequency."""
    f_thz = grid.center_hz / 1e12
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    l_mask, c_mask = _band_split(grid)
    for ax, key, label in (
        (axes[0], "p_rx_dbm", "received power [dBm]"),
        (axes[1], "eta_per_w2", "NLI coefficient [1/W$^2$]"),
        (axes[2], "p_ase_dbm", "ASE power [dBm]"),
    ):
        y = np.asarray(rows[key])
        for mask, mark in ((l_mask, "o"), (c_mask, "s")):
            ax.plot(f_thz[mask], y[mask], mark, ms=3, lw=0.8, ls="-")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    axes[0].legend(["L band", "C band"], loc="best", fontsize=8)
    axes[2].set_xlabel("channel frequency [THz]")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_mrd_figure(grid, mrd_table, path):
    """Stepwise maximum reach vs channel frequency, one curve per format."""
    if mrd_table.per_channel is None:
        raise ValueError("table has no per-channel matrix to plot")
    f_thz = grid.center_hz / 1e12
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for row, (m, reach, _) in zip(mrd_table.per_channel, mrd_table.per_format):
        ax.step(f_thz, row, where="mid", lw=1.0, label=f"m={m} (band reach {reach})")
    ax.set_xlabel("channel frequency [THz]")
    ax.set_ylabel("maximum reach [spans]")
    ax.set_yscale("log")
    ax.grid(alpha=0.3, which="both")
    ax.legend(fontsize=8, ncol=2)
    ax.set_title(f"optimum launch power {mrd_table.optimum_power_dbm:+.2f} dBm")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_report_figure(rows, path):
    """BBP (log scale) and mean arrival GSNR vs offered load, per policy."""
    policies = sorted({r["policy"] for r in rows})
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    for policy, mark in zip(policies, "os^d"):
        sel = [r for r in rows if r["policy"] == policy]
        sel.sort(key=lambda r: r["otl"])
        otl = [r["otl"] for r in sel]
        ax1.errorbar(
            otl, [max(r["bbp"], 1e-7) for r in sel],
            yerr=[r["bbp_ci"] for r in sel],
            marker=mark, ms=4, lw=1, capsize=2, label=policy.upper(),
        )
        ax2.errorbar(
            otl, [r["mean_gsnr_db"] for r in sel],
            yerr=[r["gsnr_ci"] for r in sel],
            marker=mark, ms=4, lw=1, capsize=2, label=policy.upper(),
        )
    ax1.set_yscale("log")
    ax1.set_xlabel("offered traffic load")
    ax1.set_ylabel("bandwidth blocking probability")
    ax2.set_xlabel("offered traffic load")
    ax2.set_ylabel("mean arrival GSNR [dB]")
    for ax in (ax1, ax2):
        ax.grid(alpha=0.3, which="both")
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
