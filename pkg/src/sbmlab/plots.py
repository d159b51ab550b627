"""Figure rendering and plot-ready data emission for the report path."""
from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import SchemaMismatch  # noqa: E402
from .results import ResultTable  # noqa: E402

PLOT_KINDS = {
    "rate": ("logD vs log lambda", "lambda", "D"),
    "tail": ("log P vs log a", "a", "P"),
}


def emit_plot_data(table: ResultTable, kind, path_prefix):
    """Two-column log-log data plus a least-squares fit-line companion.

    rate -> (log lambda, log D); tail -> (log a, log P)."""
    if kind not in PLOT_KINDS:
        raise SchemaMismatch(f"unknown plot kind '{kind}'")
    _, cx, cy = PLOT_KINDS[kind]
    if cx not in table.columns or cy not in table.columns or len(table) == 0:
        raise SchemaMismatch(
            f"kind '{kind}' needs non-empty columns ({cx}, {cy})")
    lx = np.log(table.columns[cx])
    ly = np.log(table.columns[cy])
    slope, icept = np.polyfit(lx, ly, 1)
    data = ResultTable({f"log_{cx}": lx, f"log_{cy}": ly}, meta=table.meta)
    data.write_csv(f"{path_prefix}.csv")
    fit = ResultTable(
        {f"log_{cx}": lx, "fit": slope * lx + icept},
        meta={**table.meta, "slope": slope, "intercept": icept},
    )
    fit.write_csv(f"{path_prefix}_fit.csv")
    return f"{path_prefix}.csv", f"{path_prefix}_fit.csv"


def _save(fig, path, metadata=None):
    fig.tight_layout()
    fig.savefig(path, dpi=130, metadata=metadata or {})
    plt.close(fig)
    return path


def set_config_hash(h):
    """Stamp subsequent figures with the active config hash (PNG text chunk)."""
    global _CFG_HASH
    _CFG_HASH = h


_CFG_HASH = None


def _meta():
    return {"sbmlab-config": _CFG_HASH} if _CFG_HASH else {}


def profile_figure(prof, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    y = prof.y_grid
    ax.plot(y, prof.values, label="F")
    ax.plot(y, prof.c0 * y * np.exp(-y * y / 2), "--",
            label=r"$c_0\, y\, e^{-y^2/2}$")
    ax.set_yscale("log")
    ax.set_xlabel("y")
    ax.set_ylim(1e-14, 3)
    ax.set_title(f"singular profile, F(0)={prof.f0:.6f}")
    ax.legend()
    return _save(fig, path, _meta())


def spectrum_figure(sys, path):
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(9, 4))
    a1.plot(np.arange(sys.n_max + 1), sys.eigenvalues, "o-")
    a1.set_xlabel("n")
    a1.set_ylabel(r"$\lambda_n$")
    a1.set_title(f"phi = {sys.phi_tag}")
    a2.plot(sys.x_grid, sys.eigenfunctions_psi[0])
    a2.set_xlabel("x")
    a2.set_title(r"$\psi_0$")
    a2.set_xlim(-6, 6)
    return _save(fig, path, _meta())


def loglog_fit_figure(x, y, slope, label, path, xlabel, ylabel):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(x, y, "o")
    icept = np.exp(np.mean(np.log(y) - slope * np.log(x)))
    ax.loglog(x, icept * np.asarray(x, float) ** slope, "--",
              label=f"{label}: slope {slope:.4f}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    return _save(fig, path, _meta())


def density_figure(centers, mean_density, bz_points, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(centers, mean_density, label="mean density (survivors)")
    if bz_points is not None and len(bz_points):
        ax.plot(bz_points, np.zeros_like(bz_points), "|", ms=14, color="r",
                label="BZ proxy")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.legend()
    return _save(fig, path, _meta())
