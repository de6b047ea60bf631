"""Figure rendering for the report paths (written next to the CSV output)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "energy_series",
    "error_series",
    "gronwall_growth",
    "refinement_table",
    "loglog_sweep",
    "kappa_rates",
]


def _save(fig, path) -> str:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return str(path)


def energy_series(ledger, path, title: str = "Energy ledger") -> str:
    t = ledger.t
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(t, ledger.energy(), label=r"$\|v\|_2^2 + \kappa\|\nabla v\|_2^2$")
    diss = ledger.column("strain_p_pow")
    if np.any(diss > 0):
        ax.plot(t, diss, label=r"$\int |D(v)|^p$", ls="--")
    ax.set_xlabel("t")
    ax.set_title(title)
    ax.legend(frameon=False)
    return _save(fig, path)


def error_series(times, errors, path) -> str:
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.semilogy(times, np.maximum(errors, 1e-300))
    ax.set_xlabel("t")
    ax.set_ylabel("relative L2 error")
    ax.set_title("Manufactured-solution error")
    return _save(fig, path)


def gronwall_growth(times, w_grad_sq, path) -> str:
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.semilogy(times, np.maximum(w_grad_sq, 1e-300))
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\|\nabla w\|_2^2$")
    ax.set_title("Perturbation growth (Gronwall envelope)")
    return _save(fig, path)


def refinement_table(rows, path) -> str:
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    if rows:
        n = [r["n_fine"] for r in rows]
        ax.semilogy(n, [max(r["l2_qt"], 1e-300) for r in rows], "o-",
                    label=r"$\|v_n - v_{n'}\|_{L^2(Q_T)}$")
        ax.semilogy(n, [max(r["sup_w12"], 1e-300) for r in rows], "s--",
                    label=r"$\sup_t \|v_n - v_{n'}\|_{W^{1,2}}$")
        ax.legend(frameon=False)
    ax.set_xlabel("fine shell n")
    ax.set_title("Galerkin Cauchy differences")
    return _save(fig, path)


def loglog_sweep(n_list, values, slope, path) -> str:
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.loglog(n_list, np.maximum(values, 1e-300), "o-")
    label = "regularizer stress integral"
    if slope is not None:
        label += f" (slope {slope:.2f})"
    ax.set_xlabel("n_reg")
    ax.set_ylabel(label)
    ax.set_title("Vanishing regularizer")
    return _save(fig, path)


def kappa_rates(rows, path) -> str:
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    k = [r["kappa"] for r in rows]
    ax.plot(k, [r["energy_rate_fitted"] for r in rows], "o", label="fitted")
    ax.plot(k, [r["energy_rate_predicted"] for r in rows], "-",
            label=r"$2\nu/(1+2\kappa)$")
    ax.set_xlabel(r"$\kappa$")
    ax.set_ylabel("energy decay rate")
    ax.legend(frameon=False)
    ax.set_title("Voigt relaxation sweep")
    return _save(fig, path)
