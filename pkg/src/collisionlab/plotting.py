"""Figures written next to the CSV reports. Uses the non-interactive Agg backend."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def bound_vs_measured(
    ms: Sequence[int],
    bounds: Sequence[float],
    measured: Sequence[float],
    stderrs: Sequence[float] | None,
    path: str | Path,
    title: str = "",
) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ms, bounds, "o--", label="one-shot bound")
    if stderrs is not None and any(s > 0 for s in stderrs):
        ax.errorbar(ms, measured, yerr=[2 * s for s in stderrs], fmt="s-", capsize=3, label="measured")
    else:
        ax.plot(ms, measured, "s-", label="measured")
    ax.set_xlabel("M")
    ax.set_ylabel("success probability")
    ax.set_ylim(0, 1.05)
    ax.set_title(title)
    ax.legend()
    return _finish(fig, path)


def second_order_curve(
    ns: Sequence[int],
    estimates: Sequence[float],
    exact: Sequence[float] | None,
    path: str | Path,
    epsilon: float,
) -> Path:
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(10, 4))
    ax0.plot(ns, estimates, "o--", label=r"$nD+\sqrt{nV}\,\Phi^{-1}(\epsilon)$")
    if exact is not None:
        ax0.plot(ns, exact, "s-", label=r"exact $D_s^\epsilon$")
        resid = [(e - s) / n**0.5 for e, s, n in zip(exact, estimates, ns)]
        ax1.plot(ns, resid, "d-")
        ax1.axhline(0.0, color="0.6", lw=0.8)
        ax1.set_xscale("log")
        ax1.set_ylabel(r"residual / $\sqrt{n}$ (bits)")
        ax1.set_xlabel("n")
    else:
        ax1.set_visible(False)
    ax0.set_xlabel("n")
    ax0.set_ylabel("bits")
    ax0.set_title(rf"$\epsilon={epsilon:g}$")
    ax0.legend()
    return _finish(fig, path)
