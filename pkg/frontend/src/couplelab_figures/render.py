"""Render figures from couplelab CSV files.

The plotting layer is a pure function of the CSV bytes and the figure
spec: it never recomputes numerics.  Where a figure pairs an empirical
curve with a bound curve, the renderer checks dominance row by row over
the finite entries; a violation is stamped on the figure instead of being
hidden.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIGURE_KINDS = ("bias-scan", "mixing-scan", "renyi-scan", "mi-scan",
                "ula-scan", "couple-verify", "figure1")

# columns each kind requires, per the documented CSV schemas
_REQUIRED = {
    "bias-scan": ("d", "T", "h", "kl_bias_exact", "kl_bias_bound",
                  "renyi_q", "renyi_bias_exact", "renyi_bias_bound"),
    "mixing-scan": ("d", "T", "h", "k", "kl_exact", "kl_bound",
                    "renyi_exact", "renyi_bound"),
    "renyi-scan": ("d", "T", "h", "q", "k", "renyi_exact", "renyi_bound"),
    "mi-scan": ("d", "T", "h", "k", "mi_exact", "mi_bound"),
    "ula-scan": ("eta", "kl_exact", "slope_fit"),
    "couple-verify": ("lemma_id", "samples", "max_ratio", "worst_residual"),
    "figure1": ("tv", "kl", "renyi2"),
}
_DENSITY_COLUMNS = ("x", "mu_density", "pi_density")


@dataclass(frozen=True)
class FigureSpec:
    csv: Path
    kind: str
    out: Path
    densities_csv: Path | None = None   # figure1 companion file
    logx: bool | None = None
    logy: bool | None = None


@dataclass
class RenderResult:
    out: Path
    dominance: dict = field(default_factory=dict)
    slope: float | None = None

    @property
    def bound_dominates(self) -> bool:
        return all(self.dominance.values())


def read_csv(path) -> dict:
    """Parse one documented-schema CSV into column arrays."""
    lines = Path(path).read_text().strip().split("\n")
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    if not rows:
        raise ValueError(f"empty CSV: {path}")
    cols = {}
    for j, name in enumerate(header):
        raw = [r[j] for r in rows]
        try:
            cols[name] = np.array([float(v) for v in raw])
        except ValueError:
            cols[name] = np.array(raw)
    return cols


def _require(cols, kind, names):
    missing = [n for n in names if n not in cols]
    if missing:
        raise ValueError(f"{kind}: missing columns {missing}")


def _fit_slope(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    keep = np.isfinite(x) & np.isfinite(y)
    if keep.sum() < 2:
        return math.nan
    return float(np.polyfit(x[keep], y[keep], 1)[0])


def _dominates(bound, exact) -> bool:
    bound, exact = np.asarray(bound), np.asarray(exact)
    keep = np.isfinite(bound) & np.isfinite(exact)
    return bool(np.all(bound[keep] >= exact[keep]))


def _pair_plot(ax, x, exact, bound, labels):
    finite_b = np.isfinite(bound)
    ax.plot(x, exact, "o-", ms=3, label=labels[0], zorder=2)
    if finite_b.any():
        # bound drawn above the empirical curve
        ax.plot(np.asarray(x)[finite_b], np.asarray(bound)[finite_b],
                "--", label=labels[1], zorder=3)


def _stamp_violation(fig):
    fig.text(0.5, 0.5, "BOUND VIOLATED", color="red", fontsize=24,
             ha="center", va="center", alpha=0.6, rotation=20)


def render(spec: FigureSpec) -> RenderResult:
    """Write one image for the spec; returns dominance flags and any slope."""
    if spec.kind not in FIGURE_KINDS:
        raise ValueError(f"unknown figure kind {spec.kind!r}")
    cols = read_csv(spec.csv)
    _require(cols, spec.kind, _REQUIRED[spec.kind])
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    result = RenderResult(out)

    if spec.kind == "bias-scan":
        _render_bias(spec, cols, result)
    elif spec.kind in ("mixing-scan", "renyi-scan", "mi-scan"):
        _render_decay(spec, cols, result)
    elif spec.kind == "ula-scan":
        _render_ula(spec, cols, result)
    elif spec.kind == "couple-verify":
        _render_couple(spec, cols, result)
    else:
        _render_figure1(spec, cols, result)
    return result


def _save(fig, spec, result):
    if not result.bound_dominates:
        _stamp_violation(fig)
    fig.savefig(spec.out, dpi=130)
    plt.close(fig)


def _render_bias(spec, cols, result):
    h = cols["h"]
    result.slope = _fit_slope(np.log(h), np.log(cols["kl_bias_exact"]))
    result.dominance["kl"] = _dominates(cols["kl_bias_bound"],
                                        cols["kl_bias_exact"])
    result.dominance["renyi"] = _dominates(cols["renyi_bias_bound"],
                                           cols["renyi_bias_exact"])
    fig, ax = plt.subplots(figsize=(6, 4.2))
    order = np.argsort(h)
    _pair_plot(ax, h[order], cols["kl_bias_exact"][order],
               cols["kl_bias_bound"][order],
               (f"KL bias (slope {result.slope:.2f})", "KL bias bound"))
    _pair_plot(ax, h[order], cols["renyi_bias_exact"][order],
               cols["renyi_bias_bound"][order],
               ("Renyi bias", "Renyi bias bound"))
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("step size h")
    ax.set_ylabel("stationary bias")
    ax.legend(fontsize=8)
    ax.set_title("asymptotic bias vs step size")
    _save(fig, spec, result)


def _render_decay(spec, cols, result):
    k = cols["k"]
    if np.all(k == k[0]):
        raise ValueError("degenerate axis: iteration column is constant")
    pairs = {"mixing-scan": [("kl_exact", "kl_bound"),
                             ("renyi_exact", "renyi_bound")],
             "renyi-scan": [("renyi_exact", "renyi_bound")],
             "mi-scan": [("mi_exact", "mi_bound")]}[spec.kind]
    fig, ax = plt.subplots(figsize=(6, 4.2))
    order = np.argsort(k)
    for exact_name, bound_name in pairs:
        result.dominance[exact_name] = _dominates(cols[bound_name],
                                                  cols[exact_name])
        _pair_plot(ax, k[order], cols[exact_name][order],
                   cols[bound_name][order], (exact_name, bound_name))
    ax.set_yscale("log" if spec.logy is None else
                  ("log" if spec.logy else "linear"))
    ax.set_xlabel("iteration k")
    ax.set_ylabel("divergence")
    ax.legend(fontsize=8)
    ax.set_title(spec.kind)
    _save(fig, spec, result)


def _render_ula(spec, cols, result):
    eta = cols["eta"]
    result.slope = float(cols["slope_fit"][0])
    fig, ax = plt.subplots(figsize=(6, 4.2))
    order = np.argsort(eta)
    ax.plot(eta[order], cols["kl_exact"][order], "o-",
            label=f"KL (fitted slope {result.slope:.3f})")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("step size eta")
    ax.set_ylabel("discrete-vs-exact KL")
    ax.legend(fontsize=8)
    ax.set_title("Langevin cross-regularization scaling")
    _save(fig, spec, result)


def _render_couple(spec, cols, result):
    fig, ax = plt.subplots(figsize=(6, 4.2))
    idx = np.arange(len(cols["lemma_id"]))
    ax.bar(idx, cols["max_ratio"].astype(float))
    ax.axhline(1.0, color="red", ls="--", lw=1, label="certification line")
    ax.set_xticks(idx)
    ax.set_xticklabels(cols["lemma_id"], rotation=40, ha="right", fontsize=7)
    ax.set_ylabel("worst observed / bound")
    ax.legend(fontsize=8)
    ax.set_title("growth-bound verification")
    fig.tight_layout()
    result.dominance["ratios"] = bool(
        np.all(cols["max_ratio"].astype(float) <= 1.0))
    _save(fig, spec, result)


def _render_figure1(spec, cols, result):
    if spec.densities_csv is None:
        raise ValueError("figure1 needs the densities companion CSV")
    dens = read_csv(spec.densities_csv)
    _require(dens, "figure1-densities", _DENSITY_COLUMNS)
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    for ax, semilog in zip(axes, (False, True)):
        ax.plot(dens["x"], dens["pi_density"], "k-", lw=1.8, label="target")
        ax.plot(dens["x"], dens["mu_density"], "r--", lw=1.8, label="mixture")
        if semilog:
            ax.set_yscale("log")
            ax.set_ylim(1e-30, 1.0)
        ax.set_xlabel("x")
        ax.set_ylabel("density" + (" (log scale)" if semilog else ""))
        ax.legend(fontsize=8)
    fig.suptitle(f"TV={cols['tv'][0]:.4f}  KL={cols['kl'][0]:.3f}  "
                 f"R2={cols['renyi2'][0]:.1f}", fontsize=10)
    fig.tight_layout()
    _save(fig, spec, result)


def spec_from_json(path) -> FigureSpec:
    with open(path) as fh:
        raw = json.load(fh)
    return FigureSpec(
        csv=Path(raw["csv"]), kind=raw["kind"], out=Path(raw["out"]),
        densities_csv=Path(raw["densities_csv"]) if raw.get("densities_csv")
        else None,
        logx=raw.get("logx"), logy=raw.get("logy"))
