"""Report rendering: delimited outputs (tube CSV, audit/region/certificate
JSON) plus matplotlib figures saved alongside them.

All JSON is written with sorted keys and no timestamps so reruns with the
same config and seed are bit-identical; figures are presentation artifacts
and are exempt from the bit-identity guarantee.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, (np.floating, np.integer)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)!r}")


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1, default=_json_default)
        fh.write("\n")


def _sanitize(x):
    return None if isinstance(x, float) and not math.isfinite(x) else x


# ---------------------------------------------------------------------------
# Figures
# ---------------------------------------------------------------------------

def tube_figure(tube, path, title: str = None):
    """Center curves with the radius band, and the diagnostics track."""
    us = tube.us
    centers = tube.centers
    radii = tube.radii
    fig, axes = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    ax = axes[0]
    ax.plot(us, centers.real, color="C0", lw=1.2, label="Re center")
    ax.fill_between(us, centers.real - radii, centers.real + radii,
                    color="C0", alpha=0.25)
    ax.plot(us, centers.imag, color="C3", lw=1.2, label="Im center")
    ax.fill_between(us, centers.imag - radii, centers.imag + radii,
                    color="C3", alpha=0.25)
    ax.set_ylabel("center ± R")
    ax.legend(loc="best", fontsize=8)
    ax.set_title(title or f"{tube.tube_id} ({tube.method})")
    ax = axes[1]
    tk = np.array([f.extra.get("T", f.extra.get("kappa", np.nan))
                   for f in tube.frames])
    ax.plot(us, tk, color="C2", lw=1.0, label="T or kappa")
    mm = np.array([f.extra.get("min_margin", np.nan) for f in tube.frames])
    if np.any(np.isfinite(mm)):
        ax2 = ax.twinx()
        ax2.plot(us, mm, color="C7", lw=0.8, label="frame margin")
        ax2.set_yscale("symlog", linthresh=1e-12)
        ax2.set_ylabel("margin")
    ax.set_xlabel("u")
    ax.set_ylabel("T / kappa")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def potential_figure(model, path, markers: dict = None, upper=None):
    upper = upper or 0.5 * math.pi
    us = np.geomspace(1e-3, upper, 800)
    vals = np.array([model.value(u) for u in us])
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    ax.plot(us, vals.real, label="Re V", color="C0")
    ax.plot(us, vals.imag, label="Im V", color="C3")
    ax.set_yscale("symlog", linthresh=1.0)
    for name, u in (markers or {}).items():
        if u is None:
            continue
        ax.axvline(u, color="C7", lw=0.6)
        ax.text(u, ax.get_ylim()[1], name, rotation=90, fontsize=6,
                va="top", ha="right")
    ax.set_xlabel("u")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def sweep_figure(report: dict, path):
    fits = report["fits"]
    n = len(fits)
    fig, axes = plt.subplots(1, max(n, 1), figsize=(3.2 * max(n, 1), 3.2))
    if n == 1:
        axes = [axes]
    for ax, (name, fit) in zip(np.atleast_1d(axes), fits.items()):
        x = np.array(fit["omega_abs"])
        y = np.array(fit["values"])
        ax.loglog(x, y, "o", color="C0")
        slope = fit["exponent"]
        c = y[0] / x[0] ** slope
        ax.loglog(x, c * x ** slope, "-", color="C3", lw=0.9,
                  label=f"slope {slope:.3f}")
        ax.set_title(name, fontsize=9)
        ax.set_xlabel("|Omega|")
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def certificate_figure(cert, path):
    fig, axes = plt.subplots(len(cert.halves), 1,
                             figsize=(7.5, 3.0 * len(cert.halves)),
                             squeeze=False)
    for ax, half in zip(axes[:, 0], cert.halves):
        for r in half.regions:
            us = r.tube.us
            centers = r.tube.centers
            radii = r.tube.radii
            color = "C2" if r.verdict == "PASS" else "C3"
            ax.fill_between(us, centers.imag - radii, centers.imag + radii,
                            alpha=0.3, color=color)
            ax.plot(us, centers.imag, lw=0.9, color=color)
            ax.text(0.5 * (r.interval[0] + r.interval[1]),
                    float(np.nanmax(centers.imag + radii)),
                    r.name, fontsize=6, ha="center", va="bottom")
        ax.set_yscale("symlog", linthresh=1.0)
        ax.set_title(f"{half.side} half: {half.verdict}", fontsize=9)
        ax.set_xlabel("u")
        ax.set_ylabel("Im center ± R")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---------------------------------------------------------------------------
# Bundles (delimited output + figures side by side)
# ---------------------------------------------------------------------------

def emit_tube(tube, audit, outdir, stem: str, plots: bool = True):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    tube.to_csv(outdir / f"{stem}.csv")
    write_json(audit.to_dict(), outdir / f"{stem}.audit.json")
    if plots:
        tube_figure(tube, outdir / f"{stem}.png")
    return [outdir / f"{stem}.csv", outdir / f"{stem}.audit.json"]


def emit_certificate(cert, outdir, plots: bool = True):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_json(cert.to_dict(), outdir / "certificate.json")
    for half in cert.halves:
        for r in half.regions:
            stem = f"{half.side}_{r.name}"
            r.tube.to_csv(outdir / f"{stem}.csv")
            write_json(r.audit.to_dict(), outdir / f"{stem}.audit.json")
            if plots:
                tube_figure(r.tube, outdir / f"{stem}.png")
        write_json(half.region_table.to_dict(),
                   outdir / f"{half.side}_regions.json")
    if plots:
        certificate_figure(cert, outdir / "certificate.png")
    return outdir / "certificate.json"


def emit_sweep(report: dict, outdir, plots: bool = True):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_json(report, outdir / "sweep.json")
    with open(outdir / "sweep.csv", "w") as fh:
        fh.write("fit,omega_abs,value\n")
        for name, fit in report["fits"].items():
            for x, y in zip(fit["omega_abs"], fit["values"]):
                fh.write(f"{name},{x:.17g},{y:.17g}\n")
    if plots:
        sweep_figure(report, outdir / "sweep.png")
    return outdir / "sweep.json"
