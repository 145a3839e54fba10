"""Report emission: atomic file writes, JSON/CSV/plot-data, and figures.

Outputs are deterministic for a fixed input: keys are sorted, no
timestamps, fixed float repr.  Every write goes through a temp file and an
atomic rename so a crashed run never leaves a half-written artifact.
"""
from __future__ import annotations

import csv
import io
import json
import os
import shutil
import tempfile

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path: str, blob: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def jsonable(obj):
    """Recursively coerce numpy scalars/arrays so json can serialize them."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_json(path: str, obj) -> None:
    atomic_write_text(path, json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n")


def write_csv(path: str, header: list, rows: list) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    atomic_write_text(path, buf.getvalue())


def write_plot_data(path: str, comment: str, rows: list) -> None:
    """Two-column whitespace-separated data with a leading # header."""
    lines = [f"# {comment}"]
    for a, b in rows:
        lines.append(f"{float(a)!r} {float(b)!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def copy_config(src_path: str, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    shutil.copyfile(src_path, os.path.join(out_dir, "config.json"))


def _save(fig, path: str) -> None:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=120)
    plt.close(fig)
    atomic_write_bytes(path, buf.getvalue())


def render_convergence_figure(path: str, eps_values, errors) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    ax.loglog(eps_values, errors, "o-")
    ax.set_xlabel(r"$\varepsilon$")
    ax.set_ylabel(r"$\|u^\varepsilon - u_0\|_{L^2}$")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def render_profile_figure(path: str, x, curves: dict) -> None:
    """Overlay solution profiles; curves maps label -> values on x."""
    fig, ax = plt.subplots(figsize=(5.6, 3.8))
    for label, vals in curves.items():
        ax.plot(x, vals, label=label, linewidth=1.2)
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def render_translation_figure(path: str, rows) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    coarse = [(r.shift, r.energy) for r in rows if r.regime == "coarse" and r.shift > 0]
    fine = [(r.shift, r.energy) for r in rows if r.regime == "fine" and r.shift > 0]
    if coarse:
        ax.loglog(*zip(*coarse), "o-", label=r"$|h| \geq 3M\varepsilon$")
    if fine:
        ax.loglog(*zip(*fine), "s--", label=r"$|h| < 3M\varepsilon$")
    ax.set_xlabel("|h|")
    ax.set_ylabel("T(h)")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def render_exterior_figure(path: str, rows) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    ax.semilogy([r.n for r in rows], [max(r.tail, 1e-300) for r in rows], "o-")
    ax.set_xlabel("cutoff scale n")
    ax.set_ylabel(r"$\int \psi_n u^2$")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    _save(fig, path)
