"""Serialisation of results: JSON/CSV reports, SVG paving slices, matplotlib figures."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .certify import DextrousSpec, Verdict
from .kinematics import MachineKind, MachineModel
from .search import CubeResult

SWEEP_COLUMNS = ("lambda", "center_x", "center_y", "edge", "status")
VERDICT_NAMES = {Verdict.INSIDE: "inside", Verdict.OUTSIDE: "outside", Verdict.UNDETERMINED: "boundary"}


def clean(x: float, digits: int = 12) -> float:
    """Round away representation noise such as ``0.6420000000000001``."""
    return float(round(float(x), digits))


def params_dict(model: MachineModel, spec: DextrousSpec, alpha: float | None) -> dict:
    uranesx = model.kind is MachineKind.URANESX
    return {
        "L": model.L,
        "R": model.R if uranesx else None,
        "r": model.r if uranesx else None,
        "lambda": model.lam if uranesx else None,
        "psi_min": spec.psi_min,
        "psi_max": spec.psi_max,
        "alpha": alpha,
    }


def cube_report(
    model: MachineModel,
    spec: DextrousSpec,
    result: CubeResult,
    deterministic: bool = False,
) -> dict:
    stats = {"boxes": result.stats.boxes, "classify_calls": result.stats.classify_calls}
    if not deterministic:
        stats["wall_ms"] = round(result.stats.wall_ms, 3)
    return {
        "machine": model.kind.value,
        "params": params_dict(model, spec, result.alpha),
        "cube": {"center": [clean(c) for c in result.center], "edge": clean(result.edge)},
        "stats": stats,
        "incomplete": bool(result.incomplete),
    }


def to_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cube_report_csv(report: dict) -> str:
    p = report["params"]
    center = list(report["cube"]["center"]) + [None] * (3 - len(report["cube"]["center"]))
    row = {
        "machine": report["machine"],
        **{k: p[k] for k in ("L", "R", "r", "lambda", "psi_min", "psi_max", "alpha")},
        "center_x": center[0],
        "center_y": center[1],
        "center_z": center[2],
        "edge": report["cube"]["edge"],
        "boxes": report["stats"]["boxes"],
        "classify_calls": report["stats"]["classify_calls"],
    }
    if "wall_ms" in report["stats"]:
        row["wall_ms"] = report["stats"]["wall_ms"]
    row["incomplete"] = str(report["incomplete"]).lower()
    return _csv_text(list(row), [row])


def _csv_text(columns: Sequence[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row.get(k) is None else row[k]) for k in columns})
    return buf.getvalue()


def sweep_csv(rows: Iterable[dict]) -> str:
    return _csv_text(SWEEP_COLUMNS, rows)


def paving_csv(boxes: Sequence[tuple[np.ndarray, Verdict]], labels: Sequence[str]) -> str:
    columns = [f"{lab}_{end}" for lab in labels for end in ("lo", "hi")] + ["verdict"]
    rows = []
    for bounds, verdict in boxes:
        row = {f"{lab}_lo": repr(float(lo)) for lab, (lo, _) in zip(labels, bounds)}
        row.update({f"{lab}_hi": repr(float(hi)) for lab, (_, hi) in zip(labels, bounds)})
        row["verdict"] = VERDICT_NAMES[verdict]
        rows.append(row)
    return _csv_text(columns, rows)


_SVG_STYLE = {
    Verdict.INSIDE: 'fill="#3a9d5d" stroke="#1e5e36" stroke-width="0.5"',
    Verdict.UNDETERMINED: 'fill="#f2c94c" stroke="#a8861f" stroke-width="0.5"',
    Verdict.OUTSIDE: 'fill="#e6e6e6" stroke="#b0b0b0" stroke-width="0.5"',
}


def slice_rects(
    boxes: Sequence[tuple[np.ndarray, Verdict]], slice_z: float | None
) -> list[tuple[float, float, float, float, Verdict]]:
    """x-y rectangles of the boxes meeting the plane ``z = slice_z`` (all boxes if 2D)."""
    rects = []
    for bounds, verdict in boxes:
        if bounds.shape[0] == 3:
            if slice_z is None or not (bounds[2, 0] <= slice_z <= bounds[2, 1]):
                continue
        rects.append((bounds[0, 0], bounds[0, 1], bounds[1, 0], bounds[1, 1], verdict))
    return rects


def paving_svg(
    boxes: Sequence[tuple[np.ndarray, Verdict]],
    extent: np.ndarray,
    slice_z: float | None = None,
    size: int = 800,
) -> str:
    """Standalone SVG of a paving slice, one ``rect`` per box, y axis pointing up."""
    (x0, x1), (y0, y1) = extent[0], extent[1]
    scale = size / max(x1 - x0, y1 - y0)
    w = (x1 - x0) * scale
    h = (y1 - y0) * scale
    title = "dextrous workspace paving" + ("" if slice_z is None else f", z = {slice_z:g}")
    lines = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.1f}" height="{h:.1f}" '
        f'viewBox="0 0 {w:.1f} {h:.1f}">',
        f"<title>{title}</title>",
        f'<rect x="0" y="0" width="{w:.1f}" height="{h:.1f}" fill="white"/>',
    ]
    # outside first so inside and boundary boxes are never hidden
    order = (Verdict.OUTSIDE, Verdict.UNDETERMINED, Verdict.INSIDE)
    rects = slice_rects(boxes, slice_z)
    for verdict in order:
        lines.append(f'<g class="{VERDICT_NAMES[verdict]}">')
        for bx0, bx1, by0, by1, v in rects:
            if v is not verdict:
                continue
            px = (bx0 - x0) * scale
            py = (y1 - by1) * scale
            lines.append(
                f'<rect x="{px:.3f}" y="{py:.3f}" width="{(bx1 - bx0) * scale:.3f}" '
                f'height="{(by1 - by0) * scale:.3f}" {_SVG_STYLE[verdict]}/>'
            )
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_paving(
    boxes: Sequence[tuple[np.ndarray, Verdict]],
    path: str | Path,
    slice_z: float | None = None,
    cube: np.ndarray | None = None,
) -> None:
    from matplotlib.collections import PatchCollection
    from matplotlib.patches import Rectangle

    plt = _pyplot()
    colors = {Verdict.INSIDE: "#3a9d5d", Verdict.UNDETERMINED: "#f2c94c", Verdict.OUTSIDE: "#e6e6e6"}
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    rects = slice_rects(boxes, slice_z)
    for verdict in (Verdict.OUTSIDE, Verdict.UNDETERMINED, Verdict.INSIDE):
        patches = [Rectangle((a, c), b - a, d - c) for a, b, c, d, v in rects if v is verdict]
        ax.add_collection(
            PatchCollection(patches, facecolor=colors[verdict], edgecolor="none", label=VERDICT_NAMES[verdict])
        )
    if cube is not None:
        ax.add_patch(
            Rectangle(
                (cube[0, 0], cube[1, 0]),
                cube[0, 1] - cube[0, 0],
                cube[1, 1] - cube[1, 0],
                fill=False,
                edgecolor="black",
                linestyle="--",
            )
        )
    ax.autoscale_view()
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if slice_z is not None:
        ax.set_title(f"z = {slice_z:g}")
    handles = [Rectangle((0, 0), 1, 1, color=colors[v]) for v in (Verdict.INSIDE, Verdict.UNDETERMINED, Verdict.OUTSIDE)]
    ax.legend(handles, ["inside", "boundary", "outside"], loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(rows: Sequence[dict], path: str | Path) -> None:
    plt = _pyplot()
    ok = [r for r in rows if r.get("status") == "ok"]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot([r["lambda"] for r in ok], [r["edge"] for r in ok], "o-", color="#1f4e79")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("square edge")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
