"""Command-line front end.

Usage:
    dextrous eigen --machine orthoglide 0 0 0
    dextrous certify-box --machine orthoglide --box -0.05 0.05 -0.05 0.05 -0.05 0.05
    dextrous find-cube --machine orthoglide --psi-max 2 --alpha 0.001
    dextrous sweep --lambdas 0,0.05,0.1,0.15,0.2 --output table1.csv --figure table1.png
    dextrous pave --machine orthoglide --resolution 0.05 --slice-z 0.086 --output boxes.csv

Exit codes: 0 ok, 2 point outside the velocity bounds, 3 unreachable point,
64 usage error, 65 search budget exhausted, 66 output not writable.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import report
from .certify import DEFAULT_BUDGET, DextrousSpec, Verdict, classify
from .errors import BudgetExhausted, InvalidGeometry, OutsideReachableDomain
from .kinematics import (
    URANESX_R,
    URANESX_r,
    MachineKind,
    MachineModel,
    Pose,
    singularity_margins,
    transmission_factors_batch,
)
from .search import PAVE_BUDGET, CubeSearchConfig, find_largest_cube, joint_travel, pave_dextrous_workspace

log = logging.getLogger("dextrous")

EXIT_OK = 0
EXIT_OUT_OF_BOUNDS = 2
EXIT_UNREACHABLE = 3
EXIT_USAGE = 64
EXIT_BUDGET = 65
EXIT_IO = 66

DEFAULT_LAMBDAS = "0,0.05,0.1,0.15,0.2"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def rational(text: str) -> float:
    """Parse ``3/26``, ``0.5`` or ``1e-3`` exactly, then convert once to float."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def signs(text: str) -> tuple[int, int, int]:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"branch signs look like -1,-1,-1: {text!r}") from exc
    if len(vals) != 3 or any(v not in (-1, 1) for v in vals):
        raise argparse.ArgumentTypeError(f"branch signs look like -1,-1,-1: {text!r}")
    return vals  # type: ignore[return-value]


@dataclass(frozen=True)
class RunConfig:
    machine: MachineKind
    L: float
    R: float
    r: float
    lam: float
    branch_signs: tuple[int, int, int] | None
    psi_max: float
    psi_min: float | None
    alpha: float
    resolution: float
    output: str | None
    fmt: str
    workers: int
    max_boxes: int
    budget: int | None
    deterministic: bool

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        cfg = cls(
            machine=MachineKind(args.machine),
            L=args.L,
            R=args.R,
            r=args.r,
            lam=args.lam,
            branch_signs=args.branch_signs,
            psi_max=args.psi_max,
            psi_min=args.psi_min,
            alpha=args.alpha,
            resolution=args.resolution,
            output=args.output,
            fmt=args.format,
            workers=args.workers,
            max_boxes=args.max_boxes,
            budget=args.budget,
            deterministic=args.deterministic,
        )
        cfg.validate()
        return cfg

    def validate(self):
        if not self.alpha > 0:
            raise UsageError(f"--alpha must be positive, got {self.alpha}")
        if not self.resolution > 0:
            raise UsageError(f"--resolution must be positive, got {self.resolution}")
        if self.workers < 1:
            raise UsageError("--workers must be at least 1")
        if self.budget is not None and self.budget < 0:
            raise UsageError("--budget must be non-negative")
        if self.max_boxes < 1:
            raise UsageError("--max-boxes must be at least 1")
        try:
            self.spec()
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        self.model()

    def model(self, lam: float | None = None) -> MachineModel:
        try:
            if self.machine is MachineKind.ORTHOGLIDE:
                return MachineModel.orthoglide(L=self.L, branch_signs=self.branch_signs or (-1, -1, -1))
            return MachineModel.uranesx(
                R=self.R,
                r=self.r,
                lam=self.lam if lam is None else lam,
                L=self.L,
                branch_signs=self.branch_signs or (1, 1, 1),
            )
        except InvalidGeometry as exc:
            raise UsageError(str(exc)) from exc

    def depth(self, default: int = DEFAULT_BUDGET) -> int:
        return default if self.budget is None else self.budget

    def spec(self) -> DextrousSpec:
        return DextrousSpec.from_psi_max(self.psi_max, self.psi_min)

    def search(self) -> CubeSearchConfig:
        return CubeSearchConfig(spec=self.spec(), alpha=self.alpha, max_boxes=self.max_boxes, budget=self.depth())


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    report.write_text(path, text)


def cmd_eigen(cfg: RunConfig, args) -> int:
    model = cfg.model()
    coords = list(args.coords)
    if len(coords) == 2:
        coords.append(0.0)
    if len(coords) != 3:
        raise UsageError("eigen takes x y [z]")
    pose = Pose.of(coords)
    spec = cfg.spec()
    try:
        det_a, det_b = singularity_margins(model, pose)
    except OutsideReachableDomain:
        out = {"machine": model.kind.value, "pose": coords, "reachable": False}
        _emit(_format_point(out, cfg.fmt), cfg.output)
        return EXIT_UNREACHABLE
    psi = transmission_factors_batch(model, [coords])[0]
    finite = bool(np.all(np.isfinite(psi)))
    inside = finite and bool(spec.admits(psi))
    out = {
        "machine": model.kind.value,
        "pose": coords,
        "reachable": True,
        "psi": [report.clean(p) for p in psi] if finite else None,
        "det_A": report.clean(det_a),
        "det_B": report.clean(det_b),
        "dextrous": inside,
    }
    _emit(_format_point(out, cfg.fmt), cfg.output)
    return EXIT_OK if inside else EXIT_OUT_OF_BOUNDS


def _format_point(out: dict, fmt: str) -> str:
    if fmt == "json":
        return report.to_json(out)
    lines = [f"machine: {out['machine']}", "pose: " + " ".join(f"{c:g}" for c in out["pose"])]
    if not out["reachable"]:
        lines.append("reachable: no")
        return "\n".join(lines) + "\n"
    psi = out["psi"]
    lines += [
        "reachable: yes",
        "psi: " + ("singular" if psi is None else " ".join(f"{p:.12g}" for p in psi)),
        f"det_A: {out['det_A']:.12g}",
        f"det_B: {out['det_B']:.12g}",
        f"dextrous: {'yes' if out['dextrous'] else 'no'}",
    ]
    return "\n".join(lines) + "\n"


def cmd_certify_box(cfg: RunConfig, args) -> int:
    model = cfg.model()
    vals = list(args.box)
    if len(vals) not in (4, 6) or len(vals) // 2 < model.dim:
        raise UsageError(f"--box needs lo hi pairs for {model.dim} axes")
    bounds = np.array(vals, dtype=float).reshape(-1, 2)[: model.dim]
    if np.any(bounds[:, 0] > bounds[:, 1]):
        raise UsageError("--box lower bounds must not exceed upper bounds")
    verdict = classify(model, bounds, cfg.spec(), cfg.depth())
    out = {
        "machine": model.kind.value,
        "box": bounds.tolist(),
        "verdict": report.VERDICT_NAMES[verdict.code].replace("boundary", "undetermined"),
        "code": int(verdict.code),
        "midpoint_sigma": None if verdict.witness is None else [report.clean(s) for s in verdict.witness],
    }
    _emit(report.to_json(out), cfg.output)
    return EXIT_OK


def cmd_find_cube(cfg: RunConfig, args) -> int:
    model = cfg.model()
    code = EXIT_OK
    try:
        result = find_largest_cube(model, cfg.search())
    except BudgetExhausted as exc:
        log.warning("%s; emitting the best cube found so far", exc)
        result = exc.partial
        code = EXIT_BUDGET
    rep = report.cube_report(model, cfg.spec(), result, cfg.deterministic)
    text = report.to_json(rep) if cfg.fmt == "json" else report.cube_report_csv(rep)
    _emit(text, cfg.output)
    if model.kind is MachineKind.URANESX and result.half_edge > 0:
        travel = joint_travel(model, result)
        log.info("joint travel over the square: %.6g; z range needed: %.6g", travel, result.edge + travel)
    return code


def _sweep_row(cfg: RunConfig, lam: float) -> dict:
    row = {"lambda": lam, "center_x": None, "center_y": None, "edge": None}
    try:
        model = cfg.model(lam)
    except UsageError:
        row["status"] = "invalid-geometry"
        return row
    try:
        result = find_largest_cube(model, cfg.search())
        row["status"] = "ok"
    except BudgetExhausted as exc:
        result = exc.partial
        row["status"] = "incomplete"
    row.update(
        center_x=report.clean(result.center[0]),
        center_y=report.clean(result.center[1]),
        edge=report.clean(result.edge),
    )
    return row


def parse_lambdas(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        return [rational(t) for t in text.split(",")]
    except argparse.ArgumentTypeError as exc:
        raise UsageError(str(exc)) from exc


def cmd_sweep(cfg: RunConfig, args) -> int:
    if cfg.machine is not MachineKind.URANESX:
        raise UsageError("sweep varies the UraneSX base radius; use --machine uranesx")
    lambdas = parse_lambdas(args.lambdas)
    if cfg.workers > 1 and len(lambdas) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_sweep_row, [cfg] * len(lambdas), lambdas))
    else:
        rows = [_sweep_row(cfg, lam) for lam in lambdas]
    text = report.sweep_csv(rows) if cfg.fmt == "csv" else report.to_json(rows)
    _emit(text, cfg.output)
    if args.figure:
        report.plot_sweep(rows, args.figure)
    return EXIT_OK


def cmd_pave(cfg: RunConfig, args) -> int:
    model = cfg.model()
    boxes = pave_dextrous_workspace(
        model,
        cfg.spec(),
        cfg.resolution,
        budget=cfg.depth(PAVE_BUDGET),
        max_boxes=cfg.max_boxes,
        workers=cfg.workers,
    )
    labels = ("x", "y", "z")[: model.dim]
    output = cfg.output or f"paving-{model.kind.value}.csv"
    svg_path = args.svg
    if svg_path is None and output != "-":
        svg_path = str(Path(output).with_suffix(".svg"))
    slice_z = args.slice_z if model.dim == 3 else None
    _emit(report.paving_csv(boxes, labels), output)
    extent = np.tile([-model.L, model.L], (2, 1)).astype(float)
    if svg_path:
        report.write_text(svg_path, report.paving_svg(boxes, extent, slice_z))
    if args.figure:
        report.plot_paving(boxes, args.figure, slice_z)
    counts = {name: 0 for name in report.VERDICT_NAMES.values()}
    for _, v in boxes:
        counts[report.VERDICT_NAMES[v]] += 1
    log.info("paving: %s", json.dumps(counts))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--machine", choices=[k.value for k in MachineKind], default="orthoglide")
    common.add_argument("--L", type=rational, default=1.0, help="leg length")
    common.add_argument("--R", type=rational, default=URANESX_R, help="UraneSX base radius (default 7/13)")
    common.add_argument("--r", type=rational, default=URANESX_r, help="UraneSX platform radius (default 3/26)")
    common.add_argument("--lambda", dest="lam", type=rational, default=0.0, help="UraneSX base radius increase")
    common.add_argument("--branch-signs", type=signs, default=None, help="assembly mode per leg, e.g. -1,-1,-1")
    common.add_argument("--psi-max", type=rational, default=2.0)
    common.add_argument("--psi-min", type=rational, default=None, help="defaults to 1/psi-max")
    common.add_argument("--alpha", type=rational, default=0.001, help="search accuracy")
    common.add_argument("--resolution", type=rational, default=0.05, help="paving box width")
    common.add_argument("--output", default=None, help="output file (stdout if omitted)")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--max-boxes", type=int, default=5_000_000)
    common.add_argument(
        "--budget", type=int, default=None, help="bisection depth per zero-exclusion proof (48; 12 when paving)"
    )
    common.add_argument("--deterministic", action="store_true", help="omit wall-clock fields")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="dextrous", description=__doc__.split("\n")[0], allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eigen", parents=[common], help="transmission factors at one pose", allow_abbrev=False)
    p.add_argument("coords", type=rational, nargs="+", metavar="COORD", help="x y [z]")
    p.set_defaults(func=cmd_eigen, default_format="text")

    p = sub.add_parser("certify-box", parents=[common], help="classify one box", allow_abbrev=False)
    p.add_argument("--box", type=rational, nargs="+", required=True, metavar="BOUND", help="x_lo x_hi y_lo y_hi [z_lo z_hi]")
    p.set_defaults(func=cmd_certify_box, default_format="json")

    p = sub.add_parser("find-cube", parents=[common], help="largest certified cube or square", allow_abbrev=False)
    p.set_defaults(func=cmd_find_cube, default_format="json")

    p = sub.add_parser("sweep", parents=[common], help="UraneSX edge length versus lambda", allow_abbrev=False)
    p.add_argument("--lambdas", default=DEFAULT_LAMBDAS, help="comma-separated lambda values")
    p.add_argument("--figure", default=None, help="PNG plot of edge versus lambda")
    p.set_defaults(func=cmd_sweep, default_format="csv", machine_default="uranesx")

    p = sub.add_parser("pave", parents=[common], help="inside/outside/boundary paving", allow_abbrev=False)
    p.add_argument("--slice-z", type=rational, default=0.086, help="z of the SVG slice (Orthoglide)")
    p.add_argument("--svg", default=None, help="SVG slice path (default: next to --output)")
    p.add_argument("--figure", default=None, help="PNG rendering of the slice")
    p.set_defaults(func=cmd_pave, default_format="csv")
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    machine_given = any(a == "--machine" or a.startswith("--machine=") for a in argv)
    if getattr(args, "machine_default", None) and not machine_given:
        args.machine = args.machine_default
    if args.format is None:
        args.format = args.default_format
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = RunConfig.from_args(args)
        return args.func(cfg, args)
    except UsageError as exc:
        print(f"dextrous: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"dextrous: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
