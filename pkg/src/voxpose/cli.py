"""Command-line interface tying the pipeline together.

Subcommands: fit-basis, generate, transform, project, synth, fit, eval.
Exit code 0 on success, 2 on any input or validation error.  All commands
are deterministic given their flags and seeds.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as vio
from .fit import FitConfig, fit_pose_style, synthesize_target
from .metrics import EvalRecord, evaluate_records
from .projection import project_max, project_soft
from .rotation import PoseParams
from .shape import augment_scales, fit_basis, generate
from .warp import transform_grid


def _parse_floats(text: str, expected: int | None = None, what: str = "value") -> np.ndarray:
    try:
        values = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ValueError(f"could not parse {what} list {text!r}")
    if expected is not None and values.size != expected:
        raise ValueError(f"expected {expected} {what}s, got {values.size}")
    return values


def _parse_pose(text: str) -> PoseParams:
    return PoseParams.from_vector(_parse_floats(text, 5, "pose component"))


def _cmd_fit_basis(args) -> int:
    shape_dir = Path(args.shapes)
    paths = sorted(shape_dir.glob("*.voxl"))
    if not paths:
        raise ValueError(f"no .voxl files in {shape_dir}")
    shapes = [vio.read_voxl(p) for p in paths]
    for p, g in zip(paths, shapes):
        if not g.binary:
            raise ValueError(f"{p}: fit-basis needs binary grids")
    if args.scales:
        scales = _parse_floats(args.scales, what="scale")
        shapes = augment_scales(shapes, scales, rng_seed=args.seed)
    basis = fit_basis(shapes, args.m)
    vio.write_basis(args.out, basis)
    print(f"fitted basis: q={basis.q} m={basis.m} on {len(shapes)} shapes -> {args.out}")
    return 0


def _cmd_generate(args) -> int:
    basis = vio.read_basis(args.basis)
    style = _parse_floats(args.style, basis.m, "style coordinate")
    vio.write_voxl(args.out, generate(basis, style))
    return 0


def _cmd_transform(args) -> int:
    grid = vio.read_voxl(args.infile)
    pose = _parse_pose(args.pose)
    vio.write_voxl(args.out, transform_grid(grid, pose))
    return 0


def _cmd_project(args) -> int:
    grid = vio.read_voxl(args.infile)
    sil = project_max(grid) if args.mode == "max" else project_soft(grid)
    vio.write_pgm(args.out, sil)
    return 0


def _cmd_synth(args) -> int:
    basis = vio.read_basis(args.basis)
    style = _parse_floats(args.style, basis.m, "style coordinate")
    pose = _parse_pose(args.pose)
    sil = synthesize_target(
        basis, style, pose, binarize=not args.soft, noise=args.noise, seed=args.seed
    )
    vio.write_pgm(args.out, sil)
    return 0


def _cmd_fit(args) -> int:
    target = vio.read_pgm(args.target)
    basis = vio.read_basis(args.basis)
    config = FitConfig.from_file(args.config) if args.config else FitConfig()
    result = fit_pose_style(target, basis, config)

    out = Path(args.out)
    sil_path = out.with_name(out.stem + ".pred.pgm")
    grid_path = out.with_name(out.stem + ".pred.voxl")
    posed = transform_grid(generate(basis, result.s), result.p)
    vio.write_voxl(grid_path, posed)
    vio.write_pgm(sil_path, project_soft(posed))

    report = {
        "pose": [float(v) for v in result.p.as_vector()],
        "style": [float(v) for v in result.s],
        "final_loss": result.final_loss,
        "restart_index": result.restart_index,
        "iterations_run": result.iterations_run,
        "pred_silhouette": str(sil_path),
        "pred_grid": str(grid_path),
    }
    out.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"fit: loss={result.final_loss:.6g} restart={result.restart_index} -> {out}")
    return 0


def _cmd_eval(args) -> int:
    entries = vio.load_manifest(args.manifest)
    pred_dir = Path(args.pred)
    records = []
    for entry in entries:
        gt_sil = vio.read_pgm(entry.silhouette_path)
        gt_grid = vio.read_voxl(entry.gt_grid_path) if entry.gt_grid_path else None
        gt_pose = PoseParams.from_vector(entry.gt_pose) if entry.gt_pose is not None else None

        sil_path = pred_dir / f"{entry.id}.pgm"
        grid_path = pred_dir / f"{entry.id}.voxl"
        pose_path = pred_dir / f"{entry.id}.pose"
        pred_sil = vio.read_pgm(sil_path) if sil_path.exists() else None
        pred_grid = vio.read_voxl(grid_path) if grid_path.exists() else None
        pred_pose = None
        if pose_path.exists():
            pred_pose = PoseParams.from_vector(
                _parse_floats(",".join(pose_path.read_text().split()), 5, "pose component")
            )
        records.append(
            EvalRecord(
                pred_grid=pred_grid,
                gt_grid=gt_grid,
                pred_sil=pred_sil,
                gt_sil=gt_sil,
                pred_pose=pred_pose,
                gt_pose=gt_pose,
            )
        )
    report = evaluate_records(records, frame=args.frame)
    Path(args.out).write_text(report.to_tsv() + "\n", encoding="utf-8")
    print(report.to_table())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voxpose",
        description="Pose-aware voxel shape fitting from single silhouettes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-basis", help="fit a style basis to a directory of binary VOXL grids")
    p.add_argument("--shapes", required=True, help="directory of .voxl files")
    p.add_argument("--m", type=int, required=True, help="number of basis components")
    p.add_argument("--out", required=True, help="output .voxb path")
    p.add_argument("--scales", default=None, help="comma-separated scale augmentation factors in (0,1]")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_fit_basis)

    p = sub.add_parser("generate", help="decode a style vector to a voxel grid")
    p.add_argument("--basis", required=True)
    p.add_argument("--style", required=True, help="comma-separated style coordinates")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("transform", help="rigidly transform a voxel grid")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--pose", required=True, help="w1,w2,w3,tx,ty")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("project", help="project a voxel grid to a silhouette")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--mode", choices=("max", "soft"), default="max")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("synth", help="synthesize a target silhouette from style and pose")
    p.add_argument("--basis", required=True)
    p.add_argument("--style", required=True)
    p.add_argument("--pose", required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--soft", action="store_true", help="noisy-or projection without binarization")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("fit", help="recover style and pose from a target silhouette")
    p.add_argument("--target", required=True, help="target PGM silhouette")
    p.add_argument("--basis", required=True)
    p.add_argument("--config", default=None, help="key=value fit configuration file")
    p.add_argument("--out", required=True, help="output report path (JSON)")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("eval", help="evaluate predictions against a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--pred", required=True, help="directory of <id>.voxl/.pgm/.pose predictions")
    p.add_argument("--frame", type=float, default=30.0, help="frame size for translation error")
    p.add_argument("--out", required=True, help="output report path (TSV line)")
    p.set_defaults(func=_cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
