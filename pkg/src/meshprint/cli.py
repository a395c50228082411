"""``meshprint`` command line: surface, relief, slice, validate.

Exit codes: 0 success, 1 a model or file failed a check, 2 bad usage.
"""
from __future__ import annotations

import argparse
import datetime
import math
import sys
import warnings
from pathlib import Path

from . import expr, heightfield, mesh, preview, slicer, stl_io, toolpath
from .errors import EmptyPrint, MeshPrintError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
RELIEF_PLINTH = 1.0
TRIAL_LAYER = 0.2


class _Usage(Exception):
    pass


def _positive(name, value):
    if value is not None and not (value > 0 and math.isfinite(value)):
        raise _Usage(f"{name} must be positive, got {value}")


def _build_parser():
    p = argparse.ArgumentParser(prog="meshprint", description="Heightfield surfaces to STL, STL to G-code.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("surface", help="sample z = f(x, y) into a solid")
    s.add_argument("--fn", required=True, help="expression in x and y, e.g. 'sqrt(1-x^2-y^2)'")
    for name in ("xmin", "xmax", "ymin", "ymax"):
        s.add_argument(f"--{name}", type=float, required=True)
    s.add_argument("--res", type=float, default=5.0, help="samples per mm (default 5)")
    s.add_argument("--region", help="keep only points where this expression is > 0")
    s.add_argument("--floor", type=float, default=0.0, help="lowest height kept (mm)")
    s.add_argument("--plinth", type=float, default=0.0, help="lift the surface by this many mm")
    s.add_argument("--shell-only", action="store_true", help="write the open top surface only")
    _output_args(s)

    r = sub.add_parser("relief", help="image, elevation or depth grid into a solid")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--image", help="PGM raster (P2 or P5)")
    src.add_argument("--grid", help="text file of numbers, optional Width/Height header")
    r.add_argument("--mode", choices=("image", "elevation", "depth"))
    r.add_argument("--scale", type=float, help="mm per unit (image: plateau height)")
    r.add_argument("--threshold", type=float, default=0.5)
    r.add_argument("--lo", type=float, default=heightfield.DEPTH_LO)
    r.add_argument("--hi", type=float, default=heightfield.DEPTH_HI)
    r.add_argument("--pad", type=int, default=heightfield.DEFAULT_PAD)
    r.add_argument("--length-x", type=int, help="values per row (default: the file's Width header)")
    r.add_argument("--mirror", action="store_true", help="reverse each row (depth cameras see a mirror image)")
    r.add_argument("--spacing", type=float, default=1.0, help="mm between grid samples")
    r.add_argument("--plinth", type=float, default=RELIEF_PLINTH,
                   help=f"base slab under the relief in mm (default {RELIEF_PLINTH})")
    _output_args(r)

    c = sub.add_parser("slice", help="slice an STL into G-code")
    c.add_argument("input")
    c.add_argument("--config", help="profile file of 'field = value' lines")
    c.add_argument("--layer-height", type=float)
    c.add_argument("--fill", type=float, help="fill fraction in [0, 1]")
    c.add_argument("--raft", type=int, help="raft layers")
    c.add_argument("--width", type=float, help="extrusion width (mm)")
    c.add_argument("--filament", type=float, help="filament diameter (mm)")
    c.add_argument("--temp", type=float, help="extruder temperature (C)")
    c.add_argument("--supports", action="store_true", help="add pillars under overhangs")
    c.add_argument("--gcode", help="output G-code path")
    c.add_argument("--svg-dir", help="write one SVG per layer here")
    c.add_argument("--force", action="store_true", help="continue past watertightness and contour failures")
    c.add_argument("--no-timestamp", action="store_true", help="omit the time from the G-code header")
    c.add_argument("--workers", type=int, default=1)

    v = sub.add_parser("validate", help="check an STL for watertightness and clean slices")
    v.add_argument("input")
    v.add_argument("--layer-height", type=float, default=TRIAL_LAYER)
    return p


def _output_args(p):
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--binary", action="store_true", help="write binary STL")
    p.add_argument("--name", help="solid name for ASCII STL")


def _write_mesh(m, args, out):
    n = stl_io.write_stl(m, args.output, binary=args.binary, name=args.name or Path(args.output).stem)
    report = mesh.validate_watertight(m)
    out(f"wrote {args.output}: {len(m)} facets, {n} bytes")
    if not report.watertight:
        out(f"warning: mesh is not watertight ({report.summary()})")
    return EXIT_OK


def cmd_surface(args, out):
    _positive("--res", args.res)
    if args.plinth < 0:
        raise _Usage(f"--plinth must be >= 0, got {args.plinth}")
    f = expr.parse_expression(args.fn)
    region = expr.parse_expression(args.region) if args.region else None
    h = heightfield.from_function(f, args.xmin, args.xmax, args.ymin, args.ymax, args.res,
                                  region=region, floor=args.floor)
    m = mesh.tessellate_heightfield(h, closed=not args.shell_only, plinth=args.plinth)
    return _write_mesh(m, args, out)


def cmd_relief(args, out):
    _positive("--spacing", args.spacing)
    _positive("--scale", args.scale)
    if args.pad < 0:
        raise _Usage(f"--pad must be >= 0, got {args.pad}")
    if args.plinth < 0:
        raise _Usage(f"--plinth must be >= 0, got {args.plinth}")
    mode = args.mode or ("image" if args.image else "elevation")
    if args.image:
        if mode != "image":
            raise _Usage("--image only works with --mode image")
        px = heightfield.read_pgm(args.image)
        scale = heightfield.IMAGE_HEIGHT if args.scale is None else args.scale
        h = heightfield.from_image(px, args.threshold, scale, args.pad, args.spacing)
    else:
        if mode == "image":
            raise _Usage("--mode image needs --image")
        values, width, _ = heightfield.read_grid_text(Path(args.grid))
        length_x = args.length_x or width
        if not length_x:
            raise _Usage(f"{args.grid} has no Width header; pass --length-x")
        if len(values) == 0:
            raise MeshPrintError(f"{args.grid}: no values")
        if mode == "elevation":
            scale = heightfield.ELEVATION_SCALE if args.scale is None else args.scale
            spec = heightfield.GridSourceSpec(length_x, len(values), scale, args.pad)
            h = heightfield.from_flat_grid(values, spec, args.spacing)
        else:
            scale = heightfield.DEPTH_SCALE if args.scale is None else args.scale
            spec = heightfield.GridSourceSpec(length_x, len(values), scale, args.pad)
            h = heightfield.from_depth_grid(values, spec, args.lo, args.hi, args.mirror, spacing=args.spacing)
    out(f"grid {h.rows}x{h.cols} ({mode})")
    m = mesh.tessellate_heightfield(h, plinth=args.plinth)
    return _write_mesh(m, args, out)


def _config(args):
    cfg = {}
    if args.config:
        cfg.update(toolpath.parse_profile(Path(args.config).read_text()))
    flags = {
        "layer_thickness": args.layer_height,
        "fill_fraction": args.fill,
        "raft_layers": args.raft,
        "extrusion_width": args.width,
        "filament_diameter": args.filament,
        "extruder_temp": args.temp,
    }
    cfg.update({k: v for k, v in flags.items() if v is not None})
    try:
        return toolpath.PrintConfig(**cfg)
    except ValueError as exc:
        raise _Usage(str(exc)) from None


def cmd_slice(args, out):
    cfg = _config(args)
    m = stl_io.read_stl(args.input)
    report = mesh.validate_watertight(m)
    if not report.ok:
        for line in report.lines():
            out(line)
        if not args.force:
            out("refusing to slice: mesh is not a clean closed solid (use --force to override)")
            return EXIT_FAIL
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", EmptyPrint)
        layers = slicer.slice_mesh(m, cfg.layer_thickness, check=False, force=args.force, workers=args.workers)
    for w in caught:
        out(f"warning: {w.message}")
    findings = slicer.validate_contours(layers)
    if not findings.clean:
        for f in findings.findings[:20]:
            out(str(f))
        if not args.force:
            out(f"refusing to print: {len(findings.findings)} contour problem(s) (use --force to override)")
            return EXIT_FAIL
    overhangs = toolpath.detect_overhangs(m, cfg) if args.supports else None
    tp = toolpath.plan_toolpath(layers, cfg, overhangs)
    for w in tp.warnings:
        out(f"warning: {w}")
    if args.gcode:
        stamp = None if args.no_timestamp else datetime.datetime.now().isoformat(timespec="seconds")
        Path(args.gcode).write_bytes(toolpath.emit_gcode(tp, cfg, stamp))
    if args.svg_dir:
        preview.write_layer_svgs(layers, args.svg_dir, tp)
    out(f"layers: {len(tp.layers)} ({len(layers)} model"
        f"{f', {cfg.raft_layers} raft' if cfg.raft_layers and layers else ''})")
    if overhangs is not None:
        out(f"overhang facets: {len(overhangs.facets)}, support pillars: {len(overhangs.columns)}")
    out(f"extrusion path: {tp.extrude_length():.1f} mm, travel: {tp.travel_length():.1f} mm")
    out(f"filament: {tp.filament_length():.1f} mm")
    return EXIT_OK


def cmd_validate(args, out):
    _positive("--layer-height", args.layer_height)
    m = stl_io.read_stl(args.input)
    report = mesh.validate_watertight(m)
    for line in report.lines():
        out(line)
    status = EXIT_OK if report.ok else EXIT_FAIL
    if report.normal_mismatch and report.ok:
        out("warning: stored normals disagree with vertex winding (readers use the winding)")
    if len(m):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EmptyPrint)
            layers = slicer.slice_mesh(m, args.layer_height, check=False, force=True)
        findings = slicer.validate_contours(layers)
        out(f"trial slice: {len(layers)} layers at {args.layer_height} mm, {len(findings.findings)} contour problem(s)")
        for f in findings.findings[:20]:
            out(str(f))
        if not findings.clean:
            status = EXIT_FAIL
    out("clean" if status == EXIT_OK else "problems found")
    return status


COMMANDS = {"surface": cmd_surface, "relief": cmd_relief, "slice": cmd_slice, "validate": cmd_validate}


def main(argv=None, out=None, err=None) -> int:
    out = out or (lambda s: print(s))
    err = err or (lambda s: print(s, file=sys.stderr))
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return COMMANDS[args.command](args, out)
    except _Usage as exc:
        err(f"meshprint {args.command}: error: {exc}")
        return EXIT_USAGE
    except (MeshPrintError, OSError, ValueError) as exc:
        err(f"meshprint {args.command}: {exc}")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
