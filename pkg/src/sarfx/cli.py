"""Command-line surface tying the modules into reproducible runs.

Subcommands: forge, attack, estimate-filter, metrics, spectrum, tile,
experiment. All randomness flows from explicit seeds; outputs are
deterministic given identical inputs and flags.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .attack import AttackConfig, run_attack
from .experiment import ExperimentConfig, run_experiment
from .forgery import EDIT_KINDS, EditOp, SpliceSpec, edit_donor, sample_edit_parameter, splice
from .metrics import evaluate_pair
from .raster import (
    AmplitudeImage,
    ComplexImage,
    RasterError,
    TamperMask,
    read_raster,
    write_mask_pgm,
    write_raster,
)
from .spectral import azimuthal_profile, forward_dft, profile_to_csv
from .speckle import DEFAULT_SIGMA_S
from .sysid import (
    STRATEGY_KNOWN,
    TransferFunction,
    default_smoothing,
    estimate_transfer_function_with_params,
)
from .raster import tile as tile_raster

_REGION_RE = re.compile(r"^(\d+)x(\d+)(?:\+(\d+)\+(\d+))?$")


class CliError(Exception):
    """User-facing command failure (bad inputs, unreadable files)."""


def parse_region(text: str):
    """Parse WxH[+x+y] into (height, width, col, row); offsets may be None."""
    match = _REGION_RE.match(text)
    if not match:
        raise CliError(f"bad region syntax {text!r}; expected WxH or WxH+x+y")
    w, h = int(match.group(1)), int(match.group(2))
    col = int(match.group(3)) if match.group(3) is not None else None
    row = int(match.group(4)) if match.group(4) is not None else None
    return h, w, col, row


def parse_filter_spec(text: str):
    """Parse ``known:<path>`` or ``estimate:<strategy>:<p1,p2,...>``."""
    kind, _, rest = text.partition(":")
    if kind == "known":
        if not rest:
            raise CliError("known filter needs a path: known:<path>")
        return {"known": rest}
    if kind == "estimate":
        strategy, _, paths = rest.partition(":")
        strategy = strategy.replace("-", "_")
        sources = [p for p in paths.split(",") if p]
        if not strategy or not sources:
            raise CliError("estimate filter needs estimate:<strategy>:<path,path,...>")
        return {"strategy": strategy, "sources": sources}
    raise CliError(f"unknown filter spec {text!r}; use known:<path> or estimate:...")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sarfx",
        description="SAR amplitude counter-forensics: forgery, re-acquisition attack, metrics",
    )
    parser.add_argument("--version", action="version", version=f"sarfx {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_tile = sub.add_parser("tile", help="cut a raster into overlapping tiles")
    p_tile.add_argument("--input", required=True)
    p_tile.add_argument("--size", type=int, required=True)
    p_tile.add_argument("--overlap", type=int, default=0)
    p_tile.add_argument("--out-dir", required=True)

    p_spec = sub.add_parser("spectrum", help="emit the radial spectrum profile as CSV")
    p_spec.add_argument("--input", required=True)
    p_spec.add_argument("--out", default="-")

    p_est = sub.add_parser("estimate-filter", help="estimate the system frequency response")
    p_est.add_argument(
        "--strategy", required=True, choices=["gaussian", "raised-cosine", "direct"]
    )
    p_est.add_argument("--sources", nargs="+", required=True)
    p_est.add_argument("--out", required=True)
    p_est.add_argument("--smoothing-sigma", type=float, default=None)
    p_est.add_argument("--smoothing-kernel", type=int, default=None)

    p_forge = sub.add_parser("forge", help="create a spliced image and its mask")
    p_forge.add_argument("--target", required=True)
    p_forge.add_argument("--donor", required=True)
    p_forge.add_argument("--edit", default="none", choices=list(EDIT_KINDS))
    p_forge.add_argument("--edit-class", default="near", choices=["near", "far", "fixed"])
    p_forge.add_argument("--edit-parameter", type=float, default=None)
    p_forge.add_argument("--region", default="128x128")
    p_forge.add_argument("--seed", type=int, default=0)
    p_forge.add_argument("--out-image", required=True)
    p_forge.add_argument("--out-mask", required=True)
    p_forge.add_argument("--out-mask-pgm", default=None)
    p_forge.add_argument("--out-provenance", default=None)

    p_attack = sub.add_parser("attack", help="run the counter-forensic attack")
    p_attack.add_argument("--input", required=True)
    p_attack.add_argument(
        "--filter", required=True, help="known:<path> or estimate:<strategy>:<paths,...>"
    )
    p_attack.add_argument("--speckle-mode", default="phase-only", choices=["full", "phase-only"])
    p_attack.add_argument("--speckle-sigma", type=float, default=DEFAULT_SIGMA_S)
    p_attack.add_argument("--seed", type=int, required=True)
    p_attack.add_argument("--no-histogram-match", action="store_true")
    p_attack.add_argument("--despeckle", default="identity")
    p_attack.add_argument("--smoothing-sigma", type=float, default=None)
    p_attack.add_argument("--smoothing-kernel", type=int, default=None)
    p_attack.add_argument("--dump-intermediates", action="store_true")
    p_attack.add_argument("--out", required=True)

    p_metrics = sub.add_parser("metrics", help="score image pairs (JSON or batch CSV)")
    p_metrics.add_argument("--a")
    p_metrics.add_argument("--b")
    p_metrics.add_argument("--fingerprint", default=None)
    p_metrics.add_argument("--mask", default=None)
    p_metrics.add_argument("--pairs", default=None, help="batch manifest CSV: id,a,b[,fingerprint,mask]")
    p_metrics.add_argument("--out", default="-")

    p_exp = sub.add_parser("experiment", help="run a full experiment from a JSON config")
    p_exp.add_argument("--config", required=True)
    p_exp.add_argument("--seed", type=int, default=None, help="override the config master seed")
    p_exp.add_argument("--out-dir", default=None)

    return parser


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "attack":
        try:
            args.filter_spec = parse_filter_spec(args.filter)
        except CliError as exc:
            parser.error(str(exc))
    if args.command == "metrics" and args.pairs is None and (args.a is None or args.b is None):
        parser.error("metrics needs --a/--b for a single pair or --pairs for batch mode")
    return args


def _read_amplitude(path) -> AmplitudeImage:
    image = read_raster(path)
    if isinstance(image, ComplexImage):
        return image.amplitude()
    if not isinstance(image, AmplitudeImage):
        raise CliError(f"{path}: expected an amplitude raster, got {type(image).__name__}")
    return image


def _read_mask(path) -> TamperMask:
    mask = read_raster(path)
    if not isinstance(mask, TamperMask):
        raise CliError(f"{path}: expected a mask raster")
    return mask


def _read_fingerprint(path):
    """Fingerprint scores from a raster: amplitude values, or the real plane
    of a complex raster (fingerprints may carry negative scores)."""
    image = read_raster(path)
    if isinstance(image, ComplexImage):
        return image.re
    if isinstance(image, AmplitudeImage):
        return image.values
    raise CliError(f"{path}: masks cannot serve as fingerprints")


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def cmd_tile(args) -> int:
    image = read_raster(args.input)
    tiles = tile_raster(image, args.size, args.overlap)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for piece, row, col in tiles:
        write_raster(piece, out_dir / f"tile_r{row:06d}_c{col:06d}.sarf")
    print(f"wrote {len(tiles)} tiles to {out_dir}")
    return 0


def cmd_spectrum(args) -> int:
    image = read_raster(args.input)
    profile = azimuthal_profile(forward_dft(image))
    _emit(profile_to_csv(profile), args.out)
    return 0


def cmd_estimate_filter(args) -> int:
    sources = [read_raster(p) for p in args.sources]
    strategy = args.strategy.replace("-", "_")
    tf, fit_params = estimate_transfer_function_with_params(
        sources, strategy, sigma=args.smoothing_sigma, kernel_size=args.smoothing_kernel
    )
    write_raster(AmplitudeImage(tf.values, 16), args.out)
    default_kernel, default_sigma = default_smoothing(min(sources[0].shape))
    sidecar = {
        "strategy": strategy,
        "sources": list(args.sources),
        "smoothing_sigma": args.smoothing_sigma if args.smoothing_sigma is not None else default_sigma,
        "smoothing_kernel": args.smoothing_kernel if args.smoothing_kernel is not None else default_kernel,
        "fit_params": [None if p is None else p.__dict__ for p in fit_params],
    }
    with open(str(args.out) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.out} (+ JSON sidecar)")
    return 0


def cmd_forge(args) -> int:
    target = _read_amplitude(args.target)
    donor = _read_amplitude(args.donor)
    height, width, col, row = parse_region(args.region)
    op = EditOp(args.edit, parameter=args.edit_parameter, range_class=args.edit_class)
    edited = edit_donor(donor, op, args.seed)
    parameter = sample_edit_parameter(op, args.seed)

    rng = np.random.Generator(np.random.Philox(key=np.uint64(args.seed)))
    if edited.height < height or edited.width < width:
        raise CliError(f"edited donor {edited.shape} too small for region {height}x{width}")
    if target.height < height or target.width < width:
        raise CliError(f"target {target.shape} too small for region {height}x{width}")
    donor_origin = (
        int(rng.integers(edited.height - height + 1)),
        int(rng.integers(edited.width - width + 1)),
    )
    if row is None:
        target_origin = (
            int(rng.integers(target.height - height + 1)),
            int(rng.integers(target.width - width + 1)),
        )
    else:
        target_origin = (row, col)
    spec = SpliceSpec(donor_origin, target_origin, (height, width))
    spliced, mask = splice(target, edited, spec)
    write_raster(spliced, args.out_image)
    write_raster(mask, args.out_mask)
    if args.out_mask_pgm:
        write_mask_pgm(mask, args.out_mask_pgm)
    provenance = {
        "target": str(args.target),
        "donor": str(args.donor),
        "edit_kind": op.kind,
        "edit_range_class": op.range_class,
        "edit_parameter": parameter,
        "donor_origin": list(donor_origin),
        "target_origin": list(target_origin),
        "region_shape": [height, width],
        "seed": args.seed,
    }
    text = json.dumps(provenance, indent=2, sort_keys=True) + "\n"
    if args.out_provenance:
        with open(args.out_provenance, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_attack(args) -> int:
    image = _read_amplitude(args.input)
    spec = args.filter_spec
    if "known" in spec:
        known_raster = read_raster(spec["known"])
        config_kwargs = {"transfer_function": TransferFunction(known_raster.values, STRATEGY_KNOWN)}
    else:
        sources = tuple(read_raster(p) for p in spec["sources"])
        config_kwargs = {
            "filter_strategy": spec["strategy"],
            "filter_sources": sources,
            "smoothing_sigma": args.smoothing_sigma,
            "smoothing_kernel": args.smoothing_kernel,
        }
    config = AttackConfig(
        seed=args.seed,
        speckle_mode=args.speckle_mode.replace("-", "_"),
        sigma_s=args.speckle_sigma,
        histogram_match=not args.no_histogram_match,
        despeckle_hook=args.despeckle,
        **config_kwargs,
    )
    result = run_attack(image, config)
    write_raster(result.attacked, args.out)
    if args.dump_intermediates:
        write_raster(result.speckled, str(args.out) + ".speckled.sarf")
        write_raster(result.filtered_amplitude, str(args.out) + ".filtered.sarf")
    print(f"wrote {args.out}")
    return 0


def _metric_row(pair_id, a_path, b_path, fingerprint_path, mask_path):
    a = _read_amplitude(a_path)
    b = _read_amplitude(b_path)
    fingerprint = _read_fingerprint(fingerprint_path) if fingerprint_path else None
    mask = _read_mask(mask_path) if mask_path else None
    report = evaluate_pair(a, b, fingerprint=fingerprint, mask=mask)
    return {
        "id": pair_id,
        "ssim": report.ssim,
        "msssim": report.msssim,
        "enl_a": report.enl_source,
        "enl_b": report.enl_reference,
        "delta_enl_pct": report.delta_enl_pct,
        "auc": report.auc,
    }


def cmd_metrics(args) -> int:
    if args.pairs is None:
        a = _read_amplitude(args.a)
        b = _read_amplitude(args.b)
        fingerprint = _read_fingerprint(args.fingerprint) if args.fingerprint else None
        mask = _read_mask(args.mask) if args.mask else None
        report = evaluate_pair(a, b, fingerprint=fingerprint, mask=mask)
        _emit(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", args.out)
        return 0

    rows = []
    with open(args.pairs) as fh:
        for record in csv.DictReader(fh):
            rows.append(
                _metric_row(
                    record["id"],
                    record["a"],
                    record["b"],
                    record.get("fingerprint") or None,
                    record.get("mask") or None,
                )
            )
    lines = ["id,ssim,msssim,enl_a,enl_b,delta_enl_pct,auc"]
    for row in rows:
        auc = "" if row["auc"] is None else repr(row["auc"])
        lines.append(
            f"{row['id']},{row['ssim']!r},{row['msssim']!r},{row['enl_a']!r},"
            f"{row['enl_b']!r},{row['delta_enl_pct']!r},{auc}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_experiment(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        config.master_seed = args.seed
    if args.out_dir is not None:
        config.out_dir = args.out_dir
    result = run_experiment(config)
    print(f"report: {result.report_path}")
    print(f"summary: {result.summary_path}")
    if result.errors:
        print(f"{len(result.errors)} item(s) failed; see errors.json", file=sys.stderr)
        return 1
    return 0


_HANDLERS = {
    "tile": cmd_tile,
    "spectrum": cmd_spectrum,
    "estimate-filter": cmd_estimate_filter,
    "forge": cmd_forge,
    "attack": cmd_attack,
    "metrics": cmd_metrics,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    args = parse_args(argv if argv is not None else sys.argv[1:])
    try:
        return _HANDLERS[args.command](args)
    except (CliError, RasterError, ValueError, KeyError, OSError) as exc:
        print(f"sarfx: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
