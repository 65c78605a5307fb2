"""Deterministic batch orchestration: splice plans, attacks, metric reports.

An experiment walks a manifest of amplitude tiles grouped by product, creates
one splice per configured edit, optionally attacks it, and scores the result.
All randomness is derived from the master seed through a stable hash keyed by
item id and stage, so report files are byte-identical across runs; rows are
emitted in manifest x edit order regardless of worker completion order. The
``SARFX_THREADS`` environment variable caps the worker pool.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .attack import AttackConfig, run_attack
from .forgery import EditOp, random_splice
from .metrics import auc_roc, delta_enl, enl, ms_ssim, ssim
from .raster import AmplitudeImage, read_raster, write_raster
from .speckle import DEFAULT_SIGMA_S
from .sysid import STRATEGY_DIRECT, TransferFunction

SCHEMA_VERSION = 1
REPORT_COLUMNS = ("id", "edit", "ssim", "msssim", "enl_a", "enl_b", "delta_enl_pct", "auc")


def derive_seed(master_seed: int, item_id: str, stage: str) -> int:
    """Stable 64-bit seed from (master_seed, item id, stage name)."""
    payload = f"{master_seed}:{item_id}:{stage}".encode("utf-8")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def worker_count() -> int:
    """Worker pool size; capped by the SARFX_THREADS environment variable."""
    cap = os.environ.get("SARFX_THREADS")
    if cap:
        return max(1, int(cap))
    return max(1, min(8, os.cpu_count() or 1))


def edit_label(op: EditOp) -> str:
    if op.kind in ("none", "gaussian_blur") or op.range_class == "fixed":
        return op.kind
    return f"{op.kind}_{op.range_class}"


@dataclass(frozen=True)
class ManifestItem:
    id: str
    path: str
    product: str
    fingerprint: str | None = None


@dataclass
class ExperimentConfig:
    manifest: list[ManifestItem]
    edits: list[EditOp]
    region: tuple[int, int]
    master_seed: int
    out_dir: str
    attack_plan: dict | None = None
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            raw = json.load(fh)
        version = raw.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported config schema version {version!r}")
        manifest = [
            ManifestItem(
                id=str(entry["id"]),
                path=str(entry["path"]),
                product=str(entry.get("product", entry["id"])),
                fingerprint=entry.get("fingerprint"),
            )
            for entry in raw["manifest"]
        ]
        ids = [item.id for item in manifest]
        if len(set(ids)) != len(ids):
            raise ValueError("manifest ids must be unique")
        for item in manifest:
            if not Path(item.path).exists():
                raise FileNotFoundError(f"manifest path does not exist: {item.path}")
            if item.fingerprint and not Path(item.fingerprint).exists():
                raise FileNotFoundError(f"fingerprint path does not exist: {item.fingerprint}")
        edits = [
            EditOp(
                kind=str(e["kind"]),
                parameter=e.get("parameter"),
                range_class=str(e.get("range_class", "near")),
            )
            for e in raw.get("edits", [{"kind": "none"}])
        ]
        labels = [edit_label(op) for op in edits]
        if len(set(labels)) != len(labels):
            # labels key the per-item seed derivation and artifact names
            raise ValueError(f"edit labels must be unique, got {labels}")
        region = tuple(raw.get("region", [128, 128]))
        attack_plan = raw.get("attack")
        if attack_plan is not None:
            _validate_attack_plan(attack_plan)
        return cls(
            manifest=manifest,
            edits=edits,
            region=(int(region[0]), int(region[1])),
            master_seed=int(raw["master_seed"]),
            out_dir=str(raw["out_dir"]),
            attack_plan=attack_plan,
        )


def _validate_attack_plan(plan: dict) -> None:
    flt = plan.get("filter")
    if not isinstance(flt, dict) or len(flt.keys() & {"known", "estimate"}) != 1:
        raise ValueError("attack plan filter must carry exactly one of 'known'/'estimate'")
    if "known" in flt:
        if not Path(flt["known"]).exists():
            raise FileNotFoundError(f"known filter path does not exist: {flt['known']}")
    else:
        est = flt["estimate"]
        sources = est.get("sources", "self")
        if sources != "self":
            for src in sources:
                if not Path(src).exists():
                    raise FileNotFoundError(f"filter source does not exist: {src}")


@dataclass
class ExperimentResult:
    report_path: str
    summary_path: str
    rows: list[dict]
    errors: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))  # plain shortest round-trip repr, numpy scalars included
    return str(value)


def _load_shared_filter(plan: dict):
    """Pre-resolve filter inputs shared by all items (known H or source images)."""
    flt = plan["filter"]
    if "known" in flt:
        image = read_raster(flt["known"])
        return {"known": TransferFunction(image.values)}
    est = flt["estimate"]
    strategy = est.get("strategy", STRATEGY_DIRECT).replace("-", "_")
    sources = est.get("sources", "self")
    loaded = None if sources == "self" else [read_raster(p) for p in sources]
    smoothing = plan.get("smoothing", {})
    return {
        "strategy": strategy,
        "sources": loaded,
        "sigma": smoothing.get("sigma"),
        "kernel": smoothing.get("kernel"),
    }


def _run_job(item: ManifestItem, edit: EditOp, config: ExperimentConfig, shared, images_dir):
    label = edit_label(edit)
    key = f"{item.id}/{label}"
    tiles, target_index = shared["products"][item.product], shared["index_in_product"][item.id]
    original = tiles[target_index]

    spliced, mask, provenance = random_splice(
        tiles,
        region=config.region,
        edit=edit,
        seed=derive_seed(config.master_seed, key, "splice"),
        target_index=target_index,
    )

    attacked = None
    if config.attack_plan is not None:
        filter_info = shared["filter"]
        if "known" in filter_info:
            kwargs = {"transfer_function": filter_info["known"]}
        else:
            sources = filter_info["sources"]
            kwargs = {
                "filter_strategy": filter_info["strategy"],
                "filter_sources": tuple(sources) if sources is not None else (spliced,),
                "smoothing_sigma": filter_info["sigma"],
                "smoothing_kernel": filter_info["kernel"],
            }
        attack_config = AttackConfig(
            seed=derive_seed(config.master_seed, key, "attack"),
            speckle_mode=config.attack_plan.get("speckle_mode", "phase_only"),
            sigma_s=config.attack_plan.get("sigma_s", DEFAULT_SIGMA_S),
            histogram_match=config.attack_plan.get("histogram_match", True),
            **kwargs,
        )
        attacked = run_attack(spliced, attack_config).attacked

    # Quality metrics compare the attack output to its input when an attack
    # ran, otherwise the spliced tile to the untouched target.
    pair = (attacked, spliced) if attacked is not None else (spliced, original)
    auc = None
    if item.fingerprint:
        fingerprint = read_raster(item.fingerprint)
        scores = fingerprint.re if hasattr(fingerprint, "re") else fingerprint.values
        auc = auc_roc(scores, mask, polarity="max")

    write_raster(spliced, images_dir / f"{item.id}_{label}_spliced.sarf")
    write_raster(mask, images_dir / f"{item.id}_{label}_mask.sarf")
    if attacked is not None:
        write_raster(attacked, images_dir / f"{item.id}_{label}_attacked.sarf")
    with open(images_dir / f"{item.id}_{label}_provenance.json", "w") as fh:
        json.dump(provenance, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return {
        "id": item.id,
        "edit": label,
        "ssim": ssim(*pair),
        "msssim": ms_ssim(*pair),
        "enl_a": enl(pair[0]),
        "enl_b": enl(pair[1]),
        "delta_enl_pct": delta_enl(*pair),
        "auc": auc,
    }


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Execute the configured experiment and write report/summary CSVs."""
    out_dir = Path(config.out_dir)
    images_dir = out_dir / "images"
    images_dir.mkdir(parents=True, exist_ok=True)

    products: dict[str, list[AmplitudeImage]] = {}
    index_in_product: dict[str, int] = {}
    for item in config.manifest:
        image = read_raster(item.path)
        if not isinstance(image, AmplitudeImage):
            raise ValueError(f"manifest item {item.id} is not an amplitude raster")
        index_in_product[item.id] = len(products.setdefault(item.product, []))
        products[item.product].append(image)

    shared = {"products": products, "index_in_product": index_in_product}
    if config.attack_plan is not None:
        shared["filter"] = _load_shared_filter(config.attack_plan)

    jobs = [(item, edit) for item in config.manifest for edit in config.edits]
    rows: list[dict | None] = [None] * len(jobs)
    errors: dict[str, str] = {}

    def execute(index: int):
        item, edit = jobs[index]
        try:
            return index, _run_job(item, edit, config, shared, images_dir), None
        except Exception as exc:  # per-item failures must not abort the run
            return index, None, f"{type(exc).__name__}: {exc}"

    if jobs:
        with ThreadPoolExecutor(max_workers=worker_count()) as pool:
            for index, row, error in pool.map(execute, range(len(jobs))):
                if error is not None:
                    item, edit = jobs[index]
                    errors[f"{item.id}/{edit_label(edit)}"] = error
                else:
                    rows[index] = row

    report_path = out_dir / "report.csv"
    with open(report_path, "w") as fh:
        fh.write(",".join(REPORT_COLUMNS) + "\n")
        for index, row in enumerate(rows):
            if row is None:
                item, edit = jobs[index]
                fh.write(f"{item.id},{edit_label(edit)},,,,,,\n")
            else:
                fh.write(",".join(_format_cell(row[col]) for col in REPORT_COLUMNS) + "\n")

    summary_path = out_dir / "summary.csv"
    _write_summary(summary_path, [r for r in rows if r is not None], config.edits)

    if errors:
        with open(out_dir / "errors.json", "w") as fh:
            json.dump(errors, fh, indent=2, sort_keys=True)
            fh.write("\n")

    return ExperimentResult(str(report_path), str(summary_path), [r for r in rows if r], errors)


def _write_summary(path, rows: list[dict], edits: list[EditOp]) -> None:
    """Per-edit aggregate means, one row per configured editing operation."""
    with open(path, "w") as fh:
        fh.write("edit,n,mean_ssim,mean_msssim,mean_delta_enl_pct,mean_auc\n")
        for edit in edits:
            label = edit_label(edit)
            group = [r for r in rows if r["edit"] == label]
            if not group:
                fh.write(f"{label},0,,,,\n")
                continue
            n = len(group)
            mean = lambda key: sum(r[key] for r in group) / n
            aucs = [r["auc"] for r in group if r["auc"] is not None]
            mean_auc = _format_cell(sum(aucs) / len(aucs)) if aucs else ""
            fh.write(
                f"{label},{n},{_format_cell(mean('ssim'))},{_format_cell(mean('msssim'))},"
                f"{_format_cell(mean('delta_enl_pct'))},{mean_auc}\n"
            )
