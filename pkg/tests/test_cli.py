import json

import numpy as np
import pytest

from helpers import raised_cosine_filter, smooth_reflectivity

from sarfx import (
    AmplitudeImage,
    TamperMask,
    read_raster,
    simulate_pristine,
    write_raster,
)
from sarfx.cli import main, parse_args, parse_filter_spec, parse_region, CliError
from sarfx.experiment import derive_seed, edit_label, worker_count
from sarfx.forgery import EditOp


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def test_tile_args_resolve_stride():
    args = parse_args(["tile", "--input", "a.sarf", "--size", "1024",
                       "--overlap", "512", "--out-dir", "out"])
    assert args.command == "tile"
    assert args.size - args.overlap == 512


def test_missing_required_flag_exits_2():
    with pytest.raises(SystemExit) as err:
        parse_args(["attack", "--input", "a.sarf", "--seed", "1"])  # no --filter/--out
    assert err.value.code == 2


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as err:
        parse_args(["spectrum", "--input", "a.sarf", "--wibble", "3"])
    assert err.value.code == 2


def test_filter_spec_round_trip():
    args = parse_args([
        "attack", "--input", "x.sarf", "--seed", "7",
        "--filter", "estimate:direct:a.sarf,b.sarf", "--out", "y.sarf",
    ])
    assert args.filter_spec == {"strategy": "direct", "sources": ["a.sarf", "b.sarf"]}
    known = parse_filter_spec("known:h.sarf")
    assert known == {"known": "h.sarf"}
    assert parse_filter_spec("estimate:raised-cosine:s.sarf")["strategy"] == "raised_cosine"


def test_malformed_filter_spec_exits_2():
    with pytest.raises(SystemExit) as err:
        parse_args(["attack", "--input", "x.sarf", "--seed", "1",
                    "--filter", "telepathy:h.sarf", "--out", "y.sarf"])
    assert err.value.code == 2
    with pytest.raises(CliError):
        parse_filter_spec("known:")
    with pytest.raises(CliError):
        parse_filter_spec("estimate:direct:")


def test_region_parsing():
    assert parse_region("128x128") == (128, 128, None, None)
    assert parse_region("64x32+10+20") == (32, 64, 10, 20)
    with pytest.raises(CliError, match="syntax"):
        parse_region("128by128")


def test_metrics_requires_pair_or_batch():
    with pytest.raises(SystemExit) as err:
        parse_args(["metrics", "--a", "only-one.sarf"])
    assert err.value.code == 2


# ---------------------------------------------------------------------------
# Command round trips on synthetic data
# ---------------------------------------------------------------------------


@pytest.fixture()
def product(tmp_path):
    """Two pristine synthetic tiles plus the complex original of tile 0."""
    h_true = raised_cosine_filter(128, 0.7)
    paths = {}
    for k in range(2):
        pristine_c = simulate_pristine(smooth_reflectivity(128, 50 + k), h_true, seed=900 + k)
        cpath = tmp_path / f"tile{k}_complex.sarf"
        apath = tmp_path / f"tile{k}.sarf"
        write_raster(pristine_c, cpath)
        write_raster(pristine_c.amplitude(), apath)
        paths[f"complex{k}"] = cpath
        paths[f"amp{k}"] = apath
    return paths


def test_cli_tile_and_spectrum(tmp_path, product, capsys):
    out_dir = tmp_path / "tiles"
    rc = main(["tile", "--input", str(product["amp0"]), "--size", "64",
               "--overlap", "32", "--out-dir", str(out_dir)])
    assert rc == 0
    assert len(list(out_dir.glob("*.sarf"))) == 9

    csv_path = tmp_path / "profile.csv"
    rc = main(["spectrum", "--input", str(product["amp0"]), "--out", str(csv_path)])
    assert rc == 0
    lines = csv_path.read_text().strip().split("\n")
    assert lines[0] == "radius,mean_sq_magnitude,count"
    assert len(lines) > 64


def test_cli_estimate_filter_and_attack(tmp_path, product):
    h_path = tmp_path / "h.sarf"
    rc = main([
        "estimate-filter", "--strategy", "direct",
        "--sources", str(product["complex0"]), str(product["complex1"]),
        "--out", str(h_path),
        "--smoothing-sigma", "5.0", "--smoothing-kernel", "31",
    ])
    assert rc == 0
    sidecar = json.loads((tmp_path / "h.sarf.json").read_text())
    assert sidecar["strategy"] == "direct"
    assert len(sidecar["fit_params"]) == 2
    stored = read_raster(h_path)
    assert stored.values.max() == 1.0

    out_path = tmp_path / "attacked.sarf"
    rc = main([
        "attack", "--input", str(product["amp0"]),
        "--filter", f"known:{h_path}",
        "--seed", "123", "--out", str(out_path), "--dump-intermediates",
    ])
    assert rc == 0
    attacked = read_raster(out_path)
    original = read_raster(product["amp0"])
    assert np.array_equal(
        np.sort(attacked.values, axis=None), np.sort(original.values, axis=None)
    )
    assert (tmp_path / "attacked.sarf.speckled.sarf").exists()
    assert (tmp_path / "attacked.sarf.filtered.sarf").exists()

    # estimation path straight through the attack command
    rc = main([
        "attack", "--input", str(product["amp0"]),
        "--filter", f"estimate:direct:{product['complex1']}",
        "--smoothing-sigma", "5.0", "--smoothing-kernel", "31",
        "--seed", "124", "--out", str(tmp_path / "attacked2.sarf"),
    ])
    assert rc == 0


def test_cli_forge_and_metrics(tmp_path, product, capsys):
    image_path = tmp_path / "spliced.sarf"
    mask_path = tmp_path / "mask.sarf"
    rc = main([
        "forge", "--target", str(product["amp0"]), "--donor", str(product["amp1"]),
        "--edit", "gaussian_blur", "--region", "32x32+10+20", "--seed", "5",
        "--out-image", str(image_path), "--out-mask", str(mask_path),
        "--out-mask-pgm", str(tmp_path / "mask.pgm"),
    ])
    assert rc == 0
    provenance = json.loads(capsys.readouterr().out)
    assert provenance["target_origin"] == [20, 10]
    mask = read_raster(mask_path)
    assert isinstance(mask, TamperMask)
    assert int(mask.values.sum()) == 32 * 32

    report_path = tmp_path / "report.json"
    rc = main(["metrics", "--a", str(image_path), "--b", str(product["amp0"]),
               "--out", str(report_path)])
    assert rc == 0
    report = json.loads(report_path.read_text())
    assert 0.9 < report["ssim"] <= 1.0

    # batch mode
    manifest = tmp_path / "pairs.csv"
    manifest.write_text(
        "id,a,b,fingerprint,mask\n"
        f"p0,{image_path},{product['amp0']},,\n"
        f"p1,{image_path},{product['amp0']},{image_path},{mask_path}\n"
    )
    batch_path = tmp_path / "batch.csv"
    rc = main(["metrics", "--pairs", str(manifest), "--out", str(batch_path)])
    assert rc == 0
    lines = batch_path.read_text().strip().split("\n")
    assert lines[0] == "id,ssim,msssim,enl_a,enl_b,delta_enl_pct,auc"
    assert len(lines) == 3
    assert lines[1].split(",")[-1] == ""  # no fingerprint -> empty auc
    assert lines[2].split(",")[-1] != ""


def test_cli_metrics_signed_fingerprint(tmp_path, product):
    # signed detector scores travel as the real plane of a complex raster
    rng = np.random.default_rng(42)
    scores = rng.standard_normal((128, 128))
    from sarfx import ComplexImage

    fp_path = tmp_path / "fp.sarf"
    write_raster(ComplexImage(scores, np.zeros_like(scores)), fp_path)
    mask_plane = np.zeros((128, 128), dtype=np.uint8)
    mask_plane[10:40, 10:40] = 1
    mask_path = tmp_path / "m.sarf"
    write_raster(TamperMask(mask_plane), mask_path)

    out = tmp_path / "signed.json"
    rc = main(["metrics", "--a", str(product["amp0"]), "--b", str(product["amp1"]),
               "--fingerprint", str(fp_path), "--mask", str(mask_path), "--out", str(out)])
    assert rc == 0
    report = json.loads(out.read_text())
    assert 0.4 < report["auc"] < 0.6  # noise scores -> chance-level AUC


def test_cli_error_paths(tmp_path):
    rc = main(["spectrum", "--input", str(tmp_path / "missing.sarf")])
    assert rc == 1
    bad = tmp_path / "bad.sarf"
    bad.write_bytes(b"junkjunkjunk")
    rc = main(["spectrum", "--input", str(bad)])
    assert rc == 1


# ---------------------------------------------------------------------------
# Experiment orchestration
# ---------------------------------------------------------------------------


def _experiment_config(tmp_path, product, out_name="run"):
    config = {
        "schema_version": 1,
        "manifest": [
            {"id": "t0", "path": str(product["amp0"]), "product": "P"},
            {"id": "t1", "path": str(product["amp1"]), "product": "P"},
        ],
        "edits": [
            {"kind": "gaussian_blur"},
            {"kind": "upscale", "range_class": "near"},
        ],
        "region": [32, 32],
        "attack": {
            "filter": {"estimate": {"strategy": "direct", "sources": "self"}},
            "smoothing": {"sigma": 5.0, "kernel": 31},
            "speckle_mode": "phase_only",
            "histogram_match": True,
        },
        "master_seed": 4242,
        "out_dir": str(tmp_path / out_name),
    }
    path = tmp_path / f"{out_name}.json"
    path.write_text(json.dumps(config, indent=2))
    return path


def test_experiment_runs_and_reports(tmp_path, product):
    config_path = _experiment_config(tmp_path, product)
    rc = main(["experiment", "--config", str(config_path)])
    assert rc == 0
    report = (tmp_path / "run" / "report.csv").read_text().strip().split("\n")
    assert report[0] == "id,edit,ssim,msssim,enl_a,enl_b,delta_enl_pct,auc"
    assert len(report) == 1 + 2 * 2  # items x edits
    for line in report[1:]:
        cells = line.split(",")
        assert cells[1] in ("gaussian_blur", "upscale_near")
        assert all(cells[k] for k in range(2, 7))  # metric fields populated
    summary = (tmp_path / "run" / "summary.csv").read_text().strip().split("\n")
    assert len(summary) == 3
    images = list((tmp_path / "run" / "images").glob("*_spliced.sarf"))
    assert len(images) == 4


def test_experiment_deterministic_reports(tmp_path, product):
    cfg_a = _experiment_config(tmp_path, product, "runA")
    cfg_b = _experiment_config(tmp_path, product, "runB")
    assert main(["experiment", "--config", str(cfg_a)]) == 0
    assert main(["experiment", "--config", str(cfg_b)]) == 0
    report_a = (tmp_path / "runA" / "report.csv").read_bytes()
    report_b = (tmp_path / "runB" / "report.csv").read_bytes()
    assert report_a == report_b
    assert (tmp_path / "runA" / "summary.csv").read_bytes() == (
        tmp_path / "runB" / "summary.csv"
    ).read_bytes()

    # a different master seed (flag override) must change the draws
    cfg_c = _experiment_config(tmp_path, product, "runC")
    assert main(["experiment", "--config", str(cfg_c), "--seed", "777",
                 "--out-dir", str(tmp_path / "runC")]) == 0
    assert (tmp_path / "runC" / "report.csv").read_bytes() != report_a


def test_experiment_pool_size_does_not_change_reports(tmp_path, product, monkeypatch):
    cfg_one = _experiment_config(tmp_path, product, "pool1")
    monkeypatch.setenv("SARFX_THREADS", "1")
    assert main(["experiment", "--config", str(cfg_one)]) == 0
    cfg_four = _experiment_config(tmp_path, product, "pool4")
    monkeypatch.setenv("SARFX_THREADS", "4")
    assert main(["experiment", "--config", str(cfg_four)]) == 0
    assert (tmp_path / "pool1" / "report.csv").read_bytes() == (
        tmp_path / "pool4" / "report.csv"
    ).read_bytes()


def test_experiment_ten_tiles_seven_edits(tmp_path):
    # full edit catalog over ten synthetic tiles: 70 rows, metrics populated
    rng = np.random.default_rng(60)
    manifest = []
    for k in range(10):
        path = tmp_path / f"tile{k}.sarf"
        write_raster(AmplitudeImage(rng.uniform(100, 4000, (96, 96))), path)
        manifest.append({"id": f"tile{k}", "path": str(path), "product": f"P{k % 2}"})
    config = {
        "schema_version": 1,
        "manifest": manifest,
        "edits": [
            {"kind": "gaussian_blur"},
            {"kind": "upscale", "range_class": "near"},
            {"kind": "upscale", "range_class": "far"},
            {"kind": "downscale", "range_class": "near"},
            {"kind": "downscale", "range_class": "far"},
            {"kind": "rotate", "range_class": "near"},
            {"kind": "rotate", "range_class": "far"},
        ],
        "region": [24, 24],
        "master_seed": 77,
        "out_dir": str(tmp_path / "catalog"),
    }
    path = tmp_path / "catalog.json"
    path.write_text(json.dumps(config))
    assert main(["experiment", "--config", str(path)]) == 0
    lines = (tmp_path / "catalog" / "report.csv").read_text().strip().split("\n")
    assert len(lines) == 1 + 70
    for line in lines[1:]:
        cells = line.split(",")
        assert len(cells) == 8
        assert all(cells[k] != "" for k in range(7))  # all metric fields populated


def test_experiment_empty_manifest(tmp_path):
    config = {
        "schema_version": 1,
        "manifest": [],
        "edits": [{"kind": "none"}],
        "region": [16, 16],
        "master_seed": 1,
        "out_dir": str(tmp_path / "empty"),
    }
    path = tmp_path / "empty.json"
    path.write_text(json.dumps(config))
    rc = main(["experiment", "--config", str(path)])
    assert rc == 0
    report = (tmp_path / "empty" / "report.csv").read_text().strip().split("\n")
    assert report == ["id,edit,ssim,msssim,enl_a,enl_b,delta_enl_pct,auc"]


def test_experiment_partial_failure_reports_errors(tmp_path, product):
    small = tmp_path / "small.sarf"
    write_raster(AmplitudeImage(np.random.default_rng(0).uniform(1, 9, (64, 64))), small)
    config = {
        "schema_version": 1,
        "manifest": [
            {"id": "ok0", "path": str(product["amp0"]), "product": "P"},
            {"id": "ok1", "path": str(product["amp1"]), "product": "P"},
            {"id": "bad", "path": str(small), "product": "Q"},  # tile smaller than region
        ],
        "edits": [{"kind": "none"}],
        "region": [96, 96],
        "master_seed": 3,
        "out_dir": str(tmp_path / "partial"),
    }
    path = tmp_path / "partial.json"
    path.write_text(json.dumps(config))
    rc = main(["experiment", "--config", str(path)])
    assert rc == 1
    errors = json.loads((tmp_path / "partial" / "errors.json").read_text())
    assert list(errors) == ["bad/none"]
    report = (tmp_path / "partial" / "report.csv").read_text().strip().split("\n")
    assert len(report) == 4  # header + one row per job, failure included as blanks
    assert report[1].startswith("ok0,none,") and report[1].split(",")[2] != ""
    assert report[3] == "bad,none,,,,,,"


def test_experiment_rejects_missing_paths(tmp_path):
    config = {
        "schema_version": 1,
        "manifest": [{"id": "x", "path": str(tmp_path / "nope.sarf"), "product": "P"}],
        "edits": [{"kind": "none"}],
        "region": [8, 8],
        "master_seed": 1,
        "out_dir": str(tmp_path / "o"),
    }
    path = tmp_path / "c.json"
    path.write_text(json.dumps(config))
    assert main(["experiment", "--config", str(path)]) == 1


def test_seed_derivation_stable_and_decoupled():
    a = derive_seed(1, "item", "splice")
    assert a == derive_seed(1, "item", "splice")
    assert a != derive_seed(1, "item", "attack")
    assert a != derive_seed(2, "item", "splice")
    assert a != derive_seed(1, "item2", "splice")
    assert 0 <= a < 2**64


def test_worker_count_env_cap(monkeypatch):
    monkeypatch.setenv("SARFX_THREADS", "2")
    assert worker_count() == 2
    monkeypatch.setenv("SARFX_THREADS", "0")
    assert worker_count() == 1


def test_edit_labels():
    assert edit_label(EditOp("gaussian_blur")) == "gaussian_blur"
    assert edit_label(EditOp("upscale", range_class="far")) == "upscale_far"
    assert edit_label(EditOp("rotate", 90.0, "fixed")) == "rotate"
