"""Splice forgery creation.

Edits a donor tile (blur / rescale / rotate with "near"/"far" parameter
draws), splices a region of it into a target tile, and records the
provenance. Also shows arbitrary-shape stencils and whole-image edits.

Run:  python demos/03_forgery_creation.py
"""

import json

import numpy as np

from sarfx import (
    AmplitudeImage,
    EditOp,
    GlobalEditOp,
    SpliceSpec,
    edit_donor,
    global_edit,
    random_splice,
    sample_edit_parameter,
    splice,
)

rng = np.random.default_rng(3)
target = AmplitudeImage(rng.uniform(300, 3000, (512, 512)))
donor = AmplitudeImage(rng.uniform(300, 3000, (512, 512)))

# --- the edit catalog -------------------------------------------------------
print("edit parameter draws (seeded, reproducible):")
for op in [
    EditOp("gaussian_blur"),
    EditOp("upscale", range_class="near"),
    EditOp("upscale", range_class="far"),
    EditOp("downscale", range_class="near"),
    EditOp("rotate", range_class="far"),
    EditOp("rotate", 90.0, "fixed"),
]:
    p = sample_edit_parameter(op, seed=11)
    print(f"  {op.kind:13s} {op.range_class:5s} -> {p:.3f}")

edited = edit_donor(donor, EditOp("downscale", range_class="near"), seed=11)
print(f"\ndownscale-near donor: {donor.shape} -> {edited.shape}")

# --- automatic random splicing ---------------------------------------------
spliced, mask, provenance = random_splice(
    [target, donor], region=(128, 128), edit=EditOp("gaussian_blur"), seed=99,
    target_index=0,
)
print("\nrandom 128x128 splice provenance:")
print(json.dumps(provenance, indent=2))
changed = spliced.values != target.values
print(f"pixels changed: {int(changed.sum())} (mask marks {int(mask.values.sum())})")

# --- arbitrary-shape stencils (small-target insertion) ----------------------
yy, xx = np.mgrid[0:16, 0:35]
blob = (((yy - 7.5) / 7.0) ** 2 + ((xx - 17.0) / 16.5) ** 2 <= 1.0).astype(np.uint8)
spec = SpliceSpec(donor_origin=(40, 60), target_origin=(250, 180), region=blob)
inserted, blob_mask = splice(target, donor, spec)
print(f"\nvehicle-sized stencil: {blob.shape} bounding box, {int(blob.sum())} pixels spliced")

# --- whole-image (global) edits ---------------------------------------------
print("\nglobal edits on the spliced tile:")
for op in [
    GlobalEditOp("updownscale", "near"),
    GlobalEditOp("additive_gaussian"),
    GlobalEditOp("additive_uniform"),
]:
    out = global_edit(spliced, op, seed=5)
    diff = out.values - spliced.values
    print(f"  {op.kind:18s} mean|diff|={np.abs(diff).mean():8.3f}  max|diff|={np.abs(diff).max():8.1f}")
