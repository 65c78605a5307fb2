"""Splice forgery creation: donor edits, pixel-exact splicing, global edits.

Donor edits follow the catalog of local editing operations (blur at a fixed
sigma; up/downscale and rotation with "near"/"far" parameter ranges); global
edits cover the whole-image operations used for the counter-forensic
ablation (scale round trips and zero-mean additive noises).

Resampling is bicubic (Keys kernel, a = -0.5) in float64. Resize sampling
clamps to the edge so constant inputs stay constant; rotation fills pixels
falling outside the source frame with zero. Binary stencils are transformed
with bilinear coverage and re-rasterized at a 0.5 threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import AmplitudeImage, RasterError, TamperMask

EDIT_KINDS = ("none", "gaussian_blur", "upscale", "downscale", "rotate")
RANGE_CLASSES = ("near", "far", "fixed")

# Local donor edit parameter ranges; blur sigma is fixed.
EDIT_PARAMETER_RANGES = {
    ("upscale", "near"): (1.05, 1.5),
    ("upscale", "far"): (1.5, 2.0),
    ("downscale", "near"): (0.65, 0.95),
    ("downscale", "far"): (0.5, 0.65),
    ("rotate", "near"): (5.0, 15.0),
    ("rotate", "far"): (15.0, 45.0),
}
BLUR_SIGMA = 0.5

GLOBAL_EDIT_KINDS = (
    "gaussian_blur",
    "updownscale",
    "downupscale",
    "additive_gaussian",
    "additive_laplacian",
    "additive_poisson",
    "additive_uniform",
)

# Whole-image edit defaults: scale-chain factors per class, noise levels
# tied to the 16-bit full scale, uniform support half-width.
GLOBAL_SCALE_FACTORS = {"near": 1.05, "far": 1.5}
GLOBAL_NOISE_LEVEL = 0.0005 * (2**16 - 1)
GLOBAL_UNIFORM_HALF_WIDTH = 50.0


@dataclass(frozen=True)
class EditOp:
    """One donor editing operation; parameter is drawn from the class range
    unless range_class is "fixed"."""

    kind: str
    parameter: float | None = None
    range_class: str = "near"

    def __post_init__(self):
        if self.kind not in EDIT_KINDS:
            raise ValueError(f"unknown edit kind {self.kind!r}")
        if self.range_class not in RANGE_CLASSES:
            raise ValueError(f"unknown range class {self.range_class!r}")
        if self.range_class == "fixed" and self.kind not in ("none",) and self.parameter is None:
            raise ValueError("fixed-range edits require an explicit parameter")


@dataclass(frozen=True)
class GlobalEditOp:
    """One whole-image editing operation with catalog default parameters."""

    kind: str
    range_class: str = "near"
    parameter: float | None = None

    def __post_init__(self):
        if self.kind not in GLOBAL_EDIT_KINDS:
            raise ValueError(f"unknown global edit kind {self.kind!r}")
        if self.range_class not in ("near", "far"):
            raise ValueError(f"unknown range class {self.range_class!r}")


@dataclass(frozen=True)
class SpliceSpec:
    """Placement of a congruent donor/target region pair.

    Origins are (row, col) of the region's top-left corner; the stencil is a
    binary plane selecting which pixels inside the bounding box are copied.
    A plain ``(height, width)`` rectangle is accepted and expanded to an
    all-ones stencil.
    """

    donor_origin: tuple[int, int]
    target_origin: tuple[int, int]
    region: object  # (h, w) tuple or binary stencil array

    def __post_init__(self):
        region = self.region
        if isinstance(region, tuple):
            h, w = region
            stencil = np.ones((int(h), int(w)), dtype=np.uint8)
        else:
            stencil = np.asarray(region)
            if not np.isin(stencil, (0, 1)).all():
                raise ValueError("stencil values must be exactly 0 or 1")
            stencil = stencil.astype(np.uint8)
        if stencil.ndim != 2 or stencil.size == 0 or stencil.sum() == 0:
            raise ValueError("stencil must be a nonempty 2D binary plane")
        stencil.flags.writeable = False
        object.__setattr__(self, "region", stencil)
        object.__setattr__(self, "donor_origin", (int(self.donor_origin[0]), int(self.donor_origin[1])))
        object.__setattr__(self, "target_origin", (int(self.target_origin[0]), int(self.target_origin[1])))

    @property
    def stencil(self) -> np.ndarray:
        return self.region

    @property
    def box_shape(self) -> tuple[int, int]:
        return self.region.shape


# ---------------------------------------------------------------------------
# Bicubic resampling primitives
# ---------------------------------------------------------------------------


def _cubic_weights(t: np.ndarray) -> np.ndarray:
    """Keys bicubic kernel with a = -0.5; exact identity at integer offsets."""
    t = np.abs(t)
    out = np.zeros_like(t)
    near = t <= 1.0
    far = (t > 1.0) & (t < 2.0)
    tn = t[near]
    tf = t[far]
    out[near] = (1.5 * tn - 2.5) * tn * tn + 1.0
    out[far] = ((-0.5 * tf + 2.5) * tf - 4.0) * tf + 2.0
    return out


def _bicubic_sample(src: np.ndarray, rows: np.ndarray, cols: np.ndarray, border: str) -> np.ndarray:
    """Sample ``src`` at float coordinates with the bicubic kernel.

    border "replicate" clamps coordinates to the edge; border "zero" treats
    out-of-frame samples as 0.
    """
    h, w = src.shape
    r0 = np.floor(rows).astype(np.int64)
    c0 = np.floor(cols).astype(np.int64)
    out = np.zeros(rows.shape, dtype=np.float64)
    for dr in range(-1, 3):
        rr = r0 + dr
        wy = _cubic_weights(rows - rr)
        rr_c = np.clip(rr, 0, h - 1)
        row_valid = (rr >= 0) & (rr < h)
        for dc in range(-1, 3):
            cc = c0 + dc
            wx = _cubic_weights(cols - cc)
            cc_c = np.clip(cc, 0, w - 1)
            weight = wy * wx
            if border == "zero":
                weight = weight * (row_valid & (cc >= 0) & (cc < w))
            out += weight * src[rr_c, cc_c]
    return out


def _resize_to(values: np.ndarray, out_shape: tuple[int, int]) -> np.ndarray:
    """Bicubic resize to an explicit shape, pixel-center aligned, edge clamped."""
    h, w = values.shape
    oh, ow = out_shape
    if oh < 1 or ow < 1:
        raise ValueError(f"degenerate output shape {out_shape}")
    sy, sx = h / oh, w / ow
    rows = (np.arange(oh, dtype=np.float64)[:, None] + 0.5) * sy - 0.5
    cols = (np.arange(ow, dtype=np.float64)[None, :] + 0.5) * sx - 0.5
    rows, cols = np.broadcast_arrays(rows, cols)
    return _bicubic_sample(values, rows, cols, border="replicate")


def resize(values: np.ndarray, factor: float) -> np.ndarray:
    """Bicubic resize by a scale factor; output dims are round(dim * factor)."""
    if not factor > 0:
        raise ValueError(f"resize factor must be positive, got {factor}")
    h, w = values.shape
    out_shape = (max(int(round(h * factor)), 1), max(int(round(w * factor)), 1))
    return _resize_to(values, out_shape)


def _rotation_coords(shape: tuple[int, int], angle_deg: float):
    h, w = shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    alpha = np.deg2rad(angle_deg)
    rr = np.arange(h, dtype=np.float64)[:, None] - cy
    cc = np.arange(w, dtype=np.float64)[None, :] - cx
    # Positive angles rotate the content counterclockwise (as displayed with
    # row 0 on top); at multiples of 90 deg the mapping is an exact index
    # permutation.
    src_rows = cy + np.sin(alpha) * cc + np.cos(alpha) * rr
    src_cols = cx + np.cos(alpha) * cc - np.sin(alpha) * rr
    return np.broadcast_arrays(src_rows, src_cols)


def rotate(values: np.ndarray, angle_deg: float) -> np.ndarray:
    """Bicubic rotation about the image center; same-size output, zero fill."""
    rows, cols = _rotation_coords(values.shape, angle_deg)
    return _bicubic_sample(values, rows, cols, border="zero")


def _bilinear_sample_zero(src: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    h, w = src.shape
    r0 = np.floor(rows).astype(np.int64)
    c0 = np.floor(cols).astype(np.int64)
    fr = rows - r0
    fc = cols - c0
    out = np.zeros(rows.shape, dtype=np.float64)
    for dr, wy in ((0, 1.0 - fr), (1, fr)):
        rr = r0 + dr
        rv = (rr >= 0) & (rr < h)
        rr_c = np.clip(rr, 0, h - 1)
        for dc, wx in ((0, 1.0 - fc), (1, fc)):
            cc = c0 + dc
            valid = rv & (cc >= 0) & (cc < w)
            cc_c = np.clip(cc, 0, w - 1)
            out += wy * wx * valid * src[rr_c, cc_c]
    return out


def transform_stencil(stencil: np.ndarray, op: EditOp, parameter: float) -> np.ndarray:
    """Carry a binary stencil through a geometric edit.

    Coverage is estimated with bilinear interpolation of the {0,1} field and
    re-rasterized at a 0.5 threshold, so donor and target regions stay
    congruent after rotation or rescaling.
    """
    field = np.asarray(stencil, dtype=np.float64)
    if op.kind in ("none", "gaussian_blur"):
        return np.asarray(stencil, dtype=np.uint8)
    if op.kind in ("upscale", "downscale"):
        h, w = field.shape
        oh = max(int(round(h * parameter)), 1)
        ow = max(int(round(w * parameter)), 1)
        sy, sx = h / oh, w / ow
        rows = (np.arange(oh, dtype=np.float64)[:, None] + 0.5) * sy - 0.5
        cols = (np.arange(ow, dtype=np.float64)[None, :] + 0.5) * sx - 0.5
        rows, cols = np.broadcast_arrays(rows, cols)
        coverage = _bilinear_sample_zero(field, rows, cols)
    else:
        rows, cols = _rotation_coords(field.shape, parameter)
        coverage = _bilinear_sample_zero(field, rows, cols)
    return (coverage >= 0.5).astype(np.uint8)


# ---------------------------------------------------------------------------
# Donor editing
# ---------------------------------------------------------------------------


def sample_edit_parameter(op: EditOp, seed: int) -> float:
    """Resolve the edit parameter: fixed value, blur sigma, or a range draw."""
    if op.kind == "none":
        return 0.0
    if op.range_class == "fixed":
        return float(op.parameter)
    if op.kind == "gaussian_blur":
        return BLUR_SIGMA if op.parameter is None else float(op.parameter)
    low, high = EDIT_PARAMETER_RANGES[(op.kind, op.range_class)]
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    return float(rng.uniform(low, high))


def edit_donor(donor: AmplitudeImage, op: EditOp, seed: int = 0) -> AmplitudeImage:
    """Apply one editing operation to a donor image; output stays nonnegative."""
    if op.kind == "none":
        return donor
    parameter = sample_edit_parameter(op, seed)
    values = donor.values
    if op.kind == "gaussian_blur":
        edited = ndimage.gaussian_filter(values, sigma=parameter, mode="reflect")
    elif op.kind in ("upscale", "downscale"):
        if not parameter > 0:
            raise ValueError(f"degenerate resize factor {parameter}")
        edited = resize(values, parameter)
    else:
        edited = rotate(values, parameter)
    return AmplitudeImage(np.maximum(edited, 0.0), donor.dynamic_range_bits)


# ---------------------------------------------------------------------------
# Splicing
# ---------------------------------------------------------------------------


def splice(
    target: AmplitudeImage, edited_donor: AmplitudeImage, spec: SpliceSpec
) -> tuple[AmplitudeImage, TamperMask]:
    """Copy the donor region over the target region, pixel-exact, with mask."""
    bh, bw = spec.box_shape
    dr, dc = spec.donor_origin
    tr, tc = spec.target_origin
    if dr < 0 or dc < 0 or dr + bh > edited_donor.height or dc + bw > edited_donor.width:
        raise RasterError("donor region out of bounds")
    if tr < 0 or tc < 0 or tr + bh > target.height or tc + bw > target.width:
        raise RasterError("target region out of bounds")
    sel = spec.stencil == 1
    out = target.values.copy()
    out[tr : tr + bh, tc : tc + bw][sel] = edited_donor.values[dr : dr + bh, dc : dc + bw][sel]
    mask = np.zeros(target.shape, dtype=np.uint8)
    mask[tr : tr + bh, tc : tc + bw][sel] = 1
    return AmplitudeImage(out, target.dynamic_range_bits), TamperMask(mask)


def random_splice(
    product_tiles,
    region=(128, 128),
    edit: EditOp = EditOp("none"),
    seed: int = 0,
    target_index: int | None = None,
):
    """Draw donor/target tiles and region placements from one product.

    With a single tile, donor and target regions are re-drawn until their
    bounding boxes are disjoint. Returns (spliced, mask, provenance dict);
    every draw is recorded and reproducible from the seed.
    """
    tiles = list(product_tiles)
    if not tiles:
        raise ValueError("no tiles supplied")
    spec_region = region if isinstance(region, tuple) else np.asarray(region)
    probe = SpliceSpec((0, 0), (0, 0), spec_region)
    bh, bw = probe.box_shape

    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    if target_index is None:
        target_index = int(rng.integers(len(tiles)))
    donor_index = int(rng.integers(len(tiles)))
    target = tiles[target_index]
    if target.height < bh or target.width < bw:
        raise RasterError(f"target tile {target.shape} is too small for a {bh}x{bw} region")

    # Same-tile splices need room for two disjoint boxes; fall back to a
    # different donor tile when one exists.
    if donor_index == target_index and target.height < 2 * bh and target.width < 2 * bw:
        if len(tiles) == 1:
            raise RasterError(
                f"single {target.shape} tile is too small for disjoint {bh}x{bw} regions"
            )
        others = [k for k in range(len(tiles)) if k != target_index]
        donor_index = others[int(rng.integers(len(others)))]

    edit_seed = int(rng.integers(np.iinfo(np.int64).max))
    edited = edit_donor(tiles[donor_index], edit, edit_seed)
    parameter = sample_edit_parameter(edit, edit_seed)
    if edited.height < bh or edited.width < bw:
        raise RasterError(
            f"edited donor {edited.shape} is too small for a {bh}x{bw} region"
        )

    same_tile = donor_index == target_index
    for _ in range(1000):
        dr = int(rng.integers(edited.height - bh + 1))
        dc = int(rng.integers(edited.width - bw + 1))
        tr = int(rng.integers(target.height - bh + 1))
        tc = int(rng.integers(target.width - bw + 1))
        boxes_overlap = abs(dr - tr) < bh and abs(dc - tc) < bw
        if not (same_tile and boxes_overlap):
            break
    else:
        raise RasterError("could not place disjoint donor/target regions on a single tile")

    spec = SpliceSpec((dr, dc), (tr, tc), spec_region)
    spliced, mask = splice(target, edited, spec)
    provenance = {
        "seed": int(seed),
        "donor_tile_index": donor_index,
        "target_tile_index": target_index,
        "edit_kind": edit.kind,
        "edit_range_class": edit.range_class,
        "edit_parameter": parameter,
        "donor_origin": [dr, dc],
        "target_origin": [tr, tc],
        "region_shape": [bh, bw],
        "region_pixels": int(probe.stencil.sum()),
    }
    return spliced, mask, provenance


# ---------------------------------------------------------------------------
# Global (whole-image) edits
# ---------------------------------------------------------------------------


def global_edit(image: AmplitudeImage, op: GlobalEditOp, seed: int = 0) -> AmplitudeImage:
    """Apply a whole-image edit; output is clipped into the declared range."""
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    values = image.values

    if op.kind == "gaussian_blur":
        sigma = BLUR_SIGMA if op.parameter is None else float(op.parameter)
        out = ndimage.gaussian_filter(values, sigma=sigma, mode="reflect")
    elif op.kind in ("updownscale", "downupscale"):
        factor = GLOBAL_SCALE_FACTORS[op.range_class] if op.parameter is None else float(op.parameter)
        first = factor if op.kind == "updownscale" else 1.0 / factor
        out = _resize_to(resize(values, first), image.shape)
    elif op.kind == "additive_gaussian":
        level = GLOBAL_NOISE_LEVEL if op.parameter is None else float(op.parameter)
        out = values + rng.normal(0.0, level, size=values.shape)
    elif op.kind == "additive_laplacian":
        level = GLOBAL_NOISE_LEVEL if op.parameter is None else float(op.parameter)
        out = values + rng.laplace(0.0, level, size=values.shape)
    elif op.kind == "additive_poisson":
        # Zero-centered: draw ~ P(lambda), add (draw - lambda).
        lam = GLOBAL_NOISE_LEVEL if op.parameter is None else float(op.parameter)
        out = values + (rng.poisson(lam, size=values.shape).astype(np.float64) - lam)
    else:
        half = GLOBAL_UNIFORM_HALF_WIDTH if op.parameter is None else float(op.parameter)
        out = values + rng.uniform(-half, half, size=values.shape)

    return AmplitudeImage(np.clip(out, 0.0, image.dynamic_range), image.dynamic_range_bits)
