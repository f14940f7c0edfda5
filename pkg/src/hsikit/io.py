"""Bit-exact file formats plus RGB extraction and PNG rendering.

Every container is a single-line compact JSON header (UTF-8, terminated by
one ``\\n``) followed by a raw little-endian payload:

====== ======= ========================== ==============================
suffix magic   payload                    extra header fields
====== ======= ========================== ==============================
.hsc   HSC1    f32le, band-sequential     bands, dtype "f32le", name?
.hsl   HSL1    u16le, row-major           num_classes, dtype "u16le"
.hsp   HSP1    u16le, row-major (total)   num_classes, dtype "u16le"
.hss   HSS1    u32le, row-major           num_segments, dtype "u32le"
.hsa   HSA1    two f32le planes           dtype "f32le" (right, then down)
.hsm   HSM1    u8 (0/1), row-major        dtype "u8"
====== ======= ========================== ==============================

All headers carry "magic", "height", "width" first, in that key order, so
writes are byte-for-byte deterministic. Readers refuse payloads whose header
counts imply an allocation above a configurable cap (default 2 GiB).
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .core import AffinityMap, ClassMap, HyperCube, LabelMap, PixelMask, RgbImage, SuperpixelMap
from .errors import (
    BadMagic,
    BandOutOfRange,
    HeaderTooLarge,
    IoFailure,
    LabelOutOfRange,
    PaletteTooSmall,
    TruncatedPayload,
)

DEFAULT_ALLOC_CAP = 2 << 30  # bytes of payload a reader will accept

# Background (index 0) + 16 class colors; stable across releases so rendered
# maps are reproducible byte-for-byte.
DEFAULT_PALETTE = (
    (0, 0, 0),
    (230, 25, 75),
    (60, 180, 75),
    (255, 225, 25),
    (0, 130, 200),
    (245, 130, 48),
    (145, 30, 180),
    (70, 240, 240),
    (240, 50, 230),
    (210, 245, 60),
    (250, 190, 190),
    (0, 128, 128),
    (230, 190, 255),
    (170, 110, 40),
    (255, 250, 200),
    (128, 0, 0),
    (170, 255, 195),
)


def _write_container(path, header: dict, payload: bytes) -> None:
    line = json.dumps(header, separators=(",", ":")) + "\n"
    try:
        with open(path, "wb") as fh:
            fh.write(line.encode("utf-8"))
            fh.write(payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _read_container(path, magic: str, max_bytes: int):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    nl = raw.find(b"\n")
    if nl < 0:
        raise BadMagic(f"{path}: missing header line")
    try:
        header = json.loads(raw[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BadMagic(f"{path}: unparsable header ({exc})") from exc
    if not isinstance(header, dict) or header.get("magic") != magic:
        raise BadMagic(f"{path}: expected magic {magic!r}, got {header.get('magic')!r}")
    for key in ("height", "width"):
        v = header.get(key)
        if not isinstance(v, int) or v < 1:
            raise BadMagic(f"{path}: header field {key!r} must be a positive integer")
    return header, raw[nl + 1:]


def _payload_array(path, header, payload, count, dtype, max_bytes):
    expected = count * np.dtype(dtype).itemsize
    if expected > max_bytes:
        raise HeaderTooLarge(
            f"{path}: header implies {expected} payload bytes, above cap {max_bytes}"
        )
    if len(payload) != expected:
        raise TruncatedPayload(
            f"{path}: expected {expected} payload bytes, found {len(payload)}"
        )
    return np.frombuffer(payload, dtype=dtype, count=count)


def write_cube(cube: HyperCube, path) -> None:
    header = {
        "magic": "HSC1",
        "height": cube.height,
        "width": cube.width,
        "bands": cube.bands,
        "dtype": "f32le",
    }
    if cube.name is not None:
        header["name"] = cube.name
    payload = np.ascontiguousarray(cube.data, dtype="<f4").tobytes()
    _write_container(path, header, payload)


def read_cube(path, max_bytes: int = DEFAULT_ALLOC_CAP) -> HyperCube:
    header, payload = _read_container(path, "HSC1", max_bytes)
    bands = header.get("bands")
    if not isinstance(bands, int) or bands < 1:
        raise BadMagic(f"{path}: header field 'bands' must be a positive integer")
    if header.get("dtype") != "f32le":
        raise BadMagic(f"{path}: unsupported cube dtype {header.get('dtype')!r}")
    h, w = header["height"], header["width"]
    flat = _payload_array(path, header, payload, h * w * bands, "<f4", max_bytes)
    return HyperCube(flat.reshape(bands, h, w), name=header.get("name"))


def _write_raster(value2d: np.ndarray, path, magic, dtype, extra: dict) -> None:
    h, w = value2d.shape
    header = {"magic": magic, "height": h, "width": w, **extra}
    _write_container(path, header, np.ascontiguousarray(value2d, dtype=dtype).tobytes())


def write_labels(labels: LabelMap, path) -> None:
    _write_raster(labels.labels, path, "HSL1", "<u2",
                  {"num_classes": labels.num_classes, "dtype": "u16le"})


def read_labels(path, max_bytes: int = DEFAULT_ALLOC_CAP) -> LabelMap:
    header, payload = _read_container(path, "HSL1", max_bytes)
    h, w = header["height"], header["width"]
    flat = _payload_array(path, header, payload, h * w, "<u2", max_bytes)
    return LabelMap(flat.reshape(h, w), num_classes=int(header.get("num_classes", -1)))


def write_classmap(classes: ClassMap, path) -> None:
    if int(classes.classes.min()) < 1:
        raise LabelOutOfRange("class map must be total (no 0) to be written")
    _write_raster(classes.classes, path, "HSP1", "<u2",
                  {"num_classes": classes.num_classes, "dtype": "u16le"})


def read_classmap(path, max_bytes: int = DEFAULT_ALLOC_CAP) -> ClassMap:
    header, payload = _read_container(path, "HSP1", max_bytes)
    h, w = header["height"], header["width"]
    flat = _payload_array(path, header, payload, h * w, "<u2", max_bytes)
    return ClassMap(flat.reshape(h, w), num_classes=int(header.get("num_classes", -1)))


def write_superpixels(sp: SuperpixelMap, path) -> None:
    _write_raster(sp.segment_ids, path, "HSS1", "<u4",
                  {"num_segments": sp.num_segments, "dtype": "u32le"})


def read_superpixels(path, max_bytes: int = DEFAULT_ALLOC_CAP) -> SuperpixelMap:
    header, payload = _read_container(path, "HSS1", max_bytes)
    h, w = header["height"], header["width"]
    flat = _payload_array(path, header, payload, h * w, "<u4", max_bytes)
    return SuperpixelMap(flat.reshape(h, w), num_segments=int(header.get("num_segments", -1)))


def write_affinity(aff: AffinityMap, path) -> None:
    h, w = aff.height, aff.width
    header = {"magic": "HSA1", "height": h, "width": w, "dtype": "f32le"}
    payload = (np.ascontiguousarray(aff.right, dtype="<f4").tobytes()
               + np.ascontiguousarray(aff.down, dtype="<f4").tobytes())
    _write_container(path, header, payload)


def read_affinity(path, max_bytes: int = DEFAULT_ALLOC_CAP) -> AffinityMap:
    header, payload = _read_container(path, "HSA1", max_bytes)
    h, w = header["height"], header["width"]
    flat = _payload_array(path, header, payload, 2 * h * w, "<f4", max_bytes)
    return AffinityMap(flat[: h * w].reshape(h, w), flat[h * w:].reshape(h, w))


def write_mask(mask: PixelMask, path) -> None:
    _write_raster(mask.mask.astype(np.uint8), path, "HSM1", "u1", {"dtype": "u8"})


def read_mask(path, max_bytes: int = DEFAULT_ALLOC_CAP) -> PixelMask:
    header, payload = _read_container(path, "HSM1", max_bytes)
    h, w = header["height"], header["width"]
    flat = _payload_array(path, header, payload, h * w, "u1", max_bytes)
    if flat.max(initial=0) > 1:
        raise LabelOutOfRange(f"{path}: mask payload must contain only 0/1")
    return PixelMask(flat.reshape(h, w).astype(bool))


def default_rgb_bands(bands: int) -> tuple[int, int, int]:
    """Documented default band triple for false-color rendering.

    Picks bands at 65% / 35% / 5% of the spectral range (roughly red, green,
    blue for VNIR sensors). The source material never states which bands it
    rendered, so this is a toolkit convention, not a reproduction target.
    """
    top = bands - 1
    return (int(top * 0.65 + 0.5), int(top * 0.35 + 0.5), int(top * 0.05 + 0.5))


def cube_to_rgb(cube: HyperCube, band_r: int, band_g: int, band_b: int) -> RgbImage:
    """False-color composite: each band percentile-clipped (2/98) then min-max
    scaled to 0..255. A constant band maps to mid-gray 128."""
    out = np.empty((cube.height, cube.width, 3), dtype=np.uint8)
    for ch, b in enumerate((band_r, band_g, band_b)):
        if not (0 <= b < cube.bands):
            raise BandOutOfRange(f"band index {b} out of range for {cube.bands}-band cube")
        plane = cube.data[b].astype(np.float64)
        lo = float(np.percentile(plane, 2.0))
        hi = float(np.percentile(plane, 98.0))
        if hi > lo:
            clipped = np.clip(plane, lo, hi)
            scaled = np.floor((clipped - lo) * (255.0 / (hi - lo)) + 0.5)
            out[:, :, ch] = np.clip(scaled, 0, 255).astype(np.uint8)
        else:
            out[:, :, ch] = 128
    return RgbImage(out)


def encode_png(pixels: np.ndarray) -> bytes:
    """Minimal deterministic truecolor PNG encoder (8-bit RGB, no interlace).

    Hand-rolled instead of an imaging dependency because rendered maps must be
    byte-identical across runs and environments.
    """
    img = np.ascontiguousarray(pixels, dtype=np.uint8)
    if img.ndim != 3 or img.shape[2] != 3:
        raise IoFailure(f"png encoder expects (H, W, 3) uint8, got {img.shape}")
    h, w = img.shape[:2]

    def chunk(tag: bytes, body: bytes) -> bytes:
        return (struct.pack(">I", len(body)) + tag + body
                + struct.pack(">I", zlib.crc32(tag + body) & 0xFFFFFFFF))

    raw = b"".join(b"\x00" + img[y].tobytes() for y in range(h))
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    return (b"\x89PNG\r\n\x1a\n"
            + chunk(b"IHDR", ihdr)
            + chunk(b"IDAT", zlib.compress(raw, 9))
            + chunk(b"IEND", b""))


def render_class_map(classes: ClassMap, palette=None) -> bytes:
    """Render class i with palette[i-1]; defaults to the built-in 16-color table."""
    if palette is None:
        palette = DEFAULT_PALETTE[1:]
    if len(palette) < classes.num_classes:
        raise PaletteTooSmall(
            f"palette has {len(palette)} entries but map has {classes.num_classes} classes"
        )
    lut = np.asarray(palette, dtype=np.uint8)
    return encode_png(lut[classes.classes.astype(np.int64) - 1])


def render_label_map(labels: LabelMap, palette=None) -> bytes:
    """Like render_class_map but value 0 (unlabeled) gets the background color."""
    if palette is None:
        palette = DEFAULT_PALETTE[1:]
    if len(palette) < labels.num_classes:
        raise PaletteTooSmall(
            f"palette has {len(palette)} entries but map has {labels.num_classes} classes"
        )
    lut = np.vstack([np.asarray(DEFAULT_PALETTE[:1], dtype=np.uint8),
                     np.asarray(palette, dtype=np.uint8)])
    return encode_png(lut[labels.labels.astype(np.int64)])


def render_boundaries(sp: SuperpixelMap, base: RgbImage | None = None,
                      color=(255, 255, 0)) -> bytes:
    """Segment-boundary overlay; on a white canvas when no base image is given."""
    if base is None:
        img = np.full((sp.height, sp.width, 3), 255, dtype=np.uint8)
    else:
        if (base.height, base.width) != (sp.height, sp.width):
            raise IoFailure("base image dimensions do not match superpixel map")
        img = base.pixels.copy()
    ids = sp.segment_ids
    edge = np.zeros(ids.shape, dtype=bool)
    edge[:, :-1] |= ids[:, :-1] != ids[:, 1:]
    edge[:-1, :] |= ids[:-1, :] != ids[1:, :]
    img[edge] = np.asarray(color, dtype=np.uint8)
    return encode_png(img)


def write_runs_csv(records, path) -> None:
    """Per-run report rows: dataset,method,train_fraction,seed,oa,kappa."""
    lines = ["dataset,method,train_fraction,seed,oa,kappa"]
    for r in records:
        lines.append(f"{r.dataset},{r.method},{r.train_fraction!r},{r.seed},{r.oa!r},{r.kappa!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_summary_csv(table, path) -> None:
    """Aggregated mean/std rows per (dataset, method, fraction)."""
    lines = ["dataset,method,train_fraction,runs,oa_mean,oa_std,kappa_mean,kappa_std"]
    for g in table.groups:
        lines.append(
            f"{g.dataset},{g.method},{g.train_fraction!r},{g.runs},"
            f"{g.oa_mean!r},{g.oa_std!r},{g.kappa_mean!r},{g.kappa_std!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
