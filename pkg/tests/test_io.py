import json
import zlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsikit import io as hio
from hsikit.core import AffinityMap, ClassMap, HyperCube, LabelMap, PixelMask, SuperpixelMap
from hsikit.errors import (
    BadMagic,
    BandOutOfRange,
    HeaderTooLarge,
    IoFailure,
    PaletteTooSmall,
    TruncatedPayload,
)


def test_cube_roundtrip(tmp_path):
    cube = HyperCube(np.arange(2 * 2 * 1, dtype=np.float32).reshape(1, 2, 2), name="toy")
    path = tmp_path / "toy.hsc"
    hio.write_cube(cube, path)
    assert hio.read_cube(path) == cube


def test_cube_header_and_payload_layout(tmp_path):
    cube = HyperCube(np.arange(4, dtype=np.float32).reshape(1, 2, 2))
    path = tmp_path / "t.hsc"
    hio.write_cube(cube, path)
    raw = path.read_bytes()
    header, payload = raw.split(b"\n", 1)
    assert json.loads(header) == {"magic": "HSC1", "height": 2, "width": 2,
                                  "bands": 1, "dtype": "f32le"}
    assert len(payload) == 16
    assert np.frombuffer(payload, "<f4").tolist() == [0.0, 1.0, 2.0, 3.0]


def test_cube_truncated_payload(tmp_path):
    path = tmp_path / "t.hsc"
    header = b'{"magic":"HSC1","height":2,"width":2,"bands":1,"dtype":"f32le"}\n'
    path.write_bytes(header + b"\x00" * 12)
    with pytest.raises(TruncatedPayload, match="expected 16"):
        hio.read_cube(path)


def test_bad_magic(tmp_path):
    path = tmp_path / "t.hsc"
    path.write_bytes(b'{"magic":"NOPE","height":1,"width":1,"bands":1}\n' + b"\x00" * 4)
    with pytest.raises(BadMagic):
        hio.read_cube(path)


def test_header_cap(tmp_path):
    path = tmp_path / "big.hsc"
    path.write_bytes(
        b'{"magic":"HSC1","height":100000,"width":100000,"bands":100,"dtype":"f32le"}\n')
    with pytest.raises(HeaderTooLarge):
        hio.read_cube(path)


def test_missing_file_names_path(tmp_path):
    with pytest.raises(IoFailure, match="nowhere.hsc"):
        hio.read_cube(tmp_path / "nowhere.hsc")


def test_labelmap_roundtrip_pavia_sized(tmp_path):
    rng = np.random.default_rng(5)
    labels = rng.integers(0, 10, size=(610, 340)).astype(np.uint16)
    labels[0, :9] = np.arange(1, 10)  # all nine classes present
    lm = LabelMap(labels, num_classes=9)
    path = tmp_path / "gt.hsl"
    hio.write_labels(lm, path)
    back = hio.read_labels(path)
    assert back == lm
    assert back.num_classes == 9


def test_classmap_roundtrip_and_totality(tmp_path):
    cm = ClassMap(np.array([[1, 2], [2, 1]], dtype=np.uint16), num_classes=2)
    path = tmp_path / "z.hsp"
    hio.write_classmap(cm, path)
    assert hio.read_classmap(path) == cm


def test_write_is_deterministic(tmp_path):
    cube = HyperCube(np.linspace(0, 1, 24, dtype=np.float32).reshape(2, 3, 4))
    a, b = tmp_path / "a.hsc", tmp_path / "b.hsc"
    hio.write_cube(cube, a)
    hio.write_cube(cube, b)
    assert a.read_bytes() == b.read_bytes()


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_raster_roundtrips_random(tmp_path_factory, data):
    h = data.draw(st.integers(1, 8))
    w = data.draw(st.integers(1, 8))
    seed = data.draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    tmp = tmp_path_factory.mktemp("io")

    labels = rng.integers(0, 4, size=(h, w)).astype(np.uint16)
    lm = LabelMap(labels, num_classes=int(labels.max()))
    hio.write_labels(lm, tmp / "x.hsl")
    assert hio.read_labels(tmp / "x.hsl") == lm

    ids = rng.integers(0, 3, size=(h, w))
    _, contiguous = np.unique(ids, return_inverse=True)
    sp = SuperpixelMap(contiguous.reshape(h, w).astype(np.uint32),
                       num_segments=int(contiguous.max()) + 1)
    hio.write_superpixels(sp, tmp / "x.hss")
    assert hio.read_superpixels(tmp / "x.hss") == sp

    aff = AffinityMap(rng.random((h, w), dtype=np.float32),
                      rng.random((h, w), dtype=np.float32))
    hio.write_affinity(aff, tmp / "x.hsa")
    assert hio.read_affinity(tmp / "x.hsa") == aff

    mask = PixelMask(rng.random((h, w)) < 0.5)
    hio.write_mask(mask, tmp / "x.hsm")
    assert hio.read_mask(tmp / "x.hsm") == mask


def test_one_pixel_roundtrip(tmp_path):
    lm = LabelMap(np.array([[1]], dtype=np.uint16), num_classes=1)
    hio.write_labels(lm, tmp_path / "one.hsl")
    assert hio.read_labels(tmp_path / "one.hsl") == lm


def test_cube_to_rgb_constant_band_is_uniform():
    cube = HyperCube(np.full((1, 3, 3), 7.5, dtype=np.float32))
    rgb = hio.cube_to_rgb(cube, 0, 0, 0)
    assert (rgb.pixels == rgb.pixels[0, 0, 0]).all()
    assert rgb.pixels[0, 0, 0] == rgb.pixels[0, 0, 1] == rgb.pixels[0, 0, 2]


def test_cube_to_rgb_two_value_band_scales_to_extremes():
    # bands [0,1], [2,3], [4,5] on a 2x1 image: with the 2/98 percentile rule,
    # lo = v0 + 0.02*(v1-v0) and hi = v0 + 0.98*(v1-v0), so the two pixels map
    # to exactly 0 and 255 after clipping (hand derivation).
    data = np.array([[[0.0], [1.0]], [[2.0], [3.0]], [[4.0], [5.0]]], dtype=np.float32)
    cube = HyperCube(data)
    rgb = hio.cube_to_rgb(cube, 0, 1, 2)
    assert rgb.pixels[0, 0].tolist() == [0, 0, 0]
    assert rgb.pixels[1, 0].tolist() == [255, 255, 255]


def test_cube_to_rgb_band_out_of_range():
    cube = HyperCube(np.zeros((2, 2, 2), dtype=np.float32))
    with pytest.raises(BandOutOfRange):
        hio.cube_to_rgb(cube, 0, 1, 2)


def test_render_single_red_pixel():
    cm = ClassMap(np.array([[1]], dtype=np.uint16), num_classes=1)
    png = hio.render_class_map(cm, palette=[(255, 0, 0)])
    assert png.startswith(b"\x89PNG")
    # decode the IDAT back and check the pixel
    idat = png[png.index(b"IDAT") + 4:png.index(b"IEND") - 8]
    assert zlib.decompress(idat) == b"\x00\xff\x00\x00"


def test_render_deterministic_and_palette_checked(medium_scene):
    _, labels = medium_scene
    png1 = hio.render_label_map(labels)
    png2 = hio.render_label_map(labels)
    assert png1 == png2
    with pytest.raises(PaletteTooSmall):
        hio.render_label_map(labels, palette=[(1, 2, 3)])


def test_render_distinct_colors_bounded():
    rng = np.random.default_rng(3)
    cm = ClassMap(rng.integers(1, 17, size=(30, 30)).astype(np.uint16), num_classes=16)
    png = hio.render_class_map(cm)
    idat = png[png.index(b"IDAT") + 4:png.index(b"IEND") - 8]
    raw = zlib.decompress(idat)
    rows = [raw[i * (3 * 30 + 1) + 1:(i + 1) * (3 * 30 + 1)] for i in range(30)]
    pixels = {tuple(row[i:i + 3]) for row in rows for i in range(0, 90, 3)}
    assert len(pixels) <= 16
