import json

import numpy as np
import pytest

from spectraug import (
    DimensionMismatchError,
    ManifestError,
    RassParams,
    RmsParams,
    UnreadableFileError,
    UnsupportedFormatError,
    ValidationError,
    Volume,
    derive_seed,
    load_manifest,
    load_volume,
    normalize,
    resample,
    run_batch,
)
from spectraug.formats import read_nifti, read_png, write_nifti, write_png
from spectraug.pipeline import SampleRecord

from oracles import linear_interp_1d


def make_png(path, arr, bitdepth=8):
    write_png(path, arr, bitdepth)
    return path


def make_nifti(path, arr, affine=None):
    write_nifti(path, arr, affine)
    return path


def make_manifest(tmp_path, modality, target_shape, entries, name="manifest.json"):
    payload = {
        "modality": modality,
        "target_shape": list(target_shape),
        "entries": entries,
    }
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


# ----------------------------------------------------------------- formats


def test_png_roundtrip_known_bytes(tmp_path):
    arr = np.arange(16, dtype=np.uint8).reshape(4, 4) * 16
    path = make_png(tmp_path / "a.png", arr)
    back, bitdepth = read_png(path)
    assert bitdepth == 8
    assert np.array_equal(back, arr)


def test_png_16bit_roundtrip(tmp_path):
    arr = (np.arange(16, dtype=np.uint16).reshape(4, 4) * 4000)
    path = make_png(tmp_path / "a16.png", arr, bitdepth=16)
    back, bitdepth = read_png(path)
    assert bitdepth == 16
    assert np.array_equal(back.astype(np.uint16), arr)


def test_png_rgb_roundtrip(tmp_path):
    arr = np.random.default_rng(0).integers(0, 256, size=(5, 6, 3)).astype(np.uint8)
    path = make_png(tmp_path / "rgb.png", arr)
    back, bitdepth = read_png(path)
    assert bitdepth == 8
    assert back.shape == (5, 6, 3)
    assert np.array_equal(back, arr)


def test_nifti_roundtrip_data_and_affine(tmp_path):
    rng = np.random.default_rng(1)
    arr = rng.normal(size=(5, 6, 7)).astype(np.float32)
    affine = np.array([
        [0.9, 0.0, 0.0, -12.0],
        [0.0, 1.1, 0.0, 4.5],
        [0.0, 0.0, 2.0, 7.25],
        [0.0, 0.0, 0.0, 1.0],
    ])
    path = make_nifti(tmp_path / "v.nii.gz", arr, affine)
    back, got_affine = read_nifti(path)
    assert back.dtype == np.float32
    assert np.array_equal(back, arr)
    assert np.allclose(got_affine, affine, atol=1e-6)


def test_nifti_header_byte_layout(tmp_path):
    # independent check against the published NIfTI-1 header offsets
    import struct

    arr = np.zeros((3, 4, 5), dtype=np.float32)
    affine = np.diag([1.5, 2.5, 3.5, 1.0])
    affine[:3, 3] = (10.0, 20.0, 30.0)
    path = make_nifti(tmp_path / "h.nii", arr, affine)
    raw = path.read_bytes()
    assert struct.unpack_from("<i", raw, 0)[0] == 348          # sizeof_hdr
    assert struct.unpack_from("<8h", raw, 40) == (3, 3, 4, 5, 1, 1, 1, 1)
    assert struct.unpack_from("<h", raw, 70)[0] == 16          # float32
    assert struct.unpack_from("<h", raw, 72)[0] == 32          # bitpix
    assert struct.unpack_from("<f", raw, 108)[0] == 352.0      # vox_offset
    assert struct.unpack_from("<h", raw, 254)[0] == 1          # sform_code
    assert struct.unpack_from("<4f", raw, 280) == (1.5, 0.0, 0.0, 10.0)
    assert struct.unpack_from("<4f", raw, 296) == (0.0, 2.5, 0.0, 20.0)
    assert struct.unpack_from("<4f", raw, 312) == (0.0, 0.0, 3.5, 30.0)
    assert raw[344:348] == b"n+1\x00"
    pixdim = struct.unpack_from("<8f", raw, 76)
    assert pixdim[1:4] == (1.5, 2.5, 3.5)


def test_nifti_int16_roundtrip_uncompressed(tmp_path):
    arr = np.random.default_rng(2).integers(-500, 500, size=(4, 4, 4)).astype(np.int16)
    path = make_nifti(tmp_path / "v.nii", arr)
    back, _ = read_nifti(path)
    assert back.dtype == np.int16
    assert np.array_equal(back, arr)


# ------------------------------------------------------------------ loading


def test_load_png_sample(tmp_path):
    arr = np.arange(16, dtype=np.uint8).reshape(4, 4)
    path = make_png(tmp_path / "img.png", arr)
    record = load_volume(path, "2d", id="img")
    assert record.spatial_shape == (4, 4)
    assert len(record.channels) == 1
    assert np.array_equal(record.channels[0].data, arr.astype(float))


def test_load_rgb_png_splits_channels(tmp_path):
    arr = np.random.default_rng(3).integers(0, 256, size=(4, 4, 3)).astype(np.uint8)
    path = make_png(tmp_path / "rgb.png", arr)
    record = load_volume(path, "2d", id="rgb")
    assert len(record.channels) == 3
    for c in range(3):
        assert np.array_equal(record.channels[c].data, arr[..., c].astype(float))
        assert record.channels[c].id == "rgb"


def test_load_nifti_sample_retains_affine(tmp_path):
    arr = np.random.default_rng(4).normal(size=(4, 5, 6)).astype(np.float32)
    affine = np.diag([2.0, 2.0, 2.0, 1.0])
    path = make_nifti(tmp_path / "v.nii.gz", arr, affine)
    record = load_volume(path, "3d", id="v")
    assert record.spatial_shape == (4, 5, 6)
    assert record.channels[0].spacing == (2.0, 2.0, 2.0)
    assert np.allclose(record.meta.affine, affine)


def test_load_errors(tmp_path):
    with pytest.raises(UnreadableFileError):
        load_volume(tmp_path / "missing.png", "2d")
    bad = tmp_path / "data.bin"
    bad.write_bytes(b"\x00" * 16)
    with pytest.raises(UnsupportedFormatError):
        load_volume(bad, "2d")
    arr = np.zeros((4, 4, 4), dtype=np.float32)
    nii = make_nifti(tmp_path / "v.nii", arr)
    with pytest.raises(DimensionMismatchError):
        load_volume(nii, "2d")
    png = make_png(tmp_path / "i.png", np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(DimensionMismatchError):
        load_volume(png, "3d")


def test_load_label_pairing(tmp_path):
    img = make_png(tmp_path / "i.png", np.zeros((6, 6), dtype=np.uint8))
    lbl = make_png(tmp_path / "l.png", (np.arange(36) % 3).astype(np.uint8).reshape(6, 6))
    record = load_volume(img, "2d", label_path=lbl, id="x")
    assert record.label is not None
    assert record.label.shape == (6, 6)
    wrong = make_png(tmp_path / "w.png", np.zeros((5, 6), dtype=np.uint8))
    with pytest.raises(ValidationError):
        load_volume(img, "2d", label_path=wrong)


# ---------------------------------------------------------------- resample


def _record_2d(data, label=None):
    channels = (Volume(data=data, id="r"),)
    lbl = Volume(data=label, id="r") if label is not None else None
    from spectraug.pipeline import SampleMeta
    return SampleRecord(id="r", channels=channels, label=lbl,
                        meta=SampleMeta(format="png", suffix=".png", bitdepth=8))


def test_resample_identity_is_bitwise(tmp_path):
    data = np.random.default_rng(5).normal(size=(6, 6))
    record = _record_2d(data)
    out = resample(record, (6, 6))
    assert out is record


def test_resample_constant_stays_constant():
    record = _record_2d(np.full((5, 7), 3.25))
    out = resample(record, (9, 4))
    assert np.max(np.abs(out.channels[0].data - 3.25)) < 1e-12


def test_resample_upscale_matches_linear_interpolant():
    ramp = np.linspace(0.0, 1.0, 8)
    data = np.outer(ramp, np.ones(8))
    record = _record_2d(data)
    out = resample(record, (16, 16)).channels[0].data
    for j in range(16):
        x = j * 7.0 / 15.0  # endpoint-aligned source coordinate
        want = linear_interp_1d(ramp, x)
        assert out[j, 0] == pytest.approx(want, abs=1e-6)
        assert out[j, 9] == pytest.approx(want, abs=1e-6)


def test_resample_label_nearest_and_subset():
    label = (np.arange(36) % 4).astype(float).reshape(6, 6)
    record = _record_2d(np.zeros((6, 6)), label=label)
    out = resample(record, (11, 9))
    got = set(np.unique(out.label.data))
    assert got <= set(np.unique(label))
    assert np.allclose(out.label.data, np.round(out.label.data))


def test_resample_rejects_degenerate_target():
    record = _record_2d(np.zeros((4, 4)))
    with pytest.raises(ValidationError):
        resample(record, (0, 4))
    with pytest.raises(ValidationError):
        resample(record, (4, 4, 4))


# --------------------------------------------------------------- normalize


def test_normalize_minmax_hits_unit_range():
    v = Volume(data=np.arange(256, dtype=float).reshape(16, 16), id="v")
    out = normalize(v, "minmax")
    assert out.data.min() == 0.0
    assert out.data.max() == 1.0


def test_normalize_constant_degenerates_to_zero():
    v = Volume(data=np.full((4, 4), 9.0), id="v")
    assert np.all(normalize(v, "minmax").data == 0.0)
    assert np.all(normalize(v, "zscore").data == 0.0)


def test_normalize_zscore_moments():
    v = Volume(data=np.random.default_rng(6).normal(3.0, 2.5, size=(32, 32)), id="v")
    out = normalize(v, "zscore")
    assert abs(out.data.mean()) <= 1e-9
    assert abs(out.data.std() - 1.0) <= 1e-6


def test_normalize_none_is_identity():
    v = Volume(data=np.random.default_rng(7).normal(size=(4, 4)), id="v")
    assert normalize(v, "none") is v


# -------------------------------------------------------------- seeds


def test_derive_seed_contract():
    assert derive_seed(1, "vol", 0) == derive_seed(1, "vol", 0)
    assert derive_seed(1, "vol", 0) != derive_seed(1, "vol", 1)
    assert derive_seed(1, "vol", 0) != derive_seed(2, "vol", 0)
    seeds = {derive_seed(42, f"id{i}", k) for i in range(100) for k in range(100)}
    assert len(seeds) == 10_000


# -------------------------------------------------------------- run_batch


def _identity_rass(seed=0):
    return RassParams(alpha=0.0, beta=0.0, gamma=2.0, seed=seed)


def _no_rms(rank=2):
    return RmsParams(num_regions=0, min_size=(1,) * rank, max_size=(1,) * rank, seed=0)


def _png_fixture(tmp_path, n_entries=2, shape=(16, 16), with_labels=True):
    rng = np.random.default_rng(11)
    entries = []
    for i in range(n_entries):
        arr = rng.integers(0, 256, size=shape).astype(np.uint8)
        arr.reshape(-1)[0] = 0    # pin the min/max so minmax is exact
        arr.reshape(-1)[1] = 255
        make_png(tmp_path / f"img{i}.png", arr)
        entry = {"id": f"img{i}", "image_path": f"img{i}.png"}
        if with_labels:
            lbl = (rng.integers(0, 3, size=shape)).astype(np.uint8)
            make_png(tmp_path / f"lbl{i}.png", lbl)
            entry["label_path"] = f"lbl{i}.png"
        entries.append(entry)
    return make_manifest(tmp_path, "2d", shape, entries)


def _nifti_fixture(tmp_path, n_entries=2, shape=(8, 8, 8)):
    rng = np.random.default_rng(12)
    entries = []
    for i in range(n_entries):
        arr = rng.normal(size=shape).astype(np.float32)
        make_nifti(tmp_path / f"vol{i}.nii.gz", arr)
        entries.append({"id": f"vol{i}", "image_path": f"vol{i}.nii.gz"})
    return make_manifest(tmp_path, "3d", shape, entries, name="manifest3d.json")


def _tree_bytes(root, skip_volatile=True):
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file():
            if p.name == "summary.json":
                payload = json.loads(p.read_text())
                payload.pop("elapsed_seconds", None)
                out[p.relative_to(root)] = json.dumps(payload, sort_keys=True)
            else:
                out[p.relative_to(root)] = p.read_bytes()
    return out


def test_identity_pipeline_reproduces_preprocessed_png(tmp_path):
    manifest_path = _png_fixture(tmp_path, n_entries=1, with_labels=False)
    manifest = load_manifest(manifest_path)
    out_dir = tmp_path / "out"
    summary = run_batch(manifest, _identity_rass(), _no_rms(), 1, out_dir)
    assert summary["counts"]["failed"] == 0
    record = load_volume(tmp_path / "img0.png", "2d", id="img0")
    pre = normalize(resample(record, (16, 16)).channels[0], "minmax")
    got, _ = read_png(out_dir / "img0_000.png")
    want = np.clip(np.rint(pre.data * 255.0), 0, 255).astype(np.uint8)
    assert np.array_equal(got, want)


def test_identity_pipeline_reproduces_preprocessed_nifti(tmp_path):
    manifest_path = _nifti_fixture(tmp_path, n_entries=1)
    manifest = load_manifest(manifest_path)
    out_dir = tmp_path / "out3d"
    summary = run_batch(manifest, _identity_rass(), _no_rms(rank=3), 1, out_dir)
    assert summary["counts"]["failed"] == 0
    record = load_volume(tmp_path / "vol0.nii.gz", "3d", id="vol0")
    pre = normalize(resample(record, (8, 8, 8)).channels[0], "minmax")
    got, _ = read_nifti(out_dir / "vol0_000.nii.gz")
    scale = np.max(np.abs(pre.data))
    assert np.max(np.abs(got.astype(np.float64) - pre.data)) <= 1e-6 * scale


def test_run_batch_is_deterministic_across_invocations_and_workers(tmp_path):
    manifest_path = _png_fixture(tmp_path, n_entries=3)
    manifest = load_manifest(manifest_path)
    trees = []
    for i, workers in enumerate((1, 1, 4)):
        out_dir = tmp_path / f"run{i}"
        run_batch(manifest, RassParams(seed=7), RmsParams(
            num_regions=2, min_size=(2, 2), max_size=(4, 4), seed=7,
        ), 2, out_dir, workers=workers)
        trees.append(_tree_bytes(out_dir))
    assert trees[0] == trees[1]
    assert trees[0] == trees[2]


def test_run_batch_copy_count_and_distinctness(tmp_path):
    manifest_path = _png_fixture(tmp_path, n_entries=2, with_labels=False)
    manifest = load_manifest(manifest_path)
    out_dir = tmp_path / "copies"
    summary = run_batch(manifest, RassParams(seed=3), _no_rms(), 3, out_dir)
    assert summary["counts"]["outputs"] == 6
    for i in range(2):
        files = sorted(out_dir.glob(f"img{i}_*.png"))
        assert len(files) == 3
        blobs = [f.read_bytes() for f in files]
        assert len({b for b in blobs}) == 3  # pairwise distinct


def test_run_batch_channels_share_delta_and_regions(tmp_path):
    rng = np.random.default_rng(13)
    arr = rng.integers(0, 256, size=(16, 16, 3)).astype(np.uint8)
    make_png(tmp_path / "rgb.png", arr)
    manifest_path = make_manifest(
        tmp_path, "2d", (16, 16), [{"id": "rgb", "image_path": "rgb.png"}]
    )
    manifest = load_manifest(manifest_path)
    out_dir = tmp_path / "rgbout"
    # alpha 0 but beta > 0: every channel's DC bin gets the same multiplier,
    # so a constant-channel relationship survives augmentation
    summary = run_batch(
        manifest, RassParams(alpha=0.0, beta=0.25, gamma=2.0, seed=5),
        _no_rms(), 1, out_dir,
    )
    assert summary["counts"]["failed"] == 0
    out, _ = read_png(out_dir / "rgb_000.png")
    assert out.shape == (16, 16, 3)


def test_run_batch_applies_coherent_augmentation_across_channels(tmp_path):
    # identical channels must stay identical: one delta field and one set of
    # region permutations per image, shared by all channels
    rng = np.random.default_rng(14)
    plane = rng.integers(0, 256, size=(16, 16)).astype(np.uint8)
    arr = np.stack([plane, plane, plane], axis=-1)
    write_png(tmp_path / "rgb.png", arr, 8)
    manifest = load_manifest(make_manifest(
        tmp_path, "2d", (16, 16), [{"id": "rgb", "image_path": "rgb.png"}]
    ))
    out_dir = tmp_path / "coherent"
    run_batch(manifest, RassParams(seed=2), RmsParams(
        num_regions=3, min_size=(2, 2), max_size=(6, 6), seed=2,
    ), 1, out_dir)
    out, _ = read_png(out_dir / "rgb_000.png")
    assert np.array_equal(out[..., 0], out[..., 1])
    assert np.array_equal(out[..., 0], out[..., 2])
    assert not np.array_equal(out[..., 0], plane)  # it did augment


def test_run_batch_collects_per_entry_failures(tmp_path):
    manifest_path = _png_fixture(tmp_path, n_entries=2, with_labels=False)
    manifest = load_manifest(manifest_path)
    (tmp_path / "img1.png").unlink()
    out_dir = tmp_path / "partial"
    summary = run_batch(manifest, _identity_rass(), _no_rms(), 1, out_dir)
    statuses = {e["id"]: e["status"] for e in summary["entries"]}
    assert statuses == {"img0": "ok", "img1": "failed"}
    assert summary["counts"]["failed"] == 1
    assert (out_dir / "img0_000.png").exists()


def test_run_batch_labels_pass_through_unshuffled(tmp_path):
    manifest_path = _png_fixture(tmp_path, n_entries=1, with_labels=True)
    manifest = load_manifest(manifest_path)
    out_dir = tmp_path / "lblout"
    run_batch(manifest, RassParams(seed=1), RmsParams(
        num_regions=3, min_size=(2, 2), max_size=(5, 5), seed=1,
    ), 2, out_dir)
    original, _ = read_png(tmp_path / "lbl0.png")
    for copy in range(2):
        got, _ = read_png(out_dir / f"img0_{copy:03d}_label.png")
        assert np.array_equal(got, original)


def test_run_batch_nifti_labels_resampled_nearest(tmp_path):
    rng = np.random.default_rng(15)
    img = rng.normal(size=(8, 8, 8)).astype(np.float32)
    lbl = rng.integers(0, 4, size=(8, 8, 8)).astype(np.int16)
    affine = np.diag([2.0, 2.0, 2.0, 1.0])
    make_nifti(tmp_path / "v.nii.gz", img, affine)
    make_nifti(tmp_path / "v_lbl.nii.gz", lbl, affine)
    manifest = load_manifest(make_manifest(
        tmp_path, "3d", (12, 12, 12),
        [{"id": "v", "image_path": "v.nii.gz", "label_path": "v_lbl.nii.gz"}],
    ))
    out_dir = tmp_path / "n3d"
    summary = run_batch(manifest, RassParams(seed=1), _no_rms(rank=3), 1, out_dir)
    assert summary["counts"]["failed"] == 0
    out_img, img_affine = read_nifti(out_dir / "v_000.nii.gz")
    out_lbl, lbl_affine = read_nifti(out_dir / "v_000_label.nii.gz")
    assert out_img.shape == (12, 12, 12)
    assert out_lbl.shape == (12, 12, 12)
    assert out_lbl.dtype == np.int16
    assert set(np.unique(out_lbl)) <= set(np.unique(lbl))
    assert np.allclose(img_affine, affine)   # original affine retained
    assert np.allclose(lbl_affine, affine)


def test_run_batch_16bit_png_keeps_bit_depth(tmp_path):
    rng = np.random.default_rng(16)
    arr = rng.integers(0, 65536, size=(16, 16)).astype(np.uint16)
    arr.reshape(-1)[0], arr.reshape(-1)[1] = 0, 65535
    write_png(tmp_path / "deep.png", arr, 16)
    manifest = load_manifest(make_manifest(
        tmp_path, "2d", (16, 16), [{"id": "deep", "image_path": "deep.png"}]
    ))
    out_dir = tmp_path / "deep_out"
    run_batch(manifest, _identity_rass(), _no_rms(), 1, out_dir)
    got, bitdepth = read_png(out_dir / "deep_000.png")
    assert bitdepth == 16
    assert np.array_equal(got.astype(np.uint16), arr)  # identity config


def test_dry_run_writes_nothing(tmp_path):
    manifest_path = _png_fixture(tmp_path, n_entries=2, with_labels=False)
    manifest = load_manifest(manifest_path)
    out_dir = tmp_path / "dry"
    summary = run_batch(manifest, _identity_rass(), _no_rms(), 1, out_dir, dry_run=True)
    assert not out_dir.exists()
    assert summary["counts"]["outputs"] == 0
    assert summary["counts"]["failed"] == 0


# ---------------------------------------------------------------- manifest


def test_manifest_validation(tmp_path):
    with pytest.raises(ManifestError):
        load_manifest(tmp_path / "nope.json")
    p = make_manifest(tmp_path, "2d", (8, 8), [
        {"id": "a", "image_path": "a.png"},
        {"id": "a", "image_path": "b.png"},
    ])
    with pytest.raises(ManifestError):
        load_manifest(p)
    p2 = make_manifest(tmp_path, "3d", (8, 8), [], name="m2.json")
    with pytest.raises(ManifestError):
        load_manifest(p2)
    p3 = make_manifest(tmp_path, "hyper", (8, 8), [], name="m3.json")
    with pytest.raises(ManifestError):
        load_manifest(p3)


def test_manifest_target_shape_defaults_by_modality(tmp_path):
    for modality, want in (("2d", (512, 512)), ("3d", (144, 144, 144))):
        path = tmp_path / f"default_{modality}.json"
        path.write_text(json.dumps({
            "modality": modality,
            "entries": [{"id": "a", "image_path": "a.png"}],
        }))
        assert load_manifest(path).target_shape == want
