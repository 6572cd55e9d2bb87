"""Command-line front end: `augment`, `stats`, and `inspect`.

Configuration precedence is command line > config file (--config, TOML or
JSON) > built-in defaults. Exit codes: 0 success, 1 runtime failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bandstats import BandSpec, report_for_corpora
from .errors import SpectraugError
from .manifest import load_manifest
from .pipeline import NORMALIZE_MODES, load_volume, normalize, resample, run_batch
from .rass import DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_GAMMA, RassParams, sigma_value
from .rms import default_params_for_shape
from .volume import Volume

WORKERS_ENV = "SPECTRAUG_WORKERS"

DEFAULTS = {
    "alpha": DEFAULT_ALPHA,
    "beta": DEFAULT_BETA,
    "gamma": DEFAULT_GAMMA,
    "seed": 0,
    "copies": 1,
    "rms_regions": 4,
    "rms_min_frac": 1.0 / 16.0,
    "rms_max_frac": 0.25,
    "normalize": "minmax",
    "workers": None,  # resolved from env, then 1
    "band_split": [0.25],
    "log_amplitude": False,
}


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise SpectraugError(f"config file not found: {p}")
    if p.suffix == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(p.read_text())
    return json.loads(p.read_text())


class _Layered:
    """Value lookup with command line > config file > defaults."""

    def __init__(self, args: argparse.Namespace, config: dict):
        self.args = args
        self.config = config

    def __getitem__(self, key: str):
        v = getattr(self.args, key, None)
        if v is not None:
            return v
        if key in self.config:
            return self.config[key]
        return DEFAULTS[key]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectraug",
        description="Deterministic frequency-domain augmentation for 2D/3D medical images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="TOML or JSON config file with default flag values")

    aug = sub.add_parser("augment", help="batch-augment a manifest of images")
    add_common(aug)
    aug.add_argument("--manifest", help="dataset manifest JSON (required)")
    aug.add_argument("--out", help="output directory (required)")
    aug.add_argument("--seed", type=int, help="base seed for the run (default: 0)")
    aug.add_argument("--copies", type=int, help="augmented copies per entry (default: 1)")
    aug.add_argument("--alpha", type=float, help="overall perturbation amplitude (default: 3.0)")
    aug.add_argument("--beta", type=float, help="baseline perturbation floor (default: 0.25)")
    aug.add_argument("--gamma", type=float, help="frequency growth exponent (default: 2.0)")
    aug.add_argument("--rms-regions", dest="rms_regions", type=int,
                     help="number of shuffle regions (default: 4)")
    aug.add_argument("--rms-min-frac", dest="rms_min_frac", type=float,
                     help="min region side as a fraction of each axis (default: 0.0625)")
    aug.add_argument("--rms-max-frac", dest="rms_max_frac", type=float,
                     help="max region side as a fraction of each axis (default: 0.25)")
    aug.add_argument("--normalize", choices=NORMALIZE_MODES,
                     help="intensity normalization before augmentation (default: minmax)")
    aug.add_argument("--workers", type=int,
                     help=f"worker threads (default: ${WORKERS_ENV} or 1)")
    aug.add_argument("--dry-run", action="store_true",
                     help="validate the manifest without writing outputs")

    st = sub.add_parser("stats", help="per-band amplitude statistics across datasets")
    add_common(st)
    st.add_argument("--manifest", action="append",
                    help="dataset manifest JSON; repeat for cross-domain comparison")
    st.add_argument("--out", help="write the report JSON here (default: stdout)")
    st.add_argument("--band-split", dest="band_split", action="append", type=float,
                    help="radial boundary in (0,1); repeatable (default: 0.25)")
    st.add_argument("--log-amplitude", dest="log_amplitude", action="store_true",
                    default=None, help="use log(1+A) before statistics")
    st.add_argument("--normalize", choices=NORMALIZE_MODES, default="none",
                    help="intensity normalization before analysis (default: none)")

    ins = sub.add_parser("inspect", help="dump file info or sigma values")
    add_common(ins)
    ins.add_argument("path", nargs="?", help="PNG or NIfTI file to inspect")
    ins.add_argument("--bands", action="store_true",
                     help="include a per-band amplitude summary")
    ins.add_argument("--band-split", dest="band_split", action="append", type=float,
                     help="radial boundary in (0,1); repeatable (default: 0.25)")
    ins.add_argument("--sigma-at", dest="sigma_at", action="append", type=float,
                     help="print the perturbation std dev at this normalized radius")
    ins.add_argument("--alpha", type=float, help="overall perturbation amplitude (default: 3.0)")
    ins.add_argument("--beta", type=float, help="baseline perturbation floor (default: 0.25)")
    ins.add_argument("--gamma", type=float, help="frequency growth exponent (default: 2.0)")
    ins.add_argument("--json", action="store_true", help="emit JSON instead of text")
    return parser


def _band_spec(cfg: _Layered, parser: argparse.ArgumentParser) -> BandSpec:
    splits = cfg["band_split"]
    if not isinstance(splits, (list, tuple)):
        splits = [splits]
    for s in splits:
        if not (0.0 < float(s) < 1.0):
            parser.error(f"--band-split must be in (0, 1), got {s}")
    return BandSpec(boundaries=tuple(sorted(float(s) for s in splits)),
                    log_amplitude=bool(cfg["log_amplitude"]))


def _cmd_augment(args, parser) -> int:
    config = _load_config(args.config)
    cfg = _Layered(args, config)
    manifest_path = cfg["manifest"] if (args.manifest or "manifest" in config) else None
    out_path = cfg["out"] if (args.out or "out" in config) else None
    if not manifest_path:
        parser.error("augment requires --manifest")
    if not out_path:
        parser.error("augment requires --out")

    workers = cfg["workers"]
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))

    manifest = load_manifest(manifest_path)
    rass_params = RassParams(
        alpha=float(cfg["alpha"]), beta=float(cfg["beta"]),
        gamma=float(cfg["gamma"]), seed=int(cfg["seed"]),
    )
    rms_params = default_params_for_shape(
        manifest.target_shape,
        num_regions=int(cfg["rms_regions"]),
        min_frac=float(cfg["rms_min_frac"]),
        max_frac=float(cfg["rms_max_frac"]),
    )
    summary = run_batch(
        manifest, rass_params, rms_params, int(cfg["copies"]), out_path,
        workers=int(workers), normalize_mode=cfg["normalize"],
        dry_run=bool(args.dry_run),
    )
    counts = summary["counts"]
    print(
        f"augment: {counts['succeeded']}/{counts['entries']} entries ok, "
        f"{counts['outputs']} outputs -> {out_path}"
    )
    for entry in summary["entries"]:
        if entry["status"] != "ok":
            print(f"  FAILED {entry['id']}: {entry['error']}", file=sys.stderr)
    return 0 if counts["failed"] == 0 else 1


def _cmd_stats(args, parser) -> int:
    config = _load_config(args.config)
    cfg = _Layered(args, config)
    manifests = args.manifest or config.get("manifest")
    if not manifests:
        parser.error("stats requires at least one --manifest")
    if isinstance(manifests, str):
        manifests = [manifests]
    spec = _band_spec(cfg, parser)

    corpora = {}
    for mpath in manifests:
        manifest = load_manifest(mpath)
        volumes = []
        for entry in manifest.entries:
            record = load_volume(entry.image_path, manifest.modality, id=entry.id)
            record = resample(record, manifest.target_shape)
            for c, ch in enumerate(record.channels):
                vol = normalize(ch, args.normalize)
                if len(record.channels) > 1:
                    vol = Volume(data=vol.data, spacing=vol.spacing,
                                 id=f"{entry.id}:c{c}")
                volumes.append(vol)
        corpora[Path(mpath).stem] = volumes
    report = report_for_corpora(corpora, spec)
    text = json.dumps(report, indent=2) + "\n"
    out_path = cfg["out"] if (args.out or "out" in config) else None
    if out_path:
        Path(out_path).write_text(text)
        print(f"stats: report written to {out_path}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_inspect(args, parser) -> int:
    config = _load_config(args.config)
    cfg = _Layered(args, config)
    if args.path is None and not args.sigma_at:
        parser.error("inspect needs a file path or --sigma-at")

    out: dict = {}
    if args.sigma_at:
        params = RassParams(
            alpha=float(cfg["alpha"]), beta=float(cfg["beta"]),
            gamma=float(cfg["gamma"]), seed=0,
        )
        out["sigma"] = [
            {"radius": r, "value": sigma_value(float(r), params)}
            for r in args.sigma_at
        ]
    if args.path is not None:
        modality = "2d" if args.path.lower().endswith(".png") else "3d"
        record = load_volume(args.path, modality)
        out["file"] = {
            "path": args.path,
            "shape": list(record.spatial_shape),
            "channels": len(record.channels),
            "min": float(min(ch.data.min() for ch in record.channels)),
            "max": float(max(ch.data.max() for ch in record.channels)),
        }
        if args.bands:
            spec = _band_spec(cfg, parser)
            report = report_for_corpora(
                {"inspect": list(record.channels)}, spec
            )
            out["bands"] = report["datasets"][0]["bands"]

    if args.json:
        print(json.dumps(out, indent=2))
        return 0
    for item in out.get("sigma", []):
        print(f"sigma(r={item['radius']:g}) = {item['value']:g}")
    if "file" in out:
        f = out["file"]
        print(f"{f['path']}: shape ({', '.join(str(n) for n in f['shape'])}), "
              f"{f['channels']} channel(s), intensity [{f['min']:g}, {f['max']:g}]")
    for band in out.get("bands", []):
        print(f"band {band['index']} [{band['lo']:.3f}, {band['hi']:.3f}): "
              f"mean {band['mean']:.6g}, variance {band['variance']:.6g}, "
              f"count {band['count']}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "augment":
            return _cmd_augment(args, parser)
        if args.command == "stats":
            return _cmd_stats(args, parser)
        return _cmd_inspect(args, parser)
    except SpectraugError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
