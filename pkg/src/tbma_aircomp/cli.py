"""Command line entry point, run configuration and curve serialization.

Config files are flat YAML mappings whose keys are the RunConfig field names::

    K: 1000
    N: 64
    trials: 100000
    snr_start: 0
    snr_stop: 30
    snr_step: 1
    schemes: da,tbma_naive,tbma_lattice

Every key can be overridden with the matching long flag (``--base-seed`` for
``base_seed``); flags win over the file.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np
import yaml

from .experiment import (
    CurvePoint,
    NoCrossoverError,
    SweepCurve,
    SweepPointError,
    WORKERS_ENV,
    SweepSpec,
    crossover_search,
    default_workers,
    run_sweep,
    theory_curve,
    trial_dump,
)
from .model import ConfigError, DataDistribution, DistributionKind, DomainError
from .schemes import Scheme
from .theory import LatticeVariant

CSV_COLUMNS = (
    "snr_db",
    "scheme",
    "mse_empirical",
    "ci95_low",
    "ci95_high",
    "mse_theory",
    "trials_used",
    "error_events",
)
SNR_LIMITS_DB = (-10.0, 60.0)


class OutputError(OSError):
    def __init__(self, path, reason):
        super().__init__(f"cannot write {path}: {reason}")
        self.path = path


def _as_int(value):
    if isinstance(value, bool):
        raise TypeError("expected an integer")
    if isinstance(value, float):
        if not value.is_integer():
            raise TypeError("expected an integer")
        return int(value)
    return int(value)


def _as_float(value):
    if isinstance(value, bool):
        raise TypeError("expected a number")
    return float(value)


def _as_bool(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("true", "yes", "1", "false", "no", "0"):
        return value.lower() in ("true", "yes", "1")
    raise TypeError("expected a boolean")


def _as_list(item):
    def convert(value):
        if isinstance(value, str):
            value = [v for v in value.replace(",", " ").split()]
        elif not isinstance(value, (list, tuple)):
            value = [value]
        return tuple(item(v) for v in value)

    return convert


def _as_str(value):
    if not isinstance(value, str):
        raise TypeError("expected a string")
    return value


@dataclass(frozen=True)
class RunConfig:
    K: int = 1000
    N: int = 64
    T: float = 1.0
    N0: float = 1.0
    trials: int = 100_000
    base_seed: int = 0
    schemes: tuple = tuple(s.value for s in Scheme)
    distribution: str = "uniform"
    # gaussian defaults are centred on the alphabet
    dist_mean: Optional[float] = None
    dist_std: Optional[float] = None
    dist_p: float = 0.1
    snr: Optional[tuple] = None
    snr_start: float = 0.0
    snr_stop: float = 30.0
    snr_step: float = 1.0
    freeze_data: bool = False
    max_trials: int = 10_000_000
    min_error_events: int = 50
    lattice_variant: str = LatticeVariant.EXACT_SUM.value
    chunk_size: int = 4096
    workers: Optional[int] = None
    output: Optional[str] = None
    format: str = "csv"
    theory_only: bool = False

    def snr_points(self) -> tuple:
        if self.snr is not None:
            return tuple(self.snr)
        count = int(math.floor((self.snr_stop - self.snr_start) / self.snr_step + 1e-9)) + 1
        return tuple(float(self.snr_start + i * self.snr_step) for i in range(count))

    def data_distribution(self) -> DataDistribution:
        kind = DistributionKind(self.distribution)
        if kind is DistributionKind.GAUSSIAN:
            mean = (self.N - 1) / 2 if self.dist_mean is None else self.dist_mean
            std = self.N / 6 if self.dist_std is None else self.dist_std
            return DataDistribution.gaussian(mean, std)
        if kind is DistributionKind.GEOMETRIC:
            return DataDistribution.geometric(self.dist_p)
        return DataDistribution.uniform()

    def to_spec(self) -> SweepSpec:
        return SweepSpec(
            K=self.K,
            N=self.N,
            snr_points_db=self.snr_points(),
            trials=self.trials,
            base_seed=self.base_seed,
            schemes=tuple(Scheme(s) for s in self.schemes),
            distribution=self.data_distribution(),
            T=self.T,
            N0=self.N0,
            freeze_data=self.freeze_data,
            max_trials=self.max_trials,
            min_error_events=self.min_error_events,
            lattice_variant=LatticeVariant(self.lattice_variant),
            chunk_size=self.chunk_size,
        )

    def as_header(self) -> dict:
        out = dataclasses.asdict(self)
        out["snr"] = list(self.snr_points())
        out["schemes"] = list(self.schemes)
        out["workers"] = self.workers if self.workers is not None else default_workers()
        return out


_CONVERTERS = {
    "K": _as_int,
    "N": _as_int,
    "T": _as_float,
    "N0": _as_float,
    "trials": _as_int,
    "base_seed": _as_int,
    "schemes": _as_list(_as_str),
    "distribution": _as_str,
    "dist_mean": _as_float,
    "dist_std": _as_float,
    "dist_p": _as_float,
    "snr": _as_list(_as_float),
    "snr_start": _as_float,
    "snr_stop": _as_float,
    "snr_step": _as_float,
    "freeze_data": _as_bool,
    "max_trials": _as_int,
    "min_error_events": _as_int,
    "lattice_variant": _as_str,
    "chunk_size": _as_int,
    "workers": _as_int,
    "output": _as_str,
    "format": _as_str,
    "theory_only": _as_bool,
}


def _check(cfg: RunConfig):
    def fail(name, why):
        raise ConfigError(f"{name}: {why}")

    if cfg.K < 1:
        fail("K", "must be >= 1")
    if cfg.N < 2:
        fail("N", "must be >= 2")
    for name in ("T", "N0", "snr_step"):
        if not getattr(cfg, name) > 0:
            fail(name, "must be positive")
    if cfg.trials < 100:
        fail("trials", "must be >= 100")
    if cfg.max_trials < cfg.trials:
        fail("max_trials", "must be >= trials")
    if cfg.chunk_size < 1:
        fail("chunk_size", "must be >= 1")
    if cfg.workers is not None and cfg.workers < 1:
        fail("workers", "must be >= 1")
    if not cfg.schemes:
        fail("schemes", "must name at least one scheme")
    for s in cfg.schemes:
        if s not in {m.value for m in Scheme}:
            fail("schemes", f"unknown scheme {s!r}")
    if cfg.distribution not in {d.value for d in DistributionKind}:
        fail("distribution", f"unknown distribution {cfg.distribution!r}")
    if cfg.lattice_variant not in {v.value for v in LatticeVariant}:
        fail("lattice_variant", f"unknown variant {cfg.lattice_variant!r}")
    if cfg.format not in ("csv", "json"):
        fail("format", "must be csv or json")
    points = cfg.snr_points()
    if not points:
        fail("snr", "no SNR points")
    lo, hi = SNR_LIMITS_DB
    if any(not lo <= p <= hi for p in points):
        fail("snr", f"values must lie in [{lo}, {hi}] dB")
    if any(b <= a for a, b in zip(points, points[1:])):
        fail("snr", "values must be strictly ascending")
    try:
        cfg.data_distribution()
    except ConfigError as exc:
        fail("distribution", str(exc))


def load_config_file(path) -> dict:
    with open(path) as fh:
        values = yaml.safe_load(fh) or {}
    if not isinstance(values, dict):
        raise ConfigError(f"{path}: expected a flat key/value mapping")
    return values


def parse_config(file_values: Optional[dict] = None, flags: Optional[dict] = None) -> RunConfig:
    """Merge file values and flag overrides over the defaults, then validate."""
    merged = {}
    for source in (file_values or {}, flags or {}):
        for key, value in source.items():
            if key not in _CONVERTERS:
                raise ConfigError(f"{key}: unknown key")
            if value is None:
                merged[key] = None
                continue
            try:
                merged[key] = _CONVERTERS[key](value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key}: invalid value {value!r} ({exc})") from None
    cfg = RunConfig(**merged)
    _check(cfg)
    return cfg


# -- serialization ---------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def _record(p: CurvePoint) -> dict:
    return {
        "snr_db": p.snr_db,
        "scheme": p.scheme.value,
        "mse_empirical": p.mse_empirical,
        "ci95_low": p.ci95_low,
        "ci95_high": p.ci95_high,
        "mse_theory": p.mse_theory,
        "trials_used": p.trials_used,
        "error_events": p.error_events,
    }


def _ordered(curve: SweepCurve):
    return sorted(curve.points, key=lambda p: (p.scheme.index, p.snr_db))


def format_curves(curve: SweepCurve, fmt: str = "csv", header: Optional[dict] = None) -> str:
    records = [_record(p) for p in _ordered(curve)]
    if fmt == "json":
        return json.dumps({"config": header or {}, "records": records}, indent=1) + "\n"
    buf = io.StringIO()
    if header is not None:
        buf.write("# config: " + json.dumps(header, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([r["scheme"] if c == "scheme" else _fmt(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def emit_curves(curve: SweepCurve, fmt: str = "csv", path=None, header: Optional[dict] = None):
    """Write one record per (scheme, SNR) in scheme order, then ascending SNR."""
    text = format_curves(curve, fmt, header)
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc


def _point(r: dict) -> CurvePoint:
    return CurvePoint(
        snr_db=float(r["snr_db"]),
        scheme=Scheme(r["scheme"]),
        mse_empirical=float(r["mse_empirical"]),
        ci95_low=float(r["ci95_low"]),
        ci95_high=float(r["ci95_high"]),
        mse_theory=float(r["mse_theory"]),
        trials_used=int(r["trials_used"]),
        error_events=int(r["error_events"]),
    )


def read_curves(path):
    """Inverse of ``emit_curves``: returns (points, header)."""
    with open(path, newline="") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        return [_point(r) for r in doc["records"]], doc.get("config", {})
    header = {}
    lines = []
    for line in text.splitlines():
        if line.startswith("# config: "):
            header = json.loads(line[len("# config: "):])
        elif not line.startswith("#"):
            lines.append(line)
    return [_point(r) for r in csv.DictReader(lines)], header


# -- command line ----------------------------------------------------------------


def _add_run_flags(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="flat YAML file of run keys")
    p.add_argument("--K", type=int, default=S, help="number of devices (1000)")
    p.add_argument("--N", type=int, default=S, help="number of resources (64)")
    p.add_argument("--T", type=float, default=S)
    p.add_argument("--N0", type=float, default=S)
    p.add_argument("--trials", type=int, default=S, help="trials per point (100000)")
    p.add_argument("--base-seed", type=int, default=S)
    p.add_argument("--schemes", default=S, help="comma separated: da,tbma_naive,tbma_lattice")
    p.add_argument("--distribution", default=S, choices=[d.value for d in DistributionKind])
    p.add_argument("--dist-mean", type=float, default=S)
    p.add_argument("--dist-std", type=float, default=S)
    p.add_argument("--dist-p", type=float, default=S)
    p.add_argument("--snr", type=float, nargs="+", default=S, help="explicit E/N0 points in dB")
    p.add_argument("--snr-start", type=float, default=S)
    p.add_argument("--snr-stop", type=float, default=S)
    p.add_argument("--snr-step", type=float, default=S)
    p.add_argument("--freeze-data", action="store_const", const=True, default=S)
    p.add_argument("--max-trials", type=int, default=S)
    p.add_argument("--min-error-events", type=int, default=S)
    p.add_argument("--lattice-variant", default=S, choices=[v.value for v in LatticeVariant])
    p.add_argument("--chunk-size", type=int, default=S)
    p.add_argument("--workers", type=int, default=S, help=f"worker threads (default ${WORKERS_ENV} or 1)")
    p.add_argument("--output", "-o", default=S)
    p.add_argument("--format", default=S, choices=["csv", "json"])
    p.add_argument("--theory-only", action="store_const", const=True, default=S)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tbma-aircomp", description="DA vs TBMA over-the-air mean estimation")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("sweep", "Monte Carlo and theory MSE curves"),
        ("theory", "closed-form MSE curves only"),
        ("crossover", "SNR where two theory curves cross"),
        ("trial", "dump one TBMA trial"),
    ):
        p = sub.add_parser(name, help=text)
        _add_run_flags(p)
        if name == "crossover":
            p.add_argument("--scheme-a", default="da", choices=[s.value for s in Scheme])
            p.add_argument("--scheme-b", default="tbma_lattice", choices=[s.value for s in Scheme])
    return parser


def _progress(point: CurvePoint):
    print(
        f"{point.scheme.value:>12} {point.snr_db:6.2f} dB  mse={point.mse_empirical:.4e}  "
        f"theory={point.mse_theory:.4e}  trials={point.trials_used}",
        file=sys.stderr,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    extras = {k: args.pop(k) for k in ("scheme_a", "scheme_b") if k in args}
    try:
        file_values = load_config_file(args.pop("config")) if "config" in args else {}
        cfg = parse_config(file_values, args)
        spec = cfg.to_spec()
        header = cfg.as_header()
        if command == "crossover":
            a, b = Scheme(extras["scheme_a"]), Scheme(extras["scheme_b"])
            snr = crossover_search(spec, a, b)
            print(f"crossover {a.value} vs {b.value}: {snr:.2f} dB")
        elif command == "trial":
            dump = trial_dump(spec.cfg_at(spec.snr_points_db[0]), spec.distribution, cfg.base_seed)
            dump["snr_db"] = spec.snr_points_db[0]
            text = json.dumps({"config": header, "trial": dump}, indent=1) + "\n"
            if cfg.output:
                with open(cfg.output, "w") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
        else:
            if command == "theory" or cfg.theory_only:
                curve = theory_curve(spec)
            else:
                curve = run_sweep(spec, workers=cfg.workers, progress=_progress)
            emit_curves(curve, cfg.format, cfg.output, header)
    except (ConfigError, DomainError, NoCrossoverError, SweepPointError, OutputError, OSError) as exc:
        print(f"tbma-aircomp {command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
