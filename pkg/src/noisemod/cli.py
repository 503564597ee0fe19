"""Command-line front end.

Subcommands:

* ``analyze``  -- analytic fading-averaged BEP over a delta grid (no simulation)
* ``simulate`` -- Monte Carlo sweep, CSV output plus a reproducibility manifest
* ``selftest`` -- invariant checks, pass/fail table

Configuration comes from built-in presets (``fig2``, ``fig3``), an optional
flat key-value config file with one section per preset, and CLI flags; flags
override file values.  Exit codes: 0 success, 1 config error, 2 runtime
failure, 3 selftest failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analysis import (
    average_bep,
    pair_distribution,
    q_function,
    stage_probs,
    transition_kernel,
)
from .detector import lrt_threshold
from .modem import VALID_PAIRS, LinkConfig
from .montecarlo import (
    BerRecord,
    EnergyNorm,
    SweepSpec,
    run_binary_point,
    run_sweep,
)

__all__ = ["main", "ConfigError", "CSV_COLUMNS", "PRESETS"]

CSV_COLUMNS = (
    "scheme",
    "N",
    "mu",
    "alpha",
    "delta_db",
    "analytic_bep",
    "simulated_ber",
    "bit_errors",
    "total_bits",
    "ci_halfwidth",
    "seed",
    "error",
)

DEFAULT_DELTA_GRID = tuple(float(d) for d in range(0, 31, 2))
DEFAULT_TRIALS = 1_000_000
DEFAULT_SEED = 1


class ConfigError(Exception):
    """Configuration syntax or range error; maps to exit code 1."""


@dataclass(frozen=True)
class CurveSpec:
    """One curve of a run plan: a scheme at fixed scalars, swept over delta."""

    scheme: str          # "ternary" or "binary"
    n: int
    mu: float            # for binary curves: the energy-reference mean
    alpha: float = 10.0
    sigma_l2: float = 1.0


# Built-in presets reproducing the two reference figures.
PRESETS: dict[str, tuple[CurveSpec, ...]] = {
    "fig2": (
        CurveSpec("ternary", n=200, mu=0.57),
        CurveSpec("ternary", n=200, mu=0.77),
        CurveSpec("ternary", n=200, mu=1.0),
        CurveSpec("binary", n=400, mu=1.0),
    ),
    "fig3": (
        CurveSpec("ternary", n=100, mu=1.0),
        CurveSpec("ternary", n=200, mu=1.0),
        CurveSpec("ternary", n=400, mu=1.0),
        CurveSpec("binary", n=100, mu=1.0),
        CurveSpec("binary", n=200, mu=1.0),
        CurveSpec("binary", n=400, mu=1.0),
    ),
}

_CONFIG_KEYS = ("n", "mu", "sigma_l2", "alpha", "delta_db", "trials", "seed", "baseline", "norm")


def parse_config(path: str) -> dict[str, dict[str, tuple[str, int]]]:
    """Parse a flat key-value config file into {section: {key: (value, line)}}."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config file: {exc}") from exc
    sections: dict[str, dict[str, tuple[str, int]]] = {"default": {}}
    current = "default"
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("#") or text.startswith(";"):
            continue
        if text.startswith("[") and text.endswith("]"):
            current = text[1:-1].strip()
            if not current:
                raise ConfigError(f"{path}:{lineno}: empty section name")
            sections.setdefault(current, {})
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {text!r}")
        key, value = (part.strip() for part in text.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(
                f"{path}:{lineno}: unknown key {key!r} (known: {', '.join(_CONFIG_KEYS)})"
            )
        sections[current][key] = (value, lineno)
    return sections


def parse_delta_grid(text: str) -> tuple[float, ...]:
    """Parse '0,2,4' or 'start:stop:step' (stop inclusive) into a delta grid."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ValueError("expected start:stop:step")
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ValueError("need step > 0 and stop >= start")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return tuple(start + i * step for i in range(count))
        return tuple(float(p) for p in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"invalid delta grid {text!r}: {exc}") from exc


def _convert(key: str, raw: str, where: str):
    try:
        if key == "n":
            return int(raw)
        if key in ("mu", "sigma_l2", "alpha"):
            return float(raw)
        if key == "delta_db":
            return parse_delta_grid(raw)
        if key in ("trials", "seed"):
            return int(raw)
        if key == "baseline":
            if raw.lower() in ("true", "yes", "1", "on"):
                return True
            if raw.lower() in ("false", "no", "0", "off"):
                return False
            raise ValueError("expected true/false")
        if key == "norm":
            return EnergyNorm(raw)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{where}: bad value for {key}: {exc}") from exc
    raise ConfigError(f"{where}: unknown key {key!r}")


@dataclass(frozen=True)
class RunSettings:
    curves: tuple[CurveSpec, ...]
    deltas: tuple[float, ...]
    trials: int
    seed: int
    norm: EnergyNorm
    preset: str          # "custom" for non-preset runs


def resolve_settings(args: argparse.Namespace) -> RunSettings:
    """Merge defaults, config file and CLI flags into a run plan."""
    values: dict[str, object] = {
        "n": 200,
        "mu": 1.0,
        "sigma_l2": 1.0,
        "alpha": 10.0,
        "delta_db": DEFAULT_DELTA_GRID,
        "trials": DEFAULT_TRIALS,
        "seed": DEFAULT_SEED,
        "baseline": False,
        "norm": EnergyNorm.EQUAL_PAIR_ENERGY,
    }
    if args.config:
        sections = parse_config(args.config)
        section = args.section or "default"
        if section not in sections:
            raise ConfigError(f"{args.config}: no section [{section}]")
        for key, (raw, lineno) in sections[section].items():
            values[key] = _convert(key, raw, f"{args.config}:{lineno}")

    preset = getattr(args, "preset", None)
    if preset is not None and preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r} (available: {', '.join(PRESETS)})")

    flag_map = {
        "n": "n",
        "mu": "mu",
        "sigma_l2": "sigma_l2",
        "alpha": "alpha",
        "trials": "trials",
        "seed": "seed",
        "baseline": "baseline",
        "norm": "norm",
    }
    for attr, key in flag_map.items():
        flag = getattr(args, attr, None)
        if flag is not None:
            if preset is not None and key in ("n", "mu", "sigma_l2", "alpha", "baseline"):
                raise ConfigError(f"--{attr.replace('_', '-')} cannot override preset {preset!r}")
            values[key] = EnergyNorm(flag) if key == "norm" else flag
    if getattr(args, "delta_db", None) is not None:
        values["delta_db"] = parse_delta_grid(args.delta_db)

    return _finish_settings(values, preset)


def _finish_settings(values: dict, preset: str | None) -> RunSettings:
    deltas = tuple(float(d) for d in values["delta_db"])
    if len(deltas) == 0 or any(b <= a for a, b in zip(deltas, deltas[1:])):
        raise ConfigError("delta grid must be non-empty and strictly increasing")
    if preset is not None:
        curves = PRESETS[preset]
    else:
        curves = (
            CurveSpec(
                "ternary",
                n=int(values["n"]),
                mu=float(values["mu"]),
                alpha=float(values["alpha"]),
                sigma_l2=float(values["sigma_l2"]),
            ),
        )
        if values["baseline"]:
            curves = curves + (
                CurveSpec(
                    "binary",
                    n=int(values["n"]),
                    mu=float(values["mu"]),
                    alpha=float(values["alpha"]),
                    sigma_l2=float(values["sigma_l2"]),
                ),
            )
    # Range checks happen here, before any computation.
    for curve in curves:
        try:
            _curve_config(curve, deltas[0])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return RunSettings(
        curves=curves,
        deltas=deltas,
        trials=int(values["trials"]),
        seed=int(values["seed"]),
        norm=values["norm"],
        preset=preset or "custom",
    )


def _curve_config(curve: CurveSpec, delta_db: float) -> LinkConfig:
    return LinkConfig(
        n=curve.n,
        mu=curve.mu,
        sigma_l2=curve.sigma_l2,
        alpha=curve.alpha,
        delta_db=delta_db,
    )


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.12g}"
    return str(value)


def write_csv(records: list[BerRecord], fh) -> None:
    """Write records in the stable CSV schema (12 significant digits, LF endings)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(
            [
                r.scheme,
                r.n,
                _format_value(r.mu),
                _format_value(r.alpha),
                _format_value(r.delta_db),
                _format_value(r.analytic_bep),
                _format_value(r.simulated_ber),
                r.bit_errors if r.total_bits else "",
                r.total_bits if r.total_bits else "",
                _format_value(r.ci_halfwidth),
                r.seed,
                r.error,
            ]
        )


def write_manifest(path: str, entries: list[tuple[str, object]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in entries:
            fh.write(f"{key} = {value}\n")


def _curve_seed(seed: int, curve_index: int) -> int:
    state = np.random.SeedSequence((seed, curve_index)).generate_state(1, dtype=np.uint64)
    return int(state[0] >> np.uint64(1))


def _analyze_records(settings: RunSettings) -> list[BerRecord]:
    records = []
    for curve in settings.curves:
        if curve.scheme != "ternary":
            continue  # no analytic expression for the baseline
        for delta in settings.deltas:
            cfg = _curve_config(curve, delta)
            records.append(
                BerRecord(
                    scheme="ternary",
                    n=cfg.n,
                    mu=cfg.mu,
                    alpha=cfg.alpha,
                    delta_db=delta,
                    analytic_bep=average_bep(cfg),
                    simulated_ber=float("nan"),
                    bit_errors=0,
                    total_bits=0,
                    ci_halfwidth=0.0,
                    seed=0,
                )
            )
    return records


def _simulate_records(settings: RunSettings, progress) -> list[BerRecord]:
    records: list[BerRecord] = []
    for index, curve in enumerate(settings.curves):
        seed = _curve_seed(settings.seed, index)
        base = _curve_config(curve, settings.deltas[0])
        if curve.scheme == "ternary":
            spec = SweepSpec(
                base=base,
                axis="delta_db",
                values=settings.deltas,
                trials=settings.trials,
                seed=seed,
                baseline=False,
                norm=settings.norm,
            )
            label = f"ternary n={curve.n} mu={curve.mu}"
            records.extend(
                run_sweep(spec, progress=lambda msg, lab=label: progress(f"{lab} {msg}"))
            )
        else:
            point_seeds = np.random.SeedSequence((seed, 1)).generate_state(
                len(settings.deltas), dtype=np.uint64
            )
            for j, delta in enumerate(settings.deltas):
                progress(f"binary n={curve.n} delta_db={delta}")
                cfg = _curve_config(curve, delta)
                records.append(
                    run_binary_point(
                        cfg,
                        settings.trials,
                        int(point_seeds[j] >> np.uint64(1)),
                        norm=settings.norm,
                    )
                )
    return records


def cmd_analyze(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)
    records = _analyze_records(settings)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(records, fh)
    else:
        write_csv(records, sys.stdout)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)

    def progress(message: str) -> None:
        print(f"[noisemod] {message}", file=sys.stderr, flush=True)

    records = _simulate_records(settings, progress)
    out = args.out or "results.csv"
    with open(out, "w", encoding="utf-8", newline="") as fh:
        write_csv(records, fh)
    manifest = args.manifest or out + ".manifest.txt"
    entries: list[tuple[str, object]] = [
        ("tool", "noisemod"),
        ("version", __version__),
        ("command", "simulate"),
        ("preset", settings.preset),
        ("seed", settings.seed),
        ("trials", settings.trials),
        ("delta_db", ",".join(_format_value(d) for d in settings.deltas)),
        ("norm", settings.norm.value),
        ("csv", out),
        ("timestamp", time.strftime("%Y-%m-%dT%H:%M:%S%z")),
    ]
    for i, curve in enumerate(settings.curves):
        entries.append(
            (
                f"curve.{i}",
                f"scheme={curve.scheme} n={curve.n} mu={curve.mu} "
                f"alpha={curve.alpha} sigma_l2={curve.sigma_l2}",
            )
        )
    write_manifest(manifest, entries)
    failed = [r for r in records if r.error]
    if failed:
        for r in failed:
            print(f"[noisemod] point failed: {r.scheme} delta={r.delta_db}: {r.error}",
                  file=sys.stderr)
        return 2
    return 0


def _selftest_checks() -> list[tuple[str, bool, str]]:
    checks: list[tuple[str, bool, str]] = []
    cfg = LinkConfig(n=200, mu=1.0, sigma_l2=1.0, alpha=10.0, delta_db=10.0)

    q0 = q_function(0.0)
    checks.append(("q_function_zero", abs(q0 - 0.5) < 1e-12, f"Q(0) = {q0!r}"))
    comp = max(abs(q_function(x) + q_function(-x) - 1.0) for x in (0.3, 1.0, 2.5, 4.0))
    checks.append(("q_function_complement", comp < 1e-12, f"max |Q(x)+Q(-x)-1| = {comp:.3g}"))
    qd = abs(q_function(1.2815515655) - 0.1)
    checks.append(("q_function_decile", qd < 1e-9, f"|Q(1.2815515655)-0.1| = {qd:.3g}"))

    grid = np.logspace(-2, 1, 25)  # |h| over |h|^2 in [1e-4, 1e2]
    row_dev = 0.0
    mass_dev = 0.0
    keys_ok = True
    for habs in grid:
        kern = transition_kernel(stage_probs(complex(habs), cfg))
        row_dev = max(row_dev, float(np.max(np.abs(kern.matrix.sum(axis=1) - 1.0))))
        for pair in VALID_PAIRS:
            dist = pair_distribution(pair, complex(habs), cfg)
            mass_dev = max(mass_dev, abs(sum(dist.values()) - 1.0))
            keys_ok = keys_ok and set(dist) == set(VALID_PAIRS)
    checks.append(("kernel_row_sums", row_dev < 1e-12, f"max row-sum deviation = {row_dev:.3g}"))
    checks.append(("pair_mass_conservation", mass_dev < 1e-12, f"max deviation = {mass_dev:.3g}"))
    checks.append(("pair_keys_valid", keys_ok, "(S,S) never appears; all 8 valid pairs present"))

    tau_dev = max(
        abs(lrt_threshold(complex(habs), cfg) - cfg.sigma_w2) for habs in (0.0, 1e-9, 1e-7)
    )
    checks.append(("lrt_threshold_continuity", tau_dev < 1e-9, f"max |tau - sigma_w2| = {tau_dev:.3g}"))

    b1 = average_bep(cfg, tol=1e-10)
    b2 = average_bep(cfg, tol=5e-11)
    checks.append(("quadrature_stability", abs(b1 - b2) < 1e-8, f"|delta P_b| = {abs(b1 - b2):.3g}"))

    beps = [average_bep(dataclasses.replace(cfg, delta_db=float(d))) for d in range(0, 31, 2)]
    mono = all(b > a for a, b in zip(beps[1:], beps))
    checks.append(("analytic_monotone_in_delta", mono, "P_b decreasing over 0..30 dB grid"))
    return checks


def cmd_selftest(_args: argparse.Namespace) -> int:
    checks = _selftest_checks()
    width = max(len(name) for name, _, _ in checks)
    failures = 0
    for name, ok, detail in checks:
        status = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        print(f"{status}  {name:<{width}}  {detail}")
    print(f"{len(checks) - failures}/{len(checks)} checks passed")
    return 0 if failures == 0 else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisemod",
        description="Ternary noise-state modulation link simulator",
    )
    parser.add_argument("--version", action="version", version=f"noisemod {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, simulation: bool) -> None:
        p.add_argument("--config", help="flat key-value config file")
        p.add_argument("--section", help="config file section (default: 'default')")
        p.add_argument("--preset", choices=sorted(PRESETS), help="built-in run plan")
        p.add_argument("--n", type=int, help="samples per block")
        p.add_argument("--mu", type=float, help="reference mean")
        p.add_argument("--sigma-l2", dest="sigma_l2", type=float, help="low-state variance")
        p.add_argument("--alpha", type=float, help="high/low variance ratio")
        p.add_argument("--delta-db", dest="delta_db",
                       help="delta grid: '0,2,4' or 'start:stop:step'")
        p.add_argument("--out", help="output CSV path" + ("" if simulation else " (default: stdout)"))
        if simulation:
            p.add_argument("--trials", type=int, help=f"frames per point (default {DEFAULT_TRIALS})")
            p.add_argument("--seed", type=int, help=f"base seed (default {DEFAULT_SEED})")
            p.add_argument("--baseline", action="store_true", default=None,
                           help="also simulate the binary baseline at the same n")
            p.add_argument("--norm", choices=[n.value for n in EnergyNorm],
                           help="baseline energy normalization")
            p.add_argument("--manifest", help="manifest path (default: <out>.manifest.txt)")

    p_analyze = sub.add_parser("analyze", help="analytic BEP over the delta grid")
    add_common(p_analyze, simulation=False)
    p_analyze.set_defaults(func=cmd_analyze)

    p_sim = sub.add_parser("simulate", help="Monte Carlo sweep with CSV + manifest")
    add_common(p_sim, simulation=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_self = sub.add_parser("selftest", help="run invariant checks")
    p_self.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"noisemod: config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"noisemod: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
