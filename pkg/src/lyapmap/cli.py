"""Batch CLI: run estimators, oracles and diagnostics on one map.

Subcommands: rep, preimage, oracle, scan, diag, padic.  A JSON config file
may replace flags (flags win).  Exit codes: 0 success, 1 configuration
error, 2 solver-failure rows present in the output, 3 target rejected by
the bad-target scan.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .diagnostics import (bad_target_scan, bezout_overlap_check,
                          potential_convergence_check, przytycki_bound_check)
from .errors import ConfigError, LyapmapError, TargetRejected, UnknownPreset
from .geometry import (COMPLEX, INFINITY, ProjectivePoint, complex_field,
                       padic_field)
from .oracle import closed_form, lyapunov_birkhoff, lyapunov_green
from .padic import good_reduction_test
from .preimage import estimator_preimage
from .periodic import estimator_rep
from .ratmap import build_map, critical_points, preset_map
from .series import EstimateSeries


@dataclass
class RunConfig:
    command: str
    preset: str | None = None
    map_json: str | None = None
    kmax: int = 8
    target: str | None = None
    mode: str = "full"
    seed: int = 0
    precision_bits: int = 53
    prime: int | None = None
    out: str | None = None
    format: str = "csv"
    force: bool = False
    variant: str = "both"        # rep only: plain | strict | both

    def resolved(self) -> dict:
        d = asdict(self)
        d["version"] = __version__
        return d


def _parse_scalar(tok, exact: bool):
    if exact:
        return Fraction(str(tok))
    if isinstance(tok, (list, tuple)):
        return complex(float(tok[0]), float(tok[1]) if len(tok) > 1 else 0.0)
    if isinstance(tok, str):
        return complex(tok.replace("i", "j"))
    return complex(tok)


def _map_from_config(cfg: RunConfig):
    field = padic_field(cfg.prime) if (cfg.command == "padic" and cfg.prime) \
        else complex_field(cfg.precision_bits)
    if cfg.preset:
        return preset_map(cfg.preset, field)
    if not cfg.map_json:
        raise ConfigError("one of --preset / --map is required")
    text = cfg.map_json
    if not text.strip().startswith("{"):
        text = Path(text).read_text()
    try:
        obj = json.loads(text)
        exact = not field.is_archimedean
        num = [_parse_scalar(t, exact) for t in obj["num"]]
        den = [_parse_scalar(t, exact) for t in obj["den"]]
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad --map payload: {exc}") from exc
    return build_map(num, den, field)


def _parse_target(cfg: RunConfig) -> ProjectivePoint:
    if cfg.target is None:
        raise ConfigError("--target is required for this command")
    tok = cfg.target.strip()
    if tok in ("inf", "infinity", "oo"):
        return INFINITY
    try:
        return ProjectivePoint.from_affine(complex(tok.replace("i", "j")))
    except ValueError as exc:
        raise ConfigError(f"bad --target {tok!r}: {exc}") from exc


def _emit_series(series: EstimateSeries, cfg: RunConfig, suffix: str = ""):
    series.metadata["config"] = cfg.resolved()
    series.metadata["version"] = __version__
    if cfg.out:
        stem = Path(cfg.out)
        path = stem if not suffix else stem.with_name(
            stem.stem + "_" + suffix + stem.suffix)
        if cfg.format == "json":
            series.to_json(path)
        else:
            series.to_csv(path)
        print(f"wrote {path}")
    else:
        if cfg.format == "json":
            json.dump(series.to_json_dict(), sys.stdout, indent=2, default=str)
            print()
        else:
            sys.stdout.write(series.to_csv_text())


def _emit_json(obj: dict, cfg: RunConfig):
    obj = {"config": cfg.resolved(), "version": __version__, **obj}
    if cfg.out:
        with open(cfg.out, "w") as fh:
            json.dump(obj, fh, indent=2, default=str)
            fh.write("\n")
        print(f"wrote {cfg.out}")
    else:
        json.dump(obj, sys.stdout, indent=2, default=str)
        print()


def _auto_oracle(cfg: RunConfig, f):
    """Best available reference value for the configured map, or None."""
    if cfg.preset:
        kind = cfg.preset.partition(":")[0]
        if kind in ("power", "chebyshev"):
            return closed_form(cfg.preset)
    if f.is_polynomial and f.degree > 1:
        return lyapunov_green(f)
    return None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_rep(cfg: RunConfig) -> int:
    f = _map_from_config(cfg)
    oracle = _auto_oracle(cfg, f)
    code = 0
    variants = {"plain": [False], "strict": [True],
                "both": [False, True]}.get(cfg.variant)
    if variants is None:
        raise ConfigError(f"bad --variant {cfg.variant!r}")
    for strict in variants:
        series = estimator_rep(f, cfg.kmax, strict=strict)
        if oracle is not None:
            series.attach_oracle(oracle.value, oracle.method,
                                 oracle.uncertainty)
        _emit_series(series, cfg, suffix="strict" if strict else "")
        if series.has_failures:
            code = 2
    return code


def cmd_preimage(cfg: RunConfig) -> int:
    f = _map_from_config(cfg)
    a = _parse_target(cfg)
    mode = cfg.mode
    n_paths = 10_000
    if mode.startswith("mc"):
        if ":" in mode:
            n_paths = int(mode.split(":", 1)[1])
        mode = "mc"
    elif mode != "full":
        raise ConfigError(f"bad --mode {cfg.mode!r} (full or mc:N)")
    series = estimator_preimage(f, a, cfg.kmax, mode=mode, n_paths=n_paths,
                                seed=cfg.seed, force=cfg.force)
    oracle = _auto_oracle(cfg, f)
    if oracle is not None:
        series.attach_oracle(oracle.value, oracle.method, oracle.uncertainty)
    _emit_series(series, cfg)
    return 2 if series.has_failures else 0


def cmd_oracle(cfg: RunConfig) -> int:
    if cfg.prime is not None:
        if not cfg.preset:
            raise ConfigError("--prime needs a --preset closed form")
        res = closed_form(cfg.preset, prime=cfg.prime)
        _emit_json({"oracle": res.to_json_dict()}, cfg)
        return 0
    f = _map_from_config(cfg)
    res = _auto_oracle(cfg, f)
    if res is None:
        if cfg.target is None:
            raise ConfigError(
                "no closed form / escape-rate oracle for this map; "
                "give --target for the Monte Carlo oracle")
        res = lyapunov_birkhoff(f, _parse_target(cfg), seed=cfg.seed,
                                force=cfg.force)
    _emit_json({"oracle": res.to_json_dict()}, cfg)
    return 0


def cmd_scan(cfg: RunConfig) -> int:
    f = _map_from_config(cfg)
    a = _parse_target(cfg)
    report = bad_target_scan(f, a)
    verdict = "FLAGGED" if report.flagged else "clean"
    print(f"target {cfg.target}: {verdict} ({report.reason()})")
    _emit_json({"scan": report.to_json_dict()}, cfg)
    return 0


def cmd_diag(cfg: RunConfig) -> int:
    f = _map_from_config(cfg)
    sep = przytycki_bound_check(f, max(cfg.kmax, 8))
    over = bezout_overlap_check(f, cfg.kmax)
    cs = critical_points(f)
    pot = None
    if cs.points:
        rows, ref = potential_convergence_check(
            f, cs.points[0].point, min(cfg.kmax, 8), seed=cfg.seed)
        pot = {"reference": ref,
               "rows": [{"k": r.k, "value": r.value, "gap": r.gap}
                        for r in rows]}
        print("potential at first critical point: "
              + ", ".join(f"k={r.k}: {r.value:.6f}" for r in rows)
              + f" (reference {ref:.6f})")
    print(f"critical-orbit separation bound: "
          f"{'all pass' if sep.all_ok else 'VIOLATIONS'} "
          f"({len(sep.rows)} rows, sup-estimate {sep.sup_estimate:.4g})")
    print(f"divisor-period overlap bound: "
          f"{'all pass' if over.all_ok else 'VIOLATIONS'} "
          f"({len(over.rows)} rows)")
    _emit_json({"separation": sep.to_json_dict(),
                "overlap": over.to_json_dict(),
                "potential": pot}, cfg)
    return 0 if (sep.all_ok and over.all_ok) else 2


def cmd_padic(cfg: RunConfig) -> int:
    if cfg.prime is None:
        raise ConfigError("--prime is required for the padic command")
    f = _map_from_config(cfg)
    good = good_reduction_test(f, cfg.prime)
    out = {"prime": cfg.prime, "good_reduction": good}
    if cfg.preset and cfg.preset.startswith("power:"):
        res = closed_form(cfg.preset, prime=cfg.prime)
        out["L"] = res.value
        if res.note:
            out["note"] = res.note
        print(f"{cfg.preset} over Q_{cfg.prime}: L = {res.value:.6g}"
              + (f" ({res.note})" if res.note else ""))
    print(f"good reduction at p={cfg.prime}: {good}")
    _emit_json(out, cfg)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="lyapmap", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("rep", "preimage", "oracle", "scan", "diag", "padic"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON file of default flag values")
        sp.add_argument("--preset")
        sp.add_argument("--map", dest="map_json",
                        help="inline JSON or path: "
                             '{"num": [[re,im],...], "den": [...]}')
        sp.add_argument("--kmax", type=int, default=8)
        sp.add_argument("--target")
        sp.add_argument("--mode", default="full", help="full or mc:N")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--precision-bits", type=int, default=53,
                        dest="precision_bits")
        sp.add_argument("--prime", type=int)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--force", action="store_true")
        if name == "rep":
            sp.add_argument("--variant", default="both",
                            choices=("plain", "strict", "both"))
    return p


def _load_config_defaults(argv, parser):
    """Two-phase parse so a --config file provides defaults, flags win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv[1:] if argv else [])
    ns = parser.parse_args(argv)
    if getattr(ns, "config", None):
        try:
            defaults = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"bad --config file: {exc}") from exc
        given = set()
        for tok in (argv or []):
            if tok.startswith("--"):
                given.add(tok.lstrip("-").split("=")[0].replace("-", "_"))
        for key, val in defaults.items():
            key = key.replace("-", "_")
            if key not in given and hasattr(ns, key):
                setattr(ns, key, val)
    return ns


COMMANDS = {"rep": cmd_rep, "preimage": cmd_preimage, "oracle": cmd_oracle,
            "scan": cmd_scan, "diag": cmd_diag, "padic": cmd_padic}


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    try:
        ns = _load_config_defaults(argv, parser)
        cfg = RunConfig(
            command=ns.command, preset=ns.preset, map_json=ns.map_json,
            kmax=ns.kmax, target=ns.target, mode=ns.mode, seed=ns.seed,
            precision_bits=ns.precision_bits, prime=ns.prime, out=ns.out,
            format=ns.format, force=ns.force,
            variant=getattr(ns, "variant", "both"))
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TargetRejected as exc:
        print(f"target rejected: {exc}", file=sys.stderr)
        if exc.report is not None:
            json.dump(exc.report.to_json_dict(), sys.stderr, indent=2,
                      default=str)
            print(file=sys.stderr)
        return 3
    except UnknownPreset as exc:
        print(f"error: unknown preset {exc}", file=sys.stderr)
        return 1
    except LyapmapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
