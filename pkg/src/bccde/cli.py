"""Command-line front end.

Four subcommands share one declarative YAML config, with every value
overridable by flags (flags win over file values, file values win over
built-in defaults):

  capacity    BIAWGN capacity/entropy table over a sigma grid (CSV)
  threshold   density-evolution threshold search (CSV trace + JSON summary)
  predict     analytic Eb/N0 predictions for the punctured family (CSV)
  simulate    sliding-window BER sweep (CSV, resumable via checkpoint)

Every artifact carries a header row (CSV) or schema_version (JSON), and
stochastic runs record the master seed they were driven by.  Exit codes:
0 success, 2 configuration error, 3 threshold bracket failure, 4 search
budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys

import numpy as np
import yaml

from .channel import capacity_biawgn, sigma_from_ebno
from .ensemble import BccSpec, PunctureSpec, build_graph
from .errors import BccdeError, BracketError, BudgetError, ConfigError
from .mcde import DeConfig, threshold_search
from .predictor import (
    PredictorInput,
    ecp,
    predict_awgn_theta,
    predict_bec_punctured,
    predict_mixed,
    theta_e,
    theta_g,
)
from .simulate import WindowConfig, run_ber_sweep
from .trellis import DEFAULT_COMPONENT, GeneratorConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BRACKET = 3
EXIT_BUDGET = 4

OUT_DIR_ENV = "BCCDE_OUT_DIR"

_DEFAULT_BRACKETS = {"bec": (0.40, 0.80), "biawgn": (0.0, 3.0)}


def parse_fraction(value) -> float:
    """Accept 0.5, "0.5", or "1/2"."""
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return float(num) / float(den)
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse number {value!r}") from exc


def parse_number_list(value) -> tuple:
    if isinstance(value, (list, tuple)):
        return tuple(parse_fraction(v) for v in value)
    return tuple(parse_fraction(p) for p in str(value).split(",") if p.strip())


def parse_grid(value) -> np.ndarray:
    """"LO:HI:N" (N linearly spaced points) or an explicit list."""
    if isinstance(value, (list, tuple)):
        return np.asarray([parse_fraction(v) for v in value], dtype=np.float64)
    parts = str(value).split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be LO:HI:N, got {value!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise ConfigError("grid needs at least one point")
    return np.linspace(lo, hi, n)


def parse_bracket(value) -> tuple:
    if isinstance(value, (list, tuple)):
        lo, hi = value
        return float(parse_fraction(lo)), float(parse_fraction(hi))
    parts = str(value).replace(",", ":").split(":")
    if len(parts) != 2:
        raise ConfigError(f"bracket must be LO:HI, got {value!r}")
    return float(parts[0]), float(parts[1])


def _octal_list(value) -> list:
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [p.strip() for p in str(value).split(",") if p.strip()]


def _dig(mapping, path):
    node = mapping
    for key in path.split("."):
        if not isinstance(node, dict) or key not in node:
            return None
        node = node[key]
    return node


class _Layers:
    """Three-layer config resolution: flags over file over defaults."""

    def __init__(self, flag_map, args, file_cfg, defaults):
        self.flags = {}
        for dest, path in flag_map.items():
            val = getattr(args, dest, None)
            if val is not None:
                self.flags[path] = val
        self.file_cfg = file_cfg or {}
        self.defaults = defaults

    def get(self, path, conv=None):
        for layer in (self.flags, {path: _dig(self.file_cfg, path)}, {path: _dig(self.defaults, path)}):
            val = layer.get(path)
            if val is not None:
                return conv(val) if conv is not None else val
        return None

    def given(self, path) -> bool:
        return path in self.flags or _dig(self.file_cfg, path) is not None


def _load_file_config(path):
    if path is None:
        return {}
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping at top level")
    return data


def _defaults() -> dict:
    fb, ff = DEFAULT_COMPONENT.octal()
    de = {f.name: getattr(DeConfig(), f.name) for f in dataclasses.fields(DeConfig)}
    return {
        "seed": 0,
        "workers": 1,
        "channel": "bec",
        "code": {
            "block_length": 1000,
            "chain_length": 50,
            "coupling_memory": 1,
            "memory": DEFAULT_COMPONENT.memory,
            "feedback": fb,
            "feedforward": list(ff),
            "puncture": "none",
            "alpha": 0.0,
            "permutor_seed": 0,
        },
        "de": de,
        "window": {"size": 5, "iterations": 20},
        "predict": {
            "method": "mixed",
            "base_rate": 1.0 / 3.0,
            "eps_star": None,
            "sigma_star": None,
            "ebno_star": None,
            "rates": [1.0 / 2.0, 3.0 / 5.0, 2.0 / 3.0, 3.0 / 4.0],
            "grid_points": 101,
        },
        "threshold": {"bracket": None},
        "capacity": {"sigma": None, "grid": None},
        "simulate": {
            "ebno": [0.0, 0.5, 1.0, 1.5, 2.0],
            "min_errors": 200,
            "max_bits": 100_000_000,
            "checkpoint": None,
        },
    }


# argparse dest -> config path, shared by threshold and simulate.
_CODE_FLAGS = {
    "block_length": "code.block_length",
    "chain_length": "code.chain_length",
    "coupling_memory": "code.coupling_memory",
    "memory": "code.memory",
    "feedback": "code.feedback",
    "feedforward": "code.feedforward",
    "puncture": "code.puncture",
    "alpha": "code.alpha",
    "permutor_seed": "code.permutor_seed",
}

_DE_FLAGS = {f.name: f"de.{f.name}" for f in dataclasses.fields(DeConfig)}


def _add_code_flags(p):
    p.add_argument("--N", "--block-length", dest="block_length", type=int,
                   help="permutor block length N")
    p.add_argument("--L", "--chain-length", dest="chain_length", type=int,
                   help="chain length in time instants")
    p.add_argument("--m", "--coupling-memory", dest="coupling_memory", type=int,
                   help="coupling memory (0 = uncoupled single instant)")
    p.add_argument("--memory", type=int, help="component encoder memory")
    p.add_argument("--feedback", help="feedback polynomial, octal")
    p.add_argument("--feedforward",
                   help="comma-separated feedforward polynomials, octal, one per input")
    p.add_argument("--puncture", choices=["none", "p1", "p2"], help="puncture pattern")
    p.add_argument("--alpha", help="punctured fraction of coded bits (accepts a/b)")
    p.add_argument("--permutor-seed", dest="permutor_seed", type=int,
                   help="seed of the permutor draw")


def _add_de_flags(p):
    p.add_argument("--mode", choices=["mc", "ga", "ga-se"], help="density-evolution mode")
    p.add_argument("--pool-size", dest="pool_size", type=int)
    p.add_argument("--seq-length", dest="seq_length", type=int,
                   help="trellis sections per sampled block")
    p.add_argument("--blocks-per-batch", dest="blocks_per_batch", type=int)
    p.add_argument("--max-batches", dest="max_batches", type=int)
    p.add_argument("--stability-tol", dest="stability_tol", type=float)
    p.add_argument("--max-iterations", dest="max_iterations", type=int)
    p.add_argument("--target-ber", dest="target_ber", type=float)
    p.add_argument("--sustain-iterations", dest="sustain_iterations", type=int)
    p.add_argument("--stall-window", dest="stall_window", type=int)
    p.add_argument("--stall-rel-improvement", dest="stall_rel_improvement", type=float)
    p.add_argument("--resolution-eps", dest="resolution_eps", type=float)
    p.add_argument("--resolution-db", dest="resolution_db", type=float)
    p.add_argument("--max-evaluations", dest="max_evaluations", type=int)
    p.add_argument("--ga-matching", dest="ga_matching", choices=["mi", "mean"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bccde",
        description="Braided convolutional codes: thresholds, predictions, simulation.",
    )
    from . import __version__

    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", help="YAML config file; flags override its values")
        p.add_argument("--out-dir", dest="out_dir",
                       help=f"output directory (default ${OUT_DIR_ENV} or cwd)")
        p.add_argument("--dump-config", dest="dump_config",
                       help="write the effective merged config as YAML and continue")

    cap = sub.add_parser("capacity", help="BIAWGN capacity table")
    common(cap)
    cap.add_argument("--sigma", help="comma-separated noise sigmas")
    cap.add_argument("--grid", help="sigma grid LO:HI:N")
    cap.add_argument("--out", help="output CSV path (default capacity.csv)")

    thr = sub.add_parser("threshold", help="density-evolution threshold search")
    common(thr)
    _add_code_flags(thr)
    _add_de_flags(thr)
    thr.add_argument("--channel", choices=["bec", "biawgn"])
    thr.add_argument("--bracket", help="search bracket LO:HI (eps or Eb/N0 dB)")
    thr.add_argument("--seed", type=int, help="master seed")
    thr.add_argument("--out", help="JSON summary path (default threshold.json)")
    thr.add_argument("--trace-out", dest="trace_out",
                     help="CSV of evaluated points (default threshold_trace.csv)")

    prd = sub.add_parser("predict", help="analytic threshold predictions")
    common(prd)
    prd.add_argument("--method", choices=["ecp", "theta-e", "theta-g", "mixed"])
    prd.add_argument("--R", "--base-rate", dest="base_rate",
                     help="unpunctured code rate (accepts a/b)")
    prd.add_argument("--eps-star", dest="eps_star", type=float,
                     help="measured unpunctured erasure threshold")
    prd.add_argument("--sigma-star", dest="sigma_star", type=float,
                     help="measured unpunctured AWGN threshold as noise sigma")
    prd.add_argument("--ebno-star", dest="ebno_star", type=float,
                     help="measured unpunctured AWGN threshold as Eb/N0 dB")
    prd.add_argument("--rates", help="comma-separated target rates (a/b allowed)")
    prd.add_argument("--grid-points", dest="grid_points", type=int,
                     help="points in the entropy-vs-rate CSV")
    prd.add_argument("--out", help="prediction CSV path (default predict.csv)")
    prd.add_argument("--entropy-out", dest="entropy_out",
                     help="entropy-vs-rate CSV path (default predict_entropy.csv)")

    sim = sub.add_parser("simulate", help="sliding-window BER sweep")
    common(sim)
    _add_code_flags(sim)
    sim.add_argument("--window-size", dest="window_size", type=int)
    sim.add_argument("--window-iterations", dest="window_iterations", type=int)
    sim.add_argument("--ebno", help="comma-separated Eb/N0 points in dB")
    sim.add_argument("--min-errors", dest="min_errors", type=int)
    sim.add_argument("--max-bits", dest="max_bits", type=int)
    sim.add_argument("--checkpoint", help="JSON checkpoint path for resuming")
    sim.add_argument("--seed", type=int, help="master seed")
    sim.add_argument("--workers", type=int, help="worker processes for chain decoding")
    sim.add_argument("--out", help="output CSV path (default ber.csv)")

    return parser


def _out_path(args, layers, name, default_name):
    explicit = getattr(args, name, None)
    out_dir = getattr(args, "out_dir", None) or os.environ.get(OUT_DIR_ENV) or "."
    path = explicit if explicit is not None else default_name
    if not os.path.isabs(path):
        path = os.path.join(out_dir, path)
    parent = os.path.dirname(path) or "."
    os.makedirs(parent, exist_ok=True)
    return path


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _print_table(header, rows, file=sys.stdout):
    cells = [[_fmt(v) for v in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
              for i, h in enumerate(header)]
    line = "  ".join(h.ljust(w) for h, w in zip(header, widths))
    print(line, file=file)
    print("-" * len(line), file=file)
    for row in cells:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)), file=file)


def _build_spec(layers) -> BccSpec:
    m = layers.get("code.coupling_memory", int)
    chain_length = layers.get("code.chain_length", int)
    if m == 0 and not layers.given("code.chain_length"):
        chain_length = 1
    component = GeneratorConfig.from_octal(
        num_inputs=2,
        memory=layers.get("code.memory", int),
        feedback=str(layers.get("code.feedback")),
        feedforward=[str(v) for v in _octal_list(layers.get("code.feedforward"))],
    )
    alpha = layers.get("code.alpha", parse_fraction)
    pattern = layers.get("code.puncture")
    if alpha > 0.0 and pattern == "none":
        raise ConfigError("alpha > 0 needs an explicit puncture pattern (p1 or p2)")
    return BccSpec(
        block_length=layers.get("code.block_length", int),
        coupling_memory=m,
        chain_length=chain_length,
        component=component,
        puncture=PunctureSpec(pattern=pattern, alpha=alpha if pattern != "none" else 0.0),
        permutor_seed=layers.get("code.permutor_seed", int),
    )


def _build_de(layers) -> DeConfig:
    kwargs = {}
    for f in dataclasses.fields(DeConfig):
        conv = type(getattr(DeConfig(), f.name))
        kwargs[f.name] = layers.get(f"de.{f.name}", conv if conv is not str else None)
    return DeConfig(**kwargs)


def _effective_config(layers, subcommand) -> dict:
    out = {"schema_version": 1, "subcommand": subcommand}
    for section, keys in _defaults().items():
        if isinstance(keys, dict):
            out[section] = {k: layers.get(f"{section}.{k}") for k in keys}
        else:
            out[section] = layers.get(section)
    return out


def _dump_config(args, layers, subcommand):
    path = getattr(args, "dump_config", None)
    if not path:
        return
    with open(path, "w") as fh:
        yaml.safe_dump(_effective_config(layers, subcommand), fh, sort_keys=False)


def _cmd_capacity(args, layers) -> int:
    if getattr(args, "sigma", None) is not None:
        sigmas = parse_number_list(args.sigma)
    elif getattr(args, "grid", None) is not None:
        sigmas = parse_grid(args.grid)
    else:
        sigmas = parse_grid("0.4:1.6:25")
    rows = []
    for s in sigmas:
        s = float(s)
        if s <= 0:
            raise ConfigError(f"sigma must be positive: {s}")
        c = capacity_biawgn(s)
        snr_db = -10.0 * math.log10(2.0 * s * s)
        rows.append([s, snr_db, c, 1.0 - c])
    header = ["sigma", "snr_db", "capacity", "entropy"]
    path = _out_path(args, layers, "out", "capacity.csv")
    _write_csv(path, header, rows)
    _print_table(header, rows)
    print(f"\nwrote {path}")
    return EXIT_OK


def _cmd_threshold(args, layers) -> int:
    spec = _build_spec(layers)
    de = _build_de(layers)
    channel = layers.get("channel")
    if channel not in ("bec", "biawgn"):
        raise ConfigError(f"unknown channel {channel!r}")
    seed = layers.get("seed", int)
    bracket = layers.get("threshold.bracket")
    bracket = _DEFAULT_BRACKETS[channel] if bracket is None else parse_bracket(bracket)
    graph = build_graph(spec)
    result = threshold_search(graph, channel, bracket, de, seed=seed)

    trace_path = _out_path(args, layers, "trace_out", "threshold_trace.csv")
    _write_csv(
        trace_path,
        ["param", "converged", "iterations", "max_ber"],
        [[e.value, e.converged, e.iterations, e.max_ber] for e in result.evaluations],
    )
    summary = result.to_dict()
    summary["spec_digest"] = spec.digest()
    json_path = _out_path(args, layers, "out", "threshold.json")
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2)

    unit = "eps" if channel == "bec" else "Eb/N0 dB"
    _print_table(
        ["channel", "mode", f"threshold ({unit})", "resolution", "evaluations", "seed"],
        [[result.channel, result.mode, result.threshold, result.resolution,
          len(result.evaluations), result.seed]],
    )
    print(f"\nwrote {json_path}\nwrote {trace_path}")
    return EXIT_OK


def _predict_rows(layers):
    method = layers.get("predict.method")
    base_rate = layers.get("predict.base_rate", parse_fraction)
    eps_star = layers.get("predict.eps_star", float)
    sigma_star = layers.get("predict.sigma_star", float)
    ebno_star = layers.get("predict.ebno_star", float)
    if sigma_star is not None and ebno_star is not None:
        raise ConfigError("give sigma_star or ebno_star, not both")
    if sigma_star is None and ebno_star is not None:
        sigma_star = sigma_from_ebno(ebno_star, base_rate)
    rates = parse_number_list(layers.get("predict.rates"))
    inp = PredictorInput(base_rate=base_rate, eps_star=eps_star, sigma_star=sigma_star)

    r_max = None
    if method == "ecp":
        if inp.eps_star is None:
            raise ConfigError("ecp needs eps_star")
        db = ecp(inp.eps_star, inp.base_rate)
        rows = [
            {"rate": inp.base_rate, "alpha": 0.0, "eps": inp.eps_star,
             "entropy": inp.eps_star, "sigma": sigma_from_ebno(db, inp.base_rate),
             "ebno_db": db}
        ]
        line_theta = None
    elif method == "theta-e":
        if inp.eps_star is None:
            raise ConfigError("theta-e needs eps_star")
        line_theta = theta_e(inp.eps_star, inp.base_rate)
        rows = [dataclasses.asdict(r)
                for r in predict_bec_punctured(line_theta, inp.base_rate, rates)]
    elif method == "theta-g":
        if inp.sigma_star is None:
            raise ConfigError("theta-g needs sigma_star or ebno_star")
        line_theta = theta_g(inp.sigma_star, inp.base_rate)
        rows = [dataclasses.asdict(r)
                for r in predict_awgn_theta(line_theta, inp.base_rate, rates)]
    elif method == "mixed":
        mp = predict_mixed(inp, rates)
        rows = [dataclasses.asdict(r) for r in mp.rows]
        r_max = mp.r_max
        line_theta = None
    else:
        raise ConfigError(f"unknown prediction method {method!r}")
    return method, inp, rows, line_theta, r_max


def _entropy_grid(method, inp, line_theta, r_max, points):
    """(rate, entropy) pairs tracing the prediction line for plotting."""
    if method == "ecp":
        return []
    lo = inp.base_rate
    if method == "mixed":
        h_star = 1.0 - capacity_biawgn(inp.sigma_star)
        th_e = theta_e(inp.eps_star, inp.base_rate)
        slope = (1.0 - th_e - h_star) / (1.0 - inp.base_rate)
        hi = min(r_max, 1.0)
        f = lambda r: h_star + (r - inp.base_rate) * slope
    else:
        hi = min(1.0 / line_theta, 1.0)
        f = lambda r: 1.0 - line_theta * r
    grid = np.linspace(lo, hi, points)
    return [[float(r), float(f(r))] for r in grid if 0.0 <= f(r) < 1.0]


def _cmd_predict(args, layers) -> int:
    method, inp, rows, line_theta, r_max = _predict_rows(layers)
    header = ["rate", "alpha", "eps", "entropy", "sigma", "ebno_db"]
    table = [[r["rate"], r["alpha"], r["eps"], r["entropy"], r["sigma"], r["ebno_db"]]
             for r in rows]
    path = _out_path(args, layers, "out", "predict.csv")
    _write_csv(path, header, table)

    points = layers.get("predict.grid_points", int)
    grid = _entropy_grid(method, inp, line_theta, r_max, points)
    grid_path = None
    if grid:
        grid_path = _out_path(args, layers, "entropy_out", "predict_entropy.csv")
        _write_csv(grid_path, ["rate", "entropy"], grid)

    print(f"method: {method}")
    if line_theta is not None:
        print(f"theta: {line_theta:.6f}")
    if r_max is not None:
        print(f"r_max: {r_max:.6f} (no usable rates beyond this)")
    _print_table(header, table)
    print(f"\nwrote {path}")
    if grid_path:
        print(f"wrote {grid_path}")
    return EXIT_OK


def _cmd_simulate(args, layers) -> int:
    spec = _build_spec(layers)
    wcfg = WindowConfig(
        size=layers.get("window.size", int),
        iterations=layers.get("window.iterations", int),
    )
    ebno = parse_number_list(layers.get("simulate.ebno"))
    seed = layers.get("seed", int)
    points = run_ber_sweep(
        spec,
        wcfg,
        ebno,
        min_errors=layers.get("simulate.min_errors", int),
        max_bits=layers.get("simulate.max_bits", int),
        seed=seed,
        checkpoint_path=layers.get("simulate.checkpoint"),
        workers=layers.get("workers", int),
    )
    header = ["ebno_db", "bits", "errors", "ber", "chains", "seed", "spec_digest"]
    rows = [[p.ebno_db, p.bits, p.errors, p.ber, p.chains, p.seed, p.spec_digest]
            for p in points]
    path = _out_path(args, layers, "out", "ber.csv")
    _write_csv(path, header, rows)
    _print_table(header, rows)
    print(f"\nwrote {path}")
    return EXIT_OK


_FLAG_MAPS = {
    "capacity": {"sigma": "capacity.sigma", "grid": "capacity.grid"},
    "threshold": {
        **_CODE_FLAGS, **_DE_FLAGS,
        "channel": "channel", "bracket": "threshold.bracket", "seed": "seed",
    },
    "predict": {
        "method": "predict.method", "base_rate": "predict.base_rate",
        "eps_star": "predict.eps_star", "sigma_star": "predict.sigma_star",
        "ebno_star": "predict.ebno_star", "rates": "predict.rates",
        "grid_points": "predict.grid_points",
    },
    "simulate": {
        **_CODE_FLAGS,
        "window_size": "window.size", "window_iterations": "window.iterations",
        "ebno": "simulate.ebno", "min_errors": "simulate.min_errors",
        "max_bits": "simulate.max_bits", "checkpoint": "simulate.checkpoint",
        "seed": "seed", "workers": "workers",
    },
}

_COMMANDS = {
    "capacity": _cmd_capacity,
    "threshold": _cmd_threshold,
    "predict": _cmd_predict,
    "simulate": _cmd_simulate,
}


def _dispatch(args) -> int:
    file_cfg = _load_file_config(getattr(args, "config", None))
    layers = _Layers(_FLAG_MAPS[args.subcommand], args, file_cfg, _defaults())
    _dump_config(args, layers, args.subcommand)
    return _COMMANDS[args.subcommand](args, layers)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except BracketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BRACKET
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, BccdeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
