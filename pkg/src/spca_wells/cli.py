"""Command-line entry point: ``spca-wells <subcommand> [--config FILE] [flags]``.

Configuration is a flat JSON object; every key can also be given as a flag
(``--k-prime 4``, ``--beta "[0, 1, 2]"``), with flags taking precedence.
Exit codes: 0 success, 2 configuration error, 3 enumeration budget exceeded,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from functools import partial
from pathlib import Path

import numpy as np

from . import gibbs, landscape, mcmc, recovery, theory
from .enumeration import DEFAULT_BUDGET
from .errors import (EnumerationTooLargeError, InvalidParameterError, SpcaError,
                     UndefinedDepthError, ZeroMassError)
from .io import config_digest, provenance, write_csv, write_json
from .model import Instance, generate_instance, instance_to_dict, load_instance
from .parallel import parallel_map, resolve_threads
from .rng import Rng, derive_stream

DEFAULTS = {
    "seed": 0,
    "out": ".",
    "budget": DEFAULT_BUDGET,
    "threads": 1,
    "n": 14,
    "k": 3,
    "k_prime": None,
    "lambda": 1.0,
    "beta": 0.0,
    "ell": 1,
    "noise_scale": 1.0,
    "instance": None,
    "replications": 100,
    "t_max": 1000,
    "points": 20,
    "init": "conditional",
    "alpha_n": 0.0,
    "delta": 0.1,
    "zeta1": None,
    "zeta2": None,
    "r": None,
    "methods": list(recovery.METHODS),
    "c_mult": 1.0,
    "tol": 1e-8,
    "max_iter": 10000,
    "record_timing": False,
    "axis": "lambda",
    "lambdas": None,
    "k_primes": None,
    "betas": None,
}
# keys that only steer where or how fast things run, not what is computed
_RUNTIME_KEYS = ("out", "threads")

EXIT_CONFIG, EXIT_BUDGET, EXIT_NUMERIC = 2, 3, 4


class ConfigError(SpcaError):
    pass


# -- configuration ----------------------------------------------------------------

def _json_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(doc) - set(DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(doc)
    for key in DEFAULTS:
        if key in vars(args):
            cfg[key] = getattr(args, key)
    return cfg


def _int(cfg: dict, key: str, low: int | None = None) -> int:
    val = cfg[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or val != int(val):
        raise ConfigError(f"{key} must be an integer, got {val!r}")
    val = int(val)
    if low is not None and val < low:
        raise ConfigError(f"{key} must be >= {low}, got {val}")
    return val


def _float(cfg: dict, key: str, value=None) -> float:
    val = cfg[key] if value is None else value
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{key} must be a number, got {val!r}")
    return float(val)


def _grid(cfg: dict, key: str, fallback: str | None = None) -> list:
    val = cfg[key]
    if val is None and fallback is not None:
        val = cfg[fallback]
    vals = val if isinstance(val, list) else [val]
    if not vals:
        raise ConfigError(f"grid {key} must be nonempty")
    return vals


def _k_prime(cfg: dict, inst: Instance | None = None) -> int:
    if cfg["k_prime"] is None:
        return inst.k if inst is not None else _int(cfg, "k", 1)
    return _int(cfg, "k_prime", 1)


def _budget(cfg: dict):
    return None if cfg["budget"] is None else _int(cfg, "budget", 1)


def _digest_view(cfg: dict) -> dict:
    return {k: v for k, v in cfg.items() if k not in _RUNTIME_KEYS}


def _meta(cfg: dict) -> dict:
    return provenance(_digest_view(cfg), _int(cfg, "seed", 0))


def _outdir(cfg: dict) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _instance(cfg: dict) -> Instance:
    if cfg["instance"]:
        return load_instance(cfg["instance"])
    n, k = _int(cfg, "n", 1), _int(cfg, "k", 1)
    if k > n:
        raise ConfigError(f"k={k} exceeds n={n}")
    lam = _grid(cfg, "lambda")[0]
    return generate_instance(n, k, _float(cfg, "lambda", lam), Rng(_int(cfg, "seed", 0)),
                             noise_scale=_float(cfg, "noise_scale"))


def _params(inst: Instance, k_prime: int, lam: float, beta: float | None, cfg: dict):
    if lam <= 0:
        return None
    return theory.ModelParams(inst.n, inst.k, k_prime, lam, beta, _float(cfg, "delta"))


# -- subcommands ------------------------------------------------------------------

def cmd_gen(cfg: dict) -> list[Path]:
    inst = _instance(cfg)
    path = _outdir(cfg) / "instance.json"
    doc = instance_to_dict(inst)
    doc["meta"] = _meta(cfg)
    path.write_text(json.dumps(doc, indent=1) + "\n")
    return [path]


def _depth_row(inst: Instance, k_prime: int, lam: float, beta: float, ell: int, cfg: dict, budget):
    gibbs.RegionSpec(ell).validate(inst.k, k_prime)
    prof = gibbs.gibbs_profile(inst.with_lambda(lam), beta, k_prime, budget)
    try:
        depth, status = gibbs.few_depth(prof, ell), "ok"
    except UndefinedDepthError:
        depth, status = None, "undefined"
    p = _params(inst, k_prime, lam, beta, cfg)
    ht = theory.high_temp_depth_bound(p, ell) if p is not None else None
    flags = (None,) * 4 if ht is None else (ht.applicable, ht.ell_condition, ht.sparsity_condition,
                                             ht.region_condition)
    return (lam, beta, ell, depth, None if ht is None else ht.value, *flags, status)


def cmd_depth(cfg: dict) -> list[Path]:
    inst = _instance(cfg)
    kp, budget = _k_prime(cfg, inst), _budget(cfg)
    rows = []
    for lam in _grid(cfg, "lambda"):
        for beta in _grid(cfg, "beta"):
            for ell in _grid(cfg, "ell"):
                rows.append(_depth_row(inst, kp, _float(cfg, "lambda", lam), _float(cfg, "beta", beta),
                                       _int({"ell": ell}, "ell", 1), cfg, budget))
    path = _outdir(cfg) / "depth.csv"
    write_csv(path, ["lambda", "beta", "ell", "depth", "ht_bound", "ht_applicable", "ell_condition",
                     "sparsity_condition", "region_condition", "status"], rows, _meta(cfg))
    return [path]


def _chain_config(cfg: dict, inst: Instance, beta=None, k_prime=None, replications=None) -> mcmc.ChainConfig:
    return mcmc.ChainConfig(
        beta=_float(cfg, "beta", beta),
        k_prime=_k_prime(cfg, inst) if k_prime is None else k_prime,
        ell=_int(cfg, "ell", 1),
        t_max=_int(cfg, "t_max", 1),
        replications=_int(cfg, "replications", 1) if replications is None else replications,
        init=cfg["init"],
        budget=_budget(cfg),
    )


def cmd_hit(cfg: dict) -> list[Path]:
    inst = _instance(cfg)
    chain = _chain_config(cfg, inst)
    seed = _int(cfg, "seed", 0)
    table = mcmc.escape_experiment(inst, chain, Rng(seed, derive_stream(seed, 1)),
                                   points=_int(cfg, "points", 1), threads=cfg["threads"])
    out = _outdir(cfg)
    write_csv(out / "escape.csv", ["t", "emp_prob", "bound", "vacuous"], table.rows, _meta(cfg))
    summary = table.summary()
    summary["seed"] = seed
    write_json(out / "escape_summary.json", summary, _meta(cfg))
    return [out / "escape.csv", out / "escape_summary.json"]


def cmd_ogp(cfg: dict) -> list[Path]:
    inst = _instance(cfg)
    kp, budget = _k_prime(cfg, inst), _budget(cfg)
    curve = landscape.phi_curve(inst, kp, budget, threads=cfg["threads"])
    if cfg["zeta1"] is not None or cfg["zeta2"] is not None or cfg["r"] is not None:
        if None in (cfg["zeta1"], cfg["zeta2"], cfg["r"]):
            raise ConfigError("zeta1, zeta2 and r must be given together")
        cert = landscape.ogp_certify(inst, kp, _int(cfg, "zeta1", 0), _int(cfg, "zeta2", 0),
                                     _float(cfg, "r"), curve=curve)
        doc = cert.to_dict()
    else:
        cert = landscape.ogp_scan(inst, kp, curve=curve)
        doc = cert.to_dict() if cert is not None else {
            "holds": False, "zeta1": None, "zeta2": None, "r": None, "gap": None,
            "witness_low": None, "witness_high": None, "seed": inst.seed}
    doc.update({"n": inst.n, "k": inst.k, "k_prime": kp, "lambda": inst.lam})
    out = _outdir(cfg)
    rows = [(ell, phi, list(arg) if arg is not None else None) for ell, phi, arg in curve.rows()]
    write_csv(out / "phi_curve.csv", ["ell", "phi", "argmin_indices"], rows, _meta(cfg))
    write_json(out / "ogp_certificate.json", doc, _meta(cfg))
    return [out / "ogp_certificate.json", out / "phi_curve.csv"]


def cmd_curves(cfg: dict) -> list[Path]:
    n, k = _int(cfg, "n", 2), _int(cfg, "k", 1)
    kp = _k_prime(cfg)
    lam = _float(cfg, "lambda", _grid(cfg, "lambda")[0])
    p = theory.ModelParams(n, k, kp, lam, None, _float(cfg, "delta"))
    rows = [(c.ell, c.gamma, c.first_moment_threshold, c.finite_difference)
            for c in theory.curve_rows(p, _float(cfg, "alpha_n"))]
    report = theory.gamma_shape_report(p)
    ranges = theory.informative_ranges(p)
    report.update({
        "gap_n": theory.gap_n(p),
        "conjectured_runtime_exponent": theory.conjectured_runtime(p),
        "informative_ell_low": ranges.ell_low,
        "informative_ell_high": ranges.ell_high,
        "informative_ell_values": ranges.ell_values,
        "k_prime_valid": ranges.k_prime_valid,
        "k_prime_bounds": list(ranges.k_prime_bounds),
        "alpha_n": _float(cfg, "alpha_n"),
    })
    out = _outdir(cfg)
    write_csv(out / "curves.csv", ["ell", "gamma", "A_ell", "finite_difference"], rows, _meta(cfg))
    write_json(out / "shape_report.json", report, _meta(cfg))
    return [out / "curves.csv", out / "shape_report.json"]


def _recover_trial(index: int, cfg: dict, methods: list) -> list:
    master = _int(cfg, "seed", 0)
    seed = master + index
    n, k = _int(cfg, "n", 1), _int(cfg, "k", 1)
    lam = _float(cfg, "lambda", _grid(cfg, "lambda")[0])
    inst = generate_instance(n, k, lam, Rng(seed), noise_scale=_float(cfg, "noise_scale"))
    rows = []
    for j, name in enumerate(methods):
        res = recovery.run_method(name, inst, Rng(seed).spawn(j + 1), budget=_budget(cfg),
                                  c_mult=_float(cfg, "c_mult"), tol=_float(cfg, "tol"),
                                  max_iter=_int(cfg, "max_iter", 1))
        timing = res.wall_time if cfg["record_timing"] else None
        rows.append((name, n, k, res.k_prime, lam, seed, res.exact, res.overlap, res.enumerations, timing))
    return rows


def cmd_recover(cfg: dict) -> list[Path]:
    methods = _grid(cfg, "methods")
    for name in methods:
        if name not in recovery.METHODS:
            raise ConfigError(f"unknown method {name!r}; choose from {', '.join(recovery.METHODS)}")
    if _int(cfg, "k", 1) > _int(cfg, "n", 1):
        raise ConfigError("k exceeds n")
    trials = _int(cfg, "replications", 1)
    per_trial = parallel_map(partial(_recover_trial, cfg=cfg, methods=methods), range(trials), cfg["threads"])
    path = _outdir(cfg) / "benchmark.csv"
    write_csv(path, ["method", "n", "k", "k_prime", "lambda", "seed", "exact", "overlap", "enumerations",
                     "wall_time"], [row for rows in per_trial for row in rows], _meta(cfg))
    return [path]


SWEEP_HEADER = ["i", "j", "lambda", "k_prime", "beta", "ell", "stream", "depth", "ht_bound", "status",
                "replications", "escaped", "timeouts", "mean_tau"]


def _sweep_axis(cfg: dict) -> list:
    if cfg["axis"] == "lambda":
        return _grid(cfg, "lambdas", "lambda")
    vals = _grid(cfg, "k_primes", "k_prime")
    if None in vals:
        raise ConfigError("k_primes must list integers")
    return vals


def _sweep_point(ij, cfg: dict, inst: Instance):
    i, j = ij
    master = _int(cfg, "seed", 0)
    first = _sweep_axis(cfg)
    beta = _float(cfg, "beta", _grid(cfg, "betas", "beta")[j])
    if cfg["axis"] == "lambda":
        lam, kp = _float(cfg, "lambda", first[i]), _k_prime(cfg, inst)
    else:
        lam, kp = inst.lam, _int({"k_prime": first[i]}, "k_prime", 1)
    ell = _int(cfg, "ell", 1)
    stream = derive_stream(master, i, j)
    row_inst = inst.with_lambda(lam)
    gibbs.RegionSpec(ell).validate(inst.k, kp)
    prof = gibbs.gibbs_profile(row_inst, beta, kp, _budget(cfg))
    try:
        depth, status = gibbs.few_depth(prof, ell), "ok"
    except UndefinedDepthError:
        depth, status = None, "undefined"
    p = _params(inst, kp, lam, beta, cfg)
    ht = theory.high_temp_depth_bound(p, ell).value if p is not None else None
    reps = _int(cfg, "replications", 0)
    escaped = timeouts = mean_tau = None
    if reps > 0:
        chain = _chain_config(cfg, inst, beta=beta, k_prime=kp, replications=reps)
        results = mcmc.hitting_times(row_inst, chain, Rng(master, stream))
        taus = [r.tau for r in results if not r.timed_out]
        timeouts = len(results) - len(taus)
        escaped = len(taus)
        mean_tau = float(np.mean(taus)) if taus else None
    return [i, j, lam, kp, beta, ell, stream, depth, ht, status, reps, escaped, timeouts, mean_tau]


def cmd_sweep(cfg: dict) -> list[Path]:
    if cfg["axis"] not in ("lambda", "k_prime"):
        raise ConfigError("axis must be 'lambda' or 'k_prime'")
    inst = _instance(cfg)
    first = _sweep_axis(cfg)
    betas = _grid(cfg, "betas", "beta")
    grid = [(i, j) for i in range(len(first)) for j in range(len(betas))]
    out = _outdir(cfg)
    ckpt, partial_path = out / "sweep_checkpoint.json", out / "sweep_partial.jsonl"
    digest = config_digest(_digest_view(cfg))
    done: dict = {}
    if ckpt.exists() and partial_path.exists():
        lines = partial_path.read_text().splitlines()
        if lines and json.loads(lines[0]).get("config_digest") == digest:
            completed = {tuple(ij) for ij in json.loads(ckpt.read_text())}
            for line in lines[1:]:
                row = json.loads(line)
                if (row[0], row[1]) in completed:
                    done[(row[0], row[1])] = row
    if not done:
        partial_path.write_text(json.dumps({"config_digest": digest}) + "\n")
    todo = [ij for ij in grid if ij not in done]
    point = partial(_sweep_point, cfg=cfg, inst=inst)
    chunk = max(1, resolve_threads(cfg["threads"]))
    for start in range(0, len(todo), chunk):
        batch = todo[start:start + chunk]
        for ij, row in zip(batch, parallel_map(point, batch, cfg["threads"])):
            done[ij] = row
            with open(partial_path, "a") as fh:
                fh.write(json.dumps(row) + "\n")
            ckpt.write_text(json.dumps(sorted([list(k) for k in done])) + "\n")
    path = out / "sweep.csv"
    write_csv(path, SWEEP_HEADER, [done[ij] for ij in sorted(done)], _meta(cfg))
    return [path, ckpt]


COMMANDS = {
    "gen": cmd_gen,
    "depth": cmd_depth,
    "hit": cmd_hit,
    "ogp": cmd_ogp,
    "curves": cmd_curves,
    "recover": cmd_recover,
    "sweep": cmd_sweep,
}

HELP = {
    "gen": "sample an instance and write instance.json",
    "depth": "exact well depths over lambda/beta/ell grids (depth.csv)",
    "hit": "Metropolis escape experiment (escape.csv, escape_summary.json)",
    "ogp": "restricted optima and overlap gap certificate",
    "curves": "first-moment curve sweep and shape report",
    "recover": "recovery benchmark across methods and seeds",
    "sweep": "checkpointed phase diagram over (lambda or k', beta)",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON config file")
    for key in DEFAULTS:
        common.add_argument("--" + key.replace("_", "-"), dest=key, type=_json_value,
                            default=argparse.SUPPRESS, metavar="VALUE",
                            help=f"override '{key}' (JSON value)")
    parser = argparse.ArgumentParser(prog="spca-wells", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=HELP[name])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        for path in COMMANDS[args.command](cfg):
            print(path)
    except EnumerationTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ZeroMassError, UndefinedDepthError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, InvalidParameterError, KeyError, TypeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
