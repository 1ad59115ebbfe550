"""Command-line entry point: ``quenchlab {pressure,quenched,verify,limit,truncation}``.

Model truth lives in a JSON config::

    {"model": {"dimension": 1,
               "orbits": [{"sites": [[0], [1]],
                           "distribution": {"kind": "gaussian", "sd": 1.0},
                           "lambda": 1.0}]},
     "region": {"box_side": 8},
     "run": {"beta": 1.0, "seed": 0, "samples": 10000}}

Flags override the scalar run parameters only.  Exit codes: 0 success,
1 inequality violated, 2 configuration or precondition error, 3 capacity
exceeded, 4 output not writable.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from . import corpus
from . import inequalities as lab
from .disorder import truncate
from .engine import log_partition
from .errors import CapacityError, ConfigError, PreconditionError, UnsupportedRegionError
from .lattice import CouplingFamily, box, family_from_dict, instantiate, place
from .limits import convergence_run
from .quenched import FiniteEnsemble, quenched_exact, quenched_mc

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_CAPACITY, EXIT_IO = 0, 1, 2, 3, 4


class _OutputError(Exception):
    pass


def _load_config(path: str | None) -> tuple[dict[str, Any], str]:
    if path is None:
        cfg: dict[str, Any] = {}
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return cfg, hashlib.sha256(canon.encode()).hexdigest()


def _family(cfg) -> CouplingFamily:
    if "model" not in cfg:
        raise ConfigError("config has no 'model'")
    return family_from_dict(cfg["model"])


def _side(cfg) -> int:
    try:
        side = int(cfg["region"]["box_side"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError("config needs region.box_side") from None
    if side < 1:
        raise ConfigError("region.box_side must be positive")
    return side


def _params(cfg, args) -> dict[str, Any]:
    run = dict(cfg.get("run", {}))
    for key in ("beta", "seed", "samples"):
        val = getattr(args, key, None)
        if val is not None:
            run[key] = val
    run.setdefault("beta", 1.0)
    run.setdefault("seed", 0)
    run.setdefault("samples", 10_000)
    try:
        run["beta"] = float(run["beta"])
        run["seed"] = int(run["seed"])
        run["samples"] = int(run["samples"])
    except (TypeError, ValueError):
        raise ConfigError("beta, seed and samples must be numbers") from None
    if run["beta"] < 0:
        raise ConfigError("beta must be nonnegative")
    return run


def _record(command, params, config_hash, result) -> dict[str, Any]:
    return {
        "command": command,
        "seed": params["seed"],
        "config_hash": config_hash,
        "tool_version": __version__,
        "params": {k: params[k] for k in sorted(params) if k != "out"},
        "result": result,
    }


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=lab._jsonable)


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise _OutputError(f"cannot write {out}: {exc}") from None


def _out(args, params):
    return args.out if args.out is not None else params.get("out")


# ----------------------------------------------------------------------------
# commands


def cmd_pressure(args) -> int:
    cfg, digest = _load_config(args.config)
    params = _params(cfg, args)
    fam = _family(cfg)
    h = instantiate(fam, box(_side(cfg), fam.dimension), params["seed"])
    summary = log_partition(h, params["beta"])
    _emit(_dumps(_record("pressure", params, digest, summary.to_dict())) + "\n", _out(args, params))
    return EXIT_OK


def cmd_quenched(args) -> int:
    cfg, digest = _load_config(args.config)
    params = _params(cfg, args)
    params["exact"] = bool(args.exact or params.get("exact", False))
    fam = _family(cfg)
    region = box(_side(cfg), fam.dimension)
    if params["exact"]:
        est = quenched_exact(fam, region, params["beta"])
    else:
        est = quenched_mc(fam, region, params["beta"], params["samples"], params["seed"], args.threads)
    result = est.to_dict()
    result["seed"] = params["seed"]
    _emit(_dumps(_record("quenched", params, digest, result)) + "\n", _out(args, params))
    return EXIT_OK


def _finite(fam: CouplingFamily) -> bool:
    return all(getattr(o.distribution, "finite_support", False) for o in fam.orbits)


def _model_checks(fam: CouplingFamily, side: int, params, requested, threads):
    """Checks driven by the config's model instead of the bundled corpus."""
    region = box(side, fam.dimension)
    beta, seed = params["beta"], params["seed"]
    applicable = {"scalar", "ratio", "telescoping", "corollary", "superadditivity"}
    if fam.is_deterministic:
        applicable.add("griffiths")
    elif _finite(fam):
        applicable.add("cl")
    else:
        applicable.add("truncation")
    names = requested if requested is not None else [n for n in corpus.CHECK_NAMES if n in applicable]
    reports = []
    for name in names:
        if name == "scalar":
            reports.append(corpus.run_scalar())
        elif name in ("ratio", "telescoping"):
            h = instantiate(fam, region, seed)
            fn = lab.ratio_identity_check if name == "ratio" else lab.telescoping_bound_check
            reports.append(fn(h, beta, seed=seed))
        elif name == "corollary":
            h = instantiate(fam, region, seed)
            reps = [lab.corollary_bound_check(h, beta, None, "nonrandom", seed=seed)]
            if _finite(fam) and not fam.is_deterministic:
                pl = place(fam, region)
                reps.append(lab.corollary_bound_check(FiniteEnsemble.from_placement(pl), beta, None, "independent", seed=seed))
                reps.append(lab.corollary_bound_check(_truncated_ensemble(pl, float(params.get("R", 1.0))),
                                                      beta, None, "dependent", seed=seed))
            reports.append(lab.merge_reports("corollary", reps))
        elif name == "griffiths":
            if not fam.is_deterministic:
                raise PreconditionError("griffiths check needs a deterministic family")
            h = instantiate(fam, region, seed)
            grid = np.linspace(0.0, 2.0, 11)
            reports.append(lab.merge_reports(
                "griffiths", [lab.griffiths_check(h, beta, t, grid, seed=seed) for t in range(len(h))]))
        elif name == "cl":
            reps = [lab.cl_monotonicity_check(fam, region, beta, i, corpus.LAMBDA_GRID, seed=seed)
                    for i in range(len(fam.orbits))]
            reports.append(lab.merge_reports("cl", reps))
        elif name == "superadditivity":
            mode = "exact" if (fam.is_deterministic or _finite(fam)) else "mc"
            reports.append(lab.superadditivity_sweep(fam, side, beta, mode, params["samples"], seed))
        elif name == "truncation":
            R = params.get("R_grid", [1, 3, 10, 30, 100])
            reports.append(lab.truncation_error_check(fam, region, beta, R, params["samples"], seed, threads))
        else:
            raise ConfigError(f"unknown check {name!r}")
    return reports


def _truncated_ensemble(pl, R: float) -> FiniteEnsemble:
    base = FiniteEnsemble.from_placement(pl)
    pairs = [truncate(d, R) for d in pl.distributions]
    j1 = np.column_stack([p.split(base.couplings[:, t])[0] for t, p in enumerate(pairs)])
    lam = np.concatenate([base.multipliers, base.multipliers])
    return FiniteEnsemble(pl.region, tuple(pl.subsets) * 2, lam, np.hstack([j1, base.couplings - j1]),
                          base.probs, False)


def cmd_verify(args) -> int:
    cfg, digest = _load_config(args.config)
    params = _params(cfg, args)
    requested = args.checks.split(",") if args.checks else params.get("checks")
    if requested is not None:
        unknown = set(requested) - set(corpus.CHECK_NAMES)
        if unknown:
            raise ConfigError(f"unknown checks: {sorted(unknown)}")
    if "model" in cfg:
        reports = _model_checks(_family(cfg), _side(cfg), params, requested, args.threads)
    else:
        reports = corpus.default_suite(requested)
    lines = []
    for r in reports:
        rec = r.to_dict()
        rec.update(seed=params["seed"], config_hash=digest, tool_version=__version__)
        lines.append(_dumps(rec))
    _emit("".join(l + "\n" for l in lines), _out(args, params))
    failed = [r for r in reports if not r.passed]
    if failed:
        replay = args.replay or "verify_replay.json"
        _emit(_dumps([r.to_dict() for r in failed]) + "\n", replay)
        print(f"{len(failed)} check(s) failed; worst instances written to {replay}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit_table(command, params, digest, csv_text, payload, out):
    """CSV goes to ``out`` (or stdout); a JSON record with provenance sits beside it."""
    _emit(csv_text, out)
    if out is not None:
        _emit(_dumps(_record(command, params, digest, payload)) + "\n", out + ".json")


def cmd_limit(args) -> int:
    cfg, digest = _load_config(args.config)
    params = _params(cfg, args)
    fam = _family(cfg)
    kind = params.get("kind") or ("ferro_exact" if fam.is_deterministic else
                                  "quenched_exact" if _finite(fam) else "quenched_mc")
    params["kind"] = kind
    N_list = params.get("N_list", [2, 4, 8])
    table = convergence_run(fam, kind, params["beta"], N_list, params["samples"], params["seed"],
                            args.threads, params.get("bound_kind"))
    _emit_table("limit", params, digest, table.to_csv(), table.to_dict(), _out(args, params))
    for flag in table.flags:
        print(flag, file=sys.stderr)
    return EXIT_VIOLATION if table.flags else EXIT_OK


def cmd_truncation(args) -> int:
    cfg, digest = _load_config(args.config)
    params = _params(cfg, args)
    fam = _family(cfg)
    R = [float(r) for r in params.get("R_grid", [1, 3, 10, 30, 100])]
    params["R_grid"] = R
    rep = lab.truncation_error_check(fam, box(_side(cfg), fam.dimension), params["beta"], R,
                                     params["samples"], params["seed"], args.threads)
    rows = [[repr(r["R"]), repr(r["difference"]), repr(r["std_error"]), repr(r["bound"])] for r in rep.details["rows"]]
    text = _csv(["R", "difference", "std_error", "bound"], rows)
    _emit_table("truncation", params, digest, text, rep.to_dict(), _out(args, params))
    return EXIT_OK if rep.passed else EXIT_VIOLATION


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("QUENCHLAB_THREADS", "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quenchlab", description="Exact and quenched pressures of Ising spin glasses.")
    parser.add_argument("--version", action="version", version=f"quenchlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON config file")
        p.add_argument("--beta", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--threads", type=int, default=_default_threads(),
                       help="worker threads (default: $QUENCHLAB_THREADS or 1)")
        p.add_argument("--out", help="output path (default: stdout)")
        return p

    p = common(sub.add_parser("pressure", help="exact pressure of one disorder realization"))
    p.set_defaults(func=cmd_pressure)
    p = common(sub.add_parser("quenched", help="quenched pressure, exact or Monte Carlo"))
    p.add_argument("--exact", action="store_true", help="enumerate all disorder outcomes")
    p.set_defaults(func=cmd_quenched)
    p = common(sub.add_parser("verify", help="run inequality checks"), config_required=False)
    p.add_argument("--checks", help="comma-separated subset of: " + ",".join(corpus.CHECK_NAMES))
    p.add_argument("--replay", help="where to write failing instances")
    p.set_defaults(func=cmd_verify)
    p = common(sub.add_parser("limit", help="pressure along growing cubes with the limit bound"))
    p.set_defaults(func=cmd_limit)
    p = common(sub.add_parser("truncation", help="heavy-tail truncation sweep"))
    p.set_defaults(func=cmd_truncation)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PreconditionError, UnsupportedRegionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except _OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
