"""Configuration-driven benchmark runner.

``alia run config.json [--out DIR] [--verify] [--jobs N]`` builds one problem,
runs each configured solver, and writes a ``<solver>.trace.csv`` per solver
plus one ``summary.json``. ``alia check config.json`` validates only;
``alia roots a3 a2 a1 a0`` prints the real roots of a cubic (debug helper).

Exit status: 0 when every solver converged, 2 when any stopped at its
iteration cap, 1 on configuration or numerical errors.

Config keys are validated strictly: unknown keys are rejected with their
path, so typos cannot silently change a benchmark. Traces are byte-stable
for a fixed config and seed except for the wall-clock column.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .baselines import (
    CondatVuOptions,
    FlipOptions,
    condat_vu_solve,
    flip_admm_solve,
    three_term_form,
)
from .cubic import real_cubic_roots
from .errors import ConfigError, ConvergenceError, NumericsError, ParseError
from .instrument import instrument, instrument_three_term
from .linops import is_zero_op, operator_norm
from .problems import (
    BlockSpec,
    build_consensus,
    build_dual_lad,
    build_dual_lasso,
    build_dual_svm,
    load_problem_file,
    parse_libsvm,
    synth_dataset,
    synth_unmixing,
)
from .solver import ProblemInstance, SolverOptions, solve

TRACE_HEADER = (
    "k,gamma,active_term,lamA,lamB,muA,muB,a,b,"
    "res2_w12,res2_w3,resinf_w12,resinf_w3,slack_x,slack_y,slack_u,wall_ns"
)

_PROBLEM_KINDS = ("dual_lasso", "dual_lad", "dual_svm", "consensus", "custom_file")
_SOLVER_KINDS = ("alia_s1", "alia_s2", "flip_admm", "condat_vu")

_DEFAULTS = {"sigma": 1.0, "gamma0": 1.0, "epsilon": 0.0}
_STOP_DEFAULTS = {"tol_two": 1e-4, "tol_inf": 1e-6, "max_iters": 100000}


@dataclass
class RunConfig:
    problem: dict
    data: dict | None
    solvers: list
    stopping: dict
    output: str | None
    verify: bool
    seed: int


def _require_keys(obj: dict, allowed: dict, path: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown key")
    for key, required in allowed.items():
        if required and key not in obj:
            raise ConfigError(f"{path}.{key}: missing required key")


def _number(obj: dict, key: str, path: str, *, positive=False, nonneg=False, integer=False, default=None):
    if key not in obj:
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number")
    if integer and int(v) != v:
        raise ConfigError(f"{path}.{key}: expected an integer")
    if positive and v <= 0:
        raise ConfigError(f"{path}.{key}: must be > 0")
    if nonneg and v < 0:
        raise ConfigError(f"{path}.{key}: must be >= 0")
    return int(v) if integer else float(v)


def parse_config(text) -> RunConfig:
    """Validate a JSON run configuration, filling documented defaults."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    _require_keys(
        obj,
        {"problem": True, "solvers": True, "data": False, "stopping": False,
         "output": False, "verify": False, "seed": False},
        "config",
    )

    problem = obj["problem"]
    if not isinstance(problem, dict) or "kind" not in problem:
        raise ConfigError("config.problem.kind: missing required key")
    kind = problem["kind"]
    if kind not in _PROBLEM_KINDS:
        raise ConfigError(f"config.problem.kind: unknown problem {kind!r}")
    if kind in ("dual_lasso", "dual_lad"):
        _require_keys(problem, {"kind": True, "lambda": True}, "config.problem")
        _number(problem, "lambda", "config.problem", positive=True)
    elif kind == "dual_svm":
        _require_keys(problem, {"kind": True, "C": True}, "config.problem")
        _number(problem, "C", "config.problem", positive=True)
    elif kind == "consensus":
        _require_keys(
            problem, {"kind": True, "n_blocks": True, "gamma": False, "tau": False}, "config.problem"
        )
        n_blocks = _number(problem, "n_blocks", "config.problem", integer=True)
        if n_blocks not in (2, 3, 4):
            raise ConfigError("config.problem.n_blocks: must be 2, 3, or 4")
        _number(problem, "gamma", "config.problem", nonneg=True, default=0.1)
        _number(problem, "tau", "config.problem", nonneg=True, default=0.1)
    else:  # custom_file
        _require_keys(problem, {"kind": True, "path": True}, "config.problem")
        if not isinstance(problem["path"], str):
            raise ConfigError("config.problem.path: expected a string")

    data = obj.get("data")
    if kind == "custom_file":
        if data is not None:
            raise ConfigError("config.data: not allowed with a custom_file problem")
    else:
        if data is None:
            raise ConfigError("config.data: missing required key")
        _require_keys(data, {"libsvm": False, "synthetic": False}, "config.data")
        if ("libsvm" in data) == ("synthetic" in data):
            raise ConfigError("config.data: provide exactly one of 'libsvm' or 'synthetic'")
        if "libsvm" in data and not isinstance(data["libsvm"], str):
            raise ConfigError("config.data.libsvm: expected a path string")
        if "synthetic" in data:
            syn = data["synthetic"]
            if kind == "consensus":
                _require_keys(
                    syn,
                    {"seed": True, "L": True, "N": True, "K": True, "snr_db": False},
                    "config.data.synthetic",
                )
                for key in ("L", "N", "K"):
                    _number(syn, key, "config.data.synthetic", positive=True, integer=True)
                _number(syn, "snr_db", "config.data.synthetic", default=30.0)
            else:
                _require_keys(
                    syn, {"seed": True, "m": True, "n": True}, "config.data.synthetic"
                )
                for key in ("m", "n"):
                    _number(syn, key, "config.data.synthetic", positive=True, integer=True)
            _number(syn, "seed", "config.data.synthetic", integer=True)
        if kind == "consensus" and "libsvm" in data:
            raise ConfigError("config.data.libsvm: consensus problems use synthetic data")

    solvers = obj.get("solvers")
    if not isinstance(solvers, list) or not solvers:
        raise ConfigError("config.solvers: need a non-empty list")
    filled = []
    for i, entry in enumerate(solvers):
        path = f"config.solvers[{i}]"
        if not isinstance(entry, dict) or "kind" not in entry:
            raise ConfigError(f"{path}.kind: missing required key")
        skind = entry["kind"]
        if skind not in _SOLVER_KINDS:
            raise ConfigError(f"{path}.kind: unknown solver {skind!r}")
        if skind in ("alia_s1", "alia_s2"):
            _require_keys(entry, {"kind": True, "sigma": False, "gamma0": False, "epsilon": False}, path)
            filled.append(
                {
                    "kind": skind,
                    "sigma": _number(entry, "sigma", path, positive=True, default=_DEFAULTS["sigma"]),
                    "gamma0": _number(entry, "gamma0", path, positive=True, default=_DEFAULTS["gamma0"]),
                    "epsilon": _number(entry, "epsilon", path, nonneg=True, default=_DEFAULTS["epsilon"]),
                }
            )
        elif skind == "flip_admm":
            _require_keys(
                entry, {"kind": True, "sigma": False, "phi": False, "eta_x": False, "eta_y": False}, path
            )
            filled.append(
                {
                    "kind": skind,
                    "sigma": _number(entry, "sigma", path, positive=True, default=1.0),
                    "phi": _number(entry, "phi", path, positive=True, default=1.0),
                    "eta_x": _number(entry, "eta_x", path, positive=True),
                    "eta_y": _number(entry, "eta_y", path, positive=True),
                }
            )
        else:
            _require_keys(entry, {"kind": True, "beta": False, "lipschitz": False}, path)
            filled.append(
                {
                    "kind": skind,
                    "beta": _number(entry, "beta", path, positive=True, default=1.0),
                    "lipschitz": _number(entry, "lipschitz", path, nonneg=True),
                }
            )

    stopping = dict(_STOP_DEFAULTS)
    if "stopping" in obj:
        _require_keys(obj["stopping"], {"tol_two": False, "tol_inf": False, "max_iters": False}, "config.stopping")
        stopping["tol_two"] = _number(obj["stopping"], "tol_two", "config.stopping", positive=True, default=stopping["tol_two"])
        stopping["tol_inf"] = _number(obj["stopping"], "tol_inf", "config.stopping", positive=True, default=stopping["tol_inf"])
        stopping["max_iters"] = _number(obj["stopping"], "max_iters", "config.stopping", nonneg=True, integer=True, default=stopping["max_iters"])

    output = obj.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("config.output: expected a string")
    verify = obj.get("verify", False)
    if not isinstance(verify, bool):
        raise ConfigError("config.verify: expected a boolean")
    seed = _number(obj, "seed", "config", integer=True, default=0)

    return RunConfig(
        problem=dict(problem), data=data, solvers=filled,
        stopping=stopping, output=output, verify=verify, seed=seed,
    )


def build_problem(config: RunConfig) -> ProblemInstance:
    """Materialize the configured problem instance (loads data as needed)."""
    kind = config.problem["kind"]
    if kind == "custom_file":
        path = config.problem["path"]
        if not os.path.exists(path):
            raise ConfigError(f"problem file not found: {path}")
        return load_problem_file(path)
    if kind == "consensus":
        syn = config.data["synthetic"]
        L, N, K = int(syn["L"]), int(syn["N"]), int(syn["K"])
        data = synth_unmixing(int(syn["seed"]), L, N, K, float(syn.get("snr_db", 30.0)))
        spec = BlockSpec(
            n_blocks=int(config.problem["n_blocks"]), L=L, N=N, K=K,
            gamma=float(config.problem.get("gamma", 0.1)),
            tau=float(config.problem.get("tau", 0.1)),
            a_weights=data[3], b_weights=data[4],
        )
        return build_consensus(spec, data)
    if "libsvm" in config.data:
        path = config.data["libsvm"]
        if not os.path.exists(path):
            raise ConfigError(f"data file not found: {path}")
        with open(path, "r", encoding="utf-8") as fh:
            dataset = parse_libsvm(fh.read())
    else:
        syn = config.data["synthetic"]
        dataset = synth_dataset(
            int(syn["seed"]), int(syn["m"]), int(syn["n"]),
            kind="classification" if kind == "dual_svm" else "regression",
        )
    if kind == "dual_lasso":
        return build_dual_lasso(dataset, float(config.problem["lambda"]))
    if kind == "dual_lad":
        return build_dual_lad(dataset, float(config.problem["lambda"]))
    return build_dual_svm(dataset, float(config.problem["C"]))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) and math.isnan(value):
        return ""
    return format(value, ".17g")


def write_trace(path: str, trace) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(TRACE_HEADER + "\n")
        for rec in trace:
            fh.write(
                ",".join(
                    _fmt(v)
                    for v in (
                        rec.k, rec.gamma, rec.active_term,
                        rec.lamA, rec.lamB, rec.muA, rec.muB, rec.a, rec.b,
                        rec.res2_w12, rec.res2_w3, rec.resinf_w12, rec.resinf_w3,
                        rec.slack_x, rec.slack_y, rec.slack_u, rec.wall_ns,
                    )
                )
                + "\n"
            )


def _run_one(entry: dict, problem: ProblemInstance, config: RunConfig):
    """Run a single solver entry; returns (trace, summary-dict)."""
    stop = (config.stopping["tol_two"], config.stopping["tol_inf"])
    max_iters = int(config.stopping["max_iters"])
    kind = entry["kind"]
    if kind in ("alia_s1", "alia_s2"):
        wrapped, counts = instrument(problem)
        opts = SolverOptions(
            sigma=entry["sigma"], gamma0=entry["gamma0"], epsilon=entry["epsilon"],
            subroutine="s1" if kind == "alia_s1" else "s2",
            max_iters=max_iters, tol_two=stop[0], tol_inf=stop[1],
        )
        result = solve(wrapped, opts, verify=config.verify)
        trace, status = result.trace, result.status
    elif kind == "flip_admm":
        opts = FlipOptions(sigma=entry["sigma"], phi=entry["phi"], eta_x=entry["eta_x"], eta_y=entry["eta_y"])
        # operator norms for the curvature bound come from the raw operators so
        # the counters only see the iteration itself
        nA = 0.0 if is_zero_op(problem.A) else operator_norm(problem.A)
        nB = 0.0 if is_zero_op(problem.B) else operator_norm(problem.B)
        wrapped, counts = instrument(problem)
        _, trace, status = flip_admm_solve(wrapped, opts, stop=stop, max_iters=max_iters, norms=(nA, nB))
    else:
        f, g, h, A = three_term_form(problem)
        norm_A = 0.0 if is_zero_op(A) else operator_norm(A)
        lipschitz = entry["lipschitz"]
        if lipschitz is None:
            from .blocks import smooth_lipschitz

            lipschitz = smooth_lipschitz(f)  # estimated on the raw block, not the counted wrapper
        opts = CondatVuOptions(beta=entry["beta"], lipschitz=lipschitz)
        (wf, wg, wh, wA), counts = instrument_three_term((f, g, h, A))
        _, trace, status = condat_vu_solve((wf, wg, wh, wA), opts, stop=stop, max_iters=max_iters, norm_A=norm_A)

    last = trace[-1] if trace else None
    summary = {
        "status": status,
        "iterations": len(trace),
        "final_residuals": None
        if last is None
        else {
            "res2_w12": last.res2_w12, "res2_w3": last.res2_w3,
            "resinf_w12": last.resinf_w12, "resinf_w3": last.resinf_w3,
        },
        "min_gamma": min((rec.gamma for rec in trace), default=None),
        "counts": counts.snapshot(),
        "totals": {"prox": counts.total_prox, "grad": counts.total_grad, "matvec": counts.matvecs},
    }
    return trace, summary


def run(config: RunConfig, out_dir: str | None = None, jobs: int = 1) -> int:
    """Execute every configured solver and write traces plus a summary.

    Returns the process exit code (0 converged, 2 iteration cap, 1 error).
    """
    out = out_dir or config.output or "."
    try:
        problem = build_problem(config)
    except (ConfigError, ParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    names = []
    seen: dict[str, int] = {}
    for entry in config.solvers:
        n = seen.get(entry["kind"], 0) + 1
        seen[entry["kind"]] = n
        names.append(entry["kind"] if n == 1 else f"{entry['kind']}_{n}")

    def task(entry):
        return _run_one(entry, problem, config)

    try:
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(task, config.solvers))
        else:
            results = [task(entry) for entry in config.solvers]
    except (ConfigError, ConvergenceError, NumericsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    os.makedirs(out, exist_ok=True)
    summary = {}
    for name, (trace, solver_summary) in zip(names, results):
        write_trace(os.path.join(out, f"{name}.trace.csv"), trace)
        summary[name] = solver_summary
    with open(os.path.join(out, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    statuses = [s["status"] for s in summary.values()]
    if any(s == "diverged" for s in statuses):
        return 1
    if any(s == "max_iters" for s in statuses):
        return 2
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="alia", description="benchmark runner for the adaptive splitting solvers")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the solvers described by a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory (overrides the config)")
    p_run.add_argument("--verify", action="store_true", help="record descent-inequality slacks in the traces")
    p_run.add_argument("--jobs", type=int, default=1, help="run solver entries in parallel")

    p_check = sub.add_parser("check", help="validate a config without running it")
    p_check.add_argument("config")

    p_roots = sub.add_parser("roots", help="print the real roots of a3 x^3 + a2 x^2 + a1 x + a0")
    for name in ("a3", "a2", "a1", "a0"):
        p_roots.add_argument(name, type=float)

    args = parser.parse_args(argv)

    if args.command == "roots":
        try:
            roots = real_cubic_roots(args.a3, args.a2, args.a1, args.a0)
        except (ValueError, NumericsError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(" ".join(format(r, ".17g") for r in roots))
        return 0

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = parse_config(fh.read())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.command == "check":
        print("ok")
        return 0

    if args.verify:
        config.verify = True
    return run(config, out_dir=args.out, jobs=max(1, args.jobs))


if __name__ == "__main__":
    sys.exit(main())
