"""Command-line front end.

Five commands over a JSON instance file:

    vceo sum-rate    --instance inst.json      optimized achievable sum rate
    vceo lower-bound --instance inst.json      converse lower bound
    vceo verify      --instance inst.json      equality certificate
    vceo sweep       --instance inst.json --var d0 --start 0.3 --stop 0.39 --steps 16
    vceo mc-check    --instance inst.json --n 1000000

Instance schema (all numbers are decimal doubles)::

    {
      "model":   {"sigma_s2": 1.0, "sigma_n1_2": 1.0, "sigma_n2_2": 1.0},
      "targets": {"d1": 0.4, "d2": 0.4, "d0": 0.35},
      "options": {"tol": 1e-7, "starts": 16, "grid": 64, "seed": 0, "unit": "nats"}
    }

The ``options`` section is optional and CLI flags override it.  All internal
values are nats; ``--bits`` only converts at render time.  Exit codes:
0 ok, 1 parse error, 2 infeasible targets, 3 verification failure,
4 outside the distortion condition.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from typing import Any, Sequence

from . import bound as _bound
from . import equivalence as _equivalence
from . import mc as _mc
from . import scheme as _scheme
from .errors import InfeasibleTargetsError, InstanceParseError, InvalidParamsError, VceoError
from .gaussmodel import SourceModel
from .scheme import DistortionTriple, OptimizeOptions

__all__ = ["InstanceSpec", "Options", "parse_instance", "serialize_instance", "main"]

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INFEASIBLE = 2
EXIT_VERIFY_FAIL = 3
EXIT_OUTSIDE_CONDITION = 4

SWEEP_COLUMNS = (
    "swept_var",
    "swept_value",
    "achievable_nats",
    "lower_bound_nats",
    "gap_nats",
    "condition_holds",
)
SWEEP_VARS = ("d0", "d1", "d2", "sigma_s2", "sigma_n1_2", "sigma_n2_2")

LN2 = math.log(2.0)


@dataclass(frozen=True)
class Options:
    """Solver options carried by an instance file."""

    tol: float = 1e-7
    starts: int = 16
    grid: int = 64
    seed: int = 0
    unit: str = "nats"


@dataclass(frozen=True)
class InstanceSpec:
    model: SourceModel
    targets: DistortionTriple
    options: Options = Options()


def _require_number(section: dict, key: str, where: str) -> float:
    if key not in section:
        raise InstanceParseError(f"missing field {where}.{key}")
    v = section[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InstanceParseError(f"field {where}.{key} must be a number, got {v!r}")
    return float(v)


def parse_instance(text: str) -> InstanceSpec:
    """Parse and validate an instance document; diagnostics carry line/field."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceParseError(f"line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise InstanceParseError("top level must be an object")
    unknown = set(doc) - {"model", "targets", "options"}
    if unknown:
        raise InstanceParseError(f"unknown top-level field(s): {sorted(unknown)}")
    for section in ("model", "targets"):
        if section not in doc or not isinstance(doc[section], dict):
            raise InstanceParseError(f"missing or non-object section {section!r}")

    m = doc["model"]
    unknown = set(m) - {"sigma_s2", "sigma_n1_2", "sigma_n2_2"}
    if unknown:
        raise InstanceParseError(f"unknown field(s) in model: {sorted(unknown)}")
    try:
        model = SourceModel(
            sigma_s2=_require_number(m, "sigma_s2", "model"),
            sigma_n1_2=_require_number(m, "sigma_n1_2", "model"),
            sigma_n2_2=_require_number(m, "sigma_n2_2", "model"),
        )
    except InvalidParamsError as e:
        raise InstanceParseError(f"model: {e}") from e

    t = doc["targets"]
    unknown = set(t) - {"d1", "d2", "d0"}
    if unknown:
        raise InstanceParseError(f"unknown field(s) in targets: {sorted(unknown)}")
    try:
        targets = DistortionTriple(
            d1=_require_number(t, "d1", "targets"),
            d2=_require_number(t, "d2", "targets"),
            d0=_require_number(t, "d0", "targets"),
        )
    except InvalidParamsError as e:
        raise InstanceParseError(f"targets: {e}") from e

    opts = Options()
    if "options" in doc:
        o = doc["options"]
        if not isinstance(o, dict):
            raise InstanceParseError("options must be an object")
        unknown = set(o) - {"tol", "starts", "grid", "seed", "unit"}
        if unknown:
            raise InstanceParseError(f"unknown field(s) in options: {sorted(unknown)}")
        kwargs: dict[str, Any] = {}
        if "tol" in o:
            kwargs["tol"] = _require_number(o, "tol", "options")
            if kwargs["tol"] < 0:
                raise InstanceParseError("options.tol must be >= 0")
        for key in ("starts", "grid", "seed"):
            if key in o:
                v = o[key]
                if isinstance(v, bool) or not isinstance(v, int):
                    raise InstanceParseError(f"options.{key} must be an integer, got {v!r}")
                kwargs[key] = v
        if "unit" in o:
            if o["unit"] not in ("nats", "bits"):
                raise InstanceParseError(f"options.unit must be 'nats' or 'bits', got {o['unit']!r}")
            kwargs["unit"] = o["unit"]
        opts = Options(**kwargs)
    return InstanceSpec(model=model, targets=targets, options=opts)


def serialize_instance(spec: InstanceSpec) -> str:
    """Canonical form: sorted keys, two-space indent, trailing newline."""
    doc = {
        "model": {
            "sigma_s2": spec.model.sigma_s2,
            "sigma_n1_2": spec.model.sigma_n1_2,
            "sigma_n2_2": spec.model.sigma_n2_2,
        },
        "targets": {"d1": spec.targets.d1, "d2": spec.targets.d2, "d0": spec.targets.d0},
        "options": dataclasses.asdict(spec.options),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_instance(path: str) -> InstanceSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InstanceParseError(f"cannot read instance file {path!r}: {e}") from e
    return parse_instance(text)


# ---------------------------------------------------------------------------
# Rendering helpers


def _rate(value: float, bits: bool) -> float:
    return value / LN2 if bits else value


def _jsonable(value: Any) -> Any:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _emit(doc: dict, fmt: str, out) -> None:
    if fmt == "json":
        print(json.dumps(_jsonable(doc), indent=2, sort_keys=True), file=out)
        return
    for key, value in doc.items():
        if isinstance(value, dict):
            print(f"{key}:", file=out)
            for k, v in value.items():
                print(f"  {k} = {_fmt_value(v)}", file=out)
        else:
            print(f"{key} = {_fmt_value(value)}", file=out)


def _fmt_value(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_fmt_value(x) for x in v) + ")"
    return str(v)


def _merged_options(spec: InstanceSpec, args: argparse.Namespace) -> Options:
    opts = spec.options
    updates: dict[str, Any] = {}
    if getattr(args, "tol", None) is not None:
        updates["tol"] = args.tol
    if getattr(args, "starts", None) is not None:
        updates["starts"] = args.starts
    if getattr(args, "grid", None) is not None:
        updates["grid"] = args.grid
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "bits", False):
        updates["unit"] = "bits"
    return dataclasses.replace(opts, **updates) if updates else opts


def _optimize_options(opts: Options) -> OptimizeOptions:
    return OptimizeOptions(starts=opts.starts, tol=opts.tol, seed=opts.seed)


# ---------------------------------------------------------------------------
# Commands


def cmd_sum_rate(spec: InstanceSpec, opts: Options, fmt: str, out) -> int:
    bits = opts.unit == "bits"
    result = _scheme.optimize_sum_rate(spec.model, spec.targets, _optimize_options(opts))
    p = result.params
    doc = {
        "command": "sum-rate",
        "unit": opts.unit,
        "sum_rate": _rate(result.breakdown.sum_rate, bits),
        "term_mi_joint": _rate(result.breakdown.term_mi_joint, bits),
        "term_mi_cross": _rate(result.breakdown.term_mi_cross, bits),
        "params": {
            "w11": p.w11,
            "w12": p.w12,
            "w21": p.w21,
            "w22": p.w22,
            "a1": p.a1,
            "a2": p.a2,
        },
        "achieved_distortions": {
            "delta_1": result.distortions[0],
            "delta_2": result.distortions[1],
            "delta_0": result.distortions[2],
        },
    }
    _emit(doc, fmt, out)
    return EXIT_OK


def cmd_lower_bound(spec: InstanceSpec, opts: Options, fmt: str, out) -> int:
    bits = opts.unit == "bits"
    cond = _bound.condition_holds(spec.model, spec.targets)
    result = _bound.lower_bound(spec.model, spec.targets, grid=opts.grid)
    p = result.argmin
    doc = {
        "command": "lower-bound",
        "unit": opts.unit,
        "lower_bound": _rate(result.value, bits),
        "branch": result.branch.value,
        "argmin": {
            "d11": p.d11,
            "d12": p.d12,
            "d21": p.d21,
            "d22": p.d22,
            "t1": p.t1,
            "t2": p.t2,
        },
        "sigma_z": {"sigma_z1_2": result.sigma_z[0], "sigma_z2_2": result.sigma_z[1]},
        "condition_holds": cond,
    }
    if not cond:
        doc["note"] = "distortion condition not satisfied; equality with the achievable rate is not guaranteed"
    _emit(doc, fmt, out)
    return EXIT_OK


def cmd_verify(spec: InstanceSpec, opts: Options, fmt: str, out, identity_tol: float) -> int:
    bits = opts.unit == "bits"
    if not _bound.condition_holds(spec.model, spec.targets):
        _emit(
            {
                "command": "verify",
                "status": "SKIPPED",
                "reason": "outside the distortion condition; no certificate attempted",
            },
            fmt,
            out,
        )
        return EXIT_OUTSIDE_CONDITION
    lb = _bound.lower_bound(spec.model, spec.targets, grid=opts.grid)
    report = _equivalence.construct_matching_scheme(spec.model, spec.targets, lb.argmin)
    opt_opts = dataclasses.replace(_optimize_options(opts), warm_start=report.params)
    ach = _scheme.optimize_sum_rate(spec.model, spec.targets, opt_opts)
    rel_gap = abs(ach.breakdown.sum_rate - lb.value) / max(lb.value, 1e-300)
    identity_ok = report.diff <= identity_tol
    equality_ok = rel_gap <= 1e-3
    status = "PASS" if (identity_ok and equality_ok) else "FAIL"
    doc = {
        "command": "verify",
        "status": status,
        "unit": opts.unit,
        "achievable": _rate(ach.breakdown.sum_rate, bits),
        "lower_bound": _rate(lb.value, bits),
        "relative_gap": rel_gap,
        "equality_tol": 1e-3,
        "identity_lhs": _rate(report.lhs, bits),
        "identity_rhs": _rate(report.rhs, bits),
        "identity_diff": _rate(report.diff, bits),
        "identity_tol": _rate(identity_tol, bits),
        "cases": list(report.cases),
        "constructed_sigma_z": list(report.sigma_z),
        "conditional_mi": list(report.cond_mi),
        "branch": lb.branch.value,
    }
    _emit(doc, fmt, out)
    return EXIT_OK if status == "PASS" else EXIT_VERIFY_FAIL


def _condition_raw(s2: float, n1: float, n2: float, d1: float, d2: float, d0: float) -> bool:
    return 1.0 / d1 + 1.0 / d2 - max(1.0 / n1, 1.0 / n2) - 1.0 / s2 >= 1.0 / d0


def cmd_sweep(
    spec: InstanceSpec,
    opts: Options,
    out,
    var: str,
    start: float,
    stop: float,
    steps: int,
) -> int:
    if var not in SWEEP_VARS:
        raise InstanceParseError(f"unknown sweep variable {var!r}; choose from {SWEEP_VARS}")
    if steps < 1:
        raise InstanceParseError("steps must be >= 1")
    print(",".join(SWEEP_COLUMNS), file=out)
    for i in range(steps):
        value = start if steps == 1 else start + (stop - start) * i / (steps - 1)
        fields = {
            "sigma_s2": spec.model.sigma_s2,
            "sigma_n1_2": spec.model.sigma_n1_2,
            "sigma_n2_2": spec.model.sigma_n2_2,
            "d1": spec.targets.d1,
            "d2": spec.targets.d2,
            "d0": spec.targets.d0,
        }
        fields[var] = value
        cond = _condition_raw(
            fields["sigma_s2"],
            fields["sigma_n1_2"],
            fields["sigma_n2_2"],
            fields["d1"],
            fields["d2"],
            fields["d0"],
        )
        ach = lb = gap = math.nan
        try:
            model = SourceModel(fields["sigma_s2"], fields["sigma_n1_2"], fields["sigma_n2_2"])
            targets = DistortionTriple(fields["d1"], fields["d2"], fields["d0"])
            _scheme.require_valid_targets(model, targets)
            lb_res = _bound.lower_bound(model, targets, grid=opts.grid)
            opt_opts = _optimize_options(opts)
            if cond:
                # Reuse the bound's matching construction instead of having the
                # optimizer recompute the bound for its analytic start.
                try:
                    report = _equivalence.construct_matching_scheme(model, targets, lb_res.argmin)
                    opt_opts = dataclasses.replace(opt_opts, warm_start=report.params)
                except VceoError:
                    pass
            ach_res = _scheme.optimize_sum_rate(model, targets, opt_opts)
            ach, lb = ach_res.breakdown.sum_rate, lb_res.value
            gap = ach - lb
        except VceoError:
            pass
        print(
            f"{var},{value:.12g},{ach:.12g},{lb:.12g},{gap:.12g},{str(cond).lower()}",
            file=out,
        )
    return EXIT_OK


def cmd_mc_check(spec: InstanceSpec, opts: Options, fmt: str, out, n: int) -> int:
    result = _scheme.optimize_sum_rate(spec.model, spec.targets, _optimize_options(opts))
    report = _mc.mc_report(spec.model, result.params, n=n, seed=opts.seed)
    doc: dict[str, Any] = {
        "command": "mc-check",
        "n_samples": report.n_samples,
        "seed": report.seed,
        "status": "PASS" if report.passed() else "FAIL",
    }
    for row in report.rows:
        doc[row.name] = {
            "analytic": row.analytic,
            "empirical": row.empirical,
            "stderr": row.stderr,
            "z_score": row.z_score,
            "pass": row.passed(),
        }
    _emit(doc, fmt, out)
    return EXIT_OK if report.passed() else EXIT_VERIFY_FAIL


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vceo",
        description="Sum rate, converse bound, and optimality certificates for the "
        "Gaussian vacationing-CEO problem.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--instance", required=True, help="path to the JSON instance file")
        p.add_argument("--tol", type=float, default=None, help="primary tolerance of the command")
        p.add_argument("--starts", type=int, default=None, help="multistart count")
        p.add_argument("--grid", type=int, default=None, help="grid points per free dimension")
        p.add_argument("--seed", type=int, default=None, help="random seed")
        p.add_argument("--bits", action="store_true", help="render rates in bits")
        p.add_argument(
            "--output",
            choices=("text", "json", "csv"),
            default=None,
            help="output format (csv applies to sweep only)",
        )

    for name in ("sum-rate", "lower-bound", "verify", "mc-check"):
        common(sub.add_parser(name))
    sweep = sub.add_parser("sweep")
    common(sweep)
    sweep.add_argument("--var", required=True, choices=SWEEP_VARS)
    sweep.add_argument("--start", required=True, type=float)
    sweep.add_argument("--stop", required=True, type=float)
    sweep.add_argument("--steps", required=True, type=int)
    sub.choices["mc-check"].add_argument(
        "--n", type=int, default=10**6, help="Monte-Carlo sample count"
    )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = sys.stdout
    try:
        spec = load_instance(args.instance)
    except InstanceParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    opts = _merged_options(spec, args)
    fmt = args.output or ("csv" if args.command == "sweep" else "text")
    if fmt == "csv" and args.command != "sweep":
        print("error: csv output is only available for sweep", file=sys.stderr)
        return EXIT_PARSE
    try:
        if args.command == "sum-rate":
            return cmd_sum_rate(spec, opts, fmt, out)
        if args.command == "lower-bound":
            return cmd_lower_bound(spec, opts, fmt, out)
        if args.command == "verify":
            identity_tol = args.tol if args.tol is not None else 1e-9
            return cmd_verify(spec, opts, fmt, out, identity_tol)
        if args.command == "sweep":
            return cmd_sweep(spec, opts, out, args.var, args.start, args.stop, args.steps)
        if args.command == "mc-check":
            return cmd_mc_check(spec, opts, fmt, out, args.n)
        raise AssertionError(f"unhandled command {args.command!r}")
    except InfeasibleTargetsError as e:
        print(f"error: infeasible targets: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InvalidParamsError as e:
        print(f"error: invalid instance: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InstanceParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
