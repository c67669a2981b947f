"""Command-line front end.

    qpolygamy scan --check subadd --q 2 --dims 2,2 --samples 100 --seed 7

Settings come from built-in defaults, then an optional JSON config file
(--config), then flags; later sources win. Exit status: 0 when every
verdict is verified (or the command produces none), 2 when any is
violated, 3 when any is inconclusive and none violated, 1 on errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .ccq import build_ccq, closed_form_Iq, direct_Iq, verify_closed_forms
from .entropy import renyi_entropy, tsallis_quantum
from .inequalities import (
    CHECKS,
    DEFAULT_Q_GRID,
    ROOF_TOL,
    ScanConfig,
    Verdict,
    monogamy_check_multiqubit,
    sample_seed,
    scan,
    subadditivity_gap,
    theorem1_check,
)
from .report import ReportRecord, atomic_write, emit_table
from .roof import (
    OptimizerBudget,
    PureFunctional,
    concave_roof,
    convex_roof,
    renyi,
    tsallis,
    unlocalizable_q_entanglement,
)
from .states import (
    DensityMatrix,
    PureState,
    check_dims,
    haar_random_pure,
    random_density,
    state_from_record,
)

COMMANDS = ("entropy", "ccq-verify", "roof", "uq", "scan", "theorem1", "monogamy")
FORMATS = ("json-lines", "csv")
EXIT_OK, EXIT_ERROR, EXIT_VIOLATED, EXIT_INCONCLUSIVE = 0, 1, 2, 3

DEFAULT_DIMS = {
    "entropy": (2, 2),
    "ccq-verify": (2, 2),
    "roof": (2, 2),
    "uq": (2, 2),
    "scan": (2, 2),
    "theorem1": (2, 2, 2),
    "monogamy": (2, 2, 2),
}
CLOSED_FORM_TOL = 1e-9


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    q_values: tuple[float, ...] = (2.0,)
    dims: tuple[int, ...] = (2, 2)
    samples: int = 1
    seed: int = 0
    tolerance: float | None = None
    budget: OptimizerBudget = field(default_factory=OptimizerBudget)
    input_state: str | None = None
    out: str = "-"
    format: str = "json-lines"
    check: str | None = None
    roof: str = "convex"
    measure: str = "tsallis"
    cut: tuple[int, ...] = (0,)
    workers: int = 1

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        d["q_values"] = list(self.q_values)
        d["dims"] = list(self.dims)
        d["cut"] = list(self.cut)
        return d


# --- parsing -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qpolygamy", description="Tsallis-q entanglement inequalities on quantum states.")
    S = argparse.SUPPRESS
    p.add_argument("command", nargs="?", default=None, help=", ".join(COMMANDS))
    p.add_argument("--config", default=S, help="JSON file with RunConfig fields")
    p.add_argument("--q", dest="q_values", type=_float_list, default=S, help="comma-separated q values")
    p.add_argument("--dims", type=_int_list, default=S, help="comma-separated local dimensions")
    p.add_argument("--samples", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--tolerance", type=float, default=S)
    p.add_argument("--state", dest="input_state", default=S, help="state file (JSON record)")
    p.add_argument("--out", default=S, help="report path, '-' for stdout")
    p.add_argument("--format", default=S, help="json-lines or csv")
    p.add_argument("--check", default=S, help=f"scan check: {', '.join(sorted(CHECKS))}")
    p.add_argument("--roof", default=S, help="convex or concave (roof command)")
    p.add_argument("--measure", default=S, help="tsallis or renyi (roof and monogamy commands)")
    p.add_argument("--cut", type=_int_list, default=S, help="subsystems on the cut side")
    p.add_argument("--workers", type=int, default=S)
    p.add_argument("--restarts", type=int, default=S)
    p.add_argument("--samples-per-restart", dest="samples_per_restart", type=int, default=S)
    p.add_argument("--refine-steps", dest="refine_steps", type=int, default=S)
    p.add_argument("--optimizer-seed", dest="optimizer_seed", type=int, default=S)
    return p


_BUDGET_KEYS = {
    "restarts": "restarts",
    "samples_per_restart": "samples_per_restart",
    "refine_steps": "refine_steps",
    "optimizer_seed": "seed",
}
_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def _load_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
    return data


def _budget_from(raw, overrides: dict) -> OptimizerBudget:
    fields = {}
    if raw is not None:
        if not isinstance(raw, dict):
            raise ConfigError("invalid value for budget: expected an object")
        allowed = {f.name for f in dataclasses.fields(OptimizerBudget)}
        bad = sorted(set(raw) - allowed)
        if bad:
            raise ConfigError(f"unknown budget field(s): {', '.join(bad)}")
        fields.update(raw)
    for flag, name in _BUDGET_KEYS.items():
        if flag in overrides:
            fields[name] = overrides[flag]
    try:
        return OptimizerBudget(**fields)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value for budget: {exc}")


def _as_tuple(value, kind, name):
    if isinstance(value, str):
        value = value.split(",")
    if not isinstance(value, (list, tuple)):
        value = [value]
    try:
        return tuple(kind(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for {name}: {value!r}")


def parse_config(argv: list[str] | None = None) -> RunConfig:
    """Validated RunConfig from flags and an optional --config file."""
    ns, unknown = build_parser().parse_known_args(argv)
    if unknown:
        raise ConfigError(f"unknown flag(s): {' '.join(unknown)}")
    args = {k: v for k, v in vars(ns).items() if not (k == "command" and v is None)}
    merged = _load_file(args.pop("config")) if "config" in args else {}
    budget_flags = {k: args.pop(k) for k in list(args) if k in _BUDGET_KEYS}
    merged.update(args)

    if "command" not in merged:
        raise ConfigError("missing required field: command")
    command = merged["command"]
    if command not in COMMANDS:
        raise ConfigError(f"invalid value for command: {command!r}; choose from {', '.join(COMMANDS)}")

    q_values = _as_tuple(merged.get("q_values", (2.0,)), float, "q_values")
    if not q_values or any(not q > 0 for q in q_values):
        raise ConfigError(f"invalid value for q_values: every q must be positive, got {list(q_values)}")
    dims = _as_tuple(merged.get("dims", DEFAULT_DIMS[command]), int, "dims")
    try:
        dims = check_dims(dims)
    except ValueError as exc:
        raise ConfigError(f"invalid value for dims: {exc}")
    samples = merged.get("samples", 1)
    if not isinstance(samples, int) or samples < 1:
        raise ConfigError(f"invalid value for samples: must be an integer >= 1, got {samples!r}")
    seed = merged.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"invalid value for seed: must be a nonnegative integer, got {seed!r}")
    tol = merged.get("tolerance")
    if tol is not None and (not isinstance(tol, (int, float)) or not tol > 0):
        raise ConfigError(f"invalid value for tolerance: must be positive, got {tol!r}")
    fmt = merged.get("format", "json-lines")
    if fmt not in FORMATS:
        raise ConfigError(f"invalid value for format: {fmt!r}; choose from {', '.join(FORMATS)}")
    roof = merged.get("roof", "convex")
    if roof not in ("convex", "concave"):
        raise ConfigError(f"invalid value for roof: {roof!r}; choose convex or concave")
    measure = merged.get("measure", "tsallis")
    if measure not in ("tsallis", "renyi", "tangle"):
        raise ConfigError(f"invalid value for measure: {measure!r}; choose tsallis, renyi or tangle")
    workers = merged.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError(f"invalid value for workers: must be an integer >= 1, got {workers!r}")
    check = merged.get("check")
    if command == "scan":
        if check is None:
            raise ConfigError("missing required field: check (needed by scan)")
        if check not in CHECKS:
            raise ConfigError(f"invalid value for check: {check!r}; choose from {', '.join(sorted(CHECKS))}")
        if "q_values" not in merged:
            q_values = _default_grid(check, dims)
    if command in ("roof", "uq") and merged.get("input_state") is None:
        raise ConfigError(f"missing required field: input_state (--state, needed by {command})")

    return RunConfig(
        command=command,
        q_values=q_values,
        dims=dims,
        samples=samples,
        seed=seed,
        tolerance=None if tol is None else float(tol),
        budget=_budget_from(merged.get("budget"), budget_flags),
        input_state=merged.get("input_state"),
        out=str(merged.get("out", "-")),
        format=fmt,
        check=check,
        roof=roof,
        measure=measure,
        cut=_as_tuple(merged.get("cut", (0,)), int, "cut"),
        workers=workers,
    )


def _default_grid(check: str, dims) -> tuple[float, ...]:
    """The default q grid restricted to the values the check accepts."""
    keep = []
    for q in DEFAULT_Q_GRID:
        try:
            ScanConfig(check, dims, (q,), 1)
            keep.append(q)
        except ValueError:
            pass
    return tuple(keep) or DEFAULT_Q_GRID


# --- commands ----------------------------------------------------------------


def _load_state(path: str):
    try:
        with open(path) as fh:
            return state_from_record(json.load(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read state file {path}: {exc.strerror}")
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"cannot parse state file {path}: {exc}")


def _instances(cfg: RunConfig, pure: bool):
    """(sample_index, seed, state): the state file, or random samples."""
    if cfg.input_state is not None:
        yield 0, None, _load_state(cfg.input_state)
        return
    for i in range(cfg.samples):
        s = sample_seed(cfg.seed, i)
        rng = np.random.default_rng(s)
        yield i, s, haar_random_pure(cfg.dims, rng) if pure else random_density(cfg.dims, None, rng)


def _density(state) -> DensityMatrix:
    return state.density() if isinstance(state, PureState) else state


def _item(cfg, q, state, i, seed, gap=None, verdict=None, value=None, **extra):
    return {
        "check": cfg.check or cfg.command,
        "q": q,
        "d": max(state.dims),
        "sample_index": i,
        "gap": gap,
        "verdict": verdict.value if isinstance(verdict, Verdict) else (verdict or "n/a"),
        "seed": seed,
        "value": value,
        **extra,
    }


def _cmd_entropy(cfg: RunConfig):
    items = []
    for i, s, state in _instances(cfg, pure=False):
        rho = _density(state)
        for q in cfg.q_values:
            items.append(_item(cfg, q, rho, i, s, value=tsallis_quantum(rho, q),
                               renyi=renyi_entropy(rho, q)))
    return items, {}


def _cmd_ccq_verify(cfg: RunConfig):
    tol = cfg.tolerance or CLOSED_FORM_TOL
    items = []
    for i, s, state in _instances(cfg, pure=False):
        rho = _density(state)
        if len(rho.dims) != 2:
            raise ConfigError(f"ccq-verify needs a bipartite state, got dims {rho.dims}")
        for q in cfg.q_values:
            closed = closed_form_Iq(rho, q)
            direct = direct_Iq(build_ccq(rho), q)
            dev = verify_closed_forms(rho, q)
            items.append(_item(
                cfg, q, rho, i, s, gap=-dev,
                verdict=Verdict.VERIFIED if dev <= tol else Verdict.VIOLATED,
                value=subadditivity_gap(rho, q),
                deviation=dev, closed_form=list(closed), direct=list(direct),
            ))
    return items, {}


def _functional(cfg: RunConfig, q: float) -> PureFunctional:
    if cfg.measure == "renyi":
        return renyi(q)
    if cfg.measure == "tangle":
        return PureFunctional("tangle")
    return tsallis(q)


def _cmd_roof(cfg: RunConfig):
    items = []
    run = convex_roof if cfg.roof == "convex" else concave_roof
    for i, s, state in _instances(cfg, pure=False):
        for q in cfg.q_values:
            res = run(state, cfg.cut, _functional(cfg, q), cfg.budget)
            items.append(_item(cfg, q, state, i, s, value=res.value, bound=res.bound_direction,
                               converged=res.converged, restarts=res.restarts_used))
    return items, {}


def _cmd_uq(cfg: RunConfig):
    items = []
    for i, s, state in _instances(cfg, pure=False):
        rho = _density(state)
        for q in cfg.q_values:
            res = unlocalizable_q_entanglement(rho, q, cfg.budget)
            items.append(_item(cfg, q, rho, i, s, value=res.value, bound=res.bound_direction,
                               converged=res.converged))
    return items, {}


def _cmd_scan(cfg: RunConfig):
    sc = ScanConfig(cfg.check, cfg.dims, cfg.q_values, cfg.samples, cfg.seed, cfg.budget,
                    cfg.tolerance, cfg.workers)
    report = scan(sc)
    items = [{**row.to_record(), "value": None} for row in report.rows]
    return items, report.to_record()


def _cmd_theorem1(cfg: RunConfig):
    items = []
    for i, s, state in _instances(cfg, pure=True):
        for q in cfg.q_values:
            v = theorem1_check(state, q, cfg.budget, cfg.tolerance or ROOF_TOL)
            items.append(_item(cfg, q, state, i, s, gap=v.gap, verdict=v.verdict, value=v.lhs,
                               rhs=v.rhs, provenance=v.provenance, details=v.to_record()["details"]))
    return items, {}


def _cmd_monogamy(cfg: RunConfig):
    items = []
    for i, s, state in _instances(cfg, pure=True):
        for q in cfg.q_values:
            v = monogamy_check_multiqubit(state, _functional(cfg, q), cfg.budget, cfg.tolerance or ROOF_TOL)
            items.append(_item(cfg, q, state, i, s, gap=v.gap, verdict=v.verdict, value=v.lhs,
                               rhs=v.rhs, provenance=v.provenance, details=v.to_record()["details"]))
    return items, {}


_DISPATCH = {
    "entropy": _cmd_entropy,
    "ccq-verify": _cmd_ccq_verify,
    "roof": _cmd_roof,
    "uq": _cmd_uq,
    "scan": _cmd_scan,
    "theorem1": _cmd_theorem1,
    "monogamy": _cmd_monogamy,
}


def exit_status(record: ReportRecord) -> int:
    verdicts = {it.get("verdict") for it in record.items}
    if Verdict.VIOLATED.value in verdicts:
        return EXIT_VIOLATED
    if Verdict.INCONCLUSIVE.value in verdicts:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def run(cfg: RunConfig) -> ReportRecord:
    """Execute the command and write the report to cfg.out."""
    start = time.perf_counter()
    try:
        items, extra = _DISPATCH[cfg.command](cfg)
    except ConfigError:
        raise
    except (ValueError, IndexError) as exc:
        raise ConfigError(str(exc))
    counts = {v.value: sum(it["verdict"] == v.value for it in items) for v in Verdict}
    summary = {"items": len(items), "counts": counts, **extra}
    record = ReportRecord(
        command=cfg.command,
        config=cfg.echo(),
        items=items,
        summary=summary,
        wall_time=time.perf_counter() - start,
        version=__version__,
        seed=cfg.seed,
    )
    payload = emit_table(record, cfg.format)
    if cfg.out == "-":
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    else:
        atomic_write(cfg.out, payload)
    return record


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
        record = run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return exit_status(record)


if __name__ == "__main__":
    sys.exit(main())
