"""``bbmbore`` command-line interface."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .bore import State
from .config import load_config
from .errors import BBMError, ConfigurationError, DomainError
from .experiments import (
    EXIT_CODES,
    _jsonable,
    convergence_dt,
    convergence_m,
    execute,
    run_record,
    sweep_eps,
)
from .littlewood_paley import BesovSpec, EnergyWeights, besov_norm, build_partition, e_norm, stacked_norm
from .spectral import Field, read_field_binary, read_field_csv, write_field_binary, write_field_csv
from .svg import line_plot
from .verify import CHECKS, run_suite

__all__ = ["main", "build_parser"]


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # Accepted both before and after the subcommand; the subparser copy must not clobber.
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, default=d(None), help="run config (.toml or .json)")
    p.add_argument("--out", type=Path, default=d(None), help="output directory")
    p.add_argument("--threads", type=int, default=d(1), help="worker processes for sweeps")
    p.add_argument("--seed", type=int, default=d(0), help="seed for init.noise")
    p.add_argument("--quiet", action="store_true", default=d(False), help="no progress output")
    return p


def _floats(text: str) -> float:
    v = float(text)
    if not math.isfinite(v) or v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bbmbore", parents=[_global_flags(False)],
                                     description="BBM-type Boussinesq bore experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    flags = _global_flags(True)

    sub.add_parser("run", parents=[flags], help="single run from a config")

    p = sub.add_parser("sweep-eps", parents=[flags], help="T*(eps) sweep with log-log fit")
    p.add_argument("--eps", type=_floats, nargs="+", required=True)
    p.add_argument("--horizon", type=_floats, default=1.0, help="runs end at horizon/eps")

    p = sub.add_parser("conv-dt", parents=[flags], help="time-step self-convergence")
    p.add_argument("--dt", type=_floats, nargs="+", required=True)
    p.add_argument("--ref-divisor", type=int, default=16)

    p = sub.add_parser("conv-m", parents=[flags], help="Friedrichs cutoff convergence")
    p.add_argument("--m", type=_floats, nargs="+", required=True)

    p = sub.add_parser("norms", parents=[flags], help="norms of field files (.csv or .bin)")
    p.add_argument("--eta", type=Path, required=True)
    p.add_argument("--velocity", type=Path, nargs="*", default=[])
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--p", choices=["2", "inf"], default="2")
    p.add_argument("--r", default="2")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--b", type=float, default=1 / 6)
    p.add_argument("--d", type=float, default=1 / 6)

    p = sub.add_parser("verify", parents=[flags], help="invariant suite, JSON summary")
    p.add_argument("--inject-fault", action="append", default=[], choices=sorted(CHECKS),
                   help="corrupt the inputs of a named check (self-test of the suite)")
    return parser


class _Out:
    def __init__(self, args):
        self.dir = args.out
        self.quiet = args.quiet
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def log(self, msg: str) -> None:
        if not self.quiet:
            print(msg, file=sys.stderr)

    def write(self, name: str, text: str) -> None:
        if self.dir is not None:
            (self.dir / name).write_text(text)

    def path(self, name: str):
        return None if self.dir is None else self.dir / name


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _need_config(args):
    if args.config is None:
        raise ConfigurationError("required for this subcommand", "--config")
    return load_config(args.config)


def _line(f: Field):
    g = f.grid
    if g.dim == 1:
        return g.axis(0), f.samples
    return g.axis(0), f.samples[:, g.points[1] // 2]


def cmd_run(args, out: _Out) -> int:
    cfg = _need_config(args)
    out.log(f"run: pipeline={cfg.pipeline} grid={cfg.grid.points} eps={cfg.params.eps}")
    res = execute(cfg, args.seed)
    rec = run_record(cfg, res)
    print(_dump(rec), end="")
    out.write("record.json", _dump(rec))
    out.write("ledger.csv", res.ledger.to_csv())
    led = res.ledger
    out.write("U_s.svg", line_plot({"U_s": (led.t, led.column("U_s"))}, title="U_s(t)",
                                   xlabel="t", ylabel="U_s"))
    eta = res.final.eta
    x, y = _line(eta)
    out.write("eta_final.svg", line_plot({f"eta(t={res.t_final:g})": (x, y)}, title="final eta",
                                         xlabel="x", ylabel="eta"))
    if out.dir is not None:
        write_field_csv(eta, out.path("eta_final.csv"))
        if res.checkpoints:
            cdir = out.dir / "checkpoints"
            cdir.mkdir(exist_ok=True)
            for i, (t, st) in enumerate(res.checkpoints):
                write_field_binary(st.eta, cdir / f"eta_{i:05d}.bin")
    out.log(f"run: {res.reason} at t={res.t_final:g}")
    return EXIT_CODES[res.reason]


def cmd_sweep(args, out: _Out) -> int:
    cfg = _need_config(args)
    out.log(f"sweep-eps: {sorted(args.eps, reverse=True)} threads={args.threads}")
    sw = sweep_eps(cfg, args.eps, threads=args.threads, horizon=args.horizon, seed=args.seed)
    out.write("sweep.csv", sw.to_csv())
    for r in sw.rows:
        out.write(f"ledger_eps_{r['eps']:g}.csv", r["ledger_csv"])
    fit = "n/a" if sw.slope is None else {"slope": sw.slope, "intercept": sw.intercept}
    summary = {"rows": [{k: v for k, v in r.items() if k != "ledger_csv"} for r in sw.rows],
               "fit": fit}
    print(_dump(summary), end="")
    out.write("sweep.json", _dump(summary))
    inv = [1 / r["eps"] for r in sw.rows]
    series = {"T* (or horizon)": (inv, [r["t_star"] for r in sw.rows]),
              "horizon 1/eps": (inv, [r["horizon"] for r in sw.rows])}
    out.write("sweep.svg", line_plot(series, title="T*(eps)", xlabel="1/eps", ylabel="t",
                                     logx=True, logy=True, markers=True))
    return 0


def cmd_conv_dt(args, out: _Out) -> int:
    cfg = _need_config(args)
    res = convergence_dt(cfg, args.dt, ref_divisor=args.ref_divisor, seed=args.seed)
    print(_dump(res), end="")
    out.write("conv_dt.json", _dump(res))
    out.write("conv_dt.csv", "dt,error\n" + "".join(f"{a!r},{b!r}\n" for a, b in
                                                    zip(res["dt"], res["error"])))
    out.write("conv_dt.svg", line_plot({"error": (res["dt"], res["error"])}, title="dt convergence",
                                       xlabel="dt", ylabel="error", logx=True, logy=True,
                                       markers=True))
    return 0


def cmd_conv_m(args, out: _Out) -> int:
    cfg = _need_config(args)
    res = convergence_m(cfg, args.m, seed=args.seed)
    print(_dump(res), end="")
    out.write("conv_m.json", _dump(res))
    out.write("conv_m.csv", "m,difference\n" + "".join(f"{a!r},{b!r}\n" for a, b in
                                                       zip(res["m"], res["difference"])))
    out.write("conv_m.svg", line_plot({"|sol(m)-sol(2m)|": (res["m"], res["difference"])},
                                      title="Friedrichs convergence", xlabel="m",
                                      ylabel="difference", logx=True, logy=True, markers=True))
    return 0


def _read_field(path: Path) -> Field:
    try:
        if path.suffix.lower() == ".bin":
            return read_field_binary(path)
        return read_field_csv(path)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read field: {exc}", str(path)) from exc


def cmd_norms(args, out: _Out) -> int:
    eta = _read_field(args.eta)
    V = tuple(_read_field(p) for p in args.velocity)
    if V and len(V) != eta.grid.dim:
        raise ConfigurationError(f"need {eta.grid.dim} velocity components", "--velocity")
    if any(v.grid != eta.grid for v in V):
        raise ConfigurationError("velocity grid differs from eta grid", "--velocity")
    V = V or tuple(Field.zeros(eta.grid) for _ in range(eta.grid.dim))
    r = math.inf if args.r == "inf" else float(args.r)
    p = math.inf if args.p == "inf" else 2
    part = build_partition(eta.grid)
    state = State(eta, V)
    w = EnergyWeights(args.b, args.d, args.eps, args.s)
    reports = [besov_norm(eta, BesovSpec(args.s, p, r), part, report=True),
               stacked_norm(state, w, part, r, report=True),
               e_norm(state, w, part, r, report=True)]
    text = "".join(json.dumps(_jsonable(json.loads(rep.to_json())), sort_keys=True) + "\n"
                   for rep in reports)
    print(text, end="")
    out.write("norms.jsonl", text)
    return 0


def cmd_verify(args, out: _Out) -> int:
    results = run_suite(args.inject_fault)
    summary = {"passed": all(r.passed for r in results),
               "checks": [r.as_dict() for r in results],
               "injected_faults": sorted(args.inject_fault)}
    print(_dump(summary), end="")
    out.write("verify.json", _dump(summary))
    for r in results:
        if not r.passed:
            out.log(f"verify: FAIL {r.name} value={r.value:.3g} limit={r.limit:.3g}")
    return 0 if summary["passed"] else 1


COMMANDS = {"run": cmd_run, "sweep-eps": cmd_sweep, "conv-dt": cmd_conv_dt,
            "conv-m": cmd_conv_m, "norms": cmd_norms, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = _Out(args)
        return COMMANDS[args.command](args, out)
    except (ConfigurationError, DomainError) as exc:
        print(f"bbmbore: config error: {exc}", file=sys.stderr)
        return 1
    except BBMError as exc:
        print(f"bbmbore: error: {exc}", file=sys.stderr)
        return 1

