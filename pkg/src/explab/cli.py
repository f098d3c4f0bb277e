"""explab command line: regions, bounds, sweeps, closed forms, optimization, diversity, simulation.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .bounds import (
    bound_sweep,
    bpsk_region3_closed,
    gauss_region1_closed,
    gauss_region2_closed,
    gauss_region3_closed,
    gauss_region3_linear_approx,
    gauss_region_bounds,
    master_bound,
    mary_region1_closed,
    mary_region2_closed,
    random_coding_exponent,
)
from .channel import (
    SNR_REFERENCES,
    ChannelPoint,
    PowerConstraint,
    bits_to_nats,
    constellation_from_json,
    db_to_eta,
    nats_to_bits,
)
from .distopt import OptimizationProblem, optimize_er, optimize_q_for_rho
from .diversity import profile
from .ensemble import SimConfig, messages_for_rate, simulate_ensemble
from .errors import QuadratureError, ValidationError
from .exponents import region_report

COMMANDS = ("regions", "bound", "sweep", "closed-forms", "optimize", "diversity", "simulate")
SWEEP_COLUMNS = ("snr_db", "eta", "region", "rho_opt", "exponent_nats", "log10_pe", "pe_capped", "status")


@dataclass(frozen=True)
class RunConfig:
    command: str
    constellation: object = None
    n: float = math.nan
    rate: float = math.nan
    rate_unit: str = "nats"
    snr_db_range: tuple = ()
    output: str = "json"
    out_path: str | None = None
    snr_ref: str = "eta"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"command: expected one of {COMMANDS}")
        if self.snr_db_range:
            start, stop, step = self.snr_db_range
            if not step > 0:
                raise ValidationError("snr-db: step must be positive")
            if stop < start:
                raise ValidationError("snr-db: stop must be >= start")
        if not math.isnan(self.rate) and not self.rate > 0:
            raise ValidationError("rate: must be positive")

    @property
    def rate_nats(self) -> float:
        return bits_to_nats(self.rate) if self.rate_unit == "bits" else self.rate

    @property
    def rate_bits(self) -> float:
        return self.rate if self.rate_unit == "bits" else nats_to_bits(self.rate)

    def snr_points(self):
        """(dB, eta) pairs over the configured range, endpoints included."""
        start, stop, step = self.snr_db_range
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        dbs = [round(start + k * step, 10) for k in range(count)]
        return [(d, db_to_eta(d, self.snr_ref, self.rate_bits)) for d in dbs]


def parse_snr_range(text: str) -> tuple:
    parts = text.split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise ValidationError(f"snr-db: cannot parse {text!r}") from None
    if len(vals) == 1:
        return (vals[0], vals[0], 1.0)
    if len(vals) != 3:
        raise ValidationError("snr-db: expected a value or start:stop:step")
    return tuple(vals)


def _load_json_arg(text: str, what: str):
    """JSON given inline or as @path."""
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ValidationError(f"{what}: cannot read {exc.filename}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what}: not valid JSON ({exc.msg})") from None


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.generic):
        return _clean(v.item())
    return v


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


class Writer:
    def __init__(self, cfg: RunConfig, meta: dict):
        self.cfg = cfg
        self.meta = meta

    def emit(self, payload, rows=None, columns=None) -> str:
        if self.cfg.output == "csv" and rows is not None:
            buf = io.StringIO()
            meta = " ".join(f"{k}={v}" for k, v in self.meta.items())
            buf.write(f"# explab {__version__} {self.cfg.command} {meta}\n")
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_fmt(r.get(c)) for c in columns])
            text = buf.getvalue()
        else:
            text = json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n"
        if self.cfg.out_path:
            with open(self.cfg.out_path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return text


def _require(cfg: RunConfig, *names):
    for name in names:
        v = getattr(cfg, name)
        if v is None or v == () or (isinstance(v, float) and math.isnan(v)):
            raise ValidationError(f"{name.replace('_', '-')}: required for '{cfg.command}'")


def _point(cfg, c, eta):
    return ChannelPoint.for_constellation(c, cfg.n, cfg.rate_nats, eta)


def _cmd_regions(cfg, args, writer):
    _require(cfg, "constellation", "n", "rate", "snr_db_range")
    c = cfg.constellation
    rows = []
    for db, eta in cfg.snr_points():
        rep = region_report(c, _point(cfg, c, eta))
        rows.append({"snr_db": db, "eta": eta, **rep.to_dict(), "rate_nats": cfg.rate_nats,
                     "region": rep.region_of(cfg.rate_nats).value})
    payload = rows[0] if len(rows) == 1 else rows
    writer.emit(payload, rows, ("snr_db", "eta", "r1_max", "r_crit", "capacity", "rate_nats", "region"))


def _sweep_row(db, res):
    return {
        "snr_db": db,
        "eta": res.eta,
        "region": res.region.value if res.region is not None else "",
        "rho_opt": res.rho_opt,
        "exponent_nats": res.exponent,
        "log10_pe": res.log_pe / math.log(10) + 0.0 if math.isfinite(res.log_pe) else res.log_pe,
        "pe_capped": res.pe_capped,
        "status": res.status if not res.warnings else ";".join((res.status,) + res.warnings),
    }


def _cmd_sweep(cfg, args, writer):
    _require(cfg, "constellation", "n", "rate", "snr_db_range")
    pts = cfg.snr_points()
    results = bound_sweep(cfg.constellation, cfg.n, cfg.rate_nats, [e for _, e in pts])
    rows = [_sweep_row(db, r) for (db, _), r in zip(pts, results)]
    for r in results:
        for w in r.warnings:
            print(f"warning: eta={r.eta:.6g}: {w}", file=sys.stderr)
    writer.emit(rows, rows, SWEEP_COLUMNS)
    if any(r.status != "ok" for r in results):
        return 3
    return 0


def _cmd_bound(cfg, args, writer):
    _require(cfg, "constellation", "n", "rate", "snr_db_range")
    c = cfg.constellation
    rows = []
    for db, eta in cfg.snr_points():
        res = master_bound(c, _point(cfg, c, eta))
        rows.append(_sweep_row(db, res))
    writer.emit(rows[0] if len(rows) == 1 else rows, rows, SWEEP_COLUMNS)


def _closed_form_rows(cfg, args, db, eta):
    c = cfg.constellation
    n, R = cfg.n, cfg.rate_nats
    out = []

    def attempt(fn):
        try:
            cf = fn()
            name = cf.name if fn.label == cf.name else f"{fn.label}:{cf.name}"
            out.append({"snr_db": db, "eta": eta, "name": name, "log_pe": cf.log_pe,
                        "log10_pe": cf.log_pe / math.log(10), "rho": cf.rho, "status": "ok"})
        except ValidationError as exc:
            out.append({"snr_db": db, "eta": eta, "name": fn.label, "log_pe": math.nan,
                        "log10_pe": math.nan, "rho": math.nan, "status": f"invalid: {exc}"})

    def labelled(label, fn):
        fn.label = label
        return fn

    point = ChannelPoint(n, R, eta)
    if not c.is_discrete:
        attempt(labelled("gauss_region_bounds", lambda: gauss_region_bounds(point)))
        attempt(labelled("gauss_region1", lambda: gauss_region1_closed(point)))
        attempt(labelled("gauss_region2", lambda: gauss_region2_closed(point)))
        attempt(labelled("gauss_region3", lambda: gauss_region3_closed(point)))
        attempt(labelled("gauss_region3_linear_approx",
                         lambda: gauss_region3_linear_approx(point, args.fit_a, args.fit_b)))
        return out
    if c.kind != "psk":
        raise ValidationError("constellation.type: closed forms exist for psk and gaussian only")
    M = c.order
    attempt(labelled("mary_region1", lambda: mary_region1_closed(point, M, args.k)))
    attempt(labelled("mary_region2", lambda: mary_region2_closed(point, M, args.k)))
    if M == 2:
        attempt(labelled("bpsk_region3_low_snr", lambda: bpsk_region3_closed(point, "low")))
        attempt(labelled("bpsk_region3_high_snr", lambda: bpsk_region3_closed(point, "high")))
    return out


def _cmd_closed_forms(cfg, args, writer):
    _require(cfg, "constellation", "n", "rate", "snr_db_range")
    rows = []
    for db, eta in cfg.snr_points():
        rows.extend(_closed_form_rows(cfg, args, db, eta))
    writer.emit(rows, rows, ("snr_db", "eta", "name", "rho", "log_pe", "log10_pe", "status"))


def _cmd_optimize(cfg, args, writer):
    if args.problem:
        problem = OptimizationProblem.from_json(_load_json_arg(args.problem, "problem"))
    else:
        if args.avg_power is None:
            raise ValidationError("avg-power: required (the average-power budget has no default)")
        _require(cfg, "rate", "snr_db_range")
        if cfg.snr_db_range[0] != cfg.snr_db_range[1]:
            raise ValidationError("snr-db: optimize takes a single SNR")
        grid = _load_json_arg(args.grid, "grid")
        eta = db_to_eta(cfg.snr_db_range[0], cfg.snr_ref, cfg.rate_bits)
        peak = math.inf if args.peak_amplitude is None else args.peak_amplitude
        problem = OptimizationProblem(tuple(grid), PowerConstraint(args.avg_power, peak), cfg.rate_nats,
                                      args.avg_power / eta)
    if args.rho is not None:
        sol = optimize_q_for_rho(problem, args.rho)
        payload = {"probs": list(sol.probs), "rho": sol.rho, "e0": sol.e0, "kkt_residual": sol.residual,
                   "converged": sol.converged, "iterations": sol.iterations}
        converged = sol.converged
    else:
        res = optimize_er(problem)
        payload = res.to_json()
        converged = res.converged
    payload["problem"] = problem.to_json()
    if not converged:
        print("warning: optimizer did not converge; returning best iterate", file=sys.stderr)
    rows = [{"point": list(p), "prob": float(q)} for p, q in zip(problem.grid, payload["probs"])]
    writer.emit(payload, rows, ("point", "prob"))


def _read_samples(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    fields = reader.fieldnames or []
    out = []
    for row in reader:
        if "eta" in fields and "log_pe" in fields:
            out.append((float(row["eta"]), float(row["log_pe"])))
        elif "eta" in fields and "log10_pe" in fields:
            out.append((float(row["eta"]), float(row["log10_pe"]) * math.log(10)))
        else:
            raise ValidationError("samples: need columns eta and log_pe (or log10_pe)")
    return out


def _cmd_diversity(cfg, args, writer):
    if args.samples:
        samples = _read_samples(args.samples)
        n = cfg.n if not math.isnan(cfg.n) else 1.0
    else:
        _require(cfg, "constellation", "n", "rate", "snr_db_range")
        results = bound_sweep(cfg.constellation, cfg.n, cfg.rate_nats, [e for _, e in cfg.snr_points()])
        samples = [(r.eta, r.log_pe) for r in results if r.status == "ok"]
        n = cfg.n
    prof = profile(samples, args.window, n)
    rows = prof.to_rows()
    payload = {"window": prof.window, "n": prof.n, "classification": list(prof.classification), "rows": rows}
    writer.emit(payload, rows, ("eta", "log_pe", "slope_semilog", "slope_loglog", "window", "classification"))


def _cmd_simulate(cfg, args, writer):
    _require(cfg, "constellation", "n", "rate", "snr_db_range")
    c = cfg.constellation
    if cfg.snr_db_range[0] != cfg.snr_db_range[1]:
        raise ValidationError("snr-db: simulate takes a single SNR")
    eta = db_to_eta(cfg.snr_db_range[0], cfg.snr_ref, cfg.rate_bits)
    n = int(cfg.n)
    M = args.messages or messages_for_rate(n, cfg.rate_nats)
    sim_cfg = SimConfig(n, M, args.codebooks, args.draws, args.seed)
    point = _point(cfg, c, eta)
    res = simulate_ensemble(c, c.pmf, point, sim_cfg)
    rho, er = random_coding_exponent(c, point.sigma2, point.R)
    payload = {**res.to_dict(), "num_messages": M, "eta": eta,
               "random_coding_bound": min(1.0, math.exp(-n * er)), "rho_opt": rho}
    writer.emit(payload, [payload], ("eta", "num_messages", "trials", "errors", "pe_hat", "ci95_halfwidth",
                                     "random_coding_bound"))


HANDLERS = {
    "regions": _cmd_regions,
    "bound": _cmd_bound,
    "sweep": _cmd_sweep,
    "closed-forms": _cmd_closed_forms,
    "optimize": _cmd_optimize,
    "diversity": _cmd_diversity,
    "simulate": _cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--constellation", help="constellation JSON, inline or @file")
    common.add_argument("--n", type=float, help="block length")
    common.add_argument("--rate", type=float)
    common.add_argument("--rate-unit", choices=("bits", "nats"), default="nats")
    common.add_argument("--snr-db", help="dB value or start:stop:step")
    common.add_argument("--snr-ref", choices=SNR_REFERENCES, default="eta",
                        help="what the dB axis measures (default: eta = Es/sigma^2)")
    common.add_argument("--output", choices=("csv", "json"))
    common.add_argument("--out", help="output file (default stdout)")

    p = argparse.ArgumentParser(prog="explab", description="Gallager-bound toolkit for AWGN channels")
    p.add_argument("--version", action="version", version=f"explab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("regions", parents=[common], help="critical rates and region label")
    sub.add_parser("bound", parents=[common], help="master bound at one or more SNRs")
    sub.add_parser("sweep", parents=[common], help="master bound over an SNR range (CSV)")
    cf = sub.add_parser("closed-forms", parents=[common], help="per-region closed-form bounds")
    cf.add_argument("--k", type=float, default=1.0, help="K in the M-ary closed forms")
    cf.add_argument("--fit-a", type=float, default=-0.37)
    cf.add_argument("--fit-b", type=float, default=0.23)
    op = sub.add_parser("optimize", parents=[common], help="optimize the input pmf on a grid")
    op.add_argument("--problem", help="OptimizationProblem JSON, inline or @file")
    op.add_argument("--grid", default=json.dumps(list(range(-10, 11))), help="JSON list of grid points")
    op.add_argument("--avg-power", type=float)
    op.add_argument("--peak-amplitude", type=float)
    op.add_argument("--rho", type=float, help="solve the inner problem at this rho only")
    dv = sub.add_parser("diversity", parents=[common], help="local slopes and decay classes")
    dv.add_argument("--samples", help="CSV with eta and log_pe (or log10_pe) columns")
    dv.add_argument("--window", type=int, default=7)
    sm = sub.add_parser("simulate", parents=[common], help="random-coding Monte Carlo")
    sm.add_argument("--messages", type=int)
    sm.add_argument("--codebooks", type=int, default=200)
    sm.add_argument("--draws", type=int, default=500)
    sm.add_argument("--seed", type=int, default=0)
    return p


def config_from_args(args) -> RunConfig:
    c = None
    if args.constellation is not None:
        c = constellation_from_json(_load_json_arg(args.constellation, "constellation"))
    n = math.nan
    if args.n is not None:
        if not (args.n >= 1 and float(args.n).is_integer()):
            raise ValidationError("n: must be a positive integer")
        n = int(args.n)
    default_out = "csv" if args.command in ("sweep", "closed-forms", "diversity") else "json"
    return RunConfig(
        command=args.command,
        constellation=c,
        n=n,
        rate=math.nan if args.rate is None else args.rate,
        rate_unit=args.rate_unit,
        snr_db_range=parse_snr_range(args.snr_db) if args.snr_db else (),
        output=args.output or default_out,
        out_path=args.out,
        snr_ref=args.snr_ref,
    )


def run(config: RunConfig, args=None) -> int:
    meta = {"snr_ref": config.snr_ref}
    if config.constellation is not None:
        meta["constellation"] = json.dumps(config.constellation.to_json(), separators=(",", ":"))
    if not math.isnan(config.n):
        meta["n"] = config.n
    if not math.isnan(config.rate):
        meta.update(rate=config.rate, rate_unit=config.rate_unit)
    if config.snr_db_range:
        meta["snr_db"] = ":".join(repr(v) for v in config.snr_db_range)
    code = HANDLERS[config.command](config, args, Writer(config, meta))
    return code or 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return run(cfg, args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
