"""Write the CSV data behind the eight bound figures into an output directory.

    python scripts/reproduce_figures.py --out figures/ [--skip-optimized] [--opt-step 2]

Figures 1-5 are PSK master-bound sweeps, 6-7 compare the grid-optimized
input with Gaussian input, 8 compares the region-3 Gaussian bound with its
linear-rho approximation.  Settings for figures 1 and 3 are not recoverable
from the figures' text, so they are exposed as flags.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import time
from pathlib import Path

import numpy as np

from explab import cli
from explab.bounds import (
    gauss_region3_closed,
    gauss_region3_linear_approx,
    gauss_region3_window,
    master_bound,
)
from explab.channel import ChannelPoint, PowerConstraint, db_to_eta, gaussian_input
from explab.distopt import OptimizationProblem, as_constellation, optimize_er
from explab.exponents import region_report


def psk_sweep(out: Path, name: str, order: int, n: int, rate_bits: float, snr: str, ref: str):
    args = ["sweep", "--constellation", json.dumps({"type": "psk", "order": order}), "--n", str(n),
            "--rate", str(rate_bits), "--rate-unit", "bits", "--snr-db", snr, "--snr-ref", ref,
            "--out", str(out / name)]
    code = cli.main(args)
    print(f"{name}: exit {code}")


def optimized_vs_gaussian(out: Path, name: str, R: float, n: int, avg_power: float, dbs):
    g = gaussian_input()
    grid = tuple(range(-10, 11))
    rows = []
    for db in dbs:
        eta = db_to_eta(db)
        t0 = time.time()
        gres = master_bound(g, ChannelPoint(n, R, eta))
        row = {"snr_db": db, "eta": eta, "gauss_region": gres.region.value,
               "gauss_log10_pe": gres.log_pe / math.log(10)}
        prob = OptimizationProblem(grid, PowerConstraint(avg_power), R, avg_power / eta)
        opt = optimize_er(prob)
        c = as_constellation(prob, opt.probs)
        ores = master_bound(c, ChannelPoint(n, R, eta, prob.sigma2))
        row.update(opt_region=ores.region.value, opt_log10_pe=ores.log_pe / math.log(10),
                   opt_rho=opt.rho_opt, opt_converged=opt.converged,
                   opt_support=int(np.sum(opt.probs > 1e-9)))
        rows.append(row)
        print(f"{name}: {db:5.1f} dB done in {time.time() - t0:.1f} s")
    _write(out / name, rows, f"R={R} n={n} avg_power={avg_power} grid=-10..10")


def gauss_only(out: Path, name: str, R: float, n: int, dbs):
    rows = []
    g = gaussian_input()
    for db in dbs:
        eta = db_to_eta(db)
        res = master_bound(g, ChannelPoint(n, R, eta))
        rows.append({"snr_db": db, "eta": eta, "gauss_region": res.region.value,
                     "gauss_log10_pe": res.log_pe / math.log(10)})
    _write(out / name, rows, f"R={R} n={n} gaussian only")


def region3_approx(out: Path, name: str, R: float, n: int, points: int = 40):
    lo, hi = gauss_region3_window(R)
    rows = []
    for eta in np.linspace(lo * 1.001, hi * 0.999, points):
        p = ChannelPoint(n, R, float(eta))
        exact = gauss_region3_closed(p)
        approx = gauss_region3_linear_approx(p)
        rows.append({"eta": float(eta), "snr_db": 10 * math.log10(eta), "rho_star": exact.rho,
                     "rho_linear": approx.rho, "log10_pe": exact.log_pe / math.log(10),
                     "log10_pe_linear": approx.log_pe / math.log(10)})
    _write(out / name, rows, f"R={R} n={n} region-3 window eta in [{lo:.6g}, {hi:.6g}]")


def _write(path: Path, rows, meta: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {meta}\n")
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {path}")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="figures")
    ap.add_argument("--snr-ref", default="eb_n0", choices=("eta", "es_n0", "eb_n0"),
                    help="dB axis for the PSK figures")
    ap.add_argument("--fig1", default="127,0.5", help="n,rate_bits for figure 1")
    ap.add_argument("--fig3", default="63,0.5", help="n,rate_bits for figure 3")
    ap.add_argument("--avg-power", type=float, default=4.0, help="average-power budget for figures 6-7")
    ap.add_argument("--opt-step", type=float, default=2.0, help="dB step for the optimized-input curves")
    ap.add_argument("--skip-optimized", action="store_true")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    n1, r1 = args.fig1.split(",")
    n3, r3 = args.fig3.split(",")
    psk_sweep(out, "fig1_bpsk.csv", 2, int(n1), float(r1), "0:12:0.25", args.snr_ref)
    psk_sweep(out, "fig2_bpsk_n255.csv", 2, 255, 0.968, "0:12:0.25", args.snr_ref)
    psk_sweep(out, "fig3_bpsk.csv", 2, int(n3), float(r3), "0:12:0.25", args.snr_ref)
    psk_sweep(out, "fig4_8psk_n255.csv", 8, 255, 0.968, "0:20:0.25", args.snr_ref)
    psk_sweep(out, "fig5_16psk_n255.csv", 16, 255, 0.968, "0:25:0.25", args.snr_ref)

    fine = np.round(np.arange(0.0, 25.0001, 0.25), 10)
    coarse = np.round(np.arange(0.0, 25.0001, args.opt_step), 10)
    for name, R in (("fig6_optimized_R0175.csv", 0.175), ("fig7_optimized_R08.csv", 0.8)):
        if args.skip_optimized:
            gauss_only(out, name, R, 50, fine)
        else:
            optimized_vs_gaussian(out, name, R, 50, args.avg_power, coarse)
    region3_approx(out, "fig8_region3_approx.csv", 1.0, 50)
    rep = region_report(gaussian_input(), ChannelPoint(50, 1.0, 10.0))
    print("gaussian thresholds at eta=10:", rep.to_dict())


if __name__ == "__main__":
    main()
