#!/usr/bin/env python3
"""Render the standard sweeps produced by the uavcov CLI.

Runs the binary for each sweep, keeps the CSV next to the PNG, and plots
with matplotlib. Usage:

    python3 scripts/plot_sweeps.py --bin target/release/uavcov --out plots
"""

import argparse
import csv
import io
import subprocess
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def run(binary, args, out_csv, config=None):
    cmd = [binary, *args]
    if config:
        cmd += ["--config", str(config)]
    text = subprocess.run(cmd, check=True, capture_output=True, text=True).stdout
    out_csv.write_text(text)
    rows = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(rows))))


def column(rows, name):
    return [float(r[name]) if r[name] else float("nan") for r in rows]


def delta_config(out, delta):
    path = out / f"delta_{delta}.toml"
    path.write_text(f"delta = {delta}\n")
    return path


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bin", default="target/release/uavcov")
    ap.add_argument("--out", default="plots", type=Path)
    ap.add_argument("--drops", default="20000")
    args = ap.parse_args()
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    # coverage against the SIR threshold, analytic and simulated
    rows = run(args.bin, ["coverage", "--r0", "200", "--sweep", "epsilon_db:-10:10:21",
                          "--mode", "both", "--drops", args.drops], out / "coverage_vs_threshold.csv")
    x = column(rows, "epsilon_db")
    fig, ax = plt.subplots()
    for name in ["pc1", "pc2", "pc3", "total"]:
        ax.plot(x, column(rows, name), label=name)
    ax.errorbar(x, column(rows, "estimate"), yerr=column(rows, "ci_halfwidth"), fmt="o", label="simulation")
    ax.set(xlabel="SIR threshold (dB)", ylabel="coverage probability")
    ax.legend()
    fig.savefig(out / "coverage_vs_threshold.png", dpi=150)

    # coverage against altitude for several user positions
    fig, ax = plt.subplots()
    for r0 in ["0", "200", "400"]:
        rows = run(args.bin, ["coverage", "--r0", r0, "--sweep", "H:0:1000:41"], out / f"coverage_vs_height_r0_{r0}.csv")
        ax.plot(column(rows, "H"), column(rows, "total"), label=f"r0 = {r0} m")
    ax.set(xlabel="UAV altitude (m)", ylabel="coverage probability")
    ax.legend()
    fig.savefig(out / "coverage_vs_height.png", dpi=150)

    # area fractions against altitude
    fig, ax = plt.subplots()
    for delta in [0.2, 0.8]:
        rows = run(args.bin, ["area-fractions", "--sweep", "H:0:1000:41"],
                   out / f"fractions_vs_height_delta_{delta}.csv", delta_config(out, delta))
        for name, style in [("f1", "-"), ("f2", "--"), ("f3", ":")]:
            ax.plot(column(rows, "H"), column(rows, name), style, label=f"{name}, delta = {delta}")
    ax.set(xlabel="UAV altitude (m)", ylabel="area fraction")
    ax.legend()
    fig.savefig(out / "fractions_vs_height.png", dpi=150)

    # coverage against the cooperation parameter
    fig, ax = plt.subplots()
    for r0 in ["100", "400", "500"]:
        rows = run(args.bin, ["coverage", "--r0", r0, "--sweep", "delta:0:1:21"], out / f"coverage_vs_delta_r0_{r0}.csv")
        ax.plot(column(rows, "delta"), column(rows, "total"), label=f"r0 = {r0} m")
    ax.set(xlabel="cooperation parameter", ylabel="coverage probability")
    ax.legend()
    fig.savefig(out / "coverage_vs_delta.png", dpi=150)

    # scheme comparison against user position
    fig, ax = plt.subplots()
    for scheme in ["proposed", "uav-only", "ground-only"]:
        rows = run(args.bin, ["coverage", "--scheme", scheme, "--sweep", "r0:0:500:26"], out / f"schemes_{scheme}.csv")
        ax.plot(column(rows, "r0"), column(rows, "total"), label=scheme)
    ax.set(xlabel="distance from disc centre (m)", ylabel="coverage probability")
    ax.legend()
    fig.savefig(out / "schemes_vs_position.png", dpi=150)

    # spectral efficiency against the disc radius
    fig, ax = plt.subplots()
    for delta in [0.2, 0.8]:
        rows = run(args.bin, ["nse", "--sweep", "R_c:100:1000:10"], out / f"nse_delta_{delta}.csv", delta_config(out, delta))
        ax.plot(column(rows, "R_c"), column(rows, "nse_proposed"), label=f"proposed, delta = {delta}")
    ax.plot(column(rows, "R_c"), column(rows, "nse_uav_only"), "--", label="uav-only")
    ax.plot(column(rows, "R_c"), column(rows, "nse_ground_only"), ":", label="ground-only")
    ax.set(xlabel="disc radius (m)", ylabel="NSE (nats/s/Hz per BS)")
    ax.legend()
    fig.savefig(out / "nse_vs_radius.png", dpi=150)


if __name__ == "__main__":
    main()
