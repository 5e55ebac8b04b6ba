#!/usr/bin/env python3
"""Plot the CSV files written by `corp simulate`.

usage: plot_outputs.py OUT_DIR [--save PREFIX]
"""
import argparse
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd


def plot_tracking(out: Path, ax):
    errors = pd.read_csv(out / "errors.csv")
    flow = errors[errors["phase"] != "pre_jump"]
    for col in flow.columns[2:]:
        ax.plot(flow["t"], flow[col], label=col)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("tracking error")
    ax.legend()


def plot_microgrid(out: Path, axes):
    dispatch = pd.read_csv(out / "dispatch.csv")
    freq = pd.read_csv(out / "frequency.csv")
    for col in [c for c in dispatch.columns if c.startswith("lambda")]:
        axes[0].plot(dispatch["t"], dispatch[col], label=col)
    axes[0].set_ylabel("incremental cost")
    axes[0].legend()
    axes[1].plot(dispatch["t"], dispatch["sum_p_r"], label="sum P_r")
    axes[1].plot(dispatch["t"], dispatch["p_main"], "--", label="demand")
    axes[1].legend()
    for col in freq.columns[1:]:
        axes[2].plot(freq["t"], freq[col], label=col)
    axes[2].set_ylabel("frequency [Hz]")
    axes[2].set_xlabel("t [s]")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", type=Path)
    ap.add_argument("--save", help="write PNGs with this prefix instead of showing")
    args = ap.parse_args()
    if (args.out / "errors.csv").exists():
        fig, ax = plt.subplots()
        plot_tracking(args.out, ax)
    else:
        fig, axes = plt.subplots(3, 1, sharex=True)
        plot_microgrid(args.out, axes)
    if args.save:
        fig.savefig(f"{args.save}.png", dpi=120)
    else:
        plt.show()


if __name__ == "__main__":
    main()
