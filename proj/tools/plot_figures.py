#!/usr/bin/env python3
"""Plot the CSVs written by tools/figures.sh (needs numpy and matplotlib)."""
import argparse
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def read_csv(path):
    return np.genfromtxt(path, delimiter=",", names=True)


def read_meta(path):
    meta = {}
    for line in pathlib.Path(path).read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            meta[k.strip()] = v.strip()
    return meta


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("data", nargs="?", default="figures")
    args = ap.parse_args()
    d = pathlib.Path(args.data)

    fig_e, ax_e = plt.subplots(1, 2, figsize=(10, 5))
    fig_d, ax_d = plt.subplots(1, 2, figsize=(10, 4))
    fig_f, ax_f = plt.subplots(1, 2, figsize=(10, 4))
    for i, model in enumerate("ab"):
        eig = read_csv(d / f"eigs_model_{model}.csv")
        dens = read_csv(d / f"density_model_{model}.csv")
        rho = float(read_meta(d / f"density_model_{model}.csv.meta")["rho"])
        t = np.linspace(0, 2 * np.pi, 400)
        ax_e[i].plot(eig["re"], eig["im"], ".", ms=1.5)
        ax_e[i].plot(np.sqrt(rho) * np.cos(t), np.sqrt(rho) * np.sin(t), "r-", lw=1)
        ax_e[i].set_aspect("equal")
        ax_e[i].set_title(f"Model {model.upper()}")
        ax_d[i].plot(dens["s"], dens["f_exact"])
        ax_d[i].set_xlabel("|z|")
        ax_d[i].set_title(f"Model {model.upper()}")
        moduli = np.sort(np.hypot(eig["re"], eig["im"]))
        ax_f[i].plot(dens["s"], dens["F"], "-")
        emp = np.searchsorted(moduli, dens["s"], side="right") / moduli.size
        ax_f[i].plot(dens["s"][::6], emp[::6], "+")
        ax_f[i].set_xlabel("s")
        ax_f[i].set_title(f"Model {model.upper()}")
    fig_e.savefig(d / "eigenvalues.png", dpi=150)
    fig_d.savefig(d / "densities.png", dpi=150)
    fig_f.savefig(d / "cdfs.png", dpi=150)

    fig_b, ax_b = plt.subplots(1, 2, figsize=(10, 4.5))
    dens = read_csv(d / "density_block_atom.csv")
    eig = read_csv(d / "eigs_block_atom.csv")
    ax_b[0].plot(dens["s"], dens["f_exact"])
    ax_b[0].set_xlabel("|z|")
    ax_b[1].plot(eig["re"], eig["im"], ".", ms=1.5)
    ax_b[1].set_aspect("equal")
    fig_b.savefig(d / "block_atom.png", dpi=150)


if __name__ == "__main__":
    main()
