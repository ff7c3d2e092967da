#!/usr/bin/env python3
"""Fit Drude(+Lorentz) pole parameters to the committed silver n,k table.

Reads data/silver_nk_reference.csv, runs a damped least-squares fit of the
rational permittivity model used by the time stepper, and prints the fitted
parameters together with the worst-case relative residual over the table.
The shipped defaults in the material library were produced by this script;
rerun it after replacing the reference table to regenerate them.

Usage: python3 tools/fit_silver_poles.py [--with-lorentz] [table.csv]
"""

import argparse
import csv
import math
import sys

import numpy as np
from scipy.optimize import least_squares

EV = 1.602176634e-19
HBAR = 1.054571817e-34
C = 299792458.0


def load_table(path):
    lam, eps = [], []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            lam.append(float(row["wavelength_nm"]))
            n = float(row["n"])
            k = float(row["k"])
            eps.append(complex(n * n - k * k, -2.0 * n * k))
    return np.asarray(lam), np.asarray(eps)


def model(params, omega, with_lorentz):
    eps_inf, wp_ev, g_ev = params[:3]
    wp = wp_ev * EV / HBAR
    g = g_ev * EV / HBAR
    eps = eps_inf - wp**2 / (omega**2 - 1j * g * omega)
    if with_lorentz:
        s, w0_ev, gl_ev = params[3:]
        w0 = w0_ev * EV / HBAR
        gl = gl_ev * EV / HBAR
        eps = eps + s * w0**2 / (w0**2 - omega**2 + 1j * gl * omega)
    return eps


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("table", nargs="?", default="data/silver_nk_reference.csv")
    ap.add_argument("--with-lorentz", action="store_true",
                    help="add one Lorentz pole to the fit model")
    args = ap.parse_args()

    lam, eps_ref = load_table(args.table)
    omega = 2.0 * math.pi * C / (lam * 1e-9)

    x0 = [3.5, 9.0, 0.02]
    bounds_lo = [1.0, 5.0, 1e-4]
    bounds_hi = [8.0, 12.0, 1.0]
    if args.with_lorentz:
        x0 += [0.5, 4.5, 0.5]
        bounds_lo += [0.0, 3.0, 0.01]
        bounds_hi += [5.0, 8.0, 3.0]

    def residual(p):
        d = model(p, omega, args.with_lorentz) - eps_ref
        scale = np.maximum(np.abs(eps_ref), 1.0)
        return np.concatenate([d.real / scale, d.imag / scale])

    fit = least_squares(residual, x0, bounds=(bounds_lo, bounds_hi), xtol=1e-14, ftol=1e-14)
    eps_fit = model(fit.x, omega, args.with_lorentz)
    rel = np.abs(eps_fit - eps_ref) / np.maximum(np.abs(eps_ref), 1.0)

    print(f"eps_inf      = {fit.x[0]:.6g}")
    print(f"drude wp     = {fit.x[1]:.6g} eV")
    print(f"drude gamma  = {fit.x[2]:.6g} eV")
    if args.with_lorentz:
        print(f"lorentz s    = {fit.x[3]:.6g}")
        print(f"lorentz w0   = {fit.x[4]:.6g} eV")
        print(f"lorentz g    = {fit.x[5]:.6g} eV")
    print(f"max relative residual over {lam[0]:.0f}-{lam[-1]:.0f} nm: {rel.max():.3e}")
    print(f"eps(795 nm)  = {model(fit.x, np.array([2*math.pi*C/795e-9]), args.with_lorentz)[0]:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
