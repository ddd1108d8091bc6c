"""Regenerates the synthetic fixtures in this directory.

Trajectories are integrated with scipy's DOP853 at rtol = atol = 1e-13,
independently of the Rust integrator.
"""

import csv
import math
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

HERE = Path(__file__).resolve().parent


def plc(theta, times):
    alpha, beta, gamma, delta, x0, y0 = theta

    def rhs(_t, s):
        x, y = s
        return [alpha * x * (1 - x) - beta * x * y, gamma * y * (1 - y) - delta * x * y]

    sol = solve_ivp(rhs, (0.0, times[-1]), [x0, y0], method="DOP853",
                    t_eval=times, rtol=1e-13, atol=1e-13)
    return sol.y[0]


def pa(a, b, c, times):
    return [c / (1 + a * math.exp(-b * t)) for t in times]


def write(name, times, values, comment):
    with open(HERE / name, "w", newline="") as fh:
        fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "value"])
        for t, v in zip(times, values):
            w.writerow([f"{t:g}", repr(float(v))])


def main():
    t15 = np.arange(15.0)
    write("pa_logistic.csv", t15, pa(70.4286, 0.4642, 1.0, t15),
          "Piotrowski-Altmann a=70.4286 b=0.4642 c=1")
    write("plc_reversible.csv", t15, plc((0.6, 2.6, 2.1, 4.2, 0.01, 0.001), t15),
          "PLC alpha=0.6 beta=2.6 gamma=2.1 delta=4.2 x0=0.01 y0=0.001")
    growth = (0.8, 3.0, 0.5, 2.5, 0.02, 0.005)
    clean = plc(growth, t15)
    write("plc_complete.csv", t15, clean,
          "PLC alpha=0.8 beta=3.0 gamma=0.5 delta=2.5 x0=0.02 y0=0.005")
    rng = np.random.default_rng(20240611)
    noisy = np.clip(clean * (1 + 0.01 * rng.standard_normal(clean.size)), 0, 1)
    write("plc_complete_noisy.csv", t15, noisy,
          "plc_complete.csv with 1% relative Gaussian noise, numpy seed 20240611")
    t40 = np.arange(40.0)
    write("plc_one_negative.csv", t40,
          plc((0.1076, 2.3732, 0.0377, -1.1806, 0.0618, 0.0001), t40),
          "PLC alpha=0.1076 beta=2.3732 gamma=0.0377 delta=-1.1806 x0=0.0618 y0=0.0001")


if __name__ == "__main__":
    main()
