#!/usr/bin/env python3
"""Solve the order conditions for the SABA2 and SBAB2 splitting schemes.

For H = A + eps*B the eps-linear part of the splitting error vanishes up to
local order tau^(2n+1) iff the kick weights d_i, placed at the cumulative drift
fractions s_i, integrate the monomials s^j exactly for j = 0 .. 2n-1:

    sum_i d_i * s_i**j == 1 / (j + 1)

Drift coefficients must additionally sum to one. Both schemes below are
symmetric, so the odd moments follow from the even ones; all moments are
still printed as residuals.

Run:  python3 scripts/order_conditions.py
The printed values are the ones frozen in crates/core/src/integrators/catalog.rs.
"""

from mpmath import mp, mpf, findroot

mp.dps = 40


def moments(kick_positions, kick_weights, degree):
    return [
        sum(w * s**j for s, w in zip(kick_positions, kick_weights)) - mpf(1) / (j + 1)
        for j in range(degree + 1)
    ]


def saba2():
    # word: D(c1) K(d1) D(c2) K(d1) D(c1), with 2*c1 + c2 = 1
    def eqs(c1, d1):
        c2 = 1 - 2 * c1
        pos = [c1, c1 + c2]
        res = moments(pos, [d1, d1], 3)
        return [res[0], res[2]]

    c1, d1 = findroot(eqs, (mpf("0.2"), mpf("0.4")))
    c2 = 1 - 2 * c1
    drifts = [c1, c2, c1]
    kicks = [d1, d1]
    residuals = moments([c1, c1 + c2], kicks, 3)
    return drifts, kicks, residuals


def sbab2():
    # word: K(d1) D(c1) K(d2) D(c1) K(d1), with 2*c1 = 1 and 2*d1 + d2 = 1
    def eqs(c1, d1, d2):
        res = moments([0, c1, 2 * c1], [d1, d2, d1], 3)
        return [2 * c1 - 1, res[0], res[2]]

    c1, d1, d2 = findroot(eqs, (mpf("0.4"), mpf("0.2"), mpf("0.6")))
    drifts = [c1, c1]
    kicks = [d1, d2, d1]
    residuals = moments([0, c1, 2 * c1], kicks, 3)
    return drifts, kicks, residuals


def report(name, drifts, kicks, residuals):
    print(f"{name}")
    for i, c in enumerate(drifts):
        print(f"  drift[{i}] = {mp.nstr(c, 30)}")
    for i, d in enumerate(kicks):
        print(f"  kick[{i}]  = {mp.nstr(d, 30)}")
    print(f"  sum drift - 1 = {mp.nstr(sum(drifts) - 1, 5)}")
    for j, r in enumerate(residuals):
        print(f"  moment[{j}] residual = {mp.nstr(r, 5)}")


if __name__ == "__main__":
    report("SABA2", *saba2())
    report("SBAB2", *sbab2())
