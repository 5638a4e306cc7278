"""Brute-force oracle values for the shipped fixtures.

Each fixture is re-implemented here from its parameters with numpy,
independently of the C++ code. Values are exhaustive minima over the same
uniform decision grids the C++ brute-force oracle uses, plus a fine
continuous estimate for reference.
"""
import itertools
import numpy as np


def sshaped_V(c, gamma=2.0, kappa=1.0, beta=1.0):
    a = np.abs(c) ** gamma
    return np.where(c >= 0, beta * c, -kappa * a / (1.0 + a))


EXP_X = np.linspace(-10.0, 10.0, 2001)
EXP_U = 1.0 - np.exp(-EXP_X)


def exp_V(c):
    # V(c) = -u(-c) with u sampled on EXP_X; wealth below -10 forbidden.
    w = -np.asarray(c, dtype=float)
    u = np.interp(w, EXP_X, EXP_U)
    u = np.where(w > EXP_X[-1], EXP_U[-1], u)
    return np.where(w < EXP_X[0], np.inf, -u)


def grid(lo, hi, n):
    return np.linspace(lo, hi, n)


def f2_frictionless_exp(g):
    # T=1, Z0=1, Z1 in {2, 0.5}, X0=1, W=0.
    x = g
    return 0.5 * exp_V(-(1 + x * (2 - 1))) + 0.5 * exp_V(-(1 + x * (0.5 - 1)))


def f3_sshaped_illiquid(g):
    lam = 0.1
    Z0, Zu, Zd = 1.0, 1.25, 0.85
    Zuu, Zud, Zdu, Zdd = 1.5, 1.05, 1.05, 0.7
    G = lambda y: lam * y * y
    x0 = g[:, None, None]
    xu = g[None, :, None]
    xd = g[None, None, :]
    X = 1.0 - Z0 * x0 - G(x0)
    Xu = X - Zu * xu - G(xu)
    phu = x0 + xu
    Xd = X - Zd * xd - G(xd)
    phd = x0 + xd
    liq = lambda X, ph, Z: X + Z * ph - G(-ph)
    v = (0.25 * sshaped_V(-liq(Xu, phu, Zuu)) + 0.25 * sshaped_V(-liq(Xu, phu, Zud))
         + 0.25 * sshaped_V(-liq(Xd, phd, Zdu)) + 0.25 * sshaped_V(-liq(Xd, phd, Zdd)))
    return v


def f4_two_asset(g):
    lam = 0.2
    Z0 = np.array([1.0, 2.0])
    Z1 = [np.array([1.3, 2.2]), np.array([1.0, 1.9]), np.array([0.8, 2.1])]
    P = [0.3, 0.4, 0.3]
    X0, W = 0.5, 0.2
    a = g[:, None]
    b = g[None, :]
    G = lambda a, b: lam * (a * a + b * b)
    X = X0 - Z0[0] * a - Z0[1] * b - G(a, b)
    v = 0
    for p, Z in zip(P, Z1):
        XT = X + Z[0] * a + Z[1] * b - G(-a, -b) + W
        v = v + p * sshaped_V(-XT)
    return v


def twowell(x):
    return np.minimum((x + 1) ** 2, (x - 1) ** 2 + 0.5)


TW_X = np.linspace(-5.0, 5.0, 1001)
TW_Y = twowell(TW_X)


def twowell_sampled(x):
    # Sampled1D on TW_X with end slopes equal to the last segment slopes.
    sl = (TW_Y[1] - TW_Y[0]) / (TW_X[1] - TW_X[0])
    sr = (TW_Y[-1] - TW_Y[-2]) / (TW_X[-1] - TW_X[-2])
    y = np.interp(x, TW_X, TW_Y)
    y = np.where(x < TW_X[0], TW_Y[0] + sl * (x - TW_X[0]), y)
    return np.where(x > TW_X[-1], TW_Y[-1] + sr * (x - TW_X[-1]), y)


def f5_generic(g):
    x0 = g[:, None, None]
    xu = g[None, :, None]
    xd = g[None, None, :]
    hu = twowell_sampled(x0) + 0.5 * (xu - 0.5 * x0 - 1) ** 2 + 0.3 * xu
    hd = twowell_sampled(x0) + 0.5 * (xd + x0) ** 2 + 0.2 * x0 - 0.5 * xd
    return 0.4 * hu + 0.6 * hd


def f6_sshaped_frictionless(g):
    P = [0.25, 0.5, 0.25]
    Z1 = [1.4, 1.05, 0.7]
    x = g
    return sum(p * sshaped_V(-(1 + x * (z - 1))) for p, z in zip(P, Z1))


def dup_asset(g):
    # Two identical risky assets, T=1, prices 1 -> {1.3, 0.8}, p = (0.5, 0.5).
    a = g[:, None]
    b = g[None, :]
    v = 0
    for p, z in [(0.5, 1.3), (0.5, 0.8)]:
        v = v + p * sshaped_V(-(1 + (a + b) * (z - 1)))
    return v


def report(name, vals, g):
    vals = np.asarray(vals)
    i = np.unravel_index(np.argmin(vals), vals.shape)
    print(f"{name}: min {vals[i]:.12f} at", [float(g[k]) for k in i])


if __name__ == "__main__":
    g201 = grid(-5, 5, 201)
    report("F2 frictionless_exp grid", f2_frictionless_exp(g201), g201)
    gf = grid(-5, 5, 2000001)
    report("F2 fine", f2_frictionless_exp(gf), gf)
    g121 = grid(-3, 3, 121)
    report("F3 sshaped_illiquid grid", f3_sshaped_illiquid(g121), g121)
    g2 = grid(-2, 2, 201)
    report("F4 two_asset grid", f4_two_asset(g2), g2)
    g151 = grid(-3, 3, 151)
    report("F5 generic grid", f5_generic(g151), g151)
    report("F6 sshaped_frictionless grid", f6_sshaped_frictionless(g201), g201)
    report("F6 fine", f6_sshaped_frictionless(gf), gf)
    report("dup asset grid", dup_asset(g201), g201)
