"""Writes the JSON fixtures in this directory. Run from any working directory."""
import json
import os

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))


def node(i, t, parent, prob, **data):
    d = {"id": i, "time": t, "parent": parent, "prob": prob}
    if data:
        d["data"] = data
    return d


def dump(name, obj):
    with open(os.path.join(HERE, name), "w") as f:
        json.dump(obj, f, indent=1)
        f.write("\n")


def affine(a, b=0.0):
    return {"kind": "affine", "params": {"a": a, "b": b}}


def power(lam, p, dim=1):
    return {"kind": "power", "params": {"lambda": lam, "p": p, "dim": dim}}


def pre(f, A, b):
    return {"kind": "precompose", "params": {"A": A, "b": b}, "children": [f]}


def fsum(*fs):
    return {"kind": "sum", "children": list(fs)}


def two_well():
    x = np.linspace(-5.0, 5.0, 1001)
    y = np.minimum((x + 1) ** 2, (x - 1) ** 2 + 0.5)
    sl = (y[1] - y[0]) / (x[1] - x[0])
    sr = (y[-1] - y[-2]) / (x[-1] - x[-2])
    return {"kind": "sampled1d",
            "params": {"x": [round(v, 10) for v in x], "y": [round(v, 12) for v in y],
                       "left_slope": sl, "right_slope": sr}}


def quadratic_t0():
    return {
        "name": "quadratic_t0",
        "tree": [node("r", 0, None, 1.0)],
        "decision_dims": [1],
        "objective": {"r": pre(power(1.0, 2.0), [[1.0]], [-3.0])},
        "lower_bound": {"r": 0.0},
        "grids": [],
        "oracle": {"lo": -5, "hi": 5, "points": 11},
    }


def generic_history_t1():
    tw = two_well()
    hu = fsum(pre(tw, [[1.0, 0.0]], [0.0]), pre(power(0.5, 2.0), [[-0.5, 1.0]], [-1.0]), affine([0.0, 0.3]))
    hd = fsum(pre(tw, [[1.0, 0.0]], [0.0]), pre(power(0.5, 2.0), [[1.0, 1.0]], [0.0]), affine([0.2, -0.5]))
    return {
        "name": "generic_history_t1",
        "tree": [node("r", 0, None, 1.0), node("u", 1, "r", 0.4), node("d", 1, "r", 0.6)],
        "decision_dims": [1, 1],
        "objective": {"u": hu, "d": hd},
        "lower_bound": {"u": -2.0, "d": -4.0},
        "grids": [{"lo": [-4.0], "hi": [4.0], "n": [161]}],
        "oracle": {"lo": -3, "hi": 3, "points": 151},
    }


def box(lower, upper):
    return {"kind": "box", "params": {"lower": lower, "upper": upper}}


def polycone(normals, dim):
    return {"kind": "polycone", "params": {"normals": normals, "dim": dim}}


def sampled(x, y, sl, sr):
    return {"kind": "sampled1d", "params": {"x": x, "y": y, "left_slope": sl, "right_slope": sr}}


def sshaped(gamma=2.0, kappa=1.0, beta=1.0):
    return {"kind": "sshaped", "params": {"gamma": gamma, "kappa": kappa, "beta": beta}}


def scaled(c, f):
    return {"kind": "scaled", "params": {"factor": c}, "children": [f]}


def partial_min(f, keep):
    return {"kind": "partial_min", "params": {"keep": keep}, "children": [f]}


def efun_fixtures():
    """Atoms and combinators for the horizon-calculus checks."""
    fs = [
        ("affine", affine([1.0, -2.0], 0.5)),
        ("power_quadratic", power(0.3, 2.0, 2)),
        ("power_linear", power(0.7, 1.0, 2)),
        ("power_fractional", power(1.0, 1.5, 1)),
        ("box_bounded", box([-1.0, 0.0], [1.0, 2.0])),
        ("box_orthant", box([-1.0, "-inf"], ["inf", 2.0])),
        ("polycone", polycone([[1.0, 1.0], [-1.0, 2.0]], 2)),
        ("sampled_two_well", two_well()),
        ("sampled_barrier", sampled([-1.0, 0.0, 2.0], [1.0, 0.0, 3.0], -2.0, "inf")),
        ("sshaped", sshaped()),
        ("sshaped_steep", sshaped(0.5, 2.0, 3.0)),
        ("sum_linear_power", fsum(affine([1.0, -2.0]), power(0.3, 2.0, 2))),
        ("sum_sshaped_sampled", fsum(pre(sshaped(), [[1.0, 0.0]], [0.0]),
                                     pre(sampled([0.0, 1.0], [0.0, 0.2], 0.5, 0.1), [[1.0, 1.0]], [0.0]))),
        ("sum_box_affine", fsum(box([0.0, 0.0], ["inf", "inf"]), affine([-1.0, 1.0]))),
        ("scaled_sshaped", scaled(2.5, sshaped())),
        ("precompose_sshaped", pre(sshaped(2.0, 1.0, 1.5), [[1.0, -1.0]], [0.3])),
        ("precompose_power", pre(power(1.0, 2.0, 1), [[1.0, 1.0]], [-1.0])),
        ("partial_min_quadratic", partial_min(fsum(pre(power(1.0, 2.0), [[-1.0, 1.0]], [0.0]),
                                                   affine([0.5, 0.0])), [0])),
        ("partial_min_abs", partial_min(fsum(pre(power(1.0, 2.0), [[1.0, -1.0]], [0.0]),
                                             pre(power(1.0, 1.0), [[0.0, 1.0]], [0.0])), [0])),
    ]
    return {"functions": [{"name": n, "function": f} for n, f in fs]}


SSHAPED = {"kind": "sshaped", "gamma": 2.0, "kappa": 1.0, "beta": 1.0}


def grids(cash, terminal):
    return {"cash": [{"lo": lo, "hi": hi, "n": n} for lo, hi, n in cash],
            "terminal": [{"lo": lo, "hi": hi, "n": n} for lo, hi, n in terminal]}


def one_period(name, Z0, Z1, probs, utility, X0=1.0, W=0.0, costs=None, oracle=(-5, 5, 201)):
    J = len(Z0)
    tree = [node("r", 0, None, 1.0, Z=Z0)]
    for k, (z, p) in enumerate(zip(Z1, probs)):
        tree.append(node("s%d" % k, 1, "r", p, Z=z))
    m = {
        "name": name,
        "tree": tree,
        "assets": J,
        "costs": costs or {"kind": "frictionless"},
        "claims": {"X0": X0, "W": W},
        "utility": utility,
        "grids": grids([([-8.0] + [-4.0] * J, [8.0] + [4.0] * J, [17] + [9] * J)],
                       [([-8.0] + [-4.0] * J + [0.0], [8.0] + [4.0] * J + [0.0], [17] + [9] * J + [1])]),
        "oracle": {"lo": oracle[0], "hi": oracle[1], "points": oracle[2]},
    }
    return m


def f2_frictionless_exp():
    return one_period("frictionless_exp", [1.0], [[2.0], [0.5]], [0.5, 0.5],
                      {"kind": "exponential", "risk_aversion": 1.0, "range": [-10.0, 10.0], "points": 2001})


def f3_sshaped_illiquid():
    Z = {"r": 1.0, "u": 1.25, "d": 0.85, "uu": 1.5, "ud": 1.05, "du": 1.05, "dd": 0.7}
    tree = [node("r", 0, None, 1.0, Z=[Z["r"]])]
    for c in "ud":
        tree.append(node(c, 1, "r", 0.5, Z=[Z[c]]))
    for c in "ud":
        for g in "ud":
            tree.append(node(c + g, 2, c, 0.5, Z=[Z[c + g]]))
    return {
        "name": "sshaped_illiquid",
        "tree": tree,
        "assets": 1,
        "costs": {"kind": "power", "lambda": 0.1, "p": 2.0},
        "claims": {"X0": 1.0, "W": 0.0},
        "utility": SSHAPED,
        "grids": grids([([-4.0, -4.0], [5.0, 4.0], [91, 81]), ([-4.0, -4.0], [5.0, 4.0], [91, 81])],
                       [([-4.0, -4.0, 0.0], [5.0, 4.0, 0.0], [46, 41, 1]),
                        ([-4.0, -4.0, 0.0], [5.0, 4.0, 0.0], [46, 41, 1])]),
        "oracle": {"lo": -3, "hi": 3, "points": 121},
    }


def f4_two_asset():
    return one_period("two_asset_illiquid", [1.0, 2.0], [[1.3, 2.2], [1.0, 1.9], [0.8, 2.1]], [0.3, 0.4, 0.3],
                      SSHAPED, X0=0.5, W=0.2, costs={"kind": "power", "lambda": 0.2, "p": 2.0},
                      oracle=(-2, 2, 201))


def f6_sshaped_frictionless():
    return one_period("sshaped_frictionless", [1.0], [[1.4], [1.05], [0.7]], [0.25, 0.5, 0.25], SSHAPED)


def dup_asset():
    return one_period("duplicated_asset", [1.0, 1.0], [[1.3, 1.3], [0.8, 0.8]], [0.5, 0.5], SSHAPED)


def arbitrage():
    return one_period("arbitrage", [1.0], [[2.0], [3.0]], [0.5, 0.5], SSHAPED, oracle=(-1, 1, 21))


if __name__ == "__main__":
    dump("quadratic_t0.json", quadratic_t0())
    dump("generic_history_t1.json", generic_history_t1())
    dump("frictionless_exp.json", f2_frictionless_exp())
    dump("sshaped_illiquid.json", f3_sshaped_illiquid())
    dump("two_asset_illiquid.json", f4_two_asset())
    dump("sshaped_frictionless.json", f6_sshaped_frictionless())
    dump("duplicated_asset.json", dup_asset())
    dump("arbitrage.json", arbitrage())
    dump("efun_fixtures.json", efun_fixtures())
