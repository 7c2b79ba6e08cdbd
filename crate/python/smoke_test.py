"""Smoke test for the critnls Python extension.

Build and stage the module first:

    cargo build --release -p critnls-py --features extension-module
    cp target/release/libcritnls_py.so python/critnls.so

then run `python3 python/smoke_test.py` from the repository root.
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import critnls  # noqa: E402


def main():
    params = critnls.Params(dim=3, a=1.0, b=1.0, s=0.5, mu=1.0)
    assert params.p == 4.0, params
    print(params)

    try:
        critnls.Params(b=0.0)
    except ValueError as exc:
        print("rejected b = 0:", exc)
    else:
        raise AssertionError("b = 0 must be rejected")

    settings = critnls.Settings(nodes=2000)
    sp = critnls.ground_state_sp(params, settings)
    assert abs(sp["value"] - 8.6942) < 0.05, sp["value"]
    assert len(sp["r"]) == len(sp["u"]) == 2000
    print("S_p =", sp["value"])

    neh = critnls.nehari_minimize(params, settings)
    mp = critnls.mountain_pass(params, settings)
    assert abs(mp["level"] - neh["level"]) < 1e-2 * neh["level"]
    assert abs(critnls.energy(params, neh["u"], settings) - neh["level"]) < 1e-8 * neh["level"]
    print("Nehari level =", neh["level"], "mountain-pass level =", mp["level"])

    rep = critnls.threshold(params, settings)
    p = params.p
    assert math.isclose(rep["ps_threshold"], (0.5 - 1 / p) * rep["rhs"] ** (p / (p - 2)), rel_tol=1e-13)
    assert rep["quotient_condition_holds"] and rep["level_below_threshold"]
    print("lhs =", rep["lhs"], "rhs =", rep["rhs"])

    y = critnls.forward_map(1.0, [0.0, 3.0, 4.0])
    x = critnls.inverse_map(1.0, y)
    assert all(abs(a - b) < 1e-12 for a, b in zip(x, [0.0, 3.0, 4.0]))

    records = critnls.transform_checks(params)
    assert all(r["passed"] for r in records), records
    print(len(records), "transform checks passed")
    print("ok")


if __name__ == "__main__":
    main()
