"""Smoke test for the `gswl` extension module.

Build and install first:

    pip install --no-build-isolation ./crates/py
    python python/smoke_test.py
"""

import json
import sys

import gswl


def main():
    flat = gswl.Complex.grid(5, 5)
    bent = flat.deform("bend", amplitude=0.1, seed=0)
    assert flat.counts == [25, 56, 32], flat.counts
    assert flat.euler_characteristic == 1
    assert flat.same_complex(bent)

    again = gswl.Complex.from_json(flat.to_json())
    assert again.vertices() == flat.vertices()

    off = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n"
    tri = gswl.Complex.from_off(off)
    assert tri.counts == [3, 3, 1]

    # combinatorial refinement cannot tell the bend apart, the geometric one can
    assert gswl.equivalent(flat, bent, depth=4, mode="swl")
    assert not gswl.equivalent(flat, bent, depth=0, mode="gswl")
    rounds = gswl.refine(flat, depth=2)
    assert sum(rounds[-1]["histogram"].values()) == len(flat)

    ect = gswl.sampled_ect(flat, directions=8, thresholds=10)
    assert all(row[-1] == 1 for row in ect["values"])
    assert gswl.ect_distance(flat, flat) == 0.0
    assert gswl.ect_distance(flat, bent) > 0.0

    family = [gswl.Complex.grid(4, 4).deform(f) for f in ("bend", "twist", "stretch")]
    real = gswl.realize(family, depth=2, readout="ect")
    assert all(m["matches_direct_ect"] for m in real["members"])

    r = gswl.upper_bound_check(flat, flat, depth=2, trials=10, seed=1)
    assert r["violations"] == 0

    torus = gswl.Complex.library("torus_T2")
    assert torus.euler_characteristic == 0 and torus.ambient_dim == 2

    report = gswl.run_config(json.dumps({"scenarios": ["coboundary_ablation"], "seeds": [0]}))
    assert all(c["passed"] for s in report["scenarios"] for c in s["cases"])

    try:
        gswl.refine(flat, mode="nope")
    except ValueError:
        pass
    else:
        raise AssertionError("bad mode accepted")

    print("smoke test ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
