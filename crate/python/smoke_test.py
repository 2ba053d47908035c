"""Smoke test for the carnot_py extension.

Build with `cargo build -p carnot-py --release`, then run this script; it
copies the shared library next to itself if `carnot_py` is not importable.
"""

import glob
import math
import os
import shutil
import sys

HERE = os.path.dirname(os.path.abspath(__file__))


def load():
    try:
        import carnot_py
        return carnot_py
    except ImportError:
        pass
    root = os.path.dirname(HERE)
    libs = sorted(
        glob.glob(os.path.join(root, "target", "*", "libcarnot_py.so")),
        key=os.path.getmtime,
    )
    if not libs:
        sys.exit("libcarnot_py.so not found; run cargo build -p carnot-py first")
    shutil.copy(libs[-1], os.path.join(HERE, "carnot_py.so"))
    sys.path.insert(0, HERE)
    import carnot_py
    return carnot_py


def main():
    cp = load()

    hot = cp.Reservoir.thermal([0.0, 1.0, 2.5], 2.0, "hot")
    cold = cp.Reservoir.thermal([0.0, 0.7], 1.0, "cold")
    bound = cp.generalized_bound(hot, cold)
    assert bound["applicable"], bound
    assert abs(bound["eta_max"] - 0.5) < 1e-12, bound["eta_max"]

    for row in hot.channels():
        assert abs(row["temperature"] - 2.0) < 1e-9, row

    engine = cp.saturating_engine(hot, cold)
    heat = cp.heat_flows(hot, cold, engine)
    assert heat["q_hot"] > 0
    assert abs(heat["efficiency"] - (1 - 0.7 / 1.0)) < 1e-12
    assert heat["efficiency"] <= bound["eta_max"]

    summary = cp.sweep(hot, cold, 2000, 7)
    assert summary["violations"] == 0, summary

    res = cp.Reservoir.from_density(
        [0.0, 1.0, 1.0],
        [[0.2, 0, 0], [0, 0.4, 0.3j], [0, -0.3j, 0.4]],
    )
    assert len(res) == 3
    assert abs(sum(res.populations) - 1.0) < 1e-12

    try:
        cp.Reservoir.from_density([0.0, 1.0], [[0.5, 0.1], [0.1, 0.5]])
    except ValueError as err:
        assert "NOT_STATIONARY" in str(err), err
    else:
        raise AssertionError("coherence across a gap was accepted")

    pair = cp.coherent_pair(0.5)
    w = cp.max_extractable_work(1.0, 3, 0.5)
    assert w > 0 and len(pair) == 2

    scully = cp.scully_bound(0.2, 0.4, 0.1, 1.0)
    assert 0 <= scully["exact"] <= 1

    cmp = cp.oracle_compare(
        "cosine", 1.0, 2 * math.pi * 4,
        [(1, 0, 0, 1, 0.3 + 0.1j)],
        cp.Reservoir([0.0, 1.0], [0.7, 0.3]),
        cp.Reservoir([0.0, 1.0], [0.6, 0.4]),
    )
    assert cmp["agree"], cmp

    print("carnot_py", cp.__version__, "smoke test ok")


if __name__ == "__main__":
    main()
