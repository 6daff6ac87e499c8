#!/usr/bin/env python3
"""Smoke test for the kfl_py extension module.

Builds nothing itself: run `cargo build -p kfl-py` (or --release) first,
then `python3 python/smoke_test.py`. The script locates the compiled
cdylib under target/, exposes it as an importable module, and drives a
few end-to-end flows with known-value assertions.
"""

import math
import os
import shutil
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def locate_extension():
    target = os.environ.get("CARGO_TARGET_DIR", os.path.join(ROOT, "target"))
    candidates = [
        os.path.join(target, profile, name)
        for profile in ("release", "debug")
        for name in ("libkfl_py.so", "libkfl_py.dylib", "kfl_py.dll")
    ]
    hits = [p for p in candidates if os.path.exists(p)]
    if not hits:
        sys.exit("kfl_py cdylib not found; run `cargo build -p kfl-py` first")
    return max(hits, key=os.path.getmtime)


def import_module():
    lib = locate_extension()
    stage = tempfile.mkdtemp(prefix="kfl-py-")
    suffix = ".pyd" if lib.endswith(".dll") else ".so"
    shutil.copy(lib, os.path.join(stage, "kfl_py" + suffix))
    sys.path.insert(0, stage)
    import kfl_py

    return kfl_py


def close(a, b, tol=1e-9):
    assert abs(a - b) <= tol * max(1.0, abs(a), abs(b)), f"{a} != {b}"


def main():
    kfl = import_module()

    # Spaces: builders, doubling constant, ball census.
    line = kfl.Space.grid(1, [(0.0, 7.0)], 1.0, "counting")
    assert len(line) == 8
    constant, center, radius = line.doubling_constant()
    close(constant, 3.0)
    assert 0.5 < radius <= 1.0, (center, radius)

    cayley = kfl.Space.cayley_z2(2)
    assert len(cayley) == 13

    line3 = kfl.Space.grid(1, [(0.0, 2.0)], 1.0, "counting")
    assert len(line3.balls()) == 6
    assert len(line3.balls(cap=1.1)) == 5

    # Round trip through the JSON format.
    again = kfl.Space.from_json(line.to_json())
    assert len(again) == 8 and again.distance(0, 7) == 7.0

    # Weights: reverse Hölder and Muckenhoupt audits.
    two = kfl.Space.grid(1, [(0.0, 1.0)], 1.0, "counting")
    w13 = kfl.Weight.explicit([1.0, 3.0])
    c, _, _ = kfl.rh_constant(two, w13, 2.0)
    close(c, math.sqrt(5.0) / 2.0)
    ci, _, _ = kfl.rh_infinity_constant(two, w13)
    close(ci, 1.5)
    close(kfl.ap_constant(two, kfl.Weight.explicit([1.0, 4.0]), 2.0), 25.0 / 16.0)
    _, ok = kfl.rh_power_law_check(two, w13, 0.5)
    assert ok

    grid = kfl.Space.grid(1, [(-1.0, 1.0)], 0.25, "cell")
    poly = kfl.Weight.polynomial(grid, [1.0, 0.0, 1.0])
    assert min(poly.values()) >= 1.0

    # Calculus: maximal function and Sobolev norms.
    assert kfl.maximal(line3, [0.0, 0.0, 3.0]) == [1.0, 1.5, 3.0]
    assert kfl.maximal(line3, [0.0, 0.0, 3.0], cap=1.1) == [0.0, 1.5, 3.0]
    u = kfl.Function.from_values(line3, [0.0, 1.0, 2.0])
    assert u.gradient() == [1.0, 1.0, 1.0]
    unit3 = kfl.Weight.explicit([1.0, 1.0, 1.0])
    close(kfl.sobolev_norm(line3, unit3, u, 1.0) - kfl.sobolev_norm(line3, unit3, u, 1.0, True), 3.0)

    # Rearrangements and step-function transforms.
    breaks, values = kfl.decreasing_rearrangement(line3, [3.0, 1.0, 2.0])
    assert breaks == [0.0, 1.0, 2.0, 3.0] and values == [3.0, 2.0, 1.0]
    close(kfl.double_star(breaks, values, 2.0), 2.5)
    close(kfl.holmstedt_k([0.0, 1.0], [1.0], 1.0, 2.0, 0.5), 0.25 + 0.5 * math.sqrt(0.75))
    lhs, rhs, ok = kfl.hardy_check([0.0, 1.0], [1.0], 0.5)
    assert ok
    close(lhs, 4.0 / 3.0)
    close(rhs, 4.0 / 3.0)

    # K-functionals: closed form, lower bound, and the CZ sandwich.
    f21 = kfl.Function.from_values(two, [2.0, 1.0])
    value, certified = kfl.k_exact_lp(two, f21, 1.5, 1.0, math.inf)
    assert certified
    close(value, 2.5)

    close(kfl.interpolation_theta(1.0, 4.0 / 3.0, 2.0), 0.5)

    s4 = kfl.Space.grid(1, [(0.0, 3.0)], 1.0, "counting")
    unit4 = kfl.Weight.explicit([1.0] * 4)
    g4 = kfl.Function.from_values(s4, kfl.low_pass_field(s4, 7))
    for t in (0.1, 1.0, 10.0):
        exact, certified = kfl.k_exact(s4, unit4, g4, t, r=1.0, q=2.0)
        assert certified
        upper, rhs = kfl.k_upper_via_cz(s4, unit4, g4, t, r=1.0, s=1.0, q=2.0)
        assert exact <= upper * (1.0 + 1e-12), (t, exact, upper)
        lower = kfl.k_lower_bound(s4, unit4, g4, t, r=1.0, q=2.0)
        assert lower >= 0.0 and rhs >= 0.0
    lo, hi = kfl.k_bounds_infty(s4, unit4, g4, 1.0, r=1.0, s=1.0)
    close(lo, hi)

    # Decomposition: reconstruction and verification on a 2-D instance.
    grid2 = kfl.Space.grid(2, [(0.0, 1.0), (0.0, 1.0)], 0.1, "cell")
    v2 = kfl.Weight.polynomial(grid2, [1.0, 0.0, 1.0])
    f2 = kfl.Function.from_values(grid2, kfl.low_pass_field(grid2, 31))
    mts = kfl.maximal(grid2, kfl.t_r(grid2, v2, f2, 1.0))
    alpha = sorted(mts)[len(mts) // 2]
    d = kfl.cz_decompose(grid2, v2, f2, alpha, r=1.0, s=1.0, p=1.5, q=2.0)
    assert not d.omega_full and d.piece_count() > 0
    report = d.verify()
    assert report["pass"] == 1.0, report
    assert report["reconstruction_err"] <= 1e-12
    total = list(d.g_values())
    for i in range(d.piece_count()):
        for j, b in enumerate(d.b_values(i)):
            total[j] += b
    worst = max(abs(a - b) for a, b in zip(total, f2.values()))
    assert worst <= 1e-12, worst

    # Interpolation norm scales linearly.
    line50 = kfl.Space.grid(1, [(-1.0, 1.0)], 0.05, "counting")
    v50 = kfl.Weight.polynomial(line50, [1.0, 0.0, 1.0])
    u50 = kfl.Function.from_values(line50, kfl.low_pass_field(line50, 4))
    a = kfl.interp_norm(line50, v50, u50, r=1.0, s=1.0, q=2.0, p=1.5)
    b = kfl.interp_norm(line50, v50, u50.scale(2.0), r=1.0, s=1.0, q=2.0, p=1.5)
    close(b, 2.0 * a, tol=1e-6)

    # Library verification suites are importable from Python too.
    rows = kfl.run_suite("space")
    assert rows and all(ok for _, ok, _ in rows)

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
