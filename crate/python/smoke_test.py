#!/usr/bin/env python3
"""Smoke test for the volterra_py extension module.

Builds the cdylib with cargo, loads it, and checks a handful of values
with independently known answers. Run from anywhere:

    python3 python/smoke_test.py
"""

import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_and_import():
    subprocess.run(
        ["cargo", "build", "-p", "volterra-py"],
        cwd=ROOT,
        check=True,
    )
    built = ROOT / "target" / "debug" / "libvolterra_py.so"
    if not built.exists():  # macOS names the cdylib differently
        built = ROOT / "target" / "debug" / "libvolterra_py.dylib"
    stage = Path(tempfile.mkdtemp(prefix="volterra_py_"))
    shutil.copy(built, stage / "volterra_py.so")
    sys.path.insert(0, str(stage))
    import volterra_py

    return volterra_py


def approx(got, want, tol, label):
    assert abs(got - want) <= tol, f"{label}: got {got!r}, want {want!r} (tol {tol})"
    print(f"  ok: {label} = {got:.12g}")


def main():
    v = build_and_import()

    print("registry")
    names = v.problems()
    assert names == ["capillary", "holder-cusp", "log", "smooth-exp"], names
    print(f"  ok: problems = {names}")

    print("quadrature")
    nodes, weights = v.gauss_rule(5, 0.0, 1.0)
    assert len(nodes) == 5 and len(weights) == 5
    approx(sum(w * t**3 for t, w in zip(nodes, weights)), 0.25, 1e-14, "5-point rule on t^3")
    approx(sum(weights), 1.0, 1e-14, "weights sum to the length")
    value, deriv = v.legendre_eval(2, 0.5)
    approx(value, -0.125, 1e-15, "P2(0.5)")
    approx(deriv, 1.5, 1e-15, "P2'(0.5)")

    print("smoothness toolkit")
    m = 4096
    ramp = [i / m for i in range(m + 1)]
    approx(v.modulus(ramp, 0.25), 0.25, 1e-12, "modulus of t at 0.25")
    approx(v.sup_bound_constant(0.5), math.sqrt(2.0) + 1.0, 1e-12, "sup-form constant at alpha 1/2")
    sqrt_samples = [math.sqrt(i / m) for i in range(m + 1)]
    bound = v.interp_error_bound(sqrt_samples, 0.5, 1.0 / 16.0)
    approx(bound, (math.sqrt(2.0) + 1.0) / 4.0, 1e-3, "interpolation bound for sqrt at h=1/16")
    dev_bound = v.sup_norm_bound(sqrt_samples, 0.5)
    assert dev_bound >= 1.0, f"deviation bound {dev_bound} should dominate max|sqrt(t) - 0|"
    print(f"  ok: deviation bound for sqrt = {dev_bound:.6g} >= 1")

    print("marching solver")
    lin = v.linear_solve("smooth-exp", 256)
    exact_1 = (math.exp(2.0) - 1.0) / 2.0
    approx(lin(1.0), exact_1, 1e-4, "smooth-exp at t=1, n=256")
    assert lin.max_residual <= 1e-12 and not lin.clamped
    assert len(lin.nodes()) == 257 and len(lin.values()) == 257
    print(f"  ok: {lin!r}")

    print("spectral solver")
    spectral = v.spectral_solve("smooth-exp", 16)
    approx(spectral(0.5), (math.e - 1.0) / 2.0, 1e-12, "smooth-exp at t=1/2, degree 16")
    assert spectral.max_residual <= 1e-13
    try:
        spectral(1.5)
    except ValueError:
        print("  ok: evaluation outside [0, 1] raises ValueError")
    else:
        raise AssertionError("spectral(1.5) should raise")

    print("solvability")
    r0 = v.solvability_radius("capillary", 0.25, 1.0)
    approx(r0, 7.343669826958, 1e-6, "capillary radius")
    margin = v.solvability_margin("capillary", 0.25, 1.0, 2.0 * r0)
    assert margin > 0.0, f"margin at 2 r0 should be positive, got {margin}"
    print(f"  ok: margin at 2 r0 = {margin:.6g}")

    print("convergence study")
    report = json.loads(v.convergence_report("smooth-exp", "linear", [16, 32, 64, 128]))
    approx(report["observed_order"], 2.0, 0.1, "observed order")
    assert report["all_converged"] and len(report["rows"]) == 4

    print("error mapping")
    try:
        v.linear_solve("nope", 8)
    except ValueError as e:
        assert "nope" in str(e)
        print("  ok: unknown problem raises ValueError")
    else:
        raise AssertionError("unknown problem should raise")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
