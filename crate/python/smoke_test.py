#!/usr/bin/env python3
"""Smoke test for the avd_py extension module.

Builds nothing itself: run `cargo build -p avd-py --release` (or debug)
first, then `python3 python/smoke_test.py`. The script locates the cdylib
in target/, exposes it as an importable module, and replays the scalar
hand-run values plus a short flow integration.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def import_avd_py():
    candidates = [
        REPO / "target" / "release" / "libavd_py.so",
        REPO / "target" / "debug" / "libavd_py.so",
        REPO / "target" / "release" / "libavd_py.dylib",
        REPO / "target" / "debug" / "libavd_py.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("build the module first: cargo build -p avd-py --release")
    stage = Path(tempfile.mkdtemp(prefix="avd_py_"))
    shutil.copy2(built, stage / "avd_py.so")
    sys.path.insert(0, str(stage))
    import avd_py

    return avd_py


def approx(a, b, tol=1e-12):
    assert abs(a - b) <= tol * (1.0 + abs(b)), f"{a} != {b} (tol {tol})"


def main():
    avd = import_avd_py()

    # Momentum coefficients: (k-1)/(k+alpha-1).
    approx(avd.momentum_coefficient(1, 3.0), 0.0)
    approx(avd.momentum_coefficient(2, 3.0), 0.25)
    approx(avd.momentum_coefficient(3, 3.0), 0.4)

    # Scalar hand run: psi = x^2/2, alpha = 3, s = 0.5, x0 = 1.
    problem = avd.Problem("quadratic", dim=1)
    assert problem.lipschitz == 1.0
    assert problem.xstar == [0.0]
    zero = avd.Schedule.zero(1)
    history = avd.solve(problem, zero, alpha=3.0, max_iter=3, s=0.5)
    assert history.theta() == [0.5, 0.125, 0.017578125]
    g = history.lyapunov_g([0.0], 0.0)
    approx(g[0], 3.0)
    approx(g[1], 0.6875)
    approx(g[2], 0.171875)

    # Lyapunov certification on a longer perturbed run.
    sched = avd.Schedule.power_law(0.01, 3.0, dim=1, direction_seed=42)
    assert sched.classify()["k_weighted_summable"]
    approx(
        sched.weighted_tail_sum(3.0, 1, 2),
        0.01 * (3.0 * 1.0 + 4.0 / 8.0),
        1e-12,
    )
    run = avd.solve(problem, sched, alpha=3.0, max_iter=2001)
    ek = run.lyapunov_ek([0.0], 0.0)
    assert avd.History.monotone_violations(ek, 1e-9 * (1 + abs(ek[0])), 0.0) == []
    c, m = run.constants([0.0], 0.0)
    assert c is not None and c >= 3.0 and m is not None

    # Infinite-constant sentinel for a non-summable schedule.
    slow = avd.Schedule.power_law(0.01, 1.0, dim=1, direction_seed=42)
    run_slow = avd.solve(problem, slow, alpha=3.0, max_iter=200)
    assert run_slow.constants([0.0], 0.0) == (None, None)

    # Damped flow: pure-damping closed form x(t) = 1 + (1 - t^-2)/2.
    free = avd.Problem("quadratic", dim=1)
    flow = avd.integrate_flow(
        free,
        zero,
        alpha=3.0,
        t0=1.0,
        t_end=100.0,
        x0=[1.0],
        v0=[0.0],
        rtol=1e-9,
        atol=1e-12,
    )
    w = flow.total_energy
    approx(w[0], 0.5, 1e-9)
    assert all(b <= a + 1e-6 for a, b in zip(w, w[1:])), "energy must dissipate"
    assert max(flow.scaled_gap) <= 2.5 + 1e-9

    # Value convergence on the lasso: gap shrinks by 1e-6 over 10^4 steps.
    lasso = avd.Problem("lasso_rand", dim=20, seed=3)
    hist = avd.solve(lasso, avd.Schedule.zero(20), alpha=4.0, max_iter=10_000)
    gaps = hist.gaps(lasso.theta_star)
    assert gaps[-1] <= 1e-6 * gaps[0]

    # Fast-rate slope on the ill-conditioned quadratic.
    ill = avd.Problem("illcond_quadratic")
    hist_ill = avd.solve(ill, avd.Schedule.zero(ill.dim), alpha=3.0, max_iter=5000)
    slope = hist_ill.fit_rate(ill.theta_star, 100, 5000)
    assert slope < -1.9, f"slope {slope}"

    # Errors surface as Python exceptions with the right classes.
    try:
        avd.solve(problem, zero, alpha=2.0, max_iter=10)
    except ValueError:
        pass
    else:
        sys.exit("alpha < 3 without the no-guarantee flag must raise ValueError")
    run_low = avd.solve(problem, zero, alpha=2.0, max_iter=10, allow_no_guarantee=True)
    assert len(run_low) == 10

    assert math.isclose(
        avd.Problem("empty_argmin").value([0.0]), 1.0, rel_tol=1e-12
    )
    assert set(avd.INSTANCE_NAMES) >= {"quadratic", "lasso_rand", "empty_argmin"}

    print("smoke test OK")


if __name__ == "__main__":
    main()
