"""Smoke test for the fraclog extension module.

Build and install with `maturin develop -m crates/py/Cargo.toml`, or copy
`target/release/libfraclog_py.so` to `fraclog.so` on PYTHONPATH, then run
`python python/smoke_test.py`.
"""

import math

import fraclog


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    assert close(fraclog.gamma(0.5), math.sqrt(math.pi), 1e-13)
    assert close(fraclog.mittag_leffler(0.5, -1.0), 0.4275835762, 1e-10)
    assert close(fraclog.mittag_leffler(1.0, -1.0), math.exp(-1.0), 1e-12)
    ref = fraclog.mittag_leffler_reference(0.5, -1.0, beta=0.5)
    assert close(fraclog.mittag_leffler(0.5, -1.0, beta=0.5), ref, 1e-12)

    bracket = fraclog.blowup_bracket(0.5, 2.0)
    assert close(bracket.upper, math.pi / 4, 1e-12)
    square, shifted = fraclog.comparison_brackets(0.5, 1.0)
    assert shifted.upper < square.upper

    w = fraclog.cq_weights("rl", 0.5, 1.0, 2)
    assert close(w[1], 0.5, 1e-10) and close(w[2], 0.375, 1e-10)

    traj = fraclog.solve(0.5, 2.0, h=1e-4)
    assert traj.status == "blew_up"
    assert traj.blowup_time in bracket
    assert fraclog.Trajectory.from_csv(traj.to_csv()).values == traj.values

    glob = fraclog.solve(0.5, 0.5, h=1e-3, t_max=2.0)
    assert glob.status == "completed" and max(glob.values) < 1.0
    assert max(abs(r) for r in fraclog.caputo_residual(glob, 0.5)) < 0.12
    report = fraclog.verify_run(0.5, 0.5, glob, 1e-3, 2.0)
    assert all(passed for _, passed, _, _ in report), report

    sq = fraclog.solve(0.5, 1.0, h=1e-5, t_max=1.6, problem="square", picard=True)
    _, coeff = fraclog.fit_blowup_profile(sq, 0.5)
    assert abs(coeff / fraclog.profile_coefficient(0.5) - 1.0) < 0.25

    try:
        fraclog.solve(1.5, 2.0)
    except ValueError:
        pass
    else:
        raise AssertionError("alpha = 1.5 accepted")
    try:
        fraclog.cq_weights("growth", 0.5, 1.5, 10)
    except fraclog.AccuracyError:
        pass
    else:
        raise AssertionError("growth contour with h >= 1 accepted")

    print("fraclog smoke test passed:", traj, bracket)


if __name__ == "__main__":
    main()
