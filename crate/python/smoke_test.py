#!/usr/bin/env python3
"""Smoke test for the coldplasma_py extension module.

Builds nothing itself; expects the cdylib from `cargo build -p coldplasma-py`
(or `--release`) and loads it directly from the target directory.
"""

import importlib.util
import math
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]


def load_module():
    candidates = [
        ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libcoldplasma_py.so", "coldplasma_py.so")
    ]
    for path in candidates:
        if path.exists():
            spec = importlib.util.spec_from_file_location("coldplasma_py", path)
            mod = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(mod)
            return mod
    sys.exit("coldplasma_py cdylib not found; run `cargo build -p coldplasma-py` first")


def main():
    cp = load_module()

    # Exact criterion values.
    assert cp.delta(0.0, 0.0) == -1.0
    assert cp.delta(0.0, 0.65) == pytest_approx(0.3)
    lhs, rhs = cp.delta_p(0.0, 0.5, 0.1, 1.0, 2.0)
    assert lhs == pytest_approx(0.0)
    assert rhs == pytest_approx(1.0 * 0.1**2 / 0.5)

    # Supercritical characteristic blows up near t = 2.14, subcritical never.
    res = cp.integrate_characteristic(0.0, 0.65, t_end=10.0)
    assert res.blew_up and abs(res.t_star - 2.139) < 0.01, res.t_star
    res = cp.integrate_characteristic(0.0, 0.4, t_end=50.0)
    assert not res.blew_up

    # Phase plane: a center without friction, three equilibria for nu = 3.
    eqs = cp.classify_equilibria(0.0)
    assert [k for _, _, k in eqs] == ["Center"]
    kinds = sorted(k for _, _, k in cp.classify_equilibria(3.0))
    assert kinds == ["Saddle", "StableNode", "UnstableNode"], kinds
    boundary = cp.trace_separatrix(0.0, rays=32, horizon=60.0)
    radii = [math.hypot(e, v) for e, v in boundary]
    assert all(r > 0.2 for r in radii)

    # Initial data and the smooth subcritical Eulerian run.
    init = cp.InitialData.laser(0.05)
    assert init.velocity(0.3) == 0.0
    assert abs(init.field(1.0) + 0.05 * 2.0 * math.exp(-1.0)) < 1e-15
    profile = init.delta_profile([0.0, 1.0, 5.0])
    assert all(d < 0 for d in profile)

    run = cp.solve(init, t_end=2 * math.pi, cells=512, mu=0.0)
    assert not run.blew_up
    assert max(abs(v) for v in run.v) < 0.2
    assert len(run.x) == len(run.n) == 512

    # Supercritical amplitude blows up with a finite t_star.
    bad = cp.solve(cp.InitialData.laser(0.9), t_end=10.0, cells=512, scheme="central")
    assert bad.blew_up and bad.t_star is not None

    # Stochastic moments: unit mass, finite fields, deterministic reruns.
    g = cp.InitialData.gaussian(0.3)
    kw = dict(sigma=0.1, n=20000, seed=7, t_end=0.5, dt=0.05, cells=128, f0="gaussian")
    m1 = cp.stochastic_moments(g, **kw)
    m2 = cp.stochastic_moments(g, **kw)
    assert abs(m1.mass - 1.0) < 1e-3, m1.mass
    assert m1.rho == m2.rho
    same = lambda a, b: a == b or (math.isnan(a) and math.isnan(b))
    assert all(same(a, b) for a, b in zip(m1.vhat, m2.vhat))
    assert all(math.isfinite(r) for r in m1.rho)

    # Validation errors surface as ValueError.
    for thunk in (
        lambda: cp.InitialData.laser(-1.0),
        lambda: cp.solve(init, t_end=1.0, cfl=2.0),
        lambda: cp.classify_equilibria(-1.0),
    ):
        try:
            thunk()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print("smoke test passed")


def pytest_approx(x, tol=1e-12):
    class Approx:
        def __eq__(self, other):
            return abs(other - x) <= tol

    return Approx()


if __name__ == "__main__":
    main()
