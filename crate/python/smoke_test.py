"""Smoke test for the meandim_lab extension module.

Build and install first, for example:
    pip install --no-build-isolation ./crates/python
then run:
    python python/smoke_test.py
"""

import json
import math

import meandim_lab as m


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} != {b} within {tol}"


def main():
    curve = m.ExtremalCurve()
    close(curve.omega1, 0.9688914277666996, 1e-12)
    e = curve.mean_energy()
    close(e, 0.6150198678, 1e-6)
    close(2.0 / curve.lattice_area, e, 1e-10)
    close(4.0 * e, 2.460079471, 4e-6)
    sup, _ = curve.sup_spherical_derivative(seed=1)
    close(sup, 1.0, 1e-4)
    assert curve.value(0j) is not None
    assert curve.ode_residual(0.3 + 0.2j) < 1e-6

    rows = curve.characteristic(8.0, samples=5)
    assert len(rows) == 5
    assert all(t <= math.pi * r * r / 2 for r, t, _ in rows)

    assert m.min_multiplicity_cover(1, 4, 2)["multiplicity"] == 2
    assert m.min_multiplicity_cover(2, 3, 2)["widim_bound"] == 2
    for d, n in [(1, 6), (2, 6), (3, 4)]:
        assert m.brick_cover(d, n, 2)["multiplicity"] == d + 1
    ratios = [r for _, _, r in m.mean_dim_slope("residual", 4, 2, [1, 2, 3, 4])]
    assert ratios == sorted(ratios, reverse=True) and ratios[-1] <= 0.5
    assert [m.residual_fixedpoint_dim(n) for n in range(1, 8)] == list(range(1, 8))

    assert m.riemann_roch_dim(1, 2, 1) == 8
    assert m.theorem1_bounds(3, 0.5, 0.5) == (4.0, 6.0)
    try:
        m.theorem1_bounds(1, 0.9, 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid bounds input accepted")

    close(m.w_eval(1.0, 0j), 1.0, 1e-12)
    i0 = sum(0.25**k / math.factorial(k) ** 2 for k in range(30))
    close(m.w_eval(1.0, 1.0 + 0j), i0, 1e-8)
    assert abs(m.helmholtz_residual(1.0, 0j, 1e-3)) <= 1e-4

    report = json.loads(m.run_report("widim cube"))
    assert report["passed"] and report["command"] == "widim cube"

    print("meandim_lab smoke test passed")


if __name__ == "__main__":
    main()
