import numpy as np
import pytest

from lcslab.lcs import LcsStructure, warped_product
from lcslab.riemann import MetricField
from lcslab.submanifold import Immersion

# criterion number -> (ok, detail), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def exp3():
    return warped_product(3, "exp(t)")


@pytest.fixture(scope="session")
def slice_exp(exp3):
    """t = 0 slice of -dt^2 + e^{2t}(dx^2 + dy^2)."""
    return Immersion.slice(exp3, 2, 0.0)


@pytest.fixture(scope="session")
def euclid3():
    return LcsStructure.degenerate(MetricField.euclidean(3))


def sphere(radius, ambient):
    r = repr(float(radius))
    return Immersion(ambient, [f"{r}*sin(u1)*cos(u2)", f"{r}*sin(u1)*sin(u2)", f"{r}*cos(u1)"], 2)


def random_graph(seed, warp="cosh(t)", n=4, m=2, t0=0.8, t_range=(0.2, 1.5)):
    """Graph immersion with small random coefficients so the tangent stays spacelike."""
    rng = np.random.default_rng(seed)
    s = warped_product(n, warp, t_range)
    u = [f"u{i}" for i in range(1, m + 1)]
    comps = []
    for c in range(n - m):
        a = rng.uniform(-0.2, 0.2, size=(4, m))
        terms = [f"{float(a[0, i])!r}*{u[i]}" for i in range(m)]
        terms += [f"{float(a[1, i])!r}*{u[i]}^2" for i in range(m)]
        terms += [f"{float(a[2, i])!r}*sin({u[i]})*{u[(i + 1) % m]}" for i in range(m)]
        terms += [f"{float(a[3, i])!r}*exp(0.3*{u[i]})" for i in range(m)]
        base = repr(t0) if c == 0 else repr(float(rng.uniform(-0.5, 0.5)))
        comps.append(base + "+" + "+".join(terms))
    return Immersion.graph(s, comps, m), rng.uniform(-0.4, 0.4, size=m)
