import numpy as np
import pytest

from nncsreach.interval import Box
from nncsreach.network import Affine, Network, ReLU


def random_net(rng, sizes, scale=1.0):
    """ReLU MLP with the given layer widths (input first, output last)."""
    layers = []
    for k in range(len(sizes) - 1):
        W = rng.normal(0.0, scale / np.sqrt(sizes[k]), size=(sizes[k + 1], sizes[k]))
        b = rng.normal(0.0, 0.3, size=sizes[k + 1])
        layers.append(Affine(W, b))
        if k < len(sizes) - 2:
            layers.append(ReLU())
    return Network(layers, sizes[0])


def random_box(rng, n, spread=1.0, max_width=1.0):
    lo = rng.uniform(-spread, spread, size=n)
    return Box(lo, lo + rng.uniform(0.05, max_width, size=n))


def leaf_oracle(net, in_box, union, xs, tol=1e-8):
    """Two-sided check of an exact image computed from ``StarSet.from_box``.

    Leaves keep the input's latent coordinates ``a = x - center``, so each
    input point is tested against leaf polytopes directly and leaf points are
    compared with the network evaluated at the matching input.
    Returns ``(missed_inputs, wrong_leaf_points)``.
    """
    alphas = xs - in_box.center
    ys = net.eval(xs)
    covered = np.zeros(len(xs), dtype=bool)
    wrong = 0
    for leaf in union:
        inside = leaf.latent_member(alphas, tol=1e-10)
        if inside.any():
            got = leaf.points(alphas[inside])
            err = np.abs(got - ys[inside]).max()
            wrong += int(err > tol)
        covered |= inside
        a, pts = leaf.sample(np.random.default_rng(0), 50)
        if len(a):
            back = net.eval(in_box.center + a)
            wrong += int(np.abs(back - pts).max() > tol)
    return int((~covered).sum()), wrong


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance report ----------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record and print one PASS/FAIL line, then assert on it."""
    def report(number: int, ok: bool, detail: str):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
