from fractions import Fraction

import pytest

from cmvm.fxp import BitWidthSpec, QInterval, qint_from_fixed
from cmvm.verify import check_exhaustive, check_random

# H.264 4x4 integer transform C (y = C x); the equivalent y^T = x^T M problem
# uses M = C^T.
H264_C = [
    [1, 1, 1, 1],
    [2, 1, -1, -2],
    [1, -1, -1, 1],
    [1, -2, 2, -1],
]
H264_M = [list(row) for row in zip(*H264_C)]


def qint_bits(width: int, signed: int = 1) -> QInterval:
    """Integer input of the given width, e.g. (8, 1) -> [-128, 127, 1]."""
    return qint_from_fixed(BitWidthSpec(signed, width, width))


def iter_values(q: QInterval):
    v = q.low
    while v <= q.high:
        yield v
        v += q.step


def assert_equivalent(solution, matrix, input_qints=None, seed=0):
    """The repo's master correctness gate: exhaustive when the input space is
    small enough, otherwise 10^4 seeded random vectors; zero mismatches and no
    interval violations tolerated."""
    if input_qints is None:
        from cmvm.verify import input_qints_of

        input_qints = input_qints_of(solution)
    space = 1
    for q in input_qints:
        space *= int((q.high - q.low) / q.step) + 1
        if space > 1 << 16:
            break
    if space <= 1 << 16:
        rep = check_exhaustive(solution, matrix, input_qints)
    else:
        rep = check_random(solution, matrix, input_qints, trials=10_000, seed=seed)
    assert rep.passed, rep.to_text()
    return rep


@pytest.fixture
def h264():
    return H264_M
