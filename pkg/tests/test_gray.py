import math

import numpy as np
from hypothesis import given, settings, strategies as st

from qgsynth.gray import (
    gray_code,
    phase_from_coefficients,
    solve_phase_coefficients,
)


def test_codewords_cover_and_flip_once():
    for n in range(1, 8):
        for i in range(1, n + 1):
            gc = gray_code(n, i)
            assert gc.codewords[0] == 0
            assert len(set(gc.codewords)) == 1 << n
            for j in range(1, 1 << n):
                diff = gc.codewords[j] ^ gc.codewords[j - 1]
                assert diff.bit_count() == 1
            # wrap flip closes the cycle
            assert (gc.codewords[-1] ^ gc.codewords[0]).bit_count() == 1


def test_flip_bit_histogram():
    # the start-anywhere family shifts which bit flips most often, but the
    # per-bit flip counts stay the powers of two
    for n in range(2, 8):
        gc = gray_code(n, 1)
        counts = {}
        for f in gc.flips[1:]:
            counts[f] = counts.get(f, 0) + 1
        values = sorted(counts.values(), reverse=True)
        assert values == [1 << (n - k) for k in range(1, n)] + [1]


def test_distinct_sequences_differ_in_first_flip():
    n = 5
    first = {gray_code(n, i).flips[1] for i in range(1, n + 1)}
    assert len(first) == n


def dense_solve(theta):
    n = int(math.log2(len(theta)))
    size = 1 << n
    rows = []
    for x in range(size):
        rows.append([(x & s).bit_count() % 2 for s in range(size)])
    coeff, *_ = np.linalg.lstsq(np.array(rows, dtype=float), theta,
                                rcond=None)
    return coeff


def test_solver_matches_dense_oracle(rng):
    for n in range(1, 6):
        theta = rng.uniform(0, 2 * math.pi, size=1 << n)
        theta[0] = 0.0
        fast = solve_phase_coefficients(theta)
        dense = dense_solve(theta)
        assert np.max(np.abs(fast[1:] - dense[1:])) < 1e-10


def test_solver_round_trip(rng):
    for n in range(1, 9):
        theta = rng.uniform(-math.pi, math.pi, size=1 << n)
        theta[0] = 0.0
        alpha = solve_phase_coefficients(theta)
        back = phase_from_coefficients(alpha)
        assert np.max(np.abs(back - theta)) < 1e-9


@given(st.integers(1, 6), st.integers(0))
@settings(max_examples=40, deadline=None)
def test_parity_reconstruction_property(n, seed):
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 1, size=1 << n)
    theta[0] = 0.0
    alpha = solve_phase_coefficients(theta)
    x = int(rng.integers(0, 1 << n))
    acc = sum(alpha[s] for s in range(1, 1 << n) if (s & x).bit_count() % 2)
    assert abs(acc - theta[x]) < 1e-9
