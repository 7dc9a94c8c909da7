"""State preparation, uniformly controlled gates, unary-tree encodings,
and full-unitary synthesis."""
import numpy as np
import pytest

from conftest import distance_up_to_phase
from qgsynth.circuit import Circuit, gate_matrix
from qgsynth.graphs import (
    complete_graph,
    grid_graph,
    path_graph,
    star_graph,
    tree_graph,
)
from qgsynth.sim import simulate, sparse_run, ucg_matrix, verify_target
from qgsynth.states import (
    DecompositionFailure,
    StateSpec,
    UcgSpec,
    UnitarySpec,
    gus_synthesize,
    qsp_synthesize,
    qsp_tree_improved,
    retarget_last,
    state_to_ucgs,
    synth_ucg,
    unary_qsp_tree,
    unary_to_binary,
    unitary_to_ucgs,
    zyz_angles,
)


def random_su2(rng):
    a = rng.normal(size=4)
    a /= np.linalg.norm(a)
    return np.array(
        [[a[0] + 1j * a[1], a[2] + 1j * a[3]],
         [-a[2] + 1j * a[3], a[0] - 1j * a[1]]]
    )


def random_ucg(rng, n, target=None):
    return UcgSpec(n, [random_su2(rng) for _ in range(1 << (n - 1))],
                   target or n)


def test_zyz_reconstruction():
    rng = np.random.default_rng(41)
    for _ in range(20):
        u = random_su2(rng) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        a, b, c, d = zyz_angles(u)
        rebuilt = (np.exp(1j * a)
                   * gate_matrix("rz", b) @ gate_matrix("ry", c)
                   @ gate_matrix("rz", d))
        assert np.max(np.abs(rebuilt - u)) < 1e-12


def test_ucg_reconstruction_any_target():
    rng = np.random.default_rng(42)
    for target in (1, 2, 3):
        V = random_ucg(rng, 3, target)
        c = synth_ucg(complete_graph(3), V, 0)
        res, ok = verify_target(c, V, m=0)
        assert res <= 1e-10 and ok


def test_retarget_last_preserves_matrix():
    rng = np.random.default_rng(43)
    V = random_ucg(rng, 3, 1)
    W = retarget_last(V)
    assert W.target == W.n
    # same operator after relabeling qubit 1 <-> qubit 3
    u = ucg_matrix(V)
    w = ucg_matrix(W)
    perm = [((b >> 2) & 1) | (b & 2) | ((b & 1) << 2) for b in range(8)]
    assert np.max(np.abs(w - u[np.ix_(perm, perm)])) < 1e-12


def test_ucg_with_ancilla_on_tree():
    rng = np.random.default_rng(44)
    V = random_ucg(rng, 3)
    g = tree_graph(2, n=9)
    c = synth_ucg(g, V, 6)
    res, ok = verify_target(c, V, m=6)
    assert res <= 1e-10 and ok


def test_state_cascade_is_exact():
    rng = np.random.default_rng(45)
    for n in (1, 2, 3, 4):
        v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        v /= np.linalg.norm(v)
        ucgs = state_to_ucgs(v)
        assert len(ucgs) == n
        out = np.zeros(1 << n, dtype=complex)
        out[0] = 1.0
        for V in ucgs:  # list order = application order
            full = np.kron(ucg_matrix(V), np.eye(1 << (n - V.n)))
            out = full @ out
        assert distance_up_to_phase(out, v) < 1e-10


def test_state_cascade_handles_zero_branches():
    v = np.zeros(8, dtype=complex)
    v[0] = 1 / np.sqrt(2)
    v[5] = 1j / np.sqrt(2)
    ucgs = state_to_ucgs(v)
    out = np.zeros(8, dtype=complex)
    out[0] = 1.0
    for V in ucgs:
        full = np.kron(ucg_matrix(V), np.eye(1 << (3 - V.n)))
        out = full @ out
    assert distance_up_to_phase(out, v) < 1e-12


@pytest.mark.parametrize(
    "make_g",
    [
        lambda k: path_graph(k),
        lambda k: star_graph(k),
        lambda k: tree_graph(2, n=k),
        lambda k: complete_graph(k),
    ],
)
def test_qsp_families_exact(make_g):
    rng = np.random.default_rng(46)
    for n in (2, 3, 4):
        v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        v /= np.linalg.norm(v)
        g = make_g(n)
        c, report = qsp_synthesize(g, StateSpec(n, v), m=0)
        assert report["violations"] == []
        res, ok = verify_target(c, StateSpec(n, v), m=0)
        assert res <= 1e-9 and ok


def test_qsp_grid_with_ancilla():
    rng = np.random.default_rng(47)
    n = 4
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    v /= np.linalg.norm(v)
    g = grid_graph([3, 3])
    c, report = qsp_synthesize(g, StateSpec(n, v), m=5)
    assert report["violations"] == []
    res, ok = verify_target(c, StateSpec(n, v), m=5)
    assert res <= 1e-9 and ok


def test_unary_tree_prepares_leaf_superposition():
    rng = np.random.default_rng(48)
    for n in (1, 2, 3):
        size = 1 << n
        v = rng.normal(size=size) + 1j * rng.normal(size=size)
        v /= np.linalg.norm(v)
        c = unary_qsp_tree(v)
        nv = (1 << (n + 1)) - 1
        assert c.n == nv
        assert c.meta["step_depth"] <= 3 * n + 2
        state = sparse_run(c.expanded(), 0)
        got = np.zeros(size, dtype=complex)
        for b, a in state.items():
            # exactly one leaf bit set, internal vertices clear
            ones = [q for q in range(1, nv + 1) if (b >> (nv - q)) & 1]
            assert len(ones) == 1 and ones[0] > size - 1
            got[ones[0] - size] = a
        assert distance_up_to_phase(got, v) < 1e-10


def test_unary_to_binary_all_basis_inputs():
    for n in (1, 2, 3):
        c = unary_to_binary(n)
        nv = (1 << (n + 1)) - 1
        for x in range(1 << n):
            leaf = (1 << n) + x  # heap index of leaf x
            b_in = 1 << (nv - leaf)
            state = sparse_run(c.expanded(), b_in)
            assert len(state) == 1
            ((b_out, a),) = state.items()
            assert abs(abs(a) - 1.0) < 1e-12
            assert b_out == x << (nv - n)


def test_qsp_tree_improved_exact():
    rng = np.random.default_rng(49)
    n = 3
    for m in (0, 4, 15):
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        v /= np.linalg.norm(v)
        c = qsp_tree_improved(StateSpec(n, v), m)
        res, ok = verify_target(c, StateSpec(n, v), m=c.n - n)
        assert res <= 1e-9 and ok


def test_unitary_demux_ucg_count_and_exactness():
    rng = np.random.default_rng(50)
    for n in (1, 2, 3):
        z = rng.normal(size=(1 << n, 1 << n)) + 1j * rng.normal(
            size=(1 << n, 1 << n))
        q, _ = np.linalg.qr(z)
        ucgs = unitary_to_ucgs(UnitarySpec(n, q))
        assert len(ucgs) == (1 << n) - 1
        u = np.eye(1 << n, dtype=complex)
        for V in ucgs:  # list order = application order
            u = ucg_matrix(V) @ u
        ph = u[0, 0] / q[0, 0] if abs(q[0, 0]) > 1e-9 else None
        if ph is None:
            r, s = np.unravel_index(np.argmax(np.abs(q)), q.shape)
            ph = u[r, s] / q[r, s]
        ph /= abs(ph)
        assert np.max(np.abs(u - ph * q)) < 1e-9


def test_gus_on_path_is_exact():
    rng = np.random.default_rng(51)
    n = 3
    z = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    q, _ = np.linalg.qr(z)
    g = path_graph(3)
    c, report = gus_synthesize(g, UnitarySpec(n, q), m=0)
    assert report["violations"] == []
    assert report["ucg_count"] == 7
    res, ok = verify_target(c, UnitarySpec(n, q), m=0)
    assert res <= 1e-7 and ok


def test_gus_rejects_non_unitary_and_large_n():
    with pytest.raises(DecompositionFailure):
        UnitarySpec(2, np.ones((4, 4)))
    rng = np.random.default_rng(52)
    z = rng.normal(size=(64, 64))
    q, _ = np.linalg.qr(z)
    with pytest.raises(ValueError):
        gus_synthesize(complete_graph(6), UnitarySpec(6, q), m=0)
