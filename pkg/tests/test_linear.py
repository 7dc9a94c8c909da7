import numpy as np
import pytest

from qgsynth.circuit import Circuit
from qgsynth.graphs import (grid_graph, path_graph, shortest_path, star_graph,
                            tree_graph)
from qgsynth.linear import (
    copy_register,
    fanout,
    multi_controlled_x,
    route_cnot,
    route_cnot_gates,
    synth_permutation,
)
from qgsynth.sim import f2_matrix, sparse_run


def as_circuit(n, gates):
    c = Circuit(n)
    c.gates.extend(gates)
    return c


def classical_out(c, basis):
    state = sparse_run(c.expanded(), basis)
    (only,) = [b for b, a in state.items() if abs(a) > 1e-12]
    return only


def test_routed_cnot_is_exact_cnot():
    g = path_graph(6)
    c = route_cnot(g, 1, 6)
    n = 6
    # brute force over all basis states on 6 qubits
    for b in range(1 << n):
        out = classical_out(c, b)
        want = b ^ ((b >> (n - 1)) & 1)  # control qubit 1 -> target qubit 6
        assert out == want


def test_routed_cnot_gate_budget():
    for dist in range(1, 6):
        g = path_graph(dist + 1)
        gates = route_cnot_gates(g, 1, dist + 1)
        assert len(gates) <= 4 * dist


def test_routed_cnot_restores_any_intermediate_state():
    # intermediates in superposition must come back untouched
    g = path_graph(4)
    c = Circuit(4)
    c.h(2)
    c.ry(3, 0.71)
    c.gates.extend(route_cnot_gates(g, 1, 4))
    c.ry(3, -0.71)
    c.h(2)
    for b in (0b0000, 0b1000):
        state = sparse_run(c.expanded(), b)
        want = b ^ ((b >> 3) & 1)
        assert abs(state.get(want, 0)) > 1 - 1e-10


def test_fanout_multi_target_cnot_count():
    # one control, t targets along a line: exactly 2(t+1)-1 CNOTs when the
    # targets span a contiguous path segment of length t
    for t in range(1, 6):
        g = path_graph(t + 1)
        c = fanout(g, 1, list(range(2, t + 2)))
        gates = [x for x in c.gates if x[0] == "cx"]
        assert len(gates) == 2 * (t + 1) - 1 - 2  # 2n-1 with n = t+1 qubits


def test_fanout_semantics():
    g = path_graph(5)
    c = fanout(g, 1, [2, 3, 4, 5])
    for b in (0, 0b10000):
        out = classical_out(c, b)
        want = 0b11111 if b else 0
        assert out == want


def test_synth_permutation():
    g = path_graph(4)
    perm = {1: 3, 3: 1, 2: 4, 4: 2}
    c = synth_permutation(g, perm)
    for b in range(16):
        out = classical_out(c, b)
        bits = {q: (b >> (4 - q)) & 1 for q in range(1, 5)}
        want = sum(bits[q] << (4 - perm[q]) for q in range(1, 5))
        assert out == want


@pytest.mark.parametrize("topology,graph", [
    ("path", path_graph(12)),
    ("grid", grid_graph([4, 3])),
    ("tree", tree_graph(2, n=15)),
])
def test_copy_register_fans_out(topology, graph):
    n = 3
    sinks = [[n + 1 + i * n + j for j in range(n)]
             for i in range((graph.n - n) // n)]
    c = copy_register(graph, list(range(1, n + 1)), sinks, topology=topology)
    for x in range(1 << n):
        b = x << (graph.n - n)
        out = classical_out(c, b)
        want = 0
        for i in range(len(sinks) + 1):
            want |= x << (graph.n - n * (i + 1))
        assert out == want


def test_multi_controlled_x_all_patterns():
    g = path_graph(5)
    for pattern in ("000", "101", "111"):
        c = multi_controlled_x(g, [1, 2, 3], pattern, 5, scratch=(4,))
        for x in range(8):
            b = x << 2
            out = classical_out(c, b)
            fire = format(x, "03b") == pattern
            assert out == (b | 1 if fire else b)


def test_f2_matrix_matches_simulation(rng):
    g = path_graph(5)
    c = Circuit(5)
    for _ in range(15):
        u, v = rng.choice(range(1, 6), size=2, replace=False)
        c.gates.extend(route_cnot_gates(g, int(u), int(v)))
    rows = f2_matrix(c.expanded())  # row bitmasks over input qubits
    for trial in range(8):
        b = int(rng.integers(0, 32))
        want = 0
        for q in range(1, 6):
            bit = (b & rows[q - 1]).bit_count() % 2
            want |= bit << (5 - q)
        assert classical_out(c, b) == want
