"""Gate-level IR over {1-qubit gates, CNOT} with a SWAP macro.

Gates are stored as plain tuples (name, qubits, param) to keep circuits with
~10^6 gates cheap.  `param` is an angle for r/rz/ry, a 2x2 ndarray for u2,
and None otherwise.  Qubits are 1-based, matching graph vertices; ancilla are
the trailing `ancilla` qubits by convention.
"""

from __future__ import annotations

import cmath
import json
import math

import numpy as np

ONE_QUBIT = {"r", "rz", "ry", "h", "s", "sdg", "x", "u2"}
TWO_QUBIT = {"cx", "swap"}
PARAM_GATES = {"r", "rz", "ry"}

_SQ2 = 1.0 / math.sqrt(2.0)
_H = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


class ParseError(ValueError):
    pass


def gate_matrix(name, param=None):
    """2x2 matrix of a 1-qubit gate."""
    if name == "r":
        return np.array([[1, 0], [0, cmath.exp(1j * param)]], dtype=complex)
    if name == "rz":
        return np.array(
            [[cmath.exp(-0.5j * param), 0], [0, cmath.exp(0.5j * param)]],
            dtype=complex,
        )
    if name == "ry":
        c, s = math.cos(param / 2), math.sin(param / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if name == "h":
        return _H
    if name == "s":
        return _S
    if name == "sdg":
        return _S.conj()
    if name == "x":
        return _X
    if name == "u2":
        return param
    raise ValueError(f"not a 1-qubit gate: {name}")


class Circuit:
    __slots__ = ("n", "ancilla", "gates", "meta")

    def __init__(self, n, ancilla=0, gates=None):
        self.n = n
        self.ancilla = ancilla
        self.gates = list(gates) if gates else []
        self.meta = {}

    # -- builders -----------------------------------------------------------
    def add(self, name, qubits, param=None):
        if name in ONE_QUBIT:
            (q,) = qubits
            if not 1 <= q <= self.n:
                raise ValueError(f"qubit {q} out of range")
        else:
            a, b = qubits
            if a == b:
                raise ValueError("two-qubit gate needs distinct qubits")
            for q in (a, b):
                if not 1 <= q <= self.n:
                    raise ValueError(f"qubit {q} out of range")
        self.gates.append((name, tuple(qubits), param))

    def r(self, q, theta):
        self.add("r", (q,), theta)

    def rz(self, q, theta):
        self.add("rz", (q,), theta)

    def ry(self, q, theta):
        self.add("ry", (q,), theta)

    def h(self, q):
        self.add("h", (q,))

    def s(self, q):
        self.add("s", (q,))

    def sdg(self, q):
        self.add("sdg", (q,))

    def x(self, q):
        self.add("x", (q,))

    def u2(self, q, mat):
        self.add("u2", (q,), np.asarray(mat, dtype=complex))

    def cx(self, c, t):
        self.add("cx", (c, t))

    def swap(self, a, b):
        self.add("swap", (a, b))

    def extend(self, other):
        if isinstance(other, Circuit):
            self.gates.extend(other.gates)
        else:
            self.gates.extend(other)

    # -- transforms ---------------------------------------------------------
    def expanded(self):
        """A copy with SWAP macros expanded to 3 CNOTs."""
        c = Circuit(self.n, self.ancilla)
        for name, qs, p in self.gates:
            if name == "swap":
                a, b = qs
                c.gates.append(("cx", (a, b), None))
                c.gates.append(("cx", (b, a), None))
                c.gates.append(("cx", (a, b), None))
            else:
                c.gates.append((name, qs, p))
        return c

    def inverse(self):
        """Adjoint circuit (reversed order, each gate inverted)."""
        c = Circuit(self.n, self.ancilla)
        for name, qs, p in reversed(self.gates):
            if name in PARAM_GATES:
                c.gates.append((name, qs, -p))
            elif name == "s":
                c.gates.append(("sdg", qs, None))
            elif name == "sdg":
                c.gates.append(("s", qs, None))
            elif name == "u2":
                c.gates.append(("u2", qs, p.conj().T))
            else:  # h, x, cx, swap are self-inverse
                c.gates.append((name, qs, p))
        return c

    def metrics(self):
        """(depth, size, two_qubit_count) with greedy ASAP layering after
        macro expansion."""
        last = [0] * (self.n + 1)
        size = 0
        twoq = 0
        for name, qs, _ in self.gates:
            if name == "swap":
                size += 3
                twoq += 3
                a, b = qs
                lay = max(last[a], last[b]) + 3
                last[a] = last[b] = lay
            elif name == "cx":
                size += 1
                twoq += 1
                a, b = qs
                lay = max(last[a], last[b]) + 1
                last[a] = last[b] = lay
            else:
                size += 1
                (q,) = qs
                last[q] += 1
        return max(last), size, twoq

    def depth(self):
        return self.metrics()[0]


def compose_inverse(c):
    return c.inverse()


def validate_connectivity(c, g):
    """Every 2-qubit gate whose pair is not a graph edge."""
    bad = []
    for gate in c.gates:
        name, qs, _ = gate
        if name in TWO_QUBIT and not g.has_edge(*qs):
            bad.append(gate)
    return bad


class LayeredCircuit:
    """Alternating normal form: d+1 single-qubit layers (dicts qubit -> 2x2
    matrix) interleaved with d CNOT layers (lists of (c, t) pairs).

    layers_1q[i] sits before cnot_layers[i]; layers_1q[d] is the final layer.
    """

    def __init__(self, n, layers_1q, cnot_layers):
        self.n = n
        self.layers_1q = layers_1q
        self.cnot_layers = cnot_layers

    @property
    def d(self):
        return len(self.cnot_layers)

    def to_circuit(self):
        c = Circuit(self.n)
        for i, oneq in enumerate(self.layers_1q):
            for q, mat in sorted(oneq.items()):
                c.u2(q, mat)
            if i < len(self.cnot_layers):
                for a, b in self.cnot_layers[i]:
                    c.cx(a, b)
        return c


def to_layered_form(c):
    """Merge single-qubit runs and schedule CNOTs ASAP into the alternating
    normal form (computes the same unitary)."""
    c = c.expanded()
    pending = {}  # qubit -> accumulated 2x2
    last = [0] * (c.n + 1)  # last CNOT layer touching each qubit
    oneq_layers = [dict()]
    cnot_layers = []

    def flush(q, layer):
        # merge pending 1q matrix into the 1q slot right before cnot layer
        # index `layer` (0-based)
        if q in pending:
            while len(oneq_layers) <= layer:
                oneq_layers.append(dict())
            slot = oneq_layers[layer]
            slot[q] = pending.pop(q) @ slot.get(q, np.eye(2, dtype=complex))

    for name, qs, p in c.gates:
        if name == "cx":
            a, b = qs
            lay = max(last[a], last[b])  # 0-based cnot layer index
            flush(a, lay)
            flush(b, lay)
            while len(cnot_layers) <= lay:
                cnot_layers.append([])
            cnot_layers[lay].append((a, b))
            last[a] = last[b] = lay + 1
        else:
            (q,) = qs
            pending[q] = gate_matrix(name, p) @ pending.get(
                q, np.eye(2, dtype=complex)
            )
    final = len(cnot_layers)
    for q in list(pending):
        flush(q, final)
    while len(oneq_layers) < len(cnot_layers) + 1:
        oneq_layers.append(dict())
    return LayeredCircuit(c.n, oneq_layers, cnot_layers)


# -- serialization ----------------------------------------------------------

_JSON_GATES = {"r", "rz", "ry", "h", "s", "sdg", "x", "cx", "swap"}


def circuit_to_json(c):
    gates = []
    for name, qs, p in c.gates:
        if name == "u2":
            raise ParseError("u2 gates are internal-only and not serializable")
        g = {"g": name, "q": list(qs)}
        if name in PARAM_GATES:
            g["p"] = [float(p)]
        gates.append(g)
    return {"n": c.n, "ancilla": c.ancilla, "gates": gates}


def circuit_from_json(obj):
    if isinstance(obj, (bytes, str)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as e:
            raise ParseError(f"bad JSON: {e}") from None
    try:
        n = int(obj["n"])
        anc = int(obj.get("ancilla", 0))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"bad circuit header: {e}") from None
    c = Circuit(n, anc)
    for i, g in enumerate(obj.get("gates", [])):
        try:
            name = g["g"]
            qs = tuple(int(q) for q in g["q"])
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"gate {i}: {e}") from None
        if name not in _JSON_GATES:
            raise ParseError(f"gate {i}: unknown gate {name!r}")
        p = None
        if name in PARAM_GATES:
            try:
                (p,) = g["p"]
                p = float(p)
            except (KeyError, TypeError, ValueError) as e:
                raise ParseError(f"gate {i}: bad params: {e}") from None
        try:
            c.add(name, qs, p)
        except ValueError as e:
            raise ParseError(f"gate {i}: {e}") from None
    return c


def dumps(c):
    return json.dumps(circuit_to_json(c))


def loads(text):
    return circuit_from_json(text)
