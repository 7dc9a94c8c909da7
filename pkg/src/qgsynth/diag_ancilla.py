"""Ancilla-assisted synthesis of diagonal unitaries on constrained graphs.

The main pipeline splits the phase function theta(x) = sum_s alpha_s <s,x>
by suffix: with p suffix bits, 2^p borrowed target qubits each track one
suffix pattern t_k, and a Gray cycle over the 2^{n-p} prefixes visits every
nonzero s exactly once.  Five stages: suffix copy, Gray initial, prefix
copy, Gray cycle, inverse.  Layouts exist for paths, grids (along a
Hamiltonian path) and binary trees; expanders use a 3-stage variant that
re-fans single bits through the matching cascade instead of keeping copies.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .diag import DiagonalSpec, synth_diag_noancilla
from .diag import _is_complete as _diag_is_complete
from .graphs import (
    ConstraintGraph,
    GrowthStalled,
    expander_cascade,
    explicit_graph,
    hamiltonian_path_grid,
    path_graph,
    tree_graph,
    vertex_expansion,
)
from .gray import gray_code, solve_phase_coefficients
from .linear import route_cnot_gates, synth_permutation
from .sim import assemble_report


class InsufficientAncilla(ValueError):
    """Too few (or unusably placed) ancilla qubits for the requested layout."""


@dataclass
class SubRegister:
    """One block R_q of the ancilla region.

    copy_slots hold repeated copies of input bits (suffix bits during the
    suffix-copy stage, prefix bits afterwards), targ_slots hold the running
    parities <s(j,k), x>, aux_slots hold extra copies of the low prefix bits
    so that frequent Gray-cycle CNOTs stay short.
    """

    copy_slots: list
    targ_slots: list
    aux_slots: list


@dataclass
class RegisterLayout:
    r_inp: list
    r_copy: list
    r_targ: list  # exactly 2^p vertices; index k-1 is target k
    r_aux: list
    p: int
    tau: int
    ell_plan: list  # Gray-code index for each target, length 2^p
    sub_registers: list  # SubRegister blocks
    kind: str = ""
    wasted: int = 0

    def __post_init__(self):
        regs = [self.r_inp, self.r_copy, self.r_targ, self.r_aux]
        seen = set()
        for reg in regs:
            for v in reg:
                if v in seen:
                    raise ValueError(f"vertex {v} in two registers")
                seen.add(v)
        if len(self.r_targ) != 1 << self.p:
            raise ValueError("target register must have 2^p qubits")
        if len(self.ell_plan) != 1 << self.p:
            raise ValueError("ell_plan length mismatch")


@dataclass
class StageTrace:
    """Per-stage circuits; their concatenation is the emitted circuit."""

    stages: list  # (name, Circuit) in emission order

    def table(self):
        out = []
        for name, c in self.stages:
            depth, size, twoq = c.metrics()
            out.append({"stage": name, "depth": depth, "size": size,
                        "two_qubit": twoq})
        return out

    def circuit(self, n):
        c = Circuit(n)
        for _, sc in self.stages:
            c.gates.extend(sc.gates)
        return c


def _aux_width(n_pre):
    """Cutoff tau: bits x_1..x_tau get dedicated nearby copies."""
    if n_pre < 2:
        return 0
    return min(2 * math.ceil(math.log2(n_pre)), n_pre)


def _blocks_on_line(order, n, m_eff, p0):
    """Greedy placement of R_1..R_r along `order` (ancilla vertices in line
    order): per block, n-p alternating copy/target pairs then tau aux slots.
    Returns (p, tau, blocks); shrinks p (and then tau, possibly to 0)
    until the blocks fit."""
    for p in range(min(p0, n - 1), 0, -1):
        npf = n - p
        r = -(-(1 << p) // npf)
        if 2 * r * npf <= m_eff:
            tau = min(_aux_width(npf), max(0, m_eff // r - 2 * npf))
            break
    else:
        raise InsufficientAncilla("no block arrangement fits")
    npf = n - p
    blocks = []
    pos = iter(order)
    placed = 0
    for _ in range(r):
        copy, targ, aux = [], [], []
        for _ in range(npf):
            copy.append(next(pos))
            v = next(pos)
            if placed < (1 << p):
                targ.append(v)
                placed += 1
        for _ in range(tau):
            aux.append(next(pos))
        blocks.append(SubRegister(copy, targ, aux))
    return p, tau, blocks


def _line_layout(g, n, m, order, p0, kind):
    m_eff = min(m, 3 * (1 << n))
    p, tau, blocks = _blocks_on_line(order[n:n + m_eff], n, m_eff, p0)
    npf = n - p
    r_targ, ell_plan = [], []
    for b in blocks:
        for v in b.targ_slots:
            k = len(r_targ) + 1
            r_targ.append(v)
            ell_plan.append((k - 1) % npf + 1)
    used = sum(2 * npf + tau for _ in blocks)
    return RegisterLayout(
        r_inp=order[:n],
        r_copy=[v for b in blocks for v in b.copy_slots],
        r_targ=r_targ,
        r_aux=[v for b in blocks for v in b.aux_slots],
        p=p,
        tau=tau,
        ell_plan=ell_plan,
        sub_registers=blocks,
        kind=kind,
        wasted=m - used,
    )


def _tree_layout(g, n, m):
    # heap labels: children of v are 2v, 2v+1; depth of v is bitlength-1
    kappa = math.ceil(math.log2(n + 1)) - 1
    d_total = g.n.bit_length() - 1  # deepest fully-present level
    b0 = max(1, math.ceil(math.log2(max(2.0, 2 * math.log2(n)))))
    roots = []
    for b in range(b0, 0, -1):
        span = kappa + b + 1
        roots = []
        depth = d_total - span + 1
        while depth >= kappa + 1:
            level = [v for v in range(1 << depth, 1 << (depth + 1))
                     if v * (1 << (span - 1)) + ((1 << (span - 1)) - 1) <= g.n]
            roots.extend(level)
            depth -= span
        if roots:
            copy_layers = range(kappa + 1)
            targ_layer = kappa + 1
            aux_layers = range(kappa + 2, kappa + b + 1)
            break
    else:
        # small-instance tier: one layer of subtrees directly below the
        # input region, last layer as targets, no dedicated aux copies
        span = d_total - kappa
        if span < 2:
            raise InsufficientAncilla("tree too shallow for a subtree layout")
        b = 1
        roots = [v for v in range(1 << (kappa + 1), 1 << (kappa + 2))
                 if v * (1 << (span - 1)) + ((1 << (span - 1)) - 1) <= g.n]
        if not roots:
            raise InsufficientAncilla("tree too shallow for a subtree layout")
        copy_layers = range(span - 1)
        targ_layer = span - 1
        aux_layers = range(0)

    def level_of(z, rel):
        return list(range(z << rel, (z << rel) + (1 << rel)))

    total_targets = len(roots) * (1 << targ_layer)
    p = min(int(math.log2(total_targets)), n - 1)
    if p < 1:
        raise InsufficientAncilla("no room for target qubits in tree")
    npf = n - p
    tau = min((1 << b) - 2, npf) if len(aux_layers) else 0
    blocks, r_targ, ell_plan = [], [], []
    for z in roots:
        copy = [v for rel in copy_layers for v in level_of(z, rel)]
        targ_all = level_of(z, targ_layer)
        aux = [v for rel in aux_layers for v in level_of(z, rel)]
        targ = []
        for v in targ_all:
            if len(r_targ) < (1 << p):
                targ.append(v)
                r_targ.append(v)
                ell_plan.append(1)
        blocks.append(SubRegister(copy, targ, aux))
    used = sum(len(b.copy_slots) + len(b.targ_slots) + len(b.aux_slots)
               for b in blocks)
    return RegisterLayout(
        r_inp=list(range(1, n + 1)),
        r_copy=[v for b in blocks for v in b.copy_slots],
        r_targ=r_targ,
        r_aux=[v for b in blocks for v in b.aux_slots],
        p=p,
        tau=tau,
        ell_plan=ell_plan,
        sub_registers=blocks,
        kind="tree",
        wasted=m - used,
    )


def build_layout(g, n, m):
    """Register layout for the 5-stage pipeline on g (n inputs, m ancilla)."""
    if n < 2:
        raise ValueError("need n >= 2")
    if n + m > g.n:
        raise ValueError("graph has fewer than n + m vertices")
    if g.kind == "path":
        p0 = max(1, int(math.log2(max(2.0, min(m, 3 << n) / 3))))
        return _line_layout(g, n, m, list(range(1, n + m + 1)), p0, "path")
    if g.kind == "grid":
        if m < 36 * n:
            raise InsufficientAncilla(f"grid layout needs m >= 36n, got {m}")
        order = hamiltonian_path_grid(g.params["dims"])
        p0 = int(math.log2(min(m, 18 << n) / 18))
        return _line_layout(g, n, m, order, p0, "grid")
    if g.kind == "tree" and g.params.get("arity") == 2:
        try:
            return _tree_layout(g, n, m)
        except InsufficientAncilla:
            # shallow trees cannot host complete subtree blocks; fall back
            # to greedy blocks over a depth-first order of the ancilla
            # region (the router keeps every CNOT on tree edges)
            order = list(range(1, n + 1))
            stack = [1]
            while stack:
                v = stack.pop()
                if v > g.n:
                    continue
                if v > n:
                    order.append(v)
                stack.append(2 * v + 1)
                stack.append(2 * v)
            p0 = max(1, int(math.log2(max(2.0, min(m, 3 << n) / 3))))
            return _line_layout(g, n, m, order, p0, "tree")
    raise InsufficientAncilla(f"no ancilla layout for graph kind {g.kind!r}")


class _Router:
    """Routed-CNOT emitter with a distance/path cache and a record of which
    copy vertex currently holds which input bit."""

    def __init__(self, g, r_inp):
        self.g = g
        self.r_inp = r_inp
        self.holding = {}  # vertex -> input-bit index
        self._dist = {}
        self._routes = {}

    def dist(self, u, v):
        if u not in self._dist:
            self._dist[u] = self.g.bfs_dist(u)
        return self._dist[u][v]

    def cnot(self, circ, u, v):
        key = (u, v)
        if key not in self._routes:
            self._routes[key] = route_cnot_gates(self.g, u, v)
        circ.gates.extend(self._routes[key])

    def source(self, bit, near):
        """Closest vertex currently holding x_bit (the input qubit always
        qualifies)."""
        best = self.r_inp[bit - 1]
        bd = self.dist(near, best)
        for v, b in self.holding.items():
            if b == bit:
                d = self.dist(near, v)
                if d < bd:
                    best, bd = v, d
        return best


def _stage_sufcopy(g, layout, rt):
    c = Circuit(g.n)
    n = len(layout.r_inp)
    p = layout.p
    for blk in layout.sub_registers:
        for idx, v in enumerate(blk.copy_slots):
            bit = n - p + 1 + (idx % p)
            rt.cnot(c, rt.source(bit, v), v)
            rt.holding[v] = bit
    return c


def _stage_grayinit(g, layout, rt):
    c = Circuit(g.n)
    n = len(layout.r_inp)
    p = layout.p
    for k, v in enumerate(layout.r_targ, start=1):
        t = k - 1
        for j in range(1, p + 1):
            if (t >> (p - j)) & 1:
                rt.cnot(c, rt.source(n - p + j, v), v)
    return c


def _stage_precopy(g, layout, rt, sufcopy):
    c = Circuit(g.n)
    c.gates.extend(reversed(sufcopy.gates))  # all CNOTs: reversal inverts
    rt.holding.clear()
    npf = len(layout.r_inp) - layout.p
    for blk in layout.sub_registers:
        for idx, v in enumerate(blk.copy_slots):
            bit = (idx % npf) + 1
            rt.cnot(c, rt.source(bit, v), v)
            rt.holding[v] = bit
        if layout.tau:
            for idx, v in enumerate(blk.aux_slots):
                bit = (idx % layout.tau) + 1
                rt.cnot(c, rt.source(bit, v), v)
                rt.holding[v] = bit
    return c


def _stage_graycycle(g, layout, alpha, rt):
    c = Circuit(g.n)
    n = len(layout.r_inp)
    p = layout.p
    npf = n - p
    codes = {l: gray_code(npf, l) for l in set(layout.ell_plan)}
    cycle = 1 << npf
    seen = set()
    for j in range(1, cycle + 1):
        jn = j + 1 if j < cycle else 1
        # U_Gen: advance every target's prefix codeword by one Gray step
        for k, v in enumerate(layout.r_targ, start=1):
            h = codes[layout.ell_plan[k - 1]].flips[jn - 1]
            rt.cnot(c, rt.source(h, v), v)
        # rotation layer
        for k, v in enumerate(layout.r_targ, start=1):
            cw = codes[layout.ell_plan[k - 1]].codewords[jn - 1]
            s = (cw << p) | (k - 1)
            assert s not in seen, (j, k, s)
            seen.add(s)
            if s:
                c.r(v, alpha[s])
    assert len(seen) == 1 << n
    return c


def _stage_inverse(g, sufcopy, grayinit, precopy):
    c = Circuit(g.n)
    c.gates.extend(reversed(precopy.gates))
    c.gates.extend(reversed(grayinit.gates))
    c.gates.extend(reversed(sufcopy.gates))
    return c


def synth_diag_ancilla(g, spec, m, verify=True):
    """5-stage ancilla-assisted circuit for diag(e^{i theta}) on the first
    spec.n qubits of g; returns (circuit, StageTrace, report)."""
    if not isinstance(spec, DiagonalSpec):
        spec = DiagonalSpec(int(np.log2(len(spec))), spec)
    layout = build_layout(g, spec.n, m)
    alpha = solve_phase_coefficients(spec.theta)
    rt = _Router(g, layout.r_inp)

    suf = _stage_sufcopy(g, layout, rt)
    gri = _stage_grayinit(g, layout, rt)
    pre = _stage_precopy(g, layout, rt, suf)
    cyc = _stage_graycycle(g, layout, alpha, rt)
    inv = _stage_inverse(g, suf, gri, pre)

    trace = StageTrace([
        ("suffix-copy", suf),
        ("gray-init", gri),
        ("prefix-copy", pre),
        ("gray-cycle", cyc),
        ("inverse", inv),
    ])
    c = trace.circuit(g.n)
    c.meta.update(backend=f"ancilla-{layout.kind}", p=layout.p,
                  tau=layout.tau, wasted=layout.wasted)
    report = assemble_report(
        c, g, target=spec if verify else None, m=g.n - spec.n,
        backend=f"ancilla-{layout.kind}",
        extra={"p": layout.p, "tau": layout.tau, "wasted": layout.wasted,
               "stages": trace.table()},
    )
    return c, trace, report


def synth_diag_expander_ancilla(g, spec, m, cascade):
    """3-stage expander variant: no persistent copies; each Gray step fans
    one input bit out through the matching cascade, applies a matched CNOT
    layer plus rotations, then unwinds the fanout."""
    if not isinstance(spec, DiagonalSpec):
        spec = DiagonalSpec(int(np.log2(len(spec))), spec)
    n = spec.n
    if cascade.length < 2 or not cascade.matchings:
        raise GrowthStalled("cascade too shallow for an ancilla layout")
    s_final = set(cascade.sets[-1])
    if g.n - len(s_final) < n:
        raise GrowthStalled("cascade leaves no room for the input register")
    last = cascade.matchings[-1]
    partners = {w: u for u, w in last}

    # move any input qubit that sits inside the cascade to a free vertex
    free = [v for v in range(1, g.n + 1) if v not in s_final and v > n]
    perm = {}
    inp_vert = list(range(1, n + 1))
    for i in range(n):
        if (i + 1) in s_final:
            f = free.pop()
            perm[i + 1] = f
            perm[f] = i + 1
            inp_vert[i] = f
    relabel = synth_permutation(g, perm) if perm else Circuit(g.n)

    targ = [w for _, w in last]
    p = min(int(math.log2(len(targ))), n - 1)
    targ = targ[:1 << p]
    npf = n - p
    alpha = solve_phase_coefficients(spec.theta)

    def fan_gates(bit):
        gates = []
        src = inp_vert[bit - 1]
        for s in cascade.sets[0]:
            gates.extend(route_cnot_gates(g, src, s))
        for mt in cascade.matchings[:-1]:
            for u, w in mt:
                gates.append(("cx", (u, w), None))
        return gates

    c = Circuit(g.n)
    c.gates.extend(relabel.gates)

    grayinit = []
    for j in range(1, p + 1):
        fg = fan_gates(n - p + j)
        grayinit.extend(fg)
        for k, w in enumerate(targ, start=1):
            if ((k - 1) >> (p - j)) & 1:
                grayinit.append(("cx", (partners[w], w), None))
        grayinit.extend(reversed(fg))
    c.gates.extend(grayinit)

    code = gray_code(npf, 1)
    cycle = 1 << npf
    seen = set()
    for j in range(1, cycle + 1):
        jn = j + 1 if j < cycle else 1
        h = code.flips[jn - 1]
        fg = fan_gates(h)
        c.gates.extend(fg)
        for w in targ:
            c.cx(partners[w], w)
        for k, w in enumerate(targ, start=1):
            s = (code.codewords[jn - 1] << p) | (k - 1)
            assert s not in seen, (j, k, s)
            seen.add(s)
            if s:
                c.r(w, alpha[s])
        c.gates.extend(reversed(fg))
    assert len(seen) == 1 << n

    c.gates.extend(reversed(grayinit))
    c.gates.extend(relabel.inverse().gates)
    c.meta.update(backend="ancilla-expander", p=p)
    return c


def choose_backend(g, n, m):
    """Deterministic dispatch between the ancilla frameworks and the
    no-ancilla strategies of diag.py."""
    if m <= 0:
        return f"noancilla-{_core_strategy(g)}"
    if g.kind == "path":
        return "ancilla-path" if m >= 3 * n else "noancilla-path"
    if g.kind == "grid":
        return "ancilla-grid" if m >= 36 * n else "noancilla-grid"
    if g.kind == "tree":
        if g.params.get("arity") == 2 and m >= 3 * n:
            return "ancilla-tree"
        return "noancilla-tree"
    if g.kind == "star":
        return "noancilla-star"
    if g.params.get("complete") or _diag_is_complete(g):
        return "ancilla-expander" if m >= n else "noancilla-complete"
    return "noancilla-general"


def _core_strategy(g):
    if g.kind in ("path", "grid", "tree", "star"):
        return g.kind
    if g.params.get("complete") or _diag_is_complete(g):
        return "complete"
    return "general"


def _induced_subgraph(g, n):
    """Connected induced subgraph on vertices 1..n, typed so diag.py can
    pick its native strategy when the shape survives the restriction."""
    if g.kind == "path":
        return path_graph(n)
    if g.kind == "tree":
        return tree_graph(g.params.get("arity", 2), n=n)
    edges = [(u, v) for u, v in g.edges if u <= n and v <= n]
    sub = explicit_graph(n, edges)
    return sub


def synth_diag_auto(g, spec, m, verify=True):
    """Dispatch per choose_backend; returns (circuit, report) with the
    decision recorded in the report.

    verify=False skips the simulation residual (counting-only runs)."""
    if not isinstance(spec, DiagonalSpec):
        spec = DiagonalSpec(int(np.log2(len(spec))), spec)
    n = spec.n
    backend = choose_backend(g, n, m)

    if backend == "ancilla-expander":
        casc = _auto_cascade(g, n, m)
        if casc is None:
            backend = f"noancilla-{_core_strategy(g)}"
        else:
            c = synth_diag_expander_ancilla(g, spec, m, casc)
            report = assemble_report(c, g, target=spec if verify else None,
                                     m=g.n - n, backend=backend,
                                     extra={"decision": backend})
            return c, report
    if backend.startswith("ancilla-"):
        try:
            c, _, report = synth_diag_ancilla(g, spec, m, verify=verify)
            report["decision"] = backend
            return c, report
        except InsufficientAncilla:
            backend = f"noancilla-{_core_strategy(g)}"

    sub = _induced_subgraph(g, n)
    csub, report = synth_diag_noancilla(sub, spec, verify=False)
    c = Circuit(g.n)
    c.gates.extend(csub.gates)
    c.meta.update(csub.meta)
    report = assemble_report(c, g, target=spec if verify else None,
                             m=g.n - n, backend=backend,
                             extra={"decision": backend,
                                    "core_backend": csub.meta.get("backend")})
    return c, report


def _auto_cascade(g, n, m):
    """Cascade for the ancilla expander backend that leaves >= n vertices
    free for the input register."""
    try:
        h = vertex_expansion(g)
    except Exception:
        return None
    if h <= 0:
        return None
    cp = h / (h + 2)
    seed = max(1, math.ceil(1 / cp))
    cap = min(m, g.n - n, g.n // 2)
    for target in range(cap, 1, -1):
        s = min(seed, max(1, target - 1))
        try:
            casc = expander_cascade(g, s, target)
        except Exception:
            continue
        if len(casc.sets[-1]) <= g.n - n and casc.length >= 2:
            return casc
    return None
