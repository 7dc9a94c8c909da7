"""Diagonal-unitary synthesis without ancilla qubits.

Two families of constructions live here:

* ``synth_diag_gray_walk`` -- the unconstrained multiplexed-rotation walk
  (2^n - 1 rotations, 2^n - 2 CNOTs) that assumes all-to-all connectivity.
* ``synth_diag_noancilla`` -- a connectivity-aware pipeline that splits the
  qubits into a control and a target register, sweeps Gray-coded parities
  onto the target register in phases C_1..C_l, undoes the register scramble,
  and finishes with a control-register-only diagonal.  Per-graph strategies
  choose the register split, the Gray-code schedule and how each parallel
  CNOT step is realised on the graph.

All emitted two-qubit gates lie on graph edges; routed CNOTs restore every
intermediate qubit, so each strategy is exact for every angle vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .graphs import (
    ConstraintGraph,
    TooLargeForExactExpansion,
    dfs_labeling,
    expander_cascade,
    hamiltonian_path_grid,
    vertex_expansion,
)
from .gray import gray_code, solve_phase_coefficients
from .linear import _f2_reduce, route_cnot_gates
from .sim import assemble_report


class StrategyGraphMismatch(ValueError):
    pass


class ExpansionUnknown(ValueError):
    pass


@dataclass
class DiagonalSpec:
    """Target diagonal diag(e^{i theta(x)}) with theta[0] normalised to 0
    and all angles reduced mod 2*pi."""

    n: int
    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if theta.shape != (2**self.n,):
            raise ValueError(f"expected {2 ** self.n} angles, got {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("angles must be finite")
        theta = np.mod(theta - theta[0], 2 * math.pi)
        self.theta = theta


@dataclass
class RegisterSplit:
    """Control/target register assignment for the no-ancilla pipeline.

    ``cverts[m-1]`` is the vertex holding control bit m, ``tverts[i-1]`` the
    vertex whose state is rewritten through the phases; ``gray_plan[i-1]``
    selects which Gray code drives target slot i."""

    cverts: list
    tverts: list
    tau: int
    gray_plan: list

    @property
    def r_c(self):
        return len(self.cverts)

    @property
    def r_t(self):
        return len(self.tverts)


@dataclass
class IndependentCover:
    """Sets T^(1)..T^(l) of F2-independent nonzero r_t-bit masks whose union
    is all nonzero masks; ``owner[t]`` is the first set containing t, which
    determines the disjoint families F_k = {ct : owner[t] = k}."""

    r_t: int
    sets: list
    owner: dict = field(default_factory=dict)

    @property
    def ell(self):
        return len(self.sets)


def _xor_reduce(v, basis):
    for b in basis:
        v = min(v, v ^ b)
    return v


def independent_cover(r_t):
    """Greedy cover of {0,1}^{r_t} \\ {0} by linearly independent sets of
    size r_t: extract a maximal independent subset of the uncovered masks,
    then pad to full rank with already-covered masks."""
    if r_t < 1:
        raise ValueError("r_t must be >= 1")
    all_nz = list(range(1, 2**r_t))
    uncovered = set(all_nz)
    sets = []
    owner = {}
    while uncovered:
        cur, basis = [], []
        for v in sorted(uncovered):
            red = _xor_reduce(v, basis)
            if red:
                basis.append(red)
                cur.append(v)
                if len(cur) == r_t:
                    break
        for v in all_nz:
            if len(cur) == r_t:
                break
            if v in cur:
                continue
            red = _xor_reduce(v, basis)
            if red:
                basis.append(red)
                cur.append(v)
        k = len(sets) + 1
        for v in cur:
            owner.setdefault(v, k)
            uncovered.discard(v)
        sets.append(cur)
    cover = IndependentCover(r_t, sets, owner)
    return cover


# ---------------------------------------------------------------------------
# Multiplexed-rotation walk
# ---------------------------------------------------------------------------


def _diag_walk(n_bits, angle_of, emit_rot, emit_cnot, skip_zero_levels=False):
    """Emit the standard diagonal decomposition over n_bits virtual qubits.

    Level k handles every mask whose lowest-numbered support reaches bit k
    (bits k+1..n zero, bit k set): walk a (k-1)-bit Gray code on the prefix
    while rotating virtual qubit k.  Masks use bit 1 as MSB."""
    if n_bits == 0:
        return
    top = 1 << (n_bits - 1)
    levels = []
    levels.append((1, [top]))
    for k in range(2, n_bits + 1):
        bit_k = 1 << (n_bits - k)
        masks = [bit_k]
        code = gray_code(k - 1, 1)
        for p in range(2, 2 ** (k - 1) + 1):
            cw = code.codewords[p - 1]
            masks.append((cw << (n_bits - k + 1)) | bit_k)
        levels.append((k, masks))

    emit_rot(1, angle_of(top))
    for k, masks in levels[1:]:
        if skip_zero_levels and all(abs(angle_of(m)) < 1e-14 for m in masks):
            continue
        code = gray_code(k - 1, 1)
        emit_rot(k, angle_of(masks[0]))
        for p in range(2, 2 ** (k - 1) + 1):
            emit_cnot(code.flips[p - 1], k)
            emit_rot(k, angle_of(masks[p - 1]))
        emit_cnot(code.flips[0], k)


def synth_diag_gray_walk(spec, skip_zero_levels=False):
    """Unconstrained circuit for diag(e^{i theta}): exactly 2^n - 1
    rotations and at most 2^n CNOTs, assuming full connectivity."""
    n = spec.n
    if n > 20:
        raise ValueError("n too large for dense angle solve")
    alpha = solve_phase_coefficients(spec.theta)
    c = Circuit(n)
    _diag_walk(
        n,
        lambda s: alpha[s],
        lambda q, a: c.r(q, a),
        lambda ctl, tgt: c.cx(ctl, tgt),
        skip_zero_levels=skip_zero_levels,
    )
    return c


def routed_gray_walk(g, spec, order=None, skip_zero_levels=False):
    """Gray-walk diagonal with every CNOT routed on g.  ``order`` maps
    virtual bit j to vertex order[j-1]; the default places the most active
    control (virtual bit 1) at the graph center and sorts the rest by
    distance from it."""
    n = spec.n
    if g.n != n:
        raise ValueError("graph size mismatch")
    if order is None:
        center = g.center()
        dist = g.bfs_dist(center)
        order = sorted(range(1, n + 1), key=lambda v: (dist[v], v))
    alpha = solve_phase_coefficients(spec.theta)
    c = Circuit(n)
    cache = {}

    def emit_cnot(j1, j2):
        u, v = order[j1 - 1], order[j2 - 1]
        if (u, v) not in cache:
            cache[(u, v)] = route_cnot_gates(g, u, v)
        c.gates.extend(cache[(u, v)])

    # remap masks so virtual bit j reads the qubit at order[j-1]
    def angle_of(virt):
        s = 0
        for j in range(1, n + 1):
            if (virt >> (n - j)) & 1:
                s |= 1 << (n - order[j - 1])
        return alpha[s]

    _diag_walk(n, angle_of, lambda q, a: c.r(order[q - 1], a),
               emit_cnot, skip_zero_levels=skip_zero_levels)
    return c


# ---------------------------------------------------------------------------
# No-ancilla framework engine
# ---------------------------------------------------------------------------


def _f2_inv(mat):
    r = mat.shape[0]
    aug = np.concatenate([mat.copy(), np.eye(r, dtype=np.uint8)], axis=1)
    for col in range(r):
        piv = None
        for row in range(col, r):
            if aug[row, col]:
                piv = row
                break
        if piv is None:
            raise ValueError("singular transition matrix")
        if piv != col:
            aug[[piv, col]] = aug[[col, piv]]
        for row in range(r):
            if row != col and aug[row, col]:
                aug[row] ^= aug[col]
    return aug[:, r:]


def _framework(g, spec, split, cp1_emitter, backend):
    """Control/target register pipeline: for each cover set, re-express the
    target register, then sweep all control prefixes by Gray codes while
    rotating; finish by undoing the register rewrites and applying the
    control-only diagonal via a routed walk over the control vertices.

    Every nonzero n-bit mask receives its angle exactly once (asserted)."""
    n = spec.n
    r_c, r_t = split.r_c, split.r_t
    alpha = solve_phase_coefficients(spec.theta)
    cover = independent_cover(r_t)
    codes = {j: gray_code(r_c, j) for j in set(split.gray_plan)}
    cache = {}

    def routed(circ, u, v):
        if (u, v) not in cache:
            cache[(u, v)] = route_cnot_gates(g, u, v)
        circ.gates.extend(cache[(u, v)])

    cbit = [1 << (n - v) for v in split.cverts]
    tbit = [1 << (n - v) for v in split.tverts]

    def pmask_c(cmask):
        s = 0
        for j in range(r_c):
            if (cmask >> (r_c - 1 - j)) & 1:
                s |= cbit[j]
        return s

    def pmask_t(tmask):
        s = 0
        for i in range(r_t):
            if (tmask >> (r_t - 1 - i)) & 1:
                s |= tbit[i]
        return s

    seen = set()
    stages = []
    Y = np.eye(r_t, dtype=np.uint8)
    gen_ops = []

    for k, tset in enumerate(cover.sets, 1):
        gen = Circuit(n)
        Yk = np.array(
            [[(t >> (r_t - 1 - i)) & 1 for i in range(r_t)] for t in tset],
            dtype=np.uint8,
        )
        M = (Yk @ _f2_inv(Y)) % 2
        if not np.array_equal(M, np.eye(r_t, dtype=np.uint8)):
            ops = _f2_reduce([M[i].copy() for i in range(r_t)])
            for src, dst in reversed(ops):
                routed(gen, split.tverts[src], split.tverts[dst])
                gen_ops.append((src, dst))
        Y = Yk
        stages.append((f"gen_{k}", gen))

        gray = Circuit(n)
        # phase 1: zero prefix
        for i, t in enumerate(tset):
            if cover.owner[t] == k:
                s = pmask_t(t)
                gray.r(split.tverts[i], alpha[s])
                assert s not in seen
                seen.add(s)
        # phases 2..2^{r_c} walk every prefix; the wrap phase closes the cycle
        for p in range(2, 2**r_c + 2):
            pp = p if p <= 2**r_c else 1
            pairs = []
            for i in range(r_t):
                code = codes[split.gray_plan[i]]
                h = code.flips[pp - 1]
                pairs.append((split.cverts[h - 1], split.tverts[i]))
            cp1_emitter(gray, pairs)
            if pp == 1:
                break
            for i, t in enumerate(tset):
                if cover.owner[t] != k:
                    continue
                cw = codes[split.gray_plan[i]].codewords[p - 1]
                s = pmask_c(cw) | pmask_t(t)
                gray.r(split.tverts[i], alpha[s])
                assert s not in seen
                seen.add(s)
        stages.append((f"gray_{k}", gray))

    # reset: structural inverse of the register rewrites (routed CNOTs are
    # self-inverse row additions)
    reset = Circuit(n)
    for src, dst in reversed(gen_ops):
        routed(reset, split.tverts[src], split.tverts[dst])
    stages.append(("reset", reset))

    # control-register diagonal via a routed walk over cverts
    lam = Circuit(n)

    def lam_angle(virt):
        s = pmask_c(virt)
        assert s not in seen
        seen.add(s)
        return alpha[s]

    _diag_walk(
        r_c,
        lam_angle,
        lambda q, a: lam.r(split.cverts[q - 1], a),
        lambda j1, j2: routed(lam, split.cverts[j1 - 1], split.cverts[j2 - 1]),
    )
    stages.append(("lambda_rc", lam))

    assert len(seen) == 2**n - 1
    out = Circuit(n)
    for _, sc in stages:
        out.gates.extend(sc.gates)
    out.meta["stages"] = stages
    out.meta["split"] = split
    out.meta["ell"] = cover.ell
    out.meta["backend"] = backend
    return out


def _routed_pair_emitter(g, cache=None):
    cache = {} if cache is None else cache

    def emit(circ, pairs):
        for u, v in pairs:
            if (u, v) not in cache:
                cache[(u, v)] = route_cnot_gates(g, u, v)
            circ.gates.extend(cache[(u, v)])

    return emit


def _cascade_emitter(g, casc):
    """Shared-control multi-target CNOT: accumulate along the matchings
    toward the seed set, inject the control, then redistribute.  Every
    vertex of the final set picks up the control bit; interior values are
    restored because each matching is replayed."""
    seeds = list(casc.sets[0])
    cache = {}

    def emit(circ, pairs):
        control = pairs[0][0]
        assert all(u == control for u, _ in pairs)
        for m in reversed(casc.matchings):
            for u, v in m:
                circ.cx(u, v)
        for v in seeds:
            if (control, v) not in cache:
                cache[(control, v)] = route_cnot_gates(g, control, v)
            circ.gates.extend(cache[(control, v)])
        for m in casc.matchings:
            for u, v in m:
                circ.cx(u, v)

    return emit


def _chain_emitter(g, tverts):
    """Shared-control multi-target CNOT as a routed ladder along the target
    chain (accumulate down, inject, sweep back up)."""
    cache = {}

    def link(circ, u, v):
        if (u, v) not in cache:
            cache[(u, v)] = route_cnot_gates(g, u, v)
        circ.gates.extend(cache[(u, v)])

    def emit(circ, pairs):
        control = pairs[0][0]
        assert all(u == control for u, _ in pairs)
        t = len(tverts)
        for i in range(t - 1, 0, -1):
            link(circ, tverts[i - 1], tverts[i])
        link(circ, control, tverts[0])
        for i in range(1, t):
            link(circ, tverts[i - 1], tverts[i])

    return emit


# ---------------------------------------------------------------------------
# Per-graph register splits
# ---------------------------------------------------------------------------


def _path_split(order):
    """Interleaved split along a vertex chain: targets on the first r_t even
    chain positions, the most-flipped control bits on the odd positions next
    to them, the rarely used tail controls at the chain end."""
    n = len(order)
    if n < 2:
        return None
    tau = 2 * math.ceil(math.log2(n))
    if (n - tau) % 2:
        tau += 1
    tau = min(tau, n - 2)
    if (n - tau) % 2:
        tau -= 1
    if tau < 0:
        return None
    r_t = (n - tau) // 2
    if r_t < 1:
        return None
    cverts = [order[2 * m - 2] for m in range(1, r_t + 1)]
    cverts += [order[2 * r_t + j - 1] for j in range(1, tau + 1)]
    tverts = [order[2 * i - 1] for i in range(1, r_t + 1)]
    return RegisterSplit(cverts, tverts, tau, list(range(1, r_t + 1)))


def _tree2_split(g):
    """Subtree split for a binary tree (heap indexing, root 1): target bits
    are subtree roots every a+1 levels; each subtree's interior supplies a
    consecutive block of control bits so most Gray flips stay local."""
    n = g.n
    kappa = (n + 1).bit_length() - 2  # depth of a heap-complete binary tree
    if kappa < 1 or n < 4:
        return None
    a = math.ceil(math.log2(max(2.0, 2 * math.log2(n))))
    a = min(a, kappa - 1)
    if a < 1:
        return None
    step = a + 1
    s = (kappa + 1) // step
    depths = sorted(
        d for d in (kappa - j * step + 1 for j in range(1, s + 1)) if d >= 1
    )
    if not depths:
        return None

    def depth(v):
        return v.bit_length() - 1

    troots = [v for v in range(1, n + 1) if depth(v) in set(depths)]
    if not troots:
        return None
    tset = set(troots)
    cverts, gray_plan = [], []
    for z in troots:
        # interior: descendants within `a` levels, stopping at nested roots
        block = []
        frontier = [z]
        for _ in range(a):
            nxt = []
            for v in frontier:
                for ch in (2 * v, 2 * v + 1):
                    if ch <= n and ch not in tset:
                        nxt.append(ch)
                        block.append(ch)
            frontier = nxt
        gray_plan.append(len(cverts) + 1)
        cverts.extend(block)
    rest = [v for v in range(1, n + 1) if v not in tset and v not in set(cverts)]
    cverts.extend(rest)
    r_c = len(cverts)
    if r_c < 1:
        return None
    gray_plan = [((j - 1) % r_c) + 1 for j in gray_plan]
    return RegisterSplit(cverts, troots, 0, gray_plan)


def _general_split(g):
    labels, _tree = dfs_labeling(g)
    by_label = {lab: v for v, lab in labels.items()}
    n = g.n
    r_c = math.ceil(n / 2)
    r_t = n - r_c
    if r_t < 1:
        return None
    cverts = [by_label[m] for m in range(1, r_c + 1)]
    tverts = [by_label[r_c + i] for i in range(1, r_t + 1)]
    return RegisterSplit(cverts, tverts, 0, [1] * r_t)


def _expander_split(g):
    try:
        h = vertex_expansion(g)
    except TooLargeForExactExpansion as exc:
        raise ExpansionUnknown(str(exc)) from exc
    cprime = h / (h + 2)
    seed = min(math.ceil(1 / cprime) + 1, g.n // 2)
    casc = expander_cascade(g, seed, g.n // 2, expansion=h)
    tverts = list(casc.sets[-1])
    tset = set(tverts)
    cverts = [v for v in range(1, g.n + 1) if v not in tset]
    if not cverts or not tverts:
        return None, None
    split = RegisterSplit(cverts, tverts, 0, [1] * len(tverts))
    return split, casc


# ---------------------------------------------------------------------------
# Dispatcher
# ---------------------------------------------------------------------------

_STRATEGY_KINDS = {
    "path": {"path"},
    "grid": {"grid"},
    "tree": {"tree"},
    "star": {"star"},
}


def synth_diag_noancilla(g, spec, strategy="auto", verify=True):
    """Connectivity-respecting circuit for diag(e^{i theta}) on g, with a
    per-strategy register split; returns (circuit, report).

    verify=False skips the simulation residual (counting-only runs)."""
    if g.n != spec.n:
        raise ValueError("graph size must equal qubit count")
    if strategy == "auto":
        strategy = _auto_strategy(g)
    elif strategy in _STRATEGY_KINDS and g.kind not in _STRATEGY_KINDS[strategy]:
        raise StrategyGraphMismatch(f"{strategy} strategy on {g.kind} graph")

    c, backend = _dispatch(g, spec, strategy)
    report = assemble_report(c, g, spec if verify else None, m=0,
                             backend=backend)
    report["ell"] = c.meta.get("ell")
    return c, report


def _is_complete(g):
    return 2 * len(g.edges) == g.n * (g.n - 1)


def _auto_strategy(g):
    if g.kind == "path":
        return "path"
    if g.kind == "grid":
        return "grid"
    if g.kind == "tree":
        return "tree"
    if g.kind == "star":
        return "star"
    if _is_complete(g):
        return "complete"
    return "general"


def _dispatch(g, spec, strategy):
    if strategy == "complete":
        if not _is_complete(g):
            raise StrategyGraphMismatch("complete strategy on sparse graph")
        c = synth_diag_gray_walk(spec)
        c.meta["backend"] = "complete"
        return c, "complete"

    if strategy == "path":
        split = _path_split(list(range(1, g.n + 1)))
        if split is None:
            return _fallback(g, spec, "path-walk")
        c = _framework(g, spec, split, _routed_pair_emitter(g), "path")
        return c, "path"

    if strategy == "grid":
        order = hamiltonian_path_grid(g.params["dims"])
        split = _path_split(order)
        if split is None:
            return _fallback(g, spec, "grid-walk")
        c = _framework(g, spec, split, _routed_pair_emitter(g), "grid")
        return c, "grid"

    if strategy == "tree":
        if g.params.get("arity") == 2:
            split = _tree2_split(g)
            if split is not None:
                c = _framework(g, spec, split, _routed_pair_emitter(g), "tree2")
                return c, "tree2"
        return _fallback(g, spec, "tree-walk")

    if strategy == "star":
        return _fallback(g, spec, "star-walk")

    if strategy == "expander":
        split, casc = _expander_split(g)
        if split is None:
            return _fallback(g, spec, "expander-walk")
        c = _framework(g, spec, split, _cascade_emitter(g, casc), "expander")
        return c, "expander"

    if strategy == "general":
        split = _general_split(g)
        if split is None:
            return _fallback(g, spec, "general-walk")
        c = _framework(g, spec, split, _chain_emitter(g, split.tverts), "general")
        return c, "general"

    raise ValueError(f"unknown strategy {strategy!r}")


def _fallback(g, spec, backend):
    c = routed_gray_walk(g, spec)
    c.meta["backend"] = backend
    return c, backend
