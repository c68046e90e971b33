"""Finite scenario trees: supports, arbitrage classifiers and super-hedging prices.

A node is an atom of the filtration at its depth; edge probabilities only
matter through which children are charged (positive probability). Prices
are therefore measure-independent given the supports.

Text format, one node per line::

    node <id> parent=<id|-> t=<depth> S=<price>[,<price>...] p=<edge-prob>
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Mapping

import numpy as np

from .convex import INF, OneStepPrice, SupportSet, one_step_price
from .lp import linprog

PROB_TOL = 1e-12
MAX_ORACLE_LEAVES = 10_000


class TreeFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None, node: str | None = None):
        self.line = line
        self.node = node
        self.message = message
        super().__init__(f"line {line}: {message}" if line is not None else message)


class LPSizeError(ValueError):
    pass


@dataclass(frozen=True)
class Node:
    id: str
    parent: str | None
    t: int
    S: tuple[float, ...]
    p: float = 1.0


class ScenarioTree:
    """Immutable finite filtered market with a single risky asset (or ``d`` assets)."""

    def __init__(self, nodes):
        self._nodes: dict[str, Node] = {}
        for node in nodes:
            if node.id in self._nodes:
                raise TreeFormatError(f"duplicate node id {node.id!r}", node=node.id)
            self._nodes[node.id] = node
        self._children: dict[str, tuple[str, ...]] = {}
        kids = defaultdict(list)
        roots = []
        for node in self._nodes.values():
            if node.parent is None:
                roots.append(node.id)
            else:
                kids[node.parent].append(node.id)
        if len(roots) != 1:
            raise TreeFormatError(f"expected exactly one root, found {len(roots)}")
        self.root = roots[0]
        for nid in self._nodes:
            self._children[nid] = tuple(kids.get(nid, ()))
        self._validate()
        self.T = max(n.t for n in self._nodes.values())
        for node in self._nodes.values():
            if node.t < self.T and not self._children[node.id]:
                raise TreeFormatError(f"node {node.id!r} at depth {node.t} < {self.T} has no children", node=node.id)

    def _validate(self) -> None:
        dims = {len(n.S) for n in self._nodes.values()}
        if len(dims) != 1 or 0 in dims:
            raise TreeFormatError("all nodes need prices of the same positive dimension")
        self.dim = dims.pop()
        if self._nodes[self.root].t != 0:
            raise TreeFormatError("root must be at depth 0")
        for node in self._nodes.values():
            if any(not math.isfinite(s) or s < 0 for s in node.S):
                raise TreeFormatError(f"node {node.id!r} has a negative or non-finite price", node=node.id)
            if node.parent is None:
                continue
            if node.parent not in self._nodes:
                raise TreeFormatError(f"node {node.id!r} has unknown parent {node.parent!r}", node=node.id)
            if node.t != self._nodes[node.parent].t + 1:
                raise TreeFormatError(f"node {node.id!r} depth is not parent depth + 1", node=node.id)
            if not 0.0 <= node.p <= 1.0:
                raise TreeFormatError(f"node {node.id!r} has edge probability outside [0, 1]", node=node.id)
        for nid, ch in self._children.items():
            if ch:
                total = math.fsum(self._nodes[c].p for c in ch)
                if abs(total - 1.0) > PROB_TOL:
                    raise TreeFormatError(f"children of {nid!r} have probabilities summing to {total!r}", node=nid)

    # navigation -----------------------------------------------------------

    def __len__(self) -> int:
        return len(self._nodes)

    def __iter__(self) -> Iterator[Node]:
        return iter(self._nodes.values())

    def __getitem__(self, nid: str) -> Node:
        return self._nodes[nid]

    @property
    def ids(self) -> list[str]:
        return list(self._nodes)

    def children(self, nid: str) -> tuple[str, ...]:
        return self._children[nid]

    def charged_children(self, nid: str) -> tuple[str, ...]:
        return tuple(c for c in self._children[nid] if self._nodes[c].p > 0)

    def is_leaf(self, nid: str) -> bool:
        return not self._children[nid]

    def spot(self, nid: str):
        """Price at ``nid``: a float when ``dim == 1``, else an array."""
        S = self._nodes[nid].S
        return S[0] if self.dim == 1 else np.array(S)

    def charged_subtree(self, nid: str) -> list[str]:
        """Nodes reachable from ``nid`` through positive-probability edges, parents first."""
        out = [nid]
        i = 0
        while i < len(out):
            out.extend(self.charged_children(out[i]))
            i += 1
        return out

    def conditional_probability(self, ancestor: str, nid: str) -> float:
        p = 1.0
        while nid != ancestor:
            node = self._nodes[nid]
            if node.parent is None:
                raise ValueError(f"{ancestor!r} is not an ancestor")
            p *= node.p
            nid = node.parent
        return p

    def path(self, nid: str) -> list[str]:
        out = [nid]
        while self._nodes[out[-1]].parent is not None:
            out.append(self._nodes[out[-1]].parent)
        return out[::-1]


# ---------------------------------------------------------------------------
# text format

def parse_tree(text: str) -> ScenarioTree:
    nodes = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] != "node" or len(parts) < 2:
            raise TreeFormatError("expected 'node <id> key=value ...'", lineno)
        nid = parts[1]
        fields = {}
        for item in parts[2:]:
            key, sep, val = item.partition("=")
            if not sep:
                raise TreeFormatError(f"malformed field {item!r}", lineno)
            if key in fields:
                raise TreeFormatError(f"repeated field {key!r}", lineno)
            fields[key] = val
        unknown = set(fields) - {"parent", "t", "S", "p"}
        if unknown:
            raise TreeFormatError(f"unknown fields {sorted(unknown)}", lineno)
        missing = {"parent", "t", "S"} - set(fields)
        if missing:
            raise TreeFormatError(f"missing fields {sorted(missing)}", lineno)
        parent = None if fields["parent"] == "-" else fields["parent"]
        try:
            t = int(fields["t"])
            S = tuple(float(v) for v in fields["S"].split(","))
            p_raw = fields.get("p", "1")
            p = 1.0 if p_raw == "-" else float(p_raw)
        except ValueError as exc:
            raise TreeFormatError(str(exc), lineno) from None
        if not math.isfinite(p):
            raise TreeFormatError("edge probability must be finite", lineno)
        nodes.append((lineno, Node(nid, parent, t, S, p)))
    if not nodes:
        raise TreeFormatError("empty tree file")
    try:
        return ScenarioTree(n for _, n in nodes)
    except TreeFormatError as exc:
        lines = {node.id: lineno for lineno, node in nodes}
        raise TreeFormatError(exc.message, lines.get(exc.node), exc.node) from None


def read_tree(path) -> ScenarioTree:
    return parse_tree(Path(path).read_text(encoding="utf-8"))


def format_tree(tree: ScenarioTree) -> str:
    lines = []
    for node in tree:
        parent = "-" if node.parent is None else node.parent
        S = ",".join(repr(float(s)) for s in node.S)
        lines.append(f"node {node.id} parent={parent} t={node.t} S={S} p={node.p!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# builders

def chain_tree(prices) -> ScenarioTree:
    """Deterministic path: one child per node."""
    nodes = [Node("0", None, 0, (float(prices[0]),))]
    for t, s in enumerate(prices[1:], start=1):
        nodes.append(Node(str(t), str(t - 1), t, (float(s),), 1.0))
    return ScenarioTree(nodes)


def one_step_tree(S0, children, probs=None) -> ScenarioTree:
    k = len(children)
    probs = [1.0 / k] * k if probs is None else probs
    nodes = [Node("0", None, 0, (float(S0),))]
    for i, (s, p) in enumerate(zip(children, probs), start=1):
        nodes.append(Node(str(i), "0", 1, (float(s),), float(p)))
    return ScenarioTree(nodes)


def binomial_tree(S0, k_d, k_u) -> ScenarioTree:
    """Non-recombining tree of the interval model with extreme moves only.

    Each step has children ``k_d S`` and ``k_u S`` with probability 1/2; a
    step with ``k_d == k_u`` has a single child.
    """
    nodes = [Node("r", None, 0, (float(S0),))]
    frontier = ["r"]
    prices = {"r": float(S0)}
    for t, (d, u) in enumerate(zip(k_d, k_u), start=1):
        nxt = []
        for nid in frontier:
            s = prices[nid]
            moves = [("d", d), ("u", u)] if d != u else [("u", u)]
            for tag, k in moves:
                cid = nid + tag
                prices[cid] = k * s
                nodes.append(Node(cid, nid, t, (k * s,), 1.0 / len(moves)))
                nxt.append(cid)
        frontier = nxt
    return ScenarioTree(nodes)


def random_tree(rng: np.random.Generator, max_depth: int = 5, max_branching: int = 4,
                fail_rate: float | None = None, zero_prob_rate: float = 0.1,
                boundary_rate: float = 0.1, S0: float = 100.0) -> ScenarioTree:
    """Random finite market for property tests and the self-test.

    ``fail_rate`` is the chance that a node's children all lie strictly on one
    side of its price (an immediate profit); by default half of the trees
    have none. ``boundary_rate`` puts the parent price at the edge of the
    support (AIP without NA).
    """
    if fail_rate is None:
        fail_rate = 0.0 if rng.random() < 0.5 else float(rng.uniform(0.02, 0.2))
    depth = int(rng.integers(1, max_depth + 1))
    nodes = [Node("0", None, 0, (float(S0),))]
    frontier = [("0", float(S0))]
    counter = 1
    for t in range(1, depth + 1):
        nxt = []
        for nid, s in frontier:
            b = int(rng.integers(1, max_branching + 1))
            u = rng.random()
            if b == 1:
                mult = [float(rng.choice([1.0, rng.uniform(0.7, 1.3)]))]
            elif u < fail_rate:
                lo, hi = (1.01, 1.4) if rng.random() < 0.5 else (0.6, 0.99)
                mult = list(rng.uniform(lo, hi, size=b))
            elif u < fail_rate + boundary_rate:
                mult = [1.0] + list(rng.uniform(1.0, 1.4, size=b - 1))
                if rng.random() < 0.5:
                    mult = [2.0 - m for m in mult]
            else:
                mult = list(rng.uniform(0.6, 1.4, size=b))
                mult[0] = float(rng.uniform(0.6, 0.99))
                mult[-1] = float(rng.uniform(1.01, 1.4))
            prices = [round(s * m, 2) for m in mult]
            probs = rng.dirichlet(np.ones(b))
            if b > 1:
                drop = rng.random(b) < zero_prob_rate
                drop[int(rng.integers(b))] = False
                probs[drop] = 0.0
                probs = probs / probs.sum()
                top = int(np.argmax(probs))
                probs[top] = 0.0
                probs[top] = 1.0 - math.fsum(probs)
            for price, p in zip(prices, probs):
                cid = str(counter)
                counter += 1
                nodes.append(Node(cid, nid, t, (price,), float(p)))
                nxt.append((cid, price))
        frontier = nxt
    return ScenarioTree(nodes)


# ---------------------------------------------------------------------------
# supports and conditional essential extrema

def conditional_support(tree: ScenarioTree, nid: str) -> SupportSet:
    """Prices of the charged children of ``nid`` (one-dimensional trees)."""
    if tree.is_leaf(nid):
        raise ValueError(f"node {nid!r} is a leaf")
    if tree.dim != 1:
        raise ValueError("conditional_support is one-dimensional; use support_points")
    return SupportSet.finite([tree.spot(c) for c in tree.charged_children(nid)])


def support_points(tree: ScenarioTree, nid: str) -> np.ndarray:
    if tree.is_leaf(nid):
        raise ValueError(f"node {nid!r} is a leaf")
    pts = np.array([tree[c].S for c in tree.charged_children(nid)], dtype=float)
    return np.unique(pts, axis=0)


def essential_extrema(tree: ScenarioTree, nid: str, h: Callable | None = None) -> tuple[float, float]:
    """Conditional essential infimum and supremum of ``h(S_{t+1})`` at ``nid``."""
    if tree.is_leaf(nid):
        raise ValueError(f"node {nid!r} is a leaf")
    vals = [tree.spot(c) if h is None else h(tree.spot(c)) for c in tree.charged_children(nid)]
    return min(vals), max(vals)


def descendant_values(tree: ScenarioTree, nid: str, steps: int, h: Callable | None = None) -> list:
    """``h(S)`` over the charged descendants ``steps`` levels below ``nid``."""
    level = [nid]
    for _ in range(steps):
        level = [c for n in level for c in tree.charged_children(n)]
    return [tree.spot(n) if h is None else h(tree.spot(n)) for n in level]


def family_esssup(tree: ScenarioTree, nid: str, h: Callable, family) -> float:
    """Conditional essential supremum of ``{h(X) : X in family}`` at ``nid``.

    Each member is a next-step variable given as a mapping from child id to
    value or a callable on the child :class:`Node`. The result is the
    supremum of ``h`` over the union of the members' conditional supports.
    """
    family = list(family)
    if not family:
        raise ValueError("family must be non-empty")
    if tree.is_leaf(nid):
        raise ValueError(f"node {nid!r} is a leaf")
    union = set()
    for X in family:
        for c in tree.charged_children(nid):
            union.add(X[c] if isinstance(X, Mapping) else X(tree[c]))
    return max(h(v) for v in union)


# ---------------------------------------------------------------------------
# arbitrage classifiers

@dataclass(frozen=True)
class ArbitrageReport:
    """Verdict of a classifier; ``node``/``theta`` locate a witness when it fails."""

    holds: bool
    node: str | None = None
    theta: tuple[float, ...] | None = None

    def __bool__(self) -> bool:
        return self.holds


def _deltas(tree: ScenarioTree, nid: str) -> np.ndarray:
    S = np.array(tree[nid].S)
    return np.array([np.array(tree[c].S) - S for c in tree.charged_children(nid)])


def local_aip(tree: ScenarioTree, nid: str) -> tuple[bool, tuple[float, ...] | None]:
    """AIP at one node: its price lies in the convex hull of the charged children."""
    D = _deltas(tree, nid)
    if tree.dim == 1:
        lo, hi = D[:, 0].min(), D[:, 0].max()
        if lo > 0:
            return False, (1.0,)
        if hi < 0:
            return False, (-1.0,)
        return True, None
    k = D.shape[0]
    res = linprog(np.zeros(k), A_eq=np.vstack([D.T, np.ones(k)]),
                  b_eq=np.concatenate([np.zeros(tree.dim), [1.0]]))
    if res.optimal:
        return True, None
    # separate 0 from conv(D): maximize the worst gain theta . delta
    theta = _separating_direction(D, strict="all")
    return False, tuple(theta)


def local_na(tree: ScenarioTree, nid: str) -> tuple[bool, tuple[float, ...] | None]:
    """NA at one node: no position gains weakly everywhere and strictly somewhere."""
    D = _deltas(tree, nid)
    if tree.dim == 1:
        d = D[:, 0]
        if np.all(d == 0):
            return True, None
        if d.min() >= 0:
            return False, (1.0,)
        if d.max() <= 0:
            return False, (-1.0,)
        return True, None
    theta = _separating_direction(D, strict="some")
    return (theta is None), (None if theta is None else tuple(theta))


def _separating_direction(D: np.ndarray, strict: str):
    """LP search for theta with theta.D >= 0 and a strict gain.

    ``strict="some"``: sum of gains >= 1 (arbitrage); ``strict="all"``: every
    gain >= 1 (immediate profit). Returns ``None`` if none exists.
    """
    k, d = D.shape
    if strict == "some":
        A_ub = np.vstack([-D, -D.sum(axis=0, keepdims=True)])
        b_ub = np.concatenate([np.zeros(k), [-1.0]])
    else:
        A_ub = -D
        b_ub = -np.ones(k)
    res = linprog(np.zeros(d), A_ub, b_ub, free=True)
    return res.x if res.optimal else None


def _check_all(tree: ScenarioTree, local, root: str | None) -> ArbitrageReport:
    for nid in tree.charged_subtree(tree.root if root is None else root):
        if tree.is_leaf(nid):
            continue
        ok, theta = local(tree, nid)
        if not ok:
            return ArbitrageReport(False, nid, theta)
    return ArbitrageReport(True)


def check_NA(tree: ScenarioTree, root: str | None = None) -> ArbitrageReport:
    """No-arbitrage at every charged node, with a one-step witness when it fails."""
    return _check_all(tree, local_na, root)


def check_AIP(tree: ScenarioTree, root: str | None = None) -> ArbitrageReport:
    """Absence of immediate profit at every charged node, with the offending node."""
    return _check_all(tree, local_aip, root)


# ---------------------------------------------------------------------------
# absolutely continuous martingale measures

@dataclass(frozen=True)
class MartingaleMeasure:
    """Density process ``rho`` (``rho_root = 1``) and the induced node masses."""

    root: str
    rho: dict[str, float]
    mass: dict[str, float]

    def violations(self, tree: ScenarioTree, tol: float = 1e-9) -> list[str]:
        bad = []
        for nid, r in self.rho.items():
            if r < -tol:
                bad.append(f"{nid}: negative density")
            ch = tree.charged_children(nid)
            if not ch:
                continue
            cons = sum(tree[c].p * self.rho.get(c, 0.0) for c in ch) - r
            drift = sum(tree[c].p * self.rho.get(c, 0.0) * (np.array(tree[c].S) - np.array(tree[nid].S))
                        for c in ch)
            if abs(cons) > tol:
                bad.append(f"{nid}: consistency {cons:g}")
            if np.max(np.abs(drift)) > tol * max(1.0, max(tree[nid].S)):
                bad.append(f"{nid}: drift {drift}")
        return bad


@dataclass(frozen=True)
class AcmmResult:
    feasible: bool
    measure: MartingaleMeasure | None = None
    certificate: np.ndarray | None = None
    rows: tuple[str, ...] = field(default=(), repr=False)

    def __bool__(self) -> bool:
        return self.feasible


def find_acmm(tree: ScenarioTree, root: str | None = None) -> AcmmResult:
    """Search for ``Q << P`` under which prices below ``root`` are a martingale.

    Solved as an LP feasibility problem in the node masses ``Q(node)``; the
    density is ``rho = Q / P`` relative to ``root``. When infeasible the
    Farkas multipliers of the phase-1 problem are returned as certificate.
    """
    r = tree.root if root is None else root
    sub = tree.charged_subtree(r)
    var = {nid: k for k, nid in enumerate(sub[1:])}
    internal = [nid for nid in sub if tree.charged_children(nid)]
    d = tree.dim
    nrow = len(internal) * (1 + d)
    A = np.zeros((nrow, len(var)))
    b = np.zeros(nrow)
    labels = []
    row = 0
    for nid in internal:
        Sn = np.array(tree[nid].S)
        for c in tree.charged_children(nid):
            A[row, var[c]] = 1.0
            A[row + 1:row + 1 + d, var[c]] = np.array(tree[c].S) - Sn
        if nid == r:
            b[row] = 1.0
        else:
            A[row, var[nid]] = -1.0
        labels.append(f"consistency:{nid}")
        labels.extend(f"martingale:{nid}:{i}" for i in range(d))
        row += 1 + d
    if not internal:
        return AcmmResult(True, MartingaleMeasure(r, {r: 1.0}, {r: 1.0}))
    res = linprog(np.zeros(len(var)), A_eq=A, b_eq=b)
    if not res.optimal:
        return AcmmResult(False, None, res.farkas, tuple(labels))
    mass = {r: 1.0}
    rho = {r: 1.0}
    for nid, k in var.items():
        q = float(res.x[k])
        mass[nid] = q
        rho[nid] = q / tree.conditional_probability(r, nid)
    return AcmmResult(True, MartingaleMeasure(r, rho, mass))


def check_AWIP(tree: ScenarioTree) -> ArbitrageReport:
    """An absolutely continuous martingale measure exists from every charged node."""
    for nid in tree.charged_subtree(tree.root):
        if tree.charged_children(nid) and not find_acmm(tree, nid).feasible:
            return ArbitrageReport(False, nid)
    return ArbitrageReport(True)


# ---------------------------------------------------------------------------
# super-hedging prices

@dataclass(frozen=True)
class PriceProcess:
    """Infimum super-hedging cost and hedge ratio at every node."""

    value: dict[str, float]
    theta: dict[str, object]

    def __getitem__(self, nid: str) -> float:
        return self.value[nid]


def leaf_values(tree: ScenarioTree, payoff) -> dict[str, float]:
    """Evaluate a terminal claim: a mapping ``leaf id -> value`` or a function of ``S_T``."""
    out = {}
    for node in tree:
        if not tree.is_leaf(node.id):
            continue
        if isinstance(payoff, Mapping):
            out[node.id] = float(payoff[node.id])
        else:
            out[node.id] = float(payoff(tree.spot(node.id)))
    return out


def _one_step_lp(points: np.ndarray, vals: np.ndarray, y: np.ndarray) -> OneStepPrice:
    keep = vals > -INF
    points, vals = points[keep], vals[keep]
    d = y.size
    if points.shape[0] == 0:
        return OneStepPrice(-INF, math.nan, False)
    A_ub = -np.column_stack([np.ones(points.shape[0]), points - y])
    res = linprog(np.concatenate([[1.0], np.zeros(d)]), A_ub, -vals, free=True)
    if res.status == "unbounded":
        return OneStepPrice(-INF, math.nan, False)
    return OneStepPrice(res.fun, res.x[1:].copy(), True)


def node_price(tree: ScenarioTree, nid: str, child_values: Mapping[str, float]) -> OneStepPrice:
    """One-step infimum price at ``nid`` of the continuation values of its charged children."""
    ch = tree.charged_children(nid)
    if tree.dim == 1:
        best: dict[float, float] = {}
        for c in ch:
            z = tree.spot(c)
            best[z] = max(best.get(z, -INF), child_values[c])
        pts = sorted(best)
        return one_step_price(SupportSet.finite(pts), [best[z] for z in pts], tree.spot(nid))
    pts = np.array([tree[c].S for c in ch], dtype=float)
    vals = np.array([child_values[c] for c in ch], dtype=float)
    return _one_step_lp(pts, vals, np.array(tree[nid].S, dtype=float))


def multi_period_price(tree: ScenarioTree, payoff) -> PriceProcess:
    """Backward recursion of one-step biconjugate prices; ``-inf`` propagates."""
    value = dict(leaf_values(tree, payoff))
    theta: dict[str, object] = {nid: 0.0 for nid in value}
    for node in sorted(tree, key=lambda n: -n.t):
        if node.id in value:
            continue
        step = node_price(tree, node.id, value)
        value[node.id] = step.price
        theta[node.id] = step.theta
    return PriceProcess(value, theta)


def brute_force_superhedge(tree: ScenarioTree, payoff, nid: str | None = None) -> float:
    """Minimal super-replication price at ``nid`` from one LP over all path strategies.

    ``min x`` subject to ``x + sum_u theta_u . dS_{u+1} >= payoff`` on every
    charged leaf below ``nid``, one free ``theta`` per charged internal node.
    Returns ``-inf`` when the LP is unbounded.
    """
    nid = tree.root if nid is None else nid
    vals = leaf_values(tree, payoff)
    if tree.is_leaf(nid):
        return vals[nid]
    sub = tree.charged_subtree(nid)
    internal = [n for n in sub if tree.charged_children(n)]
    leaves = [n for n in sub if tree.is_leaf(n)]
    if len(leaves) > MAX_ORACLE_LEAVES:
        raise LPSizeError(f"{len(leaves)} leaves exceed the oracle limit of {MAX_ORACLE_LEAVES}")
    d = tree.dim
    col = {n: 1 + d * k for k, n in enumerate(internal)}
    nvar = 1 + d * len(internal)
    row_of = {n: k for k, n in enumerate(leaves)}
    A = np.zeros((len(leaves), nvar))
    g = np.array([vals[n] for n in leaves])
    # shift the cash variable by max(g) so every right-hand side is non-negative
    shift = float(g.max())
    stack = [(nid, ())]
    while stack:
        n, path = stack.pop()
        if n in row_of:
            i = row_of[n]
            A[i, 0] = -1.0
            for a, delta in path:
                A[i, col[a]:col[a] + d] -= delta
            continue
        Sn = np.array(tree[n].S)
        for c in tree.charged_children(n):
            stack.append((c, path + ((n, np.array(tree[c].S) - Sn),)))
    c = np.zeros(nvar)
    c[0] = 1.0
    res = linprog(c, A, shift - g, free=True)
    if res.status == "unbounded":
        return -INF
    if not res.optimal:
        raise RuntimeError(f"super-hedging LP ended with status {res.status}")
    return res.fun + shift
