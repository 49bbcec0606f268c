"""The Cantor tree of shrink rectangles and its mass distribution.

Each layer is produced inside the nested survivor cells of the previous
layer.  Those cells are far below the resolution of any global build, so
every parent gets its own windowed construction over its cell, run deep
enough that enlarged rectangles fit inside it.  The windowed construction
agrees with the global one inside its window, so this is the same object,
just computed locally.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

from .construction import (ConstructionParams, LeadingRational, LevelState, _ring, build_level, build_to,
                           initial_state, nested_survivor_for)
from .covering import EnlargedRect, Selection, enumerate_R_sequence, t_select
from .errors import ConstructionInfeasible, DensityShortfall, DepthExhausted
from .exact import fmt, power_sign
from .geometry import Rect, rect_chebyshev_contains, rect_intersects
from .rationals import RatPoint
from .surd import floor_of, power, to_float

log = logging.getLogger(__name__)


@dataclass(eq=False)
class CantorNode:
    center: Optional[RatPoint]
    shrink: Rect
    enlargement: Rect
    mass: Fraction
    level: int
    nested_survivor: Optional[Rect] = None
    nested_level: int = 0
    lead_level: int = 0
    parent: Optional["CantorNode"] = None
    children: List["CantorNode"] = field(default_factory=list)
    index: int = 0

    @property
    def q(self) -> int:
        return self.center.q if self.center is not None else 1

    @property
    def key(self):
        return (self.level, self.center.key if self.center else ())

    def fbox(self):
        if not hasattr(self, "_fbox"):
            r = self.shrink
            self._fbox = tuple(to_float(v) for v in r.bounds)
        return self._fbox


@dataclass
class SelectionRecord:
    layer: int
    parent: int
    ratio: Fraction
    family: int
    shortfall: bool
    levels: int
    rects: list = field(default_factory=list, repr=False)
    host: Optional[Rect] = field(default=None, repr=False)


@dataclass
class GChoice:
    layer: int
    q_condition_i: int
    q_condition_ii: int
    q_used: int
    full_condition_met: bool


@dataclass
class MassTree:
    root: CantorNode
    params: ConstructionParams
    epsilon: Fraction
    layers: List[List[CantorNode]]
    G_sequence: List[int] = field(default_factory=list)
    G_report: List[GChoice] = field(default_factory=list)
    selections: List[SelectionRecord] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.layers) - 1

    @property
    def deepest(self) -> List[CantorNode]:
        return self.layers[-1]


# relative position in B where the root search starts; a generic point keeps
# the root off the lines through rationals of small height
ROOT_ANCHOR = (Fraction(1003, 3000), Fraction(2005, 6993))


def init_root(state: LevelState, B: Rect, anchor=None) -> CantorNode:
    """A surviving level-1 cell inside ``B``: the first in row-major order,
    or with ``anchor`` (relative coordinates in ``B``) the nearest to it."""
    if state.level < 1:
        state = build_level(state)
    k = 1
    grid = state.params.ell_grid(k)
    rng = grid.inside_index_range(B)
    if rng is None:
        raise ConstructionInfeasible("no level-1 cell fits inside B; enlarge B or N")
    i0, i1, j0, j1 = rng
    if anchor is None:
        first = next(state.surviving_cells(k, B, inside=True), None)
        if first is None:
            raise ConstructionInfeasible("no surviving level-1 cell lies inside B; enlarge B or N")
        cell = grid.cell(*first)
        return CantorNode(None, cell, cell, Fraction(1), 0, nested_survivor=cell, nested_level=k)
    m1, m2 = grid.counts
    at = [B.lo(i) + Fraction(anchor[i]) * (B.hi(i) - B.lo(i)) for i in (0, 1)]
    ci = min(max(floor_of(at[0] * m1), i0), i1)
    cj = min(max(floor_of(at[1] * m2), j0), j1)
    for d in range(max(ci - i0, i1 - ci, cj - j0, j1 - cj) + 1):
        for i, j in _ring(ci, cj, d):
            if i0 <= i <= i1 and j0 <= j <= j1 and state.cell_survives(k, i, j):
                cell = grid.cell(i, j)
                return CantorNode(None, cell, cell, Fraction(1), 0, nested_survivor=cell, nested_level=k)
    raise ConstructionInfeasible("no surviving level-1 cell lies inside B; enlarge B or N")


def new_tree(root: CantorNode, params: ConstructionParams, epsilon=Fraction(1, 10)) -> MassTree:
    return MassTree(root, params, Fraction(epsilon), [[root]])


# ---- choice of G --------------------------------------------------------------

def _least_int(pred, start: int = 1) -> int:
    """Least integer ``d >= start`` with monotone ``pred(d)``."""
    if pred(start):
        return start
    lo, hi = start, start * 2 + 1
    while not pred(hi):
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def condition_i_threshold(params: ConstructionParams, parent: CantorNode) -> int:
    """Least d with ``d(parent)^(-1-tau1) > 3 d^(-rho2)``."""
    qp = parent.q
    tau1, rho2 = params.weights.tau1, params.exps.rho2
    return _least_int(lambda d: power_sign([(Fraction(d), rho2), (Fraction(1, 3), 1),
                                             (Fraction(qp), -(1 + tau1))]) > 0)


def condition_ii_threshold(params: ConstructionParams, parent: CantorNode, epsilon: Fraction) -> int:
    """Least d with ``mass / area(shrink) <= d^eps``."""
    ratio = parent.mass / parent.shrink.area if isinstance(parent.shrink.area, Fraction) else None
    if ratio is not None:
        return _least_int(lambda d: power_sign([(Fraction(d), epsilon), (1 / ratio, 1)]) >= 0)
    # area(shrink) = 4 q^(-2-sigma)
    qp, sigma = parent.q, params.weights.sigma
    return _least_int(lambda d: power_sign([(Fraction(d), epsilon), (4 / parent.mass, 1),
                                             (Fraction(qp), -(2 + sigma))]) >= 0)


def G_threshold(tree: MassTree, n: int, enforce_ii: bool = False) -> GChoice:
    """Denominator threshold for layer ``n`` over all parents in layer ``n-1``."""
    parents = tree.layers[n - 1]
    qi = max(condition_i_threshold(tree.params, p) for p in parents)
    qii = max(condition_ii_threshold(tree.params, p, tree.epsilon) for p in parents)
    used = max(qi, qii) if enforce_ii else qi
    return GChoice(n, qi, qii, used, used >= qii)


def choose_G(tree: MassTree, n: int, seq: Sequence[EnlargedRect], enforce_ii: bool = True,
             previous: int = 0) -> int:
    """Smallest sequence index G > ``previous`` from which both conditions
    hold for every later rectangle (the sequence is sorted by q)."""
    if n == 1:
        return 1
    g = G_threshold(tree, n, enforce_ii)
    for r in seq:
        if r.seq_index > previous and r.q >= g.q_used:
            return r.seq_index
    raise DepthExhausted(f"sequence exhausted before the layer-{n} conditions hold (need q >= {g.q_used})")


# ---- growing the tree ----------------------------------------------------------

def fit_threshold(params: ConstructionParams, host: Rect) -> int:
    """Least q whose enlarged rectangle is no wider than ``host``."""
    def ok(q):
        return all(power(q, -params.rho[i], 3) <= host.halfwidth[i] for i in (0, 1))
    return _least_int(ok)


@dataclass
class DeepConfig:
    extra_levels: int = 1
    max_level_cap: int = 16
    prefix_rule: str = "full"
    strict_density: bool = False
    enforce_ii: bool = False
    fault: Optional[str] = None
    workers: int = 1
    # where inside a shrink the nested survivor search starts, in units of
    # its half-widths; away from the centre, whose nearby rationals crowd
    # onto a few lines through it
    anchor: tuple = (Fraction(1, 2), Fraction(1, 3))


def _level_for(params: ConstructionParams, q: int) -> int:
    m = 1
    while params.N ** m <= q:
        m += 1
    return m


def select_in_host(params: ConstructionParams, host: Rect, host_level: int, q_min: int, cfg: DeepConfig):
    """Run a local construction over ``host`` until the selection reaches
    the density target or the level cap; returns (state, selection)."""
    m = max(_level_for(params, q_min), host_level + 1)
    if m > cfg.max_level_cap:
        raise DepthExhausted(f"needs construction level {m} beyond the cap {cfg.max_level_cap}")
    target = min(m + cfg.extra_levels, cfg.max_level_cap)
    top = min(target + 1, cfg.max_level_cap)  # room for one more level on shortfall
    state = build_to(initial_state(params, host, top, fault=cfg.fault, avoid_pad=False), target)
    grid = params.ell_grid(host_level)
    idx = grid.cells_containing(host.center)[0]
    if not state.cell_survives(host_level, *idx):
        raise ConstructionInfeasible("host cell does not survive in its local construction")
    while True:
        leading = [lr for lr in state.leading
                   if lr.point.q >= q_min and rect_chebyshev_contains(host, lr.point.xy)]
        seq = enumerate_R_sequence(leading, params.exps)
        try:
            sel = t_select(state, host, 1, seq, host_level, strict=cfg.strict_density and state.level == top,
                           rule=cfg.prefix_rule)
        except DensityShortfall:
            if state.level < top:
                state = build_level(state)
                continue
            raise
        if sel.shortfall and state.level < top:
            state = build_level(state)
            continue
        return state, sel


def extend_tree(tree: MassTree, cfg: Optional[DeepConfig] = None,
                progress: Optional[Callable[[str], None]] = None) -> MassTree:
    cfg = cfg or DeepConfig()
    params = tree.params
    n = len(tree.layers)
    parents = tree.layers[-1]
    if n == 1:
        gq = GChoice(1, 1, 1, 1, True)
    else:
        gq = G_threshold(tree, n, cfg.enforce_ii)
    tree.G_report.append(gq)
    tree.G_sequence.append(gq.q_used)
    def work(parent):
        host, k = parent.nested_survivor, parent.nested_level
        q_min = max(gq.q_used, fit_threshold(params, host))
        return select_in_host(params, host, k, q_min, cfg)

    layer: List[CantorNode] = []
    for pi, (parent, (state, sel)) in enumerate(zip(parents, _ordered_map(work, parents, cfg.workers))):
        host = parent.nested_survivor
        tree.selections.append(SelectionRecord(n, pi, sel.ratio, len(sel.family), sel.shortfall, state.level,
                                               list(sel.family), host))
        total = sum((r.area() for r in sel.family), Fraction(0))
        by_point = {lr.point: lr for lr in state.leading}
        for r in sel.family:
            if cfg.fault == "unnormalized-mass":
                mass = parent.mass * r.area() / host.area
            else:
                mass = parent.mass * r.area() / total
            lr = by_point[r.center]
            shrink = Rect(r.center.xy, params.shrink_halfwidth(r.q))
            nested = nested_survivor_for(state, lr, cfg.anchor)
            child = CantorNode(r.center, shrink, r.rect, mass, n, nested_survivor=nested,
                               nested_level=lr.level - 1, lead_level=lr.level, parent=parent)
            parent.children.append(child)
            layer.append(child)
        if progress:
            progress(f"layer {n}: parent {pi + 1}/{len(parents)} -> {len(sel.family)} children "
                     f"(density {float(sel.ratio):.4f}, local depth {state.level})")
    for i, node in enumerate(layer):
        node.index = i
    tree.layers.append(layer)
    return tree


def _ordered_map(fn, items, workers: int = 1):
    """Results in input order whatever the worker count."""
    if workers <= 1:
        for x in items:
            yield fn(x)
        return
    with ThreadPoolExecutor(max_workers=workers) as ex:
        yield from ex.map(fn, items)


def build_tree(state: LevelState, B: Rect, depth: int, epsilon=Fraction(1, 10),
               cfg: Optional[DeepConfig] = None, progress=None, anchor=None) -> MassTree:
    root = init_root(state, B, anchor)
    tree = new_tree(root, state.params, epsilon)
    for _ in range(depth):
        extend_tree(tree, cfg, progress)
    return tree


# ---- queries -------------------------------------------------------------------

def _fmeet(a, b) -> bool:
    m = 1e-15
    return not (a[1] + m < b[0] or b[1] + m < a[0] or a[3] + m < b[2] or b[3] + m < a[2])


def mass_of_rect(tree: MassTree, F: Rect) -> Fraction:
    fb = tuple(to_float(v) for v in F.bounds)
    total = Fraction(0)
    for node in tree.deepest:
        if _fmeet(node.fbox(), fb) and rect_intersects(node.shrink, F):
            total += node.mass
    return total


def membership_witnesses(tree: MassTree, x) -> List[CantorNode]:
    """Nodes of layers 1..depth whose shrinks contain ``x``, one per layer."""
    if not rect_chebyshev_contains(tree.root.shrink, x):
        return []
    chain = []
    node = tree.root
    while node.children:
        nxt = next((c for c in node.children if rect_chebyshev_contains(c.shrink, x)), None)
        if nxt is None:
            break
        chain.append(nxt)
        node = nxt
    return chain


def layer_masses(tree: MassTree) -> List[Fraction]:
    return [sum((n.mass for n in layer), Fraction(0)) for layer in tree.layers]


def node_mass_bound_ok(tree: MassTree, node: CantorNode) -> bool:
    """``mass <= C1 d^(-3+eps)`` decided exactly."""
    C1, eps = tree.params.C1, tree.epsilon
    return power_sign([(node.mass, 1), (C1, -1), (Fraction(node.q), 3 - eps)]) <= 0


def pair_gap_radius(a: CantorNode, b: CantorNode):
    """Least sup-norm radius of a closed ball meeting both shrinks."""
    gaps = []
    for i in (0, 1):
        g = max(b.shrink.lo(i) - a.shrink.hi(i), a.shrink.lo(i) - b.shrink.hi(i), Fraction(0))
        gaps.append(g)
    return max(gaps) / 2


def separation_ok(tree: MassTree, a: CantorNode, b: CantorNode) -> bool:
    r = pair_gap_radius(a, b)
    q = min(a.q, b.q)
    bound = power(q, -tree.params.rho[0])
    return r >= bound


def tree_to_json(tree: MassTree):
    nodes = []
    index = {}
    for layer in tree.layers:
        for node in layer:
            index[id(node)] = len(nodes)
            nodes.append({
                "center": node.center.to_json() if node.center else None,
                "level": node.level,
                "mass": fmt(node.mass),
                "parent_index": index[id(node.parent)] if node.parent is not None else None,
                "lead_level": node.lead_level,
                "shrink": node.shrink.to_json(),
                "nested_survivor": node.nested_survivor.to_json() if node.nested_survivor else None,
            })
    return {
        "params": tree.params.to_json(),
        "epsilon": fmt(tree.epsilon),
        "nodes": nodes,
        "layers": [{"size": len(l), "mass": fmt(m)} for l, m in zip(tree.layers, layer_masses(tree))],
        "G": [{"layer": g.layer, "q_condition_i": str(g.q_condition_i), "q_condition_ii": str(g.q_condition_ii),
               "q_used": str(g.q_used), "full_condition_met": g.full_condition_met} for g in tree.G_report],
        "selections": [{"layer": s.layer, "parent": s.parent, "ratio": fmt(s.ratio), "family": s.family,
                        "shortfall": s.shortfall, "local_levels": s.levels} for s in tree.selections],
    }
