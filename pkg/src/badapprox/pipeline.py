"""Build, export and self-check a run described by a :class:`RunConfig`."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import random
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from itertools import combinations
from typing import Callable, List, Optional

from .analysis import (DimensionReport, certificate_constant, dim_A2, holder_experiment,
                       mass_distribution_certificate, measure_ledger, s_rho)
from .cantor import (MassTree, build_tree, init_root, layer_masses, membership_witnesses, new_tree,
                     extend_tree, node_mass_bound_ok, separation_ok, tree_to_json)
from .config import RunConfig
from .construction import LevelState, avoidance_check, build_level, initial_state, survives
from .covering import C2, EnlargedRect, vitali_select
from .errors import InsufficientData
from .exact import fmt, power_sign
from .geometry import Rect, rect_contains, rect_intersects, rect_scale
from .rationals import RatPoint, collinear, rationals_in_rect
from .surd import to_float


@dataclass
class Run:
    cfg: RunConfig
    state: LevelState
    tree: MassTree
    holder: Optional[DimensionReport] = None
    ledger: list = field(default_factory=list)


def build_state(cfg: RunConfig, window: Optional[Rect] = None, levels: Optional[int] = None) -> LevelState:
    params = cfg.params()
    levels = levels or cfg.max_level
    state = initial_state(params, window or cfg.window, levels, fault=cfg.fault)
    for _ in range(levels):
        state = build_level(state)
    return state


def run_build(cfg: RunConfig, progress: Optional[Callable[[str], None]] = None) -> Run:
    state = build_state(cfg)
    root = init_root(state, cfg.window, cfg.root_anchor)
    tree = new_tree(root, state.params, cfg.epsilon)
    deep = cfg.deep()
    for _ in range(cfg.depth):
        extend_tree(tree, deep, progress)
    ledger_state = state if cfg.ledger_window is None else build_state(cfg, cfg.ledger_window)
    run = Run(cfg, state, tree, ledger=measure_ledger(ledger_state))
    if tree.depth >= 2:
        try:
            run.holder = holder_experiment(tree, cfg.samples, seed=cfg.seed)
        except InsufficientData:
            run.holder = None
    return run


# ---- exports ----------------------------------------------------------------------

def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def params_report(cfg: RunConfig):
    p = cfg.params()
    return {
        "tau": [fmt(x) for x in p.tau], "rho": [fmt(x) for x in p.rho], "N": p.N, "t": p.t,
        "eps_prime": fmt(p.eps_prime), "c_N": [fmt(x) for x in p.cN], "c1": fmt(p.c1), "c2": fmt(C2),
        "C1": fmt(p.C1), "s": fmt(dim_A2(p.weights)), "s_rho": fmt(s_rho(p.weights, p.exps)),
        "levels": [{"n": n, "ell": list(p.ell(n)), "delta": [fmt(d) for d in p.delta(n)]}
                   for n in range(1, cfg.max_level + 1)],
    }


def levels_json(run: Run):
    s = run.state
    rows = []
    for k in range(1, s.level + 1):
        lead = [lr for lr in s.leading if lr.level == k]
        rows.append({"level": k, "lines": len(s.lines.get(k, {})), "slabs": len(s.slabs_at(k)),
                     "leading": len(lead), "slab_list": [sl.to_json() for sl in s.slabs_at(k)],
                     "leading_list": [lr.point.to_json() for lr in lead]})
    return {"config": run.cfg.to_json(), "window": run.state.window.to_json(), "levels": rows}


def _decimal(x: Fraction, digits: int = 30) -> str:
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(x.numerator) / Decimal(x.denominator))


def ledger_rows(ledger):
    return [[r.level, fmt(r.removed), _decimal(r.removed), fmt(r.bound), fmt(r.cumulative),
             fmt(r.cumulative_bound), int(r.ok), int(r.cumulative_ok)] for r in ledger]


LEDGER_HEADER = ["level", "removed", "removed_decimal", "bound", "cumulative", "cumulative_bound", "ok",
                 "cumulative_ok"]
HOLDER_HEADER = ["sample_id", "x1", "x2", "r", "mu_upper", "x1_exact", "x2_exact", "r_exact", "mu_upper_exact",
                 "log_r", "log_mu"]


def holder_rows(rep: Optional[DimensionReport]):
    if rep is None:
        return []
    return [[i, _decimal(x1, 12), _decimal(x2, 12), _decimal(r, 12), _decimal(m, 12), fmt(x1), fmt(x2), fmt(r),
             fmt(m), repr(math.log(r)), repr(math.log(m))]
            for i, (x1, x2, r, m) in enumerate(rep.points)]


def tree_json(run: Run):
    out = tree_to_json(run.tree)
    out["config"] = run.cfg.to_json()
    out["holder"] = run.holder.to_json() if run.holder else None
    return out


def write_artifacts(run: Run, out_dir: str) -> List[str]:
    os.makedirs(out_dir, exist_ok=True)
    files = {
        "levels.json": _dump(levels_json(run)),
        "tree.json": _dump(tree_json(run)),
        "ledger.csv": _csv(LEDGER_HEADER, ledger_rows(run.ledger)),
        "holder.csv": _csv(HOLDER_HEADER, holder_rows(run.holder)),
    }
    for name, text in files.items():
        with open(os.path.join(out_dir, name), "w") as fh:
            fh.write(text)
    return sorted(files)


RECT_HEADER = ["layer", "node", "kind", "x0", "x1", "y0", "y1"]


def plot_files(out_dir: str):
    """Plot-ready tables derived from the artifacts of a build."""
    with open(os.path.join(out_dir, "tree.json")) as fh:
        tree = json.load(fh)
    with open(os.path.join(out_dir, "holder.csv")) as fh:
        holder = list(csv.DictReader(fh))
    with open(os.path.join(out_dir, "ledger.csv")) as fh:
        ledger = list(csv.DictReader(fh))
    rects = []
    for i, node in enumerate(tree["nodes"]):
        boxes = [("shrink", node["shrink"])]
        if node.get("nested_survivor"):
            boxes.append(("nested", node["nested_survivor"]))
        for kind, r in boxes:
            c = [_float(v) for v in r["center"]]
            h = [_float(v) for v in r["halfwidth"]]
            rects.append([node["level"], i, kind, repr(c[0] - h[0]), repr(c[0] + h[0]),
                          repr(c[1] - h[1]), repr(c[1] + h[1])])
    scatter = [[row["log_r"], row["log_mu"]] for row in holder]
    series = [[row["level"], repr(_float(row["removed"])), repr(_float(row["bound"])),
               repr(_float(row["cumulative"])), repr(_float(row["cumulative_bound"]))] for row in ledger]
    return {
        "rects.csv": _csv(RECT_HEADER, rects),
        "scatter.csv": _csv(["log_r", "log_mu"], scatter),
        "ledger_series.csv": _csv(["level", "removed", "bound", "cumulative", "cumulative_bound"], series),
    }


def _float(v) -> float:
    if isinstance(v, str) and not v.startswith("Surd"):
        return to_float(Fraction(v))
    raise ValueError(f"not a rational: {v!r}")


# ---- self checks --------------------------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    count: int
    failures: int
    detail: str = ""
    skipped: bool = False

    def line(self) -> str:
        if self.skipped:
            return f"SKIP {self.name}: {self.detail}".rstrip()
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: {self.count - self.failures}/{self.count} {self.detail}".rstrip()


def random_small_rect(rng: random.Random, Q: int) -> Rect:
    """Random rational rectangle of area at most ``Q**-3 / 2``."""
    area = Fraction(rng.randint(1, 1000), 1000) / (2 * Q ** 3)
    w = Fraction(rng.randint(1, 1000), 1000) * Fraction(1, Q)
    h = area / (4 * w)
    c = (Fraction(rng.randint(0, 10 ** 6), 10 ** 6), Fraction(rng.randint(0, 10 ** 6), 10 ** 6))
    return Rect(c, (w, h))


def check_simplex(count: int, seed: int) -> Check:
    rng = random.Random(seed)
    bad = 0
    for _ in range(count):
        Q = rng.randint(2, 8)
        pts = rationals_in_rect(random_small_rect(rng, Q), 1, Q)
        if collinear(pts) is None:
            bad += 1
    return Check("simplex", bad == 0, count, bad)


def random_family(rng: random.Random, rho, size: int, qmax: int = 60) -> List[EnlargedRect]:
    pts = set()
    while len(pts) < size:
        q = rng.randint(2, qmax)
        p1, p2 = rng.randint(0, q), rng.randint(0, q)
        if math.gcd(math.gcd(p1, p2), q) == 1:
            pts.add(RatPoint(p1, p2, q))
    return [EnlargedRect.make(p, rho, k) for k, p in enumerate(sorted(pts), 1)]


def vitali_ok(family: List[EnlargedRect]) -> bool:
    kept = vitali_select(family)
    for a, b in combinations(kept, 2):
        if rect_intersects(a.rect, b.rect):
            return False
    grown = [rect_scale(k.rect, 5) for k in kept]
    return all(any(rect_contains(g, r.rect) for g in grown) for r in family)


def check_vitali(count: int, seed: int, rho=(Fraction(3, 2), Fraction(3, 2))) -> Check:
    rng = random.Random(seed)
    bad = sum(not vitali_ok(random_family(rng, rho, rng.randint(1, 25))) for _ in range(count))
    return Check("vitali", bad == 0, count, bad)


def avoidance_targets(state: LevelState, levels: int) -> List[RatPoint]:
    qmax = state.params.N ** levels - 1
    return rationals_in_rect(state.window, 1, qmax)


def check_avoidance(state: LevelState, levels: Optional[int] = None) -> Check:
    levels = min(levels or state.level, state.level)
    pts = avoidance_targets(state, levels)
    bad = sum(not avoidance_check(state, p) for p in pts)
    return Check("avoidance", bad == 0, len(pts), bad, f"(q < {state.params.N ** levels})")


def check_ledger(ledger) -> Check:
    bad = sum(not (r.ok and r.cumulative_ok) for r in ledger)
    return Check("measure-ledger", bad == 0, len(ledger), bad)


def density_failures(tree: MassTree) -> List[str]:
    out = []
    for s in tree.selections:
        tag = f"layer {s.layer} parent {s.parent}"
        if s.ratio <= 0:
            out.append(f"{tag}: zero ratio")
        if s.shortfall:
            continue
        area = sum((r.area() for r in s.rects), Fraction(0))
        if area < C2 * s.host.area or area / s.host.area != s.ratio:
            out.append(f"{tag}: area")
        if not all(rect_contains(s.host, r.rect) for r in s.rects):
            out.append(f"{tag}: outside host")
        if any(rect_intersects(a.rect, b.rect) for a, b in combinations(s.rects, 2)):
            out.append(f"{tag}: overlap")
    return out


def check_density(tree: MassTree) -> Check:
    bad = density_failures(tree)
    short = sum(s.shortfall for s in tree.selections)
    return Check("t-density", not bad, len(tree.selections), len(bad), f"shortfall={short}")


def mass_failures(tree: MassTree) -> List[str]:
    out = []
    for k, m in enumerate(layer_masses(tree)):
        if m != 1:
            out.append(f"layer {k} mass {fmt(m)}")
    for layer in tree.layers[:-1]:
        for node in layer:
            if node.children and sum((c.mass for c in node.children), Fraction(0)) != node.mass:
                out.append(f"children of layer-{node.level} node {node.index}")
    return out


def check_mass(tree: MassTree) -> Check:
    bad = mass_failures(tree)
    return Check("mass-conservation", not bad, sum(len(l) for l in tree.layers), len(bad))


def check_node_bound(tree: MassTree) -> Check:
    nodes = [n for layer in tree.layers[1:] for n in layer]
    bad = sum(not node_mass_bound_ok(tree, n) for n in nodes)
    return Check("node-mass-bound", bad == 0, len(nodes), bad)


def sample_pairs(tree: MassTree, count: int, seed: int):
    rng = random.Random(seed)
    layers = [l for l in tree.layers[1:] if len(l) >= 2]
    pairs = []
    for _ in range(count if layers else 0):
        layer = layers[rng.randrange(len(layers))]
        a, b = rng.sample(range(len(layer)), 2)
        pairs.append((layer[a], layer[b]))
    return pairs


def check_separation(tree: MassTree, count: int, seed: int) -> Check:
    pairs = sample_pairs(tree, count, seed)
    bad = sum(not separation_ok(tree, a, b) for a, b in pairs)
    return Check("separation", bad == 0, len(pairs), bad)


def holder_verdict(tree: MassTree, rep: DimensionReport, slack=Fraction(1, 4)):
    alpha = rep.threshold
    C = certificate_constant(rep, alpha)
    r_o = Fraction(rep.r_range[1])
    cert = mass_distribution_certificate(tree, alpha, r_o, C, report=rep)
    trend = rep.fitted_slope >= float(alpha - slack)
    return trend, cert, C, r_o


def check_holder(tree: MassTree, rep: Optional[DimensionReport]) -> Check:
    if tree.depth < 2:
        return Check("holder", True, 0, 0, "(needs tree depth >= 2)", skipped=True)
    if rep is None:
        return Check("holder", False, 0, 0, "(too few samples)")
    trend, cert, _, _ = holder_verdict(tree, rep)
    return Check("holder", trend and cert and rep.sample_count >= 200, rep.sample_count, 0 if trend and cert else 1,
                 f"(slope {rep.fitted_slope:.3f} vs {float(rep.threshold) - 0.25:.3f}, certificate {cert})")


def chain_ok(tree: MassTree, x) -> bool:
    chain = membership_witnesses(tree, x)
    if len(chain) != tree.depth:
        return False
    tau = tree.params.tau
    for node in chain:
        p = node.center.xy
        for i in (0, 1):
            err = abs(x[i] - p[i])
            if err and power_sign([(err, 1), (Fraction(node.q), 1 + tau[i])]) > 0:
                return False
    return True


def check_containment(state: LevelState, tree: MassTree, count: int, seed: int) -> Check:
    rng = random.Random(seed)
    deep = tree.deepest
    picks = rng.sample(deep, min(count, len(deep)))
    bad = 0
    for node in picks:
        x = node.center.xy
        if not (survives(state, x) and chain_ok(tree, x)):
            bad += 1
    return Check("containment", bad == 0, len(picks), bad)


def verify(run: Run, samples: int = 200) -> List[Check]:
    seed = run.cfg.seed
    return [
        check_simplex(samples, seed),
        check_avoidance(run.state, min(run.state.level, 2)),
        check_ledger(run.ledger),
        check_vitali(samples, seed),
        check_density(run.tree),
        check_mass(run.tree),
        check_node_bound(run.tree),
        check_separation(run.tree, samples, seed),
        check_holder(run.tree, run.holder),
        check_containment(run.state, run.tree, min(samples, 100), seed),
    ]
