"""Exact finite-horizon planning on the belief-space decision tree.

The tree alternates decision layers (treat vs. stop) and chance layers (the
five possible next delta bins); stopping creates a terminal node, and the
expansion ends at the horizon. Terminal and leaf nodes are valued by the
outcome-shortfall-adjusted CPUC of their accumulated cost and projected
since-baseline change; a backward pass then takes expectations (or the
max-probability child, in MaxProb mode) at chance nodes and the minimum at
decision nodes. Ties prefer stopping: equal cost-effectiveness with fewer
sessions wins.

Branch semantics: chance children carry point-mass beliefs on their
conditioning bin with the score estimate advanced by the realized bin's
effect mean; the root belief's uncertainty enters through the first chance
layer's probability weights.

The backward pass runs in a compiled kernel when the extension built
(``treatplan._backup``), falling back to the pure-Python twin otherwise; set
``TREATPLAN_PURE_PYTHON=1`` to force the fallback. ``build_tree`` materialises
the full solved tree in Python objects for inspection, debugging, and tests.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .belief import Belief
from .domain import Action, DeltaBin, N_BINS, ScaleConfig, bin_delta
from .errors import CapacityError, HorizonError, InvalidInputError
from .transitions import ModelClass, TransitionModel
from .utility import cpuc, delta_max_for, osf_adjust

if os.environ.get("TREATPLAN_PURE_PYTHON", "") not in ("", "0"):
    from . import _backup_py as _kernel
else:
    try:
        from . import _backup as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _backup_py as _kernel

DEFAULT_NODE_BUDGET = 5_000_000

_COND_KIND = {
    ModelClass.ZEROTH_ORDER: 0,
    ModelClass.FIRST_ORDER_LOCAL: 1,
    ModelClass.GLOBAL_AVERAGE: 2,
}


def kernel_name() -> str:
    """Which backup kernel is active: ``cython`` or ``python``."""
    return "python" if _kernel.__name__.endswith("_backup_py") else "cython"


class BackupMode(Enum):
    NORMAL = "normal"
    MAXPROB = "maxprob"


class NodeKind(Enum):
    DECISION = "decision"
    CHANCE = "chance"
    TERMINAL = "terminal"
    LEAF = "leaf"


@dataclass
class SearchNode:
    """One node of the (solved) planning tree.

    ``via_action`` labels the edge from a decision parent; ``realized_bin``
    and ``probability`` label the edge from a chance parent. ``action`` is
    the optimal choice at decision nodes, filled by the backward pass.
    """

    kind: NodeKind
    belief: Belief
    session_index: int
    accumulated_cost: float
    value: float = math.nan
    action: Optional[Action] = None
    via_action: Optional[Action] = None
    realized_bin: Optional[DeltaBin] = None
    probability: Optional[float] = None
    children: list["SearchNode"] = field(default_factory=list)

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass(frozen=True)
class Plan:
    """Result of one planning pass from the current belief."""

    root_action: Action
    root_value: float
    node_count: int
    optimal_subtree: Optional[SearchNode] = None


def tree_size(remaining_sessions: int, branching: int = N_BINS) -> int:
    """Exact node count of the full expansion with ``remaining_sessions``
    decisions left: every decision node adds one terminal, one chance node,
    and ``branching`` subtrees."""
    if remaining_sessions < 0:
        raise InvalidInputError("remaining_sessions must be non-negative")
    if branching < 1:
        raise InvalidInputError("branching must be positive")
    r = remaining_sessions
    if r == 0:
        return 1
    if branching == 1:
        return 3 * r + 1
    b_pow = branching**r
    return 3 * (b_pow - 1) // (branching - 1) + b_pow


def plan(
    belief: Belief,
    session_index: int,
    accumulated_cost: float,
    model: TransitionModel,
    cfg: ScaleConfig = ScaleConfig(),
    osf: float = 0.0,
    mode: BackupMode = BackupMode.NORMAL,
    *,
    osf_scale: float = 1.0,
    node_budget: int = DEFAULT_NODE_BUDGET,
    keep_subtree: bool = False,
) -> Plan:
    """Solve the remaining-horizon tree and return the optimal root action.

    ``osf`` weighs the outcome shortfall into every terminal/leaf valuation;
    ``osf_scale`` rescales that term without changing the nominal ``osf``.
    ``keep_subtree`` additionally materialises the optimal subtree (all
    chance children, the single chosen action at each retained decision
    node); leave it off in hot loops.
    """
    if session_index >= cfg.horizon:
        raise HorizonError(
            f"session {session_index} is at or past horizon {cfg.horizon}; nothing to plan"
        )
    if osf < 0:
        raise InvalidInputError("osf must be non-negative")
    remaining = cfg.horizon - session_index
    n_nodes = tree_size(remaining)
    if n_nodes > node_budget:
        raise CapacityError(
            f"full expansion needs {n_nodes} nodes, over the budget of {node_budget}"
        )
    value, action = _kernel.solve_backup(
        model.rows_matrix().tolist(),
        model.effect_means.tolist(),
        belief.probs.tolist(),
        belief.expected_score,
        belief.baseline_score,
        cfg.score_min,
        cfg.score_max,
        cfg.bin_edges,
        _COND_KIND[model.model_class],
        remaining,
        float(accumulated_cost),
        cfg.cps,
        osf * osf_scale,
        delta_max_for(belief, cfg),
        mode is BackupMode.MAXPROB,
    )
    subtree = None
    if keep_subtree:
        root = build_tree(
            belief,
            session_index,
            accumulated_cost,
            model,
            cfg,
            osf,
            mode,
            osf_scale=osf_scale,
            node_budget=node_budget,
        )
        subtree = extract_optimal_subtree(root)
    return Plan(
        root_action=Action(action),
        root_value=value,
        node_count=n_nodes,
        optimal_subtree=subtree,
    )


def build_tree(
    belief: Belief,
    session_index: int,
    accumulated_cost: float,
    model: TransitionModel,
    cfg: ScaleConfig = ScaleConfig(),
    osf: float = 0.0,
    mode: BackupMode = BackupMode.NORMAL,
    *,
    osf_scale: float = 1.0,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> SearchNode:
    """Materialise and solve the full expansion as Python objects.

    Matches the kernel result exactly; meant for tests, debugging, and plan
    dumps rather than cohort-scale loops.
    """
    if session_index >= cfg.horizon:
        raise HorizonError(
            f"session {session_index} is at or past horizon {cfg.horizon}; nothing to plan"
        )
    remaining = cfg.horizon - session_index
    if tree_size(remaining) > node_budget:
        raise CapacityError(f"full expansion exceeds the node budget of {node_budget}")

    rows = model.rows_matrix().tolist()
    means = model.effect_means.tolist()
    baseline = belief.baseline_score
    delta_max = delta_max_for(belief, cfg)
    osf_eff = osf * osf_scale
    maxprob = mode is BackupMode.MAXPROB
    cond_kind = _COND_KIND[model.model_class]

    def leaf_value(cost: float, score: float) -> float:
        return osf_adjust(cpuc(cost, score - baseline, cfg.cps), score - baseline, delta_max, osf, osf_scale)

    def expand_decision(node_belief: Belief, t: int, cost: float) -> SearchNode:
        node = SearchNode(NodeKind.DECISION, node_belief, t, cost)
        terminal = SearchNode(
            NodeKind.TERMINAL,
            node_belief,
            t,
            cost,
            value=leaf_value(cost, node_belief.expected_score),
            via_action=Action.STOP,
        )
        chance = expand_chance(node_belief, t, cost)
        node.children = [terminal, chance]
        if chance.value < terminal.value:
            node.value = chance.value
            node.action = Action.TREAT
        else:
            node.value = terminal.value
            node.action = Action.STOP
        return node

    def expand_chance(node_belief: Belief, t: int, cost: float) -> SearchNode:
        chance = SearchNode(NodeKind.CHANCE, node_belief, t, cost, via_action=Action.TREAT)
        cost2 = cost + cfg.cps
        probs = []
        for n in range(N_BINS):
            acc = 0.0
            for c in range(N_BINS):
                acc = acc + node_belief.probs[c] * rows[c][n]
            probs.append(acc)
        score = node_belief.expected_score
        for n in range(N_BINS):
            s2 = score + means[n]
            if s2 < cfg.score_min:
                s2 = cfg.score_min
            elif s2 > cfg.score_max:
                s2 = cfg.score_max
            if cond_kind == 2:
                cond_bin = bin_delta(s2 - baseline, cfg)
            else:
                cond_bin = DeltaBin(n)
            child_belief = Belief.point_mass(cond_bin, s2, baseline)
            if t + 1 == cfg.horizon:
                kid = SearchNode(
                    NodeKind.LEAF,
                    child_belief,
                    t + 1,
                    cost2,
                    value=leaf_value(cost2, s2),
                )
            else:
                kid = expand_decision(child_belief, t + 1, cost2)
            kid.realized_bin = DeltaBin(n)
            kid.probability = probs[n]
            chance.children.append(kid)
        if maxprob:
            best = 0
            best_p = probs[0]
            for n in range(1, N_BINS):
                if probs[n] > best_p:
                    best_p = probs[n]
                    best = n
            chance.value = chance.children[best].value
        else:
            acc = 0.0
            for n in range(N_BINS):
                p = probs[n]
                if p != 0.0:
                    acc = acc + p * chance.children[n].value
            chance.value = acc
        return chance

    return expand_decision(belief, session_index, float(accumulated_cost))


def extract_optimal_subtree(root: SearchNode) -> SearchNode:
    """Retained strategy: every chance child, one chosen action per decision."""

    def prune(node: SearchNode) -> SearchNode:
        copy = SearchNode(
            kind=node.kind,
            belief=node.belief,
            session_index=node.session_index,
            accumulated_cost=node.accumulated_cost,
            value=node.value,
            action=node.action,
            via_action=node.via_action,
            realized_bin=node.realized_bin,
            probability=node.probability,
        )
        if node.kind is NodeKind.DECISION:
            chosen = next(c for c in node.children if c.via_action is node.action)
            copy.children = [prune(chosen)]
        else:
            copy.children = [prune(c) for c in node.children]
        return copy

    return prune(root)


def dump_tree(node: SearchNode) -> str:
    """Plain-text rendering of a (sub)tree, one node per line."""

    lines: list[str] = []

    def fmt(x: float) -> str:
        return f"{x:.6g}"

    def visit(n: SearchNode, depth: int):
        parts = [n.kind.value, f"t={n.session_index}"]
        if n.via_action is not None:
            parts.append(f"via={n.via_action.name.lower()}")
        if n.realized_bin is not None:
            parts.append(f"bin={n.realized_bin.label}")
        if n.probability is not None:
            parts.append(f"p={fmt(n.probability)}")
        parts.append(f"score={fmt(n.belief.expected_score)}")
        parts.append(f"cost={fmt(n.accumulated_cost)}")
        parts.append(f"value={fmt(n.value)}")
        if n.action is not None:
            parts.append(f"action={n.action.name.lower()}")
        lines.append("  " * depth + " ".join(parts))
        for c in n.children:
            visit(c, depth + 1)

    visit(node, 0)
    return "\n".join(lines) + "\n"
