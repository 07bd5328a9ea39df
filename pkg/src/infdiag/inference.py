"""Usage-direction engine: answer queries by transforming the diagram.

A posterior query is executed as a plan of transform steps: barren
non-query nodes are deleted, evidence nodes are conditioned away, the
remaining nuisance nodes are summed out, and the target, by then a lone
root, carries its own posterior. The plan, with the arc fill-in each step
incurred, is returned alongside the answer, because the *order* of the
reversals is exactly what determines how dense the intermediate diagrams
get; ``plan_reversals`` and ``compare_orders`` search that ordering space.

``d_separated`` reads conditional independence straight off the graph,
with the usual trail rules: chains and forks are blocked by a conditioned
middle node, colliders are blocked unless the collider or one of its
descendants is conditioned.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

import numpy as np

from .diagram import (
    DETERMINISTIC,
    Diagram,
    parent_arities,
    row_count,
    topological_order,
)
from .errors import (
    EvidenceOnTarget,
    InvalidParameters,
    SameNode,
    TooLargeForExhaustive,
    UnknownNode,
    UnknownOutcome,
)
from .transform import (
    CONDITION,
    REMOVE_BARREN,
    SUM_OUT,
    TransformStep,
    apply_step,
)

# Exhaustive search is capped at 8! candidate orderings.
MAX_EXHAUSTIVE_NODES = 8
GREEDY_SAMPLE_COUNT = 32


@dataclass(frozen=True)
class Metrics:
    """Diagram complexity: arcs, and free parameters across all tables."""

    arc_count: int
    free_parameter_count: int


@dataclass(frozen=True)
class Plan:
    """An executed (hence legal) sequence of transform steps."""

    steps: tuple[TransformStep, ...]
    total_added_arcs: int
    total_parameters_touched: int

    def encode(self) -> str:
        return "; ".join(step.encode() for step in self.steps)


def complexity(diagram: Diagram) -> Metrics:
    arcs = sum(len(spec.parents) for spec in diagram.nodes.values())
    params = sum(
        spec.free_parameters(row_count(parent_arities(diagram, spec)))
        for spec in diagram.nodes.values())
    return Metrics(arc_count=arcs, free_parameter_count=params)


def _check_query(diagram: Diagram, target: str, evidence: dict) -> None:
    if target not in diagram.nodes:
        raise UnknownNode(f"unknown target node '{target}'")
    for name, label in evidence.items():
        if name not in diagram.nodes:
            raise UnknownNode(f"unknown evidence node '{name}'")
        if label not in diagram.nodes[name].outcomes:
            raise UnknownOutcome(f"node '{name}' has no outcome '{label}'")
    if target in evidence:
        raise EvidenceOnTarget(f"'{target}' is both target and evidence")


def _topo_pos(diagram: Diagram) -> dict[str, int]:
    return {n: i for i, n in enumerate(topological_order(diagram))}


def _root_marginal(diagram: Diagram, name: str) -> np.ndarray:
    spec = diagram.nodes[name]
    if spec.kind == DETERMINISTIC:
        vec = np.zeros(spec.n_outcomes)
        vec[spec.table.entries[0]] = 1.0
        return vec
    return np.asarray(spec.table.rows[0], dtype=float)


def posterior(diagram: Diagram, target: str,
              evidence: dict[str, str]) -> tuple[np.ndarray, Plan]:
    """Posterior over the target's outcomes, computed by arc reversal.

    Returns the probability vector and the plan that produced it. Matches
    the enumeration oracle within tight tolerance; raises
    ZeroProbabilityEvidence when the evidence has no mass.
    """
    _check_query(diagram, target, evidence)
    steps: list[TransformStep] = []
    pending = dict(evidence)

    def prune_barren(d: Diagram) -> Diagram:
        while True:
            keep = {target} | set(pending)
            barren = sorted(n for n in d.nodes
                            if n not in keep and not d.children(n))
            if not barren:
                return d
            d, st = apply_step(d, TransformStep(REMOVE_BARREN, barren[0]))
            steps.append(st)

    d = prune_barren(diagram)
    while pending:
        pos = _topo_pos(d)
        name = min(pending, key=pos.__getitem__)
        d, st = apply_step(
            d, TransformStep(CONDITION, name, outcome=pending.pop(name)))
        steps.append(st)
        d = prune_barren(d)
    while len(d.nodes) > 1:
        pos = _topo_pos(d)
        nuisance = min((n for n in d.nodes if n != target),
                       key=pos.__getitem__)
        d, st = apply_step(d, TransformStep(SUM_OUT, nuisance))
        steps.append(st)
        d = prune_barren(d)

    plan = Plan(tuple(steps),
                sum(s.added_arcs for s in steps),
                sum(s.parameters_touched for s in steps))
    return _root_marginal(d, target), plan


# -- reversal-order search ----------------------------------------------------

def _execute_order(diagram: Diagram, target: str, evidence: dict,
                   node_order) -> tuple[Plan, Metrics]:
    """Run the query eliminating nodes in the given order; report the plan
    and the *peak* complexity seen along the way."""
    d = diagram
    peak = complexity(d)
    steps = []
    for name in node_order:
        if name in evidence:
            step = TransformStep(CONDITION, name, outcome=evidence[name])
        elif d.children(name):
            step = TransformStep(SUM_OUT, name)
        else:
            step = TransformStep(REMOVE_BARREN, name)
        d, st = apply_step(d, step)
        steps.append(st)
        m = complexity(d)
        peak = Metrics(max(peak.arc_count, m.arc_count),
                       max(peak.free_parameter_count, m.free_parameter_count))
    plan = Plan(tuple(steps),
                sum(s.added_arcs for s in steps),
                sum(s.parameters_touched for s in steps))
    return plan, peak


def _greedy_order(diagram: Diagram, target: str, evidence: dict) -> list[str]:
    """Pick, at each step, the elimination whose step adds the fewest arcs
    (ties broken by the step's string encoding)."""
    d = diagram
    pending = dict(evidence)
    order = []
    while len(d.nodes) > 1 or pending:
        best = None
        for name in sorted(d.nodes):
            if name == target:
                continue
            if name in pending:
                step = TransformStep(CONDITION, name, outcome=pending[name])
            elif d.children(name):
                step = TransformStep(SUM_OUT, name)
            else:
                step = TransformStep(REMOVE_BARREN, name)
            nd, st = apply_step(d, step)
            key = (st.added_arcs, st.encode())
            if best is None or key < best[0]:
                best = (key, name, nd)
        _, name, d = best
        pending.pop(name, None)
        order.append(name)
    return order


def plan_reversals(diagram: Diagram, target: str, evidence: dict[str, str],
                   strategy: str = "greedy") -> Plan:
    """Plan the transform sequence for a query without caring about the
    answer, only about arc fill-in.

    ``greedy`` locally minimizes arcs added per step; ``exhaustive`` tries
    every elimination ordering (capped at 8! candidates) and returns one
    with minimal total added arcs.
    """
    _check_query(diagram, target, evidence)
    if strategy == "greedy":
        order = _greedy_order(diagram, target, evidence)
        plan, _ = _execute_order(diagram, target, evidence, order)
        return plan
    if strategy == "exhaustive":
        ranked = _exhaustive_ranked(diagram, target, evidence)
        return ranked[0][0]
    raise InvalidParameters(f"unknown strategy {strategy!r}")


def _exhaustive_ranked(diagram: Diagram, target: str,
                       evidence: dict) -> list[tuple[Plan, Metrics]]:
    others = [n for n in diagram.nodes if n != target]
    if len(others) > MAX_EXHAUSTIVE_NODES:
        raise TooLargeForExhaustive(
            f"{len(others)}! orderings exceed the "
            f"{MAX_EXHAUSTIVE_NODES}! exhaustive cap")
    results = [_execute_order(diagram, target, evidence, perm)
               for perm in itertools.permutations(sorted(others))]
    results.sort(key=lambda pm: (pm[0].total_added_arcs, pm[0].encode()))
    return results


def compare_orders(diagram: Diagram, target: str, evidence: dict[str, str],
                   mode: str = "exhaustive") -> list[tuple[Plan, Metrics]]:
    """Rank elimination orderings for a query by total arc fill-in.

    Every returned plan was actually executed, so all are legal; the
    metrics give the peak complexity the diagram reached under that plan.
    ``exhaustive`` ranks every ordering (8! cap); ``greedy-sample`` ranks
    the greedy plan plus a fixed-seed sample of random orderings.
    """
    _check_query(diagram, target, evidence)
    if mode == "exhaustive":
        return _exhaustive_ranked(diagram, target, evidence)
    if mode == "greedy-sample":
        others = sorted(n for n in diagram.nodes if n != target)
        orders = [tuple(_greedy_order(diagram, target, evidence))]
        rng = random.Random(0)
        for _ in range(GREEDY_SAMPLE_COUNT):
            perm = list(others)
            rng.shuffle(perm)
            if tuple(perm) not in orders:
                orders.append(tuple(perm))
        results = [_execute_order(diagram, target, evidence, o)
                   for o in orders]
        results.sort(key=lambda pm: (pm[0].total_added_arcs, pm[0].encode()))
        return results
    raise InvalidParameters(f"unknown mode {mode!r}")


# -- graphical independence ----------------------------------------------------

def d_separated(diagram: Diagram, a: str, b: str, given) -> bool:
    """True iff every trail between a and b is blocked by ``given``.

    Sound with respect to the numbers: a separated pair is independent in
    the represented joint. The converse is not claimed.
    """
    given = set(given)
    for name in {a, b} | given:
        if name not in diagram.nodes:
            raise UnknownNode(f"unknown node '{name}'")
    if a == b:
        raise SameNode(f"'{a}' cannot be separated from itself")
    if a in given or b in given:
        raise InvalidParameters("endpoints may not be in the conditioning set")

    # Nodes with a conditioned descendant (or themselves conditioned):
    # these are the colliders that conditioning opens.
    opened = set()
    stack = list(given)
    while stack:
        n = stack.pop()
        if n in opened:
            continue
        opened.add(n)
        stack.extend(diagram.nodes[n].parents)

    kids = diagram.children_map()
    seen = set()
    frontier = [(a, "up")]
    while frontier:
        node, direction = frontier.pop()
        if (node, direction) in seen:
            continue
        seen.add((node, direction))
        if node == b:
            return False
        if direction == "up":
            if node not in given:
                frontier.extend((p, "up") for p in diagram.nodes[node].parents)
                frontier.extend((c, "down") for c in kids[node])
        else:
            if node not in given:
                frontier.extend((c, "down") for c in kids[node])
            if node in opened:
                frontier.extend((p, "up") for p in diagram.nodes[node].parents)
    return True
