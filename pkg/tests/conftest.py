"""Shared helpers for the test suite.

The seeded families defined here are the workhorses: `seeded_diagram`
draws from the same generator the package ships, and `seeded_query_case`
additionally picks a target and evidence, with the evidence sampled from
an assignment of positive joint probability so conditioning is always
well-defined.
"""

from __future__ import annotations

import itertools
import random
from pathlib import Path

from infdiag import gen_random, joint_table, topological_order
from infdiag.diagram import Cpt, parent_arities, row_index

DOCS = Path(__file__).resolve().parent.parent / "docs"


def seeded_diagram(seed: int, node_count: int | None = None,
                   max_outcomes: int = 4, density: float = 0.4,
                   det_fraction: float = 0.2):
    """One diagram of the standard seeded family (2..7 nodes by default)."""
    if node_count is None:
        node_count = 2 + seed % 6
    return gen_random(node_count, max_outcomes, density, det_fraction, seed)


def seeded_query_case(seed: int):
    """(diagram, target, evidence) with evidence satisfiable by construction.

    Evidence outcomes are read off one positive-probability assignment of
    the joint, so P(evidence) > 0 always holds.
    """
    diagram = seeded_diagram(seed, node_count=3 + seed % 5)
    rng = random.Random(10_000 + seed)
    table = joint_table(diagram)
    target = rng.choice(list(diagram.nodes))

    flat = table.probs.reshape(-1)
    idx = rng.choices(range(flat.size), weights=flat)[0]
    combo = []
    rest = idx
    for size in reversed([len(o) for o in table.outcomes]):
        combo.append(rest % size)
        rest //= size
    combo.reverse()

    pool = [v for v in table.variables if v != target]
    rng.shuffle(pool)
    evidence = {}
    for v in pool[:rng.randint(0, min(3, len(pool)))]:
        ax = table.axis(v)
        evidence[v] = table.outcomes[ax][combo[ax]]
    return diagram, target, evidence


def enumerate_joint(diagram) -> dict[tuple[int, ...], float]:
    """Second, independent joint implementation: plain dicts, no arrays.

    Maps outcome-index tuples (in topological order) to probabilities by
    direct chain-rule lookup.
    """
    order = topological_order(diagram)
    axis = {v: i for i, v in enumerate(order)}
    out = {}
    for combo in itertools.product(
            *(range(diagram.nodes[v].n_outcomes) for v in order)):
        p = 1.0
        for v in order:
            spec = diagram.nodes[v]
            row = row_index(parent_arities(diagram, spec),
                            [combo[axis[q]] for q in spec.parents])
            oi = combo[axis[v]]
            if isinstance(spec.table, Cpt):
                p *= spec.table.rows[row][oi]
            elif spec.table.entries[row] != oi:
                p = 0.0
            if p == 0.0:
                break
        out[combo] = p
    return out
