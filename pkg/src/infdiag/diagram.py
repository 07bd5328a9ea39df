"""Core representation of an influence diagram over discrete chance nodes.

A diagram is an acyclic directed graph. Each node is a random variable with
a fixed, ordered list of outcome labels; arcs point from a node's parents
(conditioning variables) to the node. Probabilistic nodes carry a
conditional probability table, deterministic nodes carry a function table
mapping each parent configuration to one outcome.

Table row convention: rows are indexed by parent configuration, enumerated
in declared parent order with the *last* parent varying fastest. The same
convention is used by every table in the package and by the file format.

Diagrams are immutable values: every operation returns a new diagram and
never touches its input, so they are safe to share across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CycleDetected,
    CycleWouldForm,
    DuplicateName,
    InvalidNodeSpec,
    NormalizationViolation,
    OutcomeOutOfRange,
    TableShapeMismatch,
    UnknownParent,
)

PROBABILISTIC = "probabilistic"
DETERMINISTIC = "deterministic"

NAME_PATTERN = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*\Z")

# A CPT row must sum to 1 within this tolerance. Rows are stored as given;
# we never renormalize silently.
ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table: one distribution row per parent config."""

    rows: tuple[tuple[float, ...], ...]

    @classmethod
    def of(cls, rows) -> "Cpt":
        return cls(tuple(tuple(float(p) for p in row) for row in rows))


@dataclass(frozen=True)
class DetTable:
    """Deterministic function table: one outcome index per parent config."""

    entries: tuple[int, ...]

    @classmethod
    def of(cls, entries) -> "DetTable":
        return cls(tuple(int(e) for e in entries))


@dataclass(frozen=True)
class NodeSpec:
    """One chance node: variable name, outcomes, kind, parents and table."""

    name: str
    outcomes: tuple[str, ...]
    kind: str
    parents: tuple[str, ...]
    table: Cpt | DetTable

    @classmethod
    def probabilistic(cls, name, outcomes, parents=(), cpt=()) -> "NodeSpec":
        return cls(name, tuple(outcomes), PROBABILISTIC, tuple(parents), Cpt.of(cpt))

    @classmethod
    def deterministic(cls, name, outcomes, parents=(), function=()) -> "NodeSpec":
        return cls(name, tuple(outcomes), DETERMINISTIC, tuple(parents),
                   DetTable.of(function))

    @property
    def n_outcomes(self) -> int:
        return len(self.outcomes)

    def outcome_index(self, label: str) -> int:
        try:
            return self.outcomes.index(label)
        except ValueError:
            raise KeyError(label) from None

    def free_parameters(self, row_count: int) -> int:
        """Free parameters of the table; deterministic nodes contribute none."""
        if self.kind == DETERMINISTIC:
            return 0
        return row_count * (self.n_outcomes - 1)


@dataclass(eq=False)
class Diagram:
    """Ordered collection of nodes; arcs are implied by parent lists.

    ``notes`` holds provenance annotations appended by transforms (for
    example when an unreachable CPT row had to be filled in). Notes are
    not part of structural equality and are not serialized.
    """

    nodes: dict[str, NodeSpec] = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Diagram):
            return NotImplemented
        # Node order is structural: the map is ordered.
        return list(self.nodes.items()) == list(other.nodes.items())

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.nodes)

    @property
    def arcs(self) -> tuple[tuple[str, str], ...]:
        """Every (parent, child) pair, in node-map then parent-list order."""
        return tuple((p, child.name) for child in self.nodes.values()
                     for p in child.parents)

    def parents(self, name: str) -> tuple[str, ...]:
        return self.nodes[name].parents

    def children_map(self) -> dict[str, list[str]]:
        kids: dict[str, list[str]] = {name: [] for name in self.nodes}
        for child in self.nodes.values():
            for p in child.parents:
                if p in kids:
                    kids[p].append(child.name)
        return kids

    def children(self, name: str) -> list[str]:
        return [c.name for c in self.nodes.values() if name in c.parents]

    def with_note(self, note: str) -> "Diagram":
        return Diagram(self.nodes, self.notes + (note,))


def empty_diagram() -> Diagram:
    return Diagram({})


# -- row indexing ------------------------------------------------------------
#
# Rows enumerate parent configurations with the last parent varying fastest,
# i.e. plain row-major order over the parent arities.

def row_count(arities) -> int:
    n = 1
    for a in arities:
        n *= a
    return n


def row_index(arities, config) -> int:
    r = 0
    for a, i in zip(arities, config):
        r = r * a + i
    return r


def decode_row(arities, r: int) -> tuple[int, ...]:
    out = []
    for a in reversed(arities):
        out.append(r % a)
        r //= a
    return tuple(reversed(out))


def parent_arities(diagram: Diagram, spec: NodeSpec) -> tuple[int, ...]:
    return tuple(diagram.nodes[p].n_outcomes for p in spec.parents)


def table_array(diagram: Diagram, name: str) -> np.ndarray:
    """Node's table as an ndarray of shape (*parent arities, n_outcomes).

    Deterministic tables come back as 0/1 indicator rows, so the array form
    is a CPT either way.
    """
    spec = diagram.nodes[name]
    arities = parent_arities(diagram, spec)
    m = spec.n_outcomes
    if isinstance(spec.table, Cpt):
        arr = np.asarray(spec.table.rows, dtype=float)
    else:
        arr = np.zeros((row_count(arities), m))
        arr[np.arange(arr.shape[0]), list(spec.table.entries)] = 1.0
    return arr.reshape(arities + (m,))


def rows_from_array(arr: np.ndarray) -> tuple[tuple[float, ...], ...]:
    """Flatten (*parent arities, n_outcomes) back to the row-list form."""
    flat = arr.reshape(-1, arr.shape[-1])
    return tuple(tuple(float(p) for p in row) for row in flat)


# -- structure queries --------------------------------------------------------

def has_path(diagram: Diagram, src: str, dst: str,
             skip_arc: tuple[str, str] | None = None) -> bool:
    """True if a directed path src -> ... -> dst exists, optionally ignoring
    one specific arc."""
    kids = diagram.children_map()
    stack = [src]
    seen = set()
    while stack:
        n = stack.pop()
        for c in kids.get(n, ()):
            if skip_arc is not None and (n, c) == skip_arc:
                continue
            if c == dst:
                return True
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return False


def node_depths(diagram: Diagram) -> dict[str, int]:
    """Longest-path depth from the roots; raises CycleDetected on a cycle."""
    depths: dict[str, int] = {}
    pending = dict(diagram.nodes)
    while pending:
        progressed = False
        for name in list(pending):
            spec = pending[name]
            if all(p in depths for p in spec.parents if p in diagram.nodes):
                known = [depths[p] for p in spec.parents if p in diagram.nodes]
                depths[name] = 1 + max(known) if known else 0
                del pending[name]
                progressed = True
        if not progressed:
            raise CycleDetected(
                "cycle through nodes: " + ", ".join(sorted(pending)))
    return depths


def topological_order(diagram: Diagram) -> list[str]:
    """Deterministic topological order: by depth, ties broken by name.

    Every node appears after all of its parents; nodes at equal depth come
    out lexicographically.
    """
    depths = node_depths(diagram)
    return sorted(diagram.nodes, key=lambda n: (depths[n], n))


def reordered(diagram: Diagram) -> Diagram:
    """Same diagram with the node map in canonical topological order."""
    order = topological_order(diagram)
    return Diagram({n: diagram.nodes[n] for n in order}, diagram.notes)


# -- construction --------------------------------------------------------------

def _check_spec_shape(diagram: Diagram, spec: NodeSpec) -> None:
    """Raise if the spec's table cannot belong to this diagram."""
    arities = parent_arities(diagram, spec)
    want_rows = row_count(arities)
    if isinstance(spec.table, Cpt):
        if spec.kind != PROBABILISTIC:
            raise TableShapeMismatch(
                f"node '{spec.name}': kind {spec.kind} with a Cpt table")
        if len(spec.table.rows) != want_rows:
            raise TableShapeMismatch(
                f"node '{spec.name}': {len(spec.table.rows)} rows, "
                f"expected {want_rows}")
        for r, row in enumerate(spec.table.rows):
            if len(row) != spec.n_outcomes:
                raise TableShapeMismatch(
                    f"node '{spec.name}' row {r}: {len(row)} entries, "
                    f"expected {spec.n_outcomes}")
            if any(p < 0.0 or p > 1.0 for p in row):
                raise NormalizationViolation(
                    f"node '{spec.name}' row {r}: entry outside [0, 1]")
            s = sum(row)
            if abs(s - 1.0) > ROW_SUM_TOL:
                raise NormalizationViolation(
                    f"node '{spec.name}' row {r}: sums to {s!r}")
    else:
        if spec.kind != DETERMINISTIC:
            raise TableShapeMismatch(
                f"node '{spec.name}': kind {spec.kind} with a DetTable")
        if len(spec.table.entries) != want_rows:
            raise TableShapeMismatch(
                f"node '{spec.name}': {len(spec.table.entries)} entries, "
                f"expected {want_rows}")
        for r, e in enumerate(spec.table.entries):
            if not 0 <= e < spec.n_outcomes:
                raise OutcomeOutOfRange(
                    f"node '{spec.name}' row {r}: entry {e} not an outcome "
                    f"index (< {spec.n_outcomes})")


def add_node(diagram: Diagram, spec: NodeSpec) -> Diagram:
    """Return a new diagram with ``spec`` appended; the input is unchanged.

    Parents must already exist, so insertion order is always a topological
    order. Raises DuplicateName, UnknownParent, CycleWouldForm,
    TableShapeMismatch, NormalizationViolation, InvalidNodeSpec or
    OutcomeOutOfRange.
    """
    if not NAME_PATTERN.match(spec.name or ""):
        raise InvalidNodeSpec(f"node name {spec.name!r} is not a valid identifier")
    if spec.name in diagram.nodes:
        raise DuplicateName(f"node '{spec.name}' already present")
    if spec.n_outcomes < 2:
        raise InvalidNodeSpec(
            f"node '{spec.name}': needs at least 2 outcomes")
    if len(set(spec.outcomes)) != spec.n_outcomes or any(
            not o for o in spec.outcomes):
        raise InvalidNodeSpec(
            f"node '{spec.name}': outcome labels must be unique and non-empty")
    if len(set(spec.parents)) != len(spec.parents):
        raise InvalidNodeSpec(f"node '{spec.name}': duplicate parents")
    if spec.name in spec.parents:
        raise CycleWouldForm(f"node '{spec.name}' lists itself as a parent")
    for p in spec.parents:
        if p not in diagram.nodes:
            raise UnknownParent(f"node '{spec.name}': unknown parent '{p}'")
    _check_spec_shape(diagram, spec)
    nodes = dict(diagram.nodes)
    nodes[spec.name] = spec
    return Diagram(nodes, diagram.notes)


# -- validation -----------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str
    node: str
    detail: str
    row: int | None = None

    def __str__(self) -> str:
        where = f" row {self.row}" if self.row is not None else ""
        return f"{self.kind}: node '{self.node}'{where}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(str(v) for v in self.violations)


def validate(diagram: Diagram) -> ValidationReport:
    """Check every structural invariant; violations are data, not errors."""
    out: list[Violation] = []

    def bad(kind, node, detail, row=None):
        out.append(Violation(kind, node, detail, row))

    for name, spec in diagram.nodes.items():
        if name != spec.name:
            bad("InvalidName", name, f"keyed as '{name}' but named '{spec.name}'")
        if not NAME_PATTERN.match(spec.name or ""):
            bad("InvalidName", name, f"{spec.name!r} is not a valid identifier")
        if spec.n_outcomes < 2:
            bad("InvalidOutcomes", name, "fewer than 2 outcomes")
        if len(set(spec.outcomes)) != spec.n_outcomes or any(
                not o for o in spec.outcomes):
            bad("InvalidOutcomes", name, "labels must be unique and non-empty")
        if len(set(spec.parents)) != len(spec.parents) or name in spec.parents:
            bad("InvalidParents", name, "parents must be distinct, excluding self")
        missing = [p for p in spec.parents if p not in diagram.nodes]
        for p in missing:
            bad("UnknownParent", name, f"unknown parent '{p}'")
        if missing:
            continue  # table shape is undefined without parent arities

        arities = parent_arities(diagram, spec)
        want_rows = row_count(arities)
        if isinstance(spec.table, Cpt):
            if spec.kind != PROBABILISTIC:
                bad("TableShapeMismatch", name, "Cpt on a non-probabilistic node")
            if len(spec.table.rows) != want_rows:
                bad("TableShapeMismatch", name,
                    f"{len(spec.table.rows)} rows, expected {want_rows}")
                continue
            for r, rowvals in enumerate(spec.table.rows):
                if len(rowvals) != spec.n_outcomes:
                    bad("TableShapeMismatch", name,
                        f"{len(rowvals)} entries, expected {spec.n_outcomes}", r)
                    continue
                if any(p < 0.0 or p > 1.0 for p in rowvals):
                    bad("EntryOutOfRange", name, "probability outside [0, 1]", r)
                s = sum(rowvals)
                if abs(s - 1.0) > ROW_SUM_TOL:
                    bad("NormalizationViolation", name, f"row sums to {s!r}", r)
        else:
            if spec.kind != DETERMINISTIC:
                bad("TableShapeMismatch", name, "DetTable on a non-deterministic node")
            if len(spec.table.entries) != want_rows:
                bad("TableShapeMismatch", name,
                    f"{len(spec.table.entries)} entries, expected {want_rows}")
                continue
            for r, e in enumerate(spec.table.entries):
                if not 0 <= e < spec.n_outcomes:
                    bad("OutcomeOutOfRange", name,
                        f"entry {e} not an outcome index (< {spec.n_outcomes})", r)

    try:
        node_depths(diagram)
    except CycleDetected as err:
        out.append(Violation("CycleDetected", "-", str(err)))

    return ValidationReport(tuple(out))
