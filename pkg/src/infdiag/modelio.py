"""Model persistence, DOT rendering, built-in examples, random generation.

The file format is strict JSON, one schema, version 1:

    {"version": 1,
     "nodes": [{"name": ..., "outcomes": [...],
                "kind": "probabilistic" | "deterministic",
                "parents": [...],
                "cpt": [[...], ...]      # probabilistic nodes
                "function": [...]         # deterministic nodes
               }, ...]}

Rows follow the package-wide convention (last declared parent varies
fastest). Unknown fields are rejected. Numbers are written with Python's
shortest round-trip float representation, so save -> load reproduces every
table bit for bit.

The built-in examples are small canonical structures (single cause with
two effects, two causes with a common effect, a two-disorder medical
model, ...). Their probability values are fixed constants chosen for the
artifact: they avoid zero rows and make the medical model exhibit
explaining-away. The modular-system example uses three subsystems.
"""

from __future__ import annotations

import json
import random

from .diagram import (
    DETERMINISTIC,
    Diagram,
    NodeSpec,
    add_node,
    empty_diagram,
    row_count,
    validate,
)
from .errors import (
    CycleDetected,
    InvalidNodeSpec,
    InvalidParameters,
    NormalizationViolation,
    OutcomeOutOfRange,
    ParseError,
    SchemaError,
    TableShapeMismatch,
    UnknownExample,
    UnknownParent,
)

FORMAT_VERSION = 1

_NODE_REQUIRED = {"name", "outcomes", "kind", "parents"}


def save(diagram: Diagram) -> str:
    """Serialize to the JSON model format (notes are not persisted)."""
    nodes = []
    for spec in diagram.nodes.values():
        entry: dict = {
            "name": spec.name,
            "outcomes": list(spec.outcomes),
            "kind": spec.kind,
            "parents": list(spec.parents),
        }
        if spec.kind == DETERMINISTIC:
            entry["function"] = list(spec.table.entries)
        else:
            entry["cpt"] = [list(row) for row in spec.table.rows]
        nodes.append(entry)
    return json.dumps({"version": FORMAT_VERSION, "nodes": nodes}, indent=2) + "\n"


def _expect(cond: bool, msg: str) -> None:
    if not cond:
        raise SchemaError(msg)


def parse_document(text: str) -> Diagram:
    """Parse the JSON document into a diagram without semantic validation.

    The result may violate diagram invariants (that is what ``validate``
    reports on); only the JSON structure and field types are enforced here.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(
            f"invalid JSON at line {err.lineno}, column {err.colno}: "
            f"{err.msg}") from None

    _expect(isinstance(doc, dict), "top level must be an object")
    unknown = set(doc) - {"version", "nodes"}
    _expect(not unknown, f"unknown top-level fields: {sorted(unknown)}")
    _expect("version" in doc, "missing field 'version'")
    _expect(doc["version"] == FORMAT_VERSION,
            f"unsupported version {doc['version']!r}")
    _expect(isinstance(doc.get("nodes"), list), "'nodes' must be a list")

    nodes: dict[str, NodeSpec] = {}
    for i, raw in enumerate(doc["nodes"]):
        where = f"nodes[{i}]"
        _expect(isinstance(raw, dict), f"{where} must be an object")
        missing = _NODE_REQUIRED - set(raw)
        _expect(not missing, f"{where}: missing fields {sorted(missing)}")
        extra = set(raw) - _NODE_REQUIRED - {"cpt", "function"}
        _expect(not extra, f"{where}: unknown fields {sorted(extra)}")

        name = raw["name"]
        _expect(isinstance(name, str), f"{where}: 'name' must be a string")
        _expect(name not in nodes, f"{where}: duplicate node name '{name}'")
        outcomes = raw["outcomes"]
        _expect(isinstance(outcomes, list)
                and all(isinstance(o, str) for o in outcomes),
                f"{where}: 'outcomes' must be a list of strings")
        kind = raw["kind"]
        _expect(kind in ("probabilistic", "deterministic"),
                f"{where}: 'kind' must be probabilistic or deterministic")
        parents = raw["parents"]
        _expect(isinstance(parents, list)
                and all(isinstance(p, str) for p in parents),
                f"{where}: 'parents' must be a list of strings")

        if kind == "deterministic":
            _expect("function" in raw, f"{where}: missing field 'function'")
            _expect("cpt" not in raw,
                    f"{where}: deterministic node must not carry 'cpt'")
            fn = raw["function"]
            _expect(isinstance(fn, list)
                    and all(isinstance(e, int) and not isinstance(e, bool)
                            for e in fn),
                    f"{where}: 'function' must be a list of integers")
            nodes[name] = NodeSpec.deterministic(name, outcomes, parents, fn)
        else:
            _expect("cpt" in raw, f"{where}: missing field 'cpt'")
            _expect("function" not in raw,
                    f"{where}: probabilistic node must not carry 'function'")
            cpt = raw["cpt"]
            _expect(isinstance(cpt, list) and all(
                isinstance(row, list)
                and all(isinstance(p, (int, float)) and not isinstance(p, bool)
                        for p in row)
                for row in cpt),
                f"{where}: 'cpt' must be a list of numeric rows")
            nodes[name] = NodeSpec.probabilistic(name, outcomes, parents, cpt)

    return Diagram(nodes)


# Which exception class a validation violation surfaces as from load().
_VIOLATION_ERRORS = {
    "InvalidName": InvalidNodeSpec,
    "InvalidOutcomes": InvalidNodeSpec,
    "InvalidParents": InvalidNodeSpec,
    "UnknownParent": UnknownParent,
    "TableShapeMismatch": TableShapeMismatch,
    "EntryOutOfRange": NormalizationViolation,
    "NormalizationViolation": NormalizationViolation,
    "OutcomeOutOfRange": OutcomeOutOfRange,
    "CycleDetected": CycleDetected,
}


def load(text: str) -> Diagram:
    """Parse and validate a model document.

    Raises ParseError or SchemaError for malformed documents; semantic
    problems raise the same error type add_node would have used (the first
    violation of the full report decides the class).
    """
    diagram = parse_document(text)
    report = validate(diagram)
    if not report.ok:
        first = report.violations[0]
        more = ("" if len(report.violations) == 1
                else f" (+{len(report.violations) - 1} more violations)")
        raise _VIOLATION_ERRORS[first.kind](f"{first}{more}")
    return diagram


# -- DOT ------------------------------------------------------------------------

def export_dot(diagram: Diagram) -> str:
    """Render as a Graphviz digraph: single ovals for probabilistic nodes,
    double ovals (peripheries=2) for deterministic ones."""
    lines = ["digraph influence_diagram {"]
    for spec in diagram.nodes.values():
        if spec.kind == DETERMINISTIC:
            lines.append(f'  "{spec.name}" [shape=ellipse, peripheries=2];')
        else:
            lines.append(f'  "{spec.name}" [shape=ellipse];')
    for spec in diagram.nodes.values():
        for p in spec.parents:
            lines.append(f'  "{p}" -> "{spec.name}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- built-in examples ------------------------------------------------------------

def _build(specs) -> Diagram:
    d = empty_diagram()
    for spec in specs:
        d = add_node(d, spec)
    return d


def _fig5() -> Diagram:
    # A probabilistic error source driving a deterministic program output:
    # both garbling errors produce the same output, so the function is
    # non-injective and diagnosis stays uncertain.
    return _build([
        NodeSpec.probabilistic(
            "program_error", ("none", "off_by_one", "bad_loop"),
            cpt=[[0.9, 0.06, 0.04]]),
        NodeSpec.deterministic(
            "output", ("correct", "garbled"), ("program_error",),
            function=[0, 1, 1]),
    ])


def _fig6() -> Diagram:
    # Three independent subsystems feeding one deterministic output
    # (correct only when every subsystem is ok).
    return _build([
        NodeSpec.probabilistic("subsystem_a", ("ok", "faulty"),
                               cpt=[[0.95, 0.05]]),
        NodeSpec.probabilistic("subsystem_b", ("ok", "faulty"),
                               cpt=[[0.9, 0.1]]),
        NodeSpec.probabilistic("subsystem_c", ("ok", "faulty"),
                               cpt=[[0.85, 0.15]]),
        NodeSpec.deterministic(
            "output", ("correct", "faulty"),
            ("subsystem_a", "subsystem_b", "subsystem_c"),
            function=[0, 1, 1, 1, 1, 1, 1, 1]),
    ])


def _fig7() -> Diagram:
    # One cause, two conditionally independent effects (a fork).
    return _build([
        NodeSpec.probabilistic("cause", ("absent", "present"),
                               cpt=[[0.8, 0.2]]),
        NodeSpec.probabilistic("effect_a", ("absent", "present"), ("cause",),
                               cpt=[[0.9, 0.1], [0.25, 0.75]]),
        NodeSpec.probabilistic("effect_b", ("absent", "present"), ("cause",),
                               cpt=[[0.85, 0.15], [0.3, 0.7]]),
    ])


def _fig8() -> Diagram:
    # Two independent causes, one common effect (a collider).
    return _build([
        NodeSpec.probabilistic("cause_a", ("absent", "present"),
                               cpt=[[0.9, 0.1]]),
        NodeSpec.probabilistic("cause_b", ("absent", "present"),
                               cpt=[[0.9, 0.1]]),
        NodeSpec.probabilistic(
            "effect", ("absent", "present"), ("cause_a", "cause_b"),
            cpt=[[0.95, 0.05], [0.2, 0.8], [0.2, 0.8], [0.05, 0.95]]),
    ])


def _fig9() -> Diagram:
    # Two independently arising disorders with overlapping findings:
    # heart failure enlarges the heart (seen on x-ray) and causes pitting
    # edema; nephrotic syndrome causes pitting edema and urine protein
    # (seen as frothy urine).
    return _build([
        NodeSpec.probabilistic("heart_failure", ("absent", "present"),
                               cpt=[[0.9, 0.1]]),
        NodeSpec.probabilistic("nephrotic_syndrome", ("absent", "present"),
                               cpt=[[0.95, 0.05]]),
        NodeSpec.probabilistic("cardiomegaly", ("absent", "present"),
                               ("heart_failure",),
                               cpt=[[0.9, 0.1], [0.15, 0.85]]),
        NodeSpec.probabilistic(
            "pitting_edema", ("absent", "present"),
            ("heart_failure", "nephrotic_syndrome"),
            cpt=[[0.92, 0.08], [0.25, 0.75], [0.3, 0.7], [0.05, 0.95]]),
        NodeSpec.probabilistic("urine_protein", ("absent", "present"),
                               ("nephrotic_syndrome",),
                               cpt=[[0.85, 0.15], [0.1, 0.9]]),
        NodeSpec.probabilistic("xray", ("normal", "abnormal"),
                               ("cardiomegaly",),
                               cpt=[[0.93, 0.07], [0.1, 0.9]]),
        NodeSpec.probabilistic("frothy_urine", ("no", "yes"),
                               ("urine_protein",),
                               cpt=[[0.88, 0.12], [0.15, 0.85]]),
    ])


# The symptom likelihood is shared between the two variants; only the
# population-specific disorder prior differs.
_SHARED_LIKELIHOOD = [[0.9, 0.1], [0.2, 0.8]]


def _fig10(prior) -> Diagram:
    return _build([
        NodeSpec.probabilistic("disorder", ("absent", "present"), cpt=[prior]),
        NodeSpec.probabilistic("symptom", ("absent", "present"), ("disorder",),
                               cpt=_SHARED_LIKELIHOOD),
    ])


_BUILTINS = {
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
    "fig8": _fig8,
    "fig9": _fig9,
    "fig10a": lambda: _fig10([0.8, 0.2]),
    "fig10b": lambda: _fig10([0.97, 0.03]),
}


def builtin_example(name: str) -> Diagram:
    """One of the built-in example diagrams; see the module docstring."""
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise UnknownExample(
            f"unknown example '{name}' (have: {', '.join(sorted(_BUILTINS))})"
        ) from None
    return factory()


def builtin_names() -> tuple[str, ...]:
    return tuple(sorted(_BUILTINS))


# -- random models ------------------------------------------------------------------

def gen_random(node_count: int, max_outcomes: int, arc_density: float,
               det_fraction: float, seed: int) -> Diagram:
    """Seeded random diagram for property tests; identical inputs give an
    identical diagram.

    Nodes are named v0..vN in generation order and arcs only ever point
    from earlier to later nodes. Roots are always probabilistic (a
    deterministic root is a constant); CPT entries are bounded away from
    zero so random queries rarely hit zero-probability evidence.
    """
    if node_count < 1:
        raise InvalidParameters("node_count must be >= 1")
    if max_outcomes < 2:
        raise InvalidParameters("max_outcomes must be >= 2")
    if not 0.0 <= arc_density <= 1.0:
        raise InvalidParameters("arc_density must be in [0, 1]")
    if not 0.0 <= det_fraction <= 1.0:
        raise InvalidParameters("det_fraction must be in [0, 1]")

    rng = random.Random(seed)
    diagram = empty_diagram()
    sizes: list[int] = []
    for i in range(node_count):
        name = f"v{i}"
        k = rng.randint(2, max_outcomes)
        parents = [f"v{j}" for j in range(i) if rng.random() < arc_density]
        rows = row_count(sizes[int(p[1:])] for p in parents)
        if parents and rng.random() < det_fraction:
            spec = NodeSpec.deterministic(
                name, _labels(k), parents,
                function=[rng.randrange(k) for _ in range(rows)])
        else:
            cpt = []
            for _ in range(rows):
                weights = [rng.uniform(0.05, 1.0) for _ in range(k)]
                total = sum(weights)
                cpt.append([w / total for w in weights])
            spec = NodeSpec.probabilistic(name, _labels(k), parents, cpt)
        diagram = add_node(diagram, spec)
        sizes.append(k)
    return diagram


def _labels(k: int) -> tuple[str, ...]:
    return tuple(f"o{i}" for i in range(k))
