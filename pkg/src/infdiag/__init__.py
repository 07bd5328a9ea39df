"""Influence-diagram engine.

Author a discrete probabilistic model in its natural causal direction,
then mechanically turn it around: reverse arcs (Bayes' theorem on the
graph), sum out helper variables, condition on evidence, and measure how
much structure the turnaround costs. A brute-force joint-enumeration
oracle backs every transform.
"""

from .diagram import (
    Cpt,
    DETERMINISTIC,
    DetTable,
    Diagram,
    NodeSpec,
    PROBABILISTIC,
    ValidationReport,
    Violation,
    add_node,
    empty_diagram,
    topological_order,
    validate,
)
from .errors import EngineError
from .inference import (
    Metrics,
    Plan,
    compare_orders,
    complexity,
    d_separated,
    plan_reversals,
    posterior,
)
from .modelio import builtin_example, export_dot, gen_random, load, save
from .oracle import JointTable, joint_table, oracle_posterior
from .transform import (
    TransformStep,
    condition,
    promote_deterministic,
    prune_constant_parents,
    refactor,
    remove_barren,
    reverse_arc,
    sum_out,
)

__all__ = [
    "Cpt",
    "DETERMINISTIC",
    "DetTable",
    "Diagram",
    "EngineError",
    "JointTable",
    "Metrics",
    "NodeSpec",
    "PROBABILISTIC",
    "Plan",
    "TransformStep",
    "ValidationReport",
    "Violation",
    "add_node",
    "builtin_example",
    "compare_orders",
    "complexity",
    "condition",
    "d_separated",
    "empty_diagram",
    "export_dot",
    "gen_random",
    "joint_table",
    "load",
    "oracle_posterior",
    "plan_reversals",
    "posterior",
    "promote_deterministic",
    "prune_constant_parents",
    "refactor",
    "remove_barren",
    "reverse_arc",
    "save",
    "sum_out",
    "topological_order",
    "validate",
]

__version__ = "0.1.0"
