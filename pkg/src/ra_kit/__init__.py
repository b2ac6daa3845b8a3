"""Finite relation algebras: composition tables, networks, representations,
amalgamation, and finite bound sets."""

from .algebra import (
    Element,
    RelationAlgebra,
    ValidationReport,
    Violation,
    format_algebra,
    parse_algebra,
    validate_algebra,
)
from .amalgamation import (
    AmalgamationDiagram,
    APResult,
    ExtensionFailedError,
    amalgamate,
    decide_amalgamation_property,
    enumerate_atomic_networks,
    explain_failure,
    extend_network,
    grow_limit,
    merge_diagram,
    one_point_extensions,
)
from .bounds import (
    Bound,
    BoundSet,
    check_membership,
    embeds,
    format_bounds,
    generate_bounds,
)
from .network import (
    LabeledStructure,
    Network,
    canonical_labels,
    format_network,
    format_structure,
    is_atomic,
    net_to_struct,
    normalize,
    parse_network,
    path_consistency,
    refine_solve,
    struct_to_net,
)
from .parsing import ParseError
from .representation import (
    ConcreteRepresentation,
    derive_algebra,
    format_representation,
    model_check,
    parse_representation,
    validate_representation,
)

__version__ = "0.1.0"

__all__ = [
    "APResult",
    "AmalgamationDiagram",
    "Bound",
    "BoundSet",
    "ConcreteRepresentation",
    "Element",
    "ExtensionFailedError",
    "LabeledStructure",
    "Network",
    "ParseError",
    "RelationAlgebra",
    "ValidationReport",
    "Violation",
    "amalgamate",
    "canonical_labels",
    "check_membership",
    "decide_amalgamation_property",
    "derive_algebra",
    "embeds",
    "enumerate_atomic_networks",
    "explain_failure",
    "extend_network",
    "format_algebra",
    "format_bounds",
    "format_network",
    "format_representation",
    "format_structure",
    "generate_bounds",
    "grow_limit",
    "is_atomic",
    "merge_diagram",
    "model_check",
    "net_to_struct",
    "normalize",
    "one_point_extensions",
    "parse_algebra",
    "parse_network",
    "parse_representation",
    "path_consistency",
    "refine_solve",
    "struct_to_net",
    "validate_algebra",
    "validate_representation",
    "__version__",
]
