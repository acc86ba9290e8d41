"""Coverage of a graph by a team of robots that moves in formation.

The main entry points:

- ``Instance``, ``Configuration``, ``Traversal`` and ``validate_traversal`` in
  :mod:`mrfgc.model`
- ``solve_exact_bfs`` (exact search), ``solve_fpt`` (tree-decomposition
  dynamic program) and ``solve_ptas`` (approximation on trees)
- ``read_instance`` / ``write_instance`` and friends in :mod:`mrfgc.io`
"""

from .errors import (
    BudgetExceeded,
    ConfigurationError,
    GraphError,
    InfeasibleInstance,
    MRFGCError,
    NonCollapsibleError,
    ParseError,
    PreconditionError,
    SemanticError,
)
from .formations import (
    ConfigSpace,
    ExplicitBackend,
    Formation,
    FormationLibrary,
    ImplicitConnectedBackend,
    Transposition,
)
from .fpt import FPTSolver, run_fpt, solve_fpt
from .io import (
    instance_ref,
    library_ref,
    parse_instance,
    parse_library,
    parse_traversal,
    read_instance,
    read_traversal,
    serialize_instance,
    serialize_library,
    serialize_traversal,
    write_instance,
    write_traversal,
)
from .library import collapsible_closure, generate_connectivity_library, is_collapsible
from .model import (
    Configuration,
    Graph,
    Instance,
    RobotTypes,
    RootedTree,
    Traversal,
    ValidationReport,
    validate_traversal,
)
from .oracle import solve_exact_bfs
from .ptas import greedy_traverse, solve_ptas, tree_cover, validate_tree_cover
from .treedecomp import NiceTreeDecomposition, decompose, make_nice, validate_decomposition

__version__ = "0.1.0"
