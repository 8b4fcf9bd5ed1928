"""S-machine toolkit: group-alphabet rewriting machines, transforms,
presentations, and combinatorial invariants."""

__version__ = "0.1.0"

from .engine import (  # noqa: F401
    AdmissibleWord,
    Computation,
    Hardware,
    NotAdmissible,
    NotApplicable,
    Rule,
    RunFailed,
    SMachine,
    apply_rule,
    applicable,
    make_rule,
    parse_admissible,
    run,
    search_computations,
)
from .words import Alphabet, Letter, WordError, invert, reduce_word, copy_word  # noqa: F401
