"""Tsallis-q entanglement, ccq flagged states and numerical checks of
polygamy and monogamy inequalities."""

__version__ = "0.1.0"

from .states import (  # noqa: E402
    DensityMatrix,
    PureState,
    bell_state,
    ghz_state,
    haar_random_pure,
    partial_trace,
    random_density,
    w_state,
)
from .entropy import (  # noqa: E402
    holevo_chi,
    renyi_entropy,
    tsallis_mutual,
    tsallis_q_difference,
    tsallis_quantum,
    von_neumann,
)
from .ccq import build_ccq, closed_form_Iq, direct_Iq, verify_closed_forms  # noqa: E402
from .roof import (  # noqa: E402
    OptimizerBudget,
    concave_roof,
    convex_roof,
    unlocalizable_q_entanglement,
)
from .inequalities import (  # noqa: E402
    ScanConfig,
    Verdict,
    monogamy_check_multiqubit,
    polygamy_check_nparty,
    scan,
    subadditivity_gap,
    theorem1_check,
    ue_bound_chain,
    xi_bounds,
)

__all__ = [
    "__version__",
    "# noqa: E402",
    "DensityMatrix",
    "PureState",
    "bell_state",
    "ghz_state",
    "haar_random_pure",
    "partial_trace",
    "random_density",
    "w_state",
    "# noqa: E402",
    "holevo_chi",
    "renyi_entropy",
    "tsallis_mutual",
    "tsallis_q_difference",
    "tsallis_quantum",
    "von_neumann",
    "# noqa: E402",
    "OptimizerBudget",
    "concave_roof",
    "convex_roof",
    "unlocalizable_q_entanglement",
    "# noqa: E402",
    "ScanConfig",
    "Verdict",
    "monogamy_check_multiqubit",
    "polygamy_check_nparty",
    "scan",
    "subadditivity_gap",
    "theorem1_check",
    "ue_bound_chain",
    "xi_bounds",
    "build_ccq",
    "closed_form_Iq",
    "direct_Iq",
    "verify_closed_forms",
]
