"""Universal globalizations of confluent partial monoid actions on finite
(pseudo)metric and topological spaces, computed by string rewriting."""

from .common import INF, PreconditionError, ValidationReport
from .fintop import (
    FiniteTopology,
    check_embedding,
    check_T1,
    globalization_topology,
    is_closed_map_into_Y,
    is_continuous_action,
    is_open_map_into_Y,
    is_strongly_closed,
    is_strongly_open,
    validate_topology,
)
from .glob import (
    QuotientGlobalization,
    Truncation,
    act_on_element,
    embed,
    enumerate_truncation,
    finite_monoid_globalization,
    is_equivalent,
)
from .manifest import load_fixture, load_manifest
from .metglob import (
    BruteForceOracle,
    GeodesicWitness,
    WeakPseudometric,
    check_local_isometry,
    check_nonexpansive,
    check_separated,
    distance,
    distance_bruteforce,
    distance_group_formula,
    distance_matrix,
    geodesic,
    glue,
    homogenize_step,
    validate_pseudometric,
)
from .paction import (
    Config,
    FiniteMonoid,
    Morphism,
    MonoidPartialAction,
    NormalElement,
    PartialAction,
    Space,
    act,
    apply_gen,
    check_action_confluence,
    config_reducts,
    dom_of,
    from_category,
    is_closed_action,
    is_nowhere_degenerate,
    is_open_action,
    normalize_config,
    r_set,
    singleton_homogeneous_action,
    triple_condition_check,
)
from .words import (
    ConfluenceReport,
    Presentation,
    check_word_confluence,
    critical_pairs,
    is_prefix,
    imprefix,
    meet,
    multiply_normal,
    normalize_word,
    one_step_reducts,
    validate_presentation,
)
