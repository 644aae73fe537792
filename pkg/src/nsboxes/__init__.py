"""Exact algebra for n-party non-signaling boxes.

Everything numerical in the core is an exact rational (fractions.Fraction):
box tables, noise parameters, distillation traces, and the local-polytope
distance LP, which ships with a compiled pivot kernel and a pure-Python
fallback selected at import.
"""

from .anf import (
    BooleanFunctionANF,
    MonomialStructure,
    anf_from_truth_table,
    monomial_structure,
    strip_local_part,
)
from .boxes import (
    ConditionalBox,
    NoiseFamilyMember,
    box_equal,
    decompose_epsilon,
    is_nonsignaling,
    l1_box_distance,
    make_even_parity,
    make_full_correlation,
    make_npr,
    mix,
    subset_outputs_uniform,
)
from .comm import (
    CommunicationPlan,
    SurveyReport,
    channels_distill_bound,
    channels_scratch,
    corollary_holds,
    make_isolation_plan,
    partial_comm_distill,
    survey_three_party,
)
from .distill import (
    DistillationTrace,
    RelationsReport,
    StabilityReport,
    bs_round,
    distill_to,
    stability_report,
    t_derivative,
    t_map,
    verify_relations,
)
from .localdist import (
    CertificateError,
    DistanceCertificate,
    LocalVertex,
    enumerate_vertices,
    l1_distance_to_local,
    nearest_affine_oracle,
)
from .reproduce import ReproductionReport, run_reproduction
from .specdoc import (
    SpecDocumentError,
    box_to_document,
    load_box_document,
    parse_box_document,
)
from .wiring import (
    WiringProtocol,
    bs_wiring,
    build_from_prs,
    collapse_parties,
    compose_adaptive,
    embed_parties,
    lemma3_compose,
    sample,
    sample_many,
    xor_local_part,
    xor_merge,
)

__version__ = "0.1.0"
