"""bellforge: post-selected linear-optical entanglement, simulated and certified.

Compile optical circuits to mode transforms, derive the Gaussian states
they emit, condition on photon detections exactly, quantify Bell fidelity,
and emit machine-checkable certificates of the two-detection no-go.
"""

from .bargmann import (
    BargmannPolynomial,
    ConditionalState,
    DetectionPattern,
    FourPhotonTerm,
    amplitude_grid,
    apply_passive,
    coherent_conditional,
    four_photon_terms,
    postselect,
    success_probability,
)
from .certificates import (
    RANK2_FIDELITY_BOUND,
    NoGoCertificate,
    bell_quadratic_form,
    certify_two_photon_nogo,
    coherent_only_negative,
    derive_rank2_fidelity_bound,
    extract_quadratic_form,
    rank2_fidelity_bound,
)
from .circuit import (
    BogoliubovTransform,
    CircuitSpec,
    Element,
    GaussianBargmann,
    beam_splitter,
    cascade_expand,
    compile_circuit,
    gaussian_state,
    pdc_example,
    phase_shifter,
    single_mode_squeezer,
    two_mode_squeezer,
)
from .crosscheck import oracle_diff
from .entanglement import (
    BellTarget,
    EntanglementReport,
    bell_fidelity,
    bipartite_entropy_grid,
    local_passive_block,
    report_from_grid,
    vn_entropy,
)
from .fock import FockTensor, evolve_truncated, project
from .linalg import (
    BlochMessiah,
    TakagiFactorization,
    bloch_messiah,
    compose_bloch_messiah,
    takagi_decompose,
)
from .search import SearchConfig, SearchResult, optimize, rate_estimate

__version__ = "0.1.0"
