from .errors import (
    CertificationError,
    CongestionError,
    ConfigurationError,
    ForestError,
    GenerationError,
    InstanceParseError,
    InvalidInputError,
    InvariantError,
    SizeError,
    SpecError,
    TopologyError,
)
from .graph import (
    Partition,
    SsspForest,
    WeightedGraph,
    connected_components,
    minimum_spanning_forest,
    scale_zero_weights,
    sssp_forest,
)
from .problems import (
    Fpc,
    Ppc,
    SfCic,
    SfCr,
    SfIc,
    SfScr,
    augment_fpc,
    check_proper,
    evaluate_components,
    f_subset,
    make_cic,
    make_requests,
    terminals,
)
from .engine import RunReport, ratio_constant, phase_bound, run_gw_reference, run_shell_decomposition
from .oracle import Certificate, brute_force_opt, certify_run, check_primal_feasible
from .instances import InstanceFile, gen_lower_bound, gen_random
from .congest.network import SimNetwork
from .congest.runner import run_distributed_cfp

__version__ = "0.1.0"
