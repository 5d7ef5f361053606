"""Random graphs on the sphere, spectral synchronization certificates and Kuramoto gradient flows."""
from .concentration import (
    ConcentrationSample, EpsilonParams, adjacency_concentration, degree_concentration,
    epsilon_of, sample_coupled_er, sandwich_quadratic_check,
)
from .dynamics import (
    FlowResult, PhaseState, classify_equilibrium, energy, grad, integrate, order_parameter,
    random_phases,
)
from .errors import (
    ConvergenceFailure, IndexOutOfRange, IntegrationFailure, InvalidArgument, ParseError,
    PreconditionError,
)
from .graphs import (
    Graph, GraphProvenance, is_connected, laplacian_quadratic, load_graph, sample_er,
    sample_rgg, save_graph, subgraph_of,
)
from .spectral import (
    CertificateReport, certificate_margin, check_certificate, delta_a_matvec, delta_l_matvec,
    spectral_norm,
)
from .sphere import PointCloud, Threshold, inner_product_cdf, sample_sphere_points, threshold

__version__ = "0.1.0"
