"""Co-clustering of directed and bipartite networks under the two-way node popularity model."""
from .baselines import cossc, insc, svdk
from .dom import FitConfig, FitResult, col_deltas, fit_dom, row_deltas, total_loss
from .generator import GeneratorConfig, SyntheticNetwork, generate
from .initialization import KMeansConfig, kmeans, svd_kmeans_init
from .io import MatrixFormatError, parse_matrix, read_labels, write_labels, write_matrix
from .linalg import ConvergenceError, rank_one_residual, top_singular_triplet, truncated_svd
from .metrics import chi2_independence, confusion_table, min_perm_error, nmi
from .model import Assignment, EmptyClusterError, TnpmParams, probability_matrix, rearrange
from .selection import PenaltyConfig, select_kl
from .tsdc import block_cos, fit_tsdc

__all__ = [
    "Assignment", "ConvergenceError", "EmptyClusterError", "FitConfig", "FitResult",
    "GeneratorConfig", "KMeansConfig", "MatrixFormatError", "PenaltyConfig",
    "SyntheticNetwork", "TnpmParams", "block_cos", "chi2_independence", "col_deltas",
    "confusion_table", "cossc", "fit_dom", "fit_tsdc", "generate", "insc", "kmeans",
    "min_perm_error", "nmi", "parse_matrix", "probability_matrix", "rank_one_residual",
    "read_labels", "rearrange", "row_deltas", "select_kl", "svd_kmeans_init", "svdk",
    "top_singular_triplet", "total_loss", "truncated_svd", "write_labels", "write_matrix",
]
