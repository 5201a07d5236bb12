from .types import (
    Spv, Codebook, CodebookSet, DiscretePreference, PartitionAssignment,
    SoftAssignment, ItemSpec, DesignResult, validate_simplex_rows,
)
from .information import (
    entropy, entropies, kl_divergence, kl_matrix, code_cost, best_codebook,
    assign, expected_cost, clustering_objective, kraft_check,
)
