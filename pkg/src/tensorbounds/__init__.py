"""Certified entropy bounds for tight tensors and exponent bounds for graph tensors."""
__version__ = "0.1.0"

from .engine import BoundCertificate, BoundConfig, main_lower_bound, strassen_bound, wstate_closed_form
from .entropy import binary_entropy, entropy, marginals, max_entropy_coupling, max_entropy_on_support
from .exponents import check_cw_border_certificate, complete_graph_table, cw_tau_bound
from .relations import EquivRelation, closure, enumerate_relations
from .tensors import (
    Graph,
    SparseTensor,
    cw_tensor,
    dicke_tensor,
    graph_tensor,
    unit_tensor,
    w_tensor,
)
from .tightness import LabelingSpace, TightLabeling, check_tight, find_labeling, relation_rank
