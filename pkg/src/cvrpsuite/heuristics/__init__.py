from .gls import SearchState, guided_local_search, write_improvement_log
from .local_search import local_search, two_opt_move
from .savings import Saving, clarke_wright, compute_savings

__all__ = [
    "Saving", "SearchState", "clarke_wright", "compute_savings",
    "guided_local_search", "local_search", "two_opt_move", "write_improvement_log",
]
