from .config import MiningConfig
from .model import (
    AndOrGraph,
    LatentPattern,
    ParseGraph,
    PartTemplate,
    PatternParse,
    load_graph,
    mirror_graph,
    save_graph,
)
from .parsing import (
    parse,
    parse_many,
    parse_pattern,
    parse_template,
    score_unit,
    spatial_compat,
    window_cells,
)
from .mining import grow_aog, mine_template, refine_template

__all__ = [
    "AndOrGraph",
    "LatentPattern",
    "MiningConfig",
    "ParseGraph",
    "PartTemplate",
    "PatternParse",
    "grow_aog",
    "load_graph",
    "mine_template",
    "mirror_graph",
    "parse",
    "parse_many",
    "parse_pattern",
    "parse_template",
    "refine_template",
    "save_graph",
    "score_unit",
    "spatial_compat",
    "window_cells",
]
