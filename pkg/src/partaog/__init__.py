"""Part localization with a four-layer And-Or graph over conv feature volumes.

The graph decomposes a semantic part (OR) into part templates (AND), each
template into latent patterns (OR), and each pattern into the CNN units of
its deformation window. Templates are mined from a handful of annotations
gathered through an active question-answering loop that ranks candidate
questions by their predicted KL-divergence reduction.
"""

__version__ = "0.1.0"

from .annotations import (
    GroundTruth,
    PartAnnotation,
    read_annotations,
    read_ground_truth,
    write_annotations,
    write_ground_truth,
)
from .aog.config import MiningConfig
from .aog.mining import grow_aog, mine_template, refine_template
from .aog.model import (
    AndOrGraph,
    LatentPattern,
    ParseGraph,
    PartTemplate,
    load_graph,
    mirror_graph,
    save_graph,
)
from .aog.parsing import (
    parse,
    parse_many,
    parse_pattern,
    parse_template,
    score_unit,
    spatial_compat,
)
from .comparison import (
    BenchmarkConfig,
    ComparisonResult,
    EfficiencyCurve,
    compare_policies,
    standard_benchmark,
)
from .errors import PartAogError
from .evaluation import (
    LocalizationReport,
    evaluate,
    normalized_distance,
    pcp_hit,
    write_report_csv,
    write_report_json,
)
from .features.io import (
    DatasetManifest,
    ManifestEntry,
    VolumeStore,
    load_manifest,
    load_volume,
    save_manifest,
    save_volume,
)
from .features.stats import ChannelStats, channel_stats
from .features.synth import (
    BumpSpec,
    SynthConfig,
    TemplateLayout,
    generate_dataset,
    synth_generate,
)
from .features.volume import FeatureVolume, SliceMeta, mirror_volume, unit_to_image
from .geometry import Box
from .qa import (
    Answer,
    QaConfig,
    QaSession,
    Question,
    RunTrace,
    SessionStore,
    SimulatedOracle,
    kl_loss,
    load_session,
    random_selector,
    run_loop,
    save_session,
    write_trace,
)
