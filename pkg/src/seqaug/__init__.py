"""Sequence-based generative augmentation for fine-grained classification.

Each real training image is expanded into M synthetic sequences of K frames
by a pluggable generation provider.  A balancing sampler mixes real and
synthetic samples per epoch slot, training runs in one or two stages
(bridging then classification), and results aggregate into the improvement
tables and alpha/M curves used to compare methods.
"""

from .augment import ingest_precomputed, populate_store
from .config import ExperimentConfig, load_experiment_config
from .errors import (
    ConfigError,
    IngestError,
    ManifestError,
    ProviderError,
    ResultsError,
    SeqaugError,
    SplitError,
    StoreError,
    TrainingDiverged,
)
from .manifest import DatasetManifest, ImageRecord, load_manifest, save_manifest
from .models import BACKBONES, ModelHandle, build_model, load_checkpoint, save_checkpoint
from .providers import (
    GeneratedSequence,
    GenerationProvider,
    ToyTrajectoryProvider,
    TrajectoryConfig,
    available_providers,
    generate_sequence,
    make_provider,
    register_provider,
)
from .reporting import CurveData, CurvePoint, CurveSeries, curve, emit_report, peak, write_curve_svg
from .results import (
    ResultsTable,
    RunRecord,
    SummaryRow,
    aggregate_improvements,
    append_run,
    completed_keys,
    improvement,
    load_runs,
    mean_accuracy,
    pair_with_baselines,
)
from .sampler import (
    BalancingConfig,
    EpochPlan,
    SampleRef,
    draw_slots,
    empirical_alpha,
    load_plan,
    plan_epoch,
    plan_uniformity_chisq,
    sample_slot,
    save_plan,
    uniformity_chisq,
)
from .schedule import CosineRestarts
from .seeding import SplitMix64, mix, sequence_seed, splitmix64
from .splits import SplitSpec, load_split, make_few_shot_split, make_full_split, save_split
from .store import SequenceStore, StoreMeta, StoreReport, validate_store
from .training import (
    DataContext,
    EpochMetrics,
    StageResult,
    TrainConfig,
    build_test_set,
    evaluate,
    load_stage_result,
    run_btl,
    run_two_step,
    save_stage_result,
    train_stage,
)
from .transforms import TransformSpec, test_transform, train_transform

__version__ = "0.1.0"
