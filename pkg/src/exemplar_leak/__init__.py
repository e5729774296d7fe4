"""Repeated-exemplar leakage auditing for multi-trial classification data."""

__version__ = "0.1.0"

from .dataset import (  # noqa: F401
    Dataset,
    DatasetManifest,
    Trial,
    flatten_trial,
    load_dataset,
    save_dataset,
    validate_dataset,
)
from .synth import SynthConfig, generate_synthetic, preset  # noqa: F401
from .pseudocat import (  # noqa: F401
    PseudocategoryAssignment,
    assign_by_composition,
    assign_one_per_category,
    relabel,
)
from .splits import (  # noqa: F401
    SplitPlan,
    exemplar_disjoint_kfold,
    stratified_kfold_by_exemplar,
    validate_split,
)
from .stats import accuracy, bonferroni, one_sample_ttest_greater, t_cdf  # noqa: F401
from .audit import (  # noqa: F401
    AssignmentConfig,
    AuditConfig,
    AuditReport,
    ComparisonReport,
    compare_protocols,
    run_audit,
)
from .report import emit_report  # noqa: F401
