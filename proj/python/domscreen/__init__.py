"""Domain-name value screening toolkit."""

from ._domscreen import (
    DESCRIPTOR_NAMES,
    ConfigError,
    DomainRecord,
    DomscreenError,
    KernelSpec,
    Label,
    ParseError,
    SvmModel,
    ValidationError,
    cluster_features,
    compute_descriptors,
    diversity_split,
    evaluate,
    geometric_mean,
    grid_search,
    label,
    load_model,
    parse_csv,
    run_cli,
    save_model,
    smo_train,
    spearman_rho,
    synth_generate,
    transform_feature,
    validation_errors,
    write_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
