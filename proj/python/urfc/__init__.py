"""Urban region function recognition: visit-log features, GBDT, decision fusion."""

from ._core import (  # noqa: F401
    ACTIVITY_DIM,
    GRAPH_DIM,
    IMAGE_DIM,
    MULTI_DIM,
    NUM_CATEGORIES,
    STAT_DIM,
    TEMPORAL_DIM,
    CalendarWindow,
    GbdtModel,
    GbdtParams,
    SynthConfig,
    VisitLog,
    category_index,
    category_names,
    day_offset_to_week_weekday,
    evaluate,
    extract_statistical,
    extract_temporal_feature,
    fit_gbdt,
    generate_dataset,
    parse_visit_text,
    serialize_visit_log,
    set_max_threads,
)
