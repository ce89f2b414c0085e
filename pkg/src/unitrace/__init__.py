"""Uniform random sampling of traces in systems of communicating reactive modules."""

from .automaton import (
    Automaton,
    GrowthDiagnostics,
    Letter,
    Transition,
    check_growth_conditions,
    format_automaton,
    parse_automaton,
    validate_automaton,
)
from .counting import (
    AsymptoticParams,
    CountTable,
    EmptyLanguageError,
    build_count_table,
    count_words,
    default_ladder,
    estimate_asymptotics,
)
from .estimate import (
    EstimationParams,
    Verdict,
    gaa_estimate,
    iterated_estimate,
    random_walk,
    sample_size,
)
from .modules import (
    ModelError,
    ModelSyntaxError,
    ModuleSystem,
    flatten_module,
    flatten_system,
    format_system,
    parse_expression,
    parse_system,
    successors,
    sync_letter,
)
from .products import (
    ProductAutomaton,
    ProductError,
    TooManyTraces,
    build_shuffle_automaton,
    build_sync_product,
    enumerate_traces,
)
from .shuffle import (
    ASYMPTOTIC,
    AUTO,
    EXACT,
    LengthVector,
    ShuffleSampler,
    length_vector_distribution,
    sample_length_vector,
    sample_shuffle_trace,
    shuffle_words,
)
from .stats import (
    ALPHA,
    ChiSquareResult,
    Histogram,
    IllegalTraceError,
    bonferroni,
    chi_square_uniform,
    tv_distance,
)
from .sync import (
    Sublanguages,
    SyncError,
    SyncCountTables,
    SyncSkeleton,
    build_sync_count_tables,
    extract_sublanguages,
    sample_composition,
    sample_sync_skeleton,
    sample_sync_trace,
)
from .uniform import Rng, TraceWord, draw_uniform_word, word_probability

__version__ = "0.1.0"
