"""Logic-form driven statement generation over flat data tables.

The package turns a table into short factual statements in four moves:
abstract observed logic forms into weighted templates, grow new forms from
those templates against a concrete table, render or delegate the wording,
then keep only statements whose underlying form executes to true.
"""

from .catalog import CATALOG, CATEGORIES, GROUPS
from .errors import (
    ArityError,
    DistributionError,
    EmptyViewError,
    ExecutionError,
    HookError,
    IngestError,
    LoftError,
    NonNumericError,
    ParseError,
    RankRangeError,
    TypeCheckError,
    UnknownFunctionError,
    ViewSizeError,
)
from .executor import ExecValue, execute, verify
from .forms import (
    AllRows,
    Apply,
    ColumnRef,
    Literal,
    parse_logic_form,
    print_logic_form,
    referenced_columns,
    type_check,
)
from .metrics import (
    MetricsReport,
    corpus_bleu,
    distinct_n,
    score_output,
    self_bleu,
    sentence_bleu,
    tokenize,
)
from .oracle import oracle_execute
from .pipeline import (
    HookConfig,
    PipelineReport,
    Statement,
    generate_statements,
    run_pipeline,
    sample_outputs,
    verify_statements,
)
from .realizer import realize_logic_form, serialize_table
from .synthesizer import (
    SynthesisConfig,
    SynthesisResult,
    SynthesizedCandidate,
    derive_column_sets,
    instantiate,
    sample_template,
    synthesize_candidates,
    table_rng,
)
from .tables import (
    CellValue,
    CorpusEntry,
    Table,
    View,
    infer_column_types,
    load_corpus,
    normalize_cell,
    save_corpus,
)
from .templates import (
    Template,
    TemplateDistribution,
    WeightedTemplate,
    abstract,
    build_distribution,
    default_distribution,
    load_distribution,
    parse_template,
    save_distribution,
    template_to_string,
)

__version__ = "0.1.0"

__all__ = [
    "ArityError",
    "AllRows",
    "Apply",
    "CATALOG",
    "CATEGORIES",
    "CellValue",
    "ColumnRef",
    "CorpusEntry",
    "DistributionError",
    "EmptyViewError",
    "ExecValue",
    "ExecutionError",
    "GROUPS",
    "HookConfig",
    "HookError",
    "IngestError",
    "Literal",
    "LoftError",
    "MetricsReport",
    "NonNumericError",
    "ParseError",
    "PipelineReport",
    "RankRangeError",
    "Statement",
    "SynthesisConfig",
    "SynthesisResult",
    "SynthesizedCandidate",
    "Table",
    "Template",
    "TemplateDistribution",
    "TypeCheckError",
    "UnknownFunctionError",
    "View",
    "ViewSizeError",
    "WeightedTemplate",
    "abstract",
    "build_distribution",
    "corpus_bleu",
    "default_distribution",
    "derive_column_sets",
    "distinct_n",
    "execute",
    "generate_statements",
    "infer_column_types",
    "instantiate",
    "load_corpus",
    "load_distribution",
    "normalize_cell",
    "oracle_execute",
    "parse_logic_form",
    "parse_template",
    "print_logic_form",
    "realize_logic_form",
    "referenced_columns",
    "run_pipeline",
    "sample_outputs",
    "sample_template",
    "save_corpus",
    "save_distribution",
    "score_output",
    "self_bleu",
    "sentence_bleu",
    "serialize_table",
    "synthesize_candidates",
    "table_rng",
    "template_to_string",
    "tokenize",
    "type_check",
    "verify",
    "verify_statements",
]
