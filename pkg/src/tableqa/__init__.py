"""Table question answering by intersecting row and column probabilities.

Rows and columns of a table are independently classified for
answer-containment; the per-row and per-column probabilities are combined
into per-cell scores that can be returned as a ranked cell list, fed to an
aggregation operator, or rendered as a heatmap.
"""

from .aggregate import (
    AggAnswer,
    AggTrainConfig,
    classify_question,
    execute_aggregation,
    parse_numeric,
    train_question_classifier,
)
from .classifiers import (
    Head,
    QuestionClassifier,
    RciModelBundle,
    SequenceClassifier,
    TrainConfig,
    TrainResult,
    build_training_pairs,
    load_bundle,
    save_bundle,
    score_interaction,
    score_representation,
    train_rci,
)
from .encoder import (
    EncoderConfig,
    EncoderModel,
    checkpoint_roundtrip,
    grad_check,
    load_encoder,
    new_encoder,
    save_encoder,
)
from .errors import (
    CheckpointError,
    NotFoundError,
    ParseError,
    StaleIndexError,
    TableQAError,
    TableValidationError,
    UnanswerableError,
)
from .harness import BundleScorer, OracleScorer, evaluate_corpus, format_ablation, score_question
from .intersect import (
    CellScoreGrid,
    Heatmap,
    build_heatmap,
    combine_scores,
    heatmap_record,
    rank_cells,
)
from .metrics import EvalReport, RankingResult, decompose_errors, evaluate_ranking
from .optim import Adam, AdamConfig
from .serialize import (
    SequencePair,
    SerializationMode,
    serialize_column,
    serialize_header,
    serialize_row,
)
from .service import ServiceState, answer_question, make_server
from .store import EmbeddingIndex, load_index, materialize, query_with_store, save_index
from .synthetic import GeneratorConfig, SyntheticCorpus, generate_synthetic_corpus
from .tables import (
    AGG_TYPES,
    CellCoord,
    QAInstance,
    RowColTargets,
    Table,
    derive_targets,
    downsample_rows,
    parse_questions_file,
    parse_table_file,
    weak_supervise,
)
from .tokenizer import TokenizerConfig, assemble_pair, tokenize

__version__ = "0.1.0"
