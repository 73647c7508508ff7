"""Human-in-the-loop iterative text revision.

A pluggable backend proposes intention-tagged token-level edits on a
document, reviewers accept or reject each edit, accepted edits are applied,
and the loop repeats until nothing is proposed or the depth limit is hit.
"""

from .model import (
    Decision,
    Document,
    DomainTag,
    Edit,
    EditIntention,
    EditKind,
    EditStatus,
    Mode,
    RevisionSession,
    RevisionStep,
    Sentence,
    SessionConfig,
    SessionState,
    Token,
    Verdict,
    decode_session,
    encode_session,
)
from .segment import SegmenterConfig, build_document, render, segment, tokenize
from .diff import (
    OverlapError,
    UnresolvedEditError,
    align_versions,
    apply_all,
    apply_decisions,
    extract_edits,
    materialize,
)
from .engine import (
    AlignmentGapError,
    Backend,
    BackendError,
    DepthExceededError,
    RemoteBackend,
    ReplayBackend,
    RuleBackend,
    RuleBackendConfig,
    StateError,
    UnknownEditError,
    UnresolvedEditsError,
    advance,
    heuristic_intention,
    new_session,
    propose,
    record_decisions,
    run_system_only,
)
from .metrics import (
    CorpusStats,
    DepthStats,
    EmptyInputError,
    IntentionStats,
    QualityJudgment,
    RangeError,
    acceptance_by_depth,
    acceptance_by_intention,
    bleu,
    corpus_stats,
    quality_log,
    rouge_l,
    sari,
)
from .store import (
    CorpusRecord,
    EmptyCorpusError,
    NotFoundError,
    ParseError,
    SessionStore,
    StorageError,
    export_records,
    load_dataset,
    parse_corpus,
    split_corpus,
)
from .validate import validate_session

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
