//! secretsift-core: hybrid secret detection for source trees.
//!
//! The pipeline has two stages. A regex catalog ([`catalog`], [`builtin`])
//! drives a filesystem scanner ([`scanner`]) that extracts candidate
//! strings with character-exact spans. Each candidate is then wrapped in a
//! code-context window ([`context`]), rendered into a fixed prompt
//! ([`prompt`]), and judged by a classification backend ([`classify`]) —
//! either a chat-completion endpoint or a deterministic offline mock.
//!
//! Around the pipeline sit the evaluation pieces: labeled dataset loading
//! and seeded splits ([`dataset`]) and confusion-matrix metrics
//! ([`metrics`]).

pub mod builtin;
pub mod catalog;
pub mod classify;
pub mod context;
pub mod dataset;
pub mod metrics;
pub mod prompt;
pub mod scanner;

pub use builtin::{builtin_catalog, builtin_specs};
pub use catalog::{
    load_catalog, validate_pattern, Catalog, CatalogError, Pattern, PatternSpec, TaxonomyClass,
};
pub use classify::backend::{BackendError, InferenceBackend, RemoteBackend, RuleMockBackend};
pub use classify::manifest::{emit_finetune_manifest, FinetuneManifest, ManifestError};
pub use classify::parse::{
    parse_binary_label, parse_multiclass_label, rule_mock_classify, rule_mock_type,
};
pub use classify::{
    baseline_regex_only, batch_classify, batch_classify_with, classify_one, classify_one_with,
    BackendKind, ClassifierConfig, ClassifyError, Verdict,
};
pub use context::{
    extract_window, ContextError, ContextWindow, DEFAULT_WINDOW_CHARS, WIDE_WINDOW_CHARS,
};
pub use dataset::{
    load_dataset, make_balanced_split, make_imbalanced_split, make_multiclass_split, write_dataset,
    DatasetError, LabeledExample, SplitSet, SplitStrategy,
};
pub use metrics::{
    class_report, fbeta, format_score, ClassScores, ConfusionMatrix, MacroScores, MetricsError,
    MetricsReport, WeightedScores,
};
pub use prompt::{
    build_prompt, default_exemplars, load_exemplar_bank, ClassifyMode, Exemplar, Label,
    PromptError, PromptRequest, MAX_SHOTS,
};
pub use scanner::{
    candidate_id, is_binary, normalize_content, scan_text, scan_tree, shannon_entropy, Candidate,
    ScanError, ScanIssue, ScanOptions, ScanResult, DEFAULT_MAX_FILE_BYTES,
};
