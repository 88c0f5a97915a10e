//! Implementations behind the four subcommands.
//!
//! Each command returns `Ok(exit_code)` for ordinary outcomes (including
//! "findings present", exit 1) and `Err` for fatal conditions, which the
//! dispatcher prints and maps to exit 2.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use secretsift_core::builtin::builtin_catalog;
use secretsift_core::catalog::{load_catalog, Catalog, TaxonomyClass};
use secretsift_core::classify::manifest::emit_finetune_manifest;
use secretsift_core::classify::{
    batch_classify, BackendKind, ClassifierConfig, ClassifyError, Verdict,
};
use secretsift_core::context::extract_window;
use secretsift_core::dataset::{
    load_dataset, make_balanced_split, make_imbalanced_split, make_multiclass_split, write_dataset,
    LabeledExample,
};
use secretsift_core::metrics::{class_report, ConfusionMatrix};
use secretsift_core::prompt::{
    default_exemplars, load_exemplar_bank, ClassifyMode, Exemplar, Label, PromptRequest, MAX_SHOTS,
};
use secretsift_core::scanner::{normalize_content, scan_tree, Candidate, ScanOptions};

use crate::report::{EvalReport, Finding, ScanReport, ScanSummary};
use crate::{
    EmitFinetuneConfigArgs, EvalBackendArg, EvaluateArgs, FormatArg, ModeArg, ScanArgs,
    ScanBackendArg, SplitArgs, StrategyArg, UnparseableArg,
};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

impl ModeArg {
    fn to_mode(self) -> ClassifyMode {
        match self {
            ModeArg::Binary => ClassifyMode::Binary,
            ModeArg::Multiclass => ClassifyMode::Multiclass,
        }
    }
}

/// Picks the exemplars a prompt will carry: the shipped bank by default, or
/// a user-supplied bank file. Custom banks follow the same selection rule
/// as the shipped one: first `shots` entries, restricted to typed entries
/// in multiclass mode.
fn select_exemplars(
    bank: Option<&Path>,
    mode: ClassifyMode,
    shots: usize,
) -> Result<Vec<Exemplar>> {
    if shots == 0 {
        return Ok(Vec::new());
    }
    if shots > MAX_SHOTS {
        bail!("--shots {shots} exceeds the supported maximum of {MAX_SHOTS}");
    }
    let picked = match bank {
        None => default_exemplars(mode, shots)?,
        Some(path) => {
            let all = load_exemplar_bank(path)
                .with_context(|| format!("loading exemplar bank {}", path.display()))?;
            let picked: Vec<Exemplar> = match mode {
                ClassifyMode::Binary => all.into_iter().take(shots).collect(),
                ClassifyMode::Multiclass => all
                    .into_iter()
                    .filter(|e| e.type_label.is_some())
                    .take(shots)
                    .collect(),
            };
            if picked.len() < shots {
                bail!(
                    "exemplar bank {} has only {} usable entries for --shots {shots}",
                    path.display(),
                    picked.len()
                );
            }
            picked
        }
    };
    Ok(picked)
}

/// Assembles the classifier configuration for a backend choice. The remote
/// backend needs an explicit model id; the mock ships with its own.
fn classifier_config(
    kind: BackendKind,
    model: Option<&str>,
    concurrency: u32,
) -> Result<ClassifierConfig> {
    let mut cfg = ClassifierConfig::default();
    cfg.backend = kind;
    cfg.concurrency_limit = concurrency as usize;
    match kind {
        BackendKind::Remote => {
            let model = model.ok_or_else(|| anyhow!("the remote backend requires --model"))?;
            cfg.model_id = model.to_string();
        }
        BackendKind::RuleMock => {
            if let Some(model) = model {
                cfg.model_id = model.to_string();
            }
        }
    }
    Ok(cfg)
}

fn load_catalog_arg(path: Option<&Path>) -> Result<Catalog> {
    match path {
        Some(p) => {
            load_catalog(p).with_context(|| format!("loading catalog {}", p.display()))
        }
        None => Ok(builtin_catalog()),
    }
}

fn write_or_print(out: Option<&Path>, rendered: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, rendered)
            .with_context(|| format!("writing report to {}", path.display())),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

/// Where a candidate's file lives on disk. Scan labels are relative to the
/// scanned root, except when the root itself is a file.
fn resolve_candidate_file(root: &Path, label: &str) -> PathBuf {
    if root.is_file() {
        root.to_path_buf()
    } else {
        root.join(label)
    }
}

/// Re-cuts the context window for a candidate from its source file, using
/// the same normalization the scanner applied.
fn window_for_candidate(
    root: &Path,
    cand: &Candidate,
    window_chars: usize,
    cache: &mut HashMap<String, Option<String>>,
) -> Option<String> {
    let text = cache
        .entry(cand.file_path.clone())
        .or_insert_with(|| {
            let path = resolve_candidate_file(root, &cand.file_path);
            fs::read(&path).ok().map(|bytes| normalize_content(&bytes))
        })
        .clone()?;
    extract_window(&text, (cand.start_offset, cand.end_offset), window_chars)
        .ok()
        .map(|w| w.text)
}

pub fn cmd_scan(args: &ScanArgs) -> Result<i32> {
    let catalog = load_catalog_arg(args.catalog.as_deref())?;
    let options = ScanOptions {
        max_file_bytes: if args.max_file_bytes == 0 {
            None
        } else {
            Some(args.max_file_bytes)
        },
        include_globs: args.include.clone(),
        exclude_globs: args.exclude.clone(),
    };
    let result = scan_tree(&args.path, &catalog, &options)?;
    for issue in &result.issues {
        eprintln!("warning: {}: {}", issue.path, issue.message);
    }

    let mode = args.mode.to_mode();
    let mut errors = result.issues.len();
    let mut verdicts: Vec<Option<Verdict>> = vec![None; result.candidates.len()];

    if let Some(backend) = args.classify {
        let kind = match backend {
            ScanBackendArg::Remote => BackendKind::Remote,
            ScanBackendArg::Mock => BackendKind::RuleMock,
        };
        let cfg = classifier_config(kind, args.model.as_deref(), args.concurrency)?;
        let exemplars = select_exemplars(args.exemplars.as_deref(), mode, args.shots)?;

        // Build one request per candidate whose window can be re-cut; a
        // file that vanished since the walk counts as an error, not a halt.
        let mut cache: HashMap<String, Option<String>> = HashMap::new();
        let mut requests = Vec::new();
        let mut request_slot: Vec<Option<usize>> = Vec::with_capacity(result.candidates.len());
        for cand in &result.candidates {
            match window_for_candidate(&args.path, cand, args.context_chars, &mut cache) {
                Some(context) => {
                    request_slot.push(Some(requests.len()));
                    requests.push(PromptRequest {
                        mode,
                        shots: args.shots,
                        candidate: cand.matched_text.clone(),
                        context,
                        exemplars: exemplars.clone(),
                    });
                }
                None => {
                    request_slot.push(None);
                    errors += 1;
                }
            }
        }

        let outcomes = batch_classify(&requests, &cfg);
        if !outcomes.is_empty() && outcomes.iter().all(|o| o.is_err()) {
            // Nothing classified at all: almost certainly a dead or
            // misconfigured backend, so fail loudly instead of reporting
            // an all-error summary.
            let first = outcomes.into_iter().next().unwrap().unwrap_err();
            return Err(anyhow!(first).context("classification backend produced no verdicts"));
        }
        for (cand_idx, slot) in request_slot.iter().enumerate() {
            if let Some(req_idx) = slot {
                match &outcomes[*req_idx] {
                    Ok(v) => verdicts[cand_idx] = Some(v.clone()),
                    Err(_) => errors += 1,
                }
            }
        }
    }

    let redact = args.redaction();
    let findings: Vec<Finding> = result
        .candidates
        .iter()
        .zip(&verdicts)
        .map(|(cand, verdict)| Finding::from_candidate(cand, verdict.as_ref(), redact))
        .collect();
    let classified_secret = verdicts
        .iter()
        .flatten()
        .filter(|v| match mode {
            ClassifyMode::Binary => v.binary_label == Some(Label::Secret),
            ClassifyMode::Multiclass => v.type_label.is_some(),
        })
        .count();

    let report = ScanReport {
        tool_version: TOOL_VERSION.to_string(),
        catalog_source: result.catalog_source.clone(),
        window_chars: args.context_chars,
        findings,
        summary: ScanSummary {
            files_scanned: result.files_scanned,
            candidates: result.candidates.len(),
            classified_secret,
            errors,
        },
    };
    let rendered = match args.format {
        FormatArg::Json => report.to_json(),
        FormatArg::Table => report.to_table(),
    };
    write_or_print(args.out.as_deref(), &rendered)?;

    let flagged = if args.classify.is_some() {
        classified_secret > 0
    } else {
        !result.candidates.is_empty()
    };
    Ok(if flagged { 1 } else { 0 })
}

/// The context string a dataset row contributes to its prompt: the stored
/// window when present, a re-cut from the source file when the row points
/// at one, and the bare candidate otherwise.
fn context_for_row(
    row: &LabeledExample,
    dataset_dir: &Path,
    window_chars: usize,
    cache: &mut HashMap<String, Option<String>>,
) -> Result<String> {
    if !row.context.is_empty() {
        return Ok(row.context.clone());
    }
    if let (Some(file), Some(span)) = (&row.file_path, row.span) {
        let text = cache
            .entry(file.clone())
            .or_insert_with(|| {
                let path = dataset_dir.join(file);
                fs::read(&path).ok().map(|bytes| normalize_content(&bytes))
            })
            .clone()
            .ok_or_else(|| anyhow!("row {}: cannot read referenced file {file}", row.id))?;
        let window = extract_window(&text, span, window_chars)
            .map_err(|e| anyhow!("row {}: {e}", row.id))?;
        return Ok(window.text);
    }
    Ok(row.candidate.clone())
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<i32> {
    let mode = args.mode.to_mode();
    if mode == ClassifyMode::Multiclass {
        if args.backend == EvalBackendArg::Baseline {
            bail!("the baseline backend only supports binary mode");
        }
        if args.on_unparseable != UnparseableArg::Error {
            bail!("multiclass evaluation supports only --on-unparseable error");
        }
    }

    let rows = load_dataset(&args.dataset)
        .with_context(|| format!("loading dataset {}", args.dataset.display()))?;
    if rows.is_empty() {
        bail!("dataset {} has no rows", args.dataset.display());
    }
    if mode == ClassifyMode::Multiclass {
        for row in &rows {
            if row.secret_type.is_none() {
                bail!(
                    "row {}: multiclass evaluation needs a type label on every row",
                    row.id
                );
            }
        }
    }

    let golds: Vec<String> = match mode {
        ClassifyMode::Binary => rows.iter().map(|r| r.label.answer().to_string()).collect(),
        ClassifyMode::Multiclass => rows
            .iter()
            .map(|r| r.secret_type.unwrap().name().to_string())
            .collect(),
    };

    let (preds, model_id) = match args.backend {
        EvalBackendArg::Baseline => {
            (vec!["Secret".to_string(); rows.len()], "baseline-regex".to_string())
        }
        EvalBackendArg::Mock | EvalBackendArg::Remote => {
            let kind = match args.backend {
                EvalBackendArg::Remote => BackendKind::Remote,
                _ => BackendKind::RuleMock,
            };
            let cfg = classifier_config(kind, args.model.as_deref(), args.concurrency)?;
            let exemplars = select_exemplars(args.exemplars.as_deref(), mode, args.shots)?;
            let dataset_dir = args
                .dataset
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .unwrap_or(Path::new("."))
                .to_path_buf();

            let mut cache: HashMap<String, Option<String>> = HashMap::new();
            let mut requests = Vec::with_capacity(rows.len());
            for row in &rows {
                let context =
                    context_for_row(row, &dataset_dir, args.context_chars, &mut cache)?;
                requests.push(PromptRequest {
                    mode,
                    shots: args.shots,
                    candidate: row.candidate.clone(),
                    context,
                    exemplars: exemplars.clone(),
                });
            }

            let outcomes = batch_classify(&requests, &cfg);
            let mut preds = Vec::with_capacity(rows.len());
            for (row, outcome) in rows.iter().zip(outcomes) {
                let pred = match outcome {
                    Ok(v) => match mode {
                        ClassifyMode::Binary => v
                            .binary_label
                            .ok_or_else(|| anyhow!("row {}: verdict carried no label", row.id))?
                            .answer()
                            .to_string(),
                        ClassifyMode::Multiclass => v
                            .type_label
                            .ok_or_else(|| anyhow!("row {}: verdict carried no type", row.id))?
                            .name()
                            .to_string(),
                    },
                    Err(ClassifyError::UnparseableAnswer { .. }) => match args.on_unparseable {
                        // Deliberately not echoing the raw answer: it may
                        // quote the candidate secret.
                        UnparseableArg::Error => {
                            bail!("row {}: model answer could not be parsed", row.id)
                        }
                        UnparseableArg::NonSensitive => "Non-sensitive".to_string(),
                        UnparseableArg::Secret => "Secret".to_string(),
                    },
                    Err(e) => return Err(anyhow!(e).context(format!("row {}", row.id))),
                };
                preds.push(pred);
            }
            (preds, cfg.model_id)
        }
    };

    let labels: Vec<&str> = match mode {
        ClassifyMode::Binary => vec!["Secret", "Non-sensitive"],
        ClassifyMode::Multiclass => TaxonomyClass::ALL.iter().map(|c| c.name()).collect(),
    };
    let gold_refs: Vec<&str> = golds.iter().map(String::as_str).collect();
    let pred_refs: Vec<&str> = preds.iter().map(String::as_str).collect();
    let confusion = ConfusionMatrix::from_pairs(&labels, &gold_refs, &pred_refs)?;
    let metrics = class_report(&confusion)?;

    let report = EvalReport {
        tool_version: TOOL_VERSION.to_string(),
        dataset: args.dataset.display().to_string(),
        backend: match args.backend {
            EvalBackendArg::Remote => "remote",
            EvalBackendArg::Mock => "mock",
            EvalBackendArg::Baseline => "baseline",
        }
        .to_string(),
        model_id,
        mode: match mode {
            ClassifyMode::Binary => "binary",
            ClassifyMode::Multiclass => "multiclass",
        }
        .to_string(),
        shots: args.shots,
        examples: rows.len(),
        confusion,
        metrics,
    };
    let rendered = match args.format {
        FormatArg::Json => report.to_json(),
        FormatArg::Table => report.to_table(),
    };
    write_or_print(args.out.as_deref(), &rendered)?;
    Ok(0)
}

pub fn cmd_split(args: &SplitArgs) -> Result<i32> {
    let pool = load_dataset(&args.dataset)
        .with_context(|| format!("loading dataset {}", args.dataset.display()))?;
    let split = match args.strategy {
        StrategyArg::Balanced => make_balanced_split(&pool, args.seed)?,
        StrategyArg::Imbalanced => make_imbalanced_split(&pool, args.seed)?,
        StrategyArg::Multiclass => {
            let positives: Vec<LabeledExample> = pool
                .iter()
                .filter(|r| r.label == Label::Secret)
                .cloned()
                .collect();
            make_multiclass_split(&positives, args.seed)?
        }
    };
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    for (name, rows) in [
        ("train.csv", &split.train),
        ("validation.csv", &split.validation),
        ("test.csv", &split.test),
    ] {
        write_dataset(args.out_dir.join(name), rows)?;
    }
    println!(
        "wrote train.csv ({} rows), validation.csv ({} rows), test.csv ({} rows) to {}",
        split.train.len(),
        split.validation.len(),
        split.test.len(),
        args.out_dir.display()
    );
    Ok(0)
}

pub fn cmd_emit_finetune_config(args: &EmitFinetuneConfigArgs) -> Result<i32> {
    let manifest = emit_finetune_manifest(&args.model)?;
    let rendered = manifest.to_key_value_string();
    write_or_print(args.out.as_deref(), &rendered)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolve_candidate_file_handles_both_root_shapes() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("settings.py");
        fs::write(&file, "x = 1\n").unwrap();
        assert_eq!(
            resolve_candidate_file(dir.path(), "settings.py"),
            dir.path().join("settings.py")
        );
        assert_eq!(resolve_candidate_file(&file, "settings.py"), file);
    }

    #[test]
    fn select_exemplars_zero_shots_is_empty() {
        assert!(select_exemplars(None, ClassifyMode::Binary, 0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn select_exemplars_rejects_oversized_shots() {
        assert!(select_exemplars(None, ClassifyMode::Binary, MAX_SHOTS + 1).is_err());
    }

    #[test]
    fn classifier_config_requires_model_for_remote() {
        assert!(classifier_config(BackendKind::Remote, None, 4).is_err());
        let cfg = classifier_config(BackendKind::Remote, Some("gpt-4o"), 2).unwrap();
        assert_eq!(cfg.model_id, "gpt-4o");
        assert_eq!(cfg.concurrency_limit, 2);
        let cfg = classifier_config(BackendKind::RuleMock, None, 4).unwrap();
        assert_eq!(cfg.model_id, "rule-mock");
    }
}
