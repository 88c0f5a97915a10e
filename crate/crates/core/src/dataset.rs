//! Labeled dataset loading and the three split strategies.
//!
//! Splits are fully deterministic: the pool is sorted by id, each class is
//! shuffled with Fisher–Yates driven by a single xoshiro256** stream seeded
//! via SplitMix64 (`seed_from_u64`), and splits are drawn as prefixes. Pool
//! file order never affects membership.

use std::collections::HashSet;
use std::path::Path;

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::TaxonomyClass;
use crate::prompt::Label;

/// One labeled data point: a candidate string, the window it was cut from,
/// and its gold label(s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: String,
    pub candidate: String,
    /// Pre-cut context window; may be empty when only the candidate is known.
    pub context: String,
    pub file_path: Option<String>,
    pub span: Option<(usize, usize)>,
    pub label: Label,
    pub secret_type: Option<TaxonomyClass>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitStrategy {
    Balanced,
    Imbalanced,
    Multiclass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSet {
    pub train: Vec<LabeledExample>,
    pub validation: Vec<LabeledExample>,
    pub test: Vec<LabeledExample>,
    pub strategy: SplitStrategy,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("row {row}: unknown label {value:?}")]
    UnknownLabel { row: usize, value: String },
    #[error("row {row}: unknown secret type {value:?}")]
    UnknownType { row: usize, value: String },
    #[error("pool has {have} {class}, need at least {need}")]
    InsufficientPool {
        class: &'static str,
        have: usize,
        need: usize,
    },
    #[error("example {id:?} has no secret_type")]
    MissingTypeLabel { id: String },
    #[error("duplicate id {id:?} in pool")]
    DuplicateId { id: String },
}

const COLUMNS: [&str; 8] = [
    "id",
    "candidate",
    "context",
    "file_path",
    "start_offset",
    "end_offset",
    "label",
    "secret_type",
];

/// Loads a dataset CSV, validating every row. Row order is preserved.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<LabeledExample>, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path.as_ref())
        .map_err(|e| csv_error(1, e))?;

    let header = reader.headers().map_err(|e| csv_error(1, e))?.clone();
    if header.iter().ne(COLUMNS) {
        return Err(DatasetError::MalformedRow {
            row: 1,
            reason: format!("header must be {:?}", COLUMNS.join(",")),
        });
    }

    let mut examples = Vec::new();
    // Row numbers count the header as row 1, matching what editors show.
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| csv_error(row, e))?;
        examples.push(parse_row(row, &record)?);
    }
    Ok(examples)
}

fn csv_error(row: usize, e: csv::Error) -> DatasetError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => DatasetError::Io(io),
        other => DatasetError::MalformedRow {
            row,
            reason: format!("{other:?}"),
        },
    }
}

fn parse_row(row: usize, record: &csv::StringRecord) -> Result<LabeledExample, DatasetError> {
    let malformed = |reason: String| DatasetError::MalformedRow { row, reason };
    if record.len() != COLUMNS.len() {
        return Err(malformed(format!(
            "expected {} fields, found {}",
            COLUMNS.len(),
            record.len()
        )));
    }
    let field = |i: usize| record.get(i).unwrap_or_default();

    let id = field(0).to_string();
    if id.is_empty() {
        return Err(malformed("empty id".into()));
    }
    let candidate = field(1).to_string();
    let context = field(2).to_string();
    if !context.is_empty() && !context.contains(&candidate) {
        return Err(malformed("context does not contain candidate".into()));
    }
    let file_path = match field(3) {
        "" => None,
        p => Some(p.to_string()),
    };
    let span = match (field(4), field(5)) {
        ("", "") => None,
        (start, end) => {
            let parse = |name: &str, v: &str| {
                v.parse::<usize>()
                    .map_err(|_| malformed(format!("{name} is not a non-negative integer")))
            };
            Some((parse("start_offset", start)?, parse("end_offset", end)?))
        }
    };
    let label = Label::from_slug(field(6)).ok_or_else(|| DatasetError::UnknownLabel {
        row,
        value: field(6).to_string(),
    })?;
    let secret_type = match field(7) {
        "" => None,
        slug => Some(
            TaxonomyClass::from_slug(slug).ok_or_else(|| DatasetError::UnknownType {
                row,
                value: slug.to_string(),
            })?,
        ),
    };
    if label == Label::NonSensitive && secret_type.is_some() {
        return Err(malformed("non_sensitive row carries a secret_type".into()));
    }

    Ok(LabeledExample {
        id,
        candidate,
        context,
        file_path,
        span,
        label,
        secret_type,
    })
}

/// Writes examples back to the dataset CSV format. `load_dataset` of the
/// result reproduces the input exactly.
pub fn write_dataset(
    path: impl AsRef<Path>,
    examples: &[LabeledExample],
) -> Result<(), DatasetError> {
    let mut writer = csv::Writer::from_path(path.as_ref()).map_err(|e| csv_error(0, e))?;
    writer.write_record(COLUMNS).map_err(|e| csv_error(0, e))?;
    for ex in examples {
        let (start, end) = match ex.span {
            Some((s, e)) => (s.to_string(), e.to_string()),
            None => (String::new(), String::new()),
        };
        writer
            .write_record([
                ex.id.as_str(),
                ex.candidate.as_str(),
                ex.context.as_str(),
                ex.file_path.as_deref().unwrap_or(""),
                start.as_str(),
                end.as_str(),
                ex.label.slug(),
                ex.secret_type.map(|t| t.slug()).unwrap_or(""),
            ])
            .map_err(|e| csv_error(0, e))?;
    }
    writer.flush()?;
    Ok(())
}

/// Fisher–Yates over an explicit PRNG stream; index draws use
/// `next_u64() % (i + 1)`, highest index first.
fn seeded_shuffle<T>(items: &mut [T], rng: &mut Xoshiro256StarStar) {
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

fn check_unique_ids(pool: &[LabeledExample]) -> Result<(), DatasetError> {
    let mut seen = HashSet::with_capacity(pool.len());
    for ex in pool {
        if !seen.insert(ex.id.as_str()) {
            return Err(DatasetError::DuplicateId { id: ex.id.clone() });
        }
    }
    Ok(())
}

/// Splits the pool into id-sorted secret and non-secret halves, then
/// shuffles each with a single RNG stream (secrets first).
fn shuffled_classes(
    pool: &[LabeledExample],
    seed: u64,
) -> (Vec<LabeledExample>, Vec<LabeledExample>) {
    let mut sorted: Vec<&LabeledExample> = pool.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut secrets: Vec<LabeledExample> = Vec::new();
    let mut non_secrets: Vec<LabeledExample> = Vec::new();
    for ex in sorted {
        match ex.label {
            Label::Secret => secrets.push(ex.clone()),
            Label::NonSensitive => non_secrets.push(ex.clone()),
        }
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    seeded_shuffle(&mut secrets, &mut rng);
    seeded_shuffle(&mut non_secrets, &mut rng);
    (secrets, non_secrets)
}

fn require(
    class: &'static str,
    have: usize,
    need: usize,
) -> Result<(), DatasetError> {
    if have < need {
        Err(DatasetError::InsufficientPool { class, have, need })
    } else {
        Ok(())
    }
}

/// Draws `counts` items per split from the shuffled class, consuming a
/// moving prefix: train first, then validation, then test.
fn draw(items: &[LabeledExample], counts: [usize; 3]) -> [Vec<LabeledExample>; 3] {
    let mut cursor = 0;
    counts.map(|n| {
        let slice = items[cursor..cursor + n].to_vec();
        cursor += n;
        slice
    })
}

fn interleave(
    secrets: [Vec<LabeledExample>; 3],
    non_secrets: [Vec<LabeledExample>; 3],
) -> [Vec<LabeledExample>; 3] {
    let mut out = secrets;
    for (dst, extra) in out.iter_mut().zip(non_secrets) {
        dst.extend(extra);
    }
    out
}

/// Balanced strategy: 12,000 + 12,000 train, 1,500 + 1,500 validation,
/// 1,500 + 1,500 test.
pub fn make_balanced_split(pool: &[LabeledExample], seed: u64) -> Result<SplitSet, DatasetError> {
    check_unique_ids(pool)?;
    let (secrets, non_secrets) = shuffled_classes(pool, seed);
    require("secrets", secrets.len(), 15_000)?;
    require("non_secrets", non_secrets.len(), 18_000)?;
    let s = draw(&secrets, [12_000, 1_500, 1_500]);
    let n = draw(&non_secrets, [12_000, 1_500, 1_500]);
    let [train, validation, test] = interleave(s, n);
    Ok(SplitSet {
        train,
        validation,
        test,
        strategy: SplitStrategy::Balanced,
        seed,
    })
}

/// Imbalanced strategy: the train split skews to 3,750 secrets against
/// 20,250 non-secrets (still 24,000 rows); validation and test stay
/// balanced at 1,500 + 1,500.
pub fn make_imbalanced_split(pool: &[LabeledExample], seed: u64) -> Result<SplitSet, DatasetError> {
    check_unique_ids(pool)?;
    let (secrets, non_secrets) = shuffled_classes(pool, seed);
    require("secrets", secrets.len(), 6_750)?;
    require("non_secrets", non_secrets.len(), 23_250)?;
    let s = draw(&secrets, [3_750, 1_500, 1_500]);
    let n = draw(&non_secrets, [20_250, 1_500, 1_500]);
    let [train, validation, test] = interleave(s, n);
    Ok(SplitSet {
        train,
        validation,
        test,
        strategy: SplitStrategy::Imbalanced,
        seed,
    })
}

/// Multiclass strategy over typed positives: keep the 15,000 lowest ids,
/// shuffle, draw 9,000 / 3,000 / 3,000.
pub fn make_multiclass_split(
    pool_of_positives: &[LabeledExample],
    seed: u64,
) -> Result<SplitSet, DatasetError> {
    check_unique_ids(pool_of_positives)?;
    for ex in pool_of_positives {
        if ex.secret_type.is_none() {
            return Err(DatasetError::MissingTypeLabel { id: ex.id.clone() });
        }
    }
    require("positives", pool_of_positives.len(), 15_000)?;

    let mut sorted: Vec<LabeledExample> = pool_of_positives.to_vec();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    // Overflow beyond 15,000 is dropped deterministically: highest ids go.
    sorted.truncate(15_000);

    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    seeded_shuffle(&mut sorted, &mut rng);
    let [train, validation, test] = draw(&sorted, [9_000, 3_000, 3_000]);
    Ok(SplitSet {
        train,
        validation,
        test,
        strategy: SplitStrategy::Multiclass,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example(i: usize, label: Label) -> LabeledExample {
        let candidate = format!("cand{i:05}");
        LabeledExample {
            id: format!("e{i:05}"),
            candidate: candidate.clone(),
            context: format!("value = \"{candidate}\""),
            file_path: None,
            span: None,
            label,
            secret_type: match label {
                Label::Secret => Some(TaxonomyClass::ALL[i % TaxonomyClass::ALL.len()]),
                Label::NonSensitive => None,
            },
        }
    }

    fn pool(secrets: usize, non_secrets: usize) -> Vec<LabeledExample> {
        let mut out: Vec<LabeledExample> =
            (0..secrets).map(|i| example(i, Label::Secret)).collect();
        out.extend((secrets..secrets + non_secrets).map(|i| example(i, Label::NonSensitive)));
        out
    }

    fn ids(examples: &[LabeledExample]) -> Vec<&str> {
        examples.iter().map(|e| e.id.as_str()).collect()
    }

    fn assert_disjoint(split: &SplitSet) {
        let mut seen = HashSet::new();
        for ex in split
            .train
            .iter()
            .chain(&split.validation)
            .chain(&split.test)
        {
            assert!(seen.insert(ex.id.clone()), "id {} appears twice", ex.id);
        }
    }

    #[test]
    fn prng_stream_is_pinned() {
        // Frozen from an independent SplitMix64 + xoshiro256** implementation;
        // guards against the PRNG dependency changing behavior under us.
        let mut rng = Xoshiro256StarStar::seed_from_u64(42);
        assert_eq!(rng.next_u64(), 1546998764402558742);
        assert_eq!(rng.next_u64(), 6990951692964543102);
        assert_eq!(rng.next_u64(), 12544586762248559009);
    }

    #[test]
    fn shuffle_permutations_are_pinned() {
        let mut v: Vec<u32> = (0..10).collect();
        let mut rng = Xoshiro256StarStar::seed_from_u64(42);
        seeded_shuffle(&mut v, &mut rng);
        assert_eq!(v, [7, 3, 8, 9, 5, 6, 4, 1, 0, 2]);

        let mut v: Vec<u32> = (0..10).collect();
        let mut rng = Xoshiro256StarStar::seed_from_u64(7);
        seeded_shuffle(&mut v, &mut rng);
        assert_eq!(v, [8, 3, 9, 0, 7, 2, 1, 6, 5, 4]);

        let mut v: Vec<u32> = (0..6).collect();
        let mut rng = Xoshiro256StarStar::seed_from_u64(42);
        seeded_shuffle(&mut v, &mut rng);
        assert_eq!(v, [3, 5, 4, 1, 2, 0]);
    }

    #[test]
    fn csv_round_trip_preserves_everything() {
        let examples = vec![
            LabeledExample {
                id: "a1".into(),
                candidate: "AKIAQ9R2V7XJ5WPLH3BD".into(),
                context: "key = \"AKIAQ9R2V7XJ5WPLH3BD\" # prod".into(),
                file_path: Some("src/config, with comma.env".into()),
                span: Some((7, 27)),
                label: Label::Secret,
                secret_type: Some(TaxonomyClass::ApiKeyAndSecret),
            },
            LabeledExample {
                id: "a2".into(),
                candidate: "xxxxxxxxxx".into(),
                context: String::new(),
                file_path: None,
                span: None,
                label: Label::NonSensitive,
                secret_type: None,
            },
            LabeledExample {
                id: "a3".into(),
                candidate: "line\nbreak \"quoted\"".into(),
                context: "before line\nbreak \"quoted\" after".into(),
                file_path: None,
                span: None,
                label: Label::Secret,
                secret_type: None,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        write_dataset(&path, &examples).unwrap();
        let loaded = load_dataset(&path).unwrap();
        assert_eq!(loaded, examples);
    }

    fn load_rows(rows: &str) -> Result<Vec<LabeledExample>, DatasetError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let header = "id,candidate,context,file_path,start_offset,end_offset,label,secret_type\n";
        std::fs::write(&path, format!("{header}{rows}")).unwrap();
        load_dataset(&path)
    }

    #[test]
    fn load_validates_rows() {
        assert!(matches!(
            load_rows("a1,tok,ctx without it,,,,secret,\n"),
            Err(DatasetError::MalformedRow { row: 2, .. })
        ));
        assert!(matches!(
            load_rows("a1,tok,,,,,maybe,\n"),
            Err(DatasetError::UnknownLabel { row: 2, .. })
        ));
        assert!(matches!(
            load_rows("a1,tok,,,,,secret,laser_key\n"),
            Err(DatasetError::UnknownType { row: 2, .. })
        ));
        assert!(matches!(
            load_rows("a1,tok,,,,,non_sensitive,password\n"),
            Err(DatasetError::MalformedRow { row: 2, .. })
        ));
        assert!(matches!(
            load_rows("a1,tok,,,5,,secret,\n"),
            Err(DatasetError::MalformedRow { row: 2, .. })
        ));
        assert!(matches!(
            load_rows(",tok,,,,,secret,\n"),
            Err(DatasetError::MalformedRow { row: 2, .. })
        ));
        // Secret without a type is fine for binary work.
        let ok = load_rows("a1,tok,,,,,secret,\na2,tok2,,,,,non_sensitive,\n").unwrap();
        assert_eq!(ok.len(), 2);
        assert_eq!(ok[0].secret_type, None);
    }

    #[test]
    fn load_rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        std::fs::write(&path, "id,candidate,label\na,b,secret\n").unwrap();
        assert!(matches!(
            load_dataset(&path),
            Err(DatasetError::MalformedRow { row: 1, .. })
        ));
    }

    #[test]
    fn balanced_split_has_exact_cardinalities() {
        let split = make_balanced_split(&pool(15_000, 18_000), 42).unwrap();
        assert_eq!(split.train.len(), 24_000);
        assert_eq!(split.validation.len(), 3_000);
        assert_eq!(split.test.len(), 3_000);
        for part in [&split.train, &split.validation, &split.test] {
            let secrets = part.iter().filter(|e| e.label == Label::Secret).count();
            assert_eq!(secrets * 2, part.len());
        }
        assert_disjoint(&split);
        assert_eq!(split.strategy, SplitStrategy::Balanced);
        assert_eq!(split.seed, 42);
    }

    #[test]
    fn balanced_split_is_deterministic_and_order_insensitive() {
        let p = pool(15_000, 18_000);
        let a = make_balanced_split(&p, 42).unwrap();
        let b = make_balanced_split(&p, 42).unwrap();
        assert_eq!(a, b);

        let mut reversed = p.clone();
        reversed.reverse();
        let c = make_balanced_split(&reversed, 42).unwrap();
        assert_eq!(ids(&a.train), ids(&c.train));
        assert_eq!(ids(&a.validation), ids(&c.validation));
        assert_eq!(ids(&a.test), ids(&c.test));

        let other_seed = make_balanced_split(&p, 43).unwrap();
        assert_ne!(ids(&a.train), ids(&other_seed.train));
    }

    #[test]
    fn balanced_split_reports_short_class() {
        match make_balanced_split(&pool(10_000, 18_000), 1).unwrap_err() {
            DatasetError::InsufficientPool { class, have, need } => {
                assert_eq!(class, "secrets");
                assert_eq!(have, 10_000);
                assert_eq!(need, 15_000);
            }
            other => panic!("unexpected error {other:?}"),
        }
        match make_balanced_split(&pool(15_000, 17_999), 1).unwrap_err() {
            DatasetError::InsufficientPool { class, .. } => assert_eq!(class, "non_secrets"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn imbalanced_split_skews_train_only() {
        let split = make_imbalanced_split(&pool(6_750, 23_250), 9).unwrap();
        assert_eq!(split.train.len(), 24_000);
        let train_secrets = split
            .train
            .iter()
            .filter(|e| e.label == Label::Secret)
            .count();
        assert_eq!(train_secrets, 3_750);
        assert_eq!(train_secrets as f64 / split.train.len() as f64, 0.15625);
        for part in [&split.validation, &split.test] {
            assert_eq!(part.len(), 3_000);
            assert_eq!(part.iter().filter(|e| e.label == Label::Secret).count(), 1_500);
        }
        assert_disjoint(&split);

        assert!(matches!(
            make_imbalanced_split(&pool(6_749, 23_250), 9),
            Err(DatasetError::InsufficientPool { class: "secrets", .. })
        ));
    }

    #[test]
    fn multiclass_split_drops_highest_ids() {
        let positives = pool(15_084, 0);
        let split = make_multiclass_split(&positives, 5).unwrap();
        assert_eq!(split.train.len(), 9_000);
        assert_eq!(split.validation.len(), 3_000);
        assert_eq!(split.test.len(), 3_000);
        assert_disjoint(&split);

        let used: HashSet<&str> = split
            .train
            .iter()
            .chain(&split.validation)
            .chain(&split.test)
            .map(|e| e.id.as_str())
            .collect();
        assert_eq!(used.len(), 15_000);
        // The 84 overflow rows are exactly the highest ids.
        for i in 15_000..15_084 {
            assert!(!used.contains(format!("e{i:05}").as_str()));
        }
        assert!(used.contains("e00000"));
    }

    #[test]
    fn multiclass_split_requires_types_and_size() {
        let mut positives = pool(15_000, 0);
        positives[3].secret_type = None;
        match make_multiclass_split(&positives, 5).unwrap_err() {
            DatasetError::MissingTypeLabel { id } => assert_eq!(id, "e00003"),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(matches!(
            make_multiclass_split(&pool(14_999, 0), 5),
            Err(DatasetError::InsufficientPool { class: "positives", .. })
        ));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let mut p = pool(15_000, 18_000);
        p[1].id = p[0].id.clone();
        assert!(matches!(
            make_balanced_split(&p, 1),
            Err(DatasetError::DuplicateId { .. })
        ));
    }
}
