//! Selector training data: per-window (prompt, target) pairs, target-size
//! balancing and same-value augmentation.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::condition::{value_key, Annotation, Condition, Op};
use crate::repr::{encode_coordinate, PromptTemplate};
use crate::selector::oracle_select;
use crate::table::{CellSelection, Question, Table};
use crate::window::{divide_table, WindowConfig, WindowError};

/// Target size: `m` answer rows by `n` selected columns.
pub type Bucket = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub prompt: String,
    pub target: String,
    pub m: usize,
    pub n: usize,
    pub table_id: String,
    pub question_id: String,
    /// Global `(row, col)` of the window's top-left cell.
    pub window_origin: (usize, usize),
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub augmented: bool,
    /// Copy of the input window with provenance.
    #[serde(skip)]
    pub window: Option<Table>,
    #[serde(skip)]
    pub selection: CellSelection,
}

impl TrainingPair {
    pub fn bucket(&self) -> Bucket {
        (self.m, self.n)
    }

    /// Zero-column targets cannot be trained on.
    pub fn is_trainable(&self) -> bool {
        self.n >= 1
    }
}

fn size_of(selection: &CellSelection) -> Bucket {
    (selection.rows().len(), selection.columns().len())
}

/// One pair per window of `table`, with the oracle target in the
/// coordinate representation.
pub fn generate_pairs(
    table: &Table,
    question: &Question,
    ann: &Annotation,
    window: WindowConfig,
    template: &PromptTemplate,
    table_id: &str,
    question_id: &str,
) -> Result<Vec<TrainingPair>, WindowError> {
    let windows = divide_table(table, window)?;
    Ok(windows
        .iter()
        .map(|w| {
            let selection = oracle_select(w, ann);
            let (m, n) = size_of(&selection);
            TrainingPair {
                prompt: template.render(w, question),
                target: encode_coordinate(w, &selection).expect("oracle stays inside its window"),
                m,
                n,
                table_id: table_id.to_string(),
                question_id: question_id.to_string(),
                window_origin: w.global_origin(),
                augmented: false,
                window: Some(w.to_table()),
                selection,
            }
        })
        .collect())
}

/// Desired number of pairs per `(m, n)` bucket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketSpec {
    pub w: usize,
    pub counts: BTreeMap<Bucket, usize>,
}

impl BucketSpec {
    /// `per_bucket` for each of the `w (w + 1)` buckets `{0..w} x {1..w}`.
    pub fn uniform(w: usize, per_bucket: usize) -> Self {
        let counts = (0..=w)
            .flat_map(|m| (1..=w).map(move |n| ((m, n), per_bucket)))
            .collect();
        Self { w, counts }
    }
}

/// Per-bucket counts keyed `"(m,n)"`.
pub type Histogram = BTreeMap<String, usize>;

pub fn bucket_label((m, n): Bucket) -> String {
    format!("({m},{n})")
}

pub fn histogram<'a>(spec: &BucketSpec, pairs: impl IntoIterator<Item = &'a TrainingPair>) -> Histogram {
    let mut counts: BTreeMap<Bucket, usize> = spec.counts.keys().map(|&k| (k, 0)).collect();
    for pair in pairs {
        if let Some(c) = counts.get_mut(&pair.bucket()) {
            *c += 1;
        }
    }
    counts.into_iter().map(|(k, v)| (bucket_label(k), v)).collect()
}

/// Supply available per spec bucket.
pub fn supply(spec: &BucketSpec, pairs: &[TrainingPair]) -> BTreeMap<Bucket, usize> {
    let mut counts: BTreeMap<Bucket, usize> = spec.counts.keys().map(|&k| (k, 0)).collect();
    for pair in pairs {
        if let Some(c) = counts.get_mut(&pair.bucket()) {
            *c += 1;
        }
    }
    counts
}

/// Draws up to the requested count from each bucket without replacement.
/// Pairs outside the spec (including zero-column targets) are dropped. The
/// result is shuffled with the same seeded generator.
pub fn balance_pairs(pairs: Vec<TrainingPair>, spec: &BucketSpec, seed: u64) -> (Vec<TrainingPair>, Histogram) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups: BTreeMap<Bucket, Vec<TrainingPair>> = BTreeMap::new();
    for pair in pairs {
        if spec.counts.contains_key(&pair.bucket()) {
            groups.entry(pair.bucket()).or_default().push(pair);
        }
    }
    let mut out = Vec::new();
    for (bucket, &want) in &spec.counts {
        let Some(mut group) = groups.remove(bucket) else {
            continue;
        };
        group.shuffle(&mut rng);
        group.truncate(want);
        out.extend(group);
    }
    out.shuffle(&mut rng);
    let hist = histogram(spec, &out);
    (out, hist)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AugmentStats {
    pub total: usize,
    pub changed: usize,
    pub fraction_changed: f64,
}

/// Adds every window cell whose value equals a target cell's value to the
/// target. Pairs without a stored window are left alone.
pub fn augment_same_value(pairs: Vec<TrainingPair>) -> (Vec<TrainingPair>, AugmentStats) {
    let total = pairs.len();
    let mut changed = 0;
    let pairs = pairs
        .into_iter()
        .map(|mut pair| {
            let Some(window_table) = pair.window.as_ref() else {
                return pair;
            };
            let window = window_table.as_window();
            let keys: HashSet<String> = pair
                .selection
                .cells()
                .iter()
                .filter_map(|&coord| window_table.get(coord))
                .map(value_key)
                .collect();
            if keys.is_empty() {
                return pair;
            }
            let additions: Vec<_> = window
                .coords()
                .filter(|coord| !pair.selection.cells().contains(coord))
                .filter(|&coord| keys.contains(&value_key(window_table.get(coord).expect("window cell"))))
                .collect();
            if additions.is_empty() {
                return pair;
            }
            for coord in additions {
                pair.selection.insert_cell(coord);
            }
            let (m, n) = size_of(&pair.selection);
            pair.m = m;
            pair.n = n;
            pair.target = encode_coordinate(&window, &pair.selection).expect("cells come from the window");
            pair.augmented = true;
            changed += 1;
            pair
        })
        .collect();
    let fraction_changed = if total == 0 { 0.0 } else { changed as f64 / total as f64 };
    (
        pairs,
        AugmentStats {
            total,
            changed,
            fraction_changed,
        },
    )
}

/// A synthetic `w x w` example whose oracle target has exactly `m` rows and
/// `n` columns. Used to top up buckets that real corpora rarely fill.
///
/// The first of the `n` relevant columns doubles as condition and answer
/// column; the other `n - 1` are condition columns. `m` rows match every
/// condition, the rest fail the first one.
pub fn synthesize_example(w: usize, (m, n): Bucket, rng: &mut impl Rng) -> (Table, Annotation) {
    assert!(w >= 1 && m <= w && (1..=w).contains(&n), "bucket ({m},{n}) invalid for w={w}");
    let mut cols: Vec<usize> = (0..w).collect();
    cols.shuffle(rng);
    let relevant: BTreeSet<usize> = cols[..n].iter().copied().collect();
    let first = cols[0];
    let mut rows: Vec<usize> = (0..w).collect();
    rows.shuffle(rng);
    let matching: BTreeSet<usize> = rows[..m].iter().copied().collect();

    let wanted = |c: usize| format!("k{c}");
    let cells = (0..w)
        .map(|r| {
            (0..w)
                .map(|c| {
                    if relevant.contains(&c) && (matching.contains(&r) || c != first) {
                        wanted(c)
                    } else {
                        // filler never equals any condition value
                        format!("f{}", rng.random_range(0..1000u32))
                    }
                })
                .collect()
        })
        .collect();
    let headers = (0..w).map(|c| format!("col{c}")).collect();
    let table = Table::new(headers, cells).expect("square grid");
    let conditions = relevant
        .iter()
        .map(|&c| Condition::new(c, Op::Equals, wanted(c)).expect("non-empty value"))
        .collect();
    let ann = Annotation::new(conditions, [first].into(), vec![]).expect("answer column present");
    (table, ann)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template() -> PromptTemplate {
        PromptTemplate::default()
    }

    fn table(rows: usize, cols: usize) -> Table {
        Table::new(
            (0..cols).map(|c| format!("h{c}")).collect(),
            (0..rows)
                .map(|r| (0..cols).map(|c| format!("r{r}c{c}")).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn one_pair_per_window() {
        let t = table(6, 5);
        let ann = Annotation::new(vec![], [4].into(), vec![]).unwrap();
        let q = Question::new("q").unwrap();
        let pairs = generate_pairs(&t, &q, &ann, WindowConfig::default(), &template(), "t", "q").unwrap();
        assert_eq!(pairs.len(), 6);
        // windows at column origin 0 do not reach column 4
        assert!(pairs.iter().any(|p| !p.is_trainable()));
        assert!(pairs.iter().filter(|p| p.is_trainable()).all(|p| p.bucket() == (4, 1)));
    }

    #[test]
    fn uniform_spec_has_w_times_w_plus_one_buckets() {
        let spec = BucketSpec::uniform(4, 3);
        assert_eq!(spec.counts.len(), 20);
        assert!(spec.counts.keys().all(|&(m, n)| m <= 4 && (1..=4).contains(&n)));
    }

    #[test]
    fn synthetic_examples_hit_their_bucket() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = Question::new("q").unwrap();
        for m in 0..=4 {
            for n in 1..=4 {
                let (t, ann) = synthesize_example(4, (m, n), &mut rng);
                let pairs = generate_pairs(&t, &q, &ann, WindowConfig::default(), &template(), "s", "s").unwrap();
                assert_eq!(pairs.len(), 1);
                assert_eq!(pairs[0].bucket(), (m, n));
            }
        }
    }

    fn supply_pairs(per_bucket: usize, only: Option<Bucket>) -> Vec<TrainingPair> {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = Question::new("q").unwrap();
        let spec = BucketSpec::uniform(4, 0);
        let mut pairs = Vec::new();
        for &bucket in spec.counts.keys() {
            if only.is_some_and(|b| b != bucket) {
                continue;
            }
            for i in 0..per_bucket {
                let (t, ann) = synthesize_example(4, bucket, &mut rng);
                let id = format!("{bucket:?}-{i}");
                pairs.extend(generate_pairs(&t, &q, &ann, WindowConfig::default(), &template(), &id, &id).unwrap());
            }
        }
        pairs
    }

    #[test]
    fn balance_is_exact_with_ample_supply() {
        let pairs = supply_pairs(5, None);
        let (out, hist) = balance_pairs(pairs, &BucketSpec::uniform(4, 3), 11);
        assert_eq!(out.len(), 60);
        assert_eq!(hist.len(), 20);
        assert!(hist.values().all(|&v| v == 3));
    }

    #[test]
    fn single_bucket_input() {
        let pairs = supply_pairs(2, Some((2, 3)));
        let (out, hist) = balance_pairs(pairs, &BucketSpec::uniform(4, 5), 0);
        assert_eq!(out.len(), 2);
        assert_eq!(hist["(2,3)"], 2);
        assert_eq!(hist.values().sum::<usize>(), 2);
    }

    #[test]
    fn balance_is_seeded() {
        let a = balance_pairs(supply_pairs(4, None), &BucketSpec::uniform(4, 2), 99).0;
        let b = balance_pairs(supply_pairs(4, None), &BucketSpec::uniform(4, 2), 99).0;
        let c = balance_pairs(supply_pairs(4, None), &BucketSpec::uniform(4, 2), 100).0;
        let ids = |v: &[TrainingPair]| v.iter().map(|p| p.table_id.clone()).collect::<Vec<_>>();
        assert_eq!(ids(&a), ids(&b));
        assert_ne!(ids(&a), ids(&c));
    }

    #[test]
    fn augmentation_adds_duplicates() {
        let t = Table::new(
            vec!["Team".into(), "Rival".into()],
            vec![
                vec!["Ajax".into(), "PSV".into()],
                vec!["PSV".into(), "Ajax".into()],
                vec!["AZ".into(), "Twente".into()],
            ],
        )
        .unwrap();
        let ann = Annotation::new(vec![Condition::new(0, Op::Equals, "psv").unwrap()], [0].into(), vec![]).unwrap();
        let q = Question::new("q").unwrap();
        let pairs = generate_pairs(&t, &q, &ann, WindowConfig::default(), &template(), "t", "q").unwrap();
        assert_eq!(pairs[0].selection.cells().len(), 1);
        let (out, stats) = augment_same_value(pairs);
        assert_eq!(stats.changed, 1);
        assert!(out[0].augmented);
        assert!(out[0].selection.cells().contains(&(0, 1)));
        assert_eq!(out[0].bucket(), (2, 2));
    }

    #[test]
    fn augmentation_noop_on_distinct_values() {
        let t = table(4, 4);
        let ann = Annotation::new(vec![Condition::new(1, Op::Equals, "r2c1").unwrap()], [3].into(), vec![]).unwrap();
        let q = Question::new("q").unwrap();
        let pairs = generate_pairs(&t, &q, &ann, WindowConfig::default(), &template(), "t", "q").unwrap();
        let (out, stats) = augment_same_value(pairs.clone());
        assert_eq!(out, pairs);
        assert_eq!(stats.changed, 0);
        assert_eq!(stats.fraction_changed, 0.0);
    }
}
