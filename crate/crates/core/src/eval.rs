//! Classification metrics, feature-group ablation, latency and size
//! accounting, and the point-wise demo reports.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{SampleTable, TIME};
use crate::error::{Error, Result};
use crate::gbdt::{train_table, BoostedModel, GbdtParams, Objective};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub n_classes: usize,
    pub n_samples: usize,
    pub accuracy: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub support: Vec<usize>,
    /// Mean F1 over classes with non-zero support.
    pub macro_f1: f64,
    pub weighted_f1: f64,
    /// `confusion[truth][pred]`.
    pub confusion: Vec<Vec<usize>>,
    /// Classes left out of the macro average for lack of support.
    pub excluded_classes: Vec<usize>,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn compute_metrics(pred: &[usize], labels: &[usize], k: usize) -> Result<MetricsReport> {
    if pred.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} labels",
            pred.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::Empty("no samples to score".into()));
    }
    let mut confusion = vec![vec![0usize; k]; k];
    for (&p, &y) in pred.iter().zip(labels) {
        if p >= k || y >= k {
            return Err(Error::Dimension(format!("class index outside 0..{k}")));
        }
        confusion[y][p] += 1;
    }
    let n = labels.len();
    let support: Vec<usize> = confusion.iter().map(|r| r.iter().sum()).collect();
    let predicted: Vec<usize> = (0..k)
        .map(|c| confusion.iter().map(|r| r[c]).sum())
        .collect();
    let tp: Vec<usize> = (0..k).map(|c| confusion[c][c]).collect();
    let precision: Vec<f64> = (0..k).map(|c| ratio(tp[c], predicted[c])).collect();
    let recall: Vec<f64> = (0..k).map(|c| ratio(tp[c], support[c])).collect();
    let f1: Vec<f64> = (0..k)
        .map(|c| {
            let s = precision[c] + recall[c];
            if s > 0.0 {
                2.0 * precision[c] * recall[c] / s
            } else {
                0.0
            }
        })
        .collect();
    let present: Vec<usize> = (0..k).filter(|&c| support[c] > 0).collect();
    let excluded_classes: Vec<usize> = (0..k).filter(|&c| support[c] == 0).collect();
    let macro_f1 = present.iter().map(|&c| f1[c]).sum::<f64>() / present.len() as f64;
    let weighted_f1 = (0..k).map(|c| f1[c] * support[c] as f64).sum::<f64>() / n as f64;
    Ok(MetricsReport {
        n_classes: k,
        n_samples: n,
        accuracy: ratio(tp.iter().sum(), n),
        precision,
        recall,
        f1,
        support,
        macro_f1,
        weighted_f1,
        confusion,
        excluded_classes,
    })
}

impl MetricsReport {
    /// Per-class rows followed by the aggregate scores.
    pub fn to_csv(&self, class_names: &[String]) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["class", "precision", "recall", "f1", "support"])?;
        for c in 0..self.n_classes {
            w.write_record([
                class_name(class_names, c),
                format!("{:.6}", self.precision[c]),
                format!("{:.6}", self.recall[c]),
                format!("{:.6}", self.f1[c]),
                self.support[c].to_string(),
            ])?;
        }
        let n = self.n_samples.to_string();
        for (name, v) in [
            ("accuracy", self.accuracy),
            ("macro_f1", self.macro_f1),
            ("weighted_f1", self.weighted_f1),
        ] {
            w.write_record([
                name.to_string(),
                String::new(),
                String::new(),
                format!("{v:.6}"),
                n.clone(),
            ])?;
        }
        finish(w)
    }

    /// Confusion matrix with truth rows and predicted columns.
    pub fn confusion_csv(&self, class_names: &[String]) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["truth\\pred".to_string()];
        header.extend((0..self.n_classes).map(|c| class_name(class_names, c)));
        w.write_record(&header)?;
        for (c, row) in self.confusion.iter().enumerate() {
            let mut rec = vec![class_name(class_names, c)];
            rec.extend(row.iter().map(usize::to_string));
            w.write_record(&rec)?;
        }
        finish(w)
    }
}

fn class_name(names: &[String], c: usize) -> String {
    names.get(c).cloned().unwrap_or_else(|| c.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io("<memory>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Labels matching the model's objective.
pub fn labels_for(model: &BoostedModel, table: &SampleTable) -> Result<Vec<usize>> {
    match model.params.objective {
        Objective::Binary => table.labels_bin(),
        Objective::Multiclass => table.labels_multi(),
    }
}

/// Scores `model` on a labelled table.
pub fn evaluate(model: &BoostedModel, table: &SampleTable) -> Result<MetricsReport> {
    let pred = model.predict_classes(&table.features())?;
    compute_metrics(&pred, &labels_for(model, table)?, model.n_classes())
}

/// Named, disjoint groups of feature columns.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationSpec {
    pub groups: Vec<(String, Vec<String>)>,
}

impl AblationSpec {
    /// The five measurement groups: P, Q, f, V and I.
    pub fn standard(feature_names: &[String]) -> Self {
        let pick = |pred: &dyn Fn(&str) -> bool| -> Vec<String> {
            feature_names.iter().filter(|n| pred(n)).cloned().collect()
        };
        Self {
            groups: vec![
                ("P".into(), pick(&|n| n.starts_with("P_"))),
                ("Q".into(), pick(&|n| n.starts_with("Q_"))),
                ("f".into(), pick(&|n| n.starts_with("f_"))),
                ("V".into(), pick(&|n| n.starts_with('V'))),
                ("I".into(), pick(&|n| n.starts_with('I'))),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    /// `"none"` for the baseline.
    pub removed: String,
    pub macro_f1: f64,
    /// Baseline macro F1 minus this row's; positive means worse.
    pub drop: f64,
}

/// Retrains without each group and reports the macro-F1 change against a
/// full-feature baseline. Every run uses the same params and seed.
pub fn run_ablation(
    train: &SampleTable,
    valid: &SampleTable,
    test: &SampleTable,
    params: &GbdtParams,
    spec: &AblationSpec,
) -> Result<Vec<AblationRow>> {
    let names = train.feature_names();
    for (g, cols) in &spec.groups {
        if cols.is_empty() {
            return Err(Error::Schema(format!("ablation group `{g}` is empty")));
        }
        if let Some(c) = cols.iter().find(|c| !names.contains(c)) {
            return Err(Error::Schema(format!(
                "ablation group `{g}` names unknown column `{c}`"
            )));
        }
    }
    let score = |tr: &SampleTable, va: &SampleTable, te: &SampleTable| -> Result<f64> {
        let out = train_table(params, tr, Some(va))?;
        Ok(evaluate(&out.model, te)?.macro_f1)
    };
    let base = score(train, valid, test)?;
    let mut rows = vec![AblationRow {
        removed: "none".into(),
        macro_f1: base,
        drop: 0.0,
    }];
    for (g, cols) in &spec.groups {
        let f1 = score(
            &train.drop_columns(cols)?,
            &valid.drop_columns(cols)?,
            &test.drop_columns(cols)?,
        )?;
        rows.push(AblationRow {
            removed: g.clone(),
            macro_f1: f1,
            drop: base - f1,
        });
    }
    Ok(rows)
}

pub fn ablation_csv(rows: &[AblationRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["removed_group", "macro_f1", "drop", "drop_pct"])?;
    for r in rows {
        w.write_record([
            r.removed.clone(),
            format!("{:.6}", r.macro_f1),
            format!("{:.6}", r.drop),
            format!("{:.4}", 100.0 * r.drop),
        ])?;
    }
    finish(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyReport {
    pub model_id: String,
    pub batch: usize,
    /// Warm repetitions kept after discarding the warm-up runs.
    pub repetitions: usize,
    pub per_rep_ms: Vec<f64>,
    pub median_ms_per_batch: f64,
    pub per_sample_us: f64,
    pub threads: usize,
}

pub const WARMUP_RUNS: usize = 2;

impl LatencyReport {
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model_id={}", self.model_id);
        let _ = writeln!(s, "batch={}", self.batch);
        let _ = writeln!(s, "repetitions={}", self.repetitions);
        let _ = writeln!(s, "threads={}", self.threads);
        let _ = writeln!(
            s,
            "median_ms_per_{}={:.6}",
            self.batch, self.median_ms_per_batch
        );
        let _ = writeln!(s, "per_sample_us={:.6}", self.per_sample_us);
        let reps: Vec<String> = self.per_rep_ms.iter().map(|x| format!("{x:.6}")).collect();
        let _ = writeln!(s, "per_rep_ms={}", reps.join(" "));
        s
    }
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Times single-threaded, one-row-at-a-time prediction over the first
/// `batch` rows. `reps` warm runs are kept after [`WARMUP_RUNS`] discarded
/// ones.
pub fn bench_latency(
    model: &BoostedModel,
    model_id: &str,
    rows: &[Vec<f64>],
    batch: usize,
    reps: usize,
) -> Result<LatencyReport> {
    if batch == 0 || rows.len() < batch {
        return Err(Error::Empty(format!(
            "need {batch} rows for the latency batch, have {}",
            rows.len()
        )));
    }
    if reps == 0 {
        return Err(Error::Config("latency repetitions must be >= 1".into()));
    }
    if let Some(r) = rows.iter().find(|r| r.len() != model.num_features) {
        return Err(Error::Dimension(format!(
            "row has {} features, model expects {}",
            r.len(),
            model.num_features
        )));
    }
    let batch_rows = &rows[..batch];
    let mut scratch = vec![0.0; model.n_outputs()];
    let mut per_rep_ms = Vec::with_capacity(reps);
    for run in 0..reps + WARMUP_RUNS {
        let t0 = Instant::now();
        let mut acc = 0usize;
        for r in batch_rows {
            acc = acc
                .wrapping_add(model.predict_class_unchecked(std::hint::black_box(r), &mut scratch));
        }
        std::hint::black_box(acc);
        let ms = t0.elapsed().as_secs_f64() * 1e3;
        if run >= WARMUP_RUNS {
            per_rep_ms.push(ms);
        }
    }
    let med = median(&per_rep_ms);
    Ok(LatencyReport {
        model_id: model_id.to_string(),
        batch,
        repetitions: reps,
        per_rep_ms,
        median_ms_per_batch: med,
        per_sample_us: med * 1e3 / batch as f64,
        threads: 1,
    })
}

pub fn model_size(path: impl AsRef<Path>) -> Result<u64> {
    let path = path.as_ref();
    std::fs::metadata(path)
        .map(|m| m.len())
        .map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoRow {
    pub row: usize,
    pub time: f64,
    pub predicted: usize,
    pub probability: f64,
    pub truth: usize,
}

impl DemoRow {
    pub fn matched(&self) -> bool {
        self.predicted == self.truth
    }
}

/// Classifies `n` seeded random rows one at a time.
pub fn realtime_demo(
    model: &BoostedModel,
    test: &SampleTable,
    n: usize,
    seed: u64,
) -> Result<Vec<DemoRow>> {
    if n > test.n_rows() {
        return Err(Error::Config(format!(
            "asked for {n} demo rows, table has {}",
            test.n_rows()
        )));
    }
    let truth = labels_for(model, test)?;
    let feat = test.feature_indices();
    let t_idx = test.require_column(TIME)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample(&mut rng, test.n_rows(), n)
        .into_iter()
        .map(|i| {
            let r = test.row(i);
            let x: Vec<f64> = feat.iter().map(|&c| r[c]).collect();
            let p = model.predict_proba(&x)?;
            let predicted = crate::gbdt::argmax_class(&p);
            Ok(DemoRow {
                row: i,
                time: r[t_idx],
                predicted,
                probability: p[predicted],
                truth: truth[i],
            })
        })
        .collect()
}

pub fn demo_csv(rows: &[DemoRow], class_names: &[String]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["row", "time", "predicted", "probability", "truth", "match"])?;
    for d in rows {
        w.write_record([
            d.row.to_string(),
            d.time.to_string(),
            class_name(class_names, d.predicted),
            format!("{:.6}", d.probability),
            class_name(class_names, d.truth),
            d.matched().to_string(),
        ])?;
    }
    finish(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub truth: usize,
    pub teacher: usize,
    pub student: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdTrajectory {
    pub points: Vec<TrajectoryPoint>,
    pub agreement_pct: f64,
}

impl KdTrajectory {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["time", "truth", "teacher", "student"])?;
        for p in &self.points {
            w.write_record([
                p.time.to_string(),
                p.truth.to_string(),
                p.teacher.to_string(),
                p.student.to_string(),
            ])?;
        }
        finish(w)
    }
}

/// Truth, teacher and student classes over a row window of a time-ordered
/// test table, plus teacher/student agreement in that window.
pub fn kd_trajectory_report(
    teacher: &BoostedModel,
    student: &BoostedModel,
    test: &SampleTable,
    window: std::ops::Range<usize>,
) -> Result<KdTrajectory> {
    if window.is_empty() || window.end > test.n_rows() {
        return Err(Error::Empty(format!(
            "trajectory window {window:?} is empty or exceeds {} rows",
            test.n_rows()
        )));
    }
    let idx: Vec<usize> = window.collect();
    let sub = test.select_rows(&idx);
    let rows = sub.features();
    let tp = teacher.predict_classes(&rows)?;
    let sp = student.predict_classes(&rows)?;
    let truth = sub.labels_multi()?;
    let t_idx = sub.require_column(TIME)?;
    let points: Vec<TrajectoryPoint> = (0..sub.n_rows())
        .map(|i| TrajectoryPoint {
            time: sub.row(i)[t_idx],
            truth: truth[i],
            teacher: tp[i],
            student: sp[i],
        })
        .collect();
    let agree = points.iter().filter(|p| p.teacher == p.student).count();
    Ok(KdTrajectory {
        agreement_pct: 100.0 * agree as f64 / points.len() as f64,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let y = [0, 1, 2, 2, 1, 0];
        let m = compute_metrics(&y, &y, 3).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert!(m.f1.iter().all(|&f| f == 1.0));
        for (i, r) in m.confusion.iter().enumerate() {
            for (j, &c) in r.iter().enumerate() {
                assert_eq!(c > 0, i == j);
            }
        }
    }

    #[test]
    fn hand_computed_example() {
        let m = compute_metrics(&[0, 1, 1, 1], &[0, 0, 1, 1], 2).unwrap();
        assert_eq!(m.accuracy, 0.75);
        assert!((m.f1[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.f1[1] - 0.8).abs() < 1e-12);
        assert!((m.macro_f1 - 0.733_333_333_333).abs() < 1e-9);
    }

    #[test]
    fn unpredicted_class_scores_zero() {
        let m = compute_metrics(&[0, 0, 0], &[0, 1, 1], 2).unwrap();
        assert_eq!(m.precision[1], 0.0);
        assert_eq!(m.f1[1], 0.0);
        assert!(m.macro_f1.is_finite());
    }

    #[test]
    fn zero_support_excluded_from_macro() {
        let m = compute_metrics(&[0, 1], &[0, 1], 3).unwrap();
        assert_eq!(m.excluded_classes, vec![2]);
        assert_eq!(m.macro_f1, 1.0);
    }

    #[test]
    fn equal_support_weighted_equals_macro() {
        let m = compute_metrics(&[0, 1, 1, 0, 2, 0], &[0, 0, 1, 1, 2, 2], 3).unwrap();
        assert!((m.macro_f1 - m.weighted_f1).abs() < 1e-12);
    }

    #[test]
    fn metric_errors() {
        assert!(matches!(
            compute_metrics(&[0], &[0, 1], 2),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(compute_metrics(&[], &[], 2), Err(Error::Empty(_))));
    }

    #[test]
    fn confusion_csv_shape() {
        let m = compute_metrics(&[0, 1, 1], &[0, 1, 0], 2).unwrap();
        let csv = m.confusion_csv(&["a".into(), "b".into()]).unwrap();
        assert_eq!(csv, "truth\\pred,a,b\na,1,1\nb,0,1\n");
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
