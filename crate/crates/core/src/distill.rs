//! Knowledge distillation from a multiclass teacher into a small student.
//!
//! The student is boosted against the blended target
//! `q = (alpha * y + beta * softmax(t / T)) / (alpha + beta)`, where `y` is
//! the one-hot label and `t` the teacher logits. Cross-entropy to `q` has
//! gradient `p - q`, which is the gradient of the weighted hard and soft
//! losses up to a constant factor.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::SampleTable;
use crate::error::{Error, Result};
use crate::gbdt::{
    one_hot, softmax_in_place, train, BoostedModel, FeatureMatrix, GbdtParams, Objective,
    TrainData, TrainOutput,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KDConfig {
    pub alpha: f64,
    pub beta: f64,
    pub temperature: f64,
    /// Mixed into the teacher-logit cache key.
    pub cache_salt: u64,
    pub student_params: GbdtParams,
}

impl Default for KDConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.5,
            temperature: 2.0,
            cache_salt: 0,
            student_params: GbdtParams::student(7),
        }
    }
}

impl KDConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.beta >= 0.0 && self.alpha + self.beta > 0.0) {
            return Err(Error::Config(format!(
                "need alpha, beta >= 0 with alpha + beta > 0, got {} and {}",
                self.alpha, self.beta
            )));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::Config(format!(
                "temperature must be > 0, got {}",
                self.temperature
            )));
        }
        self.student_params.validate()
    }
}

/// Temperature-scaled softmax.
pub fn soften(logits: &[f64], temperature: f64) -> Vec<f64> {
    let mut z: Vec<f64> = logits.iter().map(|x| x / temperature).collect();
    softmax_in_place(&mut z);
    z
}

/// Blended target for one row.
pub fn kd_targets(y: &[f64], teacher_logits: &[f64], cfg: &KDConfig) -> Result<Vec<f64>> {
    if y.len() != teacher_logits.len() {
        return Err(Error::Dimension(format!(
            "label has {} classes, teacher logits {}",
            y.len(),
            teacher_logits.len()
        )));
    }
    let soft = soften(teacher_logits, cfg.temperature);
    let w = cfg.alpha + cfg.beta;
    Ok(y.iter()
        .zip(&soft)
        .map(|(&h, &s)| (cfg.alpha * h + cfg.beta * s) / w)
        .collect())
}

/// Summary written next to the student model.
#[derive(Debug, Clone, PartialEq)]
pub struct DistillReport {
    pub teacher_size_bytes: u64,
    pub student_size_bytes: u64,
    pub size_reduction_pct: f64,
    pub argmax_agreement_pct: f64,
    pub accuracy_teacher: f64,
    pub accuracy_student: f64,
}

impl DistillReport {
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "teacher_size_bytes={}", self.teacher_size_bytes);
        let _ = writeln!(s, "student_size_bytes={}", self.student_size_bytes);
        let _ = writeln!(s, "size_reduction_pct={:.4}", self.size_reduction_pct);
        let _ = writeln!(s, "argmax_agreement_pct={:.4}", self.argmax_agreement_pct);
        let _ = writeln!(s, "accuracy_teacher={:.6}", self.accuracy_teacher);
        let _ = writeln!(s, "accuracy_student={:.6}", self.accuracy_student);
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_kv()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone)]
pub struct DistillOutput {
    pub student: TrainOutput,
    pub report: DistillReport,
}

fn teacher_logits(teacher: &BoostedModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    teacher.predict_raw_matrix(x)
}

fn cache_key(teacher_text: &str, x: &FeatureMatrix, salt: u64) -> String {
    let mut h = Sha256::new();
    h.update(teacher_text.as_bytes());
    h.update((x.n_rows() as u64).to_le_bytes());
    h.update((x.n_features() as u64).to_le_bytes());
    for f in 0..x.n_features() {
        for v in x.column(f) {
            h.update(v.to_le_bytes());
        }
    }
    h.update(salt.to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Teacher logits over `x`, reused from `cache_dir` when a file keyed by
/// the teacher and data hashes exists.
pub fn cached_teacher_logits(
    teacher: &BoostedModel,
    x: &FeatureMatrix,
    cache_dir: Option<&Path>,
    salt: u64,
) -> Result<Vec<f64>> {
    let Some(dir) = cache_dir else {
        return teacher_logits(teacher, x);
    };
    let key = cache_key(&teacher.to_text(), x, salt);
    let path: PathBuf = dir.join(format!("teacher_logits_{key}.bin"));
    let expected = x.n_rows() * teacher.n_outputs();
    if let Ok(bytes) = std::fs::read(&path) {
        if bytes.len() == expected * 8 {
            return Ok(bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect());
        }
    }
    let logits = teacher_logits(teacher, x)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let bytes: Vec<u8> = logits.iter().flat_map(|v| v.to_le_bytes()).collect();
    std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(logits)
}

fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

/// Trains a student against blended teacher targets.
///
/// Early stopping, when `valid` is given, uses the hard validation labels,
/// and the report's agreement and accuracy figures are measured on it
/// (falling back to the training rows).
pub fn distill(
    teacher: &BoostedModel,
    train_set: &SampleTable,
    valid: Option<&SampleTable>,
    cfg: &KDConfig,
    cache_dir: Option<&Path>,
) -> Result<DistillOutput> {
    cfg.validate()?;
    if teacher.params.objective != Objective::Multiclass {
        return Err(Error::Config(
            "distillation needs a multiclass teacher".into(),
        ));
    }
    let k = teacher.params.num_class;
    let sp = &cfg.student_params;
    if sp.objective != Objective::Multiclass || sp.num_class != k {
        return Err(Error::Config(format!(
            "student must be multiclass with {k} classes, got {:?} with {}",
            sp.objective, sp.num_class
        )));
    }
    if train_set.feature_names() != teacher.feature_names {
        return Err(Error::Schema(
            "training columns differ from the teacher's".into(),
        ));
    }

    let x = FeatureMatrix::from_rows(&train_set.features());
    let y = one_hot(&train_set.labels_multi()?, k)?;
    let t = cached_teacher_logits(teacher, &x, cache_dir, cfg.cache_salt)?;
    let q: Vec<f64> = y
        .par_chunks(k)
        .zip(t.par_chunks(k))
        .map(|(y, t)| kd_targets(y, t, cfg))
        .collect::<Result<Vec<_>>>()?
        .concat();

    let v = match valid {
        Some(tab) => Some((
            FeatureMatrix::from_rows(&tab.features()),
            one_hot(&tab.labels_multi()?, k)?,
        )),
        None => None,
    };
    let student = train(
        sp,
        train_set.feature_names(),
        TrainData { x: &x, targets: &q },
        v.as_ref().map(|(x, y)| TrainData { x, targets: y }),
    )?;

    let eval_table = valid.unwrap_or(train_set);
    let rows = eval_table.features();
    let truth = eval_table.labels_multi()?;
    let tp = teacher.predict_classes(&rows)?;
    let spred = student.model.predict_classes(&rows)?;
    let teacher_size = teacher.to_text().len() as u64;
    let student_size = student.model.to_text().len() as u64;
    let report = DistillReport {
        teacher_size_bytes: teacher_size,
        student_size_bytes: student_size,
        size_reduction_pct: 100.0 * (1.0 - student_size as f64 / teacher_size as f64),
        argmax_agreement_pct: 100.0 * accuracy(&spred, &tp),
        accuracy_teacher: accuracy(&tp, &truth),
        accuracy_student: accuracy(&spred, &truth),
    };
    Ok(DistillOutput { student, report })
}
