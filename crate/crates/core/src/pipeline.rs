//! End-to-end orchestration driven by a single TOML file.
//!
//! Every stage reads its inputs from and writes its outputs to the
//! directories named in [`PathsConfig`], so stages can run as separate
//! commands or back to back in one process.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{AttackMode, AttackSpec};
use crate::dataset::{
    apply_prep_flags, class_names, downsample, fit_norm_stats, merge, normalize, stratified_split,
    NormStats, PrepFlags, SampleTable, SplitSpec, DEFAULT_ONSET_WINDOW,
};
use crate::distill::{distill, DistillOutput, KDConfig};
use crate::error::{Error, Result};
use crate::eval::{
    ablation_csv, bench_latency, demo_csv, evaluate, kd_trajectory_report, realtime_demo,
    run_ablation, AblationRow, AblationSpec, DemoRow, KdTrajectory, LatencyReport, MetricsReport,
};
use crate::gbdt::{train_table, BoostedModel, GbdtParams, Objective, TrainOutput};
use crate::sim::{run_scenario, SimConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Scenario CSVs and reports.
    pub out_dir: PathBuf,
    pub dataset_dir: PathBuf,
    pub model_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self {
            out_dir: "out".into(),
            dataset_dir: "out/dataset".into(),
            model_dir: "out/models".into(),
        }
    }
}

impl PathsConfig {
    /// Puts every directory under `root`.
    pub fn under(root: impl AsRef<Path>) -> Self {
        let root = root.as_ref();
        Self {
            out_dir: root.to_path_buf(),
            dataset_dir: root.join("dataset"),
            model_dir: root.join("models"),
        }
    }

    pub fn scenario_csv(&self, mode: AttackMode) -> PathBuf {
        self.out_dir.join(format!("{}.csv", mode.name()))
    }

    pub fn report_dir(&self) -> PathBuf {
        self.out_dir.join("reports")
    }

    pub fn dataset_csv(&self, split: &str) -> PathBuf {
        self.dataset_dir.join(format!("{split}.csv"))
    }

    pub fn norm_stats(&self) -> PathBuf {
        self.dataset_dir.join("norm_stats.csv")
    }

    pub fn model(&self, kind: ModelKind) -> PathBuf {
        self.model_dir.join(format!("{}.model", kind.name()))
    }

    pub fn logit_cache(&self) -> PathBuf {
        self.model_dir.join("cache")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Binary,
    Multiclass,
    Student,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Binary => "binary",
            ModelKind::Multiclass => "multiclass",
            ModelKind::Student => "student",
        }
    }

    /// The command that produces this model.
    pub fn producer(self) -> &'static str {
        match self {
            ModelKind::Binary => "train --binary",
            ModelKind::Multiclass => "train --multiclass",
            ModelKind::Student => "distill",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub normal_keep_fraction: f64,
    /// Normal rows this close to an onset are always kept, seconds.
    pub onset_window: f64,
    pub seed: u64,
    pub chunk_rows: usize,
    pub split: SplitSpec,
    pub prep: PrepFlags,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            normal_keep_fraction: 0.12,
            onset_window: DEFAULT_ONSET_WINDOW,
            seed: 7,
            chunk_rows: 4096,
            split: SplitSpec::default(),
            prep: PrepFlags::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub latency_batch: usize,
    pub latency_reps: usize,
    pub demo_samples: usize,
    pub demo_seed: u64,
    /// Rows in the teacher/student trajectory window.
    pub trajectory_rows: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            latency_batch: 1000,
            latency_reps: 10,
            demo_samples: 10,
            demo_seed: 11,
            trajectory_rows: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: PathsConfig,
    pub sim: SimConfig,
    pub scenarios: Vec<AttackSpec>,
    pub dataset: DatasetConfig,
    pub binary: GbdtParams,
    pub multiclass: GbdtParams,
    pub kd: KDConfig,
    pub eval: EvalConfig,
}

/// Overlays `over` onto `base`, recursing into tables. Arrays and scalars
/// are replaced whole.
fn merge_tables(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_tables(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// The normal run plus every attack starting at 0.70 s.
pub fn default_scenarios() -> Vec<AttackSpec> {
    AttackMode::ALL
        .iter()
        .map(|&m| match m {
            AttackMode::Normal => AttackSpec::normal(),
            _ => AttackSpec::new(m, 0.7),
        })
        .collect()
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            paths: PathsConfig::default(),
            sim: SimConfig::default(),
            scenarios: default_scenarios(),
            dataset: DatasetConfig::default(),
            binary: GbdtParams::binary(),
            multiclass: GbdtParams::multiclass(AttackMode::ALL.len()),
            kd: KDConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Keys absent from `text` keep their default values. Each section
    /// starts from its own preset, so a partial `[binary]` table is still a
    /// binary booster.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg_err = |e: &dyn std::fmt::Display| Error::Config(e.to_string());
        let user: toml::Table = toml::from_str(text).map_err(|e| cfg_err(&e))?;
        let mut merged: toml::Table =
            toml::from_str(&Self::default().to_toml()).map_err(|e| cfg_err(&e))?;
        merge_tables(&mut merged, user);
        let cfg: Self = toml::Value::Table(merged)
            .try_into()
            .map_err(|e| cfg_err(&e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to toml")
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.scenarios.is_empty() {
            return Err(Error::Config("no scenarios configured".into()));
        }
        let mut seen = BTreeMap::new();
        for s in &self.scenarios {
            s.validate(self.sim.t_end, self.sim.n_dg())?;
            if seen.insert(s.mode, ()).is_some() {
                return Err(Error::Config(format!("scenario {} listed twice", s.mode)));
            }
        }
        if self.binary.objective != Objective::Binary {
            return Err(Error::Config(
                "[binary] must use the binary objective".into(),
            ));
        }
        if self.multiclass.objective != Objective::Multiclass
            || self.multiclass.num_class != AttackMode::ALL.len()
        {
            return Err(Error::Config(format!(
                "[multiclass] must be multiclass with {} classes",
                AttackMode::ALL.len()
            )));
        }
        self.binary.validate()?;
        self.multiclass.validate()?;
        self.kd.validate()?;
        self.dataset.split.validate()?;
        if !(self.dataset.normal_keep_fraction > 0.0 && self.dataset.normal_keep_fraction <= 1.0) {
            return Err(Error::Config(
                "normal_keep_fraction must be in (0, 1]".into(),
            ));
        }
        if self.dataset.chunk_rows == 0 {
            return Err(Error::Config("chunk_rows must be >= 1".into()));
        }
        Ok(())
    }

    /// Overrides every seed with values derived from one master seed.
    pub fn apply_seed(&mut self, seed: u64) {
        self.sim.noise.seed = seed;
        self.dataset.seed = seed.wrapping_add(1);
        self.dataset.split.seed = seed.wrapping_add(2);
        self.binary.seed = seed.wrapping_add(3);
        self.multiclass.seed = seed.wrapping_add(4);
        self.kd.student_params.seed = seed.wrapping_add(5);
        self.eval.demo_seed = seed.wrapping_add(6);
    }

    pub fn scenario(&self, mode: AttackMode) -> Result<&AttackSpec> {
        self.scenarios
            .iter()
            .find(|s| s.mode == mode)
            .ok_or_else(|| Error::Config(format!("scenario {mode} is not configured")))
    }

    pub fn params(&self, kind: ModelKind) -> &GbdtParams {
        match kind {
            ModelKind::Binary => &self.binary,
            ModelKind::Multiclass => &self.multiclass,
            ModelKind::Student => &self.kd.student_params,
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn require(path: &Path, command: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::MissingArtifact {
            path: path.to_path_buf(),
            command: command.to_string(),
        })
    }
}

/// Simulates the given scenarios in parallel; outputs keep input order.
pub fn simulate_scenarios(sim: &SimConfig, specs: &[AttackSpec]) -> Result<Vec<SampleTable>> {
    specs.par_iter().map(|s| run_scenario(sim, s)).collect()
}

/// Simulates and writes `<out_dir>/<mode>.csv`.
pub fn simulate_to_disk(
    cfg: &PipelineConfig,
    specs: &[AttackSpec],
) -> Result<Vec<(PathBuf, SampleTable)>> {
    create_dir(&cfg.paths.out_dir)?;
    let tables = simulate_scenarios(&cfg.sim, specs)?;
    specs
        .iter()
        .zip(tables)
        .map(|(s, t)| {
            let path = cfg.paths.scenario_csv(s.mode);
            t.write_csv(&path)?;
            Ok((path, t))
        })
        .collect()
}

/// Normalized splits and the statistics fitted on the training part.
#[derive(Debug, Clone)]
pub struct DatasetBundle {
    pub train: SampleTable,
    pub valid: SampleTable,
    pub test: SampleTable,
    pub stats: NormStats,
    pub summary: DatasetSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub merged_rows: usize,
    pub kept_rows: usize,
    pub attack_rows_before: usize,
    pub attack_rows_after: usize,
    /// Per split (train, valid, test): rows per multiclass label.
    pub class_counts: [Vec<usize>; 3],
    pub max_abs_train_mean: f64,
}

impl DatasetSummary {
    pub fn to_text(&self) -> String {
        let names = class_names();
        let mut s = String::new();
        let _ = writeln!(s, "merged rows: {}", self.merged_rows);
        let _ = writeln!(s, "kept rows after downsampling: {}", self.kept_rows);
        let _ = writeln!(
            s,
            "attack rows: {} before, {} after",
            self.attack_rows_before, self.attack_rows_after
        );
        for (name, counts) in ["train", "val", "test"].iter().zip(&self.class_counts) {
            let total: usize = counts.iter().sum();
            let parts: Vec<String> = counts
                .iter()
                .enumerate()
                .map(|(c, n)| format!("{}={n}", names.get(c).copied().unwrap_or("?")))
                .collect();
            let _ = writeln!(s, "{name} ({total} rows): {}", parts.join(" "));
        }
        let _ = writeln!(
            s,
            "max |mean| of normalized training features: {:.3e}",
            self.max_abs_train_mean
        );
        s
    }
}

fn class_counts(table: &SampleTable) -> Result<Vec<usize>> {
    let mut c = vec![0; AttackMode::ALL.len()];
    for y in table.labels_multi()? {
        if y >= c.len() {
            return Err(Error::Schema(format!("label {y} outside the class map")));
        }
        c[y] += 1;
    }
    Ok(c)
}

fn attack_rows(table: &SampleTable) -> Result<usize> {
    Ok(table.labels_bin()?.iter().filter(|&&y| y == 1).count())
}

/// Merge, downsample, split, then normalize every split with statistics
/// fitted on the training split only.
pub fn build_dataset(cfg: &DatasetConfig, scenarios: &[SampleTable]) -> Result<DatasetBundle> {
    let merged = merge(scenarios)?;
    let merged = apply_prep_flags(&merged, cfg.prep);
    let kept = downsample(
        &merged,
        cfg.normal_keep_fraction,
        cfg.onset_window,
        cfg.seed,
    )?;
    let (tr, va, te) = stratified_split(&kept, &cfg.split)?;
    let stats = fit_norm_stats(&tr, cfg.chunk_rows)?;
    let train = normalize(&tr, &stats)?;
    let valid = normalize(&va, &stats)?;
    let test = normalize(&te, &stats)?;
    let max_abs_train_mean = train
        .feature_indices()
        .iter()
        .map(|&c| {
            let n = train.n_rows() as f64;
            (train.column(c).sum::<f64>() / n).abs()
        })
        .fold(0.0, f64::max);
    let summary = DatasetSummary {
        merged_rows: merged.n_rows(),
        kept_rows: kept.n_rows(),
        attack_rows_before: attack_rows(&merged)?,
        attack_rows_after: attack_rows(&kept)?,
        class_counts: [
            class_counts(&train)?,
            class_counts(&valid)?,
            class_counts(&test)?,
        ],
        max_abs_train_mean,
    };
    Ok(DatasetBundle {
        train,
        valid,
        test,
        stats,
        summary,
    })
}

/// Reads every configured scenario CSV.
pub fn load_scenarios(cfg: &PipelineConfig) -> Result<Vec<SampleTable>> {
    cfg.scenarios
        .iter()
        .map(|s| {
            let path = cfg.paths.scenario_csv(s.mode);
            require(&path, &format!("simulate --scenario {}", s.mode))?;
            SampleTable::read_csv(&path)
        })
        .collect()
}

pub fn write_dataset(paths: &PathsConfig, bundle: &DatasetBundle) -> Result<()> {
    create_dir(&paths.dataset_dir)?;
    bundle.train.write_csv(paths.dataset_csv("train"))?;
    bundle.valid.write_csv(paths.dataset_csv("val"))?;
    bundle.test.write_csv(paths.dataset_csv("test"))?;
    bundle.stats.write_csv(paths.norm_stats())?;
    write_text(
        &paths.dataset_dir.join("summary.txt"),
        &bundle.summary.to_text(),
    )
}

/// The (train, valid, test) splits written by the dataset stage.
pub fn load_splits(paths: &PathsConfig) -> Result<(SampleTable, SampleTable, SampleTable)> {
    let mut out = Vec::with_capacity(3);
    for s in ["train", "val", "test"] {
        let p = paths.dataset_csv(s);
        require(&p, "dataset")?;
        out.push(SampleTable::read_csv(&p)?);
    }
    let te = out.pop().expect("three splits");
    let va = out.pop().expect("three splits");
    let tr = out.pop().expect("three splits");
    Ok((tr, va, te))
}

pub fn load_model(paths: &PathsConfig, kind: ModelKind) -> Result<BoostedModel> {
    let p = paths.model(kind);
    require(&p, kind.producer())?;
    BoostedModel::load(&p)
}

/// Trains the binary or multiclass detector and writes the model and its
/// training log.
pub fn train_stage(
    cfg: &PipelineConfig,
    kind: ModelKind,
    train: &SampleTable,
    valid: &SampleTable,
) -> Result<TrainOutput> {
    let out = train_table(cfg.params(kind), train, Some(valid))?;
    create_dir(&cfg.paths.model_dir)?;
    out.model.save(cfg.paths.model(kind))?;
    write_text(
        &cfg.paths
            .model_dir
            .join(format!("{}_train_log.csv", kind.name())),
        &out.log_csv(),
    )?;
    Ok(out)
}

pub fn distill_stage(
    cfg: &PipelineConfig,
    teacher: &BoostedModel,
    train: &SampleTable,
    valid: &SampleTable,
) -> Result<DistillOutput> {
    let out = distill(
        teacher,
        train,
        Some(valid),
        &cfg.kd,
        Some(&cfg.paths.logit_cache()),
    )?;
    create_dir(&cfg.paths.model_dir)?;
    let student_path = cfg.paths.model(ModelKind::Student);
    out.student.model.save(&student_path)?;
    create_dir(&cfg.paths.report_dir())?;
    out.report
        .write(cfg.paths.report_dir().join("distill_report.txt"))?;
    write_text(
        &cfg.paths.model_dir.join("student_train_log.csv"),
        &out.student.log_csv(),
    )?;
    Ok(out)
}

fn class_labels(kind: ModelKind) -> Vec<String> {
    match kind {
        ModelKind::Binary => vec!["Normal".into(), "Attack".into()],
        _ => class_names().into_iter().map(String::from).collect(),
    }
}

/// Writes metrics and confusion CSVs for one model on the test split.
pub fn eval_model(
    paths: &PathsConfig,
    kind: ModelKind,
    model: &BoostedModel,
    test: &SampleTable,
) -> Result<MetricsReport> {
    let m = evaluate(model, test)?;
    let names = class_labels(kind);
    let dir = paths.report_dir();
    write_text(
        &dir.join(format!("{}_metrics.csv", kind.name())),
        &m.to_csv(&names)?,
    )?;
    write_text(
        &dir.join(format!("{}_confusion.csv", kind.name())),
        &m.confusion_csv(&names)?,
    )?;
    Ok(m)
}

pub fn demo_stage(
    cfg: &PipelineConfig,
    model: &BoostedModel,
    test: &SampleTable,
) -> Result<Vec<DemoRow>> {
    let rows = realtime_demo(model, test, cfg.eval.demo_samples, cfg.eval.demo_seed)?;
    let names = class_labels(ModelKind::Multiclass);
    write_text(
        &cfg.paths.report_dir().join("realtime_demo.csv"),
        &demo_csv(&rows, &names)?,
    )?;
    Ok(rows)
}

/// Row window of `len` rows centred on the first normal-to-attack
/// transition in the table.
pub fn onset_window_rows(test: &SampleTable, len: usize) -> Result<std::ops::Range<usize>> {
    let y = test.labels_multi()?;
    let n = y.len();
    let len = len.min(n);
    let at = (1..n).find(|&i| y[i] != 0 && y[i - 1] == 0).unwrap_or(0);
    let start = at.saturating_sub(len / 2).min(n - len);
    Ok(start..start + len)
}

pub fn trajectory_stage(
    cfg: &PipelineConfig,
    teacher: &BoostedModel,
    student: &BoostedModel,
    test: &SampleTable,
) -> Result<KdTrajectory> {
    let window = onset_window_rows(test, cfg.eval.trajectory_rows)?;
    let traj = kd_trajectory_report(teacher, student, test, window)?;
    let dir = cfg.paths.report_dir();
    write_text(&dir.join("kd_trajectory.csv"), &traj.to_csv()?)?;
    Ok(traj)
}

pub fn ablation_stage(
    cfg: &PipelineConfig,
    train: &SampleTable,
    valid: &SampleTable,
    test: &SampleTable,
) -> Result<Vec<AblationRow>> {
    let spec = AblationSpec::standard(&train.feature_names());
    let rows = run_ablation(train, valid, test, &cfg.multiclass, &spec)?;
    write_text(
        &cfg.paths.report_dir().join("ablation.csv"),
        &ablation_csv(&rows)?,
    )?;
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub teacher: LatencyReport,
    pub student: LatencyReport,
    pub teacher_bytes: u64,
    pub student_bytes: u64,
}

impl BenchResult {
    pub fn latency_ratio(&self) -> f64 {
        self.student.median_ms_per_batch / self.teacher.median_ms_per_batch
    }

    pub fn size_ratio(&self) -> f64 {
        self.student_bytes as f64 / self.teacher_bytes as f64
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "teacher_bytes={}", self.teacher_bytes);
        let _ = writeln!(s, "student_bytes={}", self.student_bytes);
        let _ = writeln!(s, "size_ratio={:.6}", self.size_ratio());
        let _ = writeln!(
            s,
            "teacher_ms_per_{}={:.6}",
            self.teacher.batch, self.teacher.median_ms_per_batch
        );
        let _ = writeln!(
            s,
            "student_ms_per_{}={:.6}",
            self.student.batch, self.student.median_ms_per_batch
        );
        let _ = writeln!(s, "latency_ratio={:.6}", self.latency_ratio());
        s
    }
}

/// Latency of teacher and student on the test split plus file sizes.
pub fn bench_stage(cfg: &PipelineConfig, test: &SampleTable) -> Result<BenchResult> {
    let teacher = load_model(&cfg.paths, ModelKind::Multiclass)?;
    let student = load_model(&cfg.paths, ModelKind::Student)?;
    let rows = test.features();
    let (batch, reps) = (cfg.eval.latency_batch, cfg.eval.latency_reps);
    let t = bench_latency(&teacher, "multiclass", &rows, batch, reps)?;
    let s = bench_latency(&student, "student", &rows, batch, reps)?;
    let size = |k| crate::eval::model_size(cfg.paths.model(k));
    let res = BenchResult {
        teacher: t,
        student: s,
        teacher_bytes: size(ModelKind::Multiclass)?,
        student_bytes: size(ModelKind::Student)?,
    };
    let dir = cfg.paths.report_dir();
    write_text(&dir.join("latency_teacher.txt"), &res.teacher.to_kv())?;
    write_text(&dir.join("latency_student.txt"), &res.student.to_kv())?;
    write_text(&dir.join("size_latency_summary.txt"), &res.to_kv())?;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_through_toml() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        let back = PipelineConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_toml_keeps_defaults() {
        let cfg = PipelineConfig::from_toml(
            "[dataset]\nnormal_keep_fraction = 0.15\n[sim]\nt_end = 0.5\n[[scenarios]]\nmode = \"Ramp\"\nonset = 0.3\n",
        )
        .unwrap();
        assert_eq!(cfg.dataset.normal_keep_fraction, 0.15);
        assert_eq!(cfg.scenarios.len(), 1);
        assert_eq!(cfg.scenarios[0].mode, AttackMode::Ramp);
        assert_eq!(cfg.multiclass.num_leaves, 63);
    }

    #[test]
    fn partial_model_sections_start_from_their_presets() {
        let cfg = PipelineConfig::from_toml(
            "[binary]\nnum_iterations = 15\n[kd.student_params]\nnum_iterations = 10\n",
        )
        .unwrap();
        assert_eq!(cfg.binary.objective, Objective::Binary);
        assert_eq!(cfg.binary.num_iterations, 15);
        assert_eq!(cfg.kd.student_params.num_leaves, 15);
        assert_eq!(cfg.kd.student_params.num_iterations, 10);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(PipelineConfig::from_toml("[dataset]\nbogus = 1\n").is_err());
    }

    #[test]
    fn duplicate_scenarios_rejected() {
        let mut cfg = PipelineConfig::default();
        cfg.scenarios.push(AttackSpec::new(AttackMode::Ramp, 0.5));
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn missing_artifacts_name_the_producer() {
        let dir = tempfile::tempdir().unwrap();
        let paths = PathsConfig::under(dir.path());
        let err = load_model(&paths, ModelKind::Student)
            .unwrap_err()
            .to_string();
        assert!(err.contains("distill"), "{err}");
        let err = load_splits(&paths).unwrap_err().to_string();
        assert!(err.contains("dataset"), "{err}");
    }
}
