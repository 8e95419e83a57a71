//! Shared fixtures for the benchmarks.

use mgids::attack::{AttackMode, AttackSpec};
use mgids::dataset::SampleTable;
use mgids::pipeline::{
    build_dataset, default_scenarios, simulate_scenarios, DatasetBundle, DatasetConfig,
};
use mgids::sim::SimConfig;

/// A short simulation config so fixtures build quickly.
pub fn short_sim(t_end: f64) -> SimConfig {
    SimConfig {
        t_end,
        ..SimConfig::default()
    }
}

/// Scenario tables with every attack starting halfway through.
pub fn scenario_tables(t_end: f64) -> Vec<SampleTable> {
    let sim = short_sim(t_end);
    let specs: Vec<AttackSpec> = default_scenarios()
        .into_iter()
        .map(|s| match s.mode {
            AttackMode::Normal => s,
            m => AttackSpec::new(m, t_end / 2.0),
        })
        .collect();
    simulate_scenarios(&sim, &specs).expect("fixture scenarios simulate")
}

/// Normalized splits built from [`scenario_tables`].
pub fn dataset(t_end: f64) -> DatasetBundle {
    build_dataset(&DatasetConfig::default(), &scenario_tables(t_end))
        .expect("fixture dataset builds")
}
