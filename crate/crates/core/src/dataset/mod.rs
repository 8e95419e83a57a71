//! Scenario tables to a supervised-learning dataset: labelling, merging,
//! onset-preserving downsampling, z-score normalisation and stratified
//! splitting.
//!
//! On disk every table is a CSV with header
//! `time,V1,V2,V3,I1,I2,I3,P_DG1,Q_DG1,f_DG1,...,f_DG10,label_bin,label_multi`
//! and values written with 9 significant digits.

mod downsample;
mod labels;
mod norm;
mod split;
mod table;

pub use downsample::{downsample, onset_times, DEFAULT_ONSET_WINDOW};
pub use labels::{binary_label, class_names, label_scenario, label_scenario_named, merge};
pub use norm::{
    apply_prep_flags, denormalize, fit_norm_stats, normalize, Moments, NormStats, PrepFlags,
    SIGMA_EPS,
};
pub use split::{stratified_indices, stratified_split, SplitSpec};
pub use table::{round_sig9, SampleTable, LABEL_BIN, LABEL_MULTI, TIME};
