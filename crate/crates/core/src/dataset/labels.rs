use super::table::{SampleTable, LABEL_BIN, LABEL_MULTI, TIME};
use crate::attack::{AttackMode, AttackSpec};
use crate::error::{Error, Result};

/// Binary label: 0 normal, 1 attack.
pub fn binary_label(mode: AttackMode) -> usize {
    usize::from(mode != AttackMode::Normal)
}

/// Label names indexed by the multiclass label.
pub fn class_names() -> Vec<&'static str> {
    AttackMode::ALL.iter().map(|m| m.name()).collect()
}

/// Appends `label_bin` and `label_multi`: rows at or after the onset carry
/// the scenario's attack class, everything else is normal.
pub fn label_scenario(table: &SampleTable, attack: &AttackSpec) -> Result<SampleTable> {
    if table.has_labels() {
        return Err(Error::Schema("table is already labelled".into()));
    }
    let t_idx = table.require_column(TIME)?;
    let mode = attack.mode;
    let active = move |r: &[f64]| mode != AttackMode::Normal && r[t_idx] >= attack.onset;
    let with_bin = table.with_column(LABEL_BIN, |r| {
        if active(r) {
            binary_label(mode) as f64
        } else {
            0.0
        }
    });
    Ok(with_bin.with_column(LABEL_MULTI, |r| {
        if active(r) {
            mode.class_index() as f64
        } else {
            0.0
        }
    }))
}

/// Same as [`label_scenario`], resolving the mode from its name.
pub fn label_scenario_named(table: &SampleTable, mode: &str, onset: f64) -> Result<SampleTable> {
    let mode: AttackMode = mode.parse()?;
    label_scenario(table, &AttackSpec::new(mode, onset))
}

/// Row-concatenation of identically-shaped tables, preserving order.
pub fn merge(tables: &[SampleTable]) -> Result<SampleTable> {
    let first = tables
        .first()
        .ok_or_else(|| Error::Empty("merge of zero tables".into()))?;
    let columns = first.columns().to_vec();
    let total: usize = tables.iter().map(|t| t.data().len()).sum();
    let mut data = Vec::with_capacity(total);
    for (k, t) in tables.iter().enumerate() {
        if t.columns() != columns.as_slice() {
            return Err(Error::Schema(format!(
                "table {k} columns differ from table 0"
            )));
        }
        data.extend_from_slice(t.data());
    }
    SampleTable::from_rows(columns, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn timeline(dt: f64, t_end: f64) -> SampleTable {
        let n = (t_end / dt).round() as usize + 1;
        let data: Vec<f64> = (0..n)
            .flat_map(|k| [super::super::table::round_sig9(k as f64 * dt), 1.0])
            .collect();
        SampleTable::from_rows(vec![TIME.into(), "V1".into()], data).unwrap()
    }

    #[test]
    fn normal_scenario_all_zero() {
        let t = label_scenario(&timeline(1e-4, 1.0), &AttackSpec::normal()).unwrap();
        assert!(t.labels_bin().unwrap().iter().all(|&y| y == 0));
        assert!(t.labels_multi().unwrap().iter().all(|&y| y == 0));
    }

    #[test]
    fn ramp_labels_from_onset() {
        let spec = AttackSpec::new(AttackMode::Ramp, 0.70);
        let t = label_scenario(&timeline(1e-4, 1.0), &spec).unwrap();
        let multi = t.labels_multi().unwrap();
        let bin = t.labels_bin().unwrap();
        assert_eq!(multi.iter().filter(|&&y| y == 2).count(), 3001);
        assert_eq!(bin.iter().filter(|&&y| y == 1).count(), 3001);
        assert!(multi.iter().zip(&bin).all(|(&m, &b)| (m == 0) == (b == 0)));
    }

    #[test]
    fn dos_class_index() {
        let t = label_scenario_named(&timeline(0.1, 1.0), "DoS", 0.5).unwrap();
        assert_eq!(*t.labels_multi().unwrap().last().unwrap(), 6);
        assert!(label_scenario_named(&timeline(0.1, 1.0), "Jamming", 0.5).is_err());
    }

    #[test]
    fn relabel_rejected() {
        let t = label_scenario(&timeline(0.1, 1.0), &AttackSpec::normal()).unwrap();
        assert!(label_scenario(&t, &AttackSpec::normal()).is_err());
    }

    #[test]
    fn merge_contracts() {
        let a = timeline(0.1, 1.0);
        assert_eq!(merge(std::slice::from_ref(&a)).unwrap(), a);
        assert!(matches!(merge(&[]), Err(Error::Empty(_))));
        let m = merge(&[a.clone(), a.clone(), a.clone()]).unwrap();
        assert_eq!(m.n_rows(), 33);
        let other = SampleTable::from_rows(vec![TIME.into(), "V2".into()], vec![0.0, 1.0]).unwrap();
        assert!(matches!(merge(&[a, other]), Err(Error::Schema(_))));
    }
}
