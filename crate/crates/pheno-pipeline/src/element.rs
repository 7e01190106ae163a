use std::collections::BTreeMap;

use ml_core::{Dataset, Labels};

use crate::fcm_model::{DOY_COS, DOY_SIN};
use crate::PhenoError;

#[derive(Debug, Clone, PartialEq)]
pub struct RowDropped {
    pub field: i64,
    pub day: u32,
    pub missing: String,
}

/// One row per (field, acquisition day), keyed so downstream fits can walk a
/// field's rows in day order.
#[derive(Debug, Clone)]
pub struct ElementSpace {
    pub dataset: Dataset,
    /// (field id, day) for each dataset row, sorted.
    pub rows: Vec<(i64, u32)>,
    pub dropped: Vec<RowDropped>,
}

impl ElementSpace {
    /// Column-major extraction by feature name.
    pub fn columns(&self, names: &[String]) -> Result<Vec<Vec<f64>>, PhenoError> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.dataset
                    .feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| PhenoError::MissingFeature(n.clone()))
            })
            .collect::<Result<_, _>>()?;
        Ok(self.dataset.x.iter().map(|row| idx.iter().map(|&i| row[i]).collect()).collect())
    }
}

/// Assemble the clustering input from per-(field, day) feature maps. Feature
/// columns are the requested names plus the day-of-year sine and cosine. A
/// (field, day) missing any requested feature is dropped and reported.
pub fn build_element_space(
    values: &BTreeMap<(i64, u32), BTreeMap<String, f64>>,
    feature_names: &[String],
) -> ElementSpace {
    let mut x = Vec::new();
    let mut rows = Vec::new();
    let mut dropped = Vec::new();
    'row: for (&(field, day), feats) in values {
        let mut row = Vec::with_capacity(feature_names.len() + 2);
        for name in feature_names {
            match feats.get(name) {
                Some(&v) if v.is_finite() => row.push(v),
                _ => {
                    dropped.push(RowDropped { field, day, missing: name.clone() });
                    continue 'row;
                }
            }
        }
        let phase = 2.0 * std::f64::consts::PI * day as f64 / 365.0;
        row.push(phase.sin());
        row.push(phase.cos());
        x.push(row);
        rows.push((field, day));
    }
    let mut names: Vec<String> = feature_names.to_vec();
    names.push(DOY_SIN.to_string());
    names.push(DOY_COS.to_string());
    ElementSpace { dataset: Dataset::new(x, Labels::None, names), rows, dropped }
}
