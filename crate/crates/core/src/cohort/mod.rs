//! Patient records, cohort ingestion, synthetic generation and splitting.

mod io;
mod schema;
mod split;
mod summary;
mod synth;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_cohort, write_cohort_csv, CohortLoad, Exclusion};
pub use schema::{FeatureDef, FeatureKind, Schema, Stage};
pub use split::{
    slice_validation, slice_validation_positions, stratified_kfold, stratified_kfold_labels,
    FoldPlan, ValidationSlices,
};
pub use summary::{cohort_summary, CohortSummary, SummaryRow};
pub use synth::{
    synthesize_cohort, synthesize_cohort_with_schema, BinarySpec, CategoricalSpec, ContinuousSpec,
    CorrelationBlock, NormalParams, SyntheticSpec,
};

/// One subject: stage-1 and (optionally) stage-2 feature values plus the responder label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub id: String,
    pub stage1: BTreeMap<String, f64>,
    /// `None` when the imaging stage has not been acquired.
    pub stage2: Option<BTreeMap<String, f64>>,
    /// 1 = responder.
    pub label: u8,
}

impl PatientRecord {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.stage1
            .get(name)
            .or_else(|| self.stage2.as_ref().and_then(|s| s.get(name)))
            .copied()
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut f64> {
        if let Some(v) = self.stage1.get_mut(name) {
            return Some(v);
        }
        self.stage2.as_mut().and_then(|s| s.get_mut(name))
    }

    /// Values for `names` in order; `None` if any is unavailable.
    pub fn values(&self, names: &[String]) -> Option<Vec<f64>> {
        names.iter().map(|n| self.get(n)).collect()
    }

    /// Add `delta` to every feature value (stage 1 and 2).
    pub fn shift_all(&mut self, delta: f64) {
        self.stage1.values_mut().for_each(|v| *v += delta);
        if let Some(s) = self.stage2.as_mut() {
            s.values_mut().for_each(|v| *v += delta);
        }
    }
}

/// An ordered collection of records that share one schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    pub records: Vec<PatientRecord>,
    pub schema: Schema,
    /// File path or synthetic seed the records came from.
    pub provenance: String,
}

impl Cohort {
    pub fn new(records: Vec<PatientRecord>, schema: Schema, provenance: impl Into<String>) -> Result<Self> {
        let mut ids = std::collections::BTreeSet::new();
        for r in &records {
            if !ids.insert(r.id.as_str()) {
                return Err(Error::Schema(format!("duplicate record id `{}`", r.id)));
            }
            if r.label > 1 {
                return Err(Error::Schema(format!("record `{}` has label {}", r.id, r.label)));
            }
            for f in schema.required() {
                if r.get(&f.name).is_none() {
                    return Err(Error::Schema(format!("record `{}` lacks `{}`", r.id, f.name)));
                }
            }
        }
        Ok(Cohort {
            records,
            schema,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.records.iter().map(|r| r.label).collect()
    }

    pub fn ids(&self) -> Vec<String> {
        self.records.iter().map(|r| r.id.clone()).collect()
    }

    pub fn positives(&self) -> usize {
        self.records.iter().filter(|r| r.label == 1).count()
    }

    pub fn has_stage2(&self) -> bool {
        self.schema.stage2_active() && self.records.iter().all(|r| r.stage2.is_some())
    }
}
