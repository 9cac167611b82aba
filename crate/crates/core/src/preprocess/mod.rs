//! Standardization, spatial-sign projection and recursive feature elimination.
//!
//! Parameters are always fitted on training rows only and then applied to any
//! other rows unchanged.

mod rfe;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::cohort::PatientRecord;
use crate::error::{Error, Result};

pub use rfe::{rfe_select, FeatureSubset, RfeConfig, RfeStep};

/// Per-feature centering and scaling fitted on a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub names: Vec<String>,
    pub center: Vec<f64>,
    /// Sample standard deviation; 1 for zero-variance columns.
    pub scale: Vec<f64>,
}

pub fn fit_scaler(x: ArrayView2<f64>, names: &[String]) -> Result<ScalerParams> {
    let (n, p) = x.dim();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("scaler needs >= 2 rows, got {n}")));
    }
    if p != names.len() {
        return Err(Error::DimensionMismatch {
            expected: names.len(),
            actual: p,
        });
    }
    let mut center = Vec::with_capacity(p);
    let mut scale = Vec::with_capacity(p);
    for col in x.axis_iter(Axis(1)) {
        let m = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        center.push(m);
        scale.push(if sd > 0.0 && sd.is_finite() { sd } else { 1.0 });
    }
    Ok(ScalerParams {
        names: names.to_vec(),
        center,
        scale,
    })
}

impl ScalerParams {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Parameters for a subset of the fitted features, in the subset's order.
    pub fn restrict(&self, names: &[String]) -> Result<ScalerParams> {
        let mut out = ScalerParams {
            names: Vec::with_capacity(names.len()),
            center: Vec::with_capacity(names.len()),
            scale: Vec::with_capacity(names.len()),
        };
        for n in names {
            let j = self
                .names
                .iter()
                .position(|m| m == n)
                .ok_or_else(|| Error::Schema(format!("scaler has no feature `{n}`")))?;
            out.names.push(n.clone());
            out.center.push(self.center[j]);
            out.scale.push(self.scale[j]);
        }
        Ok(out)
    }

    pub fn standardize(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: x.ncols(),
            });
        }
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (c, s) = (self.center[j], self.scale[j]);
            col.mapv_inplace(|v| (v - c) / s);
        }
        Ok(out)
    }
}

/// Divide every row by its Euclidean norm; all-zero rows stay zero.
pub fn spatial_sign(x: &mut Array2<f64>) {
    for mut row in x.rows_mut() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|v| v / norm);
        }
    }
}

/// Standardize with `params`, then project rows onto the unit sphere.
pub fn transform(params: &ScalerParams, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    let mut z = params.standardize(x)?;
    spatial_sign(&mut z);
    Ok(z)
}

/// Gather `names` from each record into a dense row-major matrix.
pub fn matrix_from_records<'a, I>(records: I, names: &[String]) -> Result<Array2<f64>>
where
    I: IntoIterator<Item = &'a PatientRecord>,
{
    let mut data = Vec::new();
    let mut rows = 0;
    for r in records {
        let values = r.values(names).ok_or_else(|| {
            let missing = names.iter().find(|n| r.get(n).is_none()).cloned().unwrap_or_default();
            Error::Schema(format!("record `{}` lacks `{missing}`", r.id))
        })?;
        data.extend(values);
        rows += 1;
    }
    Array2::from_shape_vec((rows, names.len()), data).map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Fitted preprocessing for one stage: scaler restricted to the selected
/// features followed by spatial sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagePreprocessor {
    pub scaler: ScalerParams,
}

impl StagePreprocessor {
    pub fn features(&self) -> &[String] {
        &self.scaler.names
    }

    pub fn transform(&self, raw: ArrayView2<f64>) -> Result<Array2<f64>> {
        transform(&self.scaler, raw)
    }

    pub fn transform_records<'a, I>(&self, records: I) -> Result<Array2<f64>>
    where
        I: IntoIterator<Item = &'a PatientRecord>,
    {
        let raw = matrix_from_records(records, &self.scaler.names)?;
        self.transform(raw.view())
    }

    pub fn transform_one(&self, values: &[f64]) -> Result<Vec<f64>> {
        let row = ArrayView2::from_shape((1, values.len()), values).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(self.transform(row)?.into_raw_vec_and_offset().0)
    }
}
