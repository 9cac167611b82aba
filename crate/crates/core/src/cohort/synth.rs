//! Synthetic cohorts drawn from per-class marginal summaries.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Cohort, FeatureKind, PatientRecord, Schema, Stage};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalParams {
    pub mean: f64,
    pub sd: f64,
}

/// Per-class normal parameters; `class1` = responders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousSpec {
    pub class0: NormalParams,
    pub class1: NormalParams,
}

/// Per-class Bernoulli proportions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinarySpec {
    pub class0: f64,
    pub class1: f64,
}

/// A one-hot group: exactly one level is 1 per record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoricalSpec {
    pub levels: Vec<String>,
    pub class0: Vec<f64>,
    pub class1: Vec<f64>,
}

/// Equicorrelated block of continuous features (within each class).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationBlock {
    pub features: Vec<String>,
    pub rho: f64,
    /// Optional ±1 per feature; flips the sign of that member's shared factor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    /// Fraction of responders.
    pub prevalence: f64,
    #[serde(default)]
    pub continuous: BTreeMap<String, ContinuousSpec>,
    #[serde(default)]
    pub binary: BTreeMap<String, BinarySpec>,
    #[serde(default)]
    pub categorical: BTreeMap<String, CategoricalSpec>,
    #[serde(default)]
    pub correlation: Vec<CorrelationBlock>,
}

const TABLE1: &str = include_str!("../../configs/table1.toml");

impl SyntheticSpec {
    /// Baseline characteristics of the 218-patient CRT cohort, by response group.
    pub fn table1() -> Self {
        Self::from_toml_str(TABLE1).expect("bundled spec parses")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    /// Check parameter domains and coverage of `schema`.
    pub fn validate(&self, schema: &Schema) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if !(self.prevalence > 0.0 && self.prevalence < 1.0) {
            return bad(format!("prevalence {} not in (0,1)", self.prevalence));
        }
        let prop_ok = |p: f64| (0.0..=1.0).contains(&p);
        for (name, c) in &self.continuous {
            for p in [c.class0, c.class1] {
                if !p.mean.is_finite() || !p.sd.is_finite() || p.sd < 0.0 {
                    return bad(format!("`{name}`: need finite mean and sd >= 0"));
                }
            }
        }
        for (name, b) in &self.binary {
            if !prop_ok(b.class0) || !prop_ok(b.class1) {
                return bad(format!("`{name}`: proportions must lie in [0,1]"));
            }
        }
        for (group, c) in &self.categorical {
            if c.levels.is_empty() || c.class0.len() != c.levels.len() || c.class1.len() != c.levels.len() {
                return bad(format!("categorical `{group}`: levels and proportions differ in length"));
            }
            for props in [&c.class0, &c.class1] {
                if props.iter().any(|&p| !prop_ok(p)) || props.iter().sum::<f64>() <= 0.0 {
                    return bad(format!("categorical `{group}`: proportions must lie in [0,1] with positive sum"));
                }
            }
        }
        for block in &self.correlation {
            if !(0.0..1.0).contains(&block.rho) {
                return bad(format!("correlation rho {} not in [0,1)", block.rho));
            }
            if let Some(signs) = &block.signs {
                if signs.len() != block.features.len() || signs.iter().any(|s| s.abs() != 1.0) {
                    return bad("correlation signs must be ±1, one per feature".into());
                }
            }
            for f in &block.features {
                if !self.continuous.contains_key(f) {
                    return bad(format!("correlated feature `{f}` is not continuous"));
                }
            }
        }

        let entries = self
            .continuous
            .keys()
            .map(|n| (n.as_str(), "continuous"))
            .chain(self.binary.keys().map(|n| (n.as_str(), "binary")))
            .chain(
                self.categorical
                    .values()
                    .flat_map(|c| c.levels.iter().map(|l| (l.as_str(), "binary"))),
            );
        let mut covered: BTreeMap<&str, &str> = BTreeMap::new();
        for (name, how) in entries {
            if covered.insert(name, how).is_some() {
                return bad(format!("`{name}` specified twice"));
            }
        }
        for f in schema.required() {
            let want = match f.kind {
                FeatureKind::Continuous { .. } => "continuous",
                FeatureKind::Binary => "binary",
            };
            match covered.remove(f.name.as_str()) {
                Some(got) if got == want => {}
                Some(got) => return bad(format!("`{}` is {want} in the schema but {got} in the spec", f.name)),
                None => return bad(format!("no parameters for `{}`", f.name)),
            }
        }
        if let Some(extra) = covered.keys().next() {
            return bad(format!("`{extra}` is not an active schema feature"));
        }
        Ok(())
    }
}

/// Draw `n` records against the full clinical/imaging schema.
pub fn synthesize_cohort(spec: &SyntheticSpec, n: usize, seed: u64) -> Result<Cohort> {
    synthesize_cohort_with_schema(spec, &Schema::crt(), n, seed)
}

pub fn synthesize_cohort_with_schema(
    spec: &SyntheticSpec,
    schema: &Schema,
    n: usize,
    seed: u64,
) -> Result<Cohort> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("cohort size {n} < 2")));
    }
    spec.validate(schema)?;
    let mut rng = seed::rng(seed);
    let continuous: Vec<&str> = schema
        .required()
        .filter(|f| !f.is_binary())
        .map(|f| f.name.as_str())
        .collect();
    let binaries: Vec<&str> = schema
        .required()
        .filter(|f| f.is_binary() && spec.binary.contains_key(&f.name))
        .map(|f| f.name.as_str())
        .collect();

    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let label = u8::from(rng.random::<f64>() < spec.prevalence);
        let mut values: BTreeMap<String, f64> = BTreeMap::new();

        let mut z: BTreeMap<&str, f64> = continuous
            .iter()
            .map(|&name| (name, rng.sample::<f64, _>(StandardNormal)))
            .collect();
        for block in &spec.correlation {
            let common: f64 = rng.sample(StandardNormal);
            for (j, f) in block.features.iter().enumerate() {
                let sign = block.signs.as_ref().map_or(1.0, |s| s[j]);
                let own = z[f.as_str()];
                z.insert(f, block.rho.sqrt() * sign * common + (1.0 - block.rho).sqrt() * own);
            }
        }
        for &name in &continuous {
            let c = &spec.continuous[name];
            let p = if label == 1 { c.class1 } else { c.class0 };
            let def = schema.def(name).expect("schema feature");
            values.insert(name.to_string(), def.clamp(p.mean + p.sd * z[name]));
        }
        for &name in &binaries {
            let b = &spec.binary[name];
            let p = if label == 1 { b.class1 } else { b.class0 };
            values.insert(name.to_string(), f64::from(u8::from(rng.random::<f64>() < p)));
        }
        for c in spec.categorical.values() {
            let props = if label == 1 { &c.class1 } else { &c.class0 };
            let total: f64 = props.iter().sum();
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = c.levels.len() - 1;
            for (k, p) in props.iter().enumerate() {
                acc += p;
                if u < acc {
                    chosen = k;
                    break;
                }
            }
            for (k, level) in c.levels.iter().enumerate() {
                values.insert(level.clone(), if k == chosen { 1.0 } else { 0.0 });
            }
        }

        let mut stage1 = BTreeMap::new();
        let mut stage2 = BTreeMap::new();
        for (name, v) in values {
            match schema.def(&name).map(|d| d.stage) {
                Some(Stage::One) => stage1.insert(name, v),
                Some(Stage::Two) => stage2.insert(name, v),
                None => None,
            };
        }
        records.push(PatientRecord {
            id: format!("s{:05}", i + 1),
            stage1,
            stage2: schema.stage2_active().then_some(stage2),
            label,
        });
    }
    Cohort::new(records, schema.clone(), format!("synthetic:seed={seed}"))
}
