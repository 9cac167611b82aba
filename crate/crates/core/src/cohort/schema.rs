use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Acquisition stage a feature belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Clinical variables and ECG.
    One,
    /// Imaging-derived variables.
    Two,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum FeatureKind {
    /// Real-valued with an optional physical range.
    Continuous { min: Option<f64>, max: Option<f64> },
    /// 0/1 indicator.
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    pub stage: Stage,
    pub kind: FeatureKind,
    /// One-hot group the indicator belongs to; members of a group sum to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

impl FeatureDef {
    pub fn continuous(name: &str, stage: Stage, min: Option<f64>, max: Option<f64>) -> Self {
        FeatureDef {
            name: name.to_string(),
            stage,
            kind: FeatureKind::Continuous { min, max },
            group: None,
        }
    }

    pub fn binary(name: &str, stage: Stage) -> Self {
        FeatureDef {
            name: name.to_string(),
            stage,
            kind: FeatureKind::Binary,
            group: None,
        }
    }

    pub fn one_hot(name: &str, stage: Stage, group: &str) -> Self {
        FeatureDef {
            group: Some(group.to_string()),
            ..Self::binary(name, stage)
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self.kind, FeatureKind::Binary)
    }

    /// Clamp a value into the declared physical range.
    pub fn clamp(&self, v: f64) -> f64 {
        match self.kind {
            FeatureKind::Continuous { min, max } => {
                let v = min.map_or(v, |lo| v.max(lo));
                max.map_or(v, |hi| v.min(hi))
            }
            FeatureKind::Binary => v,
        }
    }

    pub(crate) fn check(&self, v: f64) -> std::result::Result<(), String> {
        if !v.is_finite() {
            return Err("value is not finite".into());
        }
        match self.kind {
            FeatureKind::Binary if v != 0.0 && v != 1.0 => Err(format!("binary value {v} not in {{0,1}}")),
            FeatureKind::Continuous { min, max } => {
                if min.is_some_and(|lo| v < lo) || max.is_some_and(|hi| v > hi) {
                    Err(format!(
                        "value {v} outside [{}, {}]",
                        min.unwrap_or(f64::NEG_INFINITY),
                        max.unwrap_or(f64::INFINITY)
                    ))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Feature lists per stage plus per-feature metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    features: Vec<FeatureDef>,
    /// Whether stage-2 columns are required when loading.
    stage2_active: bool,
}

impl Schema {
    pub fn new(features: Vec<FeatureDef>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for f in &features {
            if f.name == "id" || f.name == "response" {
                return Err(Error::Schema(format!("reserved feature name `{}`", f.name)));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature `{}`", f.name)));
            }
        }
        if !features.iter().any(|f| f.stage == Stage::One) {
            return Err(Error::Schema("schema has no stage-1 features".into()));
        }
        let stage2_active = features.iter().any(|f| f.stage == Stage::Two);
        Ok(Schema {
            features,
            stage2_active,
        })
    }

    /// The 43-predictor clinical/ECG + SPECT schema.
    pub fn crt() -> Self {
        use Stage::*;
        let c = FeatureDef::continuous;
        let b = FeatureDef::binary;
        let h = FeatureDef::one_hot;
        let unbounded = None;
        let features = vec![
            c("age", One, Some(0.0), Some(120.0)),
            b("male", One),
            h("race_african", One, "race"),
            h("race_asian", One, "race"),
            h("race_caucasian", One, "race"),
            h("race_hispanic", One, "race"),
            h("race_indian", One, "race"),
            b("smoking", One),
            b("dm", One),
            b("htn", One),
            b("mi", One),
            b("cad", One),
            b("cabg", One),
            b("pci", One),
            h("nyha_ii", One, "nyha"),
            h("nyha_iii", One, "nyha"),
            h("nyha_iv", One, "nyha"),
            b("acei_arb", One),
            c("qrsd", One, Some(40.0), Some(300.0)),
            b("lbbb", One),
            c("srs", Two, Some(0.0), Some(68.0)),
            c("esv", Two, Some(0.0), unbounded),
            c("lvef", Two, Some(0.0), Some(100.0)),
            c("mass", Two, Some(0.0), unbounded),
            c("stroke_volume", Two, Some(0.0), unbounded),
            c("wt_pct", Two, Some(0.0), Some(100.0)),
            c("wt_sum", Two, Some(0.0), unbounded),
            b("concordance", Two),
            c("scar_pct", Two, Some(0.0), Some(100.0)),
            c("dia_pbw", Two, Some(0.0), Some(360.0)),
            c("dia_pk", Two, unbounded, unbounded),
            c("dia_ps", Two, unbounded, unbounded),
            c("dia_pp", Two, Some(0.0), Some(360.0)),
            c("dia_psd", Two, Some(0.0), Some(360.0)),
            c("sys_pbw", Two, Some(0.0), Some(360.0)),
            c("sys_pk", Two, unbounded, unbounded),
            c("sys_pp", Two, Some(0.0), Some(360.0)),
            c("sys_psd", Two, Some(0.0), Some(360.0)),
            c("ede", Two, Some(0.0), Some(1.0)),
            c("edsi", Two, Some(0.0), Some(1.5)),
            c("edv", Two, Some(0.0), unbounded),
            c("ese", Two, Some(0.0), Some(1.0)),
            c("essi", Two, Some(0.0), Some(1.5)),
        ];
        Schema::new(features).expect("built-in schema is valid")
    }

    /// Same feature metadata with stage-2 columns no longer required.
    pub fn stage1_only(&self) -> Self {
        Schema {
            features: self.features.clone(),
            stage2_active: false,
        }
    }

    pub fn stage2_active(&self) -> bool {
        self.stage2_active
    }

    pub fn features(&self) -> &[FeatureDef] {
        &self.features
    }

    pub fn def(&self, name: &str) -> Option<&FeatureDef> {
        self.features.iter().find(|f| f.name == name)
    }

    pub fn names(&self, stage: Stage) -> Vec<String> {
        self.features
            .iter()
            .filter(|f| f.stage == stage)
            .map(|f| f.name.clone())
            .collect()
    }

    pub fn stage1_names(&self) -> Vec<String> {
        self.names(Stage::One)
    }

    pub fn stage2_names(&self) -> Vec<String> {
        self.names(Stage::Two)
    }

    /// Features available to a model at `stage`: stage 2 sees stage 1 as well.
    pub fn model_inputs(&self, stage: Stage) -> Vec<String> {
        self.features
            .iter()
            .filter(|f| f.stage <= stage)
            .map(|f| f.name.clone())
            .collect()
    }

    /// Features required by this schema in its current activation state.
    pub fn required(&self) -> impl Iterator<Item = &FeatureDef> {
        self.features
            .iter()
            .filter(|f| f.stage == Stage::One || self.stage2_active)
    }

    pub fn one_hot_groups(&self) -> BTreeMap<String, Vec<String>> {
        let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for f in &self.features {
            if let Some(g) = &f.group {
                groups.entry(g.clone()).or_default().push(f.name.clone());
            }
        }
        groups
    }
}
