//! Rule-based CRT recommendation baseline (Class I / Class IIa).
//!
//! Sinus rhythm and guideline-directed medical therapy are not recorded and are
//! treated as satisfied.

use serde::{Deserialize, Serialize};

use crate::cohort::PatientRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recommendation {
    #[serde(rename = "I")]
    ClassI,
    #[serde(rename = "IIa")]
    ClassIIa,
    #[serde(rename = "none")]
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuidelineClass {
    pub class: Recommendation,
    /// The predicate that fired.
    pub trace: String,
}

/// The four inputs the rules look at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidelineInputs {
    pub lvef: f64,
    pub lbbb: bool,
    pub qrsd: f64,
    /// 1 to 4.
    pub nyha: u8,
}

impl GuidelineInputs {
    pub fn from_record(record: &PatientRecord) -> Result<Self> {
        let need = |name: &str| {
            record
                .get(name)
                .ok_or_else(|| Error::Schema(format!("record `{}` lacks `{name}` for the guideline", record.id)))
        };
        let lvef = need("lvef")?;
        let lbbb = need("lbbb")? == 1.0;
        let qrsd = need("qrsd")?;
        let mut nyha = 1;
        for (level, name) in [(2, "nyha_ii"), (3, "nyha_iii"), (4, "nyha_iv")] {
            if need(name)? == 1.0 {
                nyha = level;
            }
        }
        Ok(GuidelineInputs { lvef, lbbb, qrsd, nyha })
    }
}

pub fn classify_inputs(i: &GuidelineInputs) -> GuidelineClass {
    let low_ef = i.lvef <= 35.0;
    let (class, trace) = if low_ef && i.lbbb && i.qrsd >= 150.0 && i.nyha >= 2 {
        (Recommendation::ClassI, "lvef<=35 & lbbb & qrsd>=150 & nyha II-IV")
    } else if low_ef && i.lbbb && (120.0..150.0).contains(&i.qrsd) {
        (Recommendation::ClassIIa, "lvef<=35 & lbbb & 120<=qrsd<150")
    } else if low_ef && !i.lbbb && i.qrsd >= 150.0 && i.nyha >= 3 {
        (Recommendation::ClassIIa, "lvef<=35 & non-lbbb & qrsd>=150 & nyha III-IV")
    } else if !low_ef {
        (Recommendation::None, "lvef>35")
    } else {
        (Recommendation::None, "no class I/IIa criteria met")
    };
    GuidelineClass {
        class,
        trace: trace.to_string(),
    }
}

pub fn classify_guideline(record: &PatientRecord) -> Result<GuidelineClass> {
    Ok(classify_inputs(&GuidelineInputs::from_record(record)?))
}

/// 1 when the record falls in Class I or IIa.
pub fn guideline_predict(record: &PatientRecord) -> Result<u8> {
    Ok(u8::from(classify_guideline(record)?.class != Recommendation::None))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(lvef: f64, lbbb: bool, qrsd: f64, nyha: u8) -> GuidelineInputs {
        GuidelineInputs { lvef, lbbb, qrsd, nyha }
    }

    #[test]
    fn examples() {
        assert_eq!(classify_inputs(&inputs(30.0, true, 160.0, 3)).class, Recommendation::ClassI);
        assert_eq!(classify_inputs(&inputs(30.0, true, 130.0, 2)).class, Recommendation::ClassIIa);
        assert_eq!(classify_inputs(&inputs(45.0, true, 160.0, 3)).class, Recommendation::None);
    }

    #[test]
    fn boundaries_sit_in_the_higher_class() {
        assert_eq!(classify_inputs(&inputs(35.0, true, 150.0, 2)).class, Recommendation::ClassI);
        assert_eq!(classify_inputs(&inputs(35.0, true, 120.0, 1)).class, Recommendation::ClassIIa);
        assert_eq!(classify_inputs(&inputs(30.0, true, 160.0, 1)).class, Recommendation::None);
        assert_eq!(classify_inputs(&inputs(30.0, false, 150.0, 3)).class, Recommendation::ClassIIa);
        assert_eq!(classify_inputs(&inputs(30.0, false, 150.0, 2)).class, Recommendation::None);
    }

    #[test]
    fn serde_names() {
        assert_eq!(serde_json::to_string(&Recommendation::ClassIIa).unwrap(), "\"IIa\"");
    }
}
