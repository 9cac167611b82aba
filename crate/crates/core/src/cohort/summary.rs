//! Baseline-characteristics table by response group.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Cohort;
use crate::error::{Error, Result};
use crate::stats::{chi_square_independence, mean_sd, two_sample_t};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub feature: String,
    /// "continuous" or "categorical".
    pub kind: String,
    pub overall: String,
    pub responders: String,
    pub non_responders: String,
    #[serde(default)]
    pub statistic: Option<f64>,
    /// `None` when the test is undefined (e.g. a zero marginal).
    #[serde(default)]
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub n: usize,
    pub responders: usize,
    pub rows: Vec<SummaryRow>,
}

fn fmt_mean_sd(v: &[f64]) -> String {
    let (m, s) = mean_sd(v);
    format!("{m:.1} ± {s:.1}")
}

fn fmt_count(count: usize, n: usize) -> String {
    format!("{count} ({:.1}%)", 100.0 * count as f64 / n as f64)
}

pub fn cohort_summary(cohort: &Cohort) -> Result<CohortSummary> {
    let n = cohort.len();
    let responders = cohort.positives();
    if responders == 0 || responders == n {
        return Err(Error::SingleClass("cohort".into()));
    }
    let mut rows = Vec::new();
    for f in cohort.schema.required() {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for r in &cohort.records {
            let v = r
                .get(&f.name)
                .ok_or_else(|| Error::Schema(format!("record `{}` lacks `{}`", r.id, f.name)))?;
            if r.label == 1 {
                pos.push(v);
            } else {
                neg.push(v);
            }
        }
        let all: Vec<f64> = pos.iter().chain(&neg).copied().collect();
        let row = if f.is_binary() {
            let ones = |v: &[f64]| v.iter().filter(|&&x| x == 1.0).count();
            let (p1, n1) = (ones(&pos), ones(&neg));
            let test = chi_square_independence([
                [p1 as u64, (pos.len() - p1) as u64],
                [n1 as u64, (neg.len() - n1) as u64],
            ])
            .ok();
            SummaryRow {
                feature: f.name.clone(),
                kind: "categorical".into(),
                overall: fmt_count(p1 + n1, n),
                responders: fmt_count(p1, pos.len()),
                non_responders: fmt_count(n1, neg.len()),
                statistic: test.as_ref().map(|t| t.statistic),
                p_value: test.map(|t| t.p_value),
            }
        } else {
            let test = two_sample_t(&pos, &neg).ok();
            SummaryRow {
                feature: f.name.clone(),
                kind: "continuous".into(),
                overall: fmt_mean_sd(&all),
                responders: fmt_mean_sd(&pos),
                non_responders: fmt_mean_sd(&neg),
                statistic: test.as_ref().map(|t| t.statistic),
                p_value: test.map(|t| t.p_value),
            }
        };
        rows.push(row);
    }
    Ok(CohortSummary { n, responders, rows })
}

impl CohortSummary {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let non = self.n - self.responders;
        w.write_record([
            "variable".to_string(),
            format!("overall (n={})", self.n),
            format!("response (n={})", self.responders),
            format!("non-response (n={non})"),
            "p_value".to_string(),
        ])?;
        for r in &self.rows {
            w.write_record([
                r.feature.clone(),
                r.overall.clone(),
                r.responders.clone(),
                r.non_responders.clone(),
                r.p_value.map(|p| format!("{p:.3}")).unwrap_or_else(|| "NA".into()),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}
