use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Cohort, PatientRecord, Schema, Stage};
use crate::error::{Error, Result};

const LABEL: &str = "response";
const ID: &str = "id";

/// A row dropped because a required value was missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    /// 1-based data row number (header excluded).
    pub row: usize,
    pub id: String,
    pub missing: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CohortLoad {
    pub cohort: Cohort,
    pub exclusions: Vec<Exclusion>,
}

fn is_missing(cell: &str) -> bool {
    matches!(cell.trim(), "" | "NA" | "na" | "NaN" | "nan")
}

/// Load a delimited cohort file with a header row matching `schema`.
pub fn load_cohort(path: impl AsRef<Path>, schema: &Schema) -> Result<CohortLoad> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_cohort(file, schema, path.display().to_string())
}

pub(crate) fn parse_cohort<R: Read>(reader: R, schema: &Schema, provenance: String) -> Result<CohortLoad> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = match rdr.headers() {
        Ok(h) => h.iter().map(str::to_string).collect(),
        Err(e) => return Err(Error::Schema(format!("unreadable header: {e}"))),
    };
    if headers.iter().all(|h| h.is_empty()) {
        return Err(Error::Empty(format!("{provenance} has no header")));
    }

    let mut column_of: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, h) in headers.iter().enumerate() {
        if h != ID && h != LABEL && schema.def(h).is_none() {
            return Err(Error::Schema(format!("unknown column `{h}`")));
        }
        if column_of.insert(h.as_str(), i).is_some() {
            return Err(Error::Schema(format!("duplicate column `{h}`")));
        }
    }
    let label_col = *column_of
        .get(LABEL)
        .ok_or_else(|| Error::Schema(format!("missing label column `{LABEL}`")))?;
    for f in schema.required() {
        if !column_of.contains_key(f.name.as_str()) {
            return Err(Error::Schema(format!("missing required column `{}`", f.name)));
        }
    }
    let id_col = column_of.get(ID).copied();
    let groups = schema.one_hot_groups();

    let mut records = Vec::new();
    let mut exclusions = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::MalformedRow {
            row: row_no,
            column: "*".into(),
            message: e.to_string(),
        })?;
        if row.len() != headers.len() {
            return Err(Error::MalformedRow {
                row: row_no,
                column: "*".into(),
                message: format!("expected {} fields, found {}", headers.len(), row.len()),
            });
        }
        let id = id_col
            .map(|c| row[c].to_string())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| format!("row{row_no}"));

        let mut missing = Vec::new();
        let mut stage1 = BTreeMap::new();
        let mut stage2 = BTreeMap::new();
        for f in schema.required() {
            let cell = &row[column_of[f.name.as_str()]];
            if is_missing(cell) {
                missing.push(f.name.clone());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::MalformedRow {
                row: row_no,
                column: f.name.clone(),
                message: format!("`{cell}` is not a number"),
            })?;
            f.check(v).map_err(|message| Error::MalformedRow {
                row: row_no,
                column: f.name.clone(),
                message,
            })?;
            match f.stage {
                Stage::One => stage1.insert(f.name.clone(), v),
                Stage::Two => stage2.insert(f.name.clone(), v),
            };
        }
        let label_cell = &row[label_col];
        let label = if is_missing(label_cell) {
            missing.push(LABEL.to_string());
            0
        } else {
            match label_cell {
                "0" | "0.0" => 0,
                "1" | "1.0" => 1,
                other => {
                    return Err(Error::MalformedRow {
                        row: row_no,
                        column: LABEL.into(),
                        message: format!("label `{other}` not in {{0,1}}"),
                    })
                }
            }
        };
        if !missing.is_empty() {
            exclusions.push(Exclusion {
                row: row_no,
                id,
                missing,
            });
            continue;
        }
        for (group, members) in &groups {
            let present: Vec<f64> = members
                .iter()
                .filter_map(|m| stage1.get(m).or_else(|| stage2.get(m)).copied())
                .collect();
            if present.len() == members.len() && present.iter().sum::<f64>() != 1.0 {
                return Err(Error::MalformedRow {
                    row: row_no,
                    column: group.clone(),
                    message: format!("one-hot group `{group}` does not sum to 1"),
                });
            }
        }
        records.push(PatientRecord {
            id,
            stage1,
            stage2: schema.stage2_active().then_some(stage2),
            label,
        });
    }
    if records.is_empty() && exclusions.is_empty() {
        return Err(Error::Empty(format!("{provenance} has no data rows")));
    }
    let cohort = Cohort::new(records, schema.clone(), provenance)?;
    Ok(CohortLoad { cohort, exclusions })
}

/// Write a cohort as CSV: `id`, every schema feature, then `response`.
pub fn write_cohort_csv<W: Write>(cohort: &Cohort, writer: W) -> Result<()> {
    let names: Vec<&str> = cohort
        .schema
        .required()
        .map(|f| f.name.as_str())
        .collect();
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![ID];
    header.extend(&names);
    header.push(LABEL);
    w.write_record(&header)?;
    for r in &cohort.records {
        let mut row = vec![r.id.clone()];
        for n in &names {
            row.push(r.get(n).map(|v| v.to_string()).unwrap_or_default());
        }
        row.push(r.label.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
