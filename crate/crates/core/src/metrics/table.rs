//! Feature table CSV: `graph_id`, the 26 canonical feature columns, then the
//! optional `featurize_ms` and `top1_error` columns. Reals are written with 17
//! significant digits.

use std::io::{Read, Write};

use super::{Feature, FeatureVector, FEATURE_COUNT};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const TIMING_COLUMN: &str = "featurize_ms";
pub const TARGET_COLUMN: &str = "top1_error";

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRow<T> {
    pub graph_id: usize,
    pub features: FeatureVector<T>,
    pub featurize_ms: Option<f64>,
    pub target: Option<T>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureTable<T> {
    pub rows: Vec<FeatureRow<T>>,
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

impl<T: Scalar> FeatureTable<T> {
    pub fn has_timing(&self) -> bool {
        self.rows.iter().any(|r| r.featurize_ms.is_some())
    }

    pub fn has_targets(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.target.is_some())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.write_csv_with(w, self.has_timing(), self.has_targets())
    }

    pub fn write_csv_with<W: Write>(&self, w: W, timing: bool, targets: bool) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["graph_id".to_string()];
        header.extend(Feature::ALL.iter().map(|f| f.name().to_string()));
        if timing {
            header.push(TIMING_COLUMN.into());
        }
        if targets {
            header.push(TARGET_COLUMN.into());
        }
        out.write_record(&header).map_err(csv_err)?;
        for row in &self.rows {
            let mut rec = Vec::with_capacity(header.len());
            rec.push(row.graph_id.to_string());
            rec.extend(row.features.values().iter().map(|x| format_real(x.to_f64_lossy())));
            if timing {
                rec.push(row.featurize_ms.map(format_real).unwrap_or_default());
            }
            if targets {
                rec.push(row.target.map(|t| format_real(t.to_f64_lossy())).unwrap_or_default());
            }
            out.write_record(&rec).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<FeatureTable<T>> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers().map_err(csv_err)?.clone();
        let col = |name: &str| header.iter().position(|h| h == name);
        let id_col = col("graph_id").ok_or_else(|| parse_err(1, "missing `graph_id` column"))?;
        let mut feature_cols = [0usize; FEATURE_COUNT];
        for f in Feature::ALL {
            feature_cols[f.index()] = col(f.name()).ok_or_else(|| parse_err(1, &format!("missing `{f}` column")))?;
        }
        let timing_col = col(TIMING_COLUMN);
        let target_col = col(TARGET_COLUMN);
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(csv_err)?;
            let field = |c: usize| rec.get(c).unwrap_or("").trim();
            let real = |c: usize| -> Result<f64> {
                field(c)
                    .parse::<f64>()
                    .map_err(|e| parse_err(line, &format!("column {}: {e}", header.get(c).unwrap_or("?"))))
            };
            let graph_id = field(id_col)
                .parse()
                .map_err(|e| parse_err(line, &format!("graph_id: {e}")))?;
            let mut values = [T::zero(); FEATURE_COUNT];
            for (k, &c) in feature_cols.iter().enumerate() {
                values[k] = T::lit(real(c)?);
            }
            let optional = |c: Option<usize>| -> Result<Option<f64>> {
                match c {
                    Some(c) if !field(c).is_empty() => real(c).map(Some),
                    _ => Ok(None),
                }
            };
            rows.push(FeatureRow {
                graph_id,
                features: FeatureVector::from_values(values),
                featurize_ms: optional(timing_col)?,
                target: optional(target_col)?.map(T::lit),
            });
        }
        Ok(FeatureTable { rows })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse {
        line: e.position().map_or(0, |p| p.line() as usize),
        reason: e.to_string(),
    }
}

fn parse_err(line: usize, reason: &str) -> Error {
    Error::Parse {
        line,
        reason: reason.to_string(),
    }
}
