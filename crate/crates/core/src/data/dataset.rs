use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{DataError, Month, SpreadId, YieldPanel};
use crate::matrix::FeatureMatrix;

/// Spread features before a target is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadFrame {
    pub dates: Vec<Month>,
    pub features: FeatureMatrix,
    pub feature_names: Vec<String>,
}

/// Date-indexed spread features with a binary recession target.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub dates: Vec<Month>,
    pub features: FeatureMatrix,
    pub target: Vec<u8>,
    pub feature_names: Vec<String>,
}

/// Inclusive month window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MonthRange {
    pub start: Month,
    pub end: Month,
}

impl MonthRange {
    pub fn new(start: Month, end: Month) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, m: Month) -> bool {
        self.start <= m && m <= self.end
    }
}

impl std::fmt::Display for MonthRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// Decimal places kept in spread values; clears subtraction round-off on
/// rates published with a few decimals.
pub const SPREAD_DECIMALS: i32 = 8;

/// Computes all 36 spreads, one column per [`SpreadId::all`] entry.
pub fn compute_spreads(panel: &YieldPanel) -> SpreadFrame {
    let spreads = SpreadId::all();
    let scale = 10f64.powi(SPREAD_DECIMALS);
    let mut values = Vec::with_capacity(panel.len() * spreads.len());
    for rates in panel.rates() {
        values.extend(spreads.iter().map(|s| (s.value(rates) * scale).round() / scale));
    }
    SpreadFrame {
        dates: panel.dates().to_vec(),
        features: FeatureMatrix::new(panel.len(), spreads.len(), values).unwrap(),
        feature_names: spreads.iter().map(|s| s.name()).collect(),
    }
}

/// Parses a `DATE,USREC` file into month flags.
pub fn parse_recession_csv(text: &str) -> Result<BTreeMap<Month, u8>, DataError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| DataError::parse(1, e.to_string()))?.clone();
    if headers.len() != 2 {
        return Err(DataError::parse(1, "expected header DATE,USREC".into()));
    }
    let mut out = BTreeMap::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| DataError::parse(line, e.to_string()))?;
        let month: Month =
            record[0].parse().map_err(|e: super::MonthParseError| DataError::parse(line, e.to_string()))?;
        let flag = match record[1].parse::<f64>() {
            Ok(0.0) => 0,
            Ok(1.0) => 1,
            _ => {
                return Err(DataError::Alignment(format!(
                    "line {line}: recession flag {:?} for {month} is not 0 or 1",
                    &record[1]
                )))
            }
        };
        if out.insert(month, flag).is_some() {
            return Err(DataError::parse(line, format!("duplicate month {month}")));
        }
    }
    Ok(out)
}

/// Aligns recession flags to the feature dates.
pub fn attach_target(frame: SpreadFrame, recession_csv: &str) -> Result<Dataset, DataError> {
    let flags = parse_recession_csv(recession_csv)?;
    attach_flags(frame, &flags)
}

pub fn attach_flags(frame: SpreadFrame, flags: &BTreeMap<Month, u8>) -> Result<Dataset, DataError> {
    let missing: Vec<String> = frame.dates.iter().filter(|d| !flags.contains_key(d)).map(Month::to_string).collect();
    if !missing.is_empty() {
        return Err(DataError::Alignment(format!(
            "recession series does not cover {} month(s): {}",
            missing.len(),
            missing.join(", ")
        )));
    }
    let target = frame.dates.iter().map(|d| flags[d]).collect();
    Ok(Dataset { dates: frame.dates, features: frame.features, target, feature_names: frame.feature_names })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn positives(&self) -> usize {
        self.target.iter().filter(|&&t| t == 1).count()
    }

    pub fn positive_share(&self) -> f64 {
        self.positives() as f64 / self.len() as f64
    }

    pub fn has_both_classes(&self) -> bool {
        let p = self.positives();
        p > 0 && p < self.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn target_f64(&self) -> Vec<f64> {
        self.target.iter().map(|&t| t as f64).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            dates: indices.iter().map(|&i| self.dates[i]).collect(),
            features: self.features.select_rows(indices),
            target: indices.iter().map(|&i| self.target[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn restrict(&self, range: MonthRange) -> Dataset {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| range.contains(self.dates[i])).collect();
        self.subset(&idx)
    }

    /// Canonical CSV: `date,<features...>,target`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date");
        for n in &self.feature_names {
            out.push(',');
            out.push_str(n);
        }
        out.push_str(",target\n");
        for i in 0..self.len() {
            write!(out, "{}", self.dates[i]).unwrap();
            for v in self.features.row(i) {
                write!(out, ",{v}").unwrap();
            }
            writeln!(out, ",{}", self.target[i]).unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Dataset, DataError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| DataError::parse(1, e.to_string()))?.clone();
        let n = headers.len();
        if n < 3 || &headers[0] != "date" || &headers[n - 1] != "target" {
            return Err(DataError::parse(1, "expected header date,<features...>,target".into()));
        }
        let feature_names: Vec<String> = headers.iter().skip(1).take(n - 2).map(String::from).collect();
        let mut dates = Vec::new();
        let mut values = Vec::new();
        let mut target = Vec::new();
        for (k, record) in reader.records().enumerate() {
            let line = k + 2;
            let record = record.map_err(|e| DataError::parse(line, e.to_string()))?;
            dates.push(record[0].parse::<Month>().map_err(|e| DataError::parse(line, e.to_string()))?);
            for cell in record.iter().skip(1).take(n - 2) {
                values.push(
                    cell.parse::<f64>().map_err(|_| DataError::parse(line, format!("non-numeric value {cell:?}")))?,
                );
            }
            target.push(match &record[n - 1] {
                "0" => 0,
                "1" => 1,
                other => return Err(DataError::parse(line, format!("target {other:?} is not 0 or 1"))),
            });
        }
        let features = FeatureMatrix::new(dates.len(), n - 2, values).unwrap();
        Ok(Dataset { dates, features, target, feature_names })
    }
}

/// Partitions rows by date into a training and a test window.
///
/// Rows outside both windows are excluded; row order is preserved.
pub fn temporal_split(ds: &Dataset, train: MonthRange, test: MonthRange) -> Result<(Dataset, Dataset), DataError> {
    for (label, r) in [("train", train), ("test", test)] {
        if r.start > r.end {
            return Err(DataError::Split(format!("{label} window {r} is empty")));
        }
    }
    if train.end >= test.start {
        return Err(DataError::Split(format!("train window {train} must end before test window {test} starts")));
    }
    let train_ds = ds.restrict(train);
    let test_ds = ds.restrict(test);
    for (label, r, d) in [("train", train, &train_ds), ("test", test, &test_ds)] {
        if d.is_empty() {
            return Err(DataError::Split(format!("{label} window {r} selects no rows")));
        }
    }
    Ok((train_ds, test_ds))
}
