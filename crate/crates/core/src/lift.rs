//! Target lift of boolean conditions and of rank-based feature deciles.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LiftError {
    #[error("lift undefined: condition selects no rows")]
    EmptyMask,
    #[error("lift undefined: target has no positives")]
    NoPositives,
    #[error("length mismatch: {0} values but {1} targets")]
    Length(usize, usize),
    #[error("decile lift needs at least 10 rows, got {0}")]
    TooFewRows(usize),
    #[error("value at row {0} is not finite")]
    NonFinite(usize),
}

/// `P(A and B) / (P(A) P(B))` where `A` is the mask and `B` the positive class.
pub fn lift(mask: &[bool], target: &[u8]) -> Result<f64, LiftError> {
    if mask.len() != target.len() {
        return Err(LiftError::Length(mask.len(), target.len()));
    }
    let n = target.len();
    let positives = target.iter().filter(|&&t| t == 1).count();
    let selected = mask.iter().filter(|&&m| m).count();
    let hits = mask.iter().zip(target).filter(|&(&m, &t)| m && t == 1).count();
    lift_from_counts(hits, selected, positives, n)
}

/// Lift from raw counts: `hits` positives among `selected` rows, out of
/// `positives` among `n`.
pub fn lift_from_counts(hits: usize, selected: usize, positives: usize, n: usize) -> Result<f64, LiftError> {
    if selected == 0 {
        return Err(LiftError::EmptyMask);
    }
    if positives == 0 {
        return Err(LiftError::NoPositives);
    }
    Ok((hits as f64 * n as f64) / (selected as f64 * positives as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecileLift {
    /// 1 holds the smallest values, 10 the largest.
    pub decile: usize,
    /// Smallest value in the bin.
    pub lo: f64,
    /// Largest value in the bin.
    pub hi: f64,
    pub count: usize,
    pub positives: usize,
    pub lift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftTable {
    pub feature: String,
    pub deciles: Vec<DecileLift>,
}

impl LiftTable {
    pub const CSV_HEADER: &'static str = "feature,decile,interval_lo,interval_hi,count,lift";

    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for d in &self.deciles {
            out.push_str(&format!("{},{},{},{},{},{:.6}\n", self.feature, d.decile, d.lo, d.hi, d.count, d.lift));
        }
        out
    }
}

/// Writes several tables under one header.
pub fn lift_tables_csv(tables: &[LiftTable]) -> String {
    let mut out = format!("{}\n", LiftTable::CSV_HEADER);
    for t in tables {
        out.push_str(&t.csv_rows());
    }
    out
}

/// Decile index (0..10) of every row. Rows are ranked by value with ties
/// kept in row order (`-0.0` ties with `0.0`); the first `n mod 10` bins
/// take one extra row. NaN sorts last.
pub fn decile_assignment(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    let key = |v: f64| if v == 0.0 { 0.0 } else { v };
    order.sort_by(|&a, &b| key(values[a]).total_cmp(&key(values[b])).then(a.cmp(&b)));
    let (q, r) = (n / 10, n % 10);
    let mut bins = vec![0; n];
    let mut pos = 0;
    for d in 0..10 {
        let size = q + usize::from(d < r);
        for &row in &order[pos..pos + size] {
            bins[row] = d;
        }
        pos += size;
    }
    bins
}

/// Lift of each rank decile of `values`. Deciles without positives have lift 0.
pub fn decile_lift(feature: &str, values: &[f64], target: &[u8]) -> Result<LiftTable, LiftError> {
    if values.len() != target.len() {
        return Err(LiftError::Length(values.len(), target.len()));
    }
    let n = values.len();
    if n < 10 {
        return Err(LiftError::TooFewRows(n));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(LiftError::NonFinite(i));
    }
    let positives = target.iter().filter(|&&t| t == 1).count();
    if positives == 0 {
        return Err(LiftError::NoPositives);
    }
    let bins = decile_assignment(values);
    let mut deciles: Vec<DecileLift> = (1..=10)
        .map(|decile| DecileLift {
            decile,
            lo: f64::INFINITY,
            hi: f64::NEG_INFINITY,
            count: 0,
            positives: 0,
            lift: 0.0,
        })
        .collect();
    for ((&v, &t), &b) in values.iter().zip(target).zip(&bins) {
        let d = &mut deciles[b];
        d.lo = d.lo.min(v);
        d.hi = d.hi.max(v);
        d.count += 1;
        d.positives += usize::from(t == 1);
    }
    for d in &mut deciles {
        d.lift = lift_from_counts(d.positives, d.count, positives, n)?;
    }
    Ok(LiftTable { feature: feature.to_string(), deciles })
}
