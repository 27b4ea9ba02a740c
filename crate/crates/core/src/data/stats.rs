use std::fmt::Write as _;

use super::DataError;
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsTable {
    pub names: Vec<String>,
    pub columns: Vec<ColumnStats>,
}

impl StatsTable {
    pub fn get(&self, name: &str) -> Option<&ColumnStats> {
        self.names.iter().position(|n| n == name).map(|i| &self.columns[i])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,mean,median,min,max,sd\n");
        for (n, c) in self.names.iter().zip(&self.columns) {
            writeln!(out, "{n},{},{},{},{},{}", c.mean, c.median, c.min, c.max, c.sd).unwrap();
        }
        out
    }
}

pub fn column_stats(values: &[f64]) -> ColumnStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len();
    let median = if k % 2 == 1 { sorted[k / 2] } else { (sorted[k / 2 - 1] + sorted[k / 2]) / 2.0 };
    ColumnStats { mean, median, min: sorted[0], max: sorted[k - 1], sd: (ss / (n - 1.0)).sqrt() }
}

/// Mean, median, min, max and sample sd per column.
pub fn descriptive_stats(features: &FeatureMatrix, names: &[String]) -> Result<StatsTable, DataError> {
    if features.n_rows() < 2 {
        return Err(DataError::Invalid(format!(
            "descriptive statistics need at least 2 rows, got {}",
            features.n_rows()
        )));
    }
    Ok(StatsTable {
        names: names.to_vec(),
        columns: (0..features.n_cols()).map(|j| column_stats(&features.column(j))).collect(),
    })
}

/// Pearson correlation matrix with each feature's most correlated partner.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix {
    pub names: Vec<String>,
    /// Row-major `names.len()` square matrix.
    pub coefficients: Vec<Vec<f64>>,
}

impl CorrMatrix {
    /// Partner with the largest |r| among the other features; lower index on ties.
    pub fn most_correlated(&self, j: usize) -> (usize, f64) {
        let mut best = None::<(usize, f64)>;
        for (k, &r) in self.coefficients[j].iter().enumerate() {
            if k == j {
                continue;
            }
            if best.is_none_or(|(_, b)| r.abs() > b.abs()) {
                best = Some((k, r));
            }
        }
        best.expect("correlation matrix needs at least two features")
    }

    pub fn most_correlated_by_name(&self, name: &str) -> Option<(&str, f64)> {
        let j = self.names.iter().position(|n| n == name)?;
        let (k, r) = self.most_correlated(j);
        Some((&self.names[k], r))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (n, row) in self.names.iter().zip(&self.coefficients) {
            out.push_str(n);
            for r in row {
                write!(out, ",{r}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// `feature,most_correlated,coefficient` sorted like the published
    /// table: ascending coefficient, then name.
    pub fn partners_csv(&self) -> String {
        let mut rows: Vec<(usize, usize, f64)> = (0..self.names.len())
            .map(|j| {
                let (k, r) = self.most_correlated(j);
                (j, k, r)
            })
            .collect();
        rows.sort_by(|a, b| a.2.total_cmp(&b.2).then_with(|| self.names[a.0].cmp(&self.names[b.0])));
        let mut out = String::from("feature,most_correlated,coefficient\n");
        for (j, k, r) in rows {
            writeln!(out, "{},{},{r}", self.names[j], self.names[k]).unwrap();
        }
        out
    }
}

pub fn pearson_correlations(features: &FeatureMatrix, names: &[String]) -> Result<CorrMatrix, DataError> {
    let p = features.n_cols();
    let n = features.n_rows() as f64;
    let mut centered = Vec::with_capacity(p);
    for j in 0..p {
        let col = features.column(j);
        let mean = col.iter().sum::<f64>() / n;
        let c: Vec<f64> = col.iter().map(|v| v - mean).collect();
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(DataError::Correlation(names.get(j).cloned().unwrap_or_else(|| j.to_string())));
        }
        centered.push((c, norm));
    }
    let mut coefficients = vec![vec![0.0; p]; p];
    for a in 0..p {
        coefficients[a][a] = 1.0;
        for b in a + 1..p {
            let dot: f64 = centered[a].0.iter().zip(&centered[b].0).map(|(x, y)| x * y).sum();
            let r = (dot / (centered[a].1 * centered[b].1)).clamp(-1.0, 1.0);
            coefficients[a][b] = r;
            coefficients[b][a] = r;
        }
    }
    Ok(CorrMatrix { names: names.to_vec(), coefficients })
}
