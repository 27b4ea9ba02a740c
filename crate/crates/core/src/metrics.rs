//! Confusion-matrix metrics reported per class.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("{0} labels but {1} truth values")]
    Length(usize, usize),
    #[error("no instances to evaluate")]
    Empty,
    #[error("value {0} at index {1} is not a 0/1 label")]
    NotBinary(u8, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// The same counts with the roles of the classes swapped.
    pub fn inverted(&self) -> Confusion {
        Confusion { tp: self.tn, fp: self.fn_, tn: self.tp, fn_: self.fp }
    }

    pub fn precision(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn specificity(&self) -> Option<f64> {
        ratio(self.tn, self.tn + self.fp)
    }

    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.tp + self.tn, self.total())
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub class: u8,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Counts with class 1 as the positive class.
    pub confusion: Confusion,
    /// Class 0 first.
    pub classes: [ClassMetrics; 2],
    pub threshold: f64,
}

pub fn evaluate(labels: &[u8], truth: &[u8]) -> Result<MetricsReport, MetricsError> {
    if labels.len() != truth.len() {
        return Err(MetricsError::Length(labels.len(), truth.len()));
    }
    if labels.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut c = Confusion { tp: 0, fp: 0, tn: 0, fn_: 0 };
    for (i, (&l, &t)) in labels.iter().zip(truth).enumerate() {
        match (l, t) {
            (1, 1) => c.tp += 1,
            (1, 0) => c.fp += 1,
            (0, 0) => c.tn += 1,
            (0, 1) => c.fn_ += 1,
            _ => return Err(MetricsError::NotBinary(if l > 1 { l } else { t }, i)),
        }
    }
    let class = |class, c: Confusion| ClassMetrics {
        class,
        precision: c.precision(),
        recall: c.recall(),
        specificity: c.specificity(),
    };
    Ok(MetricsReport { confusion: c, classes: [class(0, c.inverted()), class(1, c)], threshold: 0.5 })
}

/// Formats a rate with four decimals, or an em dash when undefined.
pub fn format_rate(r: Option<f64>) -> String {
    r.map_or_else(|| "\u{2014}".to_string(), |v| format!("{v:.4}"))
}

impl MetricsReport {
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn class(&self, class: u8) -> &ClassMetrics {
        &self.classes[usize::from(class == 1)]
    }

    pub const CSV_HEADER: &'static str = "model,class,precision,recall,specificity";

    pub fn csv_rows(&self, model: &str) -> String {
        self.classes
            .iter()
            .map(|c| {
                format!(
                    "{model},{},{},{},{}\n",
                    c.class,
                    format_rate(c.precision),
                    format_rate(c.recall),
                    format_rate(c.specificity)
                )
            })
            .collect()
    }
}

/// Aligned text table over several models, one row per (model, class).
pub fn metrics_table(reports: &[(&str, &MetricsReport)]) -> String {
    let mut rows =
        vec![["model".to_string(), "class".into(), "precision".into(), "recall".into(), "specificity".into()]];
    for (name, r) in reports {
        for c in &r.classes {
            rows.push([
                name.to_string(),
                c.class.to_string(),
                format_rate(c.precision),
                format_rate(c.recall),
                format_rate(c.specificity),
            ]);
        }
    }
    let widths: Vec<usize> = (0..5).map(|k| rows.iter().map(|r| r[k].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in &rows {
        let cells: Vec<String> =
            r.iter().zip(&widths).map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count()))).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}
