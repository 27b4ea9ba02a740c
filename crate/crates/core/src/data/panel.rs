use std::collections::BTreeMap;

use super::{DataError, Month, Tenor};

/// Monthly constant-maturity rates (annualized percent) for the nine tenors.
///
/// Dates are strictly increasing. Input files must be gap-free; months
/// rejected for missing tenors are the only holes a panel can contain.
#[derive(Debug, Clone, PartialEq)]
pub struct YieldPanel {
    dates: Vec<Month>,
    rates: Vec<[f64; 9]>,
}

/// A parsed panel together with the months dropped for missing tenors.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedPanel {
    pub panel: YieldPanel,
    pub rejected: Vec<RejectedMonth>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedMonth {
    pub month: Month,
    pub missing: Vec<Tenor>,
}

impl ParsedPanel {
    /// Plain-text rejection report, one month per line.
    pub fn rejection_report(&self) -> String {
        self.rejected.iter().map(|r| format!("{}\n", r.month)).collect()
    }
}

impl YieldPanel {
    pub fn new(dates: Vec<Month>, rates: Vec<[f64; 9]>) -> Result<Self, DataError> {
        if dates.len() != rates.len() {
            return Err(DataError::Invalid(format!("{} dates but {} rate rows", dates.len(), rates.len())));
        }
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                return Err(DataError::Invalid(format!("{} does not follow {}", w[1], w[0])));
            }
        }
        for (d, row) in dates.iter().zip(&rates) {
            if let Some(t) = Tenor::ALL.iter().find(|t| !(row[t.index()].is_finite() && row[t.index()] >= 0.0)) {
                return Err(DataError::Invalid(format!("{d}: rate for {t} is {}", row[t.index()])));
            }
        }
        Ok(Self { dates, rates })
    }

    pub fn dates(&self) -> &[Month] {
        &self.dates
    }

    pub fn rates(&self) -> &[[f64; 9]] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn column(&self, tenor: Tenor) -> Vec<f64> {
        self.rates.iter().map(|r| r[tenor.index()]).collect()
    }

    /// Merges single-series observations (one `DATE,value` file per tenor).
    ///
    /// Every tenor must be supplied. The union of observed months must be
    /// gap-free; a month absent from, or missing in, any series is rejected.
    pub fn from_series(series: &BTreeMap<Tenor, Series>) -> Result<ParsedPanel, DataError> {
        if let Some(t) = Tenor::ALL.iter().find(|t| !series.contains_key(t)) {
            return Err(DataError::MissingTenor(*t));
        }
        let mut grid: BTreeMap<Month, [Option<f64>; 9]> = BTreeMap::new();
        for (tenor, obs) in series {
            let mut prev: Option<Month> = None;
            for (line, &(month, value)) in obs.iter().enumerate() {
                if let Some(p) = prev {
                    if month == p {
                        return Err(DataError::parse(line + 2, format!("duplicate month {month} in {tenor}")));
                    }
                    if month < p {
                        return Err(DataError::parse(line + 2, format!("month {month} out of order in {tenor}")));
                    }
                }
                prev = Some(month);
                grid.entry(month).or_insert([None; 9])[tenor.index()] = value;
            }
        }
        let months: Vec<Month> = grid.keys().copied().collect();
        if let Some(w) = months.windows(2).find(|w| w[1] != w[0].succ()) {
            return Err(DataError::Invalid(format!("series leave a gap between {} and {}", w[0], w[1])));
        }
        assemble(grid.into_iter().collect())
    }
}

/// Parses a merged wide CSV: `DATE` plus one column per tenor, header names
/// resolved by [`Tenor::from_header`]. Missing cells are `.` or empty.
pub fn parse_yield_csv(text: &str) -> Result<ParsedPanel, DataError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| DataError::parse(1, e.to_string()))?.clone();
    if !headers.get(0).is_some_and(is_date_header) {
        return Err(DataError::parse(1, "first column must be DATE".into()));
    }
    let mut columns: [Option<usize>; 9] = [None; 9];
    for (i, h) in headers.iter().enumerate().skip(1) {
        if let Some(t) = Tenor::from_header(h) {
            if columns[t.index()].is_some() {
                return Err(DataError::parse(1, format!("tenor {t} appears twice")));
            }
            columns[t.index()] = Some(i);
        }
    }
    let columns: Vec<usize> =
        Tenor::ALL.iter().map(|t| columns[t.index()].ok_or(DataError::MissingTenor(*t))).collect::<Result<_, _>>()?;

    let mut rows = Vec::new();
    let mut prev: Option<Month> = None;
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| DataError::parse(line, e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != headers.len() {
            return Err(DataError::parse(line, format!("expected {} fields, found {}", headers.len(), record.len())));
        }
        let month: Month =
            record[0].parse().map_err(|e: super::MonthParseError| DataError::parse(line, e.to_string()))?;
        if let Some(p) = prev {
            if month == p {
                return Err(DataError::parse(line, format!("duplicate month {month}")));
            }
            if month < p {
                return Err(DataError::parse(line, format!("month {month} out of order after {p}")));
            }
            if month != p.succ() {
                return Err(DataError::parse(line, format!("gap: expected {} but found {month}", p.succ())));
            }
        }
        prev = Some(month);
        let mut values = [None; 9];
        for (t, &col) in columns.iter().enumerate() {
            values[t] = parse_rate(&record[col]).map_err(|msg| DataError::parse(line, msg))?;
        }
        rows.push((month, values));
    }
    assemble(rows)
}

/// Monthly observations of one series; `None` marks a missing cell.
pub type Series = Vec<(Month, Option<f64>)>;

/// Parses a single FRED series file (`DATE,<series id>`); returns the series
/// id from the header and the observations, `None` where the cell is missing.
pub fn parse_series_csv(text: &str) -> Result<(String, Series), DataError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| DataError::parse(1, e.to_string()))?.clone();
    if headers.len() != 2 || !is_date_header(&headers[0]) {
        return Err(DataError::parse(1, "expected header DATE,<series>".into()));
    }
    let id = headers[1].to_string();
    let mut out = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| DataError::parse(line, e.to_string()))?;
        let month: Month =
            record[0].parse().map_err(|e: super::MonthParseError| DataError::parse(line, e.to_string()))?;
        let value = parse_rate(&record[1]).map_err(|msg| DataError::parse(line, msg))?;
        out.push((month, value));
    }
    Ok((id, out))
}

fn is_date_header(h: &str) -> bool {
    h.eq_ignore_ascii_case("DATE") || h.eq_ignore_ascii_case("observation_date")
}

fn parse_rate(cell: &str) -> Result<Option<f64>, String> {
    if cell.is_empty() || cell == "." {
        return Ok(None);
    }
    let v: f64 = cell.parse().map_err(|_| format!("non-numeric rate {cell:?}"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("rate {cell:?} is not a finite non-negative number"));
    }
    Ok(Some(v))
}

fn assemble(rows: Vec<(Month, [Option<f64>; 9])>) -> Result<ParsedPanel, DataError> {
    let mut dates = Vec::with_capacity(rows.len());
    let mut rates = Vec::with_capacity(rows.len());
    let mut rejected = Vec::new();
    for (month, values) in rows {
        let missing: Vec<Tenor> = Tenor::ALL.into_iter().filter(|t| values[t.index()].is_none()).collect();
        if missing.is_empty() {
            dates.push(month);
            rates.push(values.map(Option::unwrap));
        } else {
            rejected.push(RejectedMonth { month, missing });
        }
    }
    Ok(ParsedPanel { panel: YieldPanel::new(dates, rates)?, rejected })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "DATE,GS3M,GS6M,GS1,GS2,GS3,GS5,GS7,GS10,GS20";

    #[test]
    fn two_rows_echo_verbatim() {
        let text = format!(
            "{HEADER}\n2000-01-01,5.32,5.50,5.85,6.18,6.35,6.44,6.65,6.66,6.94\n2000-02,5.55,5.72,6.12,6.49,6.51,6.56,6.68,6.52,6.70\n"
        );
        let parsed = parse_yield_csv(&text).unwrap();
        assert_eq!(parsed.panel.len(), 2);
        assert!(parsed.rejected.is_empty());
        assert_eq!(parsed.panel.rates()[0][0], 5.32);
        assert_eq!(parsed.panel.rates()[1][8], 6.70);
        assert_eq!(parsed.panel.dates()[1], Month::new(2000, 2).unwrap());
    }

    #[test]
    fn missing_cell_rejects_month() {
        let text = format!(
            "{HEADER}\n2000-01-01,5.32,5.50,5.85,6.18,6.35,6.44,6.65,6.66,.\n2000-02-01,5.55,5.72,6.12,6.49,6.51,6.56,6.68,6.52,6.70\n"
        );
        let parsed = parse_yield_csv(&text).unwrap();
        assert_eq!(parsed.panel.len(), 1);
        assert_eq!(parsed.rejected.len(), 1);
        assert_eq!(parsed.rejected[0].missing, vec![Tenor::Y20]);
        assert_eq!(parsed.rejection_report(), "2000-01\n");
    }

    #[test]
    fn errors_name_the_row() {
        let row = |d: &str, v: &str| format!("{d},{v},1,1,1,1,1,1,1,1\n");
        let cases = [
            (format!("{HEADER}\n{}", row("2000-13-01", "1")), "line 2"),
            (format!("{HEADER}\n{}{}", row("2000-01", "1"), row("2000-02", "abc")), "line 3"),
            (format!("{HEADER}\n{}{}", row("2000-01", "1"), row("2000-01", "1")), "duplicate"),
            (format!("{HEADER}\n{}{}", row("2000-02", "1"), row("2000-01", "1")), "out of order"),
            (format!("{HEADER}\n{}{}", row("2000-01", "1"), row("2000-03", "1")), "gap"),
        ];
        for (text, needle) in cases {
            let err = parse_yield_csv(&text).unwrap_err().to_string();
            assert!(err.contains(needle), "{err:?} should mention {needle:?}");
        }
    }

    #[test]
    fn missing_tenor_column() {
        let err = parse_yield_csv("DATE,GS3M\n2000-01,1\n").unwrap_err();
        assert!(matches!(err, DataError::MissingTenor(Tenor::M6)));
    }

    #[test]
    fn merges_single_series() {
        let mut series = BTreeMap::new();
        for t in Tenor::ALL {
            let (_, obs) = parse_series_csv(&format!(
                "DATE,{}\n2000-01-01,1.0\n2000-02-01,{}\n",
                t.fred_id(),
                if t == Tenor::Y7 { "." } else { "2.0" }
            ))
            .unwrap();
            series.insert(t, obs);
        }
        let parsed = YieldPanel::from_series(&series).unwrap();
        assert_eq!(parsed.panel.len(), 1);
        assert_eq!(parsed.rejected[0].month, Month::new(2000, 2).unwrap());
        assert_eq!(parsed.rejected[0].missing, vec![Tenor::Y7]);
    }
}
