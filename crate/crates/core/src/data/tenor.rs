use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TenorUnit {
    Month,
    Year,
}

/// One of the nine constant-maturity tenors. Ordered by maturity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tenor {
    M3,
    M6,
    Y1,
    Y2,
    Y3,
    Y5,
    Y7,
    Y10,
    Y20,
}

impl Tenor {
    pub const ALL: [Tenor; 9] =
        [Tenor::M3, Tenor::M6, Tenor::Y1, Tenor::Y2, Tenor::Y3, Tenor::Y5, Tenor::Y7, Tenor::Y10, Tenor::Y20];

    pub fn unit(self) -> TenorUnit {
        match self {
            Tenor::M3 | Tenor::M6 => TenorUnit::Month,
            _ => TenorUnit::Year,
        }
    }

    pub fn count(self) -> u32 {
        match self {
            Tenor::M3 => 3,
            Tenor::M6 => 6,
            Tenor::Y1 => 1,
            Tenor::Y2 => 2,
            Tenor::Y3 => 3,
            Tenor::Y5 => 5,
            Tenor::Y7 => 7,
            Tenor::Y10 => 10,
            Tenor::Y20 => 20,
        }
    }

    pub fn months(self) -> u32 {
        match self.unit() {
            TenorUnit::Month => self.count(),
            TenorUnit::Year => self.count() * 12,
        }
    }

    /// Column position in a [`YieldPanel`](super::YieldPanel).
    pub fn index(self) -> usize {
        Tenor::ALL.iter().position(|&t| t == self).unwrap()
    }

    /// FRED constant-maturity series id for this tenor.
    pub fn fred_id(self) -> &'static str {
        match self {
            Tenor::M3 => "GS3M",
            Tenor::M6 => "GS6M",
            Tenor::Y1 => "GS1",
            Tenor::Y2 => "GS2",
            Tenor::Y3 => "GS3",
            Tenor::Y5 => "GS5",
            Tenor::Y7 => "GS7",
            Tenor::Y10 => "GS10",
            Tenor::Y20 => "GS20",
        }
    }

    /// Resolves a CSV column header: FRED ids, the T-bill aliases for the
    /// two bill tenors, or the short names used in tables (`M3`, `Y10`).
    pub fn from_header(header: &str) -> Option<Tenor> {
        let h = header.trim().to_ascii_uppercase();
        match h.as_str() {
            "TB3MS" => return Some(Tenor::M3),
            "TB6MS" => return Some(Tenor::M6),
            _ => {}
        }
        Tenor::ALL.into_iter().find(|t| t.fred_id() == h || t.to_string() == h)
    }
}

impl PartialOrd for Tenor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Tenor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.months().cmp(&other.months())
    }
}

impl fmt::Display for Tenor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.unit() {
            TenorUnit::Month => 'M',
            TenorUnit::Year => 'Y',
        };
        write!(f, "{prefix}{}", self.count())
    }
}

impl FromStr for Tenor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tenor::ALL.into_iter().find(|t| t.to_string() == s).ok_or_else(|| format!("unknown tenor {s:?}"))
    }
}

/// An ordered tenor pair naming one term spread.
///
/// Orientation follows the published tables: within a unit the shorter tenor
/// comes first (`M3-M6`, `Y1-Y10`); across units the year tenor comes first
/// (`Y3-M3`). The spread value is `rate(first) - rate(second)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpreadId {
    first: Tenor,
    second: Tenor,
}

impl SpreadId {
    /// Canonical spread for an unordered tenor pair; `None` when `a == b`.
    pub fn canonical(a: Tenor, b: Tenor) -> Option<SpreadId> {
        if a == b {
            return None;
        }
        let (short, long) = if a < b { (a, b) } else { (b, a) };
        let (first, second) = if short.unit() == long.unit() { (short, long) } else { (long, short) };
        Some(SpreadId { first, second })
    }

    pub fn first(self) -> Tenor {
        self.first
    }

    pub fn second(self) -> Tenor {
        self.second
    }

    pub fn name(self) -> String {
        self.to_string()
    }

    pub fn value(self, rates: &[f64]) -> f64 {
        rates[self.first.index()] - rates[self.second.index()]
    }

    /// All 36 spreads in dataset column order: ascending by
    /// (first tenor months, second tenor months).
    pub fn all() -> Vec<SpreadId> {
        let mut out = Vec::with_capacity(36);
        for (i, &a) in Tenor::ALL.iter().enumerate() {
            for &b in &Tenor::ALL[i + 1..] {
                out.push(SpreadId::canonical(a, b).unwrap());
            }
        }
        out.sort_by_key(|s| (s.first.months(), s.second.months()));
        out
    }
}

impl fmt::Display for SpreadId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.first, self.second)
    }
}

impl FromStr for SpreadId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once('-').ok_or_else(|| format!("bad spread {s:?}"))?;
        let (a, b): (Tenor, Tenor) = (a.parse()?, b.parse()?);
        let id = SpreadId::canonical(a, b).ok_or_else(|| format!("degenerate spread {s:?}"))?;
        if id.first != a {
            return Err(format!("{s:?} is not in canonical orientation ({id})"));
        }
        Ok(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tenor_order_is_by_maturity() {
        let mut sorted = Tenor::ALL;
        sorted.sort();
        assert_eq!(sorted, Tenor::ALL);
        assert!(Tenor::M6 < Tenor::Y1);
    }

    #[test]
    fn thirty_six_distinct_spreads() {
        let all = SpreadId::all();
        assert_eq!(all.len(), 36);
        let names: std::collections::BTreeSet<_> = all.iter().map(|s| s.name()).collect();
        assert_eq!(names.len(), 36);
    }

    #[test]
    fn naming_matches_published_tables() {
        let all: Vec<String> = SpreadId::all().iter().map(|s| s.name()).collect();
        for n in ["M3-M6", "Y1-Y10", "Y3-M3", "Y20-M6", "Y2-Y5", "Y10-Y20", "Y1-M3"] {
            assert!(all.contains(&n.to_string()), "{n}");
        }
        assert_eq!(all[0], "M3-M6");
        assert_eq!(&all[1..3], ["Y1-M3", "Y1-M6"]);
        assert_eq!(all.last().unwrap(), "Y20-M6");
    }

    #[test]
    fn spread_value_is_first_minus_second() {
        let mut rates = [0.0; 9];
        rates[Tenor::M3.index()] = 4.0;
        rates[Tenor::M6.index()] = 4.5;
        let id: SpreadId = "M3-M6".parse().unwrap();
        assert_eq!(id.value(&rates), -0.5);
        assert!("M6-M3".parse::<SpreadId>().is_err());
    }

    #[test]
    fn header_aliases() {
        assert_eq!(Tenor::from_header("GS10"), Some(Tenor::Y10));
        assert_eq!(Tenor::from_header("tb3ms"), Some(Tenor::M3));
        assert_eq!(Tenor::from_header("Y20"), Some(Tenor::Y20));
        assert_eq!(Tenor::from_header("GS30"), None);
    }
}
