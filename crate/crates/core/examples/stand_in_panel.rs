//! Regenerates `tests/fixtures/stand_in_panel_1969_2020.csv`.
//!
//! Months from 1990 on are copied from the vendored Treasury file; the
//! missing 20-year rate before 1993-10 is filled as the 10-year rate plus a
//! noisy premium. Months 1969-01..1989-12 are synthetic: a Nelson-Siegel curve
//! whose 10-year level and 10y-3m slope follow hand-set anchor paths, with a
//! short-end bump during recession months.
//!
//! Usage: cargo run --example stand_in_panel > tests/fixtures/stand_in_panel_1969_2020.csv

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const REAL: &str = include_str!("../tests/fixtures/treasury_monthly_1990_2020.csv");
const USREC: &str = include_str!("../tests/fixtures/usrec_1969_2020.csv");
const TENORS_YEARS: [f64; 9] = [0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 20.0];
const LAMBDA: f64 = 2.0;

// (year, month, value) anchors, linearly interpolated by month.
#[rustfmt::skip]
const LEVEL: &[(i32, u32, f64)] = &[
    (1969, 1, 6.0), (1969, 12, 7.6), (1970, 6, 7.9), (1971, 3, 5.9), (1971, 8, 6.8), (1972, 6, 6.1),
    (1973, 8, 7.4), (1974, 8, 8.0), (1975, 6, 7.9), (1976, 12, 6.9), (1977, 12, 7.7), (1978, 12, 9.0),
    (1979, 12, 10.4), (1980, 3, 12.7), (1980, 6, 9.8), (1981, 9, 15.3), (1982, 6, 14.3), (1982, 12, 10.5),
    (1983, 6, 10.8), (1984, 6, 13.6), (1985, 6, 10.2), (1986, 8, 7.2), (1987, 9, 9.4), (1988, 6, 8.9),
    (1989, 3, 9.4), (1989, 12, 7.8),
];
#[rustfmt::skip]
const SLOPE: &[(i32, u32, f64)] = &[
    (1969, 1, 0.4), (1969, 6, -0.3), (1970, 1, -0.6), (1970, 6, 0.8), (1970, 11, 1.6), (1971, 6, 2.4),
    (1972, 6, 2.1), (1973, 1, 1.0), (1973, 6, -0.4), (1974, 1, -0.5), (1974, 8, -1.4), (1975, 1, 0.6),
    (1975, 6, 1.9), (1976, 6, 2.0), (1977, 6, 2.1), (1978, 6, 0.9), (1978, 12, -0.3), (1979, 6, -0.6),
    (1980, 3, -2.6), (1980, 7, 2.0), (1980, 12, -1.6), (1981, 6, -1.2), (1981, 10, 0.1), (1982, 6, 1.0),
    (1982, 11, 2.4), (1983, 6, 2.0), (1984, 6, 2.0), (1985, 6, 3.0), (1986, 6, 1.5), (1987, 6, 2.1),
    (1988, 6, 1.8), (1989, 3, 0.1), (1989, 6, -0.3), (1989, 12, 0.3),
];

fn ordinal(y: i32, m: u32) -> i32 {
    y * 12 + m as i32 - 1
}

fn interpolate(anchors: &[(i32, u32, f64)], t: i32) -> f64 {
    for w in anchors.windows(2) {
        let (a, b) = (ordinal(w[0].0, w[0].1), ordinal(w[1].0, w[1].1));
        if t >= a && t <= b {
            let s = f64::from(t - a) / f64::from(b - a);
            return w[0].2 + s * (w[1].2 - w[0].2);
        }
    }
    anchors.last().unwrap().2
}

fn loadings(tau: f64) -> (f64, f64) {
    let x = tau / LAMBDA;
    let f1 = (1.0 - (-x).exp()) / x;
    (f1, f1 - (-x).exp())
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(19_690_101);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let short_noise = Normal::new(0.0, 0.08).unwrap();
    let recession: std::collections::HashSet<String> =
        USREC.lines().skip(1).filter(|l| l.ends_with(",1")).map(|l| l[..7].to_string()).collect();

    println!("DATE,GS3M,GS6M,GS1,GS2,GS3,GS5,GS7,GS10,GS20");
    let mut curvature: f64 = 0.0;
    for t in ordinal(1969, 1)..=ordinal(1989, 12) {
        let (y, m) = (t.div_euclid(12), t.rem_euclid(12) + 1);
        let key = format!("{y:04}-{m:02}");
        let level = interpolate(LEVEL, t);
        let slope = interpolate(SLOPE, t);
        curvature = 0.9 * curvature + 0.1 * Normal::new(0.0, 1.0).unwrap().sample(&mut rng);
        let (l10, c10) = loadings(10.0);
        let (l3m, c3m) = loadings(0.25);
        let beta2 = curvature;
        let beta1 = (slope - beta2 * (c10 - c3m)) / (l10 - l3m);
        let beta0 = level - beta1 * l10 - beta2 * c10;
        let bump = if recession.contains(&key) { 0.25 } else { 0.0 };
        let rates: Vec<String> = TENORS_YEARS
            .iter()
            .enumerate()
            .map(|(k, &tau)| {
                let (f1, f2) = loadings(tau);
                let mut r = beta0 + beta1 * f1 + beta2 * f2 + noise.sample(&mut rng);
                if k == 0 {
                    r += bump + short_noise.sample(&mut rng);
                }
                format!("{:.2}", r.max(0.01))
            })
            .collect();
        println!("{key}-01,{}", rates.join(","));
    }
    for line in REAL.lines().skip(1) {
        let mut cells: Vec<String> = line.split(',').map(str::to_string).collect();
        if cells[9] == "." {
            let gs10: f64 = cells[8].parse().unwrap();
            cells[9] = format!("{:.2}", gs10 + 0.6 + noise.sample(&mut rng));
        }
        println!("{}", cells.join(","));
    }
}
