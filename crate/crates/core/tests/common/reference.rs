//! Reference targets for the data-determined tables.

/// (feature, mean, median, sd) in percentage points.
pub const SPREAD_STATS: [(&str, f64, f64, f64); 36] = [
    ("Y1-Y2", -0.29, -0.31, 0.34),
    ("Y1-Y3", -0.46, -0.51, 0.55),
    ("Y1-Y5", -0.75, -0.77, 0.81),
    ("Y1-Y7", -0.98, -1.00, 0.99),
    ("Y1-Y10", -1.10, -1.20, 1.10),
    ("Y1-Y20", -1.40, -1.30, 1.40),
    ("Y1-M3", 0.52, 0.43, 0.44),
    ("Y1-M6", 0.39, 0.31, 0.32),
    ("Y2-Y3", -0.17, -0.17, 0.22),
    ("Y2-Y5", -0.49, -0.46, 0.53),
    ("Y2-Y7", -0.74, -0.71, 0.72),
    ("Y2-Y10", -0.93, -0.85, 0.91),
    ("Y2-Y20", -1.30, -1.10, 1.20),
    ("Y2-M3", 0.79, 0.72, 0.66),
    ("Y2-M6", 0.69, 0.61, 0.54),
    ("Y3-Y5", -0.30, -0.27, 0.31),
    ("Y3-Y7", -0.53, -0.50, 0.52),
    ("Y3-Y10", -0.69, -0.60, 0.71),
    ("Y3-Y20", -1.00, -0.82, 1.00),
    ("Y3-M3", 0.97, 0.98, 0.80),
    ("Y3-M6", 0.85, 0.86, 0.69),
    ("Y5-Y7", -0.23, -0.21, 0.22),
    ("Y5-Y10", -0.39, -0.31, 0.42),
    ("Y5-Y20", -0.73, -0.60, 0.72),
    ("Y5-M3", 1.30, 1.30, 0.99),
    ("Y5-M6", 1.10, 1.20, 0.89),
    ("Y7-Y10", -0.16, -0.11, 0.22),
    ("Y7-Y20", -0.50, -0.42, 0.52),
    ("Y7-M3", 1.50, 1.60, 1.10),
    ("Y7-M6", 1.40, 1.40, 1.00),
    ("Y10-Y20", -0.34, -0.34, 0.34),
    ("Y10-M3", 1.70, 1.70, 1.20),
    ("Y10-M6", 1.50, 1.60, 1.20),
    ("Y20-M3", 1.90, 2.00, 1.40),
    ("Y20-M6", 1.80, 1.80, 1.40),
    ("M3-M6", -0.12, -0.10, 0.19),
];

/// (feature, most correlated feature, coefficient).
pub const CORRELATION_PARTNERS: [(&str, &str, f64); 36] = [
    ("Y1-Y10", "Y20-M6", -0.98),
    ("Y20-M6", "Y1-Y10", -0.98),
    ("Y1-Y7", "Y20-M6", -0.97),
    ("Y1-Y5", "Y10-M6", -0.97),
    ("Y10-M6", "Y1-Y5", -0.97),
    ("Y1-Y20", "Y20-M6", -0.97),
    ("Y7-M6", "Y1-Y5", -0.97),
    ("Y2-Y5", "Y20-M6", -0.96),
    ("Y20-M3", "Y1-Y7", -0.96),
    ("Y2-Y7", "Y20-M6", -0.96),
    ("Y10-M3", "Y1-Y5", -0.96),
    ("Y1-Y3", "Y7-M6", -0.96),
    ("Y5-M6", "Y1-Y3", -0.96),
    ("Y7-M3", "Y1-Y3", -0.95),
    ("Y1-Y2", "Y5-M6", -0.94),
    ("Y2-Y10", "Y20-M6", -0.94),
    ("Y2-Y3", "Y20-M6", -0.94),
    ("Y5-M3", "Y1-Y3", -0.94),
    ("Y3-Y5", "Y20-M6", -0.93),
    ("Y3-Y7", "Y20-M6", -0.93),
    ("Y3-M6", "Y1-Y2", -0.92),
    ("Y2-Y20", "Y20-M6", -0.91),
    ("Y3-Y10", "Y20-M6", -0.90),
    ("Y3-M3", "Y1-Y2", -0.90),
    ("Y5-Y7", "Y20-M6", -0.87),
    ("Y3-Y20", "Y20-M6", -0.87),
    ("Y5-Y10", "Y20-M6", -0.83),
    ("Y2-M6", "Y1-Y2", -0.81),
    ("Y5-Y20", "Y20-M6", -0.80),
    ("Y2-M3", "Y1-Y2", -0.79),
    ("Y1-M3", "M3-M6", -0.75),
    ("M3-M6", "Y1-M3", -0.75),
    ("Y7-Y20", "Y20-M6", -0.73),
    ("Y7-Y10", "Y20-M6", -0.73),
    ("Y10-Y20", "Y20-M6", -0.65),
    ("Y1-M6", "M3-M6", -0.44),
];

/// Full-sample decile lift of M3-M6, deciles 1 to 10.
pub const M3_M6_DECILE_LIFT: [f64; 10] = [1.46, 0.74, 1.20, 0.51, 0.85, 0.77, 0.34, 0.41, 1.88, 1.79];

/// Spreads singled out as the strongest recession signals.
pub const HIGHLIGHTED_SPREADS: [&str; 6] = ["M3-M6", "Y2-Y5", "Y5-Y10", "Y3-Y7", "Y3-M3", "Y2-M6"];
