//! The per-county observation and its canonical column names.

use serde::{Deserialize, Serialize};

/// Canonical name of the join key column.
pub const FIPS: &str = "fips";
/// Canonical name of the target column.
pub const TARGET: &str = "perc_full_vac";
/// Canonical names of the seven predictor columns, in model order.
pub const PREDICTORS: [&str; 7] = [
    "perc_food_st",
    "perc_asian",
    "perc_hisp",
    "perc_black",
    "perc_old65",
    "perc_young25",
    "perc_rep",
];
/// Canonical name of the observation-weight column (adult population).
pub const WEIGHT: &str = "pop_adult";

/// Tolerance when checking that the race/ethnicity shares leave a
/// non-negative residual for White/Other.
pub const RACE_SHARE_TOLERANCE: f64 = 1e-9;

/// One county observation: join key, display names, the seven predictor
/// shares, the target vaccination rate, and population counts.
///
/// All share columns are stored as fractions in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountyRecord {
    pub fips: String,
    pub name: String,
    pub state: String,
    pub perc_full_vac: f64,
    pub perc_food_st: f64,
    pub perc_asian: f64,
    pub perc_hisp: f64,
    pub perc_black: f64,
    pub perc_old65: f64,
    pub perc_young25: f64,
    pub perc_rep: f64,
    pub pop_adult: f64,
    pub pop_total: f64,
}

impl CountyRecord {
    /// Numeric field lookup by canonical column name.
    pub fn numeric(&self, name: &str) -> Option<f64> {
        match name {
            "perc_full_vac" => Some(self.perc_full_vac),
            "perc_food_st" => Some(self.perc_food_st),
            "perc_asian" => Some(self.perc_asian),
            "perc_hisp" => Some(self.perc_hisp),
            "perc_black" => Some(self.perc_black),
            "perc_old65" => Some(self.perc_old65),
            "perc_young25" => Some(self.perc_young25),
            "perc_rep" => Some(self.perc_rep),
            "pop_adult" => Some(self.pop_adult),
            "pop_total" => Some(self.pop_total),
            _ => None,
        }
    }

    /// All numeric share fields with their canonical names.
    pub fn shares(&self) -> [(&'static str, f64); 8] {
        [
            ("perc_full_vac", self.perc_full_vac),
            ("perc_food_st", self.perc_food_st),
            ("perc_asian", self.perc_asian),
            ("perc_hisp", self.perc_hisp),
            ("perc_black", self.perc_black),
            ("perc_old65", self.perc_old65),
            ("perc_young25", self.perc_young25),
            ("perc_rep", self.perc_rep),
        ]
    }

    /// Every invariant violation in this record, as `(field, message)` pairs.
    /// An empty result means the record is valid.
    pub fn violations(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        if !is_valid_fips(&self.fips) {
            out.push((
                "fips".to_string(),
                format!("`{}` is not a 5-digit fips code", self.fips),
            ));
        }
        for (field, value) in self.shares() {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                out.push((
                    field.to_string(),
                    format!("{value} outside [0, 1]"),
                ));
            }
        }
        if !self.pop_adult.is_finite() || self.pop_adult < 1.0 {
            out.push((
                "pop_adult".to_string(),
                format!("{} is not a positive count", self.pop_adult),
            ));
        }
        if !self.pop_total.is_finite() || self.pop_total < 1.0 {
            out.push((
                "pop_total".to_string(),
                format!("{} is not a positive count", self.pop_total),
            ));
        }
        let race_sum = self.perc_asian + self.perc_hisp + self.perc_black;
        if race_sum > 1.0 + RACE_SHARE_TOLERANCE {
            out.push((
                "perc_asian+perc_hisp+perc_black".to_string(),
                format!("race shares sum to {race_sum}, leaving no residual"),
            ));
        }
        out
    }
}

/// A valid fips code is exactly five ASCII digits.
pub fn is_valid_fips(s: &str) -> bool {
    s.len() == 5 && s.bytes().all(|b| b.is_ascii_digit())
}

/// Left-pad an all-digit key shorter than five characters with zeros.
/// Returns `None` when the input cannot be a fips code.
pub fn normalize_fips(raw: &str) -> Option<String> {
    let s = raw.trim();
    if s.is_empty() || s.len() > 5 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(format!("{s:0>5}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn valid_record() -> CountyRecord {
        CountyRecord {
            fips: "06059".to_string(),
            name: "Orange".to_string(),
            state: "CA".to_string(),
            perc_full_vac: 0.716,
            perc_food_st: 0.03,
            perc_asian: 0.203,
            perc_hisp: 0.04,
            perc_black: 0.016,
            perc_old65: 0.15,
            perc_young25: 0.07,
            perc_rep: 0.45,
            pop_adult: 2_500_000.0,
            pop_total: 3_100_000.0,
        }
    }

    #[test]
    fn valid_record_has_no_violations() {
        assert!(valid_record().violations().is_empty());
    }

    #[test]
    fn zero_pop_adult_is_a_violation() {
        let mut r = valid_record();
        r.pop_adult = 0.0;
        let v = r.violations();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].0, "pop_adult");
    }

    #[test]
    fn race_share_overflow_is_a_violation() {
        let mut r = valid_record();
        r.perc_asian = 0.40;
        r.perc_hisp = 0.35;
        r.perc_black = 0.30;
        let v = r.violations();
        assert_eq!(v.len(), 1);
        assert!(v[0].0.contains("perc_asian"));
    }

    #[test]
    fn race_share_at_exactly_one_is_fine() {
        let mut r = valid_record();
        r.perc_asian = 0.3;
        r.perc_hisp = 0.3;
        r.perc_black = 0.4;
        assert!(r.violations().is_empty());
    }

    #[test]
    fn fips_normalization() {
        assert_eq!(normalize_fips("1001").as_deref(), Some("01001"));
        assert_eq!(normalize_fips(" 06059 ").as_deref(), Some("06059"));
        assert_eq!(normalize_fips("123456"), None);
        assert_eq!(normalize_fips("06a59"), None);
        assert_eq!(normalize_fips(""), None);
    }
}
