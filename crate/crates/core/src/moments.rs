//! Trimming schemes, sample trimmed moments and the moment constants
//! `c_k(a, b̄)` / `κ_k(a, b̄)`.

use crate::error::{MtmError, Result};
use crate::models::{data_transform, Base, Family, Model};
use crate::quadrature::{integrate, Singular};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{OnceLock, RwLock};

/// Slack used when converting `n * proportion` to a trim count, so that a
/// proportion such as `1/30` trims exactly one of 30 observations.
const COUNT_SLACK: f64 = 1e-9;

/// Lower and upper trimming proportions for one moment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub a: f64,
    pub b: f64,
}

impl Window {
    /// `b̄ = 1 - b`.
    pub fn upper(&self) -> f64 {
        1.0 - self.b
    }

    /// Retained mass `1 - a - b`.
    pub fn width(&self) -> f64 {
        1.0 - self.a - self.b
    }

    /// Number of observations dropped from each end of a sample of size `n`.
    pub fn trim_counts(&self, n: usize) -> (usize, usize) {
        let count = |p: f64| (n as f64 * p + COUNT_SLACK).floor() as usize;
        (count(self.a), count(self.b))
    }

    fn validate(&self, which: &str) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b)] {
            if !(v.is_finite() && (0.0..1.0).contains(&v)) {
                return Err(MtmError::Validation(format!(
                    "{name}{which} must lie in [0, 1), got {v}"
                )));
            }
        }
        if self.a + self.b >= 1.0 {
            return Err(MtmError::Validation(format!(
                "a{which} + b{which} must be below 1, got {}",
                self.a + self.b
            )));
        }
        Ok(())
    }
}

/// Relative placement of the two trimming windows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeClass {
    /// Both moments use the same proportions.
    Equal,
    /// `a2 <= a1 <= b̄2 <= b̄1`: the first window sits above the second.
    FirstShiftedUp,
    /// `a1 <= a2 <= b̄1 <= b̄2`: the first window sits below the second.
    FirstShiftedDown,
}

/// Trimming proportions `(a1, b1)` for the first moment and `(a2, b2)` for
/// the second.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scheme {
    first: Window,
    second: Window,
    class: SchemeClass,
}

impl Scheme {
    /// Validates the proportions and classifies the windows. Windows that
    /// only touch (`a_i = b̄_j`) are accepted.
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Self> {
        let first = Window { a: a1, b: b1 };
        let second = Window { a: a2, b: b2 };
        first.validate("1")?;
        second.validate("2")?;
        let (u1, u2) = (first.upper(), second.upper());
        let class = if a1 == a2 && b1 == b2 {
            SchemeClass::Equal
        } else if a2 <= a1 && a1 <= u2 && u2 <= u1 {
            SchemeClass::FirstShiftedUp
        } else if a1 <= a2 && a2 <= u1 && u1 <= u2 {
            SchemeClass::FirstShiftedDown
        } else {
            return Err(MtmError::Validation(format!(
                "trimming windows ({a1}, {b1}) / ({a2}, {b2}) are neither equal nor shifted: \
                 need a2 <= a1 <= 1-b2 <= 1-b1 or a1 <= a2 <= 1-b1 <= 1-b2"
            )));
        };
        Ok(Scheme {
            first,
            second,
            class,
        })
    }

    /// Same proportions for both moments.
    pub fn equal(a: f64, b: f64) -> Result<Self> {
        Scheme::new(a, b, a, b)
    }

    pub fn first(&self) -> Window {
        self.first
    }

    pub fn second(&self) -> Window {
        self.second
    }

    pub fn window(&self, j: usize) -> Window {
        match j {
            1 => self.first,
            2 => self.second,
            _ => panic!("moment index must be 1 or 2, got {j}"),
        }
    }

    pub fn class(&self) -> SchemeClass {
        self.class
    }

    pub fn proportions(&self) -> [f64; 4] {
        [self.first.a, self.first.b, self.second.a, self.second.b]
    }

    /// Lower and upper breakdown points.
    pub fn breakdown_points(&self) -> (f64, f64) {
        (
            self.first.a.min(self.second.a),
            self.first.b.min(self.second.b),
        )
    }

    /// Checks that a sample of size `n` keeps at least one observation in
    /// each window.
    pub fn check_sample_size(&self, n: usize) -> Result<()> {
        for (j, w) in [(1, self.first), (2, self.second)] {
            let (lo, hi) = w.trim_counts(n);
            if lo + hi >= n {
                return Err(MtmError::Validation(format!(
                    "sample of size {n} leaves no observation in window {j} (trims {lo} + {hi})"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {})/({}, {})",
            self.first.a, self.first.b, self.second.a, self.second.b
        )
    }
}

/// Parses a proportion written as a decimal or as a fraction `p/q`.
pub fn parse_proportion(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || MtmError::Validation(format!("cannot parse proportion '{s}'"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(bad());
            }
            Ok(p / q)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

impl FromStr for Scheme {
    type Err = MtmError;

    /// Parses `a1,b1,a2,b2` (fractions such as `1/30` allowed).
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s.split(',').map(parse_proportion).collect::<Result<_>>()?;
        match parts.as_slice() {
            &[a1, b1, a2, b2] => Scheme::new(a1, b1, a2, b2),
            _ => Err(MtmError::Validation(format!(
                "scheme must have four comma-separated proportions a1,b1,a2,b2, got '{s}'"
            ))),
        }
    }
}

/// Mean of `f` over the order statistics retained by `window`.
/// `sorted` must be sorted ascending.
pub fn trimmed_mean<F: Fn(f64) -> f64>(sorted: &[f64], window: Window, f: F) -> Result<f64> {
    let n = sorted.len();
    let (lo, hi) = window.trim_counts(n);
    if lo + hi >= n {
        return Err(MtmError::Validation(format!(
            "sample of size {n} leaves no observation after trimming {lo} + {hi}"
        )));
    }
    let kept = &sorted[lo..n - hi];
    Ok(kept.iter().map(|&x| f(x)).sum::<f64>() / kept.len() as f64)
}

/// Sample trimmed moments `(T̂1, T̂2)` of already transformed, sorted data.
pub fn trimmed_moments_sorted(sorted: &[f64], scheme: &Scheme) -> Result<[f64; 2]> {
    Ok([
        trimmed_mean(sorted, scheme.first, |y| y)?,
        trimmed_mean(sorted, scheme.second, |y| y * y)?,
    ])
}

/// Transforms raw data for `family` and returns the sorted values.
pub fn transformed_sorted(data: &[f64], family: Family) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(MtmError::Validation("empty sample".into()));
    }
    let mut ys = Vec::with_capacity(data.len());
    for &x in data {
        if !x.is_finite() {
            return Err(MtmError::Validation(format!("non-finite observation {x}")));
        }
        if family != Family::Normal && x <= 0.0 {
            return Err(MtmError::Validation(format!(
                "{family} model requires positive observations, got {x}"
            )));
        }
        ys.push(data_transform(family, x));
    }
    ys.sort_by(f64::total_cmp);
    Ok(ys)
}

/// Sample trimmed moments of raw data: `h(x) = x` (normal) or `log x`.
pub fn sample_trimmed_moments(data: &[f64], family: Family, scheme: &Scheme) -> Result<[f64; 2]> {
    let sorted = transformed_sorted(data, family)?;
    trimmed_moments_sorted(&sorted, scheme)
}

type CacheKey = (Base, u64, u64, u32);

fn cache() -> &'static RwLock<HashMap<CacheKey, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `(1/(hi - lo)) ∫_lo^hi s(u)^k du` for the family's standardized
/// transform `s`; zero when `hi <= lo`. Results are memoized.
pub fn moment_constant(base: Base, k: u32, lo: f64, hi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
        return Err(MtmError::Validation(format!(
            "moment constant limits must lie in [0, 1], got [{lo}, {hi}]"
        )));
    }
    if hi <= lo {
        return Ok(0.0);
    }
    let key = (base, lo.to_bits(), hi.to_bits(), k);
    if let Some(&v) = cache().read().expect("cache lock poisoned").get(&key) {
        return Ok(v);
    }
    let singular = Singular {
        lo: lo == 0.0,
        hi: hi == 1.0,
    };
    let integral = integrate(|u| base.transform(u).powi(k as i32), lo, hi, singular)?;
    let v = integral / (hi - lo);
    cache().write().expect("cache lock poisoned").insert(key, v);
    Ok(v)
}

/// `c_k(a, b̄)` for the standard normal quantile.
pub fn c_k(k: u32, a: f64, upper: f64) -> Result<f64> {
    moment_constant(Base::Normal, k, a, upper)
}

/// `κ_k(a, b̄)` for `log(-log u)`.
pub fn kappa_k(k: u32, a: f64, upper: f64) -> Result<f64> {
    moment_constant(Base::LogNegLog, k, a, upper)
}

/// Scheme-level constants shared by the estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SchemeConstants {
    /// First-order constant over window 1.
    pub m11: f64,
    /// First-order constant over window 2.
    pub m12: f64,
    /// Second-order constant over window 2.
    pub m22: f64,
    /// `m11² - 2 m11 m12 + m22`.
    pub eta_cross: f64,
    /// `m22 - m12²`.
    pub eta_second: f64,
    /// `eta_second / eta_cross`.
    pub ratio: f64,
}

impl SchemeConstants {
    pub fn new(base: Base, scheme: &Scheme) -> Result<Self> {
        let (w1, w2) = (scheme.first(), scheme.second());
        let m11 = moment_constant(base, 1, w1.a, w1.upper())?;
        let m12 = moment_constant(base, 1, w2.a, w2.upper())?;
        let m22 = moment_constant(base, 2, w2.a, w2.upper())?;
        let eta_cross = m11 * m11 - 2.0 * m11 * m12 + m22;
        let eta_second = m22 - m12 * m12;
        if !(eta_cross > 0.0 && eta_second > 0.0) {
            return Err(MtmError::Validation(format!(
                "degenerate trimming scheme {scheme}: eta values {eta_cross}, {eta_second}"
            )));
        }
        Ok(SchemeConstants {
            m11,
            m12,
            m22,
            eta_cross,
            eta_second,
            ratio: eta_second / eta_cross,
        })
    }

    /// Population trimmed moments for the affine pair `(A, B)`.
    pub fn population(&self, affine: (f64, f64)) -> [f64; 2] {
        let (a, b) = affine;
        [
            a + b * self.m11,
            a * a + 2.0 * a * b * self.m12 + b * b * self.m22,
        ]
    }
}

/// Population trimmed moments `(T1, T2)` of `model` under `scheme`.
pub fn population_trimmed_moments(model: &Model, scheme: &Scheme) -> Result<[f64; 2]> {
    let k = SchemeConstants::new(model.family().base(), scheme)?;
    Ok(k.population(model.affine()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_thirtieth_trims_one_of_thirty() {
        let w = Window {
            a: 1.0 / 30.0,
            b: 7.0 / 30.0,
        };
        assert_eq!(w.trim_counts(30), (1, 7));
        let w = Window { a: 0.05, b: 0.1 };
        assert_eq!(w.trim_counts(100), (5, 10));
        assert_eq!(w.trim_counts(19), (0, 1));
    }

    #[test]
    fn classification() {
        assert_eq!(
            Scheme::new(0.05, 0.05, 0.0, 0.1).unwrap().class(),
            SchemeClass::FirstShiftedUp
        );
        assert_eq!(
            Scheme::new(0.0, 0.1, 0.05, 0.05).unwrap().class(),
            SchemeClass::FirstShiftedDown
        );
        assert_eq!(Scheme::equal(0.1, 0.2).unwrap().class(), SchemeClass::Equal);
        // touching windows
        assert_eq!(
            Scheme::new(0.25, 0.5, 0.5, 0.25).unwrap().class(),
            SchemeClass::FirstShiftedDown
        );
        // nested windows are rejected
        assert!(Scheme::new(0.05, 0.05, 0.1, 0.1).is_err());
        assert!(Scheme::new(0.6, 0.5, 0.0, 0.0).is_err());
        assert!(Scheme::new(-0.1, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn parse_with_fractions() {
        let s: Scheme = "1/30,1/30,0,2/30".parse().unwrap();
        assert_eq!(s.proportions(), [1.0 / 30.0, 1.0 / 30.0, 0.0, 2.0 / 30.0]);
        assert!("0.1,0.1,0.1".parse::<Scheme>().is_err());
    }

    #[test]
    fn trimmed_moments_by_hand() {
        let data: Vec<f64> = (1..=10).map(f64::from).collect();
        let s = Scheme::new(0.1, 0.0, 0.0, 0.1).unwrap();
        let [t1, t2] = sample_trimmed_moments(&data, Family::Normal, &s).unwrap();
        assert_eq!(t1, (2..=10).map(f64::from).sum::<f64>() / 9.0);
        assert_eq!(t2, (1..=9).map(|v| (v * v) as f64).sum::<f64>() / 9.0);
    }

    #[test]
    fn sample_size_too_small() {
        let s = Scheme::equal(0.3, 0.3).unwrap();
        assert!(s.check_sample_size(0).is_err());
        assert!(s.check_sample_size(1).is_ok());
    }
}
