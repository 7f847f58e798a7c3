//! Chronological train / validation / test splits.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tasks::{TaskSpec, DEFAULT_PERIODS};

/// `[0, val_start)`, `[val_start, test_start)`, `[test_start, total)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndex {
    val_start: usize,
    test_start: usize,
    total: usize,
}

impl SplitIndex {
    pub fn new(val_start: usize, test_start: usize, total: usize) -> Result<Self> {
        if !(0 < val_start && val_start < test_start && test_start < total) {
            return Err(Error::InvalidSplit(format!(
                "boundaries {val_start}, {test_start} do not give three non-empty ranges of 0..{total}"
            )));
        }
        Ok(SplitIndex {
            val_start,
            test_start,
            total,
        })
    }

    pub fn train(&self) -> Range<usize> {
        0..self.val_start
    }

    pub fn val(&self) -> Range<usize> {
        self.val_start..self.test_start
    }

    pub fn test(&self) -> Range<usize> {
        self.test_start..self.total
    }

    /// Validation and test together: every timestep that gets scored.
    pub fn evaluated(&self) -> Range<usize> {
        self.val_start..self.total
    }

    pub fn val_start(&self) -> usize {
        self.val_start
    }

    pub fn test_start(&self) -> usize {
        self.test_start
    }

    pub fn total(&self) -> usize {
        self.total
    }
}

/// Whole-period split for periodic tasks.
pub fn split_periods(
    total: usize,
    k: usize,
    n: usize,
    train_periods: usize,
    val_periods: usize,
    test_periods: usize,
) -> Result<SplitIndex> {
    let period = k
        .checked_mul(n)
        .filter(|&p| p > 0)
        .ok_or_else(|| Error::InvalidSplit("period length k*n must be positive".into()))?;
    let periods = train_periods + val_periods + test_periods;
    if periods.checked_mul(period) != Some(total) {
        return Err(Error::InvalidSplit(format!(
            "{total} timesteps is not {periods} periods of length {period}"
        )));
    }
    SplitIndex::new(
        train_periods * period,
        (train_periods + val_periods) * period,
        total,
    )
}

/// Fractional split: `floor(f_train*T)` training steps, `floor(f_val*T)`
/// validation steps, the remainder for test.
pub fn split_fraction(total: usize, f_train: f64, f_val: f64) -> Result<SplitIndex> {
    if !(f_train > 0.0 && f_val > 0.0 && f_train + f_val < 1.0) {
        return Err(Error::InvalidSplit(format!(
            "fractions {f_train}, {f_val} leave no room for three ranges"
        )));
    }
    // Absorbs representation error such as 0.1 * 30 = 3.0000000000000004
    // or 0.7 * 10 falling just below an integer.
    let floor = |x: f64| (x + 1e-9).floor() as usize;
    let train = floor(f_train * total as f64);
    let val = floor(f_val * total as f64);
    SplitIndex::new(train, train + val, total)
}

/// Splitting rule, parsed from `periods:40,4,4` or `frac:0.8,0.1,0.1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitRule {
    Periods(usize, usize, usize),
    Fraction(f64, f64, f64),
}

impl SplitRule {
    pub fn apply(&self, spec: &TaskSpec, total: usize) -> Result<SplitIndex> {
        match *self {
            SplitRule::Periods(a, b, c) => {
                let (k, n) = spec.period().ok_or_else(|| {
                    Error::InvalidSplit(format!("{} tasks have no period", spec.family()))
                })?;
                split_periods(total, k, n, a, b, c)
            }
            SplitRule::Fraction(a, b, _) => split_fraction(total, a, b),
        }
    }

    /// Whole periods for periodic families, 80/10/10 otherwise.
    pub fn default_for(spec: &TaskSpec) -> Self {
        if spec.period().is_some() {
            let (a, b, c) = DEFAULT_PERIODS;
            SplitRule::Periods(a, b, c)
        } else {
            SplitRule::Fraction(0.8, 0.1, 0.1)
        }
    }
}

impl fmt::Display for SplitRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitRule::Periods(a, b, c) => write!(f, "periods:{a},{b},{c}"),
            SplitRule::Fraction(a, b, c) => write!(f, "frac:{a},{b},{c}"),
        }
    }
}

impl FromStr for SplitRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSplit(format!("cannot parse split rule {s:?}"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        match kind {
            "periods" => {
                let v = parts
                    .iter()
                    .map(|p| p.parse::<usize>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SplitRule::Periods(v[0], v[1], v[2]))
            }
            "frac" => {
                let v = parts
                    .iter()
                    .map(|p| p.parse::<f64>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                if (v.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidSplit(format!(
                        "fractions in {s:?} must sum to 1"
                    )));
                }
                Ok(SplitRule::Fraction(v[0], v[1], v[2]))
            }
            _ => Err(bad()),
        }
    }
}

/// Default split for a generated task of length `total`.
pub fn split_for(spec: &TaskSpec, total: usize) -> Result<SplitIndex> {
    SplitRule::default_for(spec).apply(spec, total)
}
