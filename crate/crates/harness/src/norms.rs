//! Discrete error norms over cell averages.

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// How the L2 norm is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum L2Convention {
    /// `sqrt(h sum e^2)`, which is what the published tables correspond to.
    #[default]
    Root,
    /// `h sqrt(sum e^2)`.
    Displayed,
}

impl std::str::FromStr for L2Convention {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "root" => Ok(L2Convention::Root),
            "displayed" => Ok(L2Convention::Displayed),
            _ => Err(HarnessError::config(format!("l2 convention `{s}` (root | displayed)"))),
        }
    }
}

impl L2Convention {
    pub fn name(self) -> &'static str {
        match self {
            L2Convention::Root => "root",
            L2Convention::Displayed => "displayed",
        }
    }
}

/// Norms of `numeric - exact`; `cell_measure` is `dx` in 1D and `dx dy` in 2D.
pub fn error_norms(
    numeric: &[f64],
    exact: &[f64],
    cell_measure: f64,
    l2: L2Convention,
) -> Result<ErrorNorms> {
    if numeric.len() != exact.len() {
        return Err(HarnessError::Shape {
            expected: exact.len(),
            got: numeric.len(),
        });
    }
    let mut sum_abs = 0.0;
    let mut sum_sq = 0.0;
    let mut max = 0.0f64;
    for (a, b) in numeric.iter().zip(exact) {
        let e = (a - b).abs();
        sum_abs += e;
        sum_sq += e * e;
        max = max.max(e);
    }
    let l2 = match l2 {
        L2Convention::Root => (cell_measure * sum_sq).sqrt(),
        L2Convention::Displayed => cell_measure * sum_sq.sqrt(),
    };
    Ok(ErrorNorms {
        l1: cell_measure * sum_abs,
        l2,
        linf: max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_error() {
        let v = vec![0.3; 10];
        let n = error_norms(&v, &v, 0.1, L2Convention::Root).unwrap();
        assert_eq!((n.l1, n.l2, n.linf), (0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_error() {
        let n = 64;
        let dx = 2.0 * PI / n as f64;
        let c = -0.25;
        let num = vec![1.0 + c; n];
        let ex = vec![1.0; n];
        let e = error_norms(&num, &ex, dx, L2Convention::Root).unwrap();
        assert!((e.l1 - 2.0 * PI * c.abs()).abs() < 1e-14);
        assert!((e.linf - c.abs()).abs() < 1e-15);
        assert!((e.l2 - (2.0 * PI).sqrt() * c.abs()).abs() < 1e-14);
        let d = error_norms(&num, &ex, dx, L2Convention::Displayed).unwrap();
        assert!((d.l2 - dx * (n as f64).sqrt() * c.abs()).abs() < 1e-14);
    }

    #[test]
    fn shape_mismatch() {
        assert!(matches!(
            error_norms(&[1.0], &[1.0, 2.0], 1.0, L2Convention::Root),
            Err(HarnessError::Shape { expected: 2, got: 1 })
        ));
    }
}
