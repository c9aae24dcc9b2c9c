//! Small statistical helpers: chi-square tests and binomial slack.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareTest {
    pub fn rejects_at(&self, significance: f64) -> bool {
        self.p_value < significance
    }
}

fn upper_tail(statistic: f64, dof: usize) -> Result<f64> {
    if dof == 0 {
        return Ok(1.0);
    }
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(dist.sf(statistic))
}

/// Pearson test of independence on an `r × c` table of counts. Rows and
/// columns with zero total are dropped before counting degrees of freedom.
pub fn chi_square_independence(table: &[Vec<u64>]) -> Result<ChiSquareTest> {
    let cols = table.first().map_or(0, Vec::len);
    if table.iter().any(|r| r.len() != cols) {
        return Err(Error::Malformed("ragged contingency table".into()));
    }
    let row_tot: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_tot: Vec<u64> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let total: u64 = row_tot.iter().sum();
    if total == 0 {
        return Err(Error::Domain("empty contingency table".into()));
    }
    let mut statistic = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &obs) in row.iter().enumerate() {
            if row_tot[i] == 0 || col_tot[j] == 0 {
                continue;
            }
            let exp = row_tot[i] as f64 * col_tot[j] as f64 / total as f64;
            statistic += (obs as f64 - exp).powi(2) / exp;
        }
    }
    let live_rows = row_tot.iter().filter(|&&t| t > 0).count();
    let live_cols = col_tot.iter().filter(|&&t| t > 0).count();
    let dof = live_rows.saturating_sub(1) * live_cols.saturating_sub(1);
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: upper_tail(statistic, dof)?,
    })
}

/// Pearson goodness-of-fit test against the uniform distribution on the bins.
pub fn chi_square_uniform(counts: &[u64]) -> Result<ChiSquareTest> {
    let total: u64 = counts.iter().sum();
    if counts.is_empty() || total == 0 {
        return Err(Error::Domain("no observations".into()));
    }
    let exp = total as f64 / counts.len() as f64;
    let statistic = counts.iter().map(|&o| (o as f64 - exp).powi(2) / exp).sum();
    let dof = counts.len() - 1;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: upper_tail(statistic, dof)?,
    })
}

/// Standard deviation of the empirical frequency of `trials` Bernoulli(`p`) draws.
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Whether `observed` (a frequency) lies within `sigmas` standard deviations of `p`.
pub fn within_sigmas(observed: f64, p: f64, trials: u64, sigmas: f64) -> bool {
    (observed - p).abs() <= sigmas * binomial_sigma(p, trials)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_table_has_zero_statistic() {
        let t = chi_square_independence(&[vec![10, 20, 30], vec![20, 40, 60]]).unwrap();
        assert!(t.statistic.abs() < 1e-12);
        assert_eq!(t.dof, 2);
        assert!((t.p_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn skewed_table_rejects() {
        let t = chi_square_independence(&[vec![100, 0], vec![0, 100]]).unwrap();
        assert!(t.rejects_at(1e-6));
    }

    #[test]
    fn known_p_value() {
        // Statistic 3.841 at one degree of freedom sits at the 5% point.
        let t = chi_square_uniform(&[0, 0]).err();
        assert!(t.is_some());
        let p = upper_tail(3.841_458_820_694_124, 1).unwrap();
        assert!((p - 0.05).abs() < 1e-9);
    }

    #[test]
    fn uniform_fit() {
        let t = chi_square_uniform(&[25, 25, 25, 25]).unwrap();
        assert_eq!(t.dof, 3);
        assert!(t.statistic.abs() < 1e-12);
    }

    #[test]
    fn zero_columns_are_dropped() {
        let t = chi_square_independence(&[vec![5, 0, 5], vec![5, 0, 5]]).unwrap();
        assert_eq!(t.dof, 1);
        assert!(chi_square_independence(&[vec![0, 0]]).is_err());
        assert!(chi_square_independence(&[vec![1, 2], vec![3]]).is_err());
    }

    #[test]
    fn sigma_helpers() {
        assert!((binomial_sigma(0.5, 100) - 0.05).abs() < 1e-12);
        assert!(within_sigmas(0.6, 0.5, 100, 3.0));
        assert!(!within_sigmas(0.7, 0.5, 100, 3.0));
    }
}
