//! Small statistics helpers for comparing simulated outcome counts.

use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of homogeneity for a table of counts (one row per
/// sample, one column per category). Columns that are zero in every row are
/// dropped. Returns `None` when a row is empty.
pub fn chi_square_homogeneity(table: &[Vec<u64>]) -> Option<ChiSquareTest> {
    let ncols = table.first()?.len();
    let keep: Vec<usize> = (0..ncols).filter(|&c| table.iter().any(|row| row[c] > 0)).collect();
    let row_totals: Vec<f64> = table.iter().map(|row| row.iter().sum::<u64>() as f64).collect();
    if row_totals.contains(&0.0) {
        return None;
    }
    let grand: f64 = row_totals.iter().sum();
    let dof = (table.len() - 1) * keep.len().saturating_sub(1);
    if dof == 0 {
        return Some(ChiSquareTest {
            statistic: 0.0,
            dof,
            p_value: 1.0,
        });
    }
    let mut statistic = 0.0;
    for &c in &keep {
        let col_total: f64 = table.iter().map(|row| row[c] as f64).sum();
        for (row, total) in table.iter().zip(&row_totals) {
            let expected = total * col_total / grand;
            let diff = row[c] as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    Some(ChiSquareTest {
        statistic,
        dof,
        p_value: 1.0 - dist.cdf(statistic),
    })
}

/// Standard error of a binomial proportion `p` over `trials`.
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_rows_give_p_one() {
        let t = chi_square_homogeneity(&[vec![50, 50], vec![50, 50]]).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.dof, 1);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn known_statistic() {
        // 2x2 table [[10, 20], [20, 10]]: expected 15 everywhere, chi2 = 4 * 25/15.
        let t = chi_square_homogeneity(&[vec![10, 20], vec![20, 10]]).unwrap();
        assert!((t.statistic - 100.0 / 15.0).abs() < 1e-12);
        // P(chi2_1 > 6.667) ≈ 0.00982
        assert!((t.p_value - 0.009823).abs() < 1e-5);
    }

    #[test]
    fn zero_columns_are_dropped() {
        let t = chi_square_homogeneity(&[vec![5, 0, 5], vec![6, 0, 4]]).unwrap();
        assert_eq!(t.dof, 1);
        let t = chi_square_homogeneity(&[vec![5, 0], vec![6, 0]]).unwrap();
        assert_eq!(t.dof, 0);
        assert!(chi_square_homogeneity(&[vec![0, 0], vec![1, 1]]).is_none());
    }
}
