//! Paired t-test with Student-t tail probabilities from the regularized
//! incomplete beta function.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 pairs, got {0}")]
    TooFew(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    /// `None` when the differences have zero variance.
    pub t: Option<f64>,
    pub df: usize,
    /// Two-tailed; 1.0 when `t` is undefined.
    pub p: f64,
    pub mean_diff: f64,
}

impl TTest {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p < alpha
    }
}

/// Lanczos approximation (g = 7, n = 9) of `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// `P(|T| > |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    reg_inc_beta(df / 2.0, 0.5, df / (df + t * t))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1); 0 for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

pub fn paired_t_test(xs: &[f64], ys: &[f64]) -> Result<TTest, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(StatsError::TooFew(n));
    }
    let diffs: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x - y).collect();
    let mean_diff = mean(&diffs);
    let sd = sample_std(&diffs);
    let df = n - 1;
    if sd == 0.0 || !sd.is_finite() {
        return Ok(TTest {
            t: None,
            df,
            p: 1.0,
            mean_diff,
        });
    }
    let t = mean_diff / (sd / (n as f64).sqrt());
    Ok(TTest {
        t: Some(t),
        df,
        p: student_t_two_tailed(t, df as f64),
        mean_diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn worked_df2_case() {
        let r = paired_t_test(&[0.9, 0.95, 0.92], &[0.8, 0.85, 0.80]).unwrap();
        let t = r.t.unwrap();
        assert_abs_diff_eq!(t, 16.0, epsilon = 1e-9);
        let closed = 1.0 - t / (2.0 + t * t).sqrt();
        assert_abs_diff_eq!(r.p, closed, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p, 0.00388, epsilon = 1e-5);
        assert_eq!(r.df, 2);
    }

    #[test]
    fn degenerate_and_errors() {
        let xs = [0.3, 0.4, 0.5];
        let r = paired_t_test(&xs, &xs).unwrap();
        assert_eq!((r.t, r.p), (None, 1.0));
        assert_eq!(paired_t_test(&xs, &xs[..2]), Err(StatsError::LengthMismatch(3, 2)));
        assert_eq!(paired_t_test(&[1.0], &[2.0]), Err(StatsError::TooFew(1)));
    }

    #[test]
    fn swap_negates_t() {
        let (a, b) = ([0.1, 0.5, 0.3, 0.9], [0.2, 0.1, 0.4, 0.3]);
        let r1 = paired_t_test(&a, &b).unwrap();
        let r2 = paired_t_test(&b, &a).unwrap();
        assert_abs_diff_eq!(r1.t.unwrap(), -r2.t.unwrap(), epsilon = 1e-15);
        assert_abs_diff_eq!(r1.p, r2.p, epsilon = 1e-15);
    }

    #[test]
    fn gamma_and_beta_reference_points() {
        assert_abs_diff_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(ln_gamma(0.5), std::f64::consts::PI.sqrt().ln(), epsilon = 1e-13);
        assert_abs_diff_eq!(ln_gamma(10.0), 362_880f64.ln(), epsilon = 1e-11);
        // I_x(1, 1) = x; I_x(a, 1) = x^a
        assert_abs_diff_eq!(reg_inc_beta(1.0, 1.0, 0.3), 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(reg_inc_beta(2.5, 1.0, 0.6), 0.6f64.powf(2.5), epsilon = 1e-13);
        // df = 1 is Cauchy: P(|T| > t) = 1 - 2 atan(t)/π
        let t: f64 = 1.7;
        assert_abs_diff_eq!(
            student_t_two_tailed(t, 1.0),
            1.0 - 2.0 * t.atan() / std::f64::consts::PI,
            epsilon = 1e-13
        );
    }

    #[test]
    fn agrees_with_statrs() {
        use rand::{Rng, SeedableRng};
        use statrs::distribution::{ContinuousCDF, StudentsT};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let xs: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
            let ys: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
            let r = paired_t_test(&xs, &ys).unwrap();
            let t = r.t.unwrap();
            let reference = 2.0 * StudentsT::new(0.0, 1.0, 4.0).unwrap().cdf(-t.abs());
            assert_abs_diff_eq!(r.p, reference, epsilon = 1e-9);
        }
    }
}
