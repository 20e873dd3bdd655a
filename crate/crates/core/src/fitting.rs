//! Power-law fitting in log-log space.
//!
//! A law `y = (x / C)^E` is a straight line `ln y = A + B ln x` with `E = B`
//! and `C = exp(-A / B)`. The line is fitted by ordinary least squares; a
//! quadratic in `ln x` is fitted alongside to expose curvature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordinary least squares fit of `y = A + B x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub intercept_err: f64,
    pub slope_err: f64,
    pub r2: f64,
    pub r2_adj: f64,
    pub n: usize,
}

fn adjusted_r2(r2: f64, n: usize, regressors: usize) -> f64 {
    1.0 - (1.0 - r2) * (n as f64 - 1.0) / (n as f64 - regressors as f64 - 1.0)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn ols_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 3 {
        return Err(Error::TooFewSamples { got: n, need: 3 });
    }
    let x_bar = mean(xs);
    let y_bar = mean(ys);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - x_bar, y - y_bar);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::RankDeficient);
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    let s2 = ssr / (n as f64 - 2.0);
    Ok(LineFit {
        intercept,
        slope,
        intercept_err: (s2 * (1.0 / n as f64 + x_bar * x_bar / sxx)).sqrt(),
        slope_err: (s2 / sxx).sqrt(),
        r2,
        r2_adj: adjusted_r2(r2, n, 1),
        n,
    })
}

/// R² of `y = a + b x + c x^2`, or `None` when the design is singular.
pub fn quadratic_r2(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 3 {
        return None;
    }
    // centre and scale x so the 3x3 system stays well conditioned
    let x_bar = mean(xs);
    let scale = xs.iter().map(|x| (x - x_bar).abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let y_bar = mean(ys);
    let mut gram = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let u = (x - x_bar) / scale;
        let row = [1.0, u, u * u];
        for i in 0..3 {
            rhs[i] += row[i] * y;
            for j in 0..3 {
                gram[i][j] += row[i] * row[j];
            }
        }
    }
    let coef = solve3(gram, rhs)?;
    let (mut ssr, mut sst) = (0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let u = (x - x_bar) / scale;
        let r = y - (coef[0] + coef[1] * u + coef[2] * u * u);
        ssr += r * r;
        sst += (y - y_bar) * (y - y_bar);
    }
    Some(if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 })
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let norm = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= norm * 1e-13 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let factor = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

/// Parameters of `y = (x / C)^E` with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    pub exponent_err: f64,
    pub scale: f64,
    pub scale_err: f64,
    /// Line intercept `A` in log space.
    pub intercept: f64,
    pub intercept_err: f64,
    pub r2_adj: f64,
    /// Adjusted R² of the quadratic model minus adjusted R² of the line.
    pub r2_curvature: f64,
    pub n_points: usize,
}

impl FitResult {
    pub fn predict(&self, x: f64) -> f64 {
        (x / self.scale).powf(self.exponent)
    }
}

/// Standard deviation of `C = exp(-A / B)` from the first-order expansion
/// around `(A, B)`, ignoring their covariance.
pub fn propagate_c_error(a: f64, b: f64, sa: f64, sb: f64) -> Result<f64> {
    if b == 0.0 {
        return Err(Error::ZeroExponent);
    }
    let c = (-a / b).exp();
    let d_a = -c / b;
    let d_b = c * a / (b * b);
    Ok(((d_a * sa).powi(2) + (d_b * sb).powi(2)).sqrt())
}

/// Fits `y = (x / C)^E` to strictly positive points.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<FitResult> {
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for (index, &(x, y)) in points.iter().enumerate() {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(Error::NonPositive { index, x, y });
        }
        xs.push(x.ln());
        ys.push(y.ln());
    }
    let line = ols_line(&xs, &ys)?;
    if line.slope == 0.0 {
        return Err(Error::ZeroExponent);
    }
    let r2_curvature = match quadratic_r2(&xs, &ys) {
        Some(r2_quad) if line.n > 3 => adjusted_r2(r2_quad, line.n, 2) - line.r2_adj,
        _ => 0.0,
    };
    let scale = (-line.intercept / line.slope).exp();
    Ok(FitResult {
        exponent: line.slope,
        exponent_err: line.slope_err,
        scale,
        scale_err: propagate_c_error(line.intercept, line.slope, line.intercept_err, line.slope_err)?,
        intercept: line.intercept,
        intercept_err: line.intercept_err,
        r2_adj: line.r2_adj,
        r2_curvature,
        n_points: line.n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_power_law() {
        let points: Vec<(f64, f64)> = (1..=10)
            .map(|i| {
                let x = 0.5 * i as f64;
                (x, (x / 2.0).powf(1.5))
            })
            .collect();
        let fit = fit_loglog(&points).unwrap();
        assert!((fit.exponent - 1.5).abs() < 1e-12);
        assert!((fit.scale - 2.0).abs() < 1e-12);
        assert!((fit.r2_adj - 1.0).abs() < 1e-12);
        assert!(fit.r2_curvature.abs() <= 1e-12);
        assert!(fit.exponent_err < 1e-12);
    }

    #[test]
    fn c_error_closed_forms() {
        assert_eq!(propagate_c_error(0.3, 1.2, 0.0, 0.0).unwrap(), 0.0);
        assert!((propagate_c_error(0.0, 1.0, 0.1, 0.2).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(propagate_c_error(1.0, 0.0, 0.1, 0.1), Err(Error::ZeroExponent)));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(fit_loglog(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]), Err(Error::RankDeficient)));
        assert!(matches!(fit_loglog(&[(1.0, 1.0), (2.0, 0.0), (3.0, 3.0)]), Err(Error::NonPositive { index: 1, .. })));
        assert!(matches!(fit_loglog(&[(1.0, 1.0), (2.0, 2.0)]), Err(Error::TooFewSamples { got: 2, need: 3 })));
    }

    #[test]
    fn curvature_detects_bend() {
        let points: Vec<(f64, f64)> = (1..=30)
            .map(|i| {
                let lx = 0.1 * i as f64;
                (lx.exp(), (0.5 * lx + 0.3 * lx * lx).exp())
            })
            .collect();
        let fit = fit_loglog(&points).unwrap();
        assert!(fit.r2_curvature > 1e-4);
    }
}
