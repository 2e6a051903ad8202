//! Ordinary least squares with an intercept, solved by Householder QR.

use thiserror::Error;

/// Relative threshold on the QR diagonal below which a design column is
/// treated as linearly dependent on the preceding ones.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OlsError {
    #[error("{observations} observations cannot support {predictors} predictors plus intercept (need at least {needed})")]
    TooFewObservations {
        observations: usize,
        predictors: usize,
        needed: usize,
    },
    #[error("degenerate embedding geometry: design matrix is rank deficient at column {column}")]
    Degenerate { column: usize },
    #[error("pitches are constant; the total sum of squares is zero")]
    ConstantTarget,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value in regression input")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    /// Intercept first, then one slope per embedding coordinate.
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub ss_res: f64,
    pub ss_tot: f64,
    pub r_squared: f64,
    /// Multiple correlation coefficient.
    pub r: f64,
}

impl RegressionResult {
    pub fn residuals<'a>(&'a self, y: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        y.iter().zip(&self.fitted).map(|(yi, fi)| yi - fi)
    }
}

/// Solves `min ||A b - y||` for a full-column-rank `A` given as rows.
///
/// Requires `rows >= cols`; rejects rank-deficient designs.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>, OlsError> {
    let n = rows.len();
    if n != y.len() {
        return Err(OlsError::Shape(format!("{n} design rows but {} targets", y.len())));
    }
    let p = rows.first().map_or(0, Vec::len);
    if p == 0 || rows.iter().any(|r| r.len() != p) {
        return Err(OlsError::Shape("design rows must share a positive width".into()));
    }
    if n < p {
        return Err(OlsError::TooFewObservations {
            observations: n,
            predictors: p,
            needed: p,
        });
    }
    if rows.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(OlsError::NonFinite);
    }

    // column-major working copy
    let mut cols: Vec<Vec<f64>> = (0..p).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let norms: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    let mut qty = y.to_vec();
    let mut diag = vec![0.0; p];

    for j in 0..p {
        let alpha = norm(&cols[j][j..]);
        if norms[j] == 0.0 || alpha <= RANK_TOLERANCE * norms[j] {
            return Err(OlsError::Degenerate { column: j });
        }
        let alpha = if cols[j][j] > 0.0 { -alpha } else { alpha };
        let mut v: Vec<f64> = cols[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        diag[j] = alpha;
        if vnorm2 > 0.0 {
            let reflect = |target: &mut [f64]| {
                let dot: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
                let scale = 2.0 * dot / vnorm2;
                for (t, vi) in target.iter_mut().zip(&v) {
                    *t -= scale * vi;
                }
            };
            for col in cols.iter_mut().skip(j + 1) {
                reflect(&mut col[j..]);
            }
            reflect(&mut qty[j..]);
        }
    }

    // back substitution on the upper triangle
    let mut beta = vec![0.0; p];
    for j in (0..p).rev() {
        let mut acc = qty[j];
        for k in j + 1..p {
            acc -= cols[k][j] * beta[k];
        }
        beta[j] = acc / diag[j];
    }
    Ok(beta)
}

fn norm(v: &[f64]) -> f64 {
    // scaled to avoid overflow on large pitch offsets
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}

/// Regresses `y` on the columns of `x` (one row per observation) plus an intercept.
pub fn fit_ols(x: &[Vec<f64>], y: &[f64]) -> Result<RegressionResult, OlsError> {
    let n = x.len();
    let d = x.first().map_or(0, Vec::len);
    if n != y.len() {
        return Err(OlsError::Shape(format!("{n} observations but {} targets", y.len())));
    }
    if n < d + 2 {
        return Err(OlsError::TooFewObservations {
            observations: n,
            predictors: d,
            needed: d + 2,
        });
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(OlsError::ConstantTarget);
    }

    let design: Vec<Vec<f64>> = x
        .iter()
        .map(|row| std::iter::once(1.0).chain(row.iter().copied()).collect())
        .collect();
    let coefficients = least_squares(&design, y)?;
    let fitted: Vec<f64> = design
        .iter()
        .map(|row| row.iter().zip(&coefficients).map(|(a, b)| a * b).sum())
        .collect();
    let ss_res: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum();
    let r_squared = (1.0 - ss_res / ss_tot).clamp(0.0, 1.0);
    Ok(RegressionResult {
        coefficients,
        fitted,
        ss_res,
        ss_tot,
        r_squared,
        r: r_squared.sqrt(),
    })
}

/// `sqrt(max(0, 1 - ss_res / ss_tot))`, clamped to `[0, 1]`.
pub fn multiple_correlation(result: &RegressionResult) -> f64 {
    if result.ss_tot <= 0.0 {
        return 0.0;
    }
    (1.0 - result.ss_res / result.ss_tot).max(0.0).sqrt().min(1.0)
}
