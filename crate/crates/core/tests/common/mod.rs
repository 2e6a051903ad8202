//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use note2vec::corpus::{parse_corpus, Corpus};
use note2vec::model::{Gradients, Model};

pub fn fixture(name: &str) -> Corpus {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_corpus(name.trim_end_matches(".mel"), &text).unwrap()
}

pub fn fixture_path(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Central finite differences of the model loss, perturbing one weight at a time.
pub fn finite_difference_gradients(model: &Model, x: &[f64], target: usize, step: f64) -> Gradients {
    let mut probe = model.clone();
    let mut w_in = vec![0.0; model.w_in().len()];
    for (i, g) in w_in.iter_mut().enumerate() {
        let orig = probe.w_in()[i];
        probe.w_in_mut()[i] = orig + step;
        let plus = probe.loss(x, target).unwrap();
        probe.w_in_mut()[i] = orig - step;
        let minus = probe.loss(x, target).unwrap();
        probe.w_in_mut()[i] = orig;
        *g = (plus - minus) / (2.0 * step);
    }
    let mut w_out = vec![0.0; model.w_out().len()];
    for (i, g) in w_out.iter_mut().enumerate() {
        let orig = probe.w_out()[i];
        probe.w_out_mut()[i] = orig + step;
        let plus = probe.loss(x, target).unwrap();
        probe.w_out_mut()[i] = orig - step;
        let minus = probe.loss(x, target).unwrap();
        probe.w_out_mut()[i] = orig;
        *g = (plus - minus) / (2.0 * step);
    }
    Gradients { w_in, w_out }
}

/// Largest `|a - n| / max(|a|, |n|, floor)` over all entries.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// OLS coefficients (intercept first) through the SVD pseudo-inverse of `[1 | X]`.
pub fn pinv_ols(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let d = x[0].len();
    let design = DMatrix::from_fn(n, d + 1, |i, j| if j == 0 { 1.0 } else { x[i][j - 1] });
    let pinv = design.pseudo_inverse(1e-14).unwrap();
    let beta = pinv * DVector::from_column_slice(y);
    beta.iter().copied().collect()
}

/// Mean and sample standard deviation, computed in two passes.
pub fn two_pass(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// `A4 B4 A4 B4 ...` of the given length.
pub fn alternating(len: usize) -> Corpus {
    let notes: Vec<&str> = (0..len).map(|i| if i % 2 == 0 { "A4" } else { "B4" }).collect();
    parse_corpus("alternating", &format!("@alternating\n{}\n", notes.join(" "))).unwrap()
}
