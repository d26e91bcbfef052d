//! Gaussian importance field from the temporal prior and per-patch scores.

use crate::error::{Error, Result};
use crate::geometry::Box;

/// Parameters of the anisotropic Gaussian importance field.
///
/// The bandwidth couples to the prior extent: sigma = sqrt(beta * side).
#[derive(Debug, Clone, Copy)]
pub struct ImportanceParams {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub beta: f64,
    pub epsilon: f64,
}

impl ImportanceParams {
    pub fn from_prior(prior: &Box, beta: f64, epsilon: f64) -> Result<ImportanceParams> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidArgument(format!("bandwidth {beta} must be > 0")));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("score floor {epsilon} must be > 0")));
        }
        prior.validate()?;
        Ok(ImportanceParams {
            mu_x: prior.cx,
            mu_y: prior.cy,
            sigma_x: (beta * prior.w).sqrt(),
            sigma_y: (beta * prior.h).sqrt(),
            beta,
            epsilon,
        })
    }
}

/// Unnormalized Gaussian in (0, 1], peaking at the prior center.
pub fn gaussian_value(p: &ImportanceParams, x: f64, y: f64) -> f64 {
    let dx = (x - p.mu_x) / p.sigma_x;
    let dy = (y - p.mu_y) / p.sigma_y;
    (-0.5 * (dx * dx + dy * dy)).exp()
}

/// m x n matrix of strictly positive patch scores, row-major.
///
/// Row index l walks the vertical axis, column index k the horizontal.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreGrid {
    m: usize,
    n: usize,
    scores: Vec<f64>,
}

impl ScoreGrid {
    /// Wraps raw scores; every entry must be strictly positive (that is
    /// what keeps the assembled quadratic form positive definite).
    pub fn from_scores(m: usize, n: usize, scores: Vec<f64>) -> Result<ScoreGrid> {
        if m == 0 || n == 0 || scores.len() != m * n {
            return Err(Error::InvalidArgument(format!(
                "score grid {}x{} with {} entries",
                m,
                n,
                scores.len()
            )));
        }
        if let Some(bad) = scores.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "score {bad} must be strictly positive"
            )));
        }
        Ok(ScoreGrid { m, n, scores })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, l: usize, k: usize) -> f64 {
        debug_assert!(l < self.m && k < self.n);
        self.scores[l * self.n + k]
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }
}

/// Scores every patch of the uniformly initialized grid.
///
/// Patch centers are fixed at ((k+1/2) W/n, (l+1/2) H/m) for 0-based
/// (k, l), so the scores do not depend on the intervals being solved for.
pub fn score_grid(
    prior: &Box,
    crop_w: f64,
    crop_h: f64,
    m: usize,
    n: usize,
    beta: f64,
    epsilon: f64,
) -> Result<ScoreGrid> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid {m}x{n} needs at least 2 intervals per axis"
        )));
    }
    if !(crop_w > 0.0 && crop_h > 0.0 && crop_w.is_finite() && crop_h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "crop extent ({crop_w}, {crop_h}) must be positive"
        )));
    }
    let p = ImportanceParams::from_prior(prior, beta, epsilon)?;
    if !(0.0..=crop_w).contains(&p.mu_x) || !(0.0..=crop_h).contains(&p.mu_y) {
        return Err(Error::InvalidArgument(format!(
            "prior center ({}, {}) outside crop [0, {crop_w}] x [0, {crop_h}]",
            p.mu_x, p.mu_y
        )));
    }

    let mut scores = Vec::with_capacity(m * n);
    for l in 0..m {
        let cy = (l as f64 + 0.5) * crop_h / m as f64;
        for k in 0..n {
            let cx = (k as f64 + 0.5) * crop_w / n as f64;
            scores.push(gaussian_value(&p, cx, cy) + epsilon);
        }
    }
    ScoreGrid::from_scores(m, n, scores)
}
