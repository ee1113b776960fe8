//! Analytic dimension formulas from the expected-mass profile, and empirical
//! box-counting and local-dimension estimates on simulated trees.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{IcrtError, Result};
use crate::massmeasure::{EmpiricalMeasure, MeasureKind};
use crate::measure::{expected_mass, MuRealization};
use crate::params::ThetaFamily;
use crate::rtree::IcrtTree;
use crate::stats::{least_squares, median, quantile_sorted, sorted};

/// Dimensions implied by `1 + lim log l / log E[mu[0,l]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryDimensions {
    pub family: String,
    pub j_max: usize,
    /// Upper-box and packing dimension; `None` when it grows without bound.
    pub upper: Option<f64>,
    /// Lower-box dimension estimate (equal to Hausdorff when applicable).
    pub lower: Option<f64>,
    pub unbounded: bool,
    /// Whether `log log l / log E` decays on the tail window, so that the
    /// Hausdorff dimension equals the lower value.
    pub hausdorff_applicable: bool,
    /// Exact value where the family has one.
    pub closed_form: Option<f64>,
    /// `log l / log E` on the tail window, for inspection.
    pub tail_ratios: Vec<f64>,
    /// Secant log-log slopes of `E` on the tail window.
    pub tail_slopes: Vec<f64>,
}

pub fn closed_form_dimension(family: &ThetaFamily) -> Option<f64> {
    match family {
        ThetaFamily::Brownian => Some(2.0),
        ThetaFamily::PowerLaw { alpha } => Some(1.0 + alpha / (1.0 - alpha)),
        ThetaFamily::Harmonic => None,
        ThetaFamily::Explicit { theta0, .. } => (*theta0 > 0.0).then_some(2.0),
    }
}

/// Evaluates the profile on `l = 2^j`, `j <= j_max`. The limits are read off
/// the local log-log slopes of `E` over the final third of the grid: slope
/// `beta` means `log l / log E -> 1 / beta`.
pub fn theoretical_dimensions(family: &ThetaFamily, j_max: usize) -> Result<TheoryDimensions> {
    if j_max < 16 {
        return Err(IcrtError::InvalidParameter(format!("j_max must be at least 16, got {j_max}")));
    }
    family.check()?;
    let ls: Vec<f64> = (0..=j_max).map(|j| (j as f64).exp2()).collect();
    let es: Vec<f64> = ls.iter().map(|&l| expected_mass(family, l)).collect();
    if es.iter().all(|&e| e <= 1.0) {
        return Err(IcrtError::InvalidParameter("expected mass never exceeds 1 on the grid".into()));
    }
    let from = j_max - j_max / 3;
    let ln2 = std::f64::consts::LN_2;
    let slopes: Vec<f64> = (from..=j_max).map(|j| (es[j] / es[j - 1]).ln() / ln2).collect();
    let ratios: Vec<f64> = (from..=j_max)
        .filter(|&j| es[j] > 1.0)
        .map(|j| ls[j].ln() / es[j].ln())
        .collect();
    let inv: Vec<f64> = slopes.iter().map(|b| 1.0 / b).collect();
    // growth of 1/beta across the window separates divergence from convergence
    let half = inv.len() / 2;
    let first = inv[..half].iter().sum::<f64>() / half as f64;
    let second = inv[half..].iter().sum::<f64>() / (inv.len() - half) as f64;
    let unbounded = second > 1.05 * first;
    let max_inv = inv.iter().cloned().fold(f64::MIN, f64::max);
    let min_inv = inv.iter().cloned().fold(f64::MAX, f64::min);
    let (upper, lower) = if unbounded { (None, None) } else { (Some(1.0 + max_inv), Some(1.0 + min_inv)) };
    let loglog: Vec<f64> = (from..=j_max)
        .filter(|&j| es[j] > 1.0)
        .map(|j| ls[j].ln().ln() / es[j].ln())
        .collect();
    let decreasing = loglog.windows(2).all(|w| w[1] <= w[0]);
    let hausdorff_applicable = decreasing && loglog.last().is_some_and(|&v| v < 0.5);
    Ok(TheoryDimensions {
        family: family.name().into(),
        j_max,
        upper,
        lower,
        unbounded,
        hausdorff_applicable,
        closed_form: closed_form_dimension(family),
        tail_ratios: ratios,
        tail_slopes: slopes,
    })
}

/// Log-log regression of ball-cover counts against `1/eps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxCountFit {
    pub level: f64,
    pub diameter: f64,
    pub eps: Vec<f64>,
    pub counts: Vec<usize>,
    pub slope: f64,
    pub intercept: f64,
    /// Range of the full slope and the slopes over the leading and trailing
    /// halves of the grid.
    pub band: (f64, f64),
}

/// Geometric grid of `points` radii between `diameter / 200` and `diameter / 8`.
pub fn auto_eps_grid(diameter: f64, points: usize) -> Vec<f64> {
    let (lo, hi) = (diameter / 200.0, diameter / 8.0);
    let n = points.max(2);
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn fit_with_band(xs: &[f64], ys: &[f64]) -> (f64, f64, (f64, f64)) {
    let fit = least_squares(xs, ys);
    let n = xs.len();
    let h = n.div_ceil(2);
    let a = least_squares(&xs[..h], &ys[..h]).slope;
    let b = least_squares(&xs[n - h..], &ys[n - h..]).slope;
    let lo = fit.slope.min(a).min(b);
    let hi = fit.slope.max(a).max(b);
    (fit.slope, fit.intercept, (lo, hi))
}

pub fn minkowski_regression(tree: &IcrtTree, l: f64, eps_grid: &[f64]) -> Result<BoxCountFit> {
    let sk = tree.skeleton(l)?;
    let diameter = sk.diameter();
    let mut eps = Vec::new();
    let mut counts = Vec::new();
    for &e in eps_grid {
        if e > 0.0 && e < diameter {
            eps.push(e);
            counts.push(sk.cover_count(e)?);
        }
    }
    if eps.len() < 3 {
        return Err(IcrtError::TooFewPoints(eps.len()));
    }
    let xs: Vec<f64> = eps.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let (slope, intercept, band) = fit_with_band(&xs, &ys);
    Ok(BoxCountFit { level: l, diameter, eps, counts, slope, intercept, band })
}

/// Per-point slopes of `log p_l(B(x, eps))` against `log eps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalDimension {
    pub level: f64,
    pub eps: Vec<f64>,
    pub points: Vec<f64>,
    pub slopes: Vec<f64>,
    /// Sampled points whose ball table was degenerate.
    pub skipped: usize,
    pub median: f64,
    pub quartiles: (f64, f64),
}

pub fn local_dimension<R: Rng + ?Sized>(
    tree: &IcrtTree,
    mu: &MuRealization,
    l: f64,
    n_points: usize,
    eps_grid: &[f64],
    rng: &mut R,
) -> Result<LocalDimension> {
    if n_points == 0 {
        return Err(IcrtError::InvalidParameter("need at least one point".into()));
    }
    if eps_grid.len() < 3 {
        return Err(IcrtError::TooFewPoints(eps_grid.len()));
    }
    let measure = EmpiricalMeasure::new(MeasureKind::MuNormalized, tree, mu, l)?;
    let xs: Vec<f64> = eps_grid.iter().map(|e| e.ln()).collect();
    let mut points = Vec::new();
    let mut slopes = Vec::new();
    let mut skipped = 0;
    for _ in 0..n_points {
        let p = measure.sample_point(rng);
        let masses: Vec<f64> =
            eps_grid.iter().map(|&e| measure.ball_mass(p, e)).collect::<Result<_>>()?;
        if masses.iter().any(|&m| m <= 0.0) || masses.first() == masses.last() {
            skipped += 1;
            continue;
        }
        let ys: Vec<f64> = masses.iter().map(|m| m.ln()).collect();
        points.push(p.coord);
        slopes.push(least_squares(&xs, &ys).slope);
    }
    if slopes.is_empty() {
        return Err(IcrtError::TooFewPoints(0));
    }
    let s = sorted(&slopes);
    Ok(LocalDimension {
        level: l,
        eps: eps_grid.to_vec(),
        points,
        median: median(&slopes),
        quartiles: (quantile_sorted(&s, 0.25), quantile_sorted(&s, 0.75)),
        slopes,
        skipped,
    })
}

/// Analytic and empirical dimension results for one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub schema_version: u32,
    pub theory: Option<TheoryDimensions>,
    pub box_counting: Option<BoxCountFit>,
    pub local: Option<LocalDimension>,
}
