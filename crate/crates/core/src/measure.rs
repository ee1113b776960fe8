//! The random measure `mu = theta0^2 dx + sum theta_i delta_{X_i}` and the
//! analytic profile of its expectation.

use std::sync::OnceLock;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{IcrtError, Result};
use crate::numerics::{
    adaptive_simpson, exp_neg_minus_one_plus, gauss_legendre, one_minus_exp_neg, power_integral,
};
use crate::params::{ThetaFamily, ThetaRealization};

/// One sample of the random measure, indexed by atom position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuRealization {
    drift: f64,
    positions: Vec<f64>,
    weights: Vec<f64>,
    /// `prefix[k]` is the total weight of the first `k` atoms by position.
    prefix: Vec<f64>,
    /// Atoms beyond the horizon were not sampled; queries past it are refused.
    horizon: Option<f64>,
}

impl MuRealization {
    /// Builds a measure from `(position, weight)` pairs in any order.
    pub fn new(drift: f64, mut atoms: Vec<(f64, f64)>, horizon: Option<f64>) -> Result<Self> {
        if !(drift.is_finite() && drift >= 0.0) {
            return Err(IcrtError::InvalidParameter(format!("drift = {drift}")));
        }
        for &(x, w) in &atoms {
            if !(x.is_finite() && x >= 0.0 && w.is_finite() && w > 0.0) {
                return Err(IcrtError::InvalidParameter(format!("atom ({x}, {w})")));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
        let positions: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        let weights: Vec<f64> = atoms.iter().map(|a| a.1).collect();
        let mut prefix = Vec::with_capacity(weights.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            prefix.push(acc);
        }
        Ok(MuRealization { drift, positions, weights, prefix, horizon })
    }

    /// Lebesgue measure on the half-line (the Brownian case).
    pub fn lebesgue() -> Self {
        MuRealization::new(1.0, Vec::new(), None).unwrap()
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn atom_count(&self) -> usize {
        self.positions.len()
    }
    pub fn horizon(&self) -> Option<f64> {
        self.horizon
    }
    pub fn is_empty(&self) -> bool {
        self.drift == 0.0 && self.positions.is_empty()
    }

    /// Total weight of the first `k` atoms in position order.
    pub fn atom_prefix(&self, k: usize) -> f64 {
        self.prefix[k]
    }

    /// Index `j < k` with `prefix[j] <= target < prefix[j + 1]`.
    pub fn atom_by_cumulative(&self, target: f64, k: usize) -> usize {
        let j = self.prefix[1..=k].partition_point(|&p| p <= target);
        j.min(k - 1)
    }

    /// Number of atoms at positions `<= l`.
    pub fn atoms_upto(&self, l: f64) -> usize {
        self.positions.partition_point(|&x| x <= l)
    }

    /// Number of atoms at positions `< l`.
    pub fn atoms_below(&self, l: f64) -> usize {
        self.positions.partition_point(|&x| x < l)
    }

    fn check_query(&self, l: f64) -> Result<()> {
        if !(l >= 0.0) {
            return Err(IcrtError::NegativeLength(l));
        }
        if let Some(h) = self.horizon {
            if l > h {
                return Err(IcrtError::BeyondHorizon { requested: l, horizon: h });
            }
        }
        Ok(())
    }

    /// `mu[0, l]`, atoms at exactly `l` included.
    pub fn mass(&self, l: f64) -> Result<f64> {
        self.check_query(l)?;
        Ok(self.drift * l + self.prefix[self.atoms_upto(l)])
    }

    /// `mu(a, b]` for `a <= b`.
    pub fn interval_mass(&self, a: f64, b: f64) -> Result<f64> {
        self.check_query(b)?;
        let atoms = self.prefix[self.atoms_upto(b)] - self.prefix[self.atoms_upto(a)];
        Ok(self.drift * (b - a) + atoms)
    }

    /// `mu[a, b]` for `a <= b`.
    pub fn closed_interval_mass(&self, a: f64, b: f64) -> Result<f64> {
        self.check_query(b)?;
        let atoms = self.prefix[self.atoms_upto(b)] - self.prefix[self.atoms_below(a)];
        Ok(self.drift * (b - a) + atoms)
    }
}

/// Samples every atom position `X_i ~ Exp(theta_i)` independently.
pub fn sample_mu<R: Rng + ?Sized>(theta: &ThetaRealization, rng: &mut R) -> MuRealization {
    let atoms = theta
        .atoms
        .iter()
        .map(|&w| {
            let e: f64 = rng.sample(Exp1);
            (e / w, w)
        })
        .collect();
    MuRealization::new(theta.drift(), atoms, None).expect("valid weights")
}

/// Samples the restriction of the measure to `[0, horizon]`.
///
/// The law of the atoms inside the horizon is exact. Atoms are selected by
/// geometric skipping, which makes the cost proportional to the number of atoms
/// kept rather than to `K`.
pub fn sample_mu_within<R: Rng + ?Sized>(
    theta: &ThetaRealization,
    horizon: f64,
    rng: &mut R,
) -> Result<MuRealization> {
    if !(horizon >= 0.0) {
        return Err(IcrtError::NegativeLength(horizon));
    }
    let atoms = first_points_within(&theta.atoms, horizon, rng)
        .into_iter()
        .map(|(i, x)| (x, theta.atoms[i]))
        .collect();
    MuRealization::new(theta.drift(), atoms, Some(horizon))
}

/// For non-increasing rates, returns `(i, X_i)` for each `i` with
/// `X_i ~ Exp(rates[i])` landing in `[0, horizon]`, in index order.
pub(crate) fn first_points_within<R: Rng + ?Sized>(
    rates: &[f64],
    horizon: f64,
    rng: &mut R,
) -> Vec<(usize, f64)> {
    let prob = |w: f64| one_minus_exp_neg(w * horizon);
    let mut out = Vec::new();
    let mut start = 0;
    while start < rates.len() {
        let pmax = prob(rates[start]);
        if pmax <= 0.0 {
            break;
        }
        // block of indices whose probability is within a factor 2 of the first
        let end = start + rates[start..].partition_point(|&w| prob(w) >= 0.5 * pmax);
        let log_miss = (-pmax).ln_1p();
        let mut j = start;
        loop {
            if pmax < 1.0 {
                let u: f64 = 1.0 - rng.random::<f64>();
                let skip = (u.ln() / log_miss).floor();
                if skip >= (end - j) as f64 {
                    break;
                }
                j += skip as usize;
            }
            if j >= end {
                break;
            }
            let p = prob(rates[j]);
            if rng.random::<f64>() * pmax < p {
                let u: f64 = rng.random();
                out.push((j, -(-u * p).ln_1p() / rates[j]));
            }
            j += 1;
        }
        start = end;
    }
    out
}

/// `theta0^2 l + sum_i theta_i (1 - exp(-theta_i l))` for a truncated realization.
pub fn expected_mass_truncated(theta: &ThetaRealization, l: f64) -> f64 {
    theta.drift() * l + theta.atoms.iter().rev().map(|&w| w * one_minus_exp_neg(w * l)).sum::<f64>()
}

/// `theta0^2 l^2 / 2 + sum_i (exp(-l theta_i) - 1 + l theta_i)` for a truncated realization.
pub fn psi_truncated(theta: &ThetaRealization, l: f64) -> f64 {
    0.5 * theta.drift() * l * l
        + theta.atoms.iter().rev().map(|&w| exp_neg_minus_one_plus(w * l)).sum::<f64>()
}

#[derive(Clone, Copy)]
enum Profile {
    Mass,
    Psi,
}

/// Number of power-family terms summed directly before the Euler-Maclaurin tail.
const DIRECT_TERMS: usize = 2000;

fn term(kind: Profile, w: f64, l: f64) -> f64 {
    match kind {
        Profile::Mass => w * one_minus_exp_neg(w * l),
        Profile::Psi => exp_neg_minus_one_plus(w * l),
    }
}

/// d/dw of `term`.
fn term_slope(kind: Profile, w: f64, l: f64) -> f64 {
    match kind {
        Profile::Mass => one_minus_exp_neg(w * l) + w * l * (-w * l).exp(),
        Profile::Psi => l * one_minus_exp_neg(w * l),
    }
}

/// `sum_{i>=1} term(c i^{-alpha})` as a direct sum plus an Euler-Maclaurin tail
/// whose integral is reduced to one-dimensional integrals in `u = theta l`.
fn power_profile(kind: Profile, c: f64, alpha: f64, l: f64) -> f64 {
    if l <= 0.0 {
        return 0.0;
    }
    let n = DIRECT_TERMS;
    let mut direct = 0.0;
    for i in (1..n).rev() {
        direct += term(kind, c * (i as f64).powf(-alpha), l);
    }
    let nf = n as f64;
    let wn = c * nf.powf(-alpha);
    let f = term(kind, wn, l);
    let fp = term_slope(kind, wn, l) * (-alpha * wn / nf);
    let s = 1.0 / alpha;
    let u = wn * l;
    let integral = match kind {
        Profile::Mass => s * c.powf(s) * l.powf(s - 1.0) * mass_kernel(s, u),
        Profile::Psi => s * c.powf(s) * l.powf(s) * psi_kernel(s, u),
    };
    direct + integral + 0.5 * f - fp / 12.0
}

/// Past this point `exp(-u)` contributions are below 1e-26 and ignored.
const EXP_CUTOFF: f64 = 60.0;

/// `int_1^min(U, cutoff) e^{-u} u^p du` on dyadic panels.
fn exp_power_integral(p: f64, upper: f64) -> f64 {
    let top = upper.min(EXP_CUTOFF);
    let f = |u: f64| (-u).exp() * u.powf(p);
    let mut a = 1.0;
    let mut total = 0.0;
    while a < top {
        let b = (2.0 * a).min(top);
        total += gauss_legendre(&f, a, b, 1);
        a = b;
    }
    total
}

/// `int_0^U (1 - e^{-u}) u^{-s} du` for `1 <= s < 2`.
fn mass_kernel(s: f64, upper: f64) -> f64 {
    let a = upper.min(1.0);
    let mut sum = 0.0;
    let mut fact = 1.0;
    for k in 1..60 {
        fact *= k as f64;
        let e = k as f64 + 1.0 - s;
        let t = a.powf(e) / (fact * e);
        sum += if k % 2 == 1 { t } else { -t };
        if t < 1e-20 * sum.abs() {
            break;
        }
    }
    if upper > 1.0 {
        sum += power_integral(-s, 1.0, upper);
        sum -= exp_power_integral(-s, upper);
    }
    sum
}

/// `int_0^U (e^{-u} - 1 + u) u^{-s-1} du` for `1 <= s < 2`.
fn psi_kernel(s: f64, upper: f64) -> f64 {
    let a = upper.min(1.0);
    let mut sum = 0.0;
    let mut fact = 1.0;
    for k in 1..60 {
        fact *= k as f64;
        if k < 2 {
            continue;
        }
        let e = k as f64 - s;
        let t = a.powf(e) / (fact * e);
        sum += if k % 2 == 0 { t } else { -t };
        if t < 1e-20 * sum.abs() {
            break;
        }
    }
    if upper > 1.0 {
        sum += power_integral(-s, 1.0, upper) - power_integral(-s - 1.0, 1.0, upper);
        sum += exp_power_integral(-s - 1.0, upper);
    }
    sum
}

/// `E[mu[0, l]] = theta0^2 l + sum_i theta_i (1 - exp(-theta_i l))`.
pub fn expected_mass(family: &ThetaFamily, l: f64) -> f64 {
    assert!(l >= 0.0, "negative length {l}");
    match family {
        ThetaFamily::Brownian => l,
        ThetaFamily::PowerLaw { .. } | ThetaFamily::Harmonic => {
            let c = family.normalization().unwrap();
            power_profile(Profile::Mass, c, family.decay_exponent().unwrap(), l)
        }
        ThetaFamily::Explicit { theta0, atoms, .. } => expected_mass_truncated(
            &ThetaRealization::from_weights(*theta0, atoms.clone()),
            l,
        ),
    }
}

/// `psi(l) = theta0^2 l^2 / 2 + sum_i (exp(-l theta_i) - 1 + l theta_i)`.
pub fn psi(family: &ThetaFamily, l: f64) -> f64 {
    assert!(l >= 0.0, "negative length {l}");
    match family {
        ThetaFamily::Brownian => 0.5 * l * l,
        ThetaFamily::PowerLaw { .. } | ThetaFamily::Harmonic => {
            let c = family.normalization().unwrap();
            power_profile(Profile::Psi, c, family.decay_exponent().unwrap(), l)
        }
        ThetaFamily::Explicit { theta0, atoms, .. } => {
            psi_truncated(&ThetaRealization::from_weights(*theta0, atoms.clone()), l)
        }
    }
}

/// Constant `C` in `E[mu[0,l]] = c log l + C + o(1)` for the harmonic family.
pub fn harmonic_offset() -> f64 {
    static OFFSET: OnceLock<f64> = OnceLock::new();
    *OFFSET.get_or_init(|| {
        let fam = ThetaFamily::Harmonic;
        let c = fam.normalization().unwrap();
        let l = 1e250f64;
        expected_mass(&fam, l) - c * l.ln()
    })
}

/// Above this log-scale the harmonic profile is replaced by its logarithmic asymptote.
const LOG_OVERFLOW: f64 = 690.0;

/// `log X_m` where `E[mu[0, X_m]] = m`, and whether the asymptotic form was used.
fn log_inverse(family: &ThetaFamily, m: f64) -> Result<(f64, bool)> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(IcrtError::InvalidParameter(format!("mass target {m}")));
    }
    if m == 0.0 {
        return Ok((f64::NEG_INFINITY, false));
    }
    let drift = family.theta0().powi(2);
    let atomless = match family {
        ThetaFamily::Brownian => true,
        ThetaFamily::Explicit { atoms, .. } => atoms.is_empty(),
        _ => false,
    };
    if atomless {
        if drift == 0.0 {
            return Err(IcrtError::EmptyMeasure);
        }
        return Ok(((m / drift).ln(), false));
    }
    if let ThetaFamily::Harmonic = family {
        let c = family.normalization().unwrap();
        let v = (m - harmonic_offset()) / c;
        if v > LOG_OVERFLOW {
            return Ok((v, true));
        }
    }
    let g = |v: f64| expected_mass(family, v.exp()) - m;
    // E(l) <= l, so the root lies at or above log m
    let mut lo = m.ln();
    let mut hi;
    if drift > 0.0 {
        hi = (m / drift).ln();
    } else {
        let mut step = 1.0;
        hi = lo + step;
        let mut tries = 0;
        while g(hi) < 0.0 {
            if hi >= 709.0 || tries > 60 {
                return Err(IcrtError::RootNotBracketed { mass: m, iterations: tries });
            }
            lo = hi;
            step *= 2.0;
            hi = (lo + step).min(709.0);
            tries += 1;
        }
    }
    let mut iterations = 0;
    while iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let v = 0.5 * (lo + hi);
    if g(v).abs() > 1e-8 * m.max(1.0) {
        return Err(IcrtError::RootNotBracketed { mass: m, iterations });
    }
    Ok((v, false))
}

/// `X_m`, the inverse of the expected-mass profile.
pub fn inverse_expected_mass(family: &ThetaFamily, m: f64) -> Result<f64> {
    if let ThetaFamily::Brownian = family {
        if m >= 0.0 {
            return Ok(m);
        }
    }
    if let ThetaFamily::Explicit { theta0, atoms, .. } = family {
        if atoms.is_empty() && *theta0 > 0.0 && m >= 0.0 {
            return Ok(m / (theta0 * theta0));
        }
    }
    let (v, _) = log_inverse(family, m)?;
    let x = v.exp();
    if x.is_infinite() {
        return Err(IcrtError::RootNotBracketed { mass: m, iterations: 0 });
    }
    Ok(x)
}

/// `log X_m`; stays finite for harmonic masses whose `X_m` overflows.
pub fn log_inverse_expected_mass(family: &ThetaFamily, m: f64) -> Result<f64> {
    log_inverse(family, m).map(|(v, _)| v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Compactness {
    Compact,
    Noncompact,
    Inconclusive,
}

/// Window of trailing term ratios that decides the verdict.
pub const RATIO_WINDOW: usize = 5;
/// Terms must shrink at least by this factor across the window to call compactness.
pub const RATIO_COMPACT: f64 = 0.9;
/// Terms shrinking by less than this across the window indicate noncompactness.
pub const RATIO_NONCOMPACT: f64 = 0.95;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub verdict: Compactness,
    /// `sum_{n<=N} log X_{2^n} / 2^n`.
    pub partial_sum: f64,
    /// The summands, `n = 1..N`.
    pub terms: Vec<f64>,
    /// Ratios of consecutive terms over the final window.
    pub window_ratios: Vec<f64>,
    pub n_used: usize,
    /// Terms evaluated through the logarithmic asymptote.
    pub asymptotic_terms: usize,
    /// `int dl / (l E[mu[0,l]])` over the finite part of `[X_2, X_{2^N}]`.
    pub quadrature_mass: f64,
    /// `int dl / psi(l)` over the same range.
    pub quadrature_psi: f64,
    /// Upper end of the quadrature range.
    pub quadrature_upper: f64,
    /// `psi(l) <= l E[mu[0,l]] <= 2 psi(l)` held on every finite grid point.
    pub sandwich_holds: bool,
}

/// `psi(l) <= l E <= 2 psi(l)` up to rounding.
pub fn sandwich_holds(family: &ThetaFamily, l: f64) -> bool {
    let p = psi(family, l);
    let le = l * expected_mass(family, l);
    let slack = 1e-12 * le.abs();
    p <= le + slack && le <= 2.0 * p + slack
}

pub fn compactness_criterion(family: &ThetaFamily, n: usize) -> Result<CriterionVerdict> {
    if n < 8 {
        return Err(IcrtError::InvalidParameter(format!("criterion needs N >= 8, got {n}")));
    }
    family.check()?;
    let mut terms = Vec::with_capacity(n);
    let mut logs = Vec::with_capacity(n);
    let mut asymptotic_terms = 0;
    for k in 1..=n {
        let m = (k as f64).exp2();
        let (v, asym) = log_inverse(family, m)?;
        if asym {
            asymptotic_terms += 1;
        }
        logs.push((v, asym));
        terms.push(v / m);
    }
    let partial_sum = terms.iter().sum();
    let window_ratios: Vec<f64> =
        terms[n - RATIO_WINDOW - 1..].windows(2).map(|w| w[1] / w[0]).collect();
    let verdict = if window_ratios.iter().all(|&r| r <= RATIO_COMPACT) {
        Compactness::Compact
    } else if window_ratios.iter().all(|&r| r >= RATIO_NONCOMPACT) {
        Compactness::Noncompact
    } else {
        Compactness::Inconclusive
    };

    let mut quadrature_mass = 0.0;
    let mut quadrature_psi = 0.0;
    let mut quadrature_upper = logs[0].0.exp();
    let mut sandwich = sandwich_holds(family, quadrature_upper);
    for w in logs.windows(2) {
        let ((a, _), (b, asym)) = (w[0], w[1]);
        if asym || b > LOG_OVERFLOW {
            break;
        }
        let fm = |v: f64| 1.0 / expected_mass(family, v.exp());
        let fp = |v: f64| v.exp() / psi(family, v.exp());
        let scale_m = (b - a) * fm(b);
        let scale_p = (b - a) * fp(b);
        quadrature_mass += adaptive_simpson(&fm, a, b, 1e-10 * scale_m);
        quadrature_psi += adaptive_simpson(&fp, a, b, 1e-10 * scale_p);
        quadrature_upper = b.exp();
        sandwich &= sandwich_holds(family, quadrature_upper);
    }
    Ok(CriterionVerdict {
        verdict,
        partial_sum,
        terms,
        window_ratios,
        n_used: n,
        asymptotic_terms,
        quadrature_mass,
        quadrature_psi,
        quadrature_upper,
        sandwich_holds: sandwich,
    })
}
