//! Monte Carlo checks of the quantitative lemmas behind the construction.
//!
//! Each check runs `reps` independent replications on sub-streams of one root
//! seed, so results are identical for any worker count. Asymptotic statements
//! ("for all large enough i") are reported as monitors with a trend flag
//! rather than as pass/fail assertions.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{IcrtError, Result};
use crate::massmeasure::simulate_urn;
use crate::measure::{
    compactness_criterion, expected_mass, expected_mass_truncated, inverse_expected_mass, sample_mu,
    sample_mu_within, Compactness, MuRealization,
};
use crate::params::{make_theta, validate, ThetaFamily, ThetaRealization};
use crate::rng::{SeedStream, StreamRng};
use crate::rtree::IcrtTree;
use crate::stats::{ks_p_value, ks_two_sample, mean, normal_upper_quantile, std_dev};
use crate::stickbreak::{sample_cuts_classical, sample_cuts_new, sample_cuts_new_with, CutSequence, GlueRule, StopRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaId {
    DistanceDomination,
    HausdorffStep,
    PolyaConcentration,
    StrongLln,
    ConstructionEquivalence,
    CutCount,
    StickLength,
    SegmentWeight,
    MassLln,
    GapLaw,
}

impl LemmaId {
    pub const ALL: [LemmaId; 10] = [
        LemmaId::DistanceDomination,
        LemmaId::HausdorffStep,
        LemmaId::PolyaConcentration,
        LemmaId::StrongLln,
        LemmaId::ConstructionEquivalence,
        LemmaId::CutCount,
        LemmaId::StickLength,
        LemmaId::SegmentWeight,
        LemmaId::MassLln,
        LemmaId::GapLaw,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LemmaId::DistanceDomination => "distance-domination",
            LemmaId::HausdorffStep => "hausdorff-step",
            LemmaId::PolyaConcentration => "polya-concentration",
            LemmaId::StrongLln => "strong-lln",
            LemmaId::ConstructionEquivalence => "construction-equivalence",
            LemmaId::CutCount => "cut-count",
            LemmaId::StickLength => "stick-length",
            LemmaId::SegmentWeight => "segment-weight",
            LemmaId::MassLln => "mass-lln",
            LemmaId::GapLaw => "gap-law",
        }
    }

    /// Short names accepted on the command line besides [`LemmaId::name`].
    pub fn aliases(&self) -> &'static [&'static str] {
        match self {
            LemmaId::DistanceDomination => &["pizza", "domination"],
            LemmaId::HausdorffStep => &["big-lemma", "biglemma"],
            LemmaId::PolyaConcentration => &["polya", "urn"],
            LemmaId::StrongLln => &["strong"],
            LemmaId::ConstructionEquivalence => &["equiv", "equivalence"],
            LemmaId::CutCount => &["lemma8", "lemma-8"],
            LemmaId::StickLength => &["lemma9", "lemma-9"],
            LemmaId::SegmentWeight => &["lemma10", "lemma-10"],
            LemmaId::MassLln => &["lemma5", "lemma-5"],
            LemmaId::GapLaw => &["gap"],
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaId {
    type Err = IcrtError;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        LemmaId::ALL
            .into_iter()
            .find(|id| id.name() == key || id.aliases().contains(&key.as_str()))
            .ok_or_else(|| IcrtError::InvalidParameter(format!("unknown lemma id '{s}'")))
    }
}

/// Weight sequences `a_i` for the weighted law of large numbers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightSequence {
    Constant,
    Linear,
    /// `a_i = i^exponent`.
    Power { exponent: f64 },
    /// `a_i = ratio^i`.
    Geometric { ratio: f64 },
}

impl WeightSequence {
    fn ln_weight(&self, i: usize) -> f64 {
        let x = i as f64;
        match *self {
            WeightSequence::Constant => 0.0,
            WeightSequence::Linear => x.ln(),
            WeightSequence::Power { exponent } => exponent * x.ln(),
            WeightSequence::Geometric { ratio } => x * ratio.ln(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UrnSpec {
    pub a0: f64,
    pub m0: f64,
    /// Constant weight added per step.
    pub increment: f64,
    pub steps: usize,
    pub t_grid: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlnSpec {
    pub p: f64,
    pub n: usize,
    pub weights: WeightSequence,
}

/// Inputs of one check. Fields that a check does not use are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    pub lemma: LemmaId,
    pub family: ThetaFamily,
    /// Truncation `K` of the atom sequence.
    pub atoms: usize,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Simulate families whose nondegeneracy is unknown.
    pub force: bool,
    pub x_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    pub k_min: u32,
    pub k_max: u32,
    /// Largest tree length a check may simulate.
    pub max_horizon: f64,
    /// Fixed horizon for cut counts.
    pub horizon: f64,
    pub levels: Vec<f64>,
    pub cuts: usize,
    pub gap_indices: Vec<usize>,
    pub urn: UrnSpec,
    pub lln: LlnSpec,
}

impl CheckSpec {
    /// Defaults suited to `lemma`.
    pub fn new(lemma: LemmaId, family: ThetaFamily) -> Self {
        let mut spec = CheckSpec {
            lemma,
            family,
            atoms: 10_000,
            reps: 1000,
            alpha: 0.01,
            seed: 0,
            force: false,
            x_grid: vec![1.0, 2.0, 4.0],
            y_grid: vec![5.0, 6.0, 8.0],
            k_min: 4,
            k_max: 8,
            max_horizon: 1e6,
            horizon: 2.0,
            levels: vec![10.0, 20.0, 40.0],
            cuts: 1 << 14,
            gap_indices: vec![1, 10, 100],
            urn: UrnSpec { a0: 5.0, m0: 10.0, increment: 1.0, steps: 1000, t_grid: vec![0.2, 0.5, 1.0] },
            lln: LlnSpec { p: 0.3, n: 100_000, weights: WeightSequence::Constant },
        };
        match lemma {
            LemmaId::HausdorffStep => spec.reps = 200,
            LemmaId::PolyaConcentration => spec.reps = 100_000,
            LemmaId::ConstructionEquivalence => {
                spec.reps = 100_000;
                spec.atoms = 1000;
            }
            LemmaId::DistanceDomination => spec.reps = 10_000,
            LemmaId::StrongLln | LemmaId::StickLength | LemmaId::SegmentWeight => spec.reps = 200,
            LemmaId::MassLln => {
                spec.reps = 200;
                spec.atoms = 1_000_000;
                spec.levels = vec![100.0, 1000.0];
            }
            _ => {}
        }
        spec
    }

    pub fn check(&self) -> Result<()> {
        if self.reps < 100 {
            return Err(IcrtError::InvalidParameter(format!("reps must be at least 100, got {}", self.reps)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 0.1) {
            return Err(IcrtError::InvalidParameter(format!("alpha must lie in (0, 0.1], got {}", self.alpha)));
        }
        self.family.check()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Monitor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub lemma: LemmaId,
    pub family: String,
    pub verdict: Verdict,
    pub reps: usize,
    pub seed: u64,
    pub alpha: f64,
    pub statistics: Value,
}

impl CheckResult {
    /// A monitor never fails the run.
    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

pub fn run_check(spec: &CheckSpec) -> Result<CheckResult> {
    spec.check()?;
    match spec.lemma {
        LemmaId::DistanceDomination => check_distance_domination(spec),
        LemmaId::HausdorffStep => check_hausdorff_step(spec),
        LemmaId::PolyaConcentration => check_polya_concentration(spec),
        LemmaId::StrongLln => check_strong_lln(spec),
        LemmaId::ConstructionEquivalence => check_construction_equivalence(spec),
        LemmaId::CutCount => check_cut_count(spec),
        LemmaId::StickLength => check_stick_length(spec),
        LemmaId::SegmentWeight => check_segment_weight(spec),
        LemmaId::MassLln => check_mass_lln(spec),
        LemmaId::GapLaw => check_gap_law(spec),
    }
}

fn result(spec: &CheckSpec, verdict: Verdict, statistics: Value) -> CheckResult {
    CheckResult {
        lemma: spec.lemma,
        family: spec.family.name().into(),
        verdict,
        reps: spec.reps,
        seed: spec.seed,
        alpha: spec.alpha,
        statistics,
    }
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Runs `reps` jobs on the current rayon pool, in replication order.
fn replicate<T, F>(reps: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..reps as u64).into_par_iter().map(job).collect()
}

fn simulable_theta(spec: &CheckSpec) -> Result<ThetaRealization> {
    let theta = make_theta(&spec.family, spec.atoms)?;
    let report = validate(&theta, &spec.family);
    if !report.simulable(spec.force) {
        return Err(IcrtError::HypothesisFailed(format!(
            "family {} is not simulable: {}",
            spec.family.name(),
            report.notes.join("; ")
        )));
    }
    Ok(theta)
}

/// Measure on the whole line when `theta` has no atoms, otherwise with every
/// atom placed.
fn full_mu(theta: &ThetaRealization, rng: &mut StreamRng) -> MuRealization {
    if theta.atoms.is_empty() {
        MuRealization::new(theta.drift(), Vec::new(), None).expect("drift-only measure")
    } else {
        sample_mu(theta, rng)
    }
}

/// One row of a one-sided test that a sample is stochastically dominated by
/// a standard exponential.
#[derive(Clone, Debug, Serialize)]
struct DominanceRow {
    decile: f64,
    threshold: f64,
    reference: f64,
    empirical: f64,
    band: f64,
    ok: bool,
}

const DECILES: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Empirical `P(W >= t)` at the deciles of `Exp(1)` against the reference
/// survival plus `z` binomial standard errors.
fn exp1_dominance(samples: &[f64], z: f64) -> (bool, Vec<DominanceRow>) {
    let n = samples.len() as f64;
    let rows: Vec<DominanceRow> = DECILES
        .iter()
        .map(|&q| {
            let threshold = -(1.0 - q).ln();
            let reference = 1.0 - q;
            let empirical = samples.iter().filter(|&&w| w >= threshold).count() as f64 / n;
            let band = z * (reference * (1.0 - reference) / n).sqrt();
            DominanceRow { decile: q, threshold, reference, empirical, band, ok: empirical <= reference + band }
        })
        .collect();
    (rows.iter().all(|r| r.ok), rows)
}

fn pairs(spec: &CheckSpec) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for &x in &spec.x_grid {
        for &y in &spec.y_grid {
            if !(x > 0.0 && y > 0.0) {
                return Err(IcrtError::InvalidParameter("grid points must be positive".into()));
            }
            out.push((x, y));
        }
    }
    if out.is_empty() {
        return Err(IcrtError::InvalidParameter("empty (x, y) grid".into()));
    }
    Ok(out)
}

/// `d(T_x, y) * mu[0, x]` for every grid pair on one sampled tree.
fn scaled_distances(mu: &MuRealization, pairs: &[(f64, f64)], horizon: f64, rng: &mut StreamRng) -> Result<Vec<f64>> {
    let cuts = sample_cuts_new(mu, StopRule::Horizon(horizon), rng)?;
    let tree = IcrtTree::truncated(&cuts, horizon)?;
    pairs
        .iter()
        .map(|&(x, y)| {
            let d = tree.distance_to_truncation(tree.point(y)?, x)?;
            Ok(d * mu.mass(x)?)
        })
        .collect()
}

fn domination_table(
    pairs: &[(f64, f64)],
    samples: &[Vec<f64>],
    scale: f64,
    z: f64,
) -> (bool, bool, Vec<Value>) {
    let mut all_ok = true;
    let mut any_fail = false;
    let rows = pairs
        .iter()
        .enumerate()
        .map(|(j, &(x, y))| {
            let w: Vec<f64> = samples.iter().map(|s| s[j] / scale).collect();
            let (ok, deciles) = exp1_dominance(&w, z);
            all_ok &= ok;
            any_fail |= !ok;
            json!({ "x": x, "y": y, "ok": ok, "mean": mean(&w), "deciles": deciles })
        })
        .collect();
    (all_ok, any_fail, rows)
}

/// Reference scale of the negative control. Scale 1 is not a usable control:
/// walking down from `y`, the walk stops at rate exactly `mu[0, x]` per unit
/// length, so `d(T_x, y) mu[0, x]` is itself dominated by `Exp(1)`.
pub const DOMINATION_CONTROL_SCALE: f64 = 0.5;

/// Distance from `y` to the truncated tree `T_x`, scaled by `mu[0, x] / 4`,
/// tested for domination by `Exp(1)`. The annealed test resamples the measure
/// per replication; the quenched test fixes one measure. The same statistic at
/// [`DOMINATION_CONTROL_SCALE`] must be rejected. The sharp scale 1 is
/// reported alongside.
pub fn check_distance_domination(spec: &CheckSpec) -> Result<CheckResult> {
    spec.check()?;
    let theta = simulable_theta(spec)?;
    let pairs = pairs(spec)?;
    let horizon = pairs.iter().map(|p| p.0.max(p.1)).fold(0.0, f64::max);
    let seeds = SeedStream::new(spec.seed);
    let z = normal_upper_quantile(spec.alpha / (pairs.len() * DECILES.len()) as f64);

    let annealed = replicate(spec.reps, |r| {
        let mut rng = seeds.replication(r, 0);
        let mu = sample_mu_within(&theta, horizon, &mut rng)?;
        scaled_distances(&mu, &pairs, horizon, &mut rng)
    })?;
    let quenched_seeds = seeds.child(1);
    let fixed_mu = sample_mu_within(&theta, horizon, &mut quenched_seeds.stream(u64::MAX))?;
    let quenched = replicate(spec.reps, |r| {
        let mut rng = quenched_seeds.replication(r, 0);
        scaled_distances(&fixed_mu, &pairs, horizon, &mut rng)
    })?;

    let (annealed_ok, _, annealed_rows) = domination_table(&pairs, &annealed, 4.0, z);
    let (quenched_ok, _, quenched_rows) = domination_table(&pairs, &quenched, 4.0, z);
    let (_, control_rejected, control_rows) = domination_table(&pairs, &annealed, DOMINATION_CONTROL_SCALE, z);
    let (sharp_ok, _, sharp_rows) = domination_table(&pairs, &annealed, 1.0, z);
    let verdict = pass_if(annealed_ok && quenched_ok && control_rejected);
    Ok(result(
        spec,
        verdict,
        json!({
            "z": z,
            "annealed_pass": annealed_ok,
            "quenched_pass": quenched_ok,
            "control_rejected": control_rejected,
            "annealed": annealed_rows,
            "quenched": quenched_rows,
            "control_scale": DOMINATION_CONTROL_SCALE,
            "control": control_rows,
            "sharp_scale_pass": sharp_ok,
            "sharp_scale": sharp_rows,
        }),
    ))
}

/// Hausdorff distance between consecutive dyadic truncations against
/// `21 log X_{2^k} / 2^k`.
pub fn check_hausdorff_step(spec: &CheckSpec) -> Result<CheckResult> {
    spec.check()?;
    if spec.k_min < 1 || spec.k_max <= spec.k_min {
        return Err(IcrtError::InvalidParameter("need 1 <= k_min < k_max".into()));
    }
    let criterion = compactness_criterion(&spec.family, 30)?;
    if criterion.verdict != Compactness::Compact {
        return Err(IcrtError::HypothesisFailed(format!("family {} is not compact", spec.family.name())));
    }
    let theta = simulable_theta(spec)?;
    let ks: Vec<u32> = (spec.k_min..=spec.k_max).collect();
    let scales: Vec<f64> = (spec.k_min - 1..=spec.k_max)
        .map(|k| inverse_expected_mass(&spec.family, (k as f64).exp2()))
        .collect::<Result<_>>()?;
    let horizon = *scales.last().unwrap();
    if horizon > spec.max_horizon {
        return Err(IcrtError::BeyondHorizon { requested: horizon, horizon: spec.max_horizon });
    }
    let bounds: Vec<f64> = ks.iter().zip(&scales[1..]).map(|(&k, x)| 21.0 * x.ln() / (k as f64).exp2()).collect();
    let seeds = SeedStream::new(spec.seed);
    let steps = replicate(spec.reps, |r| {
        let mut rng = seeds.replication(r, 0);
        let mu = sample_mu_within(&theta, horizon, &mut rng)?;
        let cuts = sample_cuts_new(&mu, StopRule::Horizon(horizon), &mut rng)?;
        let tree = IcrtTree::truncated(&cuts, horizon)?;
        scales.windows(2).map(|w| tree.hausdorff_truncation(w[0], w[1])).collect::<Result<Vec<f64>>>()
    })?;
    let fractions: Vec<f64> = (0..ks.len())
        .map(|j| steps.iter().filter(|s| s[j] > bounds[j]).count() as f64 / spec.reps as f64)
        .collect();
    let non_increasing = fractions.windows(2).all(|w| w[1] <= w[0]);
    let last = *fractions.last().unwrap();
    let rows: Vec<Value> = ks
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let d: Vec<f64> = steps.iter().map(|s| s[j]).collect();
            json!({
                "k": k,
                "scale": scales[j + 1],
                "bound": bounds[j],
                "mean_distance": mean(&d),
                "max_distance": d.iter().cloned().fold(0.0, f64::max),
                "violation_fraction": fractions[j],
            })
        })
        .collect();
    Ok(result(
        spec,
        pass_if(non_increasing && last < 0.05),
        json!({
            "non_increasing": non_increasing,
            "final_fraction": last,
            "mass_deficit": 1.0 - expected_mass_truncated(&theta, horizon) / expected_mass(&spec.family, horizon),
            "rows": rows,
        }),
    ))
}

/// Urn paths against `2 exp(-t^2 / (4 (1 + t)) * A_0 / max m)`, plus the
/// martingale property of `A_n / M_n`.
pub fn check_polya_concentration(spec: &CheckSpec) -> Result<CheckResult> {
    spec.check()?;
    let u = &spec.urn;
    if !(u.a0 > 0.0 && u.a0 <= u.m0 && u.increment > 0.0) || u.t_grid.is_empty() {
        return Err(IcrtError::InvalidParameter("urn needs 0 < A0 <= M0, positive increments and a t grid".into()));
    }
    let seeds = SeedStream::new(spec.seed);
    let paths = replicate(spec.reps, |r| {
        let mut rng = seeds.replication(r, 0);
        let path = simulate_urn(u.a0, u.m0, |_| u.increment, u.steps, &mut rng);
        let ratios = path.ratios();
        Ok((path.max_deviation(), *ratios.last().unwrap()))
    })?;
    let r0 = u.a0 / u.m0;
    let n = spec.reps as f64;
    let z = normal_upper_quantile(spec.alpha / u.t_grid.len() as f64);
    let mut tails_ok = true;
    let rows: Vec<Value> = u
        .t_grid
        .iter()
        .map(|&t| {
            let bound = (2.0 * (-t * t / (4.0 * (1.0 + t)) * u.a0 / u.increment).exp()).min(1.0);
            let empirical = paths.iter().filter(|p| p.0 > t * r0).count() as f64 / n;
            let band = z * (bound * (1.0 - bound) / n).sqrt();
            let ok = empirical <= bound + band;
            tails_ok &= ok;
            json!({ "t": t, "bound": bound, "empirical": empirical, "band": band, "ok": ok })
        })
        .collect();
    let finals: Vec<f64> = paths.iter().map(|p| p.1).collect();
    let m = mean(&finals);
    let half_width = normal_upper_quantile(spec.alpha / 2.0) * std_dev(&finals) / n.sqrt();
    let martingale_ok = (m - r0).abs() <= half_width;
    Ok(result(
        spec,
        pass_if(tails_ok && martingale_ok),
        json!({
            "tails": rows,
            "tails_pass": tails_ok,
            "start_ratio": r0,
            "final_mean": m,
            "final_half_width": half_width,
            "martingale_pass": martingale_ok,
        }),
    ))
}

/// `n a_n^2 / A_n^2`, in log space. Below 1 when the terms decay faster than
/// `1/n`, which is how the summability hypothesis is read at finite `n`.
pub fn weight_tail_statistic(weights: WeightSequence, n: usize) -> f64 {
    let mut ln_total = f64::NEG_INFINITY;
    let mut ln_last = 0.0;
    for i in 1..=n {
        ln_last = weights.ln_weight(i);
        let (hi, lo) = if ln_total > ln_last { (ln_total, ln_last) } else { (ln_last, ln_total) };
        ln_total = hi + (lo - hi).exp().ln_1p();
    }
    ((n as f64).ln() + 2.0 * (ln_last - ln_total)).exp()
}

/// `sum a_i X_i / (p A_n)` for Bernoulli(p) `X_i`.
pub fn check_strong_lln(spec: &CheckSpec) -> Result<CheckResult> {
    spec.check()?;
    let l = &spec.lln;
    if !(l.p > 0.0 && l.p < 1.0) || l.n < 4 {
        return Err(IcrtError::InvalidParameter("need p in (0, 1) and n >= 4".into()));
    }
    let tail = weight_tail_statistic(l.weights, l.n);
    if !(tail < 1.0) {
        return Err(IcrtError::HypothesisFailed(format!(
            "weights do not satisfy sum a_n^2 / A_n^2 < infinity (n a_n^2 / A_n^2 = {tail:.3e})"
        )));
    }
    let half = l.n / 2;
    // weights relative to the last one keep every sequence in range
    let ln_ref = l.weights.ln_weight(l.n);
    let w: Vec<f64> = (1..=l.n).map(|i| (l.weights.ln_weight(i) - ln_ref).exp()).collect();
    let total_half: f64 = w[..half].iter().sum();
    let total: f64 = w.iter().sum();
    let seeds = SeedStream::new(spec.seed);
    let ratios = replicate(spec.reps, |r| {
        let mut rng = seeds.replication(r, 0);
        let mut s = 0.0;
        let mut s_half = 0.0;
        for (i, a) in w.iter().enumerate() {
            if rng.random::<f64>() < l.p {
                s += a;
            }
            if i + 1 == half {
                s_half = s;
            }
        }
        Ok((s_half / (l.p * total_half), s / (l.p * total)))
    })?;
    let at_half: Vec<f64> = ratios.iter().map(|r| r.0).collect();
    let at_end: Vec<f64> = ratios.iter().map(|r| r.1).collect();
    let m = mean(&at_end);
    let sd_half = std_dev(&at_half);
    let sd_end = std_dev(&at_end);
    let half_width = normal_upper_quantile(spec.alpha / 2.0) * sd_end / (spec.reps as f64).sqrt();
    let mean_ok = (m - 1.0).abs() <= half_width;
    let shrinks = sd_end < sd_half;
    Ok(result(
        spec,
        pass_if(mean_ok && shrinks),
        json!({
            "weights": l.weights,
            "tail_statistic": tail,
            "mean_ratio": m,
            "half_width": half_width,
            "sd_half": sd_half,
            "sd_end": sd_end,
            "mean_pass": mean_ok,
            "spread_shrinks": shrinks,
        }),
    ))
}

/// `(Y_1, Y_2, #cuts <= H, d(0, Y_3))` of one sample.
fn equivalence_statistics(cuts: &CutSequence, horizon: f64) -> Result<[f64; 4]> {
    let tree = IcrtTree::from_cuts(&cuts.y[..3], &cuts.z[..2])?;
    let depth = tree.depth(tree.point(cuts.y[2])?);
    Ok([cuts.y[0], cuts.y[1], cuts.cuts_upto(horizon) as f64, depth])
}

const EQUIVALENCE_NAMES: [&str; 4] = ["y1", "y2", "cuts_to_horizon", "depth_y3"];

fn two_sample(a: &[[f64; 4]], b: &[[f64; 4]], level: f64) -> (bool, Value) {
    let n_eff = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let mut ok = true;
    let rows: Vec<Value> = (0..4)
        .map(|j| {
            let xs: Vec<f64> = a.iter().map(|s| s[j]).collect();
            let ys: Vec<f64> = b.iter().map(|s| s[j]).collect();
            let d = ks_two_sample(&xs, &ys);
            let p = ks_p_value(d, n_eff);
            ok &= p >= level;
            json!({ "statistic": EQUIVALENCE_NAMES[j], "ks": d, "p_value": p })
        })
        .collect();
    (ok, Value::Array(rows))
}

fn sample_new(theta: &ThetaRealization, stop: StopRule, glue: GlueRule, rng: &mut StreamRng) -> Result<CutSequence> {
    let mu = full_mu(theta, rng);
    sample_cuts_new_with(&mu, stop, glue, rng)
}

/// Family used by the corrupted-glue control: uniform glue is only wrong
/// when the measure has atoms.
pub fn equivalence_control_family() -> ThetaFamily {
    ThetaFamily::explicit(0.5f64.sqrt(), vec![0.5f64.sqrt()])
}

/// Two-sample Kolmogorov-Smirnov tests between the classical and the
/// measure-driven samplers, with Bonferroni over the four statistics. The
/// measure-driven sampler against itself is the calibration run; uniform glue
/// points on a family with atoms are the negative control.
pub fn check_construction_equivalence(spec: &CheckSpec) -> Result<CheckResult> {
    spec.check()?;
    let theta = simulable_theta(spec)?;
    let stop = StopRule::Both { cuts: 3, horizon: spec.horizon };
    let level = spec.alpha / 4.0;
    let seeds = SeedStream::new(spec.seed);
    let draw = |seeds: SeedStream, theta: &ThetaRealization, classical: bool, glue: GlueRule| {
        replicate(spec.reps, move |r| {
            let mut rng = seeds.replication(r, 0);
            let cuts = if classical {
                sample_cuts_classical(theta, stop, &mut rng)?
            } else {
                sample_new(theta, stop, glue, &mut rng)?
            };
            equivalence_statistics(&cuts, spec.horizon)
        })
    };
    let classical = draw(seeds.child(1), &theta, true, GlueRule::MuWeighted)?;
    let new = draw(seeds.child(2), &theta, false, GlueRule::MuWeighted)?;
    let new_again = draw(seeds.child(3), &theta, false, GlueRule::MuWeighted)?;
    let (main_ok, main_rows) = two_sample(&classical, &new, level);
    let (calibration_ok, calibration_rows) = two_sample(&new, &new_again, level);

    let control_theta = make_theta(&equivalence_control_family(), 1)?;
    let control_classical = draw(seeds.child(4), &control_theta, true, GlueRule::MuWeighted)?;
    let corrupted = draw(seeds.child(5), &control_theta, false, GlueRule::UniformLength)?;
    let (control_ok, control_rows) = two_sample(&control_classical, &corrupted, level);
    let control_rejected = !control_ok;
    Ok(result(
        spec,
        pass_if(main_ok && calibration_ok && control_rejected),
        json!({
            "horizon": spec.horizon,
            "level": level,
            "classical_vs_new": main_rows,
            "pass": main_ok,
            "calibration": calibration_rows,
            "calibration_pass": calibration_ok,
            "control_family": equivalence_control_family(),
            "control": control_rows,
            "control_rejected": control_rejected,
        }),
    ))
}

/// Fraction of replications with more than `2 l mu[0, l]` cuts in `[0, l]`.
pub fn check_cut_count(spec: &CheckSpec) -> Result<CheckResult> {
    spec.check()?;
    let theta = simulable_theta(spec)?;
    if spec.levels.is_empty() || spec.levels.iter().any(|&l| !(l > 0.0)) {
        return Err(IcrtError::InvalidParameter("levels must be positive".into()));
    }
    let horizon = spec.levels.iter().cloned().fold(0.0, f64::max);
    let seeds = SeedStream::new(spec.seed);
    let exceed = replicate(spec.reps, |r| {
        let mut rng = seeds.replication(r, 0);
        let mu = sample_mu_within(&theta, horizon, &mut rng)?;
        let cuts = sample_cuts_new(&mu, StopRule::Horizon(horizon), &mut rng)?;
        spec.levels
            .iter()
            .map(|&l| Ok((cuts.cuts_upto(l) as f64, 2.0 * l * mu.mass(l)?)))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut ok = true;
    let rows: Vec<Value> = spec
        .levels
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let count = exceed.iter().filter(|e| e[j].0 > e[j].1).count();
            let fraction = count as f64 / spec.reps as f64;
            ok &= fraction < 0.01;
            let counts: Vec<f64> = exceed.iter().map(|e| e[j].0).collect();
            json!({ "level": l, "mean_cuts": mean(&counts), "exceed_fraction": fraction })
        })
        .collect();
    Ok(result(spec, pass_if(ok), json!({ "threshold": 0.01, "rows": rows })))
}

/// Dyadic index blocks `[max(2^j, from), 2^(j+1))` below `n`.
fn index_blocks(from: usize, n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut lo = from;
    while lo < n {
        let hi = (lo + 1).next_power_of_two().min(n);
        let hi = if hi <= lo { n } else { hi };
        out.push((lo, hi));
        lo = hi;
    }
    out
}

/// Shared driver for the per-index monitors: `violates(cuts, i)` decides the
/// bound at 1-based index `i` (comparing segment `i + 1` with state at `Y_i`).
fn index_monitor<F>(spec: &CheckSpec, from: usize, violates: F) -> Result<CheckResult>
where
    F: Fn(&CutSequence, usize) -> bool + Sync + Send,
{
    spec.check()?;
    let theta = simulable_theta(spec)?;
    let n = spec.cuts;
    if n <= from + 1 {
        return Err(IcrtError::InvalidParameter(format!("need more than {} cuts", from + 1)));
    }
    let blocks = index_blocks(from, n);
    let seeds = SeedStream::new(spec.seed);
    let counts = replicate(spec.reps, |r| {
        let mut rng = seeds.replication(r, 0);
        let mu = full_mu(&theta, &mut rng);
        let cuts = sample_cuts_new(&mu, StopRule::Cuts(n), &mut rng)?.with_measure(&mu)?;
        Ok(blocks
            .iter()
            .map(|&(lo, hi)| (lo..hi).filter(|&i| violates(&cuts, i)).count())
            .collect::<Vec<usize>>())
    })?;
    let fractions: Vec<f64> = blocks
        .iter()
        .enumerate()
        .map(|(j, &(lo, hi))| {
            let total: usize = counts.iter().map(|c| c[j]).sum();
            total as f64 / ((hi - lo) * spec.reps) as f64
        })
        .collect();
    let decaying = fractions.windows(2).all(|w| w[1] <= w[0]);
    let rows: Vec<Value> = blocks
        .iter()
        .zip(&fractions)
        .map(|(&(lo, hi), f)| json!({ "from": lo, "to": hi, "violation_fraction": f }))
        .collect();
    Ok(result(spec, Verdict::Monitor, json!({ "decaying": decaying, "blocks": rows })))
}

/// Monitor of `l_{i+1} <= 5 log(Y_i) / M_i`.
pub fn check_stick_length(spec: &CheckSpec) -> Result<CheckResult> {
    index_monitor(spec, 100, |c, i| c.seg_len[i] > 5.0 * c.y[i - 1].ln() / c.cum_mass[i - 1])
}

/// Monitor of `m_{i+1} <= log^2(Y_i) / Y_i`.
pub fn check_segment_weight(spec: &CheckSpec) -> Result<CheckResult> {
    index_monitor(spec, 100, |c, i| {
        let y = c.y[i - 1];
        c.seg_mass[i] > y.ln().powi(2) / y
    })
}

/// `mu[0, l] / E mu[0, l]` averaged over replications.
pub fn check_mass_lln(spec: &CheckSpec) -> Result<CheckResult> {
    spec.check()?;
    let theta = simulable_theta(spec)?;
    if spec.levels.is_empty() || spec.levels.iter().any(|&l| !(l > 0.0)) {
        return Err(IcrtError::InvalidParameter("levels must be positive".into()));
    }
    let horizon = spec.levels.iter().cloned().fold(0.0, f64::max);
    // The simulated measure has K atoms, so its mean is the truncated profile.
    let expected: Vec<f64> = spec.levels.iter().map(|&l| expected_mass_truncated(&theta, l)).collect();
    let seeds = SeedStream::new(spec.seed);
    let masses = replicate(spec.reps, |r| {
        let mut rng = seeds.replication(r, 0);
        let mu = sample_mu_within(&theta, horizon, &mut rng)?;
        spec.levels.iter().map(|&l| mu.mass(l)).collect::<Result<Vec<f64>>>()
    })?;
    let mut ok = true;
    let rows: Vec<Value> = spec
        .levels
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let ratios: Vec<f64> = masses.iter().map(|m| m[j] / expected[j]).collect();
            let m = mean(&ratios);
            let band = 5.0 * std_dev(&ratios) / (spec.reps as f64).sqrt();
            let row_ok = (m - 1.0).abs() <= band;
            ok &= row_ok;
            let full = expected_mass(&spec.family, l);
            json!({
                "level": l,
                "expected_truncated": expected[j],
                "expected": full,
                "mean_ratio": m,
                "mean_ratio_untruncated": m * expected[j] / full,
                "band": band,
                "ok": row_ok,
            })
        })
        .collect();
    Ok(result(spec, pass_if(ok), json!({ "residual_square_mass": theta.residual_square_mass, "rows": rows })))
}

/// `(Y_{i+1} - Y_i) mu[0, Y_i]` at fixed indices, tested for domination by `Exp(1)`.
pub fn check_gap_law(spec: &CheckSpec) -> Result<CheckResult> {
    spec.check()?;
    let theta = simulable_theta(spec)?;
    let indices = &spec.gap_indices;
    if indices.is_empty() || indices.contains(&0) {
        return Err(IcrtError::InvalidParameter("gap indices are 1-based and nonempty".into()));
    }
    let n = indices.iter().max().unwrap() + 1;
    let seeds = SeedStream::new(spec.seed);
    let gaps = replicate(spec.reps, |r| {
        let mut rng = seeds.replication(r, 0);
        let mu = full_mu(&theta, &mut rng);
        let cuts = sample_cuts_new(&mu, StopRule::Cuts(n), &mut rng)?.with_measure(&mu)?;
        Ok(indices.iter().map(|&i| cuts.seg_len[i] * cuts.cum_mass[i - 1]).collect::<Vec<f64>>())
    })?;
    let z = normal_upper_quantile(spec.alpha / (indices.len() * DECILES.len()) as f64);
    let mut ok = true;
    let rows: Vec<Value> = indices
        .iter()
        .enumerate()
        .map(|(j, &i)| {
            let w: Vec<f64> = gaps.iter().map(|g| g[j]).collect();
            let (row_ok, deciles) = exp1_dominance(&w, z);
            ok &= row_ok;
            json!({ "index": i, "mean": mean(&w), "ok": row_ok, "deciles": deciles })
        })
        .collect();
    Ok(result(spec, pass_if(ok), json!({ "z": z, "rows": rows })))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(lemma: LemmaId, family: ThetaFamily) -> CheckSpec {
        let mut s = CheckSpec::new(lemma, family);
        s.reps = 200;
        s.seed = 11;
        s
    }

    #[test]
    fn lemma_ids_parse() {
        assert_eq!("pizza".parse::<LemmaId>().unwrap(), LemmaId::DistanceDomination);
        assert_eq!("BIG-LEMMA".parse::<LemmaId>().unwrap(), LemmaId::HausdorffStep);
        assert_eq!("strong_lln".parse::<LemmaId>().unwrap(), LemmaId::StrongLln);
        assert_eq!("equiv".parse::<LemmaId>().unwrap(), LemmaId::ConstructionEquivalence);
        assert!("nonsense".parse::<LemmaId>().is_err());
        for id in LemmaId::ALL {
            assert_eq!(id.name().parse::<LemmaId>().unwrap(), id);
        }
    }

    #[test]
    fn spec_bounds() {
        let mut s = small(LemmaId::GapLaw, ThetaFamily::Brownian);
        s.reps = 99;
        assert!(s.check().is_err());
        s.reps = 100;
        s.alpha = 0.2;
        assert!(s.check().is_err());
    }

    #[test]
    fn dominance_rows() {
        let xs: Vec<f64> = (0..1000).map(|i| -(1.0 - (i as f64 + 0.5) / 1000.0).ln()).collect();
        let (ok, _) = exp1_dominance(&xs, 2.0);
        assert!(ok);
        let doubled: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        assert!(!exp1_dominance(&doubled, 2.0).0);
        assert!(exp1_dominance(&[0.0; 100], 2.0).0);
    }

    #[test]
    fn tail_statistic() {
        assert!((weight_tail_statistic(WeightSequence::Constant, 1000) - 1e-3).abs() < 1e-12);
        // A_n = n(n+1)/2
        let lin = weight_tail_statistic(WeightSequence::Linear, 1000);
        assert!((lin - 1000.0 * 1e6 / (500.0 * 1001.0f64).powi(2)).abs() < 1e-9);
        assert!(weight_tail_statistic(WeightSequence::Geometric { ratio: 2.0 }, 100_000) > 1.0);
    }

    #[test]
    fn geometric_weights_refused() {
        let mut s = small(LemmaId::StrongLln, ThetaFamily::Brownian);
        s.lln.weights = WeightSequence::Geometric { ratio: 2.0 };
        assert!(matches!(run_check(&s), Err(IcrtError::HypothesisFailed(_))));
    }

    #[test]
    fn strong_lln_linear() {
        let mut s = small(LemmaId::StrongLln, ThetaFamily::Brownian);
        s.lln.n = 20_000;
        s.lln.weights = WeightSequence::Linear;
        let r = run_check(&s).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.statistics);
    }

    #[test]
    fn degenerate_urn() {
        let mut s = small(LemmaId::PolyaConcentration, ThetaFamily::Brownian);
        s.urn.a0 = 10.0;
        s.urn.steps = 100;
        let r = run_check(&s).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.statistics["final_mean"], 1.0);
    }

    #[test]
    fn hausdorff_needs_compact_family() {
        let s = small(LemmaId::HausdorffStep, ThetaFamily::Harmonic);
        assert!(matches!(run_check(&s), Err(IcrtError::HypothesisFailed(_))));
    }

    #[test]
    fn degenerate_family_refused() {
        let s = small(LemmaId::GapLaw, ThetaFamily::explicit(0.0, vec![1.0]));
        assert!(matches!(run_check(&s), Err(IcrtError::HypothesisFailed(_))));
    }

    #[test]
    fn blocks_cover_range() {
        assert_eq!(index_blocks(100, 600), vec![(100, 128), (128, 256), (256, 512), (512, 600)]);
        assert_eq!(index_blocks(128, 256), vec![(128, 256)]);
    }

    #[test]
    fn checks_are_reproducible() {
        let mut s = small(LemmaId::GapLaw, ThetaFamily::Brownian);
        s.gap_indices = vec![1, 5];
        let a = run_check(&s).unwrap();
        let b = run_check(&s).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
