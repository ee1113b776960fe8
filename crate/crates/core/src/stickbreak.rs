//! Cut and glue samplers: the measure-driven construction and the classical
//! triangle-plus-atom-processes construction.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{IcrtError, Result};
use crate::measure::{first_points_within, MuRealization};
use crate::params::ThetaRealization;

/// When to stop drawing cuts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopRule {
    /// Exactly this many cuts.
    Cuts(usize),
    /// Every cut up to this length.
    Horizon(f64),
    /// Every cut up to `horizon`, and at least `cuts` cuts in total.
    Both { cuts: usize, horizon: f64 },
}

impl StopRule {
    fn horizon(&self) -> Option<f64> {
        match *self {
            StopRule::Cuts(_) => None,
            StopRule::Horizon(h) | StopRule::Both { horizon: h, .. } => Some(h),
        }
    }

    /// Whether a cut at `y` is kept when `count` cuts are already kept.
    fn keeps(&self, count: usize, y: f64) -> bool {
        match *self {
            StopRule::Cuts(n) => count < n,
            StopRule::Horizon(h) => y <= h,
            StopRule::Both { cuts, horizon } => y <= horizon || count < cuts,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    New,
    Classical,
    Manual,
}

/// How glue points are drawn in the measure-driven sampler.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlueRule {
    /// From `mu` restricted to `[0, Y_i]`, normalized. The correct law.
    MuWeighted,
    /// Uniform on `[0, Y_i]`, ignoring atoms. Only useful as a negative control.
    UniformLength,
}

/// Cuts `Y_1 < Y_2 < ...`, glue points `Z_i <= Y_i`, and per-segment summaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutSequence {
    pub y: Vec<f64>,
    /// `z[i]` is the glue point drawn at cut `y[i]`; segment `i + 2` hangs from it.
    pub z: Vec<f64>,
    /// `Y_n - Y_{n-1}`.
    pub seg_len: Vec<f64>,
    /// `mu(Y_{n-1}, Y_n]`, empty when the measure is unknown.
    pub seg_mass: Vec<f64>,
    /// `mu[0, Y_n]`, empty when the measure is unknown.
    pub cum_mass: Vec<f64>,
    pub provenance: Provenance,
    pub seed: Option<u64>,
    pub stream: Option<u64>,
    /// Horizon of a horizon-stopped sample.
    pub horizon: Option<f64>,
}

impl CutSequence {
    /// Builds and validates a cut sequence from raw cuts and glue points. `z` has
    /// either as many entries as `y` or one fewer.
    pub fn from_parts(y: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        validate_cuts(&y, &z)?;
        let seg_len = lengths(&y);
        Ok(CutSequence {
            y,
            z,
            seg_len,
            seg_mass: Vec::new(),
            cum_mass: Vec::new(),
            provenance: Provenance::Manual,
            seed: None,
            stream: None,
            horizon: None,
        })
    }

    /// Fills segment masses from `mu`.
    pub fn with_measure(mut self, mu: &MuRealization) -> Result<Self> {
        let mut prev = 0.0;
        self.cum_mass.clear();
        self.seg_mass.clear();
        for &y in &self.y {
            let m = mu.mass(y)?;
            self.cum_mass.push(m);
            self.seg_mass.push(m - prev);
            prev = m;
        }
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }
    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
    pub fn total_length(&self) -> f64 {
        self.y.last().copied().unwrap_or(0.0)
    }

    /// Number of cuts `<= l`.
    pub fn cuts_upto(&self, l: f64) -> usize {
        self.y.partition_point(|&y| y <= l)
    }
}

fn lengths(y: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    y.iter()
        .map(|&v| {
            let d = v - prev;
            prev = v;
            d
        })
        .collect()
}

pub(crate) fn validate_cuts(y: &[f64], z: &[f64]) -> Result<()> {
    if z.len() != y.len() && z.len() + 1 != y.len() && !(y.is_empty() && z.is_empty()) {
        return Err(IcrtError::InvalidCuts {
            index: z.len(),
            reason: format!("{} glue points for {} cuts", z.len(), y.len()),
        });
    }
    let mut prev = 0.0;
    for (i, &v) in y.iter().enumerate() {
        if !(v.is_finite() && v > prev) {
            return Err(IcrtError::InvalidCuts { index: i, reason: format!("cut {v} not above {prev}") });
        }
        prev = v;
    }
    for (i, &g) in z.iter().enumerate() {
        if !(g.is_finite() && g >= 0.0 && g <= y[i]) {
            return Err(IcrtError::InvalidCuts {
                index: i,
                reason: format!("glue point {g} outside [0, {}]", y[i]),
            });
        }
    }
    Ok(())
}

/// Measure-driven sampler: cuts form a Poisson process of rate `mu[0,l] dl`,
/// glue points follow `mu` restricted to `[0, Y_i]`.
pub fn sample_cuts_new<R: Rng + ?Sized>(
    mu: &MuRealization,
    stop: StopRule,
    rng: &mut R,
) -> Result<CutSequence> {
    sample_cuts_new_with(mu, stop, GlueRule::MuWeighted, rng)
}

pub fn sample_cuts_new_with<R: Rng + ?Sized>(
    mu: &MuRealization,
    stop: StopRule,
    glue: GlueRule,
    rng: &mut R,
) -> Result<CutSequence> {
    if mu.is_empty() {
        return Err(IcrtError::EmptyMeasure);
    }
    if let (Some(h), Some(limit)) = (mu.horizon(), stop.horizon()) {
        if limit > h {
            return Err(IcrtError::BeyondHorizon { requested: limit, horizon: h });
        }
    }
    let drift = mu.drift();
    let positions = mu.positions();
    let weights = mu.weights();
    let end = mu.horizon().unwrap_or(f64::INFINITY);

    let mut y = Vec::new();
    let mut z = Vec::new();
    let mut cum = Vec::new();
    let mut pos = 0.0;
    // atoms with index < k sit at or below pos; `atom_mass` is their total
    let mut k = 0usize;
    let mut atom_mass = 0.0;
    loop {
        // invert the integrated rate from the current position
        let mut remaining: f64 = rng.sample(Exp1);
        let next_cut = loop {
            let edge = if k < positions.len() { positions[k] } else { end };
            let base = drift * pos + atom_mass;
            if edge.is_finite() {
                let d = edge - pos;
                let piece = base * d + 0.5 * drift * d * d;
                if remaining > piece {
                    remaining -= piece;
                    pos = edge;
                    if k < positions.len() {
                        atom_mass += weights[k];
                        k += 1;
                        continue;
                    }
                    break None;
                }
            }
            let d = if drift > 0.0 {
                2.0 * remaining / (base + (base * base + 2.0 * drift * remaining).sqrt())
            } else {
                remaining / base
            };
            pos += d;
            break Some(pos);
        };
        let cut = match next_cut {
            Some(c) if stop.keeps(y.len(), c) => c,
            Some(_) => break,
            None => {
                // ran past the sampled part of the measure
                match stop {
                    StopRule::Horizon(_) => break,
                    StopRule::Both { cuts, .. } if y.len() >= cuts => break,
                    _ => return Err(IcrtError::BeyondHorizon { requested: pos, horizon: end }),
                }
            }
        };
        let total = drift * cut + atom_mass;
        let g = match glue {
            GlueRule::UniformLength => rng.random::<f64>() * cut,
            GlueRule::MuWeighted => {
                let u = rng.random::<f64>() * total;
                let drift_part = drift * cut;
                if u < drift_part {
                    u / drift
                } else {
                    let target = u - drift_part;
                    positions[mu.atom_by_cumulative(target, k)]
                }
            }
        };
        y.push(cut);
        z.push(g);
        cum.push(total);
    }
    let seg_len = lengths(&y);
    let mut prev = 0.0;
    let seg_mass = cum
        .iter()
        .map(|&m| {
            let d = m - prev;
            prev = m;
            d
        })
        .collect();
    Ok(CutSequence {
        y,
        z,
        seg_len,
        seg_mass,
        cum_mass: cum,
        provenance: Provenance::New,
        seed: None,
        stream: None,
        horizon: stop.horizon(),
    })
}

#[derive(PartialEq)]
struct Event {
    time: f64,
    source: usize,
}
impl Eq for Event {}
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on time, ties broken by source
        other.time.total_cmp(&self.time).then(other.source.cmp(&self.source))
    }
}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Classical sampler: a Poisson process of intensity `theta0^2` on the triangle
/// `{b <= a}` merged with one rate-`theta_i` process per atom. A triangle point
/// `(A, B)` cuts at `A` and glues at `B`; the `j`-th point of atom `i`'s process
/// (`j >= 1`) cuts there and glues at that process's first point.
pub fn sample_cuts_classical<R: Rng + ?Sized>(
    theta: &ThetaRealization,
    stop: StopRule,
    rng: &mut R,
) -> Result<CutSequence> {
    sample_classical_with_measure(theta, stop, rng).map(|(seq, _)| seq)
}

/// [`sample_cuts_classical`] together with the measure it implies, in which
/// atom `i` sits at the first point of its process.
pub fn sample_classical_with_measure<R: Rng + ?Sized>(
    theta: &ThetaRealization,
    stop: StopRule,
    rng: &mut R,
) -> Result<(CutSequence, MuRealization)> {
    let drift = theta.drift();
    if drift == 0.0 && theta.atoms.is_empty() {
        return Err(IcrtError::EmptyMeasure);
    }
    // first point of each atom process; beyond the horizon it never glues
    let firsts: Vec<(usize, f64)> = match stop.horizon() {
        Some(h) if !matches!(stop, StopRule::Both { .. }) => first_points_within(&theta.atoms, h, rng),
        _ => theta
            .atoms
            .iter()
            .enumerate()
            .map(|(i, &w)| (i, rng.sample::<f64, _>(Exp1) / w))
            .collect(),
    };
    let triangle = firsts.len();
    let mut heap = BinaryHeap::with_capacity(firsts.len() + 1);
    for (slot, &(i, x)) in firsts.iter().enumerate() {
        let gap: f64 = rng.sample(Exp1);
        heap.push(Event { time: x + gap / theta.atoms[i], source: slot });
    }
    let mut tri_level = 0.0; // integrated intensity theta0^2 a^2 / 2 so far
    if drift > 0.0 {
        tri_level += rng.sample::<f64, _>(Exp1);
        heap.push(Event { time: (2.0 * tri_level / drift).sqrt(), source: triangle });
    }
    let mut y = Vec::new();
    let mut z = Vec::new();
    while let Some(ev) = heap.pop() {
        if !stop.keeps(y.len(), ev.time) {
            break;
        }
        let glue = if ev.source == triangle {
            let b = rng.random::<f64>() * ev.time;
            tri_level += rng.sample::<f64, _>(Exp1);
            heap.push(Event { time: (2.0 * tri_level / drift).sqrt(), source: triangle });
            b
        } else {
            let (i, first) = firsts[ev.source];
            let gap: f64 = rng.sample(Exp1);
            heap.push(Event { time: ev.time + gap / theta.atoms[i], source: ev.source });
            first
        };
        y.push(ev.time);
        z.push(glue);
    }
    let horizon = stop.horizon();
    // the measure implied by the atom processes: atom i sits at its first point
    let atoms = firsts.iter().map(|&(i, x)| (x, theta.atoms[i])).collect();
    let implied = MuRealization::new(drift, atoms, horizon.filter(|_| !matches!(stop, StopRule::Both { .. })))?;
    let mut seq = CutSequence::from_parts(y, z)?.with_measure(&implied)?;
    seq.provenance = Provenance::Classical;
    seq.horizon = horizon;
    Ok((seq, implied))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    #[test]
    fn rejects_bad_cuts() {
        assert!(CutSequence::from_parts(vec![1.0, 1.0], vec![0.5]).is_err());
        assert!(CutSequence::from_parts(vec![1.0, 2.0], vec![1.5]).is_err());
        let e = CutSequence::from_parts(vec![1.0, 2.0, 3.0], vec![0.5, 2.5]).unwrap_err();
        assert!(matches!(e, IcrtError::InvalidCuts { index: 1, .. }));
        assert!(CutSequence::from_parts(vec![], vec![]).is_ok());
    }

    #[test]
    fn stop_rules() {
        let mu = MuRealization::lebesgue();
        let mut rng = SeedStream::new(3).stream(0);
        let s = sample_cuts_new(&mu, StopRule::Cuts(100), &mut rng).unwrap();
        assert_eq!(s.len(), 100);
        let s = sample_cuts_new(&mu, StopRule::Horizon(10.0), &mut rng).unwrap();
        assert!(s.y.iter().all(|&v| v <= 10.0));
        let s = sample_cuts_new(&mu, StopRule::Horizon(1e-9), &mut rng).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn invariants_on_samples() {
        let mu = MuRealization::new(0.5, vec![(0.7, 0.5), (2.0, 0.5), (0.1, 0.1)], None).unwrap();
        let mut rng = SeedStream::new(4).stream(1);
        let s = sample_cuts_new(&mu, StopRule::Cuts(500), &mut rng).unwrap();
        validate_cuts(&s.y, &s.z).unwrap();
        assert!((s.seg_len.iter().sum::<f64>() - s.total_length()).abs() < 1e-9);
        assert!(s.cum_mass.windows(2).all(|w| w[0] <= w[1]));
        for (i, &m) in s.cum_mass.iter().enumerate() {
            assert!((m - mu.mass(s.y[i]).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn single_atom_without_drift() {
        let theta = ThetaRealization::from_weights(0.0, vec![1.0]);
        let mut rng = SeedStream::new(5).stream(0);
        let s = sample_cuts_classical(&theta, StopRule::Cuts(20), &mut rng).unwrap();
        let first = s.z[0];
        assert!(s.z.iter().all(|&g| g == first));
        assert!(s.y[0] > first);
        // the new sampler cannot cut before the atom either
        let mu = MuRealization::new(0.0, vec![(2.0, 1.0)], None).unwrap();
        let s = sample_cuts_new(&mu, StopRule::Cuts(20), &mut rng).unwrap();
        assert!(s.y[0] > 2.0 && s.z.iter().all(|&g| g == 2.0));
    }

    #[test]
    fn empty_measure_is_refused() {
        let mu = MuRealization::new(0.0, vec![], None).unwrap();
        let mut rng = SeedStream::new(1).stream(0);
        assert!(matches!(
            sample_cuts_new(&mu, StopRule::Cuts(1), &mut rng),
            Err(IcrtError::EmptyMeasure)
        ));
    }

    #[test]
    fn deterministic_given_stream() {
        let mu = MuRealization::lebesgue();
        let a = sample_cuts_new(&mu, StopRule::Cuts(50), &mut SeedStream::new(42).stream(7)).unwrap();
        let b = sample_cuts_new(&mu, StopRule::Cuts(50), &mut SeedStream::new(42).stream(7)).unwrap();
        assert_eq!(a, b);
    }
}
