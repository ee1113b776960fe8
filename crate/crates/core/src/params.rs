//! Parameter families and their truncated realizations.

use serde::{Deserialize, Serialize};

use crate::error::{IcrtError, Result};
use crate::numerics::{power_tail, zeta};

/// Tolerance on the square-mass identity for explicit weight lists.
pub const EXPLICIT_NORM_TOL: f64 = 1e-12;
/// Tolerance on the square-mass identity of a truncated realization.
pub const REALIZATION_NORM_TOL: f64 = 1e-9;

/// A parameter point: drift weight `theta0` and non-increasing atom weights with
/// `theta0^2 + sum theta_i^2 = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ThetaFamily {
    /// Pure drift, `theta0 = 1`.
    Brownian,
    /// `theta_i = c i^{-alpha}` with `alpha` in (1/2, 1).
    #[serde(rename = "powerlaw")]
    PowerLaw { alpha: f64 },
    /// `theta_i = c / i`.
    Harmonic,
    /// A finite user-supplied list. `truncated` marks a list cut from a longer
    /// sequence, in which case a finite linear sum says nothing about the
    /// untruncated one.
    Explicit {
        theta0: f64,
        atoms: Vec<f64>,
        #[serde(default)]
        truncated: bool,
    },
}

impl ThetaFamily {
    pub fn power_law(alpha: f64) -> Self {
        ThetaFamily::PowerLaw { alpha }
    }

    pub fn explicit(theta0: f64, atoms: Vec<f64>) -> Self {
        ThetaFamily::Explicit { theta0, atoms, truncated: false }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ThetaFamily::Brownian => "brownian",
            ThetaFamily::PowerLaw { .. } => "powerlaw",
            ThetaFamily::Harmonic => "harmonic",
            ThetaFamily::Explicit { .. } => "explicit",
        }
    }

    pub fn theta0(&self) -> f64 {
        match self {
            ThetaFamily::Brownian => 1.0,
            ThetaFamily::PowerLaw { .. } | ThetaFamily::Harmonic => 0.0,
            ThetaFamily::Explicit { theta0, .. } => *theta0,
        }
    }

    /// Decay exponent of the symbolic power families (Harmonic is exponent 1).
    pub fn decay_exponent(&self) -> Option<f64> {
        match self {
            ThetaFamily::PowerLaw { alpha } => Some(*alpha),
            ThetaFamily::Harmonic => Some(1.0),
            _ => None,
        }
    }

    /// Normalization constant `c` of a power family.
    pub fn normalization(&self) -> Option<f64> {
        self.decay_exponent().map(|a| zeta(2.0 * a).powf(-0.5))
    }

    /// Checks the family's own parameters (exponent range, list order and norm).
    pub fn check(&self) -> Result<()> {
        match self {
            ThetaFamily::PowerLaw { alpha } => {
                if !(*alpha > 0.5 && *alpha < 1.0) {
                    return Err(IcrtError::InvalidParameter(format!(
                        "power-law exponent must lie in (1/2, 1), got {alpha}"
                    )));
                }
            }
            ThetaFamily::Explicit { theta0, atoms, .. } => {
                if !(theta0.is_finite() && *theta0 >= 0.0) {
                    return Err(IcrtError::InvalidParameter(format!("theta0 = {theta0}")));
                }
                for (i, w) in atoms.iter().enumerate() {
                    if !(w.is_finite() && *w > 0.0) {
                        return Err(IcrtError::InvalidParameter(format!(
                            "atom weight {i} must be positive, got {w}"
                        )));
                    }
                    if i > 0 && atoms[i - 1] < *w {
                        return Err(IcrtError::UnsortedWeights { index: i });
                    }
                }
                let ss = theta0 * theta0 + atoms.iter().map(|w| w * w).sum::<f64>();
                if (ss - 1.0).abs() > EXPLICIT_NORM_TOL {
                    return Err(IcrtError::NotNormalized { sum_squares: ss });
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Whether `sum_{i > K} theta_i` is finite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearTail {
    Finite,
    Divergent,
    Unknown,
}

/// The first `K` atom weights of a family plus tail diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaRealization {
    pub theta0: f64,
    pub atoms: Vec<f64>,
    /// `sum_{i > K} theta_i^2`.
    pub residual_square_mass: f64,
    pub residual_linear: LinearTail,
}

impl ThetaRealization {
    pub fn k(&self) -> usize {
        self.atoms.len()
    }

    pub fn drift(&self) -> f64 {
        self.theta0 * self.theta0
    }

    pub fn square_mass(&self) -> f64 {
        self.drift() + self.atoms.iter().map(|w| w * w).sum::<f64>() + self.residual_square_mass
    }

    /// A realization built directly from weights, with no tail.
    pub fn from_weights(theta0: f64, atoms: Vec<f64>) -> Self {
        ThetaRealization {
            theta0,
            atoms,
            residual_square_mass: 0.0,
            residual_linear: LinearTail::Finite,
        }
    }
}

/// Truncates `family` to its first `k` atoms.
pub fn make_theta(family: &ThetaFamily, k: usize) -> Result<ThetaRealization> {
    family.check()?;
    Ok(match family {
        ThetaFamily::Brownian => ThetaRealization::from_weights(1.0, Vec::new()),
        ThetaFamily::PowerLaw { .. } | ThetaFamily::Harmonic => {
            let alpha = family.decay_exponent().unwrap();
            let c = family.normalization().unwrap();
            let atoms: Vec<f64> = (1..=k).map(|i| c * (i as f64).powf(-alpha)).collect();
            let residual = c * c * power_tail(2.0 * alpha, k as u64 + 1);
            ThetaRealization {
                theta0: 0.0,
                atoms,
                residual_square_mass: residual,
                residual_linear: LinearTail::Divergent,
            }
        }
        ThetaFamily::Explicit { theta0, atoms, truncated } => {
            let kept = k.min(atoms.len());
            let residual = atoms[kept..].iter().map(|w| w * w).sum();
            ThetaRealization {
                theta0: *theta0,
                atoms: atoms[..kept].to_vec(),
                residual_square_mass: residual,
                residual_linear: if *truncated { LinearTail::Unknown } else { LinearTail::Finite },
            }
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckState {
    Pass,
    Fail,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub normalization: CheckState,
    pub monotone: CheckState,
    pub positive: CheckState,
    /// `theta0 != 0` or infinitely many atoms with divergent linear sum.
    pub nondegenerate: CheckState,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        [self.normalization, self.monotone, self.positive, self.nondegenerate]
            .iter()
            .all(|s| *s == CheckState::Pass)
    }

    /// Simulation proceeds on a full pass, or on "unknown" degeneracy when forced.
    pub fn simulable(&self, force: bool) -> bool {
        let hard = [self.normalization, self.monotone, self.positive]
            .iter()
            .all(|s| *s == CheckState::Pass);
        hard && match self.nondegenerate {
            CheckState::Pass => true,
            CheckState::Unknown => force,
            CheckState::Fail => false,
        }
    }
}

pub fn validate(theta: &ThetaRealization, family: &ThetaFamily) -> ValidationReport {
    let mut notes = Vec::new();
    let ss = theta.square_mass();
    let normalization = if (ss - 1.0).abs() <= REALIZATION_NORM_TOL {
        CheckState::Pass
    } else {
        notes.push(format!("square mass {ss} differs from 1"));
        CheckState::Fail
    };
    let monotone = if theta.atoms.windows(2).all(|w| w[0] >= w[1]) {
        CheckState::Pass
    } else {
        notes.push("atom weights are not non-increasing".into());
        CheckState::Fail
    };
    let positive = if theta.atoms.iter().all(|w| *w > 0.0) && theta.theta0 >= 0.0 {
        CheckState::Pass
    } else {
        notes.push("weights must be positive".into());
        CheckState::Fail
    };
    let nondegenerate = match family {
        ThetaFamily::Brownian => CheckState::Pass,
        ThetaFamily::PowerLaw { .. } | ThetaFamily::Harmonic => {
            notes.push("atom sum diverges (exponent <= 1)".into());
            CheckState::Pass
        }
        ThetaFamily::Explicit { theta0, truncated, .. } => {
            if *theta0 > 0.0 {
                CheckState::Pass
            } else if *truncated {
                notes.push("theta0 = 0 and the list is truncated: divergence undecidable".into());
                CheckState::Unknown
            } else {
                notes.push("theta0 = 0 and finitely many atoms".into());
                CheckState::Fail
            }
        }
    };
    ValidationReport { normalization, monotone, positive, nondegenerate, notes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_has_no_atoms() {
        let t = make_theta(&ThetaFamily::Brownian, 0).unwrap();
        assert_eq!(t.theta0, 1.0);
        assert!(t.atoms.is_empty());
        assert_eq!(t.residual_square_mass, 0.0);
        assert!(validate(&t, &ThetaFamily::Brownian).all_pass());
    }

    #[test]
    fn harmonic_three_atoms() {
        let t = make_theta(&ThetaFamily::Harmonic, 3).unwrap();
        let c = 6f64.sqrt() / std::f64::consts::PI;
        assert!((c - 0.779697).abs() < 1e-6);
        for (i, w) in t.atoms.iter().enumerate() {
            assert!((w - c / (i + 1) as f64).abs() < 1e-15);
        }
        let expected = 1.0 - c * c * (1.0 + 0.25 + 1.0 / 9.0);
        assert!((t.residual_square_mass - expected).abs() < 1e-12);
        let report = validate(&t, &ThetaFamily::Harmonic);
        assert!(report.all_pass());
    }

    #[test]
    fn explicit_half_half() {
        let h = 0.5f64.sqrt();
        let fam = ThetaFamily::explicit(h, vec![h]);
        let t = make_theta(&fam, 1).unwrap();
        assert_eq!(t.atoms, vec![h]);
        assert_eq!(t.residual_square_mass, 0.0);
        assert!(validate(&t, &fam).all_pass());
    }

    #[test]
    fn single_atom_without_drift_is_degenerate() {
        let fam = ThetaFamily::explicit(0.0, vec![1.0]);
        let t = make_theta(&fam, 1).unwrap();
        let r = validate(&t, &fam);
        assert_eq!(r.nondegenerate, CheckState::Fail);
        assert!(!r.simulable(true));
        let fam = ThetaFamily::Explicit { theta0: 0.0, atoms: vec![1.0], truncated: true };
        let r = validate(&make_theta(&fam, 1).unwrap(), &fam);
        assert_eq!(r.nondegenerate, CheckState::Unknown);
        assert!(!r.simulable(false) && r.simulable(true));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(make_theta(&ThetaFamily::power_law(0.5), 3).is_err());
        assert!(make_theta(&ThetaFamily::power_law(1.0), 3).is_err());
        assert!(matches!(
            make_theta(&ThetaFamily::explicit(0.0, vec![0.6, 0.8]), 2),
            Err(IcrtError::UnsortedWeights { index: 1 })
        ));
        assert!(matches!(
            make_theta(&ThetaFamily::explicit(0.5, vec![0.5]), 1),
            Err(IcrtError::NotNormalized { .. })
        ));
    }

    #[test]
    fn power_law_constant_against_direct_sum() {
        // brute force: 1e6 terms plus integral and midpoint correction
        let alpha = 2.0 / 3.0;
        let s = 2.0 * alpha;
        let n = 1_000_000u64;
        let mut z = 0.0;
        for i in (1..n).rev() {
            z += (i as f64).powf(-s);
        }
        let nf = n as f64;
        z += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s) + s * nf.powf(-s - 1.0) / 12.0;
        let c = ThetaFamily::power_law(alpha).normalization().unwrap();
        assert!((c - z.powf(-0.5)).abs() < 1e-12);
    }

    #[test]
    fn serde_round_trip() {
        for fam in [
            ThetaFamily::Brownian,
            ThetaFamily::Harmonic,
            ThetaFamily::power_law(0.7),
            ThetaFamily::explicit(0.6, vec![0.8]),
        ] {
            let s = serde_json::to_string(&fam).unwrap();
            assert_eq!(serde_json::from_str::<ThetaFamily>(&s).unwrap(), fam);
        }
    }
}
