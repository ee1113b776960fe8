//! Builds each standard family, validates its truncation and tabulates the
//! expected measure of `[0, l]` together with `psi`.
//!
//! ```text
//! cargo run --release --example theta_families -- [atoms]
//! ```

use icrt::measure::{expected_mass, expected_mass_truncated, psi};
use icrt::params::{make_theta, validate, ThetaFamily};

fn main() -> icrt::Result<()> {
    let k: usize = std::env::args().nth(1).map_or(1000, |s| s.parse().expect("atom count"));
    let families = [
        ThetaFamily::Brownian,
        ThetaFamily::power_law(0.75),
        ThetaFamily::power_law(2.0 / 3.0),
        ThetaFamily::Harmonic,
        ThetaFamily::explicit(0.5, vec![0.6, 0.5, 0.3, 0.2, 0.1]),
    ];
    for family in &families {
        let theta = make_theta(family, k)?;
        let report = validate(&theta, family);
        println!(
            "{:<9} theta0 {:.4}  atoms {:>5}  theta1 {:.4}  residual square mass {:.3e}  simulable {}",
            family.name(),
            theta.theta0,
            theta.k(),
            theta.atoms.first().copied().unwrap_or(0.0),
            theta.residual_square_mass,
            report.simulable(false)
        );
        for note in &report.notes {
            println!("          note: {note}");
        }
        println!("          {:>10} {:>14} {:>14} {:>14}", "l", "E mu[0,l]", "truncated", "psi(l)");
        for j in [-2, 0, 2, 4, 8, 12] {
            let l = f64::from(j).exp2();
            println!(
                "          {:>10.4} {:>14.6} {:>14.6} {:>14.6}",
                l,
                expected_mass(family, l),
                expected_mass_truncated(&theta, l),
                psi(family, l)
            );
        }
    }
    Ok(())
}
