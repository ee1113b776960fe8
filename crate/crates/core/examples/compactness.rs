//! Evaluates the dyadic compactness series for several families and prints
//! the verdict with the trailing term ratios.
//!
//! ```text
//! cargo run --release --example compactness -- [terms]
//! ```

use icrt::measure::{compactness_criterion, inverse_expected_mass};
use icrt::params::ThetaFamily;

fn main() -> icrt::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(30, |s| s.parse().expect("term count"));
    let families = [
        ThetaFamily::Brownian,
        ThetaFamily::power_law(0.9),
        ThetaFamily::power_law(2.0 / 3.0),
        ThetaFamily::power_law(0.55),
        ThetaFamily::Harmonic,
    ];
    for family in &families {
        let c = compactness_criterion(family, n)?;
        let ratios: Vec<String> = c.window_ratios.iter().map(|r| format!("{r:.3}")).collect();
        println!(
            "{:<9} alpha {:<6} verdict {:<12} partial sum {:>10.4}  ratios [{}]  sandwich {}",
            family.name(),
            family.decay_exponent().map_or("-".into(), |a| format!("{a:.3}")),
            format!("{:?}", c.verdict),
            c.partial_sum,
            ratios.join(", "),
            c.sandwich_holds
        );
        let scales: Vec<String> = [2.0f64, 16.0, 256.0]
            .iter()
            .map(|&m| inverse_expected_mass(family, m).map(|l| format!("X({m}) = {l:.4e}")))
            .collect::<icrt::Result<_>>()?;
        println!("          {}", scales.join("  "));
    }
    Ok(())
}
