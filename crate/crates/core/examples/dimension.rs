//! Analytic dimensions of the standard families, then box-counting and local
//! dimension estimates on one simulated Brownian tree.
//!
//! ```text
//! cargo run --release --example dimension -- [cuts] [seed]
//! ```

use icrt::dimension::{auto_eps_grid, local_dimension, minkowski_regression, theoretical_dimensions};
use icrt::measure::MuRealization;
use icrt::params::ThetaFamily;
use icrt::rng::SeedStream;
use icrt::rtree::IcrtTree;
use icrt::stickbreak::{sample_cuts_new, StopRule};

fn main() -> icrt::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cuts: usize = args.first().map_or(100_000, |s| s.parse().expect("cut count"));
    let seed: u64 = args.get(1).map_or(1, |s| s.parse().expect("seed"));

    for family in [ThetaFamily::Brownian, ThetaFamily::power_law(2.0 / 3.0), ThetaFamily::Harmonic] {
        let d = theoretical_dimensions(&family, 40)?;
        println!(
            "{:>9}: upper {:?} lower {:?} unbounded {} hausdorff formula applies {} closed form {:?}",
            d.family, d.upper, d.lower, d.unbounded, d.hausdorff_applicable, d.closed_form
        );
    }

    let seeds = SeedStream::new(seed);
    let mu = MuRealization::lebesgue();
    let sample = sample_cuts_new(&mu, StopRule::Cuts(cuts), &mut seeds.stream(0))?;
    let tree = IcrtTree::build(&sample)?;
    let l = tree.total_length();
    let diameter = tree.skeleton(l)?.diameter();
    println!("\nBrownian tree: {cuts} segments, length {l:.3}, diameter {diameter:.4}");

    let fit = minkowski_regression(&tree, l, &auto_eps_grid(diameter, 8))?;
    println!("box counting slope {:.3}, band [{:.3}, {:.3}]", fit.slope, fit.band.0, fit.band.1);
    for (e, n) in fit.eps.iter().zip(&fit.counts) {
        println!("  eps {e:.5}  balls {n}");
    }

    let eps = auto_eps_grid(diameter, 6);
    let local = local_dimension(&tree, &mu, l, 200, &eps, &mut seeds.stream(1))?;
    println!(
        "local dimension median {:.3}, quartiles [{:.3}, {:.3}], skipped {}",
        local.median, local.quartiles.0, local.quartiles.1, local.skipped
    );
    Ok(())
}
