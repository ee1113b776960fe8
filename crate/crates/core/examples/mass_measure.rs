//! Integrates test functions against the three empirical measures at growing
//! levels, then follows the urn formed by the mass of a hanging subtree.
//!
//! ```text
//! cargo run --release --example mass_measure -- [atoms] [seed]
//! ```

use icrt::massmeasure::{convergence_diagnostic, urn_track, MeasureKind, Subtree, TestFunction};
use icrt::measure::sample_mu;
use icrt::params::{make_theta, ThetaFamily};
use icrt::rng::SeedStream;
use icrt::rtree::IcrtTree;
use icrt::stickbreak::{sample_cuts_new, StopRule};

fn main() -> icrt::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let k: usize = args.first().map_or(100_000, |s| s.parse().expect("atom count"));
    let seeds = SeedStream::new(args.get(1).map_or(11, |s| s.parse().expect("seed")));
    let family = ThetaFamily::power_law(0.8);
    let theta = make_theta(&family, k)?;
    let mu = sample_mu(&theta, &mut seeds.stream(0));
    let cuts = sample_cuts_new(&mu, StopRule::Horizon(160.0), &mut seeds.stream(1))?;
    let tree = IcrtTree::build(&cuts)?;
    let levels = [20.0, 40.0, 80.0, tree.total_length()];
    println!("power law 0.8, {} atoms, {} cuts up to 160", theta.k(), cuts.len());

    let functions = [TestFunction::Constant, TestFunction::DepthCapped, TestFunction::Tent { anchor: 1.0 }];
    let table = convergence_diagnostic(&tree, &mu, &levels, &functions)?;
    for kind in MeasureKind::ALL {
        for f in &functions {
            let values: Vec<String> = levels
                .iter()
                .map(|&l| format!("{:.4}", table.value(l, kind, &f.id()).unwrap_or(f64::NAN)))
                .collect();
            println!("{:<18} {:<9} {}", kind.name(), f.id(), values.join("  "));
        }
    }
    let heaviest: Vec<String> = table.max_point_mass.iter().map(|m| format!("{m:.4}")).collect();
    println!("largest atom share of mu[0,l]: {}", heaviest.join("  "));

    let urn = urn_track(&cuts, &mu, 5, Subtree::Hanging(2))?;
    let r = urn.ratios();
    println!(
        "subtree above segment 2 from cut 5: share {:.4} -> {:.4} over {} cuts, max drift {:.4}",
        r[0],
        r[r.len() - 1],
        r.len() - 1,
        urn.max_deviation()
    );
    Ok(())
}
