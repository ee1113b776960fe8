//! Minimal eps-ball covers and maximal packings of a simulated Brownian tree
//! across radii and truncation levels.
//!
//! ```text
//! cargo run --release --example ball_cover -- [cuts] [seed]
//! ```

use icrt::measure::MuRealization;
use icrt::rng::SeedStream;
use icrt::rtree::IcrtTree;
use icrt::stickbreak::{sample_cuts_new, StopRule};

fn main() -> icrt::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cuts: usize = args.first().map_or(20_000, |s| s.parse().expect("cut count"));
    let seed: u64 = args.get(1).map_or(3, |s| s.parse().expect("seed"));
    let sample = sample_cuts_new(&MuRealization::lebesgue(), StopRule::Cuts(cuts), &mut SeedStream::new(seed).stream(0))?;
    let tree = IcrtTree::build(&sample)?;
    let total = tree.total_length();
    println!("{cuts} cuts, total length {total:.2}");
    println!("{:>10} {:>8} {:>10} {:>10} {:>10}", "level", "eps", "diameter", "cover", "packing");
    for frac in [0.25, 0.5, 1.0] {
        let l = frac * total;
        let sk = tree.skeleton(l)?;
        let d = sk.diameter();
        for div in [4.0, 16.0, 64.0] {
            let eps = d / div;
            println!(
                "{:>10.2} {:>8.4} {:>10.4} {:>10} {:>10}",
                l,
                eps,
                d,
                sk.cover_count(eps)?,
                sk.packing_count(2.0 * eps)?
            );
        }
    }
    Ok(())
}
