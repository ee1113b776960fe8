//! Samples cuts with the measure-driven sampler and with the classical
//! Poisson construction, then compares simple statistics of both.
//!
//! ```text
//! cargo run --release --example stick_breaking -- [reps] [seed]
//! ```

use icrt::measure::sample_mu;
use icrt::params::{make_theta, ThetaFamily};
use icrt::rng::SeedStream;
use icrt::stats::{ks_p_value, ks_two_sample, mean};
use icrt::stickbreak::{sample_cuts_classical, sample_cuts_new, StopRule};

fn main() -> icrt::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let reps: u64 = args.first().map_or(2000, |s| s.parse().expect("replications"));
    let seeds = SeedStream::new(args.get(1).map_or(7, |s| s.parse().expect("seed")));
    let family = ThetaFamily::explicit(0.6, vec![0.64, 0.48]);
    let theta = make_theta(&family, 2)?;
    let stop = StopRule::Cuts(3);

    let one = sample_cuts_new(&sample_mu(&theta, &mut seeds.stream(0)), StopRule::Cuts(8), &mut seeds.stream(1))?;
    println!("one sample, {} cuts:", one.len());
    for i in 0..one.len() {
        let z = one.z.get(i).map_or("-".to_string(), |z| format!("{z:.4}"));
        println!("  Y {:>8.4}  Z {:>8}  mass to Y {:>8.4}", one.y[i], z, one.cum_mass[i]);
    }

    let (mut y1_new, mut y1_old, mut y3_new, mut y3_old) = (vec![], vec![], vec![], vec![]);
    for r in 0..reps {
        let mut rng = seeds.replication(r, 2);
        let mu = sample_mu(&theta, &mut rng);
        let a = sample_cuts_new(&mu, stop, &mut rng)?;
        let b = sample_cuts_classical(&theta, stop, &mut seeds.replication(r, 3))?;
        y1_new.push(a.y[0]);
        y1_old.push(b.y[0]);
        y3_new.push(a.y[2]);
        y3_old.push(b.y[2]);
    }
    for (name, x, y) in [("Y1", &y1_new, &y1_old), ("Y3", &y3_new, &y3_old)] {
        let d = ks_two_sample(x, y);
        println!(
            "{name}: mean new {:.4} classical {:.4}  KS {:.4}  p {:.3}",
            mean(x),
            mean(y),
            d,
            ks_p_value(d, reps as f64 / 2.0)
        );
    }
    Ok(())
}
