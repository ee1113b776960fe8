//! Runs one or all lemma checks and prints a JSON line per check.
//!
//! ```text
//! cargo run --release --example verify_lemmas -- [lemma|all] [family] [reps] [alpha]
//! ```
//! `family` is `brownian`, `harmonic` or a power-law exponent such as `0.6667`.

use std::time::Instant;

use icrt::params::ThetaFamily;
use icrt::verify::{run_check, CheckSpec, LemmaId};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let which = args.first().map(String::as_str).unwrap_or("all");
    let family = match args.get(1).map(String::as_str) {
        None | Some("brownian") => ThetaFamily::Brownian,
        Some("harmonic") => ThetaFamily::Harmonic,
        Some(a) => ThetaFamily::power_law(a.parse().expect("power-law exponent")),
    };
    let reps: Option<usize> = args.get(2).map(|r| r.parse().expect("replication count"));
    let lemmas: Vec<LemmaId> = if which == "all" {
        LemmaId::ALL.to_vec()
    } else {
        vec![which.parse().expect("lemma id")]
    };
    for lemma in lemmas {
        let fam = match lemma {
            LemmaId::SegmentWeight | LemmaId::MassLln if which == "all" => ThetaFamily::Harmonic,
            _ => family.clone(),
        };
        let mut spec = CheckSpec::new(lemma, fam);
        if let Some(r) = reps {
            spec.reps = r;
        }
        if let Some(a) = args.get(3) {
            spec.alpha = a.parse().expect("alpha");
        }
        let start = Instant::now();
        match run_check(&spec) {
            Ok(r) => println!(
                "{} ({:.1}s): {}",
                lemma,
                start.elapsed().as_secs_f64(),
                serde_json::to_string(&r).unwrap()
            ),
            Err(e) => println!("{lemma}: error: {e}"),
        }
    }
}
