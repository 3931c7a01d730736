//! Temporary calibration scout for the acceptance operating points.

use std::time::Instant;

use relcor::tableio::default_table;
use relcor_core::inference::{confidence_interval, Direction};
use relcor_core::simlab::{
    derive_seed, estimate_population_dcor, rejection_rate, SampleGenerator, VarConfig,
};

fn main() {
    let table = default_table();

    let defaults = VarConfig::default(); // rho = 0.5
    let t0 = Instant::now();
    let pop = estimate_population_dcor(&defaults, 100, 1000, derive_seed(2024, u64::MAX)).unwrap();
    println!("VAR defaults pop dcor: {:.4} se {:.4} ({:?})", pop.mean, pop.se, t0.elapsed());

    let t0 = Instant::now();
    for (tag, delta) in [
        ("boundary", pop.mean),
        ("interior", pop.mean + 0.15),
        ("alternative", (pop.mean - 0.15).max(0.05)),
    ] {
        let r = rejection_rate(
            &defaults,
            Direction::Relevant,
            delta,
            0.05,
            400,
            300,
            table,
            77,
        )
        .unwrap();
        println!("relevant {tag} delta={delta:.3}: rate {:.4} se {:.4}", r.rate, r.se);
    }
    println!("  3x300 reps n=400 took {:?}", t0.elapsed());

    // independence-like generator: default A, rho = 0
    let indep_like = VarConfig {
        rho: 0.0,
        ..VarConfig::default()
    };
    let pop0 = estimate_population_dcor(&indep_like, 100, 1000, derive_seed(2025, u64::MAX)).unwrap();
    println!("VAR rho=0 pop dcor: {:.4} se {:.4}", pop0.mean, pop0.se);
    for (tag, delta) in [("mirror-alt", 0.4), ("mirror-boundary", pop0.mean)] {
        let r = rejection_rate(
            &indep_like,
            Direction::Equivalence,
            delta,
            0.05,
            400,
            300,
            table,
            78,
        )
        .unwrap();
        println!("equivalence {tag} delta={delta:.3}: rate {:.4} se {:.4}", r.rate, r.se);
    }

    // CI coverage at the oracle population value
    let t0 = Instant::now();
    let mut covered = 0;
    let reps = 200;
    for rep in 0..reps {
        let sample = defaults.generate(400, derive_seed(500, rep)).unwrap();
        let ci = confidence_interval(&sample, 0.05, table).unwrap();
        if ci.contains(pop.mean) {
            covered += 1;
        }
    }
    println!(
        "CI coverage: {}/{} = {:.3} ({:?})",
        covered,
        reps,
        covered as f64 / reps as f64,
        t0.elapsed()
    );
}
