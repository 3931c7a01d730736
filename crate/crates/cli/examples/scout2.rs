//! Boundary-convergence check: at delta = population dcor the statistic
//! should converge in law to the pivotal ratio, so the rejection rate should
//! approach alpha = 5% and the statistic's upper quantiles should approach
//! the tabulated ones.

use relcor::tableio::default_table;
use relcor_core::inference::{relevant_test, Decision, Measure};
use relcor_core::sequential::{normalizer_dcor, prefix_processes};
use relcor_core::simlab::{derive_seed, estimate_population_dcor, SampleGenerator, VarConfig};

fn main() {
    let table = default_table();
    let config = VarConfig::default();

    // sharper population value: 300 x dcor_2000
    let pop = estimate_population_dcor(&config, 300, 2000, derive_seed(9, u64::MAX)).unwrap();
    println!("pop dcor (300 x n=2000): {:.4} se {:.4}", pop.mean, pop.se);

    for n in [200usize, 400, 1000, 2000] {
        let reps = 400;
        let mut rejections = 0;
        let mut stats = Vec::with_capacity(reps);
        let mut vsum = 0.0;
        for rep in 0..reps {
            let sample = config.generate(n, derive_seed(1000 + n as u64, rep as u64)).unwrap();
            let r = relevant_test(&sample, pop.mean, 0.05, table, Measure::Dcor).unwrap();
            if r.decision == Decision::Reject {
                rejections += 1;
            }
            stats.push(r.statistic);
            vsum += r.normalizer;
        }
        stats.sort_unstable_by(f64::total_cmp);
        let q95 = stats[(reps as f64 * 0.95) as usize];
        let q50 = stats[reps / 2];
        println!(
            "n={n:5}: boundary rate {:.4}, stat median {q50:.2}, stat q95 {q95:.2} (w95 = 9.90), mean V {:.5}",
            rejections as f64 / reps as f64,
            vsum / reps as f64
        );
    }

    // how the normalizer scales with n on one fixed long path
    let sample = config.generate(4000, 31).unwrap();
    let path = prefix_processes(&sample).unwrap();
    let v = normalizer_dcor(&path, table.gamma());
    println!("single path n=4000: sqrt(n) * V = {:.3}", (4000f64).sqrt() * v);
}
