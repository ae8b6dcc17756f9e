use orbitkit::equidist::*;
use orbitkit::families::PolyFamily;
use std::time::Instant;
fn main() {
    for (fam, n, k) in [(PolyFamily::square_cascade_3(), 3, 10000i64), (PolyFamily::two_block_4(), 4, 10000)] {
        let cfg = ExperimentConfig {
            family: fam, k_list: vec![k], delta: 0.1, sample_count: 4000, seed: 7,
            observables: vec![Observable::PointCount { r: 0.8 }],
        };
        let t0 = Instant::now();
        let rep = push_sample(&cfg).unwrap();
        println!("n={n} k={k}: {:.0} us/sample (wall, 2 threads), mean={:.3}",
            t0.elapsed().as_micros() as f64 / 4000.0, rep.per_k[0].summaries[0].mean);
    }
}
