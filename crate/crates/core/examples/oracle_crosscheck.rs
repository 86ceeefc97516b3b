//! Direct depth-n solves and random walks against the harmonic measure.

use bgd_harmonics::bgd::{domain_trace_fixed_point, flux_transfer_matrices, word_key};
use bgd_harmonics::measure::{measure_vector, MeasureContext};
use bgd_harmonics::oracle::{
    build_approx_network, convergence_csv, direct_hitting, random_walk_hitting, richardson_report, ApproxMode,
    WalkConfig,
};
use bgd_harmonics::registry;

fn main() {
    let spec = registry::hexagasket_half();
    let traces = domain_trace_fixed_point(&spec, 1e-12, 10_000).unwrap();
    let flux = flux_transfer_matrices(&spec, &traces.traces).unwrap();
    let (i, k, m) = (0, 4, 2);
    let rows = richardson_report(&spec, &flux, i, k, m, &[2, 4, 6, 8]).unwrap();
    print!("{}", convergence_csv(&rows));

    let exact = measure_vector(&MeasureContext::new(&spec, &flux, i, k).unwrap(), m).unwrap();
    let approx = build_approx_network(&spec, i, 6, m, ApproxMode::Cut).unwrap();
    let direct = direct_hitting(&approx, k).unwrap();
    let walks = random_walk_hitting(&approx, WalkConfig { seed: 7, walkers: 100_000 }, k).unwrap();
    println!("\nword,measure,direct,walk,stderr");
    for (((w, mu), d), e) in exact.entries.iter().zip(&direct).zip(&walks) {
        println!("{},{mu:.8},{d:.8},{:.5},{:.5}", word_key(w), e.estimate, e.stderr);
    }
}
