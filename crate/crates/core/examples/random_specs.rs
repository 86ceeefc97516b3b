//! Randomly generated domain graphs, validated and solved.

use bgd_harmonics::bgd::{domain_trace_fixed_point, flux_transfer_matrices, fuzz, validate_bgd};

fn main() {
    for seed in 0..9 {
        let spec = fuzz::seeded_spec(seed).unwrap();
        assert!(validate_bgd(&spec).passed());
        let traces = domain_trace_fixed_point(&spec, 1e-10, 10_000).unwrap();
        let flux = flux_transfer_matrices(&spec, &traces.traces).unwrap();
        let worst = (0..spec.domain_count())
            .flat_map(|i| spec.domains[i].in_v0.iter().map(move |&k| (i, k)))
            .map(|(i, k)| (flux.row_sum(&spec, i, k) - 1.0).abs())
            .fold(0.0, f64::max);
        println!(
            "seed {seed}: N = {}, {} domains, {} edges, {} iterations, row sum error {worst:.1e}",
            spec.hs.alphabet_size(),
            spec.domain_count(),
            spec.edges.len(),
            traces.iterations
        );
    }
}
