//! Flux transfer matrices of every registered example, with row sums.

use bgd_harmonics::bgd::{domain_trace_fixed_point, flux_transfer_matrices};
use bgd_harmonics::registry;

fn main() {
    for ex in registry::EXAMPLES {
        let spec = ex.spec();
        let traces = domain_trace_fixed_point(&spec, 1e-12, 10_000).unwrap();
        let flux = flux_transfer_matrices(&spec, &traces.traces).unwrap();
        println!("== {}: {}", ex.name, ex.description);
        for (e, edge) in spec.edges.iter().enumerate() {
            println!(
                "edge {} (domain {} -> {}, letter {}):{}",
                e + 1,
                edge.from + 1,
                edge.to + 1,
                edge.letter + 1,
                flux.matrix(e)
            );
        }
        for i in 0..spec.domain_count() {
            for &k in &spec.domains[i].in_v0 {
                println!("row sum, domain {} p{}: {:.15}", i + 1, k + 1, flux.row_sum(&spec, i, k));
            }
        }
    }
}
