//! The bracketed fixed point for domain traces: short and cut iterates close
//! in on the same resistances from both sides.

use bgd_harmonics::bgd::{domain_trace_fixed_point_with, FixedPointConfig};
use bgd_harmonics::registry;

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "sg-cut".into());
    let ex = registry::find(&name).expect("unknown example");
    let spec = ex.spec();
    let set = domain_trace_fixed_point_with(
        &spec,
        FixedPointConfig {
            tol: 1e-12,
            max_iter: 10_000,
            record_history: true,
        },
    )
    .unwrap();
    println!("{name}: {} iterations, width {:.2e}", set.iterations, set.width);
    for step in set.history.iter().step_by(5) {
        println!(
            "  iteration {:3}: width {:.3e}, domain 1 short {:?} cut {:?}",
            step.iteration, step.width, step.short[0], step.cut[0]
        );
    }
    for (i, d) in spec.domains.iter().enumerate() {
        for &k in &d.in_v0 {
            println!("  R(boundary of domain {}, p{}) = {:.12}", i + 1, k + 1, set.trace(i).boundary_resistance(k));
        }
    }
}
