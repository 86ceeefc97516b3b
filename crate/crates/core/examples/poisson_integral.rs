//! Harmonic extension values from the Poisson integral, with and without
//! Neumann data at the boundary points that lie inside the domain.

use std::collections::BTreeMap;

use bgd_harmonics::bgd::{domain_trace_fixed_point, flux_transfer_matrices};
use bgd_harmonics::measure::{poisson_value, poisson_value_with_fluxes, MeasureContext, SimpleBoundaryFunction};
use bgd_harmonics::registry;

fn main() {
    let spec = registry::sg_bottom();
    let traces = domain_trace_fixed_point(&spec, 1e-12, 10_000).unwrap();
    let flux = flux_transfer_matrices(&spec, &traces.traces).unwrap();
    let ctx = MeasureContext::new(&spec, &flux, 0, 2).unwrap();
    // boundary data x on the bottom line, sampled at depth 6
    let f = SimpleBoundaryFunction::from_fn(&spec, 0, 6, |w| {
        w.edges().iter().enumerate().map(|(j, &e)| e as f64 / 2f64.powi(j as i32 + 1)).sum()
    })
    .unwrap();
    println!("u(p3) with f = x: {:.12}", poisson_value(&ctx, &f).unwrap());
    for du in [0.0, 1.0, -0.5] {
        let v = poisson_value_with_fluxes(&ctx, &f, &BTreeMap::from([(2, du)])).unwrap();
        println!("  with (du)(p3) = {du:4}: {v:.12}");
    }
}
