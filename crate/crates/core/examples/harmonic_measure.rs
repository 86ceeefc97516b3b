//! Harmonic measure of cylinders: the atoms of the cut gasket and the
//! distribution function of the Vicsek measure.

use bgd_harmonics::bgd::{domain_trace_fixed_point, flux_transfer_matrices};
use bgd_harmonics::measure::{cylinder_measure_edges, measure_vector, MeasureContext};
use bgd_harmonics::registry;

fn main() {
    let spec = registry::sg_cut();
    let traces = domain_trace_fixed_point(&spec, 1e-12, 10_000).unwrap();
    let flux = flux_transfer_matrices(&spec, &traces.traces).unwrap();
    let ctx = MeasureContext::new(&spec, &flux, 0, 0).unwrap();
    for n in 0..6 {
        let mut word = vec![0; n];
        word.push(1);
        let mu = cylinder_measure_edges(&ctx, &word).unwrap();
        println!("cut gasket, atom {n}: {mu:.15} (2/3^{} = {:.15})", n + 1, 2.0 / 3f64.powi(n as i32 + 1));
    }

    let spec = registry::vicsek_corner();
    let traces = domain_trace_fixed_point(&spec, 1e-12, 10_000).unwrap();
    let flux = flux_transfer_matrices(&spec, &traces.traces).unwrap();
    let mv = measure_vector(&MeasureContext::new(&spec, &flux, 0, 3).unwrap(), 4).unwrap();
    println!("\nvicsek, depth 4 from p4: {} cylinders, total {:.15}", mv.entries.len(), mv.total());
    for (x, c) in mv.cumulative().iter().step_by(4) {
        println!("  F({x}) = {c:.6}");
    }
}
