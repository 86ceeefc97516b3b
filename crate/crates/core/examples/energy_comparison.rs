//! Harmonic energy against the energy functional built from flux matrices,
//! for random simple boundary data.

use bgd_harmonics::bgd::{domain_trace_fixed_point, flux_transfer_matrices};
use bgd_harmonics::cli::random_function;
use bgd_harmonics::measure::{energy_functional, harmonic_energy};
use bgd_harmonics::registry;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    for ex in registry::EXAMPLES {
        let spec = ex.spec();
        let traces = domain_trace_fixed_point(&spec, 1e-12, 10_000).unwrap();
        let flux = flux_transfer_matrices(&spec, &traces.traces).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for m0 in 1..=3 {
            let ratios: Vec<f64> = (0..20)
                .map(|_| {
                    let f = random_function(&spec, 0, m0, &mut rng).unwrap();
                    harmonic_energy(&spec, &traces.traces, &f).unwrap() / energy_functional(&spec, &flux, &f).unwrap()
                })
                .collect();
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().copied().fold(0.0, f64::max);
            println!("{:10} m0 = {m0}: ratio in [{lo:.5}, {hi:.5}]", ex.name);
        }
    }
}
