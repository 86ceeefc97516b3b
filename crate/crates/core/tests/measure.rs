use std::collections::BTreeMap;

use bgd_harmonics::bgd::{
    domain_trace_fixed_point, enumerate_words, flux_transfer_matrices, AdmissibleWord, BgdSpec, DomainTraceSet,
    FluxTransferSet,
};
use bgd_harmonics::cli::random_function;
use bgd_harmonics::measure::{
    boundary_mean, cylinder_measure, cylinder_measure_edges, decomposition_residual_between, energy_functional,
    harmonic_energy, harmonic_space_diagnostics, measure_equivalence_ratio, measure_vector, poisson_value,
    poisson_value_extended, poisson_value_with_fluxes, selfsimilar_decomposition_residual, MeasureContext,
    SimpleBoundaryFunction,
};
use bgd_harmonics::oracle::{build_approx_network, direct_solve, ApproxMode};
use bgd_harmonics::registry::{self, Golden};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn solve(spec: &BgdSpec) -> (DomainTraceSet, FluxTransferSet) {
    let traces = domain_trace_fixed_point(spec, 1e-12, 10_000).unwrap();
    let flux = flux_transfer_matrices(spec, &traces.traces).unwrap();
    (traces, flux)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn registered_reference_values() {
    for ex in registry::EXAMPLES {
        let spec = ex.spec();
        let (traces, flux) = solve(&spec);
        for g in ex.golden() {
            let (got, want) = match &g {
                Golden::MatrixEntry { edge, k, l, value, .. } => (flux.matrix(*edge)[(*k, *l)], *value),
                Golden::Resistance { domain, k, value, .. } => (traces.trace(*domain).boundary_resistance(*k), *value),
                Golden::Measure { domain, k, word, value, .. } => {
                    let ctx = MeasureContext::new(&spec, &flux, *domain, *k).unwrap();
                    (cylinder_measure_edges(&ctx, word).unwrap(), *value)
                }
            };
            assert!(close(got, want, 1e-10), "{}: {g:?} gave {got}", ex.name);
        }
    }
}

#[test]
fn cylinder_values() {
    let spec = registry::sg_cut();
    let (_, flux) = solve(&spec);
    let ctx = MeasureContext::new(&spec, &flux, 0, 0).unwrap();
    let w = AdmissibleWord::new(&spec, 0, &[0, 1]).unwrap();
    assert!(close(cylinder_measure(&ctx, &w).unwrap(), 2.0 / 9.0, 1e-10));
    assert!(close(cylinder_measure_edges(&ctx, &[]).unwrap(), 1.0, 1e-12));
    assert!(cylinder_measure_edges(&ctx, &[1, 0]).is_err());

    let hex = registry::hexagasket_half();
    let (_, flux) = solve(&hex);
    let ctx = MeasureContext::new(&hex, &flux, 0, 4).unwrap();
    assert!(close(cylinder_measure_edges(&ctx, &[0, 0]).unwrap(), 1.0 / 9.0, 1e-10));
    assert!(MeasureContext::new(&hex, &flux, 0, 0).is_err());
}

#[test]
fn vicsek_depth_one_measure_is_a_probability_vector() {
    let spec = registry::vicsek_corner();
    let (_, flux) = solve(&spec);
    for (i, k) in [(0, 2), (0, 3), (1, 3)] {
        let mv = measure_vector(&MeasureContext::new(&spec, &flux, i, k).unwrap(), 1).unwrap();
        assert_eq!(mv.entries.len(), spec.edges_from(i).len());
        assert!(close(mv.total(), 1.0, 1e-12));
        assert!(mv.entries.iter().all(|(_, x)| *x > 0.0));
        let cum = mv.cumulative();
        assert!(close(cum.last().unwrap().1, 1.0, 1e-12));
    }
    // the two corner copies seen from p_4 are mirror images
    let mv = measure_vector(&MeasureContext::new(&spec, &flux, 1, 3).unwrap(), 1).unwrap();
    assert!(close(mv.entries[0].1, mv.entries[1].1, 1e-10));
}

#[test]
fn poisson_of_indicators_and_constants() {
    let spec = registry::sg_bottom();
    let (_, flux) = solve(&spec);
    let ctx = MeasureContext::new(&spec, &flux, 0, 2).unwrap();
    let words = enumerate_words(&spec, 0, 2).unwrap();
    let mut sum = 0.0;
    for w in &words {
        let f = SimpleBoundaryFunction::from_fn(&spec, 0, 2, |x| if x.edges() == w.edges() { 1.0 } else { 0.0 }).unwrap();
        let v = poisson_value(&ctx, &f).unwrap();
        assert!(close(v, 0.25, 1e-10));
        sum += v;
    }
    assert!(close(sum, 1.0, 1e-12));
    let c = SimpleBoundaryFunction::constant(&spec, 0, 3, -2.5).unwrap();
    assert!(close(poisson_value(&ctx, &c).unwrap(), -2.5, 1e-12));
}

/// The extended formula against a depth-n solve with Neumann sources; the
/// cut approximation converges to it from one side.
#[test]
fn poisson_with_fluxes_matches_network_solve() {
    for name in ["sg-bottom", "vicsek"] {
        let ex = registry::find(name).unwrap();
        let spec = ex.spec();
        let (_, flux) = solve(&spec);
        let i = 0;
        let k = *spec.domains[i].in_v0.iter().next().unwrap();
        let ctx = MeasureContext::new(&spec, &flux, i, k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_function(&spec, i, 1, &mut rng).unwrap();
        let fluxes: BTreeMap<usize, f64> = spec.domains[i].in_v0.iter().map(|&x| (x, 0.5 + x as f64)).collect();
        let formula = poisson_value_with_fluxes(&ctx, &f, &fluxes).unwrap();
        let mut last = f64::INFINITY;
        for n in [5, 7, 9] {
            let approx = build_approx_network(&spec, i, n, 1, ApproxMode::Cut).unwrap();
            let values: Vec<f64> = approx.classes.iter().map(|w| f.value(w).unwrap()).collect();
            let direct = direct_solve(&approx, k, &values, &fluxes).unwrap();
            let gap = (direct - formula).abs();
            assert!(gap < last, "{name} n={n}: {gap}");
            last = gap;
        }
        assert!(last < 1e-2, "{name}: {last}");
    }
}

#[test]
fn extended_poisson_needs_every_boundary_point() {
    let spec = registry::sg_bottom();
    let (traces, flux) = solve(&spec);
    let ctx = MeasureContext::new(&spec, &flux, 0, 2).unwrap();
    let f = SimpleBoundaryFunction::constant(&spec, 0, 1, 0.0).unwrap();
    assert!(poisson_value_extended(&ctx, &f, &BTreeMap::new()).is_err());
    let r = traces.trace(0).boundary_resistance(2);
    let v = poisson_value_extended(&ctx, &f, &BTreeMap::from([(2, (r, 1.0))])).unwrap();
    assert!(close(v, 3.0 / 7.0, 1e-10));
}

#[test]
fn decomposition_residual_detects_perturbation() {
    let spec = registry::vicsek_corner();
    let (_, flux) = solve(&spec);
    let ctx = MeasureContext::new(&spec, &flux, 0, 3).unwrap();
    for m in 1..=4 {
        assert!(selfsimilar_decomposition_residual(&ctx, m).unwrap() < 1e-13);
    }
    let mut bent = flux.clone();
    bent.matrices[0][(3, 2)] += 1e-3;
    let r = decomposition_residual_between(&ctx, &bent, 2).unwrap();
    assert!(r > 1e-5, "{r}");
    assert!(selfsimilar_decomposition_residual(&ctx, 0).is_err());
}

#[test]
fn equivalence_ratio_of_mirror_points() {
    let spec = registry::hexagasket_half();
    let (_, flux) = solve(&spec);
    let (lo, hi) = measure_equivalence_ratio(&spec, &flux, 0, 4, 5, 1).unwrap();
    assert!(close(lo, 0.5, 1e-10) && close(hi, 2.0, 1e-10), "{lo} {hi}");
    for m in 2..=5 {
        let (lo, hi) = measure_equivalence_ratio(&spec, &flux, 0, 4, 5, m).unwrap();
        assert!(lo > 0.0 && lo <= 1.0 && hi >= 1.0 && close(lo * hi, 1.0, 1e-9), "m={m}: {lo} {hi}");
    }
    let bottom = registry::sg_bottom();
    let (_, flux) = solve(&bottom);
    assert!(measure_equivalence_ratio(&bottom, &flux, 0, 2, 2, 1).is_err());
}

#[test]
fn boundary_mean_at_root_is_poisson_value() {
    let spec = registry::sg_cut();
    let (_, flux) = solve(&spec);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = random_function(&spec, 0, 3, &mut rng).unwrap();
    let ctx = MeasureContext::new(&spec, &flux, 0, 0).unwrap();
    let root = AdmissibleWord::empty(&spec, 0);
    assert!(close(boundary_mean(&spec, &flux, &root, 0, &f).unwrap(), poisson_value(&ctx, &f).unwrap(), 1e-12));
    let ind = SimpleBoundaryFunction::from_fn(&spec, 0, 1, |w| if w.edges() == [0] { 1.0 } else { 0.0 }).unwrap();
    assert!(close(boundary_mean(&spec, &flux, &root, 0, &ind).unwrap(), 1.0 / 3.0, 1e-10));
    let leaf = AdmissibleWord::new(&spec, 0, &[1]).unwrap();
    assert_eq!(boundary_mean(&spec, &flux, &leaf, 1, &ind).unwrap(), 0.0);
}

/// `f_{γ,p}` from explicit row products over all extensions of `γ`.
fn mean_by_rows(spec: &BgdSpec, flux: &FluxTransferSet, f: &SimpleBoundaryFunction, gamma: &AdmissibleWord, p: usize) -> f64 {
    let q = spec.hs.boundary_size();
    let m0 = f.depth;
    let mut total = 0.0;
    for w in enumerate_words(spec, gamma.terminal(), m0 - gamma.len()).unwrap() {
        let mut row = DVector::<f64>::zeros(q).transpose();
        row[p] = 1.0;
        for &e in w.edges() {
            row *= flux.matrix(e);
        }
        let mut full = gamma.edges().to_vec();
        full.extend_from_slice(w.edges());
        total += f.value(&full).unwrap() * row.sum();
    }
    total
}

fn energy_by_pairs(spec: &BgdSpec, flux: &FluxTransferSet, f: &SimpleBoundaryFunction) -> f64 {
    let mut total = 0.0;
    for m in 0..f.depth {
        for g in enumerate_words(spec, f.domain, m).unwrap() {
            let children: Vec<AdmissibleWord> = spec.edges_from(g.terminal()).iter().map(|&e| g.extend(spec, e).unwrap()).collect();
            let mut s = 0.0;
            for xi in &children {
                for eta in &children {
                    for &p in &spec.domains[xi.terminal()].in_v0 {
                        for &q in &spec.domains[eta.terminal()].in_v0 {
                            let a = if xi.len() == f.depth { f.value(xi.edges()).unwrap() } else { mean_by_rows(spec, flux, f, xi, p) };
                            let b = if eta.len() == f.depth { f.value(eta.edges()).unwrap() } else { mean_by_rows(spec, flux, f, eta, q) };
                            s += (a - b).powi(2);
                        }
                    }
                }
            }
            total += s / g.renorm();
        }
    }
    total
}

#[test]
fn energy_functional_against_pair_sums() {
    let bottom = registry::sg_bottom();
    let (_, flux) = solve(&bottom);
    let ind = SimpleBoundaryFunction::from_fn(&bottom, 0, 1, |w| if w.edges() == [0] { 1.0 } else { 0.0 }).unwrap();
    assert!(close(energy_functional(&bottom, &flux, &ind).unwrap(), 2.0, 1e-12));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for ex in registry::EXAMPLES {
        let spec = ex.spec();
        let (_, flux) = solve(&spec);
        for m0 in 1..=3 {
            let f = random_function(&spec, 0, m0, &mut rng).unwrap();
            let a = energy_functional(&spec, &flux, &f).unwrap();
            let b = energy_by_pairs(&spec, &flux, &f);
            assert!(close(a, b, 1e-10 * b.max(1.0)), "{} m0={m0}: {a} vs {b}", ex.name);
        }
    }
}

/// Energy of the pinned solution on the depth-n approximations.
fn network_energy(spec: &BgdSpec, f: &SimpleBoundaryFunction, n: usize, mode: ApproxMode) -> f64 {
    let approx = build_approx_network(spec, f.domain, n, f.depth, mode).unwrap();
    let pinned: Vec<(usize, f64)> = approx
        .classes
        .iter()
        .zip(&approx.class_nodes)
        .map(|(w, &node)| (node, f.value(w).unwrap()))
        .collect();
    let u = approx.network.dirichlet_solve(&pinned).unwrap();
    approx.network.energy(&u).unwrap()
}

#[test]
fn harmonic_energy_inside_network_bracket() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for ex in registry::EXAMPLES {
        let spec = ex.spec();
        let (traces, _) = solve(&spec);
        for m0 in 1..=2 {
            let f = random_function(&spec, 0, m0, &mut rng).unwrap();
            let he = harmonic_energy(&spec, &traces.traces, &f).unwrap();
            let n = m0 + 6;
            let cut = network_energy(&spec, &f, n, ApproxMode::Cut);
            let short = network_energy(&spec, &f, n, ApproxMode::Short);
            let slack = 1e-8 * he.max(1.0);
            assert!(cut <= he + slack && he <= short + slack, "{} m0={m0}: {cut} {he} {short}", ex.name);
        }
    }
}

#[test]
fn harmonic_energy_of_bottom_indicator() {
    let spec = registry::sg_bottom();
    let (traces, _) = solve(&spec);
    let ind = SimpleBoundaryFunction::from_fn(&spec, 0, 1, |w| if w.edges() == [0] { 1.0 } else { 0.0 }).unwrap();
    assert!(close(harmonic_energy(&spec, &traces.traces, &ind).unwrap(), 1.09375, 1e-9));
}

#[test]
fn energies_scale_quadratically_and_ignore_shifts() {
    let spec = registry::vicsek_corner();
    let (traces, flux) = solve(&spec);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_function(&spec, 0, 2, &mut rng).unwrap();
    let g = f.scaled(-3.0, 7.0);
    let (e, h) = (energy_functional(&spec, &flux, &f).unwrap(), harmonic_energy(&spec, &traces.traces, &f).unwrap());
    assert!(close(energy_functional(&spec, &flux, &g).unwrap(), 9.0 * e, 1e-9 * e));
    assert!(close(harmonic_energy(&spec, &traces.traces, &g).unwrap(), 9.0 * h, 1e-9 * h));
    let c = SimpleBoundaryFunction::constant(&spec, 0, 2, 4.0).unwrap();
    assert!(c.is_constant());
    assert!(energy_functional(&spec, &flux, &c).unwrap().abs() < 1e-20);
    assert!(harmonic_energy(&spec, &traces.traces, &c).unwrap().abs() < 1e-12);
}

#[test]
fn diagnostics_of_the_gasket() {
    let (c1, big1, c2, big2) = harmonic_space_diagnostics(&registry::sierpinski_gasket());
    assert!(close(c1, 0.5, 1e-12) && close(big1, 0.5, 1e-12));
    assert!(close(c2, 1.0 / 3.0, 1e-12) && close(big2, 1.0 / 3.0, 1e-12));
    let (c1, big1, c2, big2) = harmonic_space_diagnostics(&registry::hexagasket());
    assert!(0.0 < c1 && c1 <= big1 && 0.0 < c2 && c2 <= big2);
}

#[test]
fn functions_from_json() {
    let spec = registry::sg_cut();
    let json = serde_json::json!({"1.1": 1.0, "1.2": 2.0, "2.3": 3.0});
    let f = SimpleBoundaryFunction::from_json(&spec, 0, 2, &json).unwrap();
    assert_eq!(f.value(&[0, 1]), Some(2.0));
    assert_eq!(f.value(&[1, 2]), Some(3.0));
    let partial = serde_json::json!({"1.1": 1.0});
    assert!(SimpleBoundaryFunction::from_json(&spec, 0, 2, &partial).is_err());
}
