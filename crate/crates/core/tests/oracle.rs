use bgd_harmonics::bgd::{domain_trace_fixed_point, flux_transfer_matrices};
use bgd_harmonics::oracle::{
    build_approx_network, build_approx_network_capped, convergence_csv, direct_hitting, random_walk_hitting,
    random_walk_hitting_capped, richardson_report, ApproxMode, OracleError, WalkConfig,
};
use bgd_harmonics::registry;

#[test]
fn hitting_probabilities_sum_to_one() {
    for ex in registry::EXAMPLES {
        let spec = ex.spec();
        for i in 0..spec.domain_count() {
            for mode in [ApproxMode::Short, ApproxMode::Cut] {
                let approx = match build_approx_network(&spec, i, 4, 1, mode) {
                    Ok(a) => a,
                    Err(OracleError::AmbiguousClasses(_)) => continue,
                    Err(e) => panic!("{}: {e}", ex.name),
                };
                for &k in &spec.domains[i].in_v0 {
                    let h = direct_hitting(&approx, k).unwrap();
                    assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12, "{} {mode}", ex.name);
                    assert!(h.iter().all(|&x| x >= -1e-15));
                }
            }
        }
    }
}

#[test]
fn symmetric_halves_of_the_bottom_line() {
    let spec = registry::sg_bottom();
    for n in [1, 3, 6] {
        for mode in [ApproxMode::Short, ApproxMode::Cut] {
            let approx = build_approx_network(&spec, 0, n, 1, mode).unwrap();
            let h = direct_hitting(&approx, 2).unwrap();
            assert!((h[0] - 0.5).abs() < 1e-12 && (h[1] - 0.5).abs() < 1e-12, "n={n} {mode}: {h:?}");
        }
    }
}

#[test]
fn cut_gasket_thirds() {
    let spec = registry::sg_cut();
    let approx = build_approx_network(&spec, 0, 12, 1, ApproxMode::Cut).unwrap();
    let h = direct_hitting(&approx, 0).unwrap();
    assert!((h[0] - 1.0 / 3.0).abs() < 1e-6 && (h[1] - 2.0 / 3.0).abs() < 1e-6, "{h:?}");
}

#[test]
fn one_walker_lands_once() {
    let spec = registry::hexagasket_half();
    let approx = build_approx_network(&spec, 0, 4, 1, ApproxMode::Cut).unwrap();
    let est = random_walk_hitting(&approx, WalkConfig { seed: 42, walkers: 1 }, 4).unwrap();
    assert_eq!(est.iter().map(|e| e.hits).sum::<u64>(), 1);
    assert_eq!(est.iter().map(|e| e.estimate).sum::<f64>(), 1.0);
}

#[test]
fn walks_repeat_across_thread_counts() {
    let spec = registry::vicsek_corner();
    let approx = build_approx_network(&spec, 1, 4, 2, ApproxMode::Cut).unwrap();
    let cfg = WalkConfig { seed: 9, walkers: 20_000 };
    let runs: Vec<_> = [1, 2, 5]
        .into_iter()
        .map(|t| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
            pool.install(|| random_walk_hitting(&approx, cfg, 3).unwrap())
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    let other = random_walk_hitting(&approx, WalkConfig { seed: 10, ..cfg }, 3).unwrap();
    assert_ne!(runs[0], other);
}

#[test]
fn walk_estimates_track_direct_values() {
    let spec = registry::sg_cut();
    let approx = build_approx_network(&spec, 0, 6, 1, ApproxMode::Cut).unwrap();
    let direct = direct_hitting(&approx, 0).unwrap();
    let est = random_walk_hitting(&approx, WalkConfig { seed: 1, walkers: 50_000 }, 0).unwrap();
    for (e, d) in est.iter().zip(&direct) {
        assert!((e.estimate - d).abs() < 5.0 * e.stderr.max(1e-3), "{e:?} vs {d}");
    }
}

#[test]
fn step_cap_is_reported() {
    let spec = registry::sg_bottom();
    let approx = build_approx_network(&spec, 0, 6, 1, ApproxMode::Cut).unwrap();
    let r = random_walk_hitting_capped(&approx, WalkConfig { seed: 0, walkers: 10 }, 2, 1);
    assert!(matches!(r, Err(OracleError::CapHit { .. })), "{r:?}");
}

#[test]
fn shorting_lowers_resistance() {
    for ex in registry::EXAMPLES {
        let spec = ex.spec();
        for i in 0..spec.domain_count() {
            let (Ok(short), Ok(cut)) = (
                build_approx_network(&spec, i, 5, 2, ApproxMode::Short),
                build_approx_network(&spec, i, 5, 2, ApproxMode::Cut),
            ) else {
                continue;
            };
            for &(k, ks) in &short.v0_nodes {
                let kc = cut.v0_nodes.iter().find(|&&(x, _)| x == k).unwrap().1;
                let rs = short.network.effective_resistance(&[ks], &short.class_nodes).unwrap();
                let rc = cut.network.effective_resistance(&[kc], &cut.class_nodes).unwrap();
                assert!(rs <= rc + 1e-12, "{} i={i} k={k}: {rs} > {rc}", ex.name);
            }
        }
    }
}

#[test]
fn class_count_matches_words() {
    let spec = registry::hexagasket_half();
    let approx = build_approx_network(&spec, 0, 4, 2, ApproxMode::Cut).unwrap();
    assert_eq!(approx.classes.len(), 4);
    assert_eq!(approx.class_nodes.len(), 4);
    assert!(build_approx_network(&spec, 0, 1, 2, ApproxMode::Cut).is_err());
    assert!(build_approx_network_capped(&spec, 0, 8, 1, ApproxMode::Cut, 100).is_err());
}

#[test]
fn richardson_table_shrinks() {
    let spec = registry::vicsek_corner();
    let traces = domain_trace_fixed_point(&spec, 1e-10, 10_000).unwrap();
    let flux = flux_transfer_matrices(&spec, &traces.traces).unwrap();
    let rows = richardson_report(&spec, &flux, 0, 3, 1, &[2, 4, 6]).unwrap();
    assert_eq!(rows.len(), 6);
    for mode in [ApproxMode::Short, ApproxMode::Cut] {
        let d: Vec<f64> = rows.iter().filter(|r| r.mode == mode).map(|r| r.max_discrepancy).collect();
        assert!(d.windows(2).all(|w| w[1] <= w[0] + 1e-10), "{mode}: {d:?}");
    }
    let csv = convergence_csv(&rows);
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("n,mode,"));
}
