//! Level-n approximating networks of the gasket and their traces on `V_0`.

use bgd_harmonics::pcf::build_level_network;
use bgd_harmonics::registry;

fn main() {
    let hs = registry::sierpinski_gasket();
    for n in 0..=5 {
        let net = build_level_network(&hs, n, 1_000_000).unwrap();
        let corners: Vec<usize> = (0..3)
            .map(|k| net.index_of(&hs.structure.canonicalize_at(&[], k, n)).unwrap())
            .collect();
        let r = net.effective_resistance(&[corners[0]], &[corners[1]]).unwrap();
        let reduced = net.trace_onto(&corners).unwrap();
        println!(
            "n = {n}: {:5} nodes, R(p1, p2) = {r:.12}, traced conductance {:.12}",
            net.node_count(),
            reduced.conductance(0, 1)
        );
    }
}
