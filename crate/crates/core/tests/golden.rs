use std::fs;
use std::path::PathBuf;

use serde::Deserialize;
use whasym::asymfact::convergence_gate;
use whasym::example_oracle::example_spec;
use whasym::Grid;

#[derive(Deserialize)]
struct GateGolden {
    phi: f64,
    grid_scale: f64,
    grid_nodes: usize,
    mu: f64,
    c_mu: f64,
    n_norm: f64,
    a: f64,
    rel_tol: f64,
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/gate_small_phase.json")
}

fn computed(g: &GateGolden) -> whasym::asymfact::ConvergenceGate {
    let grid = Grid::new(g.grid_scale, g.grid_nodes).unwrap();
    let spec = example_spec(g.phi, g.mu, &grid).unwrap();
    let ff = spec.factorize_f().unwrap();
    let g1 = spec.build_g1(&ff).unwrap();
    let n = g1
        .checked_sub(&whasym::SampledMatrixFunction::identity(&grid, 2))
        .unwrap();
    convergence_gate(&n, g.mu, g.c_mu).unwrap()
}

#[test]
fn small_phase_gate_matches_golden() {
    let g: GateGolden = serde_json::from_str(&fs::read_to_string(golden_path()).unwrap()).unwrap();
    let gate = computed(&g);
    if std::env::var_os("WHASYM_PRINT_GOLDEN").is_some() {
        println!("n_norm = {:.17e}, a = {:.17e}", gate.n_norm, gate.a);
    }
    assert!(gate.admissible, "{gate:?}");
    assert!(gate.a < 1.0);
    assert!(
        (gate.n_norm - g.n_norm).abs() <= g.rel_tol * g.n_norm,
        "{} vs {}",
        gate.n_norm,
        g.n_norm
    );
    assert!((gate.a - g.a).abs() <= g.rel_tol * g.a, "{} vs {}", gate.a, g.a);
}
