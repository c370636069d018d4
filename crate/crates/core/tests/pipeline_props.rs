//! End-to-end pipeline behaviour on small graphs.

use protes_qaoa::pipeline::{self, histogram, landscape, SolveOptions};
use protes_qaoa::{cut_from_energy, Backend, Graph, ParameterVector, PipelineConfig, PipelineError, QaoaInstance};

const G4: &str = "4 5\n0 1\n0 2\n0 3\n1 2\n1 3\n";

fn g4() -> Graph {
    Graph::parse_edge_list(G4).unwrap()
}

fn light(depth: usize, seed: u64) -> SolveOptions {
    let mut config = PipelineConfig::default();
    config.protes.budget = 300;
    config.refine.max_evals = 2000;
    SolveOptions { depth, config, shots: 512, seed: Some(seed), ..Default::default() }
}

#[test]
fn gamma_zero_row_is_flat() {
    let scan = landscape(&g4(), 40).unwrap();
    let row0 = scan.at(0, 0);
    assert!((row0 + 1.25).abs() < 1e-12);
    for j in 0..40 {
        assert!((scan.at(0, j) - row0).abs() < 1e-12);
    }
}

#[test]
fn scan_values_respect_spectrum() {
    let g = g4();
    let scan = landscape(&g, 30).unwrap();
    let w = g.total_weight();
    assert!(scan.energies.iter().all(|&e| (w - 10.0 - 1e-12..=w + 1e-12).contains(&e)));
    assert_eq!(scan.to_csv().lines().count(), 30 * 30 + 1);
}

#[test]
fn grid_optimum_energy_matches_scan() {
    let g = g4();
    let scan = landscape(&g, 50).unwrap();
    let (i, j, e) = scan.minimum();
    let inst = QaoaInstance::new(g, 1, Backend::GateLevel).unwrap();
    let theta = ParameterVector::new(vec![scan.angle(i)], vec![scan.angle(j)]).unwrap();
    assert!((inst.energy(&theta).unwrap() - e).abs() < 1e-10);
}

#[test]
fn single_edge_reaches_the_scan_optimum() {
    // A dense p = 1 scan bounds the best achievable ratio from below; the
    // refined run must reach it and cannot exceed 1.
    let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
    let scan = landscape(&g, 200).unwrap();
    let scan_alpha = cut_from_energy(scan.minimum().2, &g);
    let report = pipeline::solve(&g, &light(1, 0)).unwrap();
    assert!(report.alpha_c >= scan_alpha - 1e-9, "{} < {scan_alpha}", report.alpha_c);
    assert!(report.alpha_c <= 1.0 + 1e-12);
    assert!((report.alpha_c - 0.9564).abs() < 1e-3);
}

#[test]
fn refinement_never_regresses() {
    for seed in 0..3 {
        let r = pipeline::solve(&g4(), &light(2, seed)).unwrap();
        assert!(r.alpha_c >= r.alpha_p - 1e-12);
        assert_eq!(r.optimal_cut, 5.0);
        assert_eq!(r.theta.len(), 4);
        assert!(r.top_counts.windows(2).all(|w| w[0].count >= w[1].count));
    }
}

#[test]
fn gate_backend_solves_too() {
    let g = Graph::new(3, [(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
    let mut opts = light(1, 4);
    opts.backend = Backend::GateLevel;
    let gate = pipeline::solve(&g, &opts).unwrap();
    opts.backend = Backend::Diagonal;
    let diag = pipeline::solve(&g, &opts).unwrap();
    assert!((gate.alpha_c - diag.alpha_c).abs() < 1e-6);
    assert_eq!(gate.backend, Backend::GateLevel);
}

#[test]
fn empty_graph_is_rejected() {
    let g = Graph::new(3, []).unwrap();
    assert!(matches!(pipeline::solve(&g, &light(1, 0)), Err(PipelineError::ZeroOptimum)));
}

#[test]
fn identity_circuit_gives_near_uniform_counts() {
    let g = g4();
    let inst = QaoaInstance::new(g, 1, Backend::Diagonal).unwrap();
    let shots = 25_600;
    let rows = histogram(&inst, &[0.0, 0.0], shots, 9).unwrap();
    let cells = 256.0;
    let expected = shots as f64 / cells;
    let observed: Vec<f64> = rows.iter().map(|r| r.count as f64).collect();
    let missing = cells - observed.len() as f64;
    let chi2: f64 = observed.iter().map(|o| (o - expected).powi(2) / expected).sum::<f64>() + missing * expected;
    let dof = cells - 1.0;
    assert!((chi2 - dof).abs() < 5.0 * (2.0 * dof).sqrt(), "chi2 {chi2}");
}

#[test]
fn single_shot_histogram() {
    let inst = QaoaInstance::new(g4(), 1, Backend::Diagonal).unwrap();
    let rows = histogram(&inst, &[0.3, 0.2], 1, 0).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].count, 1);
    assert_eq!(pipeline::histogram_csv(&rows).lines().next(), Some("bitstring,count,coloring,cut"));
}

#[test]
fn histogram_mean_cut_matches_expectation() {
    let g = g4();
    let inst = QaoaInstance::new(g.clone(), 2, Backend::Diagonal).unwrap();
    let theta = [0.4, 1.1, 2.3, 0.7];
    let shots = 4096;
    let rows = histogram(&inst, &theta, shots, 3).unwrap();
    let mean = rows.iter().map(|r| r.cut * r.count as f64).sum::<f64>() / shots as f64;
    let state = inst.run(&ParameterVector::from_flat(&theta).unwrap()).unwrap();
    let exact = cut_from_energy(state.expectation(inst.cost()).unwrap(), &g);
    // cut variance is at most (W/2)^2
    let sigma = g.total_weight() / 2.0 / (shots as f64).sqrt();
    assert!((mean - exact).abs() < 5.0 * sigma, "{mean} vs {exact}");
}

#[test]
fn histogram_rejects_wrong_theta_length() {
    let inst = QaoaInstance::new(g4(), 2, Backend::Diagonal).unwrap();
    assert!(matches!(histogram(&inst, &[0.1, 0.2], 10, 0), Err(PipelineError::ThetaLength { expected: 4, got: 2, depth: 2 })));
}

#[test]
fn brute_reports_known_optima() {
    let k5 = Graph::new(5, (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j, 1.0)))).unwrap();
    assert_eq!(pipeline::brute(&k5, 3).unwrap().optimal_cut, 8.0);
    assert_eq!(pipeline::brute(&g4(), 3).unwrap().optimal_cut, 5.0);
    let k3 = Graph::new(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
    assert_eq!(pipeline::brute(&k3, 3).unwrap().optimal_cut, 3.0);
}
