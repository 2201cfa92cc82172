mod oracles;

use malaria_focp::error::Error;
use malaria_focp::model::integrand_w;
use malaria_focp::scenario::{parse_config_str, solve_cell};
use malaria_focp::sweep::{relative_change, InitialControls};
use malaria_focp::{
    sweep, FocpProblem, FracOrder, MalariaSystem, ScenarioConfig, StateVec, StrategyMask, SweepSolution,
    Trajectory,
};
use oracles::{classical_rhs, midpoint_from_nodes, rk4_reference};

fn config() -> ScenarioConfig {
    parse_config_str("").unwrap()
}

fn solve(cfg: &ScenarioConfig, mask: StrategyMask, alpha: f64) -> SweepSolution {
    solve_cell(cfg, mask, FracOrder::new(alpha).unwrap()).unwrap()
}

fn sup_diff(a: &Trajectory, b: &Trajectory) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn all_controls_beat_doing_nothing() {
    let cfg = config();
    let controlled = solve(&cfg, StrategyMask::ALL, 1.0);
    let baseline = solve(&cfg, StrategyMask::NONE, 1.0);
    assert!(controlled.converged);
    assert!(controlled.objective < baseline.objective);
    assert!(controlled.states.last()[1] <= baseline.states.last()[1]);
}

#[test]
fn boundary_conditions_hold_exactly() {
    let cfg = config();
    for alpha in [1.0, 0.9] {
        let sol = solve(&cfg, StrategyMask::new(true, true, false), alpha);
        assert_eq!(sol.states.row(0), &cfg.initial_state.to_array());
        assert_eq!(sol.costates.last(), &[0.0; 5]);
        assert!(sol.controls.as_slice().iter().all(|u| (0.0..=1.0).contains(u)));
    }
}

#[test]
fn converged_controls_are_a_fixed_point() {
    let cfg = config();
    for (mask, alpha) in [(StrategyMask::ALL, 1.0), (StrategyMask::new(true, false, true), 0.95)] {
        let sol = solve(&cfg, mask, alpha);
        let a = FracOrder::new(alpha).unwrap();
        let sys = MalariaSystem::new(cfg.params.with_alpha(a), mask, cfg.costate_variant).unwrap();
        let p = FocpProblem::new(&sys, cfg.initial_state.to_array().to_vec(), cfg.grid().unwrap(), a).unwrap();
        let candidate = p.candidate_controls(&sol.states, &sol.costates).unwrap();
        let w = sol.final_relaxation;
        let rows: Vec<Vec<f64>> = candidate
            .rows()
            .zip(sol.controls.rows())
            .map(|(c, o)| c.iter().zip(o).map(|(c, o)| w * c + (1.0 - w) * o).collect())
            .collect();
        let next = Trajectory::from_rows(&rows).unwrap();
        let (change, pass) = relative_change(&next, &sol.controls, cfg.sweep.tolerance);
        assert!(pass, "{} alpha {alpha}: {change:?}", mask.name());
    }
}

#[test]
fn relaxation_weight_does_not_move_the_optimum() {
    let mut cfg = config();
    let loose = solve(&cfg, StrategyMask::new(false, true, false), 1.0);
    cfg.sweep.relaxation = 0.9;
    let tight = solve(&cfg, StrategyMask::new(false, true, false), 1.0);
    let d = sup_diff(&loose.controls, &tight.controls);
    assert!(d <= 10.0 * cfg.sweep.tolerance, "sup |u(0.5) - u(0.9)| = {d}");
}

#[test]
fn warm_start_from_a_converged_solution_is_quick() {
    let mut cfg = config();
    let sol = solve(&cfg, StrategyMask::ALL, 0.95);
    cfg.sweep.initial_controls = Some(InitialControls::Trajectory(sol.controls.clone()));
    let again = solve(&cfg, StrategyMask::ALL, 0.95);
    assert!(again.iterations <= 5 && again.iterations < sol.iterations, "{} iterations", again.iterations);
    assert!((again.objective - sol.objective).abs() <= 1e-3 * sol.objective);
}

#[test]
fn objective_agrees_with_midpoint_quadrature() {
    let cfg = config();
    let sol = solve(&cfg, StrategyMask::NONE, 1.0);
    let h = sol.grid.h();
    let cost: Vec<f64> = (0..sol.grid.n_nodes())
        .map(|k| {
            let x = StateVec::from_slice(sol.states.row(k));
            integrand_w(&x, &Default::default(), &cfg.params)
        })
        .collect();
    let mid = midpoint_from_nodes(&cost, h);
    assert!((sol.objective - mid).abs() <= 1e-3 * mid);

    // with U ≡ 0 the running cost reduces to A·I_H
    let ih = sol.states.channel(1);
    let direct = cfg.params.weight_infected * midpoint_from_nodes(&ih, h);
    assert!((sol.objective - direct).abs() <= 1e-9 * direct);
}

#[test]
fn uncontrolled_trajectory_tracks_rk4() {
    // Euler with 1000 steps against RK4 with 20000 on the same horizon
    let cfg = config();
    let sol = solve(&cfg, StrategyMask::NONE, 1.0);
    let reference = rk4_reference(
        |_, x| classical_rhs(x, &[0.0; 3], &cfg.params),
        &cfg.initial_state.to_array(),
        0.0,
        cfg.horizon,
        20_000,
    );
    let ih_ref: Vec<f64> = (0..=1000).map(|k| reference[20 * k][1]).collect();
    let j_ref = cfg.params.weight_infected * midpoint_from_nodes(&ih_ref, sol.grid.h());
    let rel = (sol.objective - j_ref).abs() / j_ref;
    assert!(rel < 5e-2, "objective relative gap {rel}");
}

#[test]
fn objective_converges_at_first_order_under_refinement() {
    let mut cfg = config();
    let mut js = Vec::new();
    for n in [250, 500, 1000] {
        cfg.n_steps = n;
        js.push(solve(&cfg, StrategyMask::ALL, 0.95).objective);
    }
    let d1 = (js[0] - js[1]).abs();
    let d2 = (js[1] - js[2]).abs();
    eprintln!("J under refinement: {js:?}");
    // halving h should roughly halve the gap for a first-order scheme
    let ratio = d1 / d2;
    assert!((1.5..3.0).contains(&ratio), "{js:?}, ratio {ratio}");
}

#[test]
fn iteration_cap_reports_the_partial_solution() {
    let mut cfg = config();
    cfg.sweep.max_iterations = 2;
    match solve_cell(&cfg, StrategyMask::ALL, FracOrder::ONE) {
        Err(Error::NotConverged(sol)) => {
            assert_eq!(sol.iterations, 2);
            assert!(!sol.converged);
            assert_eq!(sol.convergence_history.len(), 2);
        }
        other => panic!("expected NotConverged, got {:?}", other.map(|s| s.iterations)),
    }
}

#[test]
fn sweep_accepts_any_optimality_system() {
    let cfg = config();
    let sys = MalariaSystem::new(cfg.params, StrategyMask::ALL, cfg.costate_variant).unwrap();
    let p = FocpProblem::new(&sys, cfg.initial_state.to_array().to_vec(), cfg.grid().unwrap(), FracOrder::ONE).unwrap();
    let sol = sweep(&p, &cfg.sweep).unwrap();
    let via_cell = solve(&cfg, StrategyMask::ALL, 1.0);
    assert_eq!(sol.objective, via_cell.objective);
}
