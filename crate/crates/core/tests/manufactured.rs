use dtn_core::dtn::{
    global_relation_residual, solve_dtn, solve_dtn_with, DtnProblem, DtnTolerances, ManufacturedSolution,
    NeumannTrace, SumBoundary, SumProfile,
};
use dtn_core::kernel::Normalisation;
use dtn_core::volterra::estimate_order;
use dtn_core::{BoundaryCurve, TimeGrid};
use num_complex::Complex64;

fn parabola() -> BoundaryCurve {
    BoundaryCurve::polynomial(vec![0.0, 0.0, 0.5], 1.0).unwrap()
}

fn drifting() -> BoundaryCurve {
    BoundaryCurve::polynomial(vec![0.0, 1.0, 1.0], 1.0).unwrap()
}

fn sample_ks() -> [Complex64; 5] {
    [
        Complex64::new(-1.0, 0.0),
        Complex64::new(-3.0, -1.0),
        Complex64::new(2.0, -2.0),
        Complex64::new(5.0, -0.5),
        Complex64::new(0.5, -0.25),
    ]
}

#[test]
fn recovers_wave_packet_traces_on_both_curves() {
    for curve in [parabola(), drifting()] {
        for (shift, boost) in [(0.0, 0.0), (-1.0, 0.0), (0.0, 0.5), (-1.0, 0.5)] {
            let sol = ManufacturedSolution::new(1.0, shift, boost).unwrap();
            let problem = sol.problem(&curve, DtnTolerances::default()).unwrap();
            let grid = TimeGrid::uniform(1.0, 512).unwrap();
            let trace = solve_dtn(&problem, &grid).unwrap();
            let err = trace.f1.rel_linf_error(&sol.traces(&curve, &grid).f1);
            assert!(
                err <= 1e-3,
                "{} shift {shift} boost {boost}: {err:e}",
                curve.kind_name()
            );
        }
    }
}

#[test]
fn error_decays_at_least_linearly() {
    let curve = drifting();
    let sol = ManufacturedSolution::new(1.0, -1.0, 0.5).unwrap();
    let problem = sol.problem(&curve, DtnTolerances::default()).unwrap();
    let study = estimate_order(&[64, 128, 256], |n| {
        let grid = TimeGrid::uniform(1.0, n)?;
        let trace = solve_dtn(&problem, &grid)?;
        Ok(trace.f1.rel_linf_error(&sol.traces(&curve, &grid).f1))
    })
    .unwrap();
    assert!(study.order() >= 1.0, "{study:?}");
}

#[test]
fn printed_constants_leave_an_order_one_error() {
    let curve = parabola();
    let sol = ManufacturedSolution::new(1.0, 0.0, 0.0).unwrap();
    let problem = sol.problem(&curve, DtnTolerances::default()).unwrap();
    let grid = TimeGrid::uniform(1.0, 128).unwrap();
    let exact = sol.traces(&curve, &grid).f1;
    let s = solve_dtn_with(&problem, &grid, Normalisation::TwoThirds).unwrap();
    assert!(s.trace.f1.rel_linf_error(&exact) > 0.1);
    let s = solve_dtn_with(&problem, &grid, Normalisation::Contour).unwrap();
    assert!(s.trace.f1.rel_linf_error(&exact) < 1e-3);
}

#[test]
fn global_relation_holds_for_exact_traces() {
    let curve = parabola();
    let sol = ManufacturedSolution::new(1.0, -1.0, 0.5).unwrap();
    let problem = sol.problem(&curve, DtnTolerances::default()).unwrap();
    let grid = TimeGrid::uniform(1.0, 512).unwrap();
    let tr = NeumannTrace::new(grid.clone(), sol.traces(&curve, &grid).f1).unwrap();
    let fin = sol.profile(1.0);
    for k in sample_ks() {
        let r = global_relation_residual(&problem, &tr, &fin, k).unwrap();
        assert!(r.relative_residual() <= 1e-6, "{k}: {r:?}");
    }
}

#[test]
fn global_relation_is_sensitive_to_the_neumann_trace() {
    let curve = parabola();
    let sol = ManufacturedSolution::new(1.0, 0.0, 0.0).unwrap();
    let problem = sol.problem(&curve, DtnTolerances::default()).unwrap();
    let grid = TimeGrid::uniform(1.0, 256).unwrap();
    let exact = sol.traces(&curve, &grid).f1;
    let scaled: Vec<Complex64> = exact.iter().map(|z| z * 1.01).collect();
    let fin = sol.profile(1.0);
    let k = Complex64::new(-1.0, 0.0);
    let base = global_relation_residual(
        &problem,
        &NeumannTrace::new(grid.clone(), exact).unwrap(),
        &fin,
        k,
    )
    .unwrap();
    let bumped = global_relation_residual(
        &problem,
        &NeumannTrace::new(grid, scaled.into()).unwrap(),
        &fin,
        k,
    )
    .unwrap();
    let growth = (bumped.residual - base.residual).norm();
    let expected = 0.01 * base.neumann.norm();
    assert!(
        (growth - expected).abs() <= 1e-3 * expected,
        "{growth} vs {expected}"
    );
}

#[test]
fn solved_trace_satisfies_the_global_relation() {
    let curve = parabola();
    let sol = ManufacturedSolution::new(1.0, 0.0, 0.5).unwrap();
    let problem = sol.problem(&curve, DtnTolerances::default()).unwrap();
    let grid = TimeGrid::uniform(1.0, 256).unwrap();
    let trace = solve_dtn(&problem, &grid).unwrap();
    let exact = sol.traces(&curve, &grid).f1;
    let max_err = trace
        .f1
        .iter()
        .zip(exact.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let fin = sol.profile(1.0);
    for k in sample_ks() {
        let r = global_relation_residual(&problem, &trace, &fin, k).unwrap();
        let scale = max_err * dtn_core::oracle::exponent_mass(&curve, k);
        assert!(
            r.residual.norm() <= 10.0 * scale,
            "{k}: {:e} vs {scale:e}",
            r.residual.norm()
        );
    }
}

#[test]
fn superposition_of_two_packets() {
    let curve = drifting();
    let a = ManufacturedSolution::new(1.0, 0.0, 0.0).unwrap();
    let b = ManufacturedSolution::new(0.5, -1.0, 0.5).unwrap();
    let grid = TimeGrid::uniform(1.0, 128).unwrap();
    let sum = DtnProblem::new(
        curve.clone(),
        Box::new(SumBoundary(vec![
            Box::new(a.dirichlet(&curve)),
            Box::new(b.dirichlet(&curve)),
        ])),
        Box::new(SumProfile(vec![Box::new(a.initial()), Box::new(b.initial())])),
        DtnTolerances::default(),
    )
    .unwrap();
    let joint = solve_dtn(&sum, &grid).unwrap();
    let ta = solve_dtn(&a.problem(&curve, DtnTolerances::default()).unwrap(), &grid).unwrap();
    let tb = solve_dtn(&b.problem(&curve, DtnTolerances::default()).unwrap(), &grid).unwrap();
    let parts: Vec<Complex64> = ta.f1.iter().zip(tb.f1.iter()).map(|(x, y)| x + y).collect();
    assert!(joint.f1.rel_linf_error(&parts) < 1e-9);
    let exact: Vec<Complex64> = a
        .traces(&curve, &grid)
        .f1
        .iter()
        .zip(b.traces(&curve, &grid).f1.iter())
        .map(|(x, y)| x + y)
        .collect();
    assert!(joint.f1.rel_linf_error(&exact) < 1e-3);
}
