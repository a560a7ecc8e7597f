//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if any fail.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use dtn_core::dtn::{
    assemble_forcing, future_data_term, global_relation_residual, solve_dtn, DtnTolerances,
    ManufacturedSolution, NeumannTrace,
};
use dtn_core::kernel::{KernelContext, KernelMatrix};
use dtn_core::oracle::{
    eval_fform, exponent_mass, exponent_region_violations, invert_via_volterra, DbarGeometry,
};
use dtn_core::quad::DampedOscillatoryRule;
use dtn_core::specfun::{cis, fresnel_tail, sqrt_pi};
use dtn_core::volterra::{estimate_order, solve_volterra, VolterraProblem};
use dtn_core::{BoundaryCurve, Result, TimeGrid};
use num_complex::Complex64;
use rand::{rngs::StdRng, Rng, SeedableRng};

type Check = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn curves() -> Vec<BoundaryCurve> {
    vec![
        BoundaryCurve::polynomial(vec![0.0, 0.0, 0.5], 1.0).unwrap(),
        BoundaryCurve::polynomial(vec![0.0, 1.0, 1.0], 1.0).unwrap(),
    ]
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn manufactured_dtn() -> Result<Outcome> {
    let mut pass = true;
    let mut worst = (0.0f64, f64::INFINITY, 0.0f64);
    for curve in curves() {
        for shift in [0.0, -1.0] {
            for boost in [0.0, 0.5] {
                let start = Instant::now();
                let sol = ManufacturedSolution::new(1.0, shift, boost)?;
                let problem = sol.problem(&curve, DtnTolerances::default())?;
                let study = estimate_order(&[128, 256, 512, 1024], |n| {
                    let grid = TimeGrid::uniform(1.0, n)?;
                    let trace = solve_dtn(&problem, &grid)?;
                    Ok(trace.f1.rel_linf_error(&sol.traces(&curve, &grid).f1))
                })?;
                let secs = start.elapsed().as_secs_f64();
                let err = study.errors[2];
                let ok = err <= 1e-3 && study.order() >= 1.0 && secs <= 60.0;
                if !ok {
                    println!(
                        "  case {} shift {shift} boost {boost}: err {err:.2e} order {:.2} time {secs:.1}s",
                        curve.kind_name(),
                        study.order()
                    );
                }
                pass &= ok;
                worst = (worst.0.max(err), worst.1.min(study.order()), worst.2.max(secs));
            }
        }
    }
    outcome(
        pass,
        format!(
            "8 cases, max err(N=512) {:.2e}, min order {:.2}, max time {:.2}s",
            worst.0, worst.1, worst.2
        ),
    )
}

fn kernel_oracle() -> Result<Outcome> {
    let rule = DampedOscillatoryRule::default();
    let mut worst = 0.0f64;
    for curve in curves() {
        let ctx = KernelContext::new(curve);
        for j in 1..=10 {
            let t = j as f64 / 10.0;
            for i in 0..10 {
                let s = t * i as f64 / 10.0;
                let closed = ctx.j_closed(s, t)?;
                let direct = ctx.j_direct(s, t, &rule)?;
                worst = worst.max((closed - direct).norm() / closed.norm());
            }
        }
    }
    outcome(worst <= 1e-6, format!("200 pairs, max rel err {worst:.2e}"))
}

fn fresnel_anchor() -> Result<Outcome> {
    let err = (fresnel_tail(0.0) - cis(-PI / 4.0) * (0.5 * sqrt_pi())).norm();
    outcome(err <= 1e-12, format!("abs err {err:.2e}"))
}

fn diagonal_asymptotics() -> Result<Outcome> {
    let delta = 1e-6f64;
    let mut worst = 0.0f64;
    for curve in curves() {
        let ctx = KernelContext::new(curve.clone());
        for j in 1..=10 {
            let t = j as f64 / 10.0;
            let near = delta.sqrt() * ctx.j_closed(t - delta, t)?;
            let limit = cis(-PI / 4.0) * (0.5 * curve.l_prime(t) * sqrt_pi());
            worst = worst.max((near - limit).norm());
        }
    }
    outcome(
        worst <= 1e-4,
        format!("delta 1e-6, 10 times on 2 curves, max err {worst:.2e}"),
    )
}

fn global_relation() -> Result<Outcome> {
    let ks = [
        c(-1.0),
        Complex64::new(-3.0, -1.0),
        Complex64::new(2.0, -2.0),
        Complex64::new(5.0, -0.5),
    ];
    let mut exact_worst = 0.0f64;
    let mut solved_worst = 0.0f64;
    for curve in curves() {
        let sol = ManufacturedSolution::new(1.0, -1.0, 0.5)?;
        let problem = sol.problem(&curve, DtnTolerances::default())?;
        let grid = TimeGrid::uniform(1.0, 512)?;
        let exact = NeumannTrace::new(grid.clone(), sol.traces(&curve, &grid).f1)?;
        let solved = solve_dtn(&problem, &grid)?;
        let max_err = solved
            .f1
            .iter()
            .zip(exact.f1.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let fin = sol.profile(1.0);
        for k in ks {
            let r = global_relation_residual(&problem, &exact, &fin, k)?;
            exact_worst = exact_worst.max(r.relative_residual());
            let r = global_relation_residual(&problem, &solved, &fin, k)?;
            solved_worst = solved_worst.max(r.residual.norm() / (max_err * exponent_mass(&curve, k)));
        }
    }
    outcome(
        exact_worst <= 1e-6 && solved_worst <= 10.0,
        format!(
            "exact traces rel residual {exact_worst:.2e}, solved residual / error scale {solved_worst:.2}"
        ),
    )
}

fn transform_round_trip() -> Result<Outcome> {
    let grid = TimeGrid::uniform(1.0, 512)?;
    let parabola = &curves()[0];
    let f = |t: f64| c((-t).exp() * (1.0 + t));
    let e1 = invert_via_volterra(&f, parabola, &grid)?.rel_linf_error(&grid.sample(f));
    let drifting = &curves()[1];
    let g = |t: f64| c((3.0 * t).sin());
    let e2 = invert_via_volterra(&g, drifting, &grid)?.rel_linf_error(&grid.sample(g));
    outcome(
        e1 <= 1e-3 && e2 <= 1e-3,
        format!("e^-t(1+t) {e1:.2e}, sin(3t) {e2:.2e}"),
    )
}

fn dbar_cross_check() -> Result<Outcome> {
    let tol = 5e-2;
    let curve = BoundaryCurve::polynomial(vec![0.0, 0.0, 0.5], 0.5)?;
    let f = |s: f64| c(1.0 + s * s);
    let grid = TimeGrid::uniform(0.5, 256)?;
    let rec = invert_via_volterra(&f, &curve, &grid)?;
    let (mut err, mut gap, mut cert) = (0.0f64, 0.0f64, 0.0f64);
    for t in [0.125, 0.25, 0.375] {
        let r = eval_fform(&f, &curve, DbarGeometry::new(&curve, t, 20.0)?, tol)?;
        err = err.max((r.value - f(t)).norm() / f(t).norm());
        let v = grid.interpolate(&rec, t);
        gap = gap.max((r.value - v).norm() / v.norm());
        cert = cert.max(r.certificate / r.value.norm().max(1.0));
    }
    outcome(
        err <= tol && gap <= tol && cert <= tol,
        format!("K_max 20, max rel err {err:.2e}, vs Volterra {gap:.2e}, doubling certificate {cert:.2e}"),
    )
}

fn sign_invariants() -> Result<Outcome> {
    let samples = 1000;
    let mut rng = StdRng::seed_from_u64(2024);
    let mut bad = [0usize; 5];
    for curve in curves() {
        let ctx = KernelContext::new(curve.clone());
        for _ in 0..samples {
            let t = rng.gen_range(1e-3..=1.0);
            let s = rng.gen_range(0.0..t);
            let x = rng.gen_range(0.0..20.0);
            let k = rng.gen_range(0.0..50.0);
            bad[0] += (ctx.lambda0(s, t)? > 0.0) as usize;
            bad[1] += (ctx.a_offset(s, t) < 0.0) as usize;
            bad[2] += (ctx.b_offset(t, x)? < 0.0) as usize;
            bad[3] += (ctx.second_exponent(k, s, t).re > 0.0) as usize;
        }
        bad[4] += exponent_region_violations(&curve, samples, 7);
    }
    outcome(
        bad.iter().all(|&b| b == 0),
        format!(
            "{samples} samples per curve; violations lambda0 {}, a {}, b {}, second exponent {}, |E| on contour {}",
            bad[0], bad[1], bad[2], bad[3], bad[4]
        ),
    )
}

fn jordan_vanishing() -> Result<Outcome> {
    let curve = curves().remove(0);
    let sol = ManufacturedSolution::new(1.0, 0.0, 0.0)?;
    let problem = sol.problem(&curve, DtnTolerances::default())?;
    let scale = assemble_forcing(&problem, &TimeGrid::uniform(1.0, 64)?)?.max_abs();
    let v = future_data_term(&curve, &sol.profile(1.0), 0.5, &DampedOscillatoryRule::default())?.norm();
    outcome(
        v <= 1e-4 * scale,
        format!("t=0.5 T=1, |term| {v:.2e}, forcing scale {scale:.2e}"),
    )
}

fn abel_identities() -> Result<Outcome> {
    let grid = TimeGrid::uniform(1.0, 512)?;
    let solve = |g: &dyn Fn(f64) -> f64, f: &dyn Fn(f64) -> f64| -> Result<f64> {
        let kernel = KernelMatrix::from_fn(&grid, |_, _| c(1.0));
        let p = VolterraProblem::new(grid.sample(|t| c(g(t))), kernel, c(1.0))?;
        Ok(solve_volterra(&p)?
            .values
            .rel_linf_error(&grid.sample(|t| c(f(t)))))
    };
    let e1 = solve(&|t| 1.0 - 2.0 * t.sqrt(), &|_| 1.0)?;
    let e2 = solve(&|t| t - 4.0 / 3.0 * t.powf(1.5), &|t| t)?;
    outcome(e1 <= 1e-4 && e2 <= 1e-4, format!("f=1 {e1:.2e}, f=t {e2:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("manufactured DtN", manufactured_dtn),
        ("kernel oracle equivalence", kernel_oracle),
        ("Fresnel anchor", fresnel_anchor),
        ("diagonal asymptotics", diagonal_asymptotics),
        ("global relation", global_relation),
        ("transform round trip", transform_round_trip),
        ("d-bar cross-check", dbar_cross_check),
        ("sign invariants", sign_invariants),
        ("Jordan vanishing", jordan_vanishing),
        ("Abel identities", abel_identities),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += !pass as usize;
        println!(
            "criterion {:>2} {}: {name}: {detail} ({:.1}s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
