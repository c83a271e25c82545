//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use lane_emden::bounds::{
    construct_auto, construct_t1, construct_t3_unchecked, lambda_floor_t3, prepare_auxiliary,
    t3_floor_conditions, verify_pair, Recipe, VerifyTolerances,
};
use lane_emden::enclosure::{
    krasnoselskii_tau, scaling_comparison_check, solve_system, uniqueness_gate, FixedPointConfig,
    GateVerdict, Start, SystemSolution,
};
use lane_emden::spectral::{
    boundedness_check, first_eigenpair_dirichlet, first_eigenpair_neumann, refinement_ladder,
    torsion,
};
use lane_emden::{
    build_grid, solve_scalar, BoundaryCondition, DomainKind, ExponentSet, Grid, ScalarField,
    ScalarSolveConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn interval(n: usize) -> Arc<Grid> {
    build_grid(DomainKind::Interval, &[0.0, 1.0], &[n]).unwrap()
}

fn tight() -> ScalarSolveConfig {
    ScalarSolveConfig { tol_res: 1e-12, ..Default::default() }
}

fn constant_run() -> Result<(SystemSolution, f64), String> {
    let start = Instant::now();
    let g = interval(257);
    let e = ExponentSet::uniform(2.0, -0.5);
    let aux = prepare_auxiliary(&g, &e, Recipe::T1, &Default::default()).map_err(|x| x.to_string())?;
    let pair = construct_t1(&g, &e, 10.0, &aux).map_err(|x| x.to_string())?;
    let sol = solve_system(&g, &e, &pair, &FixedPointConfig::default()).map_err(|x| x.to_string())?;
    Ok((sol, start.elapsed().as_secs_f64()))
}

fn criterion_1() -> Outcome {
    let (sol, secs) = constant_run()?;
    let c = 2f64.powf(2.0 / 3.0);
    let err = sol.u.values().iter().chain(sol.v.values()).map(|x| (x - c).abs()).fold(0.0, f64::max);
    let msg = format!("sup error {err:.2e}, {secs:.2} s, {} outer iterations", sol.outer_iterations);
    if sol.converged && err <= 1e-6 && secs <= 10.0 { Ok(msg) } else { Err(msg) }
}

fn criterion_2() -> Outcome {
    let values = [-0.3, -0.5, -0.7];
    let g = interval(65);
    let mut runs = 0;
    let mut worst = f64::INFINITY;
    let mut problems = Vec::new();
    for p in [2.0, 2.5] {
        for recipe in [Recipe::T1, Recipe::T3] {
            for &a1 in &values {
                for &b1 in &values {
                    for &a2 in &values {
                        for &b2 in &values {
                            let e = ExponentSet::new(p, p, a1, b1, a2, b2);
                            let aux = prepare_auxiliary(&g, &e, recipe, &Default::default()).map_err(|x| x.to_string())?;
                            let (pair, _) = construct_auto(recipe, &g, &e, &aux, 1e-8, &VerifyTolerances::default())
                                .map_err(|x| format!("{recipe} {e:?}: {x}"))?;
                            match solve_system(&g, &e, &pair, &FixedPointConfig::default()) {
                                Ok(sol) => {
                                    runs += 1;
                                    worst = worst.min(sol.enclosure_margin);
                                    if sol.enclosure_margin < -1e-10 {
                                        problems.push(format!("{recipe} {e:?}"));
                                    }
                                }
                                Err(lane_emden::Error::NotConverged(_)) => {}
                                Err(x) => problems.push(format!("{recipe} {e:?}: {x}")),
                            }
                        }
                    }
                }
            }
        }
    }
    let msg = format!("{runs}/324 converged runs, worst rectangle slack {worst:.2e}");
    if problems.is_empty() && runs > 0 { Ok(msg) } else { Err(format!("{msg}; {}", problems.join("; "))) }
}

fn torsion_error(n: usize) -> Result<(f64, f64), String> {
    let g = interval(n);
    let t = torsion(&g, 2.0, BoundaryCondition::DirichletZero, &tight()).map_err(|x| x.to_string())?;
    let err = (0..g.len())
        .map(|k| {
            let x = g.point(k)[0];
            let exact = 1.0 - (x - 0.5).cosh() / 0.5f64.cosh();
            (t.field().values()[k] - exact).abs()
        })
        .fold(0.0, f64::max);
    Ok((err, t.field().sup_norm()))
}

fn criterion_3() -> Outcome {
    let (coarse, _) = torsion_error(65)?;
    let (fine, _) = torsion_error(129)?;
    let ratio = coarse / fine;
    let msg = format!("errors {coarse:.3e} -> {fine:.3e}, ratio {ratio:.3}");
    if (3.2..=4.8).contains(&ratio) { Ok(msg) } else { Err(msg) }
}

fn criterion_4() -> Outcome {
    let g = interval(513);
    let cfg = ScalarSolveConfig { tol_res: 1e-8, ..Default::default() };
    let pair = first_eigenpair_dirichlet(&g, 2.0, &cfg).map_err(|x| x.to_string())?;
    let lam_err = (pair.lambda - (1.0 + PI * PI)).abs();
    let phi_err = (0..g.len())
        .map(|k| (pair.phi.values()[k] - (PI * g.point(k)[0]).sin()).abs())
        .fold(0.0, f64::max);
    let msg = format!("lambda {:.6} (error {lam_err:.2e}), eigenfunction error {phi_err:.2e}", pair.lambda);
    if lam_err <= 1e-3 && phi_err <= 1e-3 { Ok(msg) } else { Err(msg) }
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [2.0, 2.5, 3.0] {
        for g in [interval(65), build_grid(DomainKind::Rectangle, &[0.0, 1.0, 0.0, 1.0], &[17, 17]).unwrap()] {
            let t = torsion(&g, p, BoundaryCondition::NeumannZero, &tight()).map_err(|x| x.to_string())?;
            let eig = first_eigenpair_neumann(&g, p).map_err(|x| x.to_string())?;
            worst = worst
                .max(t.field().values().iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max))
                .max(eig.phi.values().iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max))
                .max((eig.lambda - 1.0).abs());
        }
    }
    let msg = format!("worst deviation {worst:.2e}");
    if worst <= 1e-10 { Ok(msg) } else { Err(msg) }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g = interval(65);
    let cfg = ScalarSolveConfig { tol_res: 1e-11, ..Default::default() };
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let f: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..2.0)).collect();
        let gap: Vec<f64> = (0..g.len()).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) }).collect();
        let ff = ScalarField::new(g.clone(), f.clone()).unwrap();
        let gg = ScalarField::new(g.clone(), f.iter().zip(&gap).map(|(a, b)| a + b).collect()).unwrap();
        for bc in [BoundaryCondition::DirichletZero, BoundaryCondition::NeumannZero] {
            for p in [2.0, 2.5] {
                let wf = solve_scalar(&g, p, &ff, bc, &cfg).map_err(|x| x.to_string())?.solution;
                let wg = solve_scalar(&g, p, &gg, bc, &cfg).map_err(|x| x.to_string())?.solution;
                let m = wg.values().iter().zip(wf.values()).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
                worst = worst.min(m);
                if m < -1e-10 {
                    violations += 1;
                }
            }
        }
    }
    let msg = format!("200 ordered solves, {violations} violations, worst slack {worst:.2e}");
    if violations == 0 { Ok(msg) } else { Err(msg) }
}

fn criterion_7() -> Outcome {
    let g = interval(257);
    let e = ExponentSet::uniform(2.0, -0.5);
    let gate = uniqueness_gate(&e);
    let aux = prepare_auxiliary(&g, &e, Recipe::T1, &Default::default()).map_err(|x| x.to_string())?;
    let pair = construct_t1(&g, &e, 10.0, &aux).map_err(|x| x.to_string())?;
    let base = FixedPointConfig {
        tol_outer: 1e-12,
        inner: ScalarSolveConfig { tol_res: 1e-13, ..Default::default() },
        ..Default::default()
    };
    let s1 = solve_system(&g, &e, &pair, &FixedPointConfig { start: Start::FromLower, ..base.clone() })
        .map_err(|x| x.to_string())?;
    let s2 = solve_system(&g, &e, &pair, &FixedPointConfig { start: Start::FromUpper, ..base.clone() })
        .map_err(|x| x.to_string())?;
    let dist = s1.u.sup_distance(&s2.u).unwrap().max(s1.v.sup_distance(&s2.v).unwrap());
    let tau = krasnoselskii_tau(&s1, &s2).map_err(|x| x.to_string())?;
    let scaling = scaling_comparison_check(&s1, &s2, tau, &e, 10.0 * base.tol_outer * 2.0).map_err(|x| x.to_string())?;
    let msg = format!(
        "gate {:?} (gamma hat {:?}), distance {dist:.2e}, tau {tau:.12}, scaling rounds {}/{}",
        gate.verdict, gate.gamma_hats, scaling.rounds[0].passed, scaling.rounds[1].passed
    );
    let ok = gate.verdict == GateVerdict::Pass
        && gate.gamma_hats.iter().all(|&h| (h - 0.25).abs() < 1e-15)
        && dist <= 1e-6
        && (tau - 1.0).abs() <= 1e-6
        && scaling.passed;
    if ok { Ok(msg) } else { Err(msg) }
}

fn criterion_8() -> Outcome {
    let (_, y_sup) = torsion_error(129)?;
    let e = ExponentSet::uniform(2.0, -0.5);
    let floor = lambda_floor_t3(&e, [1.0, 1.0], [y_sup, y_sup]);
    let expected = 2.0 * (4.0 + y_sup);
    let conditions = t3_floor_conditions(&e, floor, [1.0, 1.0], [y_sup, y_sup]);
    let msg = format!(
        "y_sup {y_sup:.6}, floor {floor:.12}, expected 2(4 + y_sup) = {expected:.12}, floor conditions hold: {conditions}"
    );
    if (floor - expected).abs() <= 1e-12 && conditions { Ok(msg) } else { Err(msg) }
}

fn criterion_9() -> Outcome {
    let g = interval(65);
    let e = ExponentSet::uniform(2.0, -0.5);
    let aux = prepare_auxiliary(&g, &e, Recipe::T3, &Default::default()).map_err(|x| x.to_string())?;
    let pair = construct_t3_unchecked(&g, &e, 1.5, &aux).map_err(|x| x.to_string())?;
    let cert = verify_pair(&pair, &e, 1e-8, &VerifyTolerances::default()).map_err(|x| x.to_string())?;
    let worst = cert.super_inequality.iter().map(|m| m.worst).fold(f64::INFINITY, f64::min);
    let violated = cert.super_inequality.iter().any(|m| !m.passed);
    let msg = format!("supersolution worst margin {worst:.3e}, certificate passed: {}", cert.passed);
    if violated && worst < 0.0 && !cert.passed { Ok(msg) } else { Err(msg) }
}

fn criterion_10() -> Outcome {
    let base = build_grid(DomainKind::Rectangle, &[0.0, 1.0, 0.0, 1.0], &[33, 33]).unwrap();
    let ladder = refinement_ladder(&base, 3).map_err(|x| x.to_string())?;
    let report = boundedness_check(&ladder, 2.0, -0.4, &Default::default()).map_err(|x| x.to_string())?;
    let msg = format!("sup norms {:?}, drift {:.3}%", report.sup_norms, 100.0 * report.drift);
    if report.condition_holds && report.drift <= 0.05 { Ok(msg) } else { Err(msg) }
}

fn criterion_11() -> Outcome {
    let (a, _) = constant_run()?;
    let (b, _) = constant_run()?;
    let same = a.u.to_csv_string() == b.u.to_csv_string() && a.v.to_csv_string() == b.v.to_csv_string();
    let msg = format!("{} bytes per field", a.u.to_csv_string().len());
    if same { Ok(msg) } else { Err(msg) }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("constant solution 2^(2/3)", criterion_1),
        ("enclosure invariant", criterion_2),
        ("Dirichlet torsion second order", criterion_3),
        ("Dirichlet first eigenpair", criterion_4),
        ("Neumann analytic pairs", criterion_5),
        ("comparison principle", criterion_6),
        ("uniqueness experiment", criterion_7),
        ("T3 lambda floor arithmetic", criterion_8),
        ("certificate detects T3 below floor", criterion_9),
        ("singular torsion boundedness ladder", criterion_10),
        ("deterministic CSV output", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
