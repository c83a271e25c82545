//! Truncated fixed-point iteration for the coupled system and the
//! two-start uniqueness experiment.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bounds::SubSupPair;
use crate::error::{Error, Result};
use crate::exponents::{validate_exponents, ExponentSet};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::plap::{nodal_residual_smoothed, solve_scalar_from, BoundaryCondition, ScalarSolveConfig};

/// Initial iterate of the outer loop.
#[derive(Debug, Clone)]
pub enum Start {
    FromLower,
    FromUpper,
    Custom { u: ScalarField, v: ScalarField },
}

#[derive(Debug, Clone)]
pub struct FixedPointConfig {
    /// Stop once the sup-norm change of both components drops below this.
    pub tol_outer: f64,
    pub max_outer_iterations: usize,
    pub start: Start,
    pub inner: ScalarSolveConfig,
    /// `θ` in `new ← (1 - θ) old + θ solve`.
    pub relaxation: f64,
    /// Allowed excursion outside the barrier rectangle.
    pub enclosure_tol: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            tol_outer: 1e-8,
            max_outer_iterations: 500,
            start: Start::FromLower,
            inner: ScalarSolveConfig::default(),
            relaxation: 1.0,
            enclosure_tol: 1e-10,
        }
    }
}

impl FixedPointConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_outer > 0.0) {
            return Err(Error::Config(format!("tol_outer must be positive, got {}", self.tol_outer)));
        }
        if self.max_outer_iterations == 0 {
            return Err(Error::Config("max_outer must be at least 1".into()));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::Config(format!("relaxation must lie in (0, 1], got {}", self.relaxation)));
        }
        if !(self.enclosure_tol >= 0.0) {
            return Err(Error::Config(format!("enclosure tolerance must be nonnegative, got {}", self.enclosure_tol)));
        }
        self.inner.validate()
    }
}

#[derive(Debug, Clone)]
pub struct SystemSolution {
    pub u: ScalarField,
    pub v: ScalarField,
    pub outer_iterations: usize,
    pub final_change: f64,
    pub change_history: Vec<f64>,
    pub converged: bool,
    /// Nodal residuals of the two equations at the returned pair.
    pub residual_u: ScalarField,
    pub residual_v: ScalarField,
    /// Nodewise membership in the barrier rectangle within `enclosure_tol`.
    pub enclosure: bool,
    /// Smallest slack to the rectangle (negative when outside).
    pub enclosure_margin: f64,
    /// Sup-norm of the one-sided normal differences of `u` and `v`.
    pub flux_norm: f64,
    pub flux_tol: f64,
}

impl SystemSolution {
    pub fn flux_ok(&self) -> bool {
        self.flux_norm <= self.flux_tol
    }

    pub fn summary(&self) -> SystemSummary {
        SystemSummary {
            outer_iterations: self.outer_iterations,
            final_change: self.final_change,
            converged: self.converged,
            residual_u: self.residual_u.sup_norm(),
            residual_v: self.residual_v.sup_norm(),
            enclosure: self.enclosure,
            enclosure_margin: self.enclosure_margin,
            flux_norm: self.flux_norm,
            flux_tol: self.flux_tol,
            u_min: self.u.min(),
            u_max: self.u.max(),
            v_min: self.v.min(),
            v_max: self.v.max(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSummary {
    pub outer_iterations: usize,
    pub final_change: f64,
    pub converged: bool,
    pub residual_u: f64,
    pub residual_v: f64,
    pub enclosure: bool,
    pub enclosure_margin: f64,
    pub flux_norm: f64,
    pub flux_tol: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

/// Nodewise clamp of `z` into `[lower, upper]`.
pub fn truncate(z: &ScalarField, lower: &ScalarField, upper: &ScalarField) -> Result<ScalarField> {
    z.ensure_same_grid(lower)?;
    z.ensure_same_grid(upper)?;
    let (lo, hi) = (lower.values(), upper.values());
    if let Some(k) = (0..lo.len()).find(|&k| !(lo[k] <= hi[k])) {
        return Err(Error::Precondition(format!(
            "truncation band is not ordered at node {k}: lower {} > upper {}",
            lo[k], hi[k]
        )));
    }
    let values = z.values().iter().zip(lo.iter().zip(hi)).map(|(&x, (&a, &b))| x.clamp(a, b)).collect();
    ScalarField::new(z.grid().clone(), values)
}

fn power(grid: &Grid, node: usize, base: f64, exponent: f64) -> Result<f64> {
    if exponent == 0.0 {
        return Ok(1.0);
    }
    if base > 0.0 {
        return Ok(base.powf(exponent));
    }
    if base == 0.0 && exponent > 0.0 {
        return Ok(0.0);
    }
    Err(Error::Singularity {
        node,
        coords: grid.point(node).to_vec(),
        base,
        exponent,
    })
}

fn power_sum(u: &ScalarField, v: &ScalarField, a: f64, b: f64) -> Result<ScalarField> {
    u.ensure_same_grid(v)?;
    let grid = u.grid();
    let values = (0..u.len())
        .map(|k| Ok(power(grid, k, u.values()[k], a)? + power(grid, k, v.values()[k], b)?))
        .collect::<Result<Vec<f64>>>()?;
    ScalarField::new(grid.clone(), values)
}

/// `u^{alpha1} + v^{beta1}` nodewise.
pub fn rhs_f1(u: &ScalarField, v: &ScalarField, e: &ExponentSet) -> Result<ScalarField> {
    power_sum(u, v, e.alpha1, e.beta1)
}

/// `u^{alpha2} + v^{beta2}` nodewise.
pub fn rhs_f2(u: &ScalarField, v: &ScalarField, e: &ExponentSet) -> Result<ScalarField> {
    power_sum(u, v, e.alpha2, e.beta2)
}

/// One application of the truncated solution map: both decoupled Neumann
/// problems with right-hand sides frozen at the truncated `(u, v)`.
/// The previous iterate warm-starts the inner solves.
pub fn picard_step(
    e: &ExponentSet,
    pair: &SubSupPair,
    u: &ScalarField,
    v: &ScalarField,
    inner: &ScalarSolveConfig,
) -> Result<(ScalarField, ScalarField)> {
    let grid = pair.grid();
    let tu = truncate(u, &pair.u_lower, &pair.u_upper)?;
    let tv = truncate(v, &pair.v_lower, &pair.v_upper)?;
    let f1 = rhs_f1(&tu, &tv, e)?;
    let f2 = rhs_f2(&tu, &tv, e)?;
    let bc = BoundaryCondition::NeumannZero;
    let (ru, rv) = rayon::join(
        || solve_scalar_from(grid, e.p1, &f1, bc, inner, u),
        || solve_scalar_from(grid, e.p2, &f2, bc, inner, v),
    );
    Ok((ru?.solution, rv?.solution))
}

fn enclosure_margin(pair: &SubSupPair, u: &ScalarField, v: &ScalarField) -> (f64, usize) {
    let mut worst = f64::INFINITY;
    let mut node = 0;
    for (w, lo, hi) in [(u, &pair.u_lower, &pair.u_upper), (v, &pair.v_lower, &pair.v_upper)] {
        for k in 0..w.len() {
            let m = (w.values()[k] - lo.values()[k]).min(hi.values()[k] - w.values()[k]);
            if m < worst {
                worst = m;
                node = k;
            }
        }
    }
    (worst, node)
}

fn flux_norm(grid: &Grid, fields: [&ScalarField; 2]) -> f64 {
    let mut worst: f64 = 0.0;
    for k in grid.boundary_nodes() {
        if let Some((j, h)) = grid.inward_neighbor(k) {
            for w in fields {
                worst = worst.max(((w.values()[k] - w.values()[j]) / h).abs());
            }
        }
    }
    worst
}

fn finish(
    e: &ExponentSet,
    pair: &SubSupPair,
    cfg: &FixedPointConfig,
    u: ScalarField,
    v: ScalarField,
    outer_iterations: usize,
    history: Vec<f64>,
    converged: bool,
) -> Result<SystemSolution> {
    let grid = pair.grid().clone();
    let tu = truncate(&u, &pair.u_lower, &pair.u_upper)?;
    let tv = truncate(&v, &pair.v_lower, &pair.v_upper)?;
    let bc = BoundaryCondition::NeumannZero;
    let residual_u = nodal_residual_smoothed(&u, e.p1, &rhs_f1(&tu, &tv, e)?, bc, cfg.inner.eps_grad)?;
    let residual_v = nodal_residual_smoothed(&v, e.p2, &rhs_f2(&tu, &tv, e)?, bc, cfg.inner.eps_grad)?;
    let (margin, _) = enclosure_margin(pair, &u, &v);
    Ok(SystemSolution {
        flux_norm: flux_norm(&grid, [&u, &v]),
        flux_tol: 10.0 * grid.max_spacing(),
        final_change: history.last().copied().unwrap_or(f64::INFINITY),
        change_history: history,
        outer_iterations,
        converged,
        residual_u,
        residual_v,
        enclosure: margin >= -cfg.enclosure_tol,
        enclosure_margin: margin,
        u,
        v,
    })
}

/// Picard iteration of the truncated solution map from the configured
/// start. On success the returned pair lies in the barrier rectangle;
/// an excursion beyond `enclosure_tol` is an [`Error::Enclosure`], and
/// running out of outer iterations yields [`Error::NotConverged`] with the
/// iterate of smallest change.
pub fn solve_system(grid: &Arc<Grid>, e: &ExponentSet, pair: &SubSupPair, cfg: &FixedPointConfig) -> Result<SystemSolution> {
    cfg.validate()?;
    let report = validate_exponents(e, grid.dimension());
    if !report.valid {
        let names: Vec<String> = report.failures().iter().map(|c| format!("{} = {}", c.name, c.value)).collect();
        return Err(Error::Precondition(format!(
            "exponents outside the singular regime: {}",
            names.join(", ")
        )));
    }
    if !Arc::ptr_eq(grid, pair.grid()) && grid.spec() != pair.grid().spec() {
        return Err(Error::Shape("barrier pair lives on a different grid".into()));
    }
    let (mut u, mut v) = match &cfg.start {
        Start::FromLower => (pair.u_lower.clone(), pair.v_lower.clone()),
        Start::FromUpper => (pair.u_upper.clone(), pair.v_upper.clone()),
        Start::Custom { u, v } => {
            u.ensure_same_grid(&pair.u_lower)?;
            v.ensure_same_grid(&pair.u_lower)?;
            (u.clone(), v.clone())
        }
    };
    let theta = cfg.relaxation;
    let mut history = Vec::new();
    let mut best: Option<(f64, usize, ScalarField, ScalarField)> = None;
    for it in 1..=cfg.max_outer_iterations {
        let (su, sv) = picard_step(e, pair, &u, &v, &cfg.inner)?;
        let (nu, nv) = if theta == 1.0 {
            (su, sv)
        } else {
            (
                u.zip_map(&su, |a, b| (1.0 - theta) * a + theta * b)?,
                v.zip_map(&sv, |a, b| (1.0 - theta) * a + theta * b)?,
            )
        };
        let change = nu.sup_distance(&u)?.max(nv.sup_distance(&v)?);
        history.push(change);
        u = nu;
        v = nv;
        if change < cfg.tol_outer {
            let (margin, node) = enclosure_margin(pair, &u, &v);
            if margin < -cfg.enclosure_tol {
                return Err(Error::Enclosure {
                    node,
                    detail: format!(
                        "solution leaves the barrier rectangle by {:e} at {:?}",
                        -margin,
                        grid.point(node)
                    ),
                });
            }
            return finish(e, pair, cfg, u, v, it, history, true);
        }
        if best.as_ref().map_or(true, |b| change < b.0) {
            best = Some((change, it, u.clone(), v.clone()));
        }
    }
    let (_, _, bu, bv) = best.expect("at least one outer iteration");
    let sol = finish(e, pair, cfg, bu, bv, cfg.max_outer_iterations, history, false)?;
    Err(Error::NotConverged(Box::new(sol)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateVerdict {
    Pass,
    Fail,
    /// `alpha2` or `beta1` lies outside `(-1, 0)`.
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub verdict: GateVerdict,
    pub gammas: [f64; 2],
    pub gamma_hats: [f64; 2],
}

/// Uniqueness criterion: with `alpha2, beta1 ∈ (-1, 0)`, passes iff
/// `γ̂_i < p_i - 1` for both components.
pub fn uniqueness_gate(e: &ExponentSet) -> GateReport {
    let gammas = e.gammas();
    let gamma_hats = e.gamma_hats();
    let inside = |a: f64| a > -1.0 && a < 0.0;
    let verdict = if !(inside(e.alpha2) && inside(e.beta1)) {
        GateVerdict::Inapplicable
    } else if gamma_hats[0] < e.p1 - 1.0 && gamma_hats[1] < e.p2 - 1.0 {
        GateVerdict::Pass
    } else {
        GateVerdict::Fail
    };
    GateReport { verdict, gammas, gamma_hats }
}

/// Largest `τ` with `τ u2 <= u1` and `τ v2 <= v1` nodewise.
pub fn krasnoselskii_tau(s1: &SystemSolution, s2: &SystemSolution) -> Result<f64> {
    for (name, f) in [("u1", &s1.u), ("v1", &s1.v), ("u2", &s2.u), ("v2", &s2.v)] {
        if let Some(k) = f.values().iter().position(|&x| !(x > 0.0)) {
            return Err(Error::Precondition(format!(
                "{name} is not positive at node {k} (value {})",
                f.values()[k]
            )));
        }
    }
    s1.u.ensure_same_grid(&s2.u)?;
    let ratio = |a: &ScalarField, b: &ScalarField| {
        a.values().iter().zip(b.values()).map(|(x, y)| x / y).fold(f64::INFINITY, f64::min)
    };
    Ok(ratio(&s1.u, &s2.u).min(ratio(&s1.v, &s2.v)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRound {
    /// Exponents of `τ` applied to the `u` and `v` comparisons.
    pub exponents: [f64; 2],
    pub u_margin: f64,
    pub v_margin: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub tau: f64,
    pub tol: f64,
    pub rounds: [ScalingRound; 2],
    pub passed: bool,
}

fn worst_margin(a: &ScalarField, b: &ScalarField, factor: f64) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| x - factor * y).fold(f64::INFINITY, f64::min)
}

/// Scaled comparisons behind the bootstrap of `τ`: first
/// `u2 >= τ^{γ1/(p1-1)} u1`, `v2 >= τ^{γ2/(p2-1)} v1`, then
/// `u1 >= τ^{γ̂1/(p1-1)} u2`, `v1 >= τ^{γ̂2/(p2-1)} v2`, each within `tol`.
/// `τ` slightly above one from rounding is clamped to one.
pub fn scaling_comparison_check(
    s1: &SystemSolution,
    s2: &SystemSolution,
    tau: f64,
    e: &ExponentSet,
    tol: f64,
) -> Result<ScalingReport> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Precondition(format!("tau must be positive, got {tau}")));
    }
    s1.u.ensure_same_grid(&s2.u)?;
    let t = tau.min(1.0);
    let g = e.gammas();
    let gh = e.gamma_hats();
    let round = |exponents: [f64; 2], (au, bu): (&ScalarField, &ScalarField), (av, bv): (&ScalarField, &ScalarField)| {
        let u_margin = worst_margin(au, bu, t.powf(exponents[0]));
        let v_margin = worst_margin(av, bv, t.powf(exponents[1]));
        ScalingRound { exponents, u_margin, v_margin, passed: u_margin >= -tol && v_margin >= -tol }
    };
    let first = round(
        [g[0] / (e.p1 - 1.0), g[1] / (e.p2 - 1.0)],
        (&s2.u, &s1.u),
        (&s2.v, &s1.v),
    );
    let second = round(
        [gh[0] / (e.p1 - 1.0), gh[1] / (e.p2 - 1.0)],
        (&s1.u, &s2.u),
        (&s1.v, &s2.v),
    );
    let passed = first.passed && second.passed;
    Ok(ScalingReport { tau, tol, rounds: [first, second], passed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub gate: GateReport,
    pub tau: f64,
    pub scaling: ScalingReport,
    pub sup_distance: f64,
    /// Threshold for `sup_distance`, `10 tol_outer` scaled by the solution size.
    pub distance_tol: f64,
    pub lower_start: SystemSummary,
    pub upper_start: SystemSummary,
    pub passed: bool,
}

/// Solves from the lower and the upper corner of the rectangle and compares
/// the two limits.
pub fn uniqueness_experiment(
    grid: &Arc<Grid>,
    e: &ExponentSet,
    pair: &SubSupPair,
    cfg: &FixedPointConfig,
) -> Result<(UniquenessReport, SystemSolution, SystemSolution)> {
    let gate = uniqueness_gate(e);
    let lower_cfg = FixedPointConfig { start: Start::FromLower, ..cfg.clone() };
    let upper_cfg = FixedPointConfig { start: Start::FromUpper, ..cfg.clone() };
    let (s1, s2) = rayon::join(
        || solve_system(grid, e, pair, &lower_cfg),
        || solve_system(grid, e, pair, &upper_cfg),
    );
    let (s1, s2) = (s1?, s2?);
    let scale = [&s1.u, &s1.v, &s2.u, &s2.v].iter().map(|f| f.sup_norm()).fold(1.0, f64::max);
    let tol = 10.0 * cfg.tol_outer * scale;
    let tau = krasnoselskii_tau(&s1, &s2)?;
    let scaling = scaling_comparison_check(&s1, &s2, tau, e, tol)?;
    let sup_distance = s1.u.sup_distance(&s2.u)?.max(s1.v.sup_distance(&s2.v)?);
    let passed = gate.verdict == GateVerdict::Pass && scaling.passed && sup_distance <= tol;
    let report = UniquenessReport {
        gate,
        tau,
        scaling,
        sup_distance,
        distance_tol: tol,
        lower_start: s1.summary(),
        upper_start: s2.summary(),
        passed,
    };
    Ok((report, s1, s2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{construct_t1, prepare_auxiliary, Recipe};
    use crate::grid::{build_grid, DomainKind};

    fn unit(n: usize) -> Arc<Grid> {
        build_grid(DomainKind::Interval, &[0.0, 1.0], &[n]).unwrap()
    }

    #[test]
    fn truncate_examples() {
        let g = unit(5);
        let c = |x| ScalarField::constant(g.clone(), x);
        assert_eq!(truncate(&c(0.0), &c(1.0), &c(2.0)).unwrap().values(), c(1.0).values());
        assert_eq!(truncate(&c(1.5), &c(1.0), &c(2.0)).unwrap().values(), c(1.5).values());
        assert_eq!(truncate(&c(5.0), &c(1.0), &c(2.0)).unwrap().values(), c(2.0).values());
        assert!(matches!(truncate(&c(0.0), &c(2.0), &c(1.0)), Err(Error::Precondition(_))));
    }

    #[test]
    fn rhs_examples() {
        let g = unit(5);
        let c = |x| ScalarField::constant(g.clone(), x);
        let e = ExponentSet::uniform(2.0, -0.5);
        assert!(rhs_f1(&c(1.0), &c(1.0), &e).unwrap().values().iter().all(|&x| x == 2.0));
        assert!(rhs_f2(&c(4.0), &c(4.0), &e).unwrap().values().iter().all(|&x| x == 1.0));
        match rhs_f1(&c(0.0), &c(1.0), &e) {
            Err(Error::Singularity { node, exponent, .. }) => {
                assert_eq!(node, 0);
                assert_eq!(exponent, -0.5);
            }
            other => panic!("{other:?}"),
        }
    }

    fn t1_setup(n: usize) -> (Arc<Grid>, ExponentSet, SubSupPair) {
        let g = unit(n);
        let e = ExponentSet::uniform(2.0, -0.5);
        let aux = prepare_auxiliary(&g, &e, Recipe::T1, &Default::default()).unwrap();
        let pair = construct_t1(&g, &e, 10.0, &aux).unwrap();
        (g, e, pair)
    }

    #[test]
    fn constant_solution() {
        let (g, e, pair) = t1_setup(33);
        let sol = solve_system(&g, &e, &pair, &Default::default()).unwrap();
        let c = 2f64.powf(2.0 / 3.0);
        assert!(sol.converged && sol.enclosure && sol.flux_ok());
        for w in [&sol.u, &sol.v] {
            assert!(w.values().iter().all(|&x| (x - c).abs() < 1e-7));
        }
    }

    #[test]
    fn fixed_point_consistency() {
        let (g, e, pair) = t1_setup(17);
        let cfg = FixedPointConfig::default();
        let sol = solve_system(&g, &e, &pair, &cfg).unwrap();
        let (u, v) = picard_step(&e, &pair, &sol.u, &sol.v, &cfg.inner).unwrap();
        assert!(u.sup_distance(&sol.u).unwrap() <= 10.0 * cfg.tol_outer);
        assert!(v.sup_distance(&sol.v).unwrap() <= 10.0 * cfg.tol_outer);
    }

    #[test]
    fn invalid_exponents_rejected() {
        let (g, _, pair) = t1_setup(9);
        let mut e = ExponentSet::uniform(2.0, -0.5);
        e.alpha1 = -1.5;
        assert!(matches!(solve_system(&g, &e, &pair, &Default::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn iteration_limit_carries_iterate() {
        let (g, e, pair) = t1_setup(9);
        let cfg = FixedPointConfig { max_outer_iterations: 3, ..Default::default() };
        match solve_system(&g, &e, &pair, &cfg) {
            Err(Error::NotConverged(sol)) => {
                assert!(!sol.converged);
                assert_eq!(sol.outer_iterations, 3);
                assert_eq!(sol.change_history.len(), 3);
            }
            other => panic!("{:?}", other.map(|s| s.outer_iterations)),
        }
    }

    #[test]
    fn gate_examples() {
        let r = uniqueness_gate(&ExponentSet::uniform(2.0, -0.5));
        assert_eq!(r.verdict, GateVerdict::Pass);
        assert_eq!(r.gammas, [0.5, 0.5]);
        assert_eq!(r.gamma_hats, [0.25, 0.25]);
        let r = uniqueness_gate(&ExponentSet::uniform(2.0, -0.9));
        assert_eq!(r.verdict, GateVerdict::Pass);
        assert!((r.gamma_hats[0] - 0.81).abs() < 1e-12);
        let r = uniqueness_gate(&ExponentSet::new(1.5, 2.0, -0.9, -0.9, -0.9, -0.9));
        assert_eq!(r.verdict, GateVerdict::Fail);
        assert!((r.gamma_hats[0] - 1.62).abs() < 1e-12);
        let r = uniqueness_gate(&ExponentSet::new(2.0, 2.0, -0.5, 0.5, -0.5, -0.5));
        assert_eq!(r.verdict, GateVerdict::Inapplicable);
    }

    #[test]
    fn tau_and_scaling_examples() {
        let (g, e, pair) = t1_setup(9);
        let sol = solve_system(&g, &e, &pair, &Default::default()).unwrap();
        assert_eq!(krasnoselskii_tau(&sol, &sol).unwrap(), 1.0);
        let mut double = sol.clone();
        double.u = sol.u.scaled(2.0).unwrap();
        double.v = sol.v.scaled(2.0).unwrap();
        assert!((krasnoselskii_tau(&double, &sol).unwrap() - 2.0).abs() < 1e-15);
        assert!((krasnoselskii_tau(&sol, &double).unwrap() - 0.5).abs() < 1e-15);
        for tau in [1.0, 0.7, 0.1] {
            let r = scaling_comparison_check(&sol, &sol, tau, &e, 1e-12).unwrap();
            assert!(r.passed);
        }
        let mut zero = sol.clone();
        zero.u = ScalarField::constant(g.clone(), 0.0);
        assert!(matches!(krasnoselskii_tau(&zero, &sol), Err(Error::Precondition(_))));
    }

    #[test]
    fn uniqueness_two_starts_agree() {
        let (g, e, pair) = t1_setup(17);
        let cfg = FixedPointConfig {
            tol_outer: 1e-11,
            inner: ScalarSolveConfig { tol_res: 1e-13, ..Default::default() },
            ..Default::default()
        };
        let (report, _, _) = uniqueness_experiment(&g, &e, &pair, &cfg).unwrap();
        assert!(report.passed, "{report:?}");
        assert!((report.tau - 1.0).abs() < 1e-6);
    }
}
