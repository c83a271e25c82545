//! Auxiliary scalar objects: first eigenpairs, torsion functions, singular
//! torsion functions and the refinement check of their boundedness.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{distance_field, Grid};
use crate::plap::{check_p, nodal_residual_smoothed, solve_scalar, solve_scalar_from, BoundaryCondition, ScalarSolveConfig, ScalarSolveResult};

/// Slack added to extremal ratios so the recorded constants are strict.
const RATIO_SLACK: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct EigenPair {
    /// Normalized to `sup φ = 1`.
    pub phi: ScalarField,
    pub lambda: f64,
    pub bc: BoundaryCondition,
    pub p: f64,
    /// Dirichlet: largest `c0` with `φ >= c0 d` on interior nodes.
    pub c0: Option<f64>,
    /// Neumann: `min φ`.
    pub mu: Option<f64>,
    /// Sup-norm of `-Δ_p φ + φ^{p-1} - λ φ^{p-1}`.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary {
    pub lambda: f64,
    pub c0: Option<f64>,
    pub mu: Option<f64>,
    pub p: f64,
    pub bc: BoundaryCondition,
    pub residual: f64,
    pub iterations: usize,
}

impl EigenPair {
    pub fn summary(&self) -> EigenSummary {
        EigenSummary {
            lambda: self.lambda,
            c0: self.c0,
            mu: self.mu,
            p: self.p,
            bc: self.bc,
            residual: self.residual,
            iterations: self.iterations,
        }
    }
}

/// Discrete Rayleigh quotient `(Σ|∇_h w|^p + Σ|w|^p) / Σ|w|^p`.
pub fn rayleigh_quotient(w: &ScalarField, p: f64) -> Result<f64> {
    check_p(p)?;
    let grid = w.grid();
    let v = w.values();
    let mut grad = 0.0;
    for t in grid.grad_terms() {
        let s: f64 = t
            .components()
            .iter()
            .map(|d| ((v[d.to] - v[d.from]) * d.inv_h).powi(2))
            .sum();
        grad += t.weight * s.powf(p / 2.0);
    }
    let mass: f64 = v.iter().enumerate().map(|(k, x)| grid.volume(k) * x.abs().powf(p)).sum();
    if mass == 0.0 {
        return Err(Error::Precondition("Rayleigh quotient of the zero field".into()));
    }
    Ok((grad + mass) / mass)
}

fn eigen_residual(phi: &ScalarField, p: f64, lambda: f64, bc: BoundaryCondition, eps: f64) -> Result<f64> {
    let rhs = phi.map(|x| lambda * x.abs().powf(p - 1.0))?;
    Ok(nodal_residual_smoothed(phi, p, &rhs, bc, eps)?.sup_norm())
}

const INNER_TOL_FLOOR: f64 = 1e-13;

/// First Dirichlet eigenpair, started from the distance function.
pub fn first_eigenpair_dirichlet(grid: &Arc<Grid>, p: f64, cfg: &ScalarSolveConfig) -> Result<EigenPair> {
    let start = distance_field(grid);
    first_eigenpair_dirichlet_from(grid, p, cfg, &start)
}

/// First Dirichlet eigenpair by nonlinear inverse iteration: solve
/// `-Δ_p w + |w|^{p-2} w = φ^{p-1}` with zero boundary values, then set
/// `φ = |w| / sup |w|`. The eigenvalue is the Rayleigh quotient of `φ`.
pub fn first_eigenpair_dirichlet_from(
    grid: &Arc<Grid>,
    p: f64,
    cfg: &ScalarSolveConfig,
    initial: &ScalarField,
) -> Result<EigenPair> {
    check_p(p)?;
    cfg.validate()?;
    let bc = BoundaryCondition::DirichletZero;
    let interior: Vec<usize> = grid.interior_nodes().collect();
    let mut phi = normalized_abs(initial, grid)?;
    let mut lambda = rayleigh_quotient(&phi, p)?;
    let mut w_prev: Option<ScalarField> = None;
    let max_outer = 200;
    for it in 0..max_outer {
        let res = eigen_residual(&phi, p, lambda, bc, cfg.eps_grad)?;
        if res <= cfg.tol_res {
            let d = distance_field(grid);
            let c0 = interior
                .iter()
                .map(|&k| phi.values()[k] / d.values()[k])
                .fold(f64::INFINITY, f64::min);
            if !(c0 > 0.0) {
                return Err(Error::Internal(format!("eigenfunction not positive inside (c0 = {c0})")));
            }
            return Ok(EigenPair { phi, lambda, bc, p, c0: Some(c0), mu: None, residual: res, iterations: it });
        }
        let rhs = phi.map(|x| x.powf(p - 1.0))?;
        // Rough starts have huge quotients; keep the inner target above rounding.
        let inner_tol = (0.25 * cfg.tol_res / lambda.max(1.0)).max(INNER_TOL_FLOOR);
        let inner = ScalarSolveConfig { tol_res: inner_tol, ..*cfg };
        let solved = match &w_prev {
            Some(w0) => solve_scalar_from(grid, p, &rhs, bc, &inner, w0)?,
            None => solve_scalar(grid, p, &rhs, bc, &inner)?,
        };
        let w = solved.solution;
        phi = normalized_abs(&w, grid)?;
        if interior.iter().any(|&k| !(phi.values()[k] > 0.0)) {
            return Err(Error::Internal("inverse iteration lost positivity".into()));
        }
        lambda = rayleigh_quotient(&phi, p)?;
        w_prev = Some(w);
    }
    let res = eigen_residual(&phi, p, lambda, bc, cfg.eps_grad)?;
    Err(Error::IterationLimit { iterations: max_outer, residual: res, best: Box::new(phi) })
}

fn normalized_abs(w: &ScalarField, grid: &Arc<Grid>) -> Result<ScalarField> {
    let mut values: Vec<f64> = w.values().iter().map(|x| x.abs()).collect();
    for k in grid.boundary_nodes() {
        values[k] = 0.0;
    }
    let s = values.iter().cloned().fold(0.0, f64::max);
    if s == 0.0 {
        return Err(Error::Precondition("initial field vanishes on every interior node".into()));
    }
    ScalarField::new(grid.clone(), values.iter().map(|x| x / s).collect())
}

/// Constants solve the Neumann eigenproblem with eigenvalue 1.
pub fn first_eigenpair_neumann(grid: &Arc<Grid>, p: f64) -> Result<EigenPair> {
    check_p(p)?;
    Ok(EigenPair {
        phi: ScalarField::constant(grid.clone(), 1.0),
        lambda: 1.0,
        bc: BoundaryCondition::NeumannZero,
        p,
        c0: None,
        mu: Some(1.0),
        residual: 0.0,
        iterations: 0,
    })
}

#[derive(Debug, Clone)]
pub struct Torsion {
    pub result: ScalarSolveResult,
    pub bc: BoundaryCondition,
    pub p: f64,
    /// Dirichlet: smallest `c > 1` with `d/c <= y <= c d` inside.
    /// Neumann: smallest `ĉ > 1` with `φ̂/ĉ <= ŷ <= ĉ φ̂`.
    pub comparability: f64,
}

impl Torsion {
    pub fn field(&self) -> &ScalarField {
        &self.result.solution
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionSummary {
    pub bc: BoundaryCondition,
    pub p: f64,
    pub sup: f64,
    pub min: f64,
    pub comparability: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl Torsion {
    pub fn summary(&self) -> TorsionSummary {
        let y = self.field();
        TorsionSummary {
            bc: self.bc,
            p: self.p,
            sup: y.max(),
            min: y.min(),
            comparability: self.comparability,
            residual: self.result.residual,
            iterations: self.result.iterations,
        }
    }
}

/// Solves `-Δ_p y + |y|^{p-2} y = 1` and records its comparison constant.
pub fn torsion(grid: &Arc<Grid>, p: f64, bc: BoundaryCondition, cfg: &ScalarSolveConfig) -> Result<Torsion> {
    let one = ScalarField::constant(grid.clone(), 1.0);
    let result = solve_scalar(grid, p, &one, bc, cfg)?;
    let y = result.solution.values();
    let (reference, nodes): (ScalarField, Vec<usize>) = match bc {
        BoundaryCondition::DirichletZero => (distance_field(grid), grid.interior_nodes().collect()),
        BoundaryCondition::NeumannZero => (first_eigenpair_neumann(grid, p)?.phi, (0..grid.len()).collect()),
    };
    let mut worst: f64 = 1.0;
    for &k in &nodes {
        let (a, b) = (y[k], reference.values()[k]);
        if !(a > 0.0) {
            return Err(Error::Certificate(format!(
                "torsion function is not positive at node {k} {:?} (value {a:e})",
                grid.point(k)
            )));
        }
        worst = worst.max(a / b).max(b / a);
    }
    Ok(Torsion { result, bc, p, comparability: worst + RATIO_SLACK })
}

#[derive(Debug, Clone)]
pub struct SingularTorsion {
    pub result: ScalarSolveResult,
    pub p: f64,
    pub gamma: f64,
    /// Largest `c1` with `ẑ >= c1 φ̂`, i.e. `min ẑ`.
    pub c1: f64,
}

impl SingularTorsion {
    pub fn field(&self) -> &ScalarField {
        &self.result.solution
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > -1.0 && gamma <= 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "singular exponent gamma = {gamma} must lie in (-1, 0] for d^gamma to be integrable"
        )))
    }
}

/// Nodal forcing for `d^γ`: the mean of `d^γ` over the dual cell of each
/// node. The weight is integrated, never sampled on the boundary, so the
/// forcing is finite and consistent with the weak form.
pub fn singular_forcing(grid: &Arc<Grid>, gamma: f64) -> Result<ScalarField> {
    check_gamma(gamma)?;
    let e = &grid.spec().extents;
    let dual = |k: usize, axis: usize| {
        let x = grid.point(k)[axis];
        let h = grid.spacing()[axis] / 2.0;
        ((x - h).max(e[2 * axis]), (x + h).min(e[2 * axis + 1]))
    };
    let values = (0..grid.len())
        .map(|k| match grid.dimension() {
            1 => {
                let (lo, hi) = dual(k, 0);
                mean_distance_power(lo, hi, e[0], e[1], gamma)
            }
            _ => {
                let (x0, x1) = dual(k, 0);
                let (y0, y1) = dual(k, 1);
                let (hx, hy) = ((x1 - x0) / SUBCELLS as f64, (y1 - y0) / SUBCELLS as f64);
                let mut sum = 0.0;
                for i in 0..SUBCELLS {
                    for j in 0..SUBCELLS {
                        let (xa, ya) = (x0 + i as f64 * hx, y0 + j as f64 * hy);
                        let dx = (xa + hx / 2.0 - e[0]).min(e[1] - xa - hx / 2.0);
                        let dy = (ya + hy / 2.0 - e[2]).min(e[3] - ya - hy / 2.0);
                        sum += if dx <= dy {
                            mean_distance_power(xa, xa + hx, e[0], e[1], gamma)
                        } else {
                            mean_distance_power(ya, ya + hy, e[2], e[3], gamma)
                        };
                    }
                }
                sum / (SUBCELLS * SUBCELLS) as f64
            }
        })
        .collect();
    ScalarField::new(grid.clone(), values)
}

/// Subcells per axis when averaging the singular weight over a 2D dual cell.
const SUBCELLS: usize = 8;

/// Exact mean over `[lo, hi]` of `min(x - a, b - x)^γ`.
fn mean_distance_power(lo: f64, hi: f64, a: f64, b: f64, gamma: f64) -> f64 {
    let prim = |t: f64| t.max(0.0).powf(gamma + 1.0) / (gamma + 1.0);
    let mid = 0.5 * (a + b);
    let mut total = 0.0;
    if lo < mid {
        let h = hi.min(mid);
        total += prim(h - a) - prim(lo - a);
    }
    if hi > mid {
        let l = lo.max(mid);
        total += prim(b - l) - prim(b - hi);
    }
    total / (hi - lo)
}

/// Solves `-Δ_p ẑ + |ẑ|^{p-2} ẑ = d^γ` with zero Neumann data.
pub fn singular_torsion(grid: &Arc<Grid>, p: f64, gamma: f64, cfg: &ScalarSolveConfig) -> Result<SingularTorsion> {
    check_p(p)?;
    let f = singular_forcing(grid, gamma)?;
    let result = solve_scalar(grid, p, &f, BoundaryCondition::NeumannZero, cfg)?;
    let c1 = result.solution.min();
    if !(c1 > 0.0) {
        return Err(Error::Certificate(format!("singular torsion has minimum {c1:e}, expected positive")));
    }
    Ok(SingularTorsion { result, p, gamma, c1 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub gamma: f64,
    pub p: f64,
    pub dimension: usize,
    /// `γ > -1/N`, the condition under which the singular torsion functions
    /// stay bounded.
    pub condition_holds: bool,
    pub spacings: Vec<f64>,
    pub sup_norms: Vec<f64>,
    /// `|s_L - s_{L-1}| / s_L` for the two finest levels.
    pub drift: f64,
    pub note: String,
}

/// The grid followed by `levels - 1` successive refinements.
pub fn refinement_ladder(base: &Arc<Grid>, levels: usize) -> Result<Vec<Arc<Grid>>> {
    let mut out = vec![base.clone()];
    while out.len() < levels {
        let next = out.last().expect("nonempty").refined()?;
        out.push(next);
    }
    Ok(out)
}

/// Singular torsion sup-norms across a refinement ladder (finest last).
pub fn boundedness_check(
    ladder: &[Arc<Grid>],
    p: f64,
    gamma: f64,
    cfg: &ScalarSolveConfig,
) -> Result<BoundednessReport> {
    check_gamma(gamma)?;
    if ladder.len() < 3 {
        return Err(Error::Config(format!("ladder needs at least 3 levels, got {}", ladder.len())));
    }
    let first = ladder[0].spec();
    if ladder.iter().any(|g| g.kind() != first.kind || g.spec().extents != first.extents) {
        return Err(Error::Config("ladder levels must discretize the same domain".into()));
    }
    let sup_norms = ladder
        .par_iter()
        .map(|g| singular_torsion(g, p, gamma, cfg).map(|z| z.field().sup_norm()))
        .collect::<Result<Vec<f64>>>()?;
    let n = sup_norms.len();
    let drift = (sup_norms[n - 1] - sup_norms[n - 2]).abs() / sup_norms[n - 1];
    let dimension = ladder[0].dimension();
    let condition_holds = gamma > -1.0 / dimension as f64;
    let note = if condition_holds {
        format!("gamma = {gamma} > -1/{dimension}: singular torsion is bounded")
    } else {
        format!("gamma = {gamma} <= -1/{dimension}: no boundedness guarantee")
    };
    Ok(BoundednessReport {
        gamma,
        p,
        dimension,
        condition_holds,
        spacings: ladder.iter().map(|g| g.max_spacing()).collect(),
        sup_norms,
        drift,
        note,
    })
}
