//! Scalar problems `-Δ_p w + |w|^{p-2} w = f` with zero Dirichlet or zero
//! Neumann data.
//!
//! The discrete problem is the stationarity condition of
//!
//! ```text
//! J(w) = Σ_terms weight · Φ(|∇_h w|²) + Σ_nodes vol · (|w|^p / p - f w)
//! Φ(s) = ((s + eps²)^{p/2} - eps^p) / p
//! ```
//!
//! where the smoothing `eps` is only switched on for `p < 2`. The nodal
//! residual is `∂J/∂w_i / vol_i`, which for Neumann data is the ghost-node
//! reflection scheme. Solves run a damped Newton method with an Armijo line
//! search on `J`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::banded::SymBanded;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    DirichletZero,
    NeumannZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarSolveConfig {
    /// Gradient smoothing, used only when `p < 2`.
    pub eps_grad: f64,
    /// Target sup-norm of the nodal residual.
    pub tol_res: f64,
    pub max_inner_iterations: usize,
    /// Initial step length of every line search.
    pub damping: f64,
}

impl Default for ScalarSolveConfig {
    fn default() -> Self {
        Self {
            eps_grad: 1e-8,
            tol_res: 1e-9,
            max_inner_iterations: 100,
            damping: 1.0,
        }
    }
}

impl ScalarSolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_res > 0.0 && self.tol_res.is_finite()) {
            return Err(Error::Config(format!("tol_res must be positive, got {}", self.tol_res)));
        }
        if !(self.eps_grad >= 0.0 && self.eps_grad.is_finite()) {
            return Err(Error::Config(format!("eps_grad must be nonnegative, got {}", self.eps_grad)));
        }
        if self.max_inner_iterations == 0 {
            return Err(Error::Config("max_inner_iterations must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ScalarSolveResult {
    pub solution: ScalarField,
    /// Sup-norm of the nodal residual at `solution`.
    pub residual: f64,
    pub iterations: usize,
    pub energy: f64,
    /// Energy after every accepted step, starting with the initial iterate.
    pub energy_history: Vec<f64>,
    pub eps_grad: f64,
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("p must exceed 1, got {p}")))
    }
}

/// One discretized operator `w ↦ -Δ_p w + |w|^{p-2} w - f`.
struct Problem<'a> {
    grid: &'a Grid,
    p: f64,
    f: &'a [f64],
    dirichlet: bool,
    /// Smoothing inside the gradient term (zero unless `p < 2`).
    eps: f64,
}

impl<'a> Problem<'a> {
    fn new(grid: &'a Grid, p: f64, f: &'a [f64], bc: BoundaryCondition, eps_grad: f64) -> Result<Self> {
        let eps = if p < 2.0 { eps_grad } else { 0.0 };
        if p < 2.0 && eps == 0.0 {
            return Err(Error::Config("eps_grad must be positive when p < 2".into()));
        }
        Ok(Self {
            grid,
            p,
            f,
            dirichlet: bc == BoundaryCondition::DirichletZero,
            eps,
        })
    }

    fn fixed(&self, k: usize) -> bool {
        self.dirichlet && self.grid.is_boundary(k)
    }

    fn term_gradient(&self, w: &[f64], t: &crate::grid::GradTerm) -> ([f64; 2], f64) {
        let mut g = [0.0; 2];
        let mut s = 0.0;
        for (c, d) in t.components().iter().enumerate() {
            g[c] = (w[d.to] - w[d.from]) * d.inv_h;
            s += g[c] * g[c];
        }
        (g, s)
    }

    fn energy(&self, w: &[f64]) -> f64 {
        let p = self.p;
        let e2 = self.eps * self.eps;
        let ep = self.eps.powf(p);
        let mut j = 0.0;
        for t in self.grid.grad_terms() {
            let (_, s) = self.term_gradient(w, t);
            j += t.weight * ((s + e2).powf(p / 2.0) - ep) / p;
        }
        for (k, (&wk, &fk)) in w.iter().zip(self.f).enumerate() {
            j += self.grid.volume(k) * (wk.abs().powf(p) / p - fk * wk);
        }
        j
    }

    /// `∂J/∂w`; entries of fixed nodes are zero.
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let p = self.p;
        let e2 = self.eps * self.eps;
        let mut g = vec![0.0; w.len()];
        for t in self.grid.grad_terms() {
            let (gv, s) = self.term_gradient(w, t);
            let a = flux_coefficient(s + e2, p);
            if a == 0.0 {
                continue;
            }
            for (c, d) in t.components().iter().enumerate() {
                let q = t.weight * a * gv[c] * d.inv_h;
                g[d.to] += q;
                g[d.from] -= q;
            }
        }
        for (k, gk) in g.iter_mut().enumerate() {
            if self.fixed(k) {
                *gk = 0.0;
            } else {
                let wk = w[k];
                *gk += self.grid.volume(k) * (signed_pow(wk, p - 1.0) - self.f[k]);
            }
        }
        g
    }

    /// Nodal residual: gradient over cell volume, `w` itself on fixed nodes.
    fn residual(&self, w: &[f64]) -> Vec<f64> {
        let mut r = self.gradient(w);
        for (k, rk) in r.iter_mut().enumerate() {
            if self.fixed(k) {
                *rk = w[k];
            } else {
                *rk /= self.grid.volume(k);
            }
        }
        r
    }

    /// Hessian of `J`. With `lagged` set, the curvature terms that are
    /// negative for `p < 2` are dropped, giving the frozen-coefficient
    /// (Kačanov) matrix, which majorizes the Hessian in that range.
    fn hessian(&self, w: &[f64], lagged: bool) -> SymBanded {
        let p = self.p;
        let n = w.len();
        let mut h = SymBanded::zeros(n, self.grid.bandwidth());
        // For p > 2 the Hessian degenerates where the gradient vanishes; a
        // tiny floor keeps it definite without changing the equation.
        let eh = if p < 2.0 { self.eps } else { 1e-8 };
        let e2 = eh * eh;
        for t in self.grid.grad_terms() {
            let (gv, s) = self.term_gradient(w, t);
            let se = s + e2;
            let a = flux_coefficient(se, p);
            let c = if lagged || p == 2.0 || se == 0.0 { 0.0 } else { (p - 2.0) * se.powf((p - 4.0) / 2.0) };
            let len = t.len;
            let hg = |i: usize, j: usize| {
                let id = if i == j { a } else { 0.0 };
                id + c * gv[i] * gv[j]
            };
            // Local nodes with their coefficient rows in G = B w.
            let mut nodes: [(usize, [f64; 2]); 4] = [(usize::MAX, [0.0; 2]); 4];
            let mut count = 0;
            for (comp, d) in t.components().iter().enumerate() {
                for (node, coef) in [(d.to, d.inv_h), (d.from, -d.inv_h)] {
                    match nodes[..count].iter_mut().find(|e| e.0 == node) {
                        Some(e) => e.1[comp] += coef,
                        None => {
                            let mut b = [0.0; 2];
                            b[comp] = coef;
                            nodes[count] = (node, b);
                            count += 1;
                        }
                    }
                }
            }
            for x in 0..count {
                let (m, bm) = nodes[x];
                if self.fixed(m) {
                    continue;
                }
                for &(nn, bn) in &nodes[..count] {
                    if nn > m || self.fixed(nn) {
                        continue;
                    }
                    let mut v = 0.0;
                    for i in 0..len {
                        for j in 0..len {
                            v += bm[i] * hg(i, j) * bn[j];
                        }
                    }
                    h.add_lower(m, nn, t.weight * v);
                }
            }
        }
        let em2 = e2.max(1e-16);
        for (k, &wk) in w.iter().enumerate() {
            if self.fixed(k) {
                h.set_diag(k, 1.0);
            } else {
                let m = if p >= 2.0 {
                    (p - 1.0) * wk.abs().powf(p - 2.0)
                } else {
                    let q = if lagged { 1.0 } else { p - 1.0 };
                    q * (wk * wk + em2).powf((p - 2.0) / 2.0)
                };
                h.add_lower(k, k, self.grid.volume(k) * m);
            }
        }
        h
    }
}

/// `(s)^{(p-2)/2}` with the `s = 0` limit of `|G|^{p-2} G` folded in.
fn flux_coefficient(s: f64, p: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else if s == 0.0 {
        0.0
    } else {
        s.powf((p - 2.0) / 2.0)
    }
}

fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn check_grid(grid: &Arc<Grid>, field: &ScalarField, name: &str) -> Result<()> {
    if Arc::ptr_eq(grid, field.grid()) || **grid == **field.grid() {
        Ok(())
    } else {
        Err(Error::Shape(format!("{name} lives on a different grid")))
    }
}

/// Discrete energy without gradient smoothing. Its critical points are the
/// discrete solutions.
pub fn discrete_energy(w: &ScalarField, f: &ScalarField, p: f64, bc: BoundaryCondition) -> Result<f64> {
    check_p(p)?;
    w.ensure_same_grid(f)?;
    let grid = w.grid();
    let prob = Problem {
        grid,
        p,
        f: f.values(),
        dirichlet: bc == BoundaryCondition::DirichletZero,
        eps: 0.0,
    };
    Ok(prob.energy(w.values()))
}

/// Discretized `-Δ_p w + |w|^{p-2} w - f` at every node. Dirichlet boundary
/// rows report `w`.
pub fn nodal_residual(w: &ScalarField, p: f64, f: &ScalarField, bc: BoundaryCondition) -> Result<ScalarField> {
    nodal_residual_smoothed(w, p, f, bc, 0.0)
}

/// As [`nodal_residual`], with the solver's gradient smoothing for `p < 2`.
pub fn nodal_residual_smoothed(
    w: &ScalarField,
    p: f64,
    f: &ScalarField,
    bc: BoundaryCondition,
    eps_grad: f64,
) -> Result<ScalarField> {
    check_p(p)?;
    w.ensure_same_grid(f)?;
    let prob = Problem {
        grid: w.grid(),
        p,
        f: f.values(),
        dirichlet: bc == BoundaryCondition::DirichletZero,
        eps: if p < 2.0 { eps_grad } else { 0.0 },
    };
    ScalarField::new(w.grid().clone(), prob.residual(w.values()))
}

/// Solves from the initial iterate `sign(f)|f|^{1/(p-1)}`, which is exact for
/// constant forcing under Neumann data.
pub fn solve_scalar(
    grid: &Arc<Grid>,
    p: f64,
    f: &ScalarField,
    bc: BoundaryCondition,
    cfg: &ScalarSolveConfig,
) -> Result<ScalarSolveResult> {
    check_p(p)?;
    check_grid(grid, f, "forcing")?;
    let init: Vec<f64> = f.values().iter().map(|&v| signed_pow(v, 1.0 / (p - 1.0))).collect();
    let init = ScalarField::new(grid.clone(), init)?;
    solve_scalar_from(grid, p, f, bc, cfg, &init)
}

pub fn solve_scalar_from(
    grid: &Arc<Grid>,
    p: f64,
    f: &ScalarField,
    bc: BoundaryCondition,
    cfg: &ScalarSolveConfig,
    initial: &ScalarField,
) -> Result<ScalarSolveResult> {
    check_p(p)?;
    cfg.validate()?;
    check_grid(grid, f, "forcing")?;
    check_grid(grid, initial, "initial iterate")?;
    let prob = Problem::new(grid, p, f.values(), bc, cfg.eps_grad)?;

    let mut w = initial.values().to_vec();
    for k in 0..w.len() {
        if prob.fixed(k) {
            w[k] = 0.0;
        }
    }
    // For p < 2 the smoothed energy is nearly nonsmooth at flat spots, so
    // the smoothing is lowered in stages, each warm-starting the next.
    if p < 2.0 {
        let mut eps = 1e-1;
        while eps > 10.0 * cfg.eps_grad {
            let stage = Problem { eps, ..Problem::new(grid, p, f.values(), bc, cfg.eps_grad)? };
            let tol = (cfg.tol_res * 1e3).max(1e-6);
            match newton(&stage, w, tol, cfg) {
                Ok(out) => w = out.w,
                Err(out) => w = out.best,
            }
            eps *= 0.1;
        }
    }
    match newton(&prob, w, cfg.tol_res, cfg) {
        Ok(out) => Ok(ScalarSolveResult {
            solution: ScalarField::new(grid.clone(), out.w)?,
            residual: out.residual,
            iterations: out.history.len() - 1,
            energy: out.energy,
            energy_history: out.history,
            eps_grad: cfg.eps_grad,
        }),
        Err(out) => Err(Error::IterationLimit {
            iterations: out.iterations,
            residual: out.best_residual,
            best: Box::new(ScalarField::new(grid.clone(), out.best)?),
        }),
    }
}

struct NewtonOutcome {
    w: Vec<f64>,
    residual: f64,
    energy: f64,
    history: Vec<f64>,
}

struct NewtonFailure {
    iterations: usize,
    best: Vec<f64>,
    best_residual: f64,
}

fn newton(
    prob: &Problem,
    mut w: Vec<f64>,
    tol: f64,
    cfg: &ScalarSolveConfig,
) -> std::result::Result<NewtonOutcome, NewtonFailure> {
    let mut energy = prob.energy(&w);
    let mut history = vec![energy];
    let mut res = sup(&prob.residual(&w));
    let mut best = (res, w.clone());
    let mut stalled = 0;

    for _ in 0..cfg.max_inner_iterations {
        if res <= tol {
            break;
        }
        let g = prob.gradient(&w);
        let step = if prob.p < 2.0 {
            // Full Newton steps overshoot on |G|^p with p < 2; the
            // frozen-coefficient step never does. Keep whichever is better.
            let a = newton_direction(prob, &w, &g, false)
                .and_then(|d| line_search(prob, &w, &g, &d, energy, res, cfg.damping));
            let b = newton_direction(prob, &w, &g, true)
                .and_then(|d| line_search(prob, &w, &g, &d, energy, res, cfg.damping));
            match (a, b) {
                (Some(a), Some(b)) => Some(if b.1 < a.1 { b } else { a }),
                (a, b) => a.or(b),
            }
        } else {
            newton_direction(prob, &w, &g, false)
                .and_then(|d| line_search(prob, &w, &g, &d, energy, res, cfg.damping))
        };
        let step = step.or_else(|| {
            let d = jacobi_direction(prob, &w, &g);
            line_search(prob, &w, &g, &d, energy, res, cfg.damping)
        });
        match step {
            Some((nw, ne, nr)) => {
                w = nw;
                energy = ne;
                res = nr;
            }
            None => break,
        }
        history.push(energy);
        if res < best.0 {
            best = (res, w.clone());
            stalled = 0;
        } else {
            // Residuals bouncing at the rounding floor never recover.
            stalled += 1;
            if stalled >= 8 {
                break;
            }
        }
    }
    if res <= tol {
        Ok(NewtonOutcome { w, residual: res, energy, history })
    } else {
        Err(NewtonFailure {
            iterations: history.len() - 1,
            best: best.1,
            best_residual: best.0,
        })
    }
}

fn newton_direction(prob: &Problem, w: &[f64], g: &[f64], lagged: bool) -> Option<Vec<f64>> {
    let h = prob.hessian(w, lagged);
    let scale = h.max_diag().max(f64::MIN_POSITIVE);
    let mut shift = 0.0;
    for _ in 0..8 {
        let mut m = h.clone();
        if shift > 0.0 {
            m.add_to_diag(shift);
        }
        if m.cholesky() {
            let mut d: Vec<f64> = g.iter().map(|x| -x).collect();
            m.solve_factored(&mut d);
            if d.iter().all(|x| x.is_finite()) {
                return Some(d);
            }
        }
        shift = if shift == 0.0 { 1e-12 * scale } else { shift * 100.0 };
    }
    None
}

fn jacobi_direction(prob: &Problem, w: &[f64], g: &[f64]) -> Vec<f64> {
    let h = prob.hessian(w, true);
    g.iter()
        .enumerate()
        .map(|(k, &gk)| {
            let dk = h.diag(k);
            let scale = if dk > 0.0 && dk.is_finite() { dk } else { prob.grid.volume(k) };
            -gk / scale
        })
        .collect()
}

fn line_search(
    prob: &Problem,
    w: &[f64],
    g: &[f64],
    d: &[f64],
    energy: f64,
    res: f64,
    damping: f64,
) -> Option<(Vec<f64>, f64, f64)> {
    let slope: f64 = g.iter().zip(d).map(|(a, b)| a * b).sum();
    if !(slope < 0.0) {
        return None;
    }
    let slack = 1e-12 * energy.abs().max(1.0);
    let mut t = damping;
    while t >= 1e-10 {
        let trial: Vec<f64> = w.iter().zip(d).map(|(a, b)| a + t * b).collect();
        let e = prob.energy(&trial);
        if e.is_finite() {
            let accept_energy = e <= energy + 1e-4 * t * slope + slack;
            // Near the solution energy differences drown in rounding; a
            // clear residual decrease is accepted instead.
            if accept_energy || t == damping {
                let r = sup(&prob.residual(&trial));
                if accept_energy || r < 0.5 * res {
                    return Some((trial, e, r));
                }
            }
        }
        t *= 0.5;
    }
    None
}
