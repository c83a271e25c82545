//! Explicit sub-/supersolution pairs and their discrete certificates.
//!
//! Four recipes are provided:
//!
//! | recipe | lower pair              | upper pair        |
//! |--------|-------------------------|-------------------|
//! | `T1`   | `Λ⁻¹ φ̂`                 | `Λ ŷ`             |
//! | `T3`   | `Λ⁻¹ (Λ - φ̂)`           | `Λ (Λ - y)`       |
//! | `T5`   | `Λ⁻¹ φ` (zero trace)    | `Λ ŷ`             |
//! | `T9`   | `Λ⁻¹ φ` (zero trace)    | `Λ ẑ`             |
//!
//! with `φ̂`, `ŷ` the Neumann eigenfunction and torsion, `φ`, `y` their
//! Dirichlet counterparts and `ẑ` the singular torsion functions.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{validate_exponents, ExponentSet};
use crate::field::ScalarField;
use crate::grid::{distance_field, Grid};
use crate::plap::{nodal_residual_smoothed, BoundaryCondition, ScalarSolveConfig};
use crate::spectral::{
    first_eigenpair_dirichlet, first_eigenpair_neumann, singular_torsion, torsion, EigenPair,
    SingularTorsion, Torsion,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Recipe {
    T1,
    T3,
    T5,
    T9,
}

impl Recipe {
    pub const ALL: [Recipe; 4] = [Recipe::T1, Recipe::T3, Recipe::T5, Recipe::T9];

    /// Whether the lower fields vanish on the boundary.
    pub fn zero_trace(self) -> bool {
        matches!(self, Recipe::T5 | Recipe::T9)
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Recipe::T1 => "T1",
            Recipe::T3 => "T3",
            Recipe::T5 => "T5",
            Recipe::T9 => "T9",
        };
        f.write_str(s)
    }
}

impl FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "T1" => Ok(Recipe::T1),
            "T3" => Ok(Recipe::T3),
            "T5" => Ok(Recipe::T5),
            "T9" => Ok(Recipe::T9),
            other => Err(Error::Config(format!("unknown recipe {other:?}, expected T1, T3, T5 or T9"))),
        }
    }
}

/// Scalar objects a recipe is built from, one per component.
#[derive(Debug, Clone)]
pub struct Auxiliary {
    pub neumann_eigen: [EigenPair; 2],
    pub neumann_torsion: Option<[Torsion; 2]>,
    pub dirichlet_torsion: Option<[Torsion; 2]>,
    pub dirichlet_eigen: Option<[EigenPair; 2]>,
    /// `ẑ1` with exponent `beta1` on `p1`, `ẑ2` with exponent `alpha2` on `p2`.
    pub singular_torsion: Option<[SingularTorsion; 2]>,
}

fn per_component<T: Clone>(e: &ExponentSet, f: impl Fn(f64) -> Result<T>) -> Result<[T; 2]> {
    let first = f(e.p1)?;
    let second = if e.p2 == e.p1 { first.clone() } else { f(e.p2)? };
    Ok([first, second])
}

/// Computes exactly the objects `recipe` needs.
pub fn prepare_auxiliary(grid: &Arc<Grid>, e: &ExponentSet, recipe: Recipe, cfg: &ScalarSolveConfig) -> Result<Auxiliary> {
    check_recipe(e, recipe)?;
    let neumann_eigen = [first_eigenpair_neumann(grid, e.p1)?, first_eigenpair_neumann(grid, e.p2)?];
    let mut aux = Auxiliary {
        neumann_eigen,
        neumann_torsion: None,
        dirichlet_torsion: None,
        dirichlet_eigen: None,
        singular_torsion: None,
    };
    match recipe {
        Recipe::T1 => {
            aux.neumann_torsion = Some(per_component(e, |p| torsion(grid, p, BoundaryCondition::NeumannZero, cfg))?);
        }
        Recipe::T3 => {
            aux.dirichlet_torsion = Some(per_component(e, |p| torsion(grid, p, BoundaryCondition::DirichletZero, cfg))?);
        }
        Recipe::T5 => {
            aux.dirichlet_eigen = Some(per_component(e, |p| first_eigenpair_dirichlet(grid, p, cfg))?);
            aux.neumann_torsion = Some(per_component(e, |p| torsion(grid, p, BoundaryCondition::NeumannZero, cfg))?);
        }
        Recipe::T9 => {
            aux.dirichlet_eigen = Some(per_component(e, |p| first_eigenpair_dirichlet(grid, p, cfg))?);
            let z1 = singular_torsion(grid, e.p1, e.beta1, cfg)?;
            let z2 = if e.p2 == e.p1 && e.alpha2 == e.beta1 {
                z1.clone()
            } else {
                singular_torsion(grid, e.p2, e.alpha2, cfg)?
            };
            aux.singular_torsion = Some([z1, z2]);
        }
    }
    Ok(aux)
}

/// Ordered barrier quadruple with its construction data.
#[derive(Debug, Clone)]
pub struct SubSupPair {
    pub u_lower: ScalarField,
    pub v_lower: ScalarField,
    pub u_upper: ScalarField,
    pub v_upper: ScalarField,
    pub recipe: Recipe,
    pub lambda: f64,
    /// T9 only: whether the singular torsion functions are guaranteed to be
    /// bounded (`min(alpha2, beta1) > -1/N`).
    pub upper_bounded: Option<bool>,
}

impl SubSupPair {
    pub fn grid(&self) -> &Arc<Grid> {
        self.u_lower.grid()
    }

    pub fn lower(&self, i: usize) -> &ScalarField {
        if i == 0 { &self.u_lower } else { &self.v_lower }
    }

    pub fn upper(&self, i: usize) -> &ScalarField {
        if i == 0 { &self.u_upper } else { &self.v_upper }
    }

    /// The same quadruple with lower and upper fields exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            u_lower: self.u_upper.clone(),
            v_lower: self.v_upper.clone(),
            u_upper: self.u_lower.clone(),
            v_upper: self.v_lower.clone(),
            ..self.clone()
        }
    }
}

fn check_recipe(e: &ExponentSet, recipe: Recipe) -> Result<()> {
    match recipe {
        Recipe::T5 if !(e.alpha2 > 0.0 && e.beta1 > 0.0) => Err(Error::RecipeMismatch(format!(
            "T5 needs alpha2 > 0 and beta1 > 0, got alpha2 = {}, beta1 = {}",
            e.alpha2, e.beta1
        ))),
        Recipe::T9 => {
            let ok2 = e.alpha2 > (-1.0f64).max(-(e.p2 - 1.0)) && e.alpha2 < 0.0;
            let ok1 = e.beta1 > (-1.0f64).max(-(e.p1 - 1.0)) && e.beta1 < 0.0;
            if ok1 && ok2 {
                Ok(())
            } else {
                Err(Error::RecipeMismatch(format!(
                    "T9 needs max(-1, -(p2-1)) < alpha2 < 0 and max(-1, -(p1-1)) < beta1 < 0, got alpha2 = {}, beta1 = {}",
                    e.alpha2, e.beta1
                )))
            }
        }
        _ => Ok(()),
    }
}

fn check_regime(e: &ExponentSet, dimension: usize) -> Result<()> {
    let report = validate_exponents(e, dimension);
    if report.valid {
        return Ok(());
    }
    if !report.p_valid {
        return Err(Error::Config(format!("p1 = {} and p2 = {} must both exceed 1", e.p1, e.p2)));
    }
    let names: Vec<String> = report.failures().iter().map(|c| format!("{} (value {})", c.name, c.value)).collect();
    Err(Error::Config(format!("exponents outside the singular regime: {}", names.join(", "))))
}

/// Smallest admissible `Λ` for recipe T3, doubled until
/// `Λ - sup φ̂_i > Λ/2`, `Λ - sup y_i > Λ/2` and
/// `(Λ/2)^{p_i-1} - (Λ/3)^{p_i-1} > 1` hold for both components.
pub fn lambda_floor_t3(e: &ExponentSet, phi_hat_sup: [f64; 2], y_sup: [f64; 2]) -> f64 {
    let mut lambda = (0..2)
        .map(|i| {
            let p = e.p(i);
            let k = (3f64.powf(p - 1.0) - 2f64.powf(p - 1.0)).powf(1.0 / (p - 1.0));
            2.0 * (1.0 + 3.0 / k + phi_hat_sup[i] + y_sup[i])
        })
        .fold(f64::NEG_INFINITY, f64::max);
    while !t3_floor_conditions(e, lambda, phi_hat_sup, y_sup) {
        lambda *= 2.0;
    }
    lambda
}

/// The two inequalities the T3 floor must satisfy.
pub fn t3_floor_conditions(e: &ExponentSet, lambda: f64, phi_hat_sup: [f64; 2], y_sup: [f64; 2]) -> bool {
    (0..2).all(|i| {
        let p = e.p(i);
        let half = lambda / 2.0;
        lambda - phi_hat_sup[i] > half
            && lambda - y_sup[i] > half
            && half.powf(p - 1.0) - (lambda / 3.0).powf(p - 1.0) > 1.0
    })
}

fn t3_sups(aux: &Auxiliary) -> Result<([f64; 2], [f64; 2])> {
    let y = aux
        .dirichlet_torsion
        .as_ref()
        .ok_or_else(|| Error::Precondition("T3 needs Dirichlet torsion functions".into()))?;
    Ok((
        [aux.neumann_eigen[0].phi.sup_norm(), aux.neumann_eigen[1].phi.sup_norm()],
        [y[0].field().sup_norm(), y[1].field().sup_norm()],
    ))
}

pub fn construct_t1(grid: &Arc<Grid>, e: &ExponentSet, lambda: f64, aux: &Auxiliary) -> Result<SubSupPair> {
    check_regime(e, grid.dimension())?;
    if !(lambda > 1.0) {
        return Err(Error::Config(format!("T1 needs lambda > 1, got {lambda}")));
    }
    let yhat = aux
        .neumann_torsion
        .as_ref()
        .ok_or_else(|| Error::Precondition("T1 needs Neumann torsion functions".into()))?;
    Ok(SubSupPair {
        u_lower: aux.neumann_eigen[0].phi.scaled(1.0 / lambda)?,
        v_lower: aux.neumann_eigen[1].phi.scaled(1.0 / lambda)?,
        u_upper: yhat[0].field().scaled(lambda)?,
        v_upper: yhat[1].field().scaled(lambda)?,
        recipe: Recipe::T1,
        lambda,
        upper_bounded: None,
    })
}

pub fn construct_t3(grid: &Arc<Grid>, e: &ExponentSet, lambda: f64, aux: &Auxiliary) -> Result<SubSupPair> {
    let (phi_sup, y_sup) = t3_sups(aux)?;
    let floor = lambda_floor_t3(e, phi_sup, y_sup);
    if !(lambda >= floor) {
        return Err(Error::Config(format!(
            "T3 needs lambda at or above its floor {floor}, got {lambda}"
        )));
    }
    construct_t3_unchecked(grid, e, lambda, aux)
}

/// T3 fields for any `Λ > 0`, skipping the floor check. Used to exhibit
/// certificate failures below the floor.
pub fn construct_t3_unchecked(grid: &Arc<Grid>, e: &ExponentSet, lambda: f64, aux: &Auxiliary) -> Result<SubSupPair> {
    check_regime(e, grid.dimension())?;
    if !(lambda > 0.0) {
        return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
    }
    let y = aux
        .dirichlet_torsion
        .as_ref()
        .ok_or_else(|| Error::Precondition("T3 needs Dirichlet torsion functions".into()))?;
    let phi = &aux.neumann_eigen;
    Ok(SubSupPair {
        u_lower: phi[0].phi.map(|x| (lambda - x) / lambda)?,
        v_lower: phi[1].phi.map(|x| (lambda - x) / lambda)?,
        u_upper: y[0].field().map(|x| lambda * (lambda - x))?,
        v_upper: y[1].field().map(|x| lambda * (lambda - x))?,
        recipe: Recipe::T3,
        lambda,
        upper_bounded: None,
    })
}

pub fn construct_t5(grid: &Arc<Grid>, e: &ExponentSet, lambda: f64, aux: &Auxiliary) -> Result<SubSupPair> {
    check_recipe(e, Recipe::T5)?;
    check_regime(e, grid.dimension())?;
    if !(lambda > 1.0) {
        return Err(Error::Config(format!("T5 needs lambda > 1, got {lambda}")));
    }
    let phi = aux
        .dirichlet_eigen
        .as_ref()
        .ok_or_else(|| Error::Precondition("T5 needs Dirichlet eigenpairs".into()))?;
    let yhat = aux
        .neumann_torsion
        .as_ref()
        .ok_or_else(|| Error::Precondition("T5 needs Neumann torsion functions".into()))?;
    Ok(SubSupPair {
        u_lower: phi[0].phi.scaled(1.0 / lambda)?,
        v_lower: phi[1].phi.scaled(1.0 / lambda)?,
        u_upper: yhat[0].field().scaled(lambda)?,
        v_upper: yhat[1].field().scaled(lambda)?,
        recipe: Recipe::T5,
        lambda,
        upper_bounded: None,
    })
}

pub fn construct_t9(grid: &Arc<Grid>, e: &ExponentSet, lambda: f64, aux: &Auxiliary) -> Result<SubSupPair> {
    check_recipe(e, Recipe::T9)?;
    check_regime(e, grid.dimension())?;
    if !(lambda > 0.0) {
        return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
    }
    let phi = aux
        .dirichlet_eigen
        .as_ref()
        .ok_or_else(|| Error::Precondition("T9 needs Dirichlet eigenpairs".into()))?;
    let z = aux
        .singular_torsion
        .as_ref()
        .ok_or_else(|| Error::Precondition("T9 needs singular torsion functions".into()))?;
    let n = grid.dimension() as f64;
    Ok(SubSupPair {
        u_lower: phi[0].phi.scaled(1.0 / lambda)?,
        v_lower: phi[1].phi.scaled(1.0 / lambda)?,
        u_upper: z[0].field().scaled(lambda)?,
        v_upper: z[1].field().scaled(lambda)?,
        recipe: Recipe::T9,
        lambda,
        upper_bounded: Some(e.alpha2.min(e.beta1) > -1.0 / n),
    })
}

pub fn construct(recipe: Recipe, grid: &Arc<Grid>, e: &ExponentSet, lambda: f64, aux: &Auxiliary) -> Result<SubSupPair> {
    match recipe {
        Recipe::T1 => construct_t1(grid, e, lambda, aux),
        Recipe::T3 => construct_t3(grid, e, lambda, aux),
        Recipe::T5 => construct_t5(grid, e, lambda, aux),
        Recipe::T9 => construct_t9(grid, e, lambda, aux),
    }
}

/// `t^a` for `t >= 0`, with `+∞` for a zero base under a negative exponent.
pub fn pow_pos(t: f64, a: f64) -> f64 {
    if a == 0.0 {
        1.0
    } else if t <= 0.0 {
        if a < 0.0 { f64::INFINITY } else { 0.0 }
    } else {
        t.powf(a)
    }
}

/// `(inf, sup)` of `t^a` over `t ∈ [lo, hi]`, attained at the endpoints
/// since `t ↦ t^a` is monotone.
pub fn power_range(lo: f64, hi: f64, a: f64) -> (f64, f64) {
    let (x, y) = (pow_pos(lo, a), pow_pos(hi, a));
    if a < 0.0 { (y, x) } else { (x, y) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyTolerances {
    /// Slack for `lower <= upper`.
    pub order: f64,
    /// Slack for the normal-derivative signs.
    pub normal: f64,
    /// Relative slack for the differential inequalities, scaled by
    /// `1 + |left-hand side|`.
    pub inequality: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self { order: 1e-10, normal: 1e-10, inequality: 1e-7 }
    }
}

/// Worst slack of one nodal check; nonnegative means satisfied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub worst: f64,
    pub node: Option<usize>,
    pub coords: Option<Vec<f64>>,
    pub passed: bool,
}

impl Margin {
    fn scan(grid: &Grid, nodes: impl Iterator<Item = (usize, f64, f64)>) -> Self {
        // items: (node, margin, allowed deficit)
        let mut worst = f64::INFINITY;
        let mut node = None;
        let mut passed = true;
        for (k, m, tol) in nodes {
            if m < worst || node.is_none() {
                worst = m;
                node = Some(k);
            }
            if !(m >= -tol) {
                passed = false;
            }
        }
        Margin {
            worst,
            node,
            coords: node.map(|k| grid.point(k).to_vec()),
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthBound {
    /// `|f_i| <= C d^γ` on the rectangle.
    Singular { c: f64, gamma: f64, passed: bool },
    /// `|f_i| <= M` on the rectangle.
    Bounded { m: f64, passed: bool },
}

impl GrowthBound {
    pub fn passed(&self) -> bool {
        match self {
            GrowthBound::Singular { passed, .. } | GrowthBound::Bounded { passed, .. } => *passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Positivity {
    /// Lower fields `>= rho` everywhere.
    Floor { rho: f64, passed: bool },
    /// Lower fields `>= c d` inside.
    DistanceMultiple { c: f64, passed: bool },
}

impl Positivity {
    pub fn passed(&self) -> bool {
        match self {
            Positivity::Floor { passed, .. } | Positivity::DistanceMultiple { passed, .. } => *passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCertificate {
    pub recipe: Recipe,
    pub lambda: f64,
    pub ordering: [Margin; 2],
    /// `-∂(lower)/∂η` at non-corner boundary nodes, per component.
    pub normal_lower: [Margin; 2],
    /// `∂(upper)/∂η` at non-corner boundary nodes, per component.
    pub normal_upper: [Margin; 2],
    /// `inf f_i - (-Δ_p lower + lower^{p-1})` at interior nodes.
    pub sub_inequality: [Margin; 2],
    /// `(-Δ_p upper + upper^{p-1}) - sup f_i` at interior nodes.
    pub super_inequality: [Margin; 2],
    pub growth: GrowthBound,
    pub positivity: Positivity,
    pub upper_bounded: Option<bool>,
    pub quadrature: String,
    pub tolerances: VerifyTolerances,
    pub passed: bool,
}

impl HypothesisCertificate {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        let names = ["u", "v"];
        for i in 0..2 {
            let checks = [
                ("ordering", &self.ordering[i]),
                ("lower normal derivative", &self.normal_lower[i]),
                ("upper normal derivative", &self.normal_upper[i]),
                ("subsolution inequality", &self.sub_inequality[i]),
                ("supersolution inequality", &self.super_inequality[i]),
            ];
            for (what, m) in checks {
                if !m.passed {
                    out.push(format!("{what} for {} (worst margin {:e} at {:?})", names[i], m.worst, m.coords));
                }
            }
        }
        if !self.growth.passed() {
            out.push(format!("growth bound {:?}", self.growth));
        }
        if !self.positivity.passed() {
            out.push(format!("positivity {:?}", self.positivity));
        }
        out
    }
}

/// Discrete check of every hypothesis the existence theory asks of a pair.
pub fn verify_pair(pair: &SubSupPair, e: &ExponentSet, eps_grad: f64, tol: &VerifyTolerances) -> Result<HypothesisCertificate> {
    let grid = pair.grid().clone();
    for f in [&pair.v_lower, &pair.u_upper, &pair.v_upper] {
        pair.u_lower.ensure_same_grid(f)?;
    }
    let lower = [pair.u_lower.values(), pair.v_lower.values()];
    let upper = [pair.u_upper.values(), pair.v_upper.values()];

    let ordering = [0, 1].map(|i| {
        Margin::scan(&grid, (0..grid.len()).map(|k| (k, upper[i][k] - lower[i][k], tol.order)))
    });

    let normal = |w: &[f64], sign: f64| {
        Margin::scan(
            &grid,
            grid.boundary_nodes().filter_map(|k| {
                grid.inward_neighbor(k)
                    .map(|(j, h)| (k, sign * (w[k] - w[j]) / h, tol.normal))
            }),
        )
    };
    let normal_lower = [normal(lower[0], -1.0), normal(lower[1], -1.0)];
    let normal_upper = [normal(upper[0], 1.0), normal(upper[1], 1.0)];

    let zero = ScalarField::constant(grid.clone(), 0.0);
    let lhs = |w: &ScalarField, p: f64| -> Result<ScalarField> {
        nodal_residual_smoothed(w, p, &zero, BoundaryCondition::NeumannZero, eps_grad)
    };
    let lhs_lower = [lhs(&pair.u_lower, e.p1)?, lhs(&pair.v_lower, e.p2)?];
    let lhs_upper = [lhs(&pair.u_upper, e.p1)?, lhs(&pair.v_upper, e.p2)?];
    // Exponents of (u, v) in f_i.
    let exps = [[e.alpha1, e.beta1], [e.alpha2, e.beta2]];
    let interior: Vec<usize> = grid.interior_nodes().collect();

    let sub_inequality = [0, 1].map(|i| {
        Margin::scan(
            &grid,
            interior.iter().map(|&k| {
                // Own component frozen at its lower value, the other ranging.
                let mut f_inf = 0.0;
                for j in 0..2 {
                    let (lo, hi) = if j == i { (lower[j][k], lower[j][k]) } else { (lower[j][k], upper[j][k]) };
                    f_inf += power_range(lo, hi, exps[i][j]).0;
                }
                let l = lhs_lower[i].values()[k];
                (k, f_inf - l, tol.inequality * (1.0 + l.abs()))
            }),
        )
    });
    let super_inequality = [0, 1].map(|i| {
        Margin::scan(
            &grid,
            interior.iter().map(|&k| {
                let mut f_sup = 0.0;
                for j in 0..2 {
                    let (lo, hi) = if j == i { (upper[j][k], upper[j][k]) } else { (lower[j][k], upper[j][k]) };
                    f_sup += power_range(lo, hi, exps[i][j]).1;
                }
                let l = lhs_upper[i].values()[k];
                (k, l - f_sup, tol.inequality * (1.0 + l.abs()))
            }),
        )
    });

    let (growth, positivity) = if pair.recipe.zero_trace() {
        (singular_growth(&grid, &lower, &upper, &exps), distance_positivity(&grid, &lower))
    } else {
        let rho = lower[0].iter().chain(lower[1]).cloned().fold(f64::INFINITY, f64::min);
        let upper_sup = [upper[0], upper[1]].map(|u| u.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        let m = (0..2)
            .map(|i| {
                (0..2)
                    .map(|j| {
                        let (a, b) = power_range(rho, upper_sup[j], exps[i][j]);
                        a.abs().max(b.abs())
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        (
            GrowthBound::Bounded { m, passed: m.is_finite() },
            Positivity::Floor { rho, passed: rho > 0.0 },
        )
    };

    let passed = ordering.iter().all(|m| m.passed)
        && normal_lower.iter().all(|m| m.passed)
        && normal_upper.iter().all(|m| m.passed)
        && sub_inequality.iter().all(|m| m.passed)
        && super_inequality.iter().all(|m| m.passed)
        && growth.passed()
        && positivity.passed();

    Ok(HypothesisCertificate {
        recipe: pair.recipe,
        lambda: pair.lambda,
        ordering,
        normal_lower,
        normal_upper,
        sub_inequality,
        super_inequality,
        growth,
        positivity,
        upper_bounded: pair.upper_bounded,
        quadrature: "nodal strong form at interior nodes; coupling extremes at interval endpoints; growth sampled at cell centres".into(),
        tolerances: *tol,
        passed,
    })
}

fn singular_growth(grid: &Grid, lower: &[&[f64]; 2], upper: &[&[f64]; 2], exps: &[[f64; 2]; 2]) -> GrowthBound {
    let gamma = exps
        .iter()
        .flatten()
        .cloned()
        .filter(|&a| a < 0.0)
        .fold(f64::INFINITY, f64::min);
    if !gamma.is_finite() {
        // no singular term at all: any gamma in (-1, 0) works with C = sup |f|
        let m = bounded_sup(grid, lower, upper, exps);
        return GrowthBound::Singular { c: m, gamma: -0.5, passed: m.is_finite() };
    }
    let mut c: f64 = 0.0;
    for (nodes, centre) in grid.cells() {
        let avg = |w: &[f64]| nodes.iter().map(|&k| w[k]).sum::<f64>() / nodes.len() as f64;
        let lo = [avg(lower[0]), avg(lower[1])];
        let hi = [avg(upper[0]), avg(upper[1])];
        let d = grid.distance_to_boundary(&centre[..grid.dimension()]);
        for row in exps {
            let s: f64 = (0..2)
                .map(|j| {
                    let (a, b) = power_range(lo[j], hi[j], row[j]);
                    a.abs().max(b.abs())
                })
                .sum();
            c = c.max(s * d.powf(-gamma));
        }
    }
    GrowthBound::Singular { c, gamma, passed: gamma > -1.0 && gamma < 0.0 && c.is_finite() }
}

fn bounded_sup(grid: &Grid, lower: &[&[f64]; 2], upper: &[&[f64]; 2], exps: &[[f64; 2]; 2]) -> f64 {
    let mut m: f64 = 0.0;
    for k in 0..grid.len() {
        for row in exps {
            let s: f64 = (0..2)
                .map(|j| {
                    let (a, b) = power_range(lower[j][k], upper[j][k], row[j]);
                    a.abs().max(b.abs())
                })
                .sum();
            m = m.max(s);
        }
    }
    m
}

fn distance_positivity(grid: &Arc<Grid>, lower: &[&[f64]; 2]) -> Positivity {
    let d = distance_field(grid);
    let c = grid
        .interior_nodes()
        .map(|k| lower[0][k].min(lower[1][k]) / d.values()[k])
        .fold(f64::INFINITY, f64::min);
    Positivity::DistanceMultiple { c, passed: c > 0.0 }
}

/// Starting value of the `Λ` search.
pub fn lambda_start(recipe: Recipe, e: &ExponentSet, aux: &Auxiliary) -> Result<f64> {
    Ok(match recipe {
        Recipe::T3 => {
            let (phi, y) = t3_sups(aux)?;
            lambda_floor_t3(e, phi, y).max(2.0)
        }
        _ => 2.0,
    })
}

pub const MAX_LAMBDA_DOUBLINGS: usize = 60;

/// Doubles `Λ` from the recipe's starting value until the certificate
/// passes.
pub fn construct_auto(
    recipe: Recipe,
    grid: &Arc<Grid>,
    e: &ExponentSet,
    aux: &Auxiliary,
    eps_grad: f64,
    tol: &VerifyTolerances,
) -> Result<(SubSupPair, HypothesisCertificate)> {
    let mut lambda = lambda_start(recipe, e, aux)?;
    let mut last = None;
    for _ in 0..=MAX_LAMBDA_DOUBLINGS {
        let pair = construct(recipe, grid, e, lambda, aux)?;
        let cert = verify_pair(&pair, e, eps_grad, tol)?;
        if cert.passed {
            return Ok((pair, cert));
        }
        last = Some(cert);
        lambda *= 2.0;
    }
    let detail = last.map(|c| c.failures().join("; ")).unwrap_or_default();
    Err(Error::Certificate(format!(
        "no lambda up to {lambda:e} passes the {recipe} certificate: {detail}"
    )))
}
