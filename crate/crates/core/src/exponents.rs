use serde::{Deserialize, Serialize};

/// Exponents of the system
///
/// ```text
/// -Δ_{p1} u + |u|^{p1-2} u = u^{alpha1} + v^{beta1}
/// -Δ_{p2} v + |v|^{p2-2} v = u^{alpha2} + v^{beta2}
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub p1: f64,
    pub p2: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub alpha2: f64,
    pub beta2: f64,
}

impl ExponentSet {
    pub fn new(p1: f64, p2: f64, alpha1: f64, beta1: f64, alpha2: f64, beta2: f64) -> Self {
        Self { p1, p2, alpha1, beta1, alpha2, beta2 }
    }

    /// Same `p` and one exponent everywhere.
    pub fn uniform(p: f64, exponent: f64) -> Self {
        Self::new(p, p, exponent, exponent, exponent, exponent)
    }

    pub fn p(&self, i: usize) -> f64 {
        match i {
            0 => self.p1,
            _ => self.p2,
        }
    }

    pub fn is_cooperative(&self) -> bool {
        self.alpha2.min(self.beta1) > 0.0
    }

    pub fn is_competitive(&self) -> bool {
        self.alpha2.min(self.beta1) < 0.0
    }

    /// Singular regime: -1 < alpha1, beta2 < 0, -1 < beta1 < p1 - 1, -1 < alpha2 < p2 - 1.
    pub fn in_singular_regime(&self) -> bool {
        self.p1 > 1.0
            && self.p2 > 1.0
            && regime_checks(self).iter().all(|c| c.passed)
    }

    pub fn gamma1(&self) -> f64 {
        (-self.alpha1).max(-self.beta1)
    }

    pub fn gamma2(&self) -> f64 {
        (-self.alpha2).max(-self.beta2)
    }

    pub fn gammas(&self) -> [f64; 2] {
        [self.gamma1(), self.gamma2()]
    }

    /// `max{-γ1 α_i / (p1 - 1), -γ2 β_i / (p2 - 1)}` for i = 1, 2.
    pub fn gamma_hats(&self) -> [f64; 2] {
        let (g1, g2) = (self.gamma1(), self.gamma2());
        let hat = |a: f64, b: f64| (-g1 * a / (self.p1 - 1.0)).max(-g2 * b / (self.p2 - 1.0));
        [hat(self.alpha1, self.beta1), hat(self.alpha2, self.beta2)]
    }

    /// The system with the roles of `u` and `v` exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.p2, self.p1, self.beta2, self.alpha2, self.beta1, self.alpha1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalCheck {
    pub name: String,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub passed: bool,
}

impl IntervalCheck {
    fn open(name: &str, value: f64, lower: f64, upper: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            lower,
            upper,
            passed: value > lower && value < upper,
        }
    }
}

fn regime_checks(e: &ExponentSet) -> Vec<IntervalCheck> {
    vec![
        IntervalCheck::open("-1 < alpha1 < 0", e.alpha1, -1.0, 0.0),
        IntervalCheck::open("-1 < beta2 < 0", e.beta2, -1.0, 0.0),
        IntervalCheck::open("-1 < beta1 < p1 - 1", e.beta1, -1.0, e.p1 - 1.0),
        IntervalCheck::open("-1 < alpha2 < p2 - 1", e.alpha2, -1.0, e.p2 - 1.0),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub p_valid: bool,
    pub checks: Vec<IntervalCheck>,
    pub cooperative: bool,
    pub competitive: bool,
    pub dimension: usize,
    /// Raised when some `p_i >= N`; the formulas stay well defined.
    pub dimension_advisories: Vec<String>,
    pub valid: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<&IntervalCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

pub fn validate_exponents(e: &ExponentSet, dimension: usize) -> ValidationReport {
    let p_valid = e.p1 > 1.0 && e.p2 > 1.0 && e.p1.is_finite() && e.p2.is_finite();
    let checks = regime_checks(e);
    let mut dimension_advisories = Vec::new();
    for (name, p) in [("p1", e.p1), ("p2", e.p2)] {
        if p >= dimension as f64 {
            dimension_advisories.push(format!(
                "{name} = {p} is not below the dimension N = {dimension}; the existence theory assumes 1 < p < N"
            ));
        }
    }
    let valid = p_valid && checks.iter().all(|c| c.passed);
    ValidationReport {
        p_valid,
        checks,
        cooperative: e.is_cooperative(),
        competitive: e.is_competitive(),
        dimension,
        dimension_advisories,
        valid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_minus_half_is_competitive_and_valid() {
        let r = validate_exponents(&ExponentSet::uniform(2.0, -0.5), 2);
        assert!(r.valid);
        assert!(r.competitive && !r.cooperative);
        assert_eq!(r.checks.len(), 4);
        assert_eq!(r.dimension_advisories.len(), 2);
    }

    #[test]
    fn alpha1_below_minus_one_fails() {
        let mut e = ExponentSet::uniform(2.0, -0.5);
        e.alpha1 = -1.5;
        let r = validate_exponents(&e, 2);
        assert!(!r.valid);
        let failed = r.failures();
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0].name, "-1 < alpha1 < 0");
    }

    #[test]
    fn beta1_upper_bound_is_strict() {
        let mut e = ExponentSet::uniform(2.0, -0.5);
        e.beta1 = e.p1 - 1.0;
        let r = validate_exponents(&e, 3);
        assert_eq!(r.failures()[0].name, "-1 < beta1 < p1 - 1");
        e.beta1 = 0.999;
        assert!(validate_exponents(&e, 3).valid);
        assert!(validate_exponents(&e, 3).cooperative == false);
    }

    #[test]
    fn gamma_hat_formula() {
        let e = ExponentSet::uniform(2.0, -0.5);
        assert_eq!(e.gammas(), [0.5, 0.5]);
        assert_eq!(e.gamma_hats(), [0.25, 0.25]);
    }

    #[test]
    fn report_is_pure() {
        let e = ExponentSet::new(2.5, 1.7, -0.3, 0.2, -0.9, -0.1);
        assert_eq!(validate_exponents(&e, 2), validate_exponents(&e, 2));
    }
}
