//! Checkable hypotheses for the coupled system
//!
//! ```text
//! x_i(t) = f_i(t, x, y) * I^{a_i} g_i(., x, y)(t) + sum_k I^{b_i^k} h_i^k(., x, y)(t),   i = 1, 2
//! ```
//!
//! given the claimed Lipschitz constants of `f_i` (`a[i][j]`) and of `h_i^k`
//! (`b[k][i][j]`), the bound `P` on `|g_i|` over the ball of radius `r0`, and
//! the sup-norms `F0`, `H0` of `f_i(., 0, 0)` and `h_i^k(., 0, 0)`.
//!
//! With `G(s) = T^s / Gamma(s + 1)` and `rho` the largest Lipschitz constant:
//!
//! ```text
//! M_A[i][j] = a[i][j]
//! M_C[i][j] = sum_k G(b_i^k) b[k][i][j]
//! ||B(S)||_i = P G(a_i)
//! rho_condition = rho * (P (G(a_1) + G(a_2)) + sum_k (G(b_1^k) + G(b_2^k)))  < 1
//! r0_min = (F0 P (G(a_1) + G(a_2)) + H0 sum_k (G(b_1^k) + G(b_2^k))) / (1 - rho_condition)
//! ```
//!
//! and `M_A`, `M_C`, `||B(S)|| M_A + M_C` must all be convergent to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::FracOrder;
use crate::hybrid::combined_matrix;
use crate::matrix::{NonnegMatrix, OrderedVector};

/// Function family attached to a spec; only the built-in system is supported
/// by the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    BuiltinExample,
}

/// Constants of a coupled two-component system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub t_end: f64,
    /// Orders `a_1, a_2` of the integrals in `B`.
    pub alpha: [FracOrder; 2],
    /// `beta[k] = [b_1^k, b_2^k]`, orders of the integrals in `C`.
    pub beta: Vec<[FracOrder; 2]>,
    /// Lipschitz constants of `f_i`: `a[i][j]`.
    pub a: [[f64; 2]; 2],
    /// Lipschitz constants of `h_i^k`: `b[k][i][j]`.
    pub b: Vec<[[f64; 2]; 2]>,
    pub p: f64,
    pub f0: f64,
    pub h0: f64,
    pub r0: f64,
    /// Claimed value of `rho`; compared against the recomputed maximum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Reported (rounded) values of the combined matrix, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reported_combined: Option<[[f64; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Error::InvalidConfig(format!("{what} must be a finite nonnegative real, got {v}"));
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidConfig(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.beta.len() != self.b.len() {
            return Err(Error::InvalidConfig(format!(
                "beta has {} terms but b has {}",
                self.beta.len(),
                self.b.len()
            )));
        }
        for v in self.a.iter().flatten() {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(bad("a", *v));
            }
        }
        for v in self.b.iter().flatten().flatten() {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(bad("b", *v));
            }
        }
        for (name, v) in [("p", self.p), ("f0", self.f0), ("h0", self.h0)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(bad(name, v));
            }
        }
        if !(self.r0.is_finite() && self.r0 > 0.0) {
            return Err(Error::InvalidConfig(format!("r0 must be positive, got {}", self.r0)));
        }
        Ok(())
    }

    /// Number of terms `m` in `C`.
    pub fn terms(&self) -> usize {
        self.beta.len()
    }

    fn mass(&self, order: FracOrder) -> f64 {
        order.unit_mass(self.t_end)
    }

    /// `G(a_1) + G(a_2)`.
    fn alpha_mass(&self) -> f64 {
        self.alpha.iter().map(|&a| self.mass(a)).sum()
    }

    /// `sum_k G(b_1^k) + G(b_2^k)`.
    fn beta_mass(&self) -> f64 {
        self.beta.iter().flatten().map(|&b| self.mass(b)).sum()
    }
}

pub fn build_ma(spec: &ProblemSpec) -> Result<NonnegMatrix> {
    NonnegMatrix::from_array(spec.a)
}

pub fn build_mc(spec: &ProblemSpec) -> Result<NonnegMatrix> {
    let mut m = [[0.0; 2]; 2];
    for (orders, consts) in spec.beta.iter().zip(&spec.b) {
        for i in 0..2 {
            let g = spec.mass(orders[i]);
            for j in 0..2 {
                m[i][j] += g * consts[i][j];
            }
        }
    }
    NonnegMatrix::from_array(m)
}

/// `||B(S)||_i <= P T^{a_i} / Gamma(a_i + 1)`.
pub fn build_b_bound(spec: &ProblemSpec) -> Result<OrderedVector> {
    OrderedVector::new(spec.alpha.iter().map(|&a| spec.p * spec.mass(a)).collect())
}

/// Largest of all Lipschitz constants `a[i][j]`, `b[k][i][j]`.
pub fn rho_max(spec: &ProblemSpec) -> f64 {
    spec.a
        .iter()
        .flatten()
        .chain(spec.b.iter().flatten().flatten())
        .copied()
        .fold(0.0, f64::max)
}

pub fn rho_condition(spec: &ProblemSpec) -> f64 {
    rho_max(spec) * (spec.p * spec.alpha_mass() + spec.beta_mass())
}

/// Smallest admissible ball radius.
pub fn r0_min(spec: &ProblemSpec) -> Result<f64> {
    let denom = 1.0 - rho_condition(spec);
    if denom <= 0.0 {
        return Err(Error::ConditionViolated(format!(
            "rho_condition = {} is not below 1",
            rho_condition(spec)
        )));
    }
    Ok((spec.f0 * spec.p * spec.alpha_mass() + spec.h0 * spec.beta_mass()) / denom)
}

/// A claimed value that disagrees with its recomputation. Informational: a
/// discrepancy never fails a report by itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub name: String,
    pub claimed: f64,
    pub computed: f64,
    pub note: String,
}

impl Discrepancy {
    pub fn new(name: impl Into<String>, claimed: f64, computed: f64, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            claimed,
            computed,
            note: note.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triple<T> {
    pub ma: T,
    pub mc: T,
    pub combined: T,
}

/// Every computed certificate for a [`ProblemSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub ma: NonnegMatrix,
    pub mc: NonnegMatrix,
    pub combined: NonnegMatrix,
    pub b_norm_bound: OrderedVector,
    pub rho: f64,
    pub rho_condition_value: f64,
    pub rho_condition_pass: bool,
    pub spectral_radii: Triple<f64>,
    pub matrices_converge: Triple<bool>,
    pub r0: f64,
    /// `None` when the rho condition fails (no admissible radius).
    pub r0_min: Option<f64>,
    pub r0_pass: bool,
    pub overall_pass: bool,
    pub failed_checks: Vec<String>,
    pub discrepancies: Vec<Discrepancy>,
}

/// Relative gap above which a claimed constant is reported as a discrepancy.
const DISCREPANCY_RTOL: f64 = 1e-9;

pub(crate) fn differs(claimed: f64, computed: f64) -> bool {
    (claimed - computed).abs() > DISCREPANCY_RTOL * claimed.abs().max(computed.abs()).max(1e-300)
}

pub fn full_report(spec: &ProblemSpec) -> Result<TheoremReport> {
    spec.validate()?;
    let ma = build_ma(spec)?;
    let mc = build_mc(spec)?;
    let b_norm_bound = build_b_bound(spec)?;
    let combined = combined_matrix(&ma, &mc, &b_norm_bound)?;
    let rho = rho_max(spec);
    let rho_condition_value = rho_condition(spec);
    let rho_condition_pass = rho_condition_value < 1.0;
    let spectral_radii = Triple {
        ma: ma.spectral_radius(),
        mc: mc.spectral_radius(),
        combined: combined.spectral_radius(),
    };
    let matrices_converge = Triple {
        ma: spectral_radii.ma < 1.0,
        mc: spectral_radii.mc < 1.0,
        combined: spectral_radii.combined < 1.0,
    };
    let r0_min = r0_min(spec).ok();
    let r0_pass = r0_min.is_some_and(|m| m <= spec.r0);

    let mut failed_checks = Vec::new();
    for (name, ok) in [
        ("rho_condition", rho_condition_pass),
        ("ma_convergent", matrices_converge.ma),
        ("mc_convergent", matrices_converge.mc),
        ("combined_convergent", matrices_converge.combined),
        ("r0_admissible", r0_pass),
    ] {
        if !ok {
            failed_checks.push(name.to_string());
        }
    }

    let mut discrepancies = Vec::new();
    if let Some(claimed) = spec.rho {
        if differs(claimed, rho) {
            discrepancies.push(Discrepancy::new("rho", claimed, rho, "claimed rho differs from the largest Lipschitz constant"));
        }
    }
    if let Some(reported) = spec.reported_combined {
        for i in 0..2 {
            for j in 0..2 {
                let computed = combined.get(i, j);
                if differs(reported[i][j], computed) {
                    discrepancies.push(Discrepancy::new(
                        format!("combined[{i}][{j}]"),
                        reported[i][j],
                        computed,
                        "reported (rounded) entry differs from recomputation",
                    ));
                }
            }
        }
    }

    Ok(TheoremReport {
        ma,
        mc,
        combined,
        b_norm_bound,
        rho,
        rho_condition_value,
        rho_condition_pass,
        spectral_radii,
        matrices_converge,
        r0: spec.r0,
        r0_min,
        r0_pass,
        overall_pass: failed_checks.is_empty(),
        failed_checks,
        discrepancies,
    })
}

impl TheoremReport {
    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let flag = |ok: bool| if ok { "pass" } else { "FAIL" };
        s.push_str(&format!("M_A              = {}\n", self.ma));
        s.push_str(&format!("M_C              = {}\n", self.mc));
        s.push_str(&format!("||B(S)||         = {}\n", self.b_norm_bound));
        s.push_str(&format!("||B(S)||M_A+M_C  = {}\n", self.combined));
        s.push_str(&format!(
            "spectral radii   = {:.6e} / {:.6e} / {:.6e}  [{}]\n",
            self.spectral_radii.ma,
            self.spectral_radii.mc,
            self.spectral_radii.combined,
            flag(self.matrices_converge.ma && self.matrices_converge.mc && self.matrices_converge.combined)
        ));
        s.push_str(&format!(
            "rho = {:.6e}, rho condition = {:.6e} < 1  [{}]\n",
            self.rho,
            self.rho_condition_value,
            flag(self.rho_condition_pass)
        ));
        match self.r0_min {
            Some(m) => s.push_str(&format!("r0_min = {m:.6e} <= r0 = {}  [{}]\n", self.r0, flag(self.r0_pass))),
            None => s.push_str("r0_min undefined (rho condition violated)  [FAIL]\n"),
        }
        for d in &self.discrepancies {
            s.push_str(&format!(
                "note: {} claimed {:.6e}, computed {:.6e} ({})\n",
                d.name, d.claimed, d.computed, d.note
            ));
        }
        s.push_str(&format!("overall: {}\n", flag(self.overall_pass)));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractional::gamma;

    fn order(v: f64) -> FracOrder {
        FracOrder::new(v).unwrap()
    }

    fn zero_spec() -> ProblemSpec {
        ProblemSpec {
            t_end: 1.0,
            alpha: [order(0.5), order(0.5)],
            beta: vec![[order(1.0), order(1.0)]],
            a: [[0.0; 2]; 2],
            b: vec![[[0.0; 2]; 2]],
            p: 0.0,
            f0: 0.0,
            h0: 0.0,
            r0: 1.0,
            rho: None,
            reported_combined: None,
            model: None,
        }
    }

    #[test]
    fn zero_spec_passes_trivially() {
        let spec = zero_spec();
        assert_eq!(build_ma(&spec).unwrap(), NonnegMatrix::zeros(2));
        assert_eq!(build_mc(&spec).unwrap(), NonnegMatrix::zeros(2));
        assert_eq!(build_b_bound(&spec).unwrap().values(), &[0.0, 0.0]);
        assert_eq!(rho_condition(&spec), 0.0);
        assert_eq!(r0_min(&spec).unwrap(), 0.0);
        let report = full_report(&spec).unwrap();
        assert!(report.overall_pass);
        assert!(report.failed_checks.is_empty());
    }

    #[test]
    fn ma_is_verbatim_and_symmetric_input_stays_symmetric() {
        let mut spec = zero_spec();
        spec.a = [[0.1, 0.3], [0.3, 0.2]];
        let ma = build_ma(&spec).unwrap();
        assert_eq!(ma.get(0, 1), ma.get(1, 0));
        assert_eq!(ma.get(1, 1), 0.2);
    }

    #[test]
    fn mc_with_unit_order_is_identity() {
        let mut spec = zero_spec();
        spec.b = vec![[[1.0, 0.0], [0.0, 1.0]]];
        let mc = build_mc(&spec).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((mc.get(i, j) - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn b_bound_with_unit_order_is_p() {
        let mut spec = zero_spec();
        spec.alpha = [order(1.0), order(1.0)];
        spec.p = 0.7;
        let b = build_b_bound(&spec).unwrap();
        assert!((b.get(0) - 0.7).abs() < 1e-15 && (b.get(1) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn r0_min_is_linear_in_h0() {
        let mut spec = zero_spec();
        spec.b = vec![[[0.1, 0.0], [0.0, 0.1]]];
        spec.h0 = 0.3;
        let once = r0_min(&spec).unwrap();
        spec.h0 = 0.6;
        let twice = r0_min(&spec).unwrap();
        assert!((twice - 2.0 * once).abs() < 1e-15);
    }

    #[test]
    fn huge_p_violates_rho_condition() {
        let mut spec = zero_spec();
        spec.a = [[0.1, 0.0], [0.0, 0.1]];
        spec.p = 1e3;
        assert!(rho_condition(&spec) > 1.0);
        assert!(matches!(r0_min(&spec), Err(Error::ConditionViolated(_))));
        let report = full_report(&spec).unwrap();
        assert!(!report.overall_pass);
        assert!(report.failed_checks.contains(&"rho_condition".to_string()));
        assert!(report.r0_min.is_none());
    }

    #[test]
    fn rho_condition_closed_form() {
        let mut spec = zero_spec();
        spec.a = [[0.2, 0.0], [0.0, 0.0]];
        spec.p = 0.5;
        // 0.2 * (0.5 * 2 / Gamma(1.5) + 2 * 1 / Gamma(2))
        let expected = 0.2 * (1.0 / gamma(1.5).unwrap() + 2.0);
        assert!((rho_condition(&spec) - expected).abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_constants() {
        let mut spec = zero_spec();
        spec.a[0][1] = -0.1;
        assert!(spec.validate().is_err());
        let mut spec = zero_spec();
        spec.b.push([[0.0; 2]; 2]);
        assert!(spec.validate().is_err());
        let mut spec = zero_spec();
        spec.r0 = 0.0;
        assert!(full_report(&spec).is_err());
    }

    #[test]
    fn claimed_rho_mismatch_is_flagged_not_failed() {
        let mut spec = zero_spec();
        spec.a = [[0.1, 0.0], [0.0, 0.0]];
        spec.rho = Some(0.2);
        let report = full_report(&spec).unwrap();
        assert!(report.overall_pass);
        assert_eq!(report.discrepancies.len(), 1);
        assert_eq!(report.discrepancies[0].name, "rho");
    }
}
