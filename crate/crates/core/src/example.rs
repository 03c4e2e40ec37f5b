//! The built-in coupled system of quadratic fractional integral equations on
//! `J = [0, 1]`:
//!
//! ```text
//! x(t) = f_1(t, x, y) I^{1/2} g_1(., x, y)(t) + I^{1/3} h_1^1(., x, y)(t) + I^{10/3} h_1^2(., x, y)(t)
//! y(t) = f_2(t, x, y) I^{1/2} g_2(., x, y)(t) + I^{7/4} h_2^1(., x, y)(t) + I^{29/6} h_2^2(., x, y)(t)
//! ```
//!
//! The functions are encoded exactly as written, including the absolute values
//! and the dependence of `g_2` on both unknowns. The claimed constants are
//! treated as claims: [`audit`] samples them from below.

use std::f64::consts::{E, PI};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fractional::{FracOrder, RlWeights};
use crate::grid::{Grid, GridFunction, PairFunction};
use crate::hybrid::HybridProblem;
use crate::hypothesis::{self, differs, Discrepancy, Model, ProblemSpec, TheoremReport};
use crate::matrix::NonnegMatrix;
use crate::perov::{estimate_lipschitz, sample_ball_pairs, PairOperator};

pub fn f1(t: f64, x: f64, _y: f64) -> f64 {
    (3.0 * (PI * t).cos() + 2.0 * t) / (5.0 * (2.0 + 10.0 * t * t) * (x.abs() + 3.0))
}

pub fn f2(t: f64, _x: f64, y: f64) -> f64 {
    (4.0 * (PI * t).cos() + 3.0 * t) / (7.0 * (3.0 + 8.0 * t * t) * (y.abs() + 6.0))
}

/// `g_1 = g_2`.
pub fn g(t: f64, x: f64, y: f64) -> f64 {
    3.0 / (35.0 * (13.0 - t * t)) * (7.0 * x.abs() + 15.0 * y.abs())
}

pub fn h11(t: f64, x: f64, _y: f64) -> f64 {
    let u = x.abs();
    2.0 * t * (-3.0 * t).exp() / (15.0 * (3.0 + t)) * ((x * x + 9.0 * u) / (u + 5.0) + 12.0 * (3.0 * t).exp() / 5.0)
}

pub fn h12(t: f64, x: f64, _y: f64) -> f64 {
    let u = x.abs();
    2.0 * t * (PI * t).sin() / (14.0 + t * t) * ((x * x + 5.0 * u) / (u + 8.0) + 1.0 / 3.0)
}

pub fn h21(t: f64, _x: f64, y: f64) -> f64 {
    let u = y.abs();
    t * t.sin() / (7.0 * (4.0 + t.exp())) * ((y * y + 4.0 * u) / (u + 3.0) + t.cos())
}

pub fn h22(t: f64, _x: f64, y: f64) -> f64 {
    let u = y.abs();
    3.0 * t * t.cos() / (10.0 * (4.0 - t * t)) * ((y * y + 5.0 * u) / (u + 4.0) + t / (t + 2.0))
}

type Pointwise = fn(f64, f64, f64) -> f64;

const F: [Pointwise; 2] = [f1, f2];
/// `H[k][i] = h_{i+1}^{k+1}`.
const H: [[Pointwise; 2]; 2] = [[h11, h21], [h12, h22]];

/// Claimed constants of the built-in system.
pub fn builtin_spec() -> ProblemSpec {
    let o = |v: f64| FracOrder::new(v).expect("positive order");
    ProblemSpec {
        t_end: 1.0,
        alpha: [o(0.5), o(0.5)],
        beta: vec![[o(1.0 / 3.0), o(7.0 / 4.0)], [o(10.0 / 3.0), o(29.0 / 6.0)]],
        a: [[1.0 / 12.0, 0.0], [0.0, 1.0 / 6.0]],
        b: vec![
            [[3.0 / 50.0, 0.0], [0.0, 4.0 / (21.0 * (4.0 + E))]],
            [[1.0 / 12.0, 0.0], [0.0, 1.0 / 8.0]],
        ],
        p: 0.25,
        f0: 1.0 / 36.0,
        h0: 2.0 / 25.0,
        r0: 2.0,
        rho: Some(1.0 / 6.0),
        reported_combined: Some([[0.0990, 0.0], [0.0, 0.0653]]),
        model: Some(Model::BuiltinExample),
    }
}

fn pointwise(p: &PairFunction, f: Pointwise) -> Result<GridFunction> {
    let grid = p.grid();
    let (x, y) = (p.first().samples(), p.second().samples());
    GridFunction::new(
        grid,
        grid.nodes().enumerate().map(|(j, t)| f(t, x[j], y[j])).collect(),
    )
}

/// `A_i(x, y)(t) = f_i(t, x(t), y(t))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct OperatorA;

impl PairOperator for OperatorA {
    fn apply(&self, p: &PairFunction) -> Result<PairFunction> {
        PairFunction::new(pointwise(p, f1)?, pointwise(p, f2)?)
    }
}

/// `B_i(x, y) = I^{a_i} g_i(., x, y)`.
#[derive(Debug, Clone)]
pub struct OperatorB {
    weights: Arc<[RlWeights; 2]>,
}

impl PairOperator for OperatorB {
    fn apply(&self, p: &PairFunction) -> Result<PairFunction> {
        let gv = pointwise(p, g)?;
        PairFunction::new(self.weights[0].apply(&gv)?, self.weights[1].apply(&gv)?)
    }
}

/// `C_i(x, y) = sum_k I^{b_i^k} h_i^k(., x, y)`.
#[derive(Debug, Clone)]
pub struct OperatorC {
    /// `weights[k][i]` for order `b_i^k`.
    weights: Arc<Vec<[RlWeights; 2]>>,
}

impl PairOperator for OperatorC {
    fn apply(&self, p: &PairFunction) -> Result<PairFunction> {
        let mut out = [GridFunction::zeros(p.grid()), GridFunction::zeros(p.grid())];
        for (k, w) in self.weights.iter().enumerate() {
            for i in 0..2 {
                let h = pointwise(p, H[k][i])?;
                out[i] = out[i].add(&w[i].apply(&h)?)?;
            }
        }
        let [x, y] = out;
        PairFunction::new(x, y)
    }
}

/// Operators of the built-in system discretized on one grid.
#[derive(Debug, Clone)]
pub struct ExampleOperators {
    pub a: OperatorA,
    pub b: OperatorB,
    pub c: OperatorC,
}

impl ExampleOperators {
    pub fn new(grid: Grid, spec: &ProblemSpec) -> Self {
        let b = [
            RlWeights::new(grid, spec.alpha[0]),
            RlWeights::new(grid, spec.alpha[1]),
        ];
        let c = spec
            .beta
            .iter()
            .map(|orders| [RlWeights::new(grid, orders[0]), RlWeights::new(grid, orders[1])])
            .collect();
        Self {
            a: OperatorA,
            b: OperatorB { weights: Arc::new(b) },
            c: OperatorC { weights: Arc::new(c) },
        }
    }
}

/// The built-in spec and its hybrid problem on a uniform grid of `intervals`
/// subintervals.
pub fn builtin_example(intervals: usize) -> Result<(ProblemSpec, HybridProblem)> {
    let spec = builtin_spec();
    let problem = example_problem(&spec, intervals)?;
    Ok((spec, problem))
}

/// Hybrid problem for the built-in functions with the constants of `spec`.
///
/// `spec.beta` must have two terms (one per `h_i^k` family).
pub fn example_problem(spec: &ProblemSpec, intervals: usize) -> Result<HybridProblem> {
    spec.validate()?;
    if spec.terms() != 2 {
        return Err(crate::Error::InvalidConfig(format!(
            "the built-in functions have 2 terms in C, spec has {}",
            spec.terms()
        )));
    }
    let grid = Grid::new(spec.t_end, intervals)?;
    let ops = ExampleOperators::new(grid, spec);
    HybridProblem::new(
        Box::new(ops.a),
        Box::new(ops.b),
        Box::new(ops.c),
        hypothesis::build_ma(spec)?,
        hypothesis::build_mc(spec)?,
        hypothesis::build_b_bound(spec)?,
        spec.r0,
    )
}

/// Sampling settings for [`audit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub samples: usize,
    pub seed: u64,
    /// Random `(x, y)` points for the regularity and pointwise checks.
    pub point_samples: usize,
    pub a_min: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            samples: 500,
            seed: 20_240_601,
            point_samples: 1_000,
            a_min: crate::hybrid::DEFAULT_A_MIN,
        }
    }
}

/// Lower-bound audit of the claimed constants of the built-in system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub config: AuditConfig,
    pub intervals: usize,
    /// Sampled Lipschitz matrix of the operator `A`.
    pub lipschitz_a: NonnegMatrix,
    /// Sampled Lipschitz matrix of the operator `C`.
    pub lipschitz_c: NonnegMatrix,
    pub lipschitz_a_ok: bool,
    pub lipschitz_c_ok: bool,
    /// Sampled pointwise Lipschitz constants of `f_i`.
    pub pointwise_a: [[f64; 2]; 2],
    /// Sampled pointwise Lipschitz constants of `h_i^k`.
    pub pointwise_b: Vec<[[f64; 2]; 2]>,
    pub pointwise_ok: bool,
    /// Largest sampled pointwise constant (lower estimate of `rho`).
    pub rho_sampled: f64,
    /// `max_i sup_t |f_i(t, 0, 0)|` on the grid.
    pub f0_grid: f64,
    /// `max_{i,k} sup_t |h_i^k(t, 0, 0)|` on the grid.
    pub h0_grid: f64,
    /// `max |g_i|` over the grid and constant states in the ball.
    pub p_grid: f64,
    /// Smallest `|f_i|` over the grid and sampled states in the ball.
    pub a_min_observed: f64,
    pub regularity_ok: bool,
    /// `f_i(., 0, 0)` takes both signs on the grid (so vanishes somewhere on `J`).
    pub sign_change: [bool; 2],
    /// Theorem report with `P`, `F0`, `H0` replaced by the larger of claimed and audited values.
    pub audited_report: TheoremReport,
    pub failed_checks: Vec<String>,
    pub discrepancies: Vec<Discrepancy>,
    pub pass: bool,
}

/// Samples the built-in system's constants from below and re-runs the
/// theorem check with the audited values.
pub fn audit(spec: &ProblemSpec, intervals: usize, config: AuditConfig) -> Result<AuditReport> {
    spec.validate()?;
    let grid = Grid::new(spec.t_end, intervals)?;
    let ops = ExampleOperators::new(grid, spec);
    let r0 = spec.r0;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let pairs = sample_ball_pairs(grid, r0, config.samples, &mut rng)?;
    let lipschitz_a = estimate_lipschitz(&ops.a, &pairs)?;
    let lipschitz_c = estimate_lipschitz(&ops.c, &pairs)?;
    let ma = hypothesis::build_ma(spec)?;
    let mc = hypothesis::build_mc(spec)?;
    let lipschitz_a_ok = lipschitz_a.entrywise_leq(&ma)?;
    let lipschitz_c_ok = lipschitz_c.entrywise_leq(&mc)?;

    // Pointwise difference quotients, one argument perturbed at a time.
    let mut pointwise_a = [[0.0; 2]; 2];
    let mut pointwise_b = vec![[[0.0; 2]; 2]; spec.terms()];
    let t_end = spec.t_end;
    for _ in 0..config.point_samples {
        let t = rng.gen_range(0.0..=t_end);
        let u = [rng.gen_range(-r0..=r0), rng.gen_range(-r0..=r0)];
        let j = rng.gen_range(0..2);
        let mut v = u;
        v[j] = rng.gen_range(-r0..=r0);
        let d = (u[j] - v[j]).abs();
        if d == 0.0 {
            continue;
        }
        for i in 0..2 {
            let q = (F[i](t, u[0], u[1]) - F[i](t, v[0], v[1])).abs() / d;
            pointwise_a[i][j] = f64::max(pointwise_a[i][j], q);
            for (k, hk) in H.iter().enumerate().take(spec.terms()) {
                let q = (hk[i](t, u[0], u[1]) - hk[i](t, v[0], v[1])).abs() / d;
                pointwise_b[k][i][j] = f64::max(pointwise_b[k][i][j], q);
            }
        }
    }
    let pointwise_ok = pointwise_a
        .iter()
        .flatten()
        .zip(spec.a.iter().flatten())
        .chain(pointwise_b.iter().flatten().flatten().zip(spec.b.iter().flatten().flatten()))
        .all(|(s, c)| s <= c);
    let rho_sampled = pointwise_a
        .iter()
        .flatten()
        .chain(pointwise_b.iter().flatten().flatten())
        .copied()
        .fold(0.0, f64::max);

    let f0_grid = F
        .iter()
        .map(|f| grid.nodes().map(|t| f(t, 0.0, 0.0).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    let h0_grid = H
        .iter()
        .take(spec.terms())
        .flatten()
        .map(|h| grid.nodes().map(|t| h(t, 0.0, 0.0).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);

    const LATTICE: usize = 20;
    let lattice = |k: usize| -r0 + 2.0 * r0 * k as f64 / LATTICE as f64;
    let mut p_grid: f64 = 0.0;
    for t in grid.nodes() {
        for kx in 0..=LATTICE {
            for ky in 0..=LATTICE {
                p_grid = p_grid.max(g(t, lattice(kx), lattice(ky)).abs());
            }
        }
    }

    let mut a_min_observed = F
        .iter()
        .map(|f| grid.nodes().map(|t| f(t, 0.0, 0.0).abs()).fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min);
    for _ in 0..config.point_samples {
        let (x, y) = (rng.gen_range(-r0..=r0), rng.gen_range(-r0..=r0));
        for t in grid.nodes() {
            for f in F {
                a_min_observed = a_min_observed.min(f(t, x, y).abs());
            }
        }
    }
    let regularity_ok = a_min_observed > config.a_min;
    let sign_change = F.map(|f| {
        let (mut pos, mut neg) = (false, false);
        for t in grid.nodes() {
            let v = f(t, 0.0, 0.0);
            pos |= v > 0.0;
            neg |= v < 0.0;
        }
        pos && neg
    });

    let mut audited = spec.clone();
    audited.p = spec.p.max(p_grid);
    audited.f0 = spec.f0.max(f0_grid);
    audited.h0 = spec.h0.max(h0_grid);
    audited.rho = None;
    audited.reported_combined = None;
    let audited_report = hypothesis::full_report(&audited)?;

    let mut discrepancies = Vec::new();
    for (name, claimed, computed, note) in [
        ("p", spec.p, p_grid, "sup of |g_i| over the ball exceeds the claimed bound"),
        ("f0", spec.f0, f0_grid, "grid maximum of |f_i(., 0, 0)|"),
        ("h0", spec.h0, h0_grid, "grid maximum of |h_i^k(., 0, 0)|"),
    ] {
        if differs(claimed, computed) {
            let note = if name == "p" && computed <= claimed {
                "sup of |g_i| over the ball is below the claimed bound"
            } else {
                note
            };
            discrepancies.push(Discrepancy::new(name, claimed, computed, note));
        }
    }
    for (i, changes) in sign_change.iter().enumerate() {
        if *changes {
            discrepancies.push(Discrepancy::new(
                format!("f{}_sign_change", i + 1),
                0.0,
                0.0,
                "f_i(., 0, 0) changes sign on J, so |A_i| has no positive lower bound on the continuum",
            ));
        }
    }

    let mut failed_checks = Vec::new();
    for (name, ok) in [
        ("lipschitz_a", lipschitz_a_ok),
        ("lipschitz_c", lipschitz_c_ok),
        ("pointwise_lipschitz", pointwise_ok),
        ("regularity", regularity_ok),
        ("audited_theorem", audited_report.overall_pass),
    ] {
        if !ok {
            failed_checks.push(name.to_string());
        }
    }

    Ok(AuditReport {
        config,
        intervals,
        lipschitz_a,
        lipschitz_c,
        lipschitz_a_ok,
        lipschitz_c_ok,
        pointwise_a,
        pointwise_b,
        pointwise_ok,
        rho_sampled,
        f0_grid,
        h0_grid,
        p_grid,
        a_min_observed,
        regularity_ok,
        sign_change,
        audited_report,
        pass: failed_checks.is_empty(),
        failed_checks,
        discrepancies,
    })
}
