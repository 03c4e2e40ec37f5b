//! Solvers for the hybrid equation `x = Ax . Bx + Cx` on the product space.
//!
//! For a frozen `y` the inner map `phi_y(x) = Ax . By + Cx` is a Perov
//! contraction with Lipschitz matrix `||By|| M_A + M_C`, where column `j` of
//! `M_A` is scaled by `||(By)_j||`. Its unique fixed point `x_y` realizes
//! `((I - C)/A)^{-1} B y` without ever dividing by `A`. The outer equation
//! `y = x_y` has no contraction guarantee; it is solved by (damped) Picard
//! iteration and accepted only on its residual.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, PairFunction};
use crate::matrix::{NonnegMatrix, OrderedVector};
use crate::perov::{perov_iterate, ContractionCertificate, FixedPointResult, PairOperator};

/// Default floor on `|A_i(x)(t)|`.
pub const DEFAULT_A_MIN: f64 = 1e-8;
pub const DEFAULT_INNER_TOL: f64 = 1e-8;
pub const DEFAULT_INNER_MAX_ITER: usize = 500;

/// Damping factors tried in order when a plain outer step does not reduce the residual.
const DAMPING: [f64; 3] = [1.0, 0.5, 0.25];
/// Consecutive non-decreasing outer steps tolerated before giving up.
const MAX_STALLS: usize = 5;

pub type BoxedOperator = Box<dyn PairOperator + Send + Sync>;

/// Operator triple `(A, B, C)` with its Lipschitz data and working ball.
pub struct HybridProblem {
    pub a: BoxedOperator,
    pub b: BoxedOperator,
    pub c: BoxedOperator,
    pub ma: NonnegMatrix,
    pub mc: NonnegMatrix,
    /// Componentwise bound on `||B y||` over the ball.
    pub b_norm_bound: OrderedVector,
    pub radius: f64,
    pub a_min: f64,
    pub inner_tol: OrderedVector,
    pub inner_max_iter: usize,
}

impl std::fmt::Debug for HybridProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HybridProblem")
            .field("ma", &self.ma)
            .field("mc", &self.mc)
            .field("b_norm_bound", &self.b_norm_bound)
            .field("radius", &self.radius)
            .field("a_min", &self.a_min)
            .field("inner_tol", &self.inner_tol)
            .field("inner_max_iter", &self.inner_max_iter)
            .finish_non_exhaustive()
    }
}

impl HybridProblem {
    pub fn new(
        a: BoxedOperator,
        b: BoxedOperator,
        c: BoxedOperator,
        ma: NonnegMatrix,
        mc: NonnegMatrix,
        b_norm_bound: OrderedVector,
        radius: f64,
    ) -> Result<Self> {
        if ma.dim() != 2 || mc.dim() != 2 || b_norm_bound.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: [ma.dim(), mc.dim(), b_norm_bound.dim()]
                    .into_iter()
                    .find(|&d| d != 2)
                    .unwrap_or(2),
            });
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidConfig(format!("radius must be positive, got {radius}")));
        }
        Ok(Self {
            a,
            b,
            c,
            ma,
            mc,
            b_norm_bound,
            radius,
            a_min: DEFAULT_A_MIN,
            inner_tol: OrderedVector::splat(2, DEFAULT_INNER_TOL),
            inner_max_iter: DEFAULT_INNER_MAX_ITER,
        })
    }

    pub fn with_a_min(mut self, a_min: f64) -> Self {
        self.a_min = a_min;
        self
    }

    pub fn with_inner_tol(mut self, tol: f64) -> Self {
        self.inner_tol = OrderedVector::splat(2, tol);
        self
    }

    /// `||B(S)|| M_A + M_C` with the stored bound.
    pub fn combined(&self) -> Result<NonnegMatrix> {
        combined_matrix(&self.ma, &self.mc, &self.b_norm_bound)
    }
}

/// Entry `(i, j)` is `b_j * MA[i][j] + MC[i][j]`.
pub fn combined_matrix(ma: &NonnegMatrix, mc: &NonnegMatrix, b: &OrderedVector) -> Result<NonnegMatrix> {
    let n = ma.dim();
    for d in [mc.dim(), b.dim()] {
        if d != n {
            return Err(Error::DimensionMismatch { expected: n, found: d });
        }
    }
    if !b.is_nonnegative() {
        return Err(Error::InvalidVector(format!("norm bound must be nonnegative, got {b}")));
    }
    let entries = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| b.get(j) * ma.get(i, j) + mc.get(i, j))
        .collect();
    NonnegMatrix::from_row_major(n, entries)
}

fn check_regular(ax: &PairFunction, floor: f64) -> Result<()> {
    for component in 0..2 {
        let f: &GridFunction = ax.component(component);
        if let Some((node, v)) = f
            .samples()
            .iter()
            .enumerate()
            .find(|(_, v)| v.abs() < floor)
        {
            return Err(Error::RegularityViolation {
                component: component + 1,
                node,
                value: v.abs(),
                floor,
            });
        }
    }
    Ok(())
}

/// Unique fixed point of `phi_y(x) = Ax . By + Cx`.
///
/// The certificate uses the larger of the stored bound and the actual
/// `||By||`, so it stays valid even when `y` lies outside the ball.
pub fn inner_solve(
    p: &HybridProblem,
    y: &PairFunction,
    x_init: &PairFunction,
    tol: &OrderedVector,
) -> Result<FixedPointResult> {
    let by = p.b.apply(y)?;
    let b_eff = p.b_norm_bound.sup(&by.pair_norm())?;
    let cert = ContractionCertificate::new(combined_matrix(&p.ma, &p.mc, &b_eff)?);
    let phi = |x: &PairFunction| -> Result<PairFunction> {
        let ax = p.a.apply(x)?;
        check_regular(&ax, p.a_min)?;
        ax.multiply(&by)?.add(&p.c.apply(x)?)
    };
    perov_iterate(&phi, x_init, &cert, tol, p.inner_max_iter)
}

/// `pair_norm(x - (Ax . Bx + Cx))`.
pub fn residual(p: &HybridProblem, x: &PairFunction) -> Result<OrderedVector> {
    let image = p.a.apply(x)?.multiply(&p.b.apply(x)?)?.add(&p.c.apply(x)?)?;
    Ok(x.sub(&image)?.pair_norm())
}

/// Outcome of [`outer_solve`].
#[derive(Debug, Clone)]
pub struct OuterSolution {
    pub point: PairFunction,
    /// Accepted outer steps.
    pub iterations: usize,
    /// Residual of the start point followed by that of every accepted iterate.
    pub residuals: Vec<OrderedVector>,
    /// Damping factor used for each accepted step.
    pub dampings: Vec<f64>,
    /// Total inner Perov iterations.
    pub inner_iterations: usize,
    /// Componentwise maximum of `pair_norm` over all accepted iterates.
    pub max_norm: OrderedVector,
    /// Set when an accepted iterate left the ball of radius `p.radius`.
    pub radius_exceeded: bool,
    pub converged: bool,
}

impl OuterSolution {
    pub fn residual(&self) -> &OrderedVector {
        self.residuals.last().expect("start residual is always recorded")
    }
}

/// Damped Picard iteration `y <- (1 - l) y + l x_y`, accepted by residual.
///
/// Each step tries `l = 1, 1/2, 1/4` and takes the first one that lowers the
/// largest residual component; when none does the `1/4` step is taken anyway
/// and counted as a stall. The inner solve is warm-started from the current
/// outer iterate.
pub fn outer_solve(
    p: &HybridProblem,
    start: &PairFunction,
    tol: &OrderedVector,
    max_outer: usize,
) -> Result<OuterSolution> {
    if !tol.values().iter().all(|&v| v > 0.0) || tol.dim() != 2 {
        return Err(Error::InvalidConfig(format!("outer tolerance must be a positive 2-vector, got {tol}")));
    }
    let radius = OrderedVector::splat(2, p.radius);
    let mut y = start.clone();
    let mut r = residual(p, &y)?;
    let mut sol = OuterSolution {
        point: y.clone(),
        iterations: 0,
        residuals: vec![r.clone()],
        dampings: Vec::new(),
        inner_iterations: 0,
        max_norm: y.pair_norm(),
        radius_exceeded: !y.pair_norm().leq(&radius)?,
        converged: false,
    };
    let mut best = r.clone();
    let mut stalls = 0;

    for _ in 0..max_outer {
        if r.leq(tol)? {
            break;
        }
        let inner = inner_solve(p, &y, &y, &p.inner_tol)?;
        sol.inner_iterations += inner.iterations;
        if !inner.converged {
            return Err(Error::NoConvergence {
                iterations: sol.iterations,
                best_residual: best.values().to_vec(),
            });
        }
        let mut accepted = None;
        for &lambda in &DAMPING {
            let candidate = y.lerp(&inner.point, lambda)?;
            let rc = residual(p, &candidate)?;
            let decreased = rc.max() < r.max();
            if decreased || lambda == DAMPING[DAMPING.len() - 1] {
                accepted = Some((candidate, rc, lambda, decreased));
                if decreased {
                    break;
                }
            }
        }
        let (candidate, rc, lambda, decreased) = accepted.expect("last damping factor is always taken");
        stalls = if decreased { 0 } else { stalls + 1 };
        y = candidate;
        r = rc;
        sol.iterations += 1;
        sol.dampings.push(lambda);
        sol.residuals.push(r.clone());
        let norm = y.pair_norm();
        sol.radius_exceeded |= !norm.leq(&radius)?;
        sol.max_norm = sol.max_norm.sup(&norm)?;
        if r.max() < best.max() {
            best = r.clone();
        }
        if stalls >= MAX_STALLS {
            break;
        }
    }

    if r.leq(tol)? {
        sol.point = y;
        sol.converged = true;
        return Ok(sol);
    }
    Err(Error::NoConvergence {
        iterations: sol.iterations,
        best_residual: best.values().to_vec(),
    })
}
