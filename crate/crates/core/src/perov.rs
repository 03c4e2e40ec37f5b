//! Fixed-point iteration for contractions with respect to a vector-valued
//! norm.
//!
//! An operator `T` on pairs is a Perov contraction with Lipschitz matrix `M`
//! when `||Tx - Ty|| <= M ||x - y||` componentwise and `rho(M) < 1`. Picard
//! iterates then converge to the unique fixed point `x*`, and every iterate
//! satisfies the a-posteriori bound
//!
//! ```text
//! ||x_k - x*|| <= (I - M)^{-1} ||x_k - x_{k-1}||      (componentwise)
//! ```
//!
//! which is recorded at every step.

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, PairFunction};
use crate::matrix::{NonnegMatrix, OrderedVector};

/// Growth factor of a step-norm component over [`DIVERGENCE_WINDOW`]
/// iterations that aborts the iteration.
const DIVERGENCE_FACTOR: f64 = 10.0;
const DIVERGENCE_WINDOW: usize = 5;

/// A (pure) operator on the product space.
pub trait PairOperator {
    fn apply(&self, p: &PairFunction) -> Result<PairFunction>;
}

impl<F> PairOperator for F
where
    F: Fn(&PairFunction) -> Result<PairFunction>,
{
    fn apply(&self, p: &PairFunction) -> Result<PairFunction> {
        self(p)
    }
}

/// Claimed Lipschitz matrix of an operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionCertificate {
    pub matrix: NonnegMatrix,
    /// Whether the claim has been audited by sampling.
    pub verified: bool,
}

impl ContractionCertificate {
    pub fn new(matrix: NonnegMatrix) -> Self {
        Self {
            matrix,
            verified: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// A step-norm component grew by more than a factor 10 over 5 iterations.
    Diverged,
}

#[derive(Debug, Clone)]
pub struct FixedPointResult {
    pub point: PairFunction,
    pub iterations: usize,
    /// `||x_k - x_{k-1}||` for `k = 1..=iterations`.
    pub step_norms: Vec<OrderedVector>,
    /// A-posteriori bound on `||x_k - x*||` for every iterate.
    pub error_bounds: Vec<OrderedVector>,
    /// Bound attached to `point`.
    pub error_bound: OrderedVector,
    pub converged: bool,
    pub stop: StopReason,
}

/// Picard iteration `x_{k+1} = T(x_k)` until `||x_{k+1} - x_k|| <= tol`.
///
/// Running out of iterations or detecting divergence is not an error: the
/// best iterate (smallest step) is returned with `converged = false`.
pub fn perov_iterate<T: PairOperator + ?Sized>(
    op: &T,
    x0: &PairFunction,
    cert: &ContractionCertificate,
    tol: &OrderedVector,
    max_iter: usize,
) -> Result<FixedPointResult> {
    let rho = cert.matrix.spectral_radius();
    if rho >= 1.0 {
        return Err(Error::NotConvergentMatrix { spectral_radius: rho });
    }
    if cert.matrix.dim() != 2 || tol.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: if tol.dim() != 2 { tol.dim() } else { cert.matrix.dim() },
        });
    }
    if !tol.values().iter().all(|&v| v > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
    }
    let inverse = cert.matrix.neumann_inverse()?;

    let mut x = x0.clone();
    let mut step_norms = Vec::new();
    let mut error_bounds = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    let mut best_point = x0.clone();
    let mut stop = StopReason::MaxIterations;

    for k in 1..=max_iter {
        let next = op.apply(&x)?;
        let step = next.sub(&x)?.pair_norm();
        let bound = inverse.mul_vec(&step)?;
        let converged = step.leq(tol)?;
        let size = step.max();
        if best.is_none_or(|(_, s)| size <= s) {
            best = Some((k, size));
            best_point = next.clone();
        }
        step_norms.push(step);
        error_bounds.push(bound);
        x = next;
        if converged {
            stop = StopReason::Converged;
            break;
        }
        if diverging(&step_norms) {
            stop = StopReason::Diverged;
            break;
        }
    }

    let iterations = step_norms.len();
    if stop == StopReason::Converged {
        let error_bound = error_bounds[iterations - 1].clone();
        return Ok(FixedPointResult {
            point: x,
            iterations,
            step_norms,
            error_bounds,
            error_bound,
            converged: true,
            stop,
        });
    }
    let (best_k, _) = best.expect("at least one iteration ran");
    let error_bound = error_bounds[best_k - 1].clone();
    Ok(FixedPointResult {
        point: best_point,
        iterations,
        step_norms,
        error_bounds,
        error_bound,
        converged: false,
        stop,
    })
}

fn diverging(steps: &[OrderedVector]) -> bool {
    let n = steps.len();
    if n <= DIVERGENCE_WINDOW {
        return false;
    }
    let (old, new) = (&steps[n - 1 - DIVERGENCE_WINDOW], &steps[n - 1]);
    old.values()
        .iter()
        .zip(new.values())
        .any(|(&o, &c)| o > 0.0 && c > DIVERGENCE_FACTOR * o)
}

/// Smallest Lipschitz matrix consistent with the sampled difference quotients.
///
/// Pairs `(u, v)` that differ in one component `j` only give the lower bound
/// `M[i][j] >= ||Tu - Tv||_i / ||u - v||_j` directly. Pairs differing in both
/// components are applied afterwards: if `sum_j M[i][j] d_j` still falls short
/// of the observed `||Tu - Tv||_i`, row `i` is raised uniformly by the deficit
/// over `sum_j d_j`. The result is a lower bound on any valid Lipschitz matrix.
pub fn estimate_lipschitz<T: PairOperator + ?Sized>(
    op: &T,
    samples: &[(PairFunction, PairFunction)],
) -> Result<NonnegMatrix> {
    if samples.len() < 2 {
        return Err(Error::DegenerateSamples(format!(
            "need at least 2 sample pairs, got {}",
            samples.len()
        )));
    }
    let mut m = [[0.0_f64; 2]; 2];
    let mut mixed = Vec::new();
    for (k, (u, v)) in samples.iter().enumerate() {
        let d = u.sub(v)?.pair_norm();
        let d = [d.get(0), d.get(1)];
        if d == [0.0, 0.0] {
            return Err(Error::DegenerateSamples(format!("sample pair {k} is coincident")));
        }
        let e = op.apply(u)?.sub(&op.apply(v)?)?.pair_norm();
        let e = [e.get(0), e.get(1)];
        match d {
            [dx, 0.0] => {
                for i in 0..2 {
                    m[i][0] = m[i][0].max(e[i] / dx);
                }
            }
            [0.0, dy] => {
                for i in 0..2 {
                    m[i][1] = m[i][1].max(e[i] / dy);
                }
            }
            _ => mixed.push((d, e)),
        }
    }
    for (d, e) in mixed {
        let total = d[0] + d[1];
        for i in 0..2 {
            let deficit = e[i] - (m[i][0] * d[0] + m[i][1] * d[1]);
            if deficit > 0.0 {
                m[i][0] += deficit / total;
                m[i][1] += deficit / total;
            }
        }
    }
    NonnegMatrix::from_array(m)
}

/// Random pairs `(u, v)` in the ball `||.|| <= (r, r)` differing in one
/// component only, alternating which one.
///
/// The perturbation alternates in blocks of two between a constant shift and
/// a smooth random profile.
pub fn sample_ball_pairs<R: Rng + ?Sized>(
    grid: Grid,
    radius: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<(PairFunction, PairFunction)>> {
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let theta: f64 = rng.gen_range(0.05..0.5);
        let reach = radius * (1.0 - theta);
        let x = random_function(grid, reach * rng.gen::<f64>(), rng)?;
        let y = random_function(grid, reach * rng.gen::<f64>(), rng)?;
        let size = theta * radius * rng.gen_range(0.02..1.0);
        let delta = if (k / 2) % 2 == 0 {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            GridFunction::constant(grid, sign * size)?
        } else {
            random_function(grid, size, rng)?
        };
        let u = PairFunction::new(x.clone(), y.clone())?;
        let v = if k % 2 == 0 {
            PairFunction::new(x.add(&delta)?, y)?
        } else {
            PairFunction::new(x, y.add(&delta)?)?
        };
        if u != v {
            out.push((u, v));
        }
    }
    Ok(out)
}

/// Random pair with both sup-norms at most `radius`.
pub fn sample_ball_point<R: Rng + ?Sized>(grid: Grid, radius: f64, rng: &mut R) -> Result<PairFunction> {
    let x = random_function(grid, radius * rng.gen::<f64>(), rng)?;
    let y = random_function(grid, radius * rng.gen::<f64>(), rng)?;
    PairFunction::new(x, y)
}

/// Smooth random profile `c0 + c1 s + c2 cos(k pi s)` rescaled to sup-norm
/// exactly `amplitude` (or zero).
fn random_function<R: Rng + ?Sized>(grid: Grid, amplitude: f64, rng: &mut R) -> Result<GridFunction> {
    let c0: f64 = rng.gen_range(-1.0..1.0);
    let c1: f64 = rng.gen_range(-1.0..1.0);
    let c2: f64 = rng.gen_range(-1.0..1.0);
    let freq = rng.gen_range(1..=4) as f64;
    let t_end = grid.t_end();
    let raw = GridFunction::from_fn(grid, |t| {
        let s = t / t_end;
        c0 + c1 * (2.0 * s - 1.0) + c2 * (freq * std::f64::consts::PI * s).cos()
    })?;
    let norm = raw.sup_norm();
    if norm == 0.0 || amplitude == 0.0 {
        return Ok(GridFunction::zeros(grid));
    }
    Ok(raw.scale(amplitude / norm))
}
