use hybrid_perov::{gamma, rl_integral, FracOrder, Grid, GridFunction};
use proptest::prelude::*;

const ORDERS: [f64; 5] = [1.0 / 3.0, 0.5, 7.0 / 4.0, 10.0 / 3.0, 29.0 / 6.0];

fn order(a: f64) -> FracOrder {
    FracOrder::new(a).unwrap()
}

fn max_error(f: &GridFunction, exact: impl Fn(f64) -> f64) -> f64 {
    f.grid()
        .nodes()
        .zip(f.samples())
        .map(|(t, v)| (v - exact(t)).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn integral_is_linear(
        a in -5.0..5.0f64,
        b in -5.0..5.0f64,
        alpha in 0.05..6.0f64,
        f in prop::collection::vec(-3.0..3.0f64, 65),
        g in prop::collection::vec(-3.0..3.0f64, 65),
    ) {
        let grid = Grid::unit(64).unwrap();
        let (f, g) = (GridFunction::new(grid, f).unwrap(), GridFunction::new(grid, g).unwrap());
        let o = order(alpha);
        let lhs = rl_integral(&f.scale(a).add(&g.scale(b)).unwrap(), o).unwrap();
        let rhs = rl_integral(&f, o).unwrap().scale(a).add(&rl_integral(&g, o).unwrap().scale(b)).unwrap();
        let diff = lhs.sub(&rhs).unwrap().sup_norm();
        prop_assert!(diff <= 1e-12 * (1.0 + lhs.sup_norm()), "diff {diff}");
    }

    #[test]
    fn integral_preserves_positivity(
        k in 0usize..ORDERS.len(),
        f in prop::collection::vec(0.0..3.0f64, 65),
    ) {
        let grid = Grid::unit(64).unwrap();
        let f = GridFunction::new(grid, f).unwrap();
        let out = rl_integral(&f, order(ORDERS[k])).unwrap();
        prop_assert!(out.samples().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn integral_is_exact_on_linear_data(
        alpha in 0.05..6.0f64,
        c0 in -2.0..2.0f64,
        c1 in -2.0..2.0f64,
        n in 16usize..200,
    ) {
        let grid = Grid::unit(n).unwrap();
        let f = GridFunction::from_fn(grid, |s| c0 + c1 * s).unwrap();
        let out = rl_integral(&f, order(alpha)).unwrap();
        let (g1, g2) = (gamma(alpha + 1.0).unwrap(), gamma(alpha + 2.0).unwrap());
        let err = max_error(&out, |t| c0 * t.powf(alpha) / g1 + c1 * t.powf(alpha + 1.0) / g2);
        prop_assert!(err <= 1e-10, "error {err}");
    }
}

#[test]
fn half_integrals_compose_to_one() {
    let grid = Grid::unit(1024).unwrap();
    let f = GridFunction::from_fn(grid, |s| s).unwrap();
    let half = order(0.5);
    let twice = rl_integral(&rl_integral(&f, half).unwrap(), half).unwrap();
    let once = rl_integral(&f, order(1.0)).unwrap();
    let err = twice.sub(&once).unwrap().sup_norm();
    assert!(err <= 5e-3, "semigroup error {err}");
}

#[test]
fn refinement_is_second_order_on_quadratics() {
    for alpha in ORDERS {
        let g3 = gamma(alpha + 3.0).unwrap();
        let error = |n: usize| {
            let f = GridFunction::from_fn(Grid::unit(n).unwrap(), |s| s * s).unwrap();
            let out = rl_integral(&f, order(alpha)).unwrap();
            max_error(&out, |t| 2.0 * t.powf(alpha + 2.0) / g3)
        };
        let (coarse, fine) = (error(64), error(128));
        assert!(coarse >= 3.5 * fine, "alpha {alpha}: {coarse} vs {fine}");
    }
}

#[test]
fn unit_order_is_trapezoid_integral() {
    let grid = Grid::unit(32).unwrap();
    let out = rl_integral(&GridFunction::constant(grid, 1.0).unwrap(), order(1.0)).unwrap();
    assert!(max_error(&out, |t| t) <= 1e-14);
}
