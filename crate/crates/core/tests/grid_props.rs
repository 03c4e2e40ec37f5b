use hybrid_perov::{Grid, GridFunction, PairFunction};
use proptest::prelude::*;

fn samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, 33)
}

fn function(v: Vec<f64>) -> GridFunction {
    GridFunction::new(Grid::unit(32).unwrap(), v).unwrap()
}

proptest! {
    #[test]
    fn product_is_submultiplicative(f in samples(), g in samples()) {
        let (f, g) = (function(f), function(g));
        prop_assert!(f.multiply(&g).unwrap().sup_norm() <= f.sup_norm() * g.sup_norm());
    }

    #[test]
    fn pair_norm_is_nonnegative(f in samples(), g in samples()) {
        let p = PairFunction::new(function(f), function(g)).unwrap();
        prop_assert!(p.pair_norm().is_nonnegative());
    }

    #[test]
    fn sup_norm_is_homogeneous(f in samples(), c in -100.0..100.0f64) {
        let f = function(f);
        let lhs = f.scale(c).sup_norm();
        let rhs = c.abs() * f.sup_norm();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
    }

    #[test]
    fn pair_product_is_componentwise_submultiplicative(
        a in samples(), b in samples(), c in samples(), d in samples()
    ) {
        let p = PairFunction::new(function(a), function(b)).unwrap();
        let q = PairFunction::new(function(c), function(d)).unwrap();
        let pq = p.multiply(&q).unwrap().pair_norm();
        let bound = [p.pair_norm(), q.pair_norm()];
        for i in 0..2 {
            prop_assert!(pq.get(i) <= bound[0].get(i) * bound[1].get(i));
        }
    }
}

#[test]
fn difference_with_itself_is_zero() {
    let f = GridFunction::from_fn(Grid::unit(64).unwrap(), |t| (3.0 * t).sin()).unwrap();
    assert_eq!(f.add(&f.scale(-1.0)).unwrap().sup_norm(), 0.0);
}
