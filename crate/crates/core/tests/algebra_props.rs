use carnot_core::{Group, Point};
use proptest::prelude::*;

fn groups() -> Vec<Group> {
    vec![Group::euclidean(2), Group::heisenberg(1), Group::heisenberg(2), Group::engel()]
}

fn point(dim: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-2.0f64..2.0, dim).prop_map(|v| Point::from_slice(&v))
}

fn close(a: &Point, b: &Point, tol: f64) -> bool {
    let scale = a.coords().iter().chain(b.coords()).fold(1.0f64, |m, x| m.max(x.abs()));
    a.max_abs_diff(b) <= tol * scale
}

proptest! {
    #[test]
    fn associativity(gi in 0usize..4, seed in prop::collection::vec(-2.0f64..2.0, 18)) {
        let g = &groups()[gi];
        let n = g.dim();
        let (p, q, r) = (Point::from_slice(&seed[..n]), Point::from_slice(&seed[6..6 + n]), Point::from_slice(&seed[12..12 + n]));
        let left = g.multiply(&g.multiply(&p, &q).unwrap(), &r).unwrap();
        let right = g.multiply(&p, &g.multiply(&q, &r).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
    }

    #[test]
    fn inverse_and_identity(gi in 0usize..4, seed in prop::collection::vec(-2.0f64..2.0, 6)) {
        let g = &groups()[gi];
        let p = Point::from_slice(&seed[..g.dim()]);
        let e = g.identity();
        prop_assert!(close(&g.multiply(&p, &g.inverse(&p)).unwrap(), &e, 1e-12));
        prop_assert!(close(&g.multiply(&g.inverse(&p), &p).unwrap(), &e, 1e-12));
        prop_assert!(close(&g.multiply(&p, &e).unwrap(), &p, 0.0));
    }

    #[test]
    fn dilation_is_an_automorphism(gi in 0usize..4, lambda in 0.1f64..3.0, seed in prop::collection::vec(-2.0f64..2.0, 12)) {
        let g = &groups()[gi];
        let n = g.dim();
        let (p, q) = (Point::from_slice(&seed[..n]), Point::from_slice(&seed[6..6 + n]));
        let a = g.dilate(&g.multiply(&p, &q).unwrap(), lambda);
        let b = g.multiply(&g.dilate(&p, lambda), &g.dilate(&q, lambda)).unwrap();
        prop_assert!(close(&a, &b, 1e-12));
    }

    #[test]
    fn gauge_is_homogeneous(gi in 0usize..4, lambda in 0.1f64..3.0, seed in prop::collection::vec(-2.0f64..2.0, 6)) {
        let g = &groups()[gi];
        let p = Point::from_slice(&seed[..g.dim()]);
        let lhs = g.gauge(&g.dilate(&p, lambda));
        let rhs = lambda * g.gauge(&p);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn horizontal_translation_matches_multiplication(p in point(3), a in -1.0f64..1.0, b in -1.0f64..1.0, s in 0.01f64..0.5) {
        let g = Group::heisenberg(1);
        let nu = carnot_core::HorizontalVector::from_slice(&[a, b]);
        let direct = g.translate_horizontal(&p, &nu, s);
        let via = g.multiply(&p, &g.dilate(&Point::horizontal(&nu, 3), s)).unwrap();
        prop_assert!(close(&direct, &via, 1e-14));
    }
}

#[test]
fn heisenberg_law_by_hand() {
    let g = Group::heisenberg(1);
    let p = Point::from_slice(&[1.0, 0.0, 0.0]);
    let q = Point::from_slice(&[0.0, 1.0, 0.0]);
    let pq = g.multiply(&p, &q).unwrap();
    let qp = g.multiply(&q, &p).unwrap();
    // the vertical parts differ by the bracket
    assert!((pq[2] - qp[2]).abs() > 0.5);
    assert_eq!(pq[0], 1.0);
    assert_eq!(pq[1], 1.0);
}
