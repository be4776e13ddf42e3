use proptest::prelude::*;

use projspray::catalog::{CatalogSpray, MetricId};
use projspray::classify::{liouville_candidate, reconstruct_metric};
use projspray::finsler::{projective_residual, FinslerMetric, RadialShift, RiemannianField, Spray};
use projspray::linalg::Mat2;
use projspray::symmetry::{lie_bracket, PlaneVectorField, Poly, PolyField};
use projspray::{lift, Domain, Field, Real, Sign};

/// `Σ c_ij xⁱ yʲ` over `i + j ≤ 3`, with derivatives known in closed form.
#[derive(Clone, Debug)]
struct Cubic([f64; 10]);

const EXPONENTS: [(i32, i32); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

impl Field<2> for Cubic {
    fn eval<T: Real>(&self, [x, y]: [T; 2]) -> T {
        let mut acc = T::zero();
        for (c, (i, j)) in self.0.iter().zip(EXPONENTS) {
            acc = acc + x.powi(i) * y.powi(j) * *c;
        }
        acc
    }
}

impl Cubic {
    /// Derivative `∂xᵃ ∂yᵇ` by the power rule.
    fn derivative(&self, [x, y]: [f64; 2], a: i32, b: i32) -> f64 {
        let falling = |n: i32, k: i32| (0..k).map(|m| (n - m) as f64).product::<f64>();
        self.0
            .iter()
            .zip(EXPONENTS)
            .filter(|(_, (i, j))| *i >= a && *j >= b)
            .map(|(c, (i, j))| c * falling(i, a) * falling(j, b) * x.powi(i - a) * y.powi(j - b))
            .sum()
    }
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + scale)
}

fn catalog_spray() -> impl Strategy<Value = CatalogSpray> {
    prop_oneof![
        Just(CatalogSpray::Flat),
        Just(CatalogSpray::A),
        (0.1f64..3.0).prop_map(|k| CatalogSpray::B {
            k,
            sign: Sign::Plus
        }),
        (0.1f64..3.0).prop_map(|k| CatalogSpray::B {
            k,
            sign: Sign::Minus
        }),
        Just(CatalogSpray::C(Sign::Plus)),
        Just(CatalogSpray::C(Sign::Minus)),
    ]
}

fn catalog_metric() -> impl Strategy<Value = MetricId> {
    prop_oneof![
        Just(MetricId::Euclidean),
        Just(MetricId::A),
        (0.1f64..3.0).prop_map(|k| MetricId::B {
            k,
            sign: Sign::Plus
        }),
        (0.1f64..3.0).prop_map(|k| MetricId::B {
            k,
            sign: Sign::Minus
        }),
        Just(MetricId::C(Sign::Plus)),
        Just(MetricId::C(Sign::Minus)),
    ]
}

/// A point inside `d` at relative position `(s, t) ∈ [0, 1]²`, pulled into the
/// central 80% of the domain.
fn inside(d: &Domain, s: f64, t: f64) -> [f64; 2] {
    let g = d.verification_grid(1, 0.5)[0];
    let [x0, x1] = [d.x.0.max(-2.0), d.x.1.min(2.0)];
    let [y0, y1] = [d.y.0.max(-2.0), d.y.1.min(2.0)];
    let mut p = [
        x0 + (x1 - x0) * (0.1 + 0.8 * s),
        y0 + (y1 - y0) * (0.1 + 0.8 * t),
    ];
    if let Some(r) = d.max_radius {
        let n = (p[0] * p[0] + p[1] * p[1]).sqrt();
        if n > 0.8 * r {
            p = [p[0] * 0.8 * r / n, p[1] * 0.8 * r / n];
        }
    }
    if d.contains(p[0], p[1]) {
        p
    } else {
        g
    }
}

fn fiber(angle: f64, len: f64) -> [f64; 2] {
    [len * angle.cos(), len * angle.sin()]
}

/// Positive-definite metric with nonconstant coefficients.
#[derive(Clone, Copy, Debug)]
struct Wavy {
    a: f64,
    d: f64,
    c: f64,
    p: f64,
}

impl RiemannianField for Wavy {
    fn tensor<T: Real>(&self, [x, y]: [T; 2]) -> Mat2<T> {
        let off = (x + y).sin() * self.c;
        [
            [(x * self.p).exp() * self.a, off],
            [off, (y * self.p).exp() * self.d],
        ]
    }
    fn domain(&self) -> Domain {
        Domain::square(1.0)
    }
}

fn poly_field() -> impl Strategy<Value = PolyField> {
    let poly =
        prop::collection::vec((-2.0f64..2.0, 0i32..3, 0i32..3), 0..4).prop_map(|t| Poly::new(&t));
    (poly.clone(), poly).prop_map(|(a, b)| PolyField::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jets_match_closed_form_derivatives(
        coeffs in prop::array::uniform10(-3.0f64..3.0),
        x in -2.0f64..2.0,
        y in -2.0f64..2.0,
    ) {
        let f = Cubic(coeffs);
        let j = lift(&f, [x, y], [0, 1]).unwrap();
        let scale = coeffs.iter().map(|c| c.abs()).sum::<f64>() * 30.0;
        prop_assert!(close(j.value, f.derivative([x, y], 0, 0), scale));
        prop_assert!(close(j.grad[0], f.derivative([x, y], 1, 0), scale));
        prop_assert!(close(j.grad[1], f.derivative([x, y], 0, 1), scale));
        prop_assert!(close(j.hess[0][0], f.derivative([x, y], 2, 0), scale));
        prop_assert!(close(j.hess[0][1], f.derivative([x, y], 1, 1), scale));
        prop_assert!(close(j.hess[1][0], j.hess[0][1], 0.0));
        prop_assert!(close(j.hess[1][1], f.derivative([x, y], 0, 2), scale));
    }

    #[test]
    fn sprays_are_two_homogeneous(
        spray in catalog_spray(),
        s in 0.0f64..1.0, t in 0.0f64..1.0,
        angle in 0.0f64..std::f64::consts::TAU,
        len in 0.1f64..3.0,
        lambda in 0.1f64..10.0,
    ) {
        let [x, y] = inside(&spray.domain(), s, t);
        let [u, v] = fiber(angle, len);
        let g = spray.coeffs_at([x, y, u, v]).unwrap();
        let h = spray.coeffs_at([x, y, lambda * u, lambda * v]).unwrap();
        for i in 0..2 {
            let want = lambda * lambda * g[i];
            prop_assert!((h[i] - want).abs() <= 1e-12 * (1.0 + want.abs()), "{h:?} vs {g:?}");
        }
    }

    #[test]
    fn metrics_are_one_homogeneous(
        id in catalog_metric(),
        s in 0.0f64..1.0, t in 0.0f64..1.0,
        angle in 0.0f64..std::f64::consts::TAU,
        lambda in 0.1f64..10.0,
    ) {
        let m = id.metric().unwrap();
        let [x, y] = inside(&m.domain(), s, t);
        let [u, v] = fiber(angle, 1.0);
        let f = m.at([x, y, u, v]).unwrap();
        let g = m.at([x, y, lambda * u, lambda * v]).unwrap();
        prop_assert!(f > 0.0);
        prop_assert!((g - lambda * f).abs() <= 1e-12 * lambda * f);
    }

    #[test]
    fn radial_shift_is_projectively_trivial(
        spray in catalog_spray(),
        rho in prop::array::uniform5(-3.0f64..3.0),
        s in 0.0f64..1.0, t in 0.0f64..1.0,
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let [x, y] = inside(&spray.domain(), s, t);
        let [u, v] = fiber(angle, 1.0);
        let shifted = RadialShift { spray, rho };
        let r = projective_residual(&spray, &shifted, [x, y, u, v]).unwrap();
        prop_assert!(r <= 1e-12, "residual {r}");
    }

    #[test]
    fn reconstruction_inverts_candidate(
        a in 0.5f64..3.0, d in 0.5f64..3.0, c in -0.1f64..0.1, p in -1.0f64..1.0,
        x in -0.9f64..0.9, y in -0.9f64..0.9,
    ) {
        let g = Wavy { a, d, c, p };
        let back = reconstruct_metric(liouville_candidate(g)).unwrap();
        let want = g.tensor_at([x, y]).unwrap();
        let got = back.tensor_at([x, y]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((got[i][j] - want[i][j]).abs() <= 1e-12 * (1.0 + want[i][j].abs()));
            }
        }
    }

    #[test]
    fn bracket_is_antisymmetric(
        xf in poly_field(), yf in poly_field(),
        x in -1.5f64..1.5, y in -1.5f64..1.5,
    ) {
        let a = lie_bracket(&xf, &yf).components([x, y]);
        let b = lie_bracket(&yf, &xf).components([x, y]);
        let own = lie_bracket(&xf, &xf).components([x, y]);
        for i in 0..2 {
            prop_assert!((a[i] + b[i]).abs() <= 1e-12 * (1.0 + a[i].abs()));
            prop_assert!(own[i].abs() <= 1e-12);
        }
    }
}
