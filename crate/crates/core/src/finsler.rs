//! Finsler metrics, fundamental tensors, sprays, induced ODEs and the
//! projective-equivalence residual.

use serde::Serialize;

use crate::domain::{fiber_directions, Domain};
use crate::error::{Error, Result};
use crate::jets::{finite, lift, seed, Field, Jet2, Real};
use crate::linalg::{det2, inv2, quad2, sym_eigenvalues, Mat2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Riemannian,
    Randers,
    General,
}

/// A positively 1-homogeneous function `F(x, y, u, v)` on the slit tangent
/// bundle over [`domain`](FinslerMetric::domain).
pub trait FinslerMetric: Send + Sync {
    fn eval<T: Real>(&self, p: [T; 4]) -> T;
    fn kind(&self) -> MetricKind;
    fn domain(&self) -> Domain;

    fn at(&self, p: [f64; 4]) -> Result<f64> {
        finite(self.eval(p), &p)
    }
}

/// A symmetric 2×2 matrix field on the plane (a Riemannian metric when
/// positive-definite).
pub trait RiemannianField: Send + Sync {
    fn tensor<T: Real>(&self, p: [T; 2]) -> Mat2<T>;
    fn domain(&self) -> Domain;

    fn tensor_at(&self, p: [f64; 2]) -> Result<Mat2<f64>> {
        let m = self.tensor(p);
        if m.iter().flatten().all(|e| e.is_finite()) {
            Ok(m)
        } else {
            Err(Error::Domain { point: p.to_vec() })
        }
    }
}

impl<G: RiemannianField> RiemannianField for &G {
    fn tensor<T: Real>(&self, p: [T; 2]) -> Mat2<T> {
        (**self).tensor(p)
    }
    fn domain(&self) -> Domain {
        (**self).domain()
    }
}

/// `F = √(g(ξ, ξ))`.
#[derive(Clone, Copy, Debug)]
pub struct Riemannian<G>(pub G);

impl<G: RiemannianField> FinslerMetric for Riemannian<G> {
    fn eval<T: Real>(&self, [x, y, u, v]: [T; 4]) -> T {
        quad2(&self.0.tensor([x, y]), [u, v], [u, v]).sqrt()
    }
    fn kind(&self) -> MetricKind {
        MetricKind::Riemannian
    }
    fn domain(&self) -> Domain {
        self.0.domain()
    }
}

/// View a metric as a plain [`Field`] on `(x, y, u, v)`.
pub struct MetricFn<'a, M>(pub &'a M);

impl<M: FinslerMetric> Field<4> for MetricFn<'_, M> {
    fn eval<T: Real>(&self, p: [T; 4]) -> T {
        self.0.eval(p)
    }
}

/// `g_ij = ½ ∂²F²/∂ξ^i∂ξ^j`, generic so it can be differentiated again in x.
pub fn tensor_of<M: FinslerMetric, T: Real>(metric: &M, p: [T; 4]) -> Mat2<T> {
    let fiber = seed([p[2], p[3]], [0, 1]);
    let f = metric.eval([
        Jet2::constant(p[0]),
        Jet2::constant(p[1]),
        fiber[0],
        fiber[1],
    ]);
    let l = f * f;
    [
        [l.hess[0][0] * 0.5, l.hess[0][1] * 0.5],
        [l.hess[1][0] * 0.5, l.hess[1][1] * 0.5],
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FundamentalTensor {
    pub g: Mat2<f64>,
}

impl FundamentalTensor {
    pub fn eigenvalues(&self) -> [f64; 2] {
        sym_eigenvalues(&self.g)
    }
}

pub fn fundamental_tensor<M: FinslerMetric>(metric: &M, at: [f64; 4]) -> Result<FundamentalTensor> {
    if at[2] == 0.0 && at[3] == 0.0 {
        return Err(Error::Domain { point: at.to_vec() });
    }
    let g = tensor_of(metric, at);
    if g.iter().flatten().all(|e| e.is_finite()) {
        Ok(FundamentalTensor { g })
    } else {
        Err(Error::Domain { point: at.to_vec() })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexityReport {
    pub convex: bool,
    pub min_eigenvalue: f64,
    /// Sample `(x, y, u, v)` attaining the minimum.
    pub witness: [f64; 4],
    pub samples: usize,
}

/// Smallest eigenvalue of `g` over `points × directions` unit fiber vectors.
pub fn is_strongly_convex<M: FinslerMetric>(
    metric: &M,
    points: &[[f64; 2]],
    directions: usize,
) -> Result<ConvexityReport> {
    let mut report = ConvexityReport {
        convex: true,
        min_eigenvalue: f64::INFINITY,
        witness: [0.0; 4],
        samples: 0,
    };
    for &[x, y] in points {
        for [u, v] in fiber_directions(directions, 0.0) {
            let at = [x, y, u, v];
            let lo = fundamental_tensor(metric, at)?.eigenvalues()[0];
            report.samples += 1;
            if lo < report.min_eigenvalue {
                report.min_eigenvalue = lo;
                report.witness = at;
            }
        }
    }
    report.convex = report.min_eigenvalue > 0.0;
    Ok(report)
}

/// Spray `ξ^i ∂_{x^i} − 2 G^i ∂_{ξ^i}`, stored through its coefficients.
pub trait Spray: Send + Sync {
    /// `(G¹, G²)` at `(x, y, u, v)`.
    fn coeffs<T: Real>(&self, p: [T; 4]) -> [T; 2];
    fn domain(&self) -> Domain;

    fn coeffs_at(&self, p: [f64; 4]) -> Result<[f64; 2]> {
        let g = self.coeffs(p);
        if g.iter().all(|c| c.is_finite()) {
            Ok(g)
        } else {
            Err(Error::Domain { point: p.to_vec() })
        }
    }
}

impl<S: Spray> Spray for &S {
    fn coeffs<T: Real>(&self, p: [T; 4]) -> [T; 2] {
        (**self).coeffs(p)
    }
    fn domain(&self) -> Domain {
        (**self).domain()
    }
}

/// One spray coefficient `G^i` as a [`Field`].
pub struct SprayComponent<'a, S>(pub &'a S, pub usize);

impl<S: Spray> Field<4> for SprayComponent<'_, S> {
    fn eval<T: Real>(&self, p: [T; 4]) -> T {
        self.0.coeffs(p)[self.1]
    }
}

/// Geodesic spray of a Finsler metric:
/// `G^i = ¼ g^{ij} (2 ∂_l g_jk − ∂_j g_kl) ξ^k ξ^l`.
#[derive(Clone, Copy, Debug)]
pub struct GeodesicSpray<M> {
    pub metric: M,
}

pub fn geodesic_spray<M: FinslerMetric>(metric: M) -> GeodesicSpray<M> {
    GeodesicSpray { metric }
}

impl<M: FinslerMetric> Spray for GeodesicSpray<M> {
    fn coeffs<T: Real>(&self, p: [T; 4]) -> [T; 2] {
        let base = seed([p[0], p[1]], [0, 1]);
        let g = tensor_of(
            &self.metric,
            [base[0], base[1], Jet2::constant(p[2]), Jet2::constant(p[3])],
        );
        let gv: Mat2<T> = g.map(|row| row.map(|e| e.value));
        // dg[j][k][l] = ∂g_jk/∂x^l
        let dg = |j: usize, k: usize, l: usize| g[j][k].grad[l];
        let xi = [p[2], p[3]];
        let w: [T; 2] = std::array::from_fn(|j| {
            let mut acc = T::zero();
            for k in 0..2 {
                for l in 0..2 {
                    acc = acc + (dg(j, k, l) * 2.0 - dg(k, l, j)) * xi[k] * xi[l];
                }
            }
            acc
        });
        let gi = inv2(&gv);
        std::array::from_fn(|i| (gi[i][0] * w[0] + gi[i][1] * w[1]) * 0.25)
    }

    fn domain(&self) -> Domain {
        self.metric.domain()
    }

    fn coeffs_at(&self, p: [f64; 4]) -> Result<[f64; 2]> {
        let g = tensor_of(&self.metric, p);
        let scale = g.iter().flatten().fold(0.0f64, |m, e| m.max(e.abs()));
        let det = det2(&g);
        if !det.is_finite() || det.abs() <= 1e-14 * scale * scale {
            return Err(Error::SingularTensor { point: p.to_vec() });
        }
        let out = self.coeffs(p);
        if out.iter().all(|c| c.is_finite()) {
            Ok(out)
        } else {
            Err(Error::Domain { point: p.to_vec() })
        }
    }
}

/// Orientation of the x-parametrization: `ẋ > 0` or `ẋ < 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// The two induced ODEs `ÿ = f±(x, y, ẏ)` of a projective class.
#[derive(Clone, Debug)]
pub struct OdePair<P, M = P> {
    pub plus: P,
    pub minus: M,
}

/// `f(x, y, z) = 2G¹(x, y, s, sz) z − 2G²(x, y, s, sz)` with `s = ±1`.
#[derive(Clone, Debug)]
pub struct InducedOde<S> {
    pub spray: S,
    pub branch: Branch,
}

impl<S: Spray> Field<3> for InducedOde<S> {
    fn eval<T: Real>(&self, [x, y, z]: [T; 3]) -> T {
        let s = self.branch.sign();
        let [g1, g2] = self.spray.coeffs([x, y, T::cst(s), z * s]);
        (g1 * z - g2) * 2.0
    }
}

pub fn induced_odes<S: Spray + Clone>(spray: S) -> OdePair<InducedOde<S>> {
    OdePair {
        plus: InducedOde {
            spray: spray.clone(),
            branch: Branch::Plus,
        },
        minus: InducedOde {
            spray,
            branch: Branch::Minus,
        },
    }
}

/// Induced ODE read directly off `F` through the Euler–Lagrange equation of
/// the x-parametrized curve `(sx, y)`:
/// `ÿ = (F_y − s F_xv − v F_yv) / F_vv` at `(x, y, s, sz)`.
#[derive(Clone, Debug)]
pub struct DirectOde<M> {
    pub metric: M,
    pub branch: Branch,
}

impl<M: FinslerMetric> DirectOde<M> {
    fn parts<T: Real>(&self, [x, y, z]: [T; 3]) -> (T, T) {
        let s = self.branch.sign();
        let v = z * s;
        let j = self.metric.eval(seed([x, y, T::cst(s), v], [0, 1, 2, 3]));
        let num = j.grad[1] - j.hess[0][3] * s - v * j.hess[1][3];
        (num, j.hess[3][3])
    }

    /// Evaluation that reports a vanishing `F_vv` instead of dividing by it.
    pub fn checked(&self, p: [f64; 3]) -> Result<f64> {
        let (num, fvv) = self.parts(p);
        if fvv == 0.0 || (fvv.abs() < 1e-14 * num.abs().max(1.0)) {
            return Err(Error::DegenerateDirection { point: p.to_vec() });
        }
        finite(num / fvv, &p)
    }
}

impl<M: FinslerMetric> Field<3> for DirectOde<M> {
    fn eval<T: Real>(&self, p: [T; 3]) -> T {
        let (num, fvv) = self.parts(p);
        num / fvv
    }
}

pub fn induced_ode_direct<M: FinslerMetric + Clone>(metric: M) -> OdePair<DirectOde<M>> {
    OdePair {
        plus: DirectOde {
            metric: metric.clone(),
            branch: Branch::Plus,
        },
        minus: DirectOde {
            metric,
            branch: Branch::Minus,
        },
    }
}

/// The y-parametrized pair `g±` built from `f±`.
#[derive(Clone, Debug)]
pub struct TransposedOdePair<P, M = P> {
    pub pair: OdePair<P, M>,
}

pub fn transpose_odes<P: Field<3>, M: Field<3>>(pair: OdePair<P, M>) -> TransposedOdePair<P, M> {
    TransposedOdePair { pair }
}

/// `g±(x, y, z) = −z³ f±(x, y, 1/z)` for `z > 0`, `−z³ f∓(x, y, 1/z)` for
/// `z < 0`. Undefined (non-finite) at `z = 0`.
pub struct Transposed<'a, P, M> {
    pair: &'a OdePair<P, M>,
    branch: Branch,
}

impl<P: Field<3>, M: Field<3>> Field<3> for Transposed<'_, P, M> {
    fn eval<T: Real>(&self, [x, y, z]: [T; 3]) -> T {
        let zr = z.re();
        if zr == 0.0 {
            return T::cst(f64::NAN);
        }
        let q = [x, y, z.recip()];
        let use_plus = (zr > 0.0) == (self.branch == Branch::Plus);
        let f = if use_plus {
            self.pair.plus.eval(q)
        } else {
            self.pair.minus.eval(q)
        };
        -(z * z * z) * f
    }
}

impl<P: Field<3>, M: Field<3>> TransposedOdePair<P, M> {
    pub fn gplus(&self) -> Transposed<'_, P, M> {
        Transposed {
            pair: &self.pair,
            branch: Branch::Plus,
        }
    }

    pub fn gminus(&self) -> Transposed<'_, P, M> {
        Transposed {
            pair: &self.pair,
            branch: Branch::Minus,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Mismatch {
    pub branch: Branch,
    pub order: usize,
    pub from_below: f64,
    pub from_above: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothnessReport {
    pub at: [f64; 2],
    /// Extrapolated one-sided `[value, d/dz, d²/dz²]` for g₊ from above.
    pub gplus_limit: [f64; 3],
    pub mismatches: Vec<Mismatch>,
}

impl SmoothnessReport {
    pub fn smooth(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub const SMOOTHNESS_TOL: f64 = 1e-5;

fn one_sided<F: Field<3>>(g: &F, x: f64, y: f64, side: f64) -> Option<[f64; 3]> {
    let hs = [1e-2, 5e-3, 2.5e-3];
    let d = |h: f64| -> Option<[f64; 3]> {
        let j = lift(g, [x, y, side * h], [2]).ok()?;
        Some([j.value, j.grad[0], j.hess[0][0]])
    };
    let vals = [d(hs[0])?, d(hs[1])?, d(hs[2])?];
    // Quadratic extrapolation to h = 0 (Lagrange weights at the origin).
    let w: [f64; 3] = std::array::from_fn(|i| {
        (0..3)
            .filter(|&j| j != i)
            .map(|j| hs[j] / (hs[j] - hs[i]))
            .product()
    });
    Some(std::array::from_fn(|k| {
        (0..3).map(|i| w[i] * vals[i][k]).sum()
    }))
}

/// Compare one-sided z-derivatives (orders 0..=2) of `g±` across `z = 0`.
pub fn smoothness_at_zero<P: Field<3>, M: Field<3>>(
    t: &TransposedOdePair<P, M>,
    at: [f64; 2],
) -> SmoothnessReport {
    let [x, y] = at;
    let mut mismatches = Vec::new();
    let mut gplus_limit = [f64::NAN; 3];
    for branch in [Branch::Plus, Branch::Minus] {
        let g = Transposed {
            pair: &t.pair,
            branch,
        };
        let above = one_sided(&g, x, y, 1.0);
        let below = one_sided(&g, x, y, -1.0);
        if branch == Branch::Plus {
            if let Some(a) = above {
                gplus_limit = a;
            }
        }
        for order in 0..3 {
            let (lo, hi) = (
                below.map_or(f64::NAN, |b| b[order]),
                above.map_or(f64::NAN, |a| a[order]),
            );
            if !((lo - hi).abs() <= SMOOTHNESS_TOL) {
                mismatches.push(Mismatch {
                    branch,
                    order,
                    from_below: lo,
                    from_above: hi,
                });
            }
        }
    }
    SmoothnessReport {
        at,
        gplus_limit,
        mismatches,
    }
}

/// Norm of the part of `Γ₁ − Γ₂` (fiber components `−2ΔG`) orthogonal to
/// the radial direction `(u, v)`.
pub fn projective_residual<S1: Spray, S2: Spray>(s1: &S1, s2: &S2, at: [f64; 4]) -> Result<f64> {
    let a = s1.coeffs_at(at)?;
    let b = s2.coeffs_at(at)?;
    let w = [-2.0 * (a[0] - b[0]), -2.0 * (a[1] - b[1])];
    Ok(orthogonal_part([at[2], at[3]], w))
}

/// Euclidean norm of the component of `w` orthogonal to `xi`.
pub(crate) fn orthogonal_part(xi: [f64; 2], w: [f64; 2]) -> f64 {
    let n = xi[0].hypot(xi[1]);
    (xi[0] * w[1] - xi[1] * w[0]).abs() / n
}

/// `S + ρ·(ξ^i ∂_{ξ^i})` with `ρ = (c₀ + c₁x + c₂y)|ξ| + c₃u + c₄v`.
#[derive(Clone, Debug)]
pub struct RadialShift<S> {
    pub spray: S,
    pub rho: [f64; 5],
}

impl<S: Spray> Spray for RadialShift<S> {
    fn coeffs<T: Real>(&self, p: [T; 4]) -> [T; 2] {
        let [x, y, u, v] = p;
        let c = self.rho;
        let norm = (u * u + v * v).sqrt();
        let rho = (x * c[1] + y * c[2] + c[0]) * norm + u * c[3] + v * c[4];
        let [g1, g2] = self.spray.coeffs(p);
        [g1 - rho * u * 0.5, g2 - rho * v * 0.5]
    }
    fn domain(&self) -> Domain {
        self.spray.domain()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::CatalogSpray;

    #[derive(Clone)]
    struct Euclid;
    impl FinslerMetric for Euclid {
        fn eval<T: Real>(&self, [_, _, u, v]: [T; 4]) -> T {
            (u * u + v * v).sqrt()
        }
        fn kind(&self) -> MetricKind {
            MetricKind::Riemannian
        }
        fn domain(&self) -> Domain {
            Domain::square(10.0)
        }
    }

    #[test]
    fn euclidean_tensor_is_identity() {
        let g = fundamental_tensor(&Euclid, [0.3, -0.2, 0.6, -1.7])
            .unwrap()
            .g;
        for (i, row) in g.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((e - want).abs() < 1e-15);
            }
        }
        assert!(fundamental_tensor(&Euclid, [0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn euclidean_spray_vanishes() {
        let s = geodesic_spray(Euclid);
        assert_eq!(s.coeffs_at([0.1, 0.4, 0.3, -2.0]).unwrap(), [0.0, 0.0]);
        let d = induced_ode_direct(Euclid);
        assert_eq!(d.plus.at([0.2, 0.1, 1.5]).unwrap(), 0.0);
    }

    #[test]
    fn euclidean_convexity_min_eigenvalue_one() {
        let r = is_strongly_convex(&Euclid, &Domain::square(1.0).grid(3), 16).unwrap();
        assert!(r.convex);
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-14);
    }

    #[test]
    fn flat_pair_transposes_to_zero() {
        let t = transpose_odes(induced_odes(CatalogSpray::Flat));
        assert_eq!(t.gplus().at([0.0, 0.0, 0.5]).unwrap(), 0.0);
        assert_eq!(t.gminus().at([0.0, 0.0, -0.5]).unwrap(), 0.0);
        assert!(t.gplus().at([0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn spray_a_induced_pair_closed_form() {
        let pair = induced_odes(CatalogSpray::A);
        for z in [-3.0, -0.5, 0.0, 0.7, 2.0] {
            let want = (1.0f64 + z * z).powf(1.5);
            assert!((pair.plus.at([0.2, -0.1, z]).unwrap() - want).abs() < 1e-13);
            assert!((pair.minus.at([0.2, -0.1, z]).unwrap() + want).abs() < 1e-13);
        }
    }

    #[test]
    fn spray_c_minus_induced_value() {
        let pair = induced_odes(CatalogSpray::C(crate::Sign::Minus));
        assert!((pair.plus.at([0.0, 0.0, 2.0]).unwrap() + 3.0).abs() < 1e-14);
    }

    #[test]
    fn spray_a_transposes_smoothly() {
        let t = transpose_odes(induced_odes(CatalogSpray::A));
        for z in [-1.5, -0.2, 0.3, 2.0] {
            let want = -(1.0f64 + z * z).powf(1.5);
            assert!((t.gplus().at([0.0, 0.0, z]).unwrap() - want).abs() < 1e-12);
        }
        let r = smoothness_at_zero(&t, [0.1, 0.2]);
        assert!(r.smooth(), "{:?}", r.mismatches);
        assert!((r.gplus_limit[0] + 1.0).abs() < 1e-5);
    }

    #[test]
    fn c1_matching_condition() {
        use crate::classify::OdeEntry;
        let lambda = 1.0;
        let c1 = |c: f64| OdeEntry::C1 { c, lambda };
        let r = smoothness_at_zero(
            &transpose_odes(OdePair {
                plus: c1(1.0),
                minus: c1(1.0),
            }),
            [0.0, 0.0],
        );
        assert!(r.mismatches.iter().any(|m| m.order == 0));
        // Limits −C₊e^(−πλ/2) from above and C₋e^(πλ/2) from below.
        assert!((r.gplus_limit[0] + (-std::f64::consts::FRAC_PI_2).exp()).abs() < 1e-6);
        let cm = -(-std::f64::consts::PI * lambda).exp();
        let r = smoothness_at_zero(
            &transpose_odes(OdePair {
                plus: c1(1.0),
                minus: c1(cm),
            }),
            [0.0, 0.0],
        );
        assert!(
            !r.mismatches
                .iter()
                .any(|m| m.order == 0 && m.branch == Branch::Plus),
            "{:?}",
            r.mismatches
        );
    }

    #[test]
    fn spray_c_plus_transposes_smoothly() {
        let t = transpose_odes(induced_odes(CatalogSpray::C(crate::Sign::Plus)));
        let x = 0.3f64;
        let z = 0.4;
        let want = -0.5 * z * z - 0.5 * (-2.0 * x).exp();
        assert!((t.gplus().at([x, 0.0, z]).unwrap() - want).abs() < 1e-13);
        assert!(smoothness_at_zero(&t, [x, 0.1]).smooth());
    }

    #[test]
    fn radial_shift_is_projectively_trivial() {
        let shifted = RadialShift {
            spray: CatalogSpray::A,
            rho: [1.5, 0.0, 0.0, 0.0, 0.0],
        };
        for [u, v] in fiber_directions(8, 0.1) {
            let r = projective_residual(&CatalogSpray::A, &shifted, [0.2, 0.3, u, v]).unwrap();
            assert!(r < 1e-14);
        }
        let r = projective_residual(&CatalogSpray::A, &CatalogSpray::Flat, [0.0, 0.0, 1.0, 0.0])
            .unwrap();
        assert!((r - 1.0).abs() < 1e-14);
    }
}
