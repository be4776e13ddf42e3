//! Constant-curvature base metrics, area forms and their potentials, the
//! Lorentz operator, Randers metrics and magnetic geodesics.

use serde::Serialize;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::finsler::{FinslerMetric, MetricKind, RiemannianField};
use crate::jets::{seed, Field, Real};
use crate::linalg::{apply2, det2, inv2, mul2, quad2, Mat2};
use crate::symmetry::{Poly, PolyField};
use crate::Sign;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Euclidean,
    Sphere,
    Hyperbolic,
}

impl Model {
    /// `ε` in the conformal factor `1/(1 + ε r²)²`.
    pub fn epsilon(self) -> f64 {
        match self {
            Model::Euclidean => 0.0,
            Model::Sphere => 1.0,
            Model::Hyperbolic => -1.0,
        }
    }

    pub fn from_sign(sign: Sign) -> Self {
        match sign {
            Sign::Plus => Model::Sphere,
            Sign::Minus => Model::Hyperbolic,
        }
    }

    pub fn domain(self) -> Domain {
        match self {
            Model::Hyperbolic => Domain::disk(1.0),
            _ => Domain::square(1e6),
        }
    }

    /// A basis of the Killing algebra. For the curved models these are the
    /// C2± realization fields.
    pub fn killing_fields(self) -> [PolyField; 3] {
        match self {
            Model::Euclidean => [PolyField::dx(), PolyField::dy(), PolyField::rotation()],
            _ => {
                let e = self.epsilon();
                [
                    PolyField::rotation(),
                    PolyField::new(
                        Poly::new(&[(0.5, 2, 0), (-0.5, 0, 2), (0.5 * e, 0, 0)]),
                        Poly::new(&[(1.0, 1, 1)]),
                    ),
                    PolyField::new(
                        Poly::new(&[(1.0, 1, 1)]),
                        Poly::new(&[(-0.5, 2, 0), (0.5, 0, 2), (0.5 * e, 0, 0)]),
                    ),
                ]
            }
        }
    }
}

/// `(dx² + dy²) / (1 + ε(x² + y²))²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantCurvature {
    pub model: Model,
}

pub fn constant_curvature_metric(model: Model) -> ConstantCurvature {
    ConstantCurvature { model }
}

fn conformal_denominator<T: Real>(model: Model, [x, y]: [T; 2]) -> T {
    (x * x + y * y) * model.epsilon() + 1.0
}

impl RiemannianField for ConstantCurvature {
    fn tensor<T: Real>(&self, p: [T; 2]) -> Mat2<T> {
        let d = conformal_denominator(self.model, p);
        let f = (d * d).recip();
        [[f, T::zero()], [T::zero(), f]]
    }
    fn domain(&self) -> Domain {
        self.model.domain()
    }
}

/// Covector field `β₁ dx + β₂ dy`.
pub trait OneForm: Send + Sync {
    fn coeffs<T: Real>(&self, p: [T; 2]) -> [T; 2];
}

/// `orientation · (k/2)(y dx − x dy) / (1 + ε r²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationalBeta {
    pub model: Model,
    pub k: f64,
    pub orientation: Sign,
}

/// The potential of the area form `−k √(det α) dx∧dy`.
pub fn beta_for(model: Model, k: f64) -> Result<RotationalBeta> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "k must be positive, got {k}"
        )));
    }
    Ok(RotationalBeta {
        model,
        k,
        orientation: Sign::Plus,
    })
}

impl OneForm for RotationalBeta {
    fn coeffs<T: Real>(&self, p: [T; 2]) -> [T; 2] {
        let s = 0.5 * self.k * self.orientation.f();
        let d = conformal_denominator(self.model, p).recip() * s;
        [p[1] * d, -p[0] * d]
    }
}

/// `β + d(c·xy)`; differs from `β` by a closed form.
#[derive(Clone, Copy, Debug)]
pub struct GaugeShifted<B> {
    pub beta: B,
    pub c: f64,
}

impl<B: OneForm> OneForm for GaugeShifted<B> {
    fn coeffs<T: Real>(&self, p: [T; 2]) -> [T; 2] {
        let [b1, b2] = self.beta.coeffs(p);
        [b1 + p[1] * self.c, b2 + p[0] * self.c]
    }
}

struct FormComponent<'a, B>(&'a B, usize);

impl<B: OneForm> Field<2> for FormComponent<'_, B> {
    fn eval<T: Real>(&self, p: [T; 2]) -> T {
        self.0.coeffs(p)[self.1]
    }
}

/// `dβ = (∂₁β₂ − ∂₂β₁) dx∧dy`, returned as its single coefficient.
pub fn exterior_derivative<B: OneForm>(beta: &B, at: [f64; 2]) -> Result<f64> {
    let b1 = crate::jets::lift_all(&FormComponent(beta, 0), at)?;
    let b2 = crate::jets::lift_all(&FormComponent(beta, 1), at)?;
    Ok(b2.grad[0] - b1.grad[1])
}

/// `Ω = −k √(det α) dx∧dy`.
#[derive(Clone, Copy, Debug)]
pub struct AreaForm<A> {
    pub alpha: A,
    pub k: f64,
}

pub fn area_form<A: RiemannianField>(alpha: A, k: f64) -> Result<AreaForm<A>> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "k must be positive, got {k}"
        )));
    }
    Ok(AreaForm { alpha, k })
}

impl<A: RiemannianField> AreaForm<A> {
    pub fn omega12<T: Real>(&self, p: [T; 2]) -> T {
        -det2(&self.alpha.tensor(p)).sqrt() * self.k
    }

    pub fn matrix<T: Real>(&self, p: [T; 2]) -> Mat2<T> {
        let w = self.omega12(p);
        [[T::zero(), w], [-w, T::zero()]]
    }
}

/// `J = α⁻¹ Ω`.
#[derive(Clone, Copy, Debug)]
pub struct LorentzOperator<A> {
    pub form: AreaForm<A>,
}

pub const LORENTZ_TOL: f64 = 1e-12;

impl<A: RiemannianField> LorentzOperator<A> {
    pub fn matrix<T: Real>(&self, p: [T; 2]) -> Mat2<T> {
        mul2(&inv2(&self.form.alpha.tensor(p)), &self.form.matrix(p))
    }

    /// `max |J² + k² Id|` at `p`.
    pub fn square_defect(&self, p: [f64; 2]) -> f64 {
        let j = self.matrix(p);
        let j2 = mul2(&j, &j);
        let k2 = self.form.k * self.form.k;
        let d = [j2[0][0] + k2, j2[0][1], j2[1][0], j2[1][1] + k2];
        d.iter().fold(0.0f64, |m, e| m.max(e.abs())) / k2.max(1.0)
    }
}

/// Build `J` and check `J² = −k² Id` on a grid of the metric's domain.
pub fn lorentz<A: RiemannianField + Clone>(form: AreaForm<A>) -> Result<LorentzOperator<A>> {
    let op = LorentzOperator { form };
    for p in op.form.alpha.domain().verification_grid(5, 1.0) {
        let d = op.square_defect(p);
        if !(d <= LORENTZ_TOL) {
            return Err(Error::Invariant(format!("J^2 + k^2 Id = {d:e} at {p:?}")));
        }
    }
    Ok(op)
}

/// `F(x, ξ) = √(α_x(ξ, ξ)) + β_x(ξ)`.
#[derive(Clone, Copy, Debug)]
pub struct RandersMetric<A, B> {
    pub alpha: A,
    pub beta: B,
    pub domain: Domain,
}

/// Randers metric on `domain`; fails if `F ≤ 0` at any sample of a grid of
/// the domain times 16 fiber directions.
pub fn randers_metric<A: RiemannianField, B: OneForm>(
    alpha: A,
    beta: B,
    domain: Domain,
) -> Result<RandersMetric<A, B>> {
    let m = RandersMetric {
        alpha,
        beta,
        domain,
    };
    for [x, y] in domain.shrunk(0.999).grid(7) {
        if !domain.contains(x, y) {
            continue;
        }
        for [u, v] in crate::domain::fiber_directions(16, 0.0) {
            let at = [x, y, u, v];
            let f = m.at(at)?;
            if !(f > 0.0) {
                return Err(Error::NotPositive {
                    point: at.to_vec(),
                    value: f,
                });
            }
        }
    }
    Ok(m)
}

impl<A: RiemannianField, B: OneForm> FinslerMetric for RandersMetric<A, B> {
    fn eval<T: Real>(&self, [x, y, u, v]: [T; 4]) -> T {
        let a = quad2(&self.alpha.tensor([x, y]), [u, v], [u, v]).sqrt();
        let [b1, b2] = self.beta.coeffs([x, y]);
        a + b1 * u + b2 * v
    }
    fn kind(&self) -> MetricKind {
        MetricKind::Randers
    }
    fn domain(&self) -> Domain {
        self.domain
    }
}

/// α-norm of `β` at a point: `√(β α⁻¹ β)`.
pub fn beta_norm<A: RiemannianField, B: OneForm>(alpha: &A, beta: &B, p: [f64; 2]) -> f64 {
    let b = beta.coeffs(p);
    quad2(&inv2(&alpha.tensor(p)), b, b).sqrt()
}

/// Christoffel symbols `Γ^i_jk` of a Riemannian metric field.
pub fn christoffel<A: RiemannianField, T: Real>(alpha: &A, p: [T; 2]) -> [[[T; 2]; 2]; 2] {
    let g = alpha.tensor(seed(p, [0, 1]));
    let gv: Mat2<T> = g.map(|r| r.map(|e| e.value));
    let gi = inv2(&gv);
    let d = |a: usize, b: usize, c: usize| g[a][b].grad[c];
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            std::array::from_fn(|k| {
                let mut acc = T::zero();
                for l in 0..2 {
                    acc = acc + gi[i][l] * (d(l, k, j) + d(l, j, k) - d(j, k, l));
                }
                acc * 0.5
            })
        })
    })
}

/// Position, velocity and acceleration of a curve at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveSample {
    pub pos: [f64; 2],
    pub vel: [f64; 2],
    pub acc: [f64; 2],
}

/// `∇_ċ ċ = c̈ + Γ(ċ, ċ)`.
pub fn covariant_acceleration<A: RiemannianField>(alpha: &A, c: &CurveSample) -> [f64; 2] {
    let gam = christoffel(alpha, c.pos);
    let v = c.vel;
    std::array::from_fn(|i| {
        let mut acc = c.acc[i];
        for j in 0..2 {
            for k in 0..2 {
                acc += gam[i][j][k] * v[j] * v[k];
            }
        }
        acc
    })
}

pub fn alpha_norm<A: RiemannianField>(alpha: &A, p: [f64; 2], w: [f64; 2]) -> f64 {
    quad2(&alpha.tensor(p), w, w).sqrt()
}

/// `‖∇_ċ ċ − J ċ‖_α`.
pub fn magnetic_residual<A: RiemannianField>(
    alpha: &A,
    form: &AreaForm<A>,
    c: &CurveSample,
) -> Result<f64> {
    let nabla = covariant_acceleration(alpha, c);
    let j = mul2(&inv2(&alpha.tensor(c.pos)), &form.matrix(c.pos));
    let jv = apply2(&j, c.vel);
    let r = alpha_norm(alpha, c.pos, [nabla[0] - jv[0], nabla[1] - jv[1]]);
    crate::jets::finite(r, &[c.pos[0], c.pos[1], c.vel[0], c.vel[1]])
}

pub const UNIT_SPEED_TOL: f64 = 1e-9;

/// `κ = ‖∇_ċ ċ‖_α` for an α-unit-speed sample.
pub fn geodesic_curvature<A: RiemannianField>(alpha: &A, c: &CurveSample) -> Result<f64> {
    let speed = alpha_norm(alpha, c.pos, c.vel);
    if !((speed - 1.0).abs() <= UNIT_SPEED_TOL) {
        return Err(Error::NotUnitSpeed { speed });
    }
    let n = covariant_acceleration(alpha, c);
    Ok(alpha_norm(alpha, c.pos, n))
}

/// The magnetic flow `c̈ = −Γ(ċ, ċ) + J ċ` of `(α, Ω)`.
#[derive(Clone, Copy, Debug)]
pub struct MagneticFlow<A> {
    pub form: AreaForm<A>,
}

impl<A: RiemannianField> crate::trace::SecondOrderSystem for MagneticFlow<A> {
    fn acceleration(&self, [x, y, u, v]: [f64; 4]) -> Result<[f64; 2]> {
        let alpha = &self.form.alpha;
        let gam = christoffel(alpha, [x, y]);
        let j = mul2(&inv2(&alpha.tensor([x, y])), &self.form.matrix([x, y]));
        let jv = apply2(&j, [u, v]);
        let xi = [u, v];
        let acc: [f64; 2] = std::array::from_fn(|i| {
            let mut a = jv[i];
            for j in 0..2 {
                for k in 0..2 {
                    a -= gam[i][j][k] * xi[j] * xi[k];
                }
            }
            a
        });
        if acc.iter().all(|a| a.is_finite()) {
            Ok(acc)
        } else {
            Err(Error::Domain {
                point: vec![x, y, u, v],
            })
        }
    }

    fn domain(&self) -> Domain {
        self.form.alpha.domain()
    }
}
