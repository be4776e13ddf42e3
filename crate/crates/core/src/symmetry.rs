//! Plane vector fields, their prolongation and complete lift, Lie brackets,
//! point-symmetry and projective-field residuals, and the catalog of
//! three-dimensional transitive Lie algebras of plane vector fields.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finsler::{orthogonal_part, Spray};
use crate::jets::{finite, lift_all, seed, Field, Real};
use crate::linalg::solve3;
use crate::Sign;

/// `a(x, y) ∂x + b(x, y) ∂y`.
pub trait PlaneVectorField: Send + Sync {
    fn components<T: Real>(&self, p: [T; 2]) -> [T; 2];
}

impl<X: PlaneVectorField> PlaneVectorField for &X {
    fn components<T: Real>(&self, p: [T; 2]) -> [T; 2] {
        (**self).components(p)
    }
}

/// Bivariate polynomial `Σ c xⁱ yʲ`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    terms: Vec<(f64, i32, i32)>,
}

impl Poly {
    /// Terms given as `(coefficient, power of x, power of y)`.
    pub fn new(terms: &[(f64, i32, i32)]) -> Self {
        Self {
            terms: terms.iter().copied().filter(|t| t.0 != 0.0).collect(),
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::new(&[(c, 0, 0)])
    }

    pub fn eval<T: Real>(&self, [x, y]: [T; 2]) -> T {
        self.terms.iter().fold(T::zero(), |acc, &(c, i, j)| {
            let mut t = T::cst(c);
            if i > 0 {
                t = t * x.powi(i);
            }
            if j > 0 {
                t = t * y.powi(j);
            }
            acc + t
        })
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, &(c, i, j)) in self.terms.iter().enumerate() {
            let sign = if c < 0.0 {
                "-"
            } else if n > 0 {
                "+"
            } else {
                ""
            };
            let mag = c.abs();
            let mono = match (i, j) {
                (0, 0) => String::new(),
                _ => {
                    let p = |v: &str, e: i32| match e {
                        0 => String::new(),
                        1 => v.to_string(),
                        e => format!("{v}^{e}"),
                    };
                    format!("{}{}", p("x", i), p("y", j))
                }
            };
            let coef = if mag == 1.0 && !mono.is_empty() {
                String::new()
            } else {
                format!("{mag}")
            };
            if n > 0 {
                write!(f, " {sign} {coef}{mono}")?;
            } else {
                write!(f, "{sign}{coef}{mono}")?;
            }
        }
        Ok(())
    }
}

/// Vector field with polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyField {
    pub a: Poly,
    pub b: Poly,
}

impl PolyField {
    pub fn new(a: Poly, b: Poly) -> Self {
        Self { a, b }
    }

    pub fn dx() -> Self {
        Self::new(Poly::constant(1.0), Poly::zero())
    }

    pub fn dy() -> Self {
        Self::new(Poly::zero(), Poly::constant(1.0))
    }

    /// `y∂x − x∂y`.
    pub fn rotation() -> Self {
        Self::new(Poly::new(&[(1.0, 0, 1)]), Poly::new(&[(-1.0, 1, 0)]))
    }
}

impl PlaneVectorField for PolyField {
    fn components<T: Real>(&self, p: [T; 2]) -> [T; 2] {
        [self.a.eval(p), self.b.eval(p)]
    }
}

impl fmt::Display for PolyField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})∂x + ({})∂y", self.a, self.b)
    }
}

/// One coefficient of a plane field as a [`Field`].
pub struct Coefficient<'a, X>(pub &'a X, pub usize);

impl<X: PlaneVectorField> Field<2> for Coefficient<'_, X> {
    fn eval<T: Real>(&self, p: [T; 2]) -> T {
        self.0.components(p)[self.1]
    }
}

/// `[X, Y]^i = X^j ∂_j Y^i − Y^j ∂_j X^i`, evaluated through jets of the
/// operands.
#[derive(Clone, Debug)]
pub struct Bracket<X, Y> {
    pub x: X,
    pub y: Y,
}

pub fn lie_bracket<X: PlaneVectorField, Y: PlaneVectorField>(x: X, y: Y) -> Bracket<X, Y> {
    Bracket { x, y }
}

impl<X: PlaneVectorField, Y: PlaneVectorField> PlaneVectorField for Bracket<X, Y> {
    fn components<T: Real>(&self, p: [T; 2]) -> [T; 2] {
        let s = seed(p, [0, 1]);
        let xj = self.x.components(s);
        let yj = self.y.components(s);
        std::array::from_fn(|i| {
            let mut acc = T::zero();
            for j in 0..2 {
                acc = acc + xj[j].value * yj[i].grad[j] - yj[j].value * xj[i].grad[j];
            }
            acc
        })
    }
}

/// Prolongation `a∂x + b∂y + c∂z` to `(x, y, z = ẏ)` space with
/// `c = b_x + z b_y − z (a_x + z a_y)`.
#[derive(Clone, Debug)]
pub struct ProlongedVectorField<X> {
    pub field: X,
}

pub fn prolong<X: PlaneVectorField>(field: X) -> ProlongedVectorField<X> {
    ProlongedVectorField { field }
}

impl<X: PlaneVectorField> ProlongedVectorField<X> {
    pub fn components<T: Real>(&self, [x, y, z]: [T; 3]) -> [T; 3] {
        let s = seed([x, y], [0, 1]);
        let [a, b] = self.field.components(s);
        let c = b.grad[0] + z * b.grad[1] - z * (a.grad[0] + z * a.grad[1]);
        [a.value, b.value, c]
    }

    /// The third coefficient `c` as a [`Field`].
    pub fn c(&self) -> ProlongationCoeff<'_, X> {
        ProlongationCoeff(self)
    }
}

pub struct ProlongationCoeff<'a, X>(&'a ProlongedVectorField<X>);

impl<X: PlaneVectorField> Field<3> for ProlongationCoeff<'_, X> {
    fn eval<T: Real>(&self, p: [T; 3]) -> T {
        self.0.components(p)[2]
    }
}

/// Left side minus right side of the point-symmetry condition
/// `a f_x + b f_y + c f_z = (c_z − a_x − z a_y) f + c_x + z c_y`.
pub fn point_symmetry_residual<X: PlaneVectorField, F: Field<3>>(
    field: &X,
    f: &F,
    at: [f64; 3],
) -> Result<f64> {
    let [x, y, z] = at;
    let fj = lift_all(f, at)?;
    let aj = lift_all(&Coefficient(field, 0), [x, y])?;
    let b = field.components([x, y])[1];
    let pro = prolong(field);
    let cj = lift_all(&pro.c(), at)?;
    let lhs = aj.value * fj.grad[0] + b * fj.grad[1] + cj.value * fj.grad[2];
    let rhs = (cj.grad[2] - aj.grad[0] - z * aj.grad[1]) * fj.value + cj.grad[0] + z * cj.grad[1];
    finite((lhs - rhs).abs(), &at)
}

/// Complete lift `a∂x + b∂y + (a_x u + a_y v)∂u + (b_x u + b_y v)∂v`.
#[derive(Clone, Debug)]
pub struct CompleteLift<X> {
    pub field: X,
}

pub fn complete_lift<X: PlaneVectorField>(field: X) -> CompleteLift<X> {
    CompleteLift { field }
}

impl<X: PlaneVectorField> CompleteLift<X> {
    pub fn components<T: Real>(&self, [x, y, u, v]: [T; 4]) -> [T; 4] {
        let s = seed([x, y], [0, 1]);
        let [a, b] = self.field.components(s);
        [
            a.value,
            b.value,
            a.grad[0] * u + a.grad[1] * v,
            b.grad[0] * u + b.grad[1] * v,
        ]
    }
}

struct LiftComponent<'a, X>(&'a CompleteLift<X>, usize);

impl<X: PlaneVectorField> Field<4> for LiftComponent<'_, X> {
    fn eval<T: Real>(&self, p: [T; 4]) -> T {
        self.0.components(p)[self.1]
    }
}

/// Component `A` of the spray field `(u, v, −2G¹, −2G²)`.
struct SprayField<'a, S>(&'a S, usize);

impl<S: Spray> Field<4> for SprayField<'_, S> {
    fn eval<T: Real>(&self, p: [T; 4]) -> T {
        match self.1 {
            0 => p[2],
            1 => p[3],
            i => self.0.coeffs(p)[i - 2] * -2.0,
        }
    }
}

/// Distance of `L_X̂ Γ = [X̂, Γ]` from the radial line at `(x, y, u, v)`:
/// norm of the base part plus the fiber part orthogonal to `(u, v)`.
pub fn projective_field_residual<X: PlaneVectorField, S: Spray>(
    field: &X,
    spray: &S,
    at: [f64; 4],
) -> Result<f64> {
    let lifted = complete_lift(field);
    let mut zj = Vec::with_capacity(4);
    let mut gj = Vec::with_capacity(4);
    for a in 0..4 {
        zj.push(lift_all(&LiftComponent(&lifted, a), at)?);
        gj.push(lift_all(&SprayField(spray, a), at)?);
    }
    let bracket: [f64; 4] = std::array::from_fn(|a| {
        (0..4)
            .map(|b| zj[b].value * gj[a].grad[b] - gj[b].value * zj[a].grad[b])
            .sum()
    });
    let base = bracket[0].hypot(bracket[1]);
    let fiber = orthogonal_part([at[2], at[3]], [bracket[2], bracket[3]]);
    finite(base + fiber, &at)
}

/// Structure constants of a basis `X₀, X₁, X₂`, stored by bracket:
/// row 0 is `[X₀, X₁]` (α), row 1 `[X₀, X₂]` (β), row 2 `[X₁, X₂]` (γ);
/// column `k` is the coefficient of `X_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StructureConstants(pub [[f64; 3]; 3]);

pub const BRACKET_PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

impl StructureConstants {
    pub fn alpha(&self) -> [f64; 3] {
        self.0[0]
    }
    pub fn beta(&self) -> [f64; 3] {
        self.0[1]
    }
    pub fn gamma(&self) -> [f64; 3] {
        self.0[2]
    }

    /// Table in the basis `(-X0, X1, X2)`.
    pub fn negate_first(&self) -> Self {
        let [a, b, g] = self.0;
        Self([
            [a[0], -a[1], -a[2]],
            [b[0], -b[1], -b[2]],
            [-g[0], g[1], g[2]],
        ])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Maximum absolute value of the three component equations of the Jacobi
/// identity written in the α, β, γ constants.
pub fn jacobi_residual(c: &StructureConstants) -> f64 {
    let [a0, a1, a2] = c.alpha();
    let [b0, b1, b2] = c.beta();
    let [g0, g1, g2] = c.gamma();
    let e0 = a0 * g1 + b0 * g2 - b2 * g0 - a1 * g0;
    let e1 = b1 * g2 + a1 * b0 - b2 * g1 - a0 * b1;
    let e2 = a2 * g1 + a2 * b0 - a0 * b2 - a1 * g2;
    e0.abs().max(e1.abs()).max(e2.abs())
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureFit {
    pub constants: StructureConstants,
    /// Largest deviation of per-sample constants from their mean.
    pub spread: f64,
    /// Largest expansion error `|[X̂_i, X̂_j] − Σ C^k X̂_k|` over samples.
    pub residual: f64,
    pub samples: Vec<[f64; 3]>,
}

pub const STRUCTURE_TOL: f64 = 1e-9;

/// Generic sample points in `(x, y, z)`; degenerate ones are skipped.
const SAMPLE_CANDIDATES: [[f64; 3]; 9] = [
    [0.137, -0.211, 0.613],
    [-0.242, 0.093, -0.874],
    [0.281, 0.177, 1.329],
    [-0.058, -0.269, -0.402],
    [0.196, 0.244, -1.117],
    [-0.173, 0.129, 0.851],
    [0.071, -0.083, 1.733],
    [-0.297, -0.151, 0.257],
    [0.233, -0.032, -1.561],
];

/// Fit `C^k_ij` from brackets of the prolonged fields at generic points of
/// `(x, y, z)` space, where the three prolonged basis vectors are
/// independent.
pub fn structure_constants<X: PlaneVectorField>(basis: &[X; 3]) -> Result<StructureFit> {
    let pro: Vec<_> = basis.iter().map(prolong).collect();
    let brackets: Vec<_> = BRACKET_PAIRS
        .iter()
        .map(|&(i, j)| prolong(lie_bracket(&basis[i], &basis[j])))
        .collect();

    let mut per_sample = Vec::new();
    let mut samples = Vec::new();
    let mut last_degenerate = None;
    for p in SAMPLE_CANDIDATES {
        if samples.len() == 5 {
            break;
        }
        let cols = [
            pro[0].components(p),
            pro[1].components(p),
            pro[2].components(p),
        ];
        let mut rows = [[0.0; 3]; 3];
        let mut ok = true;
        for (r, b) in brackets.iter().enumerate() {
            match solve3(cols, b.components(p)) {
                Some(c) => rows[r] = c,
                None => ok = false,
            }
        }
        if ok {
            per_sample.push(rows);
            samples.push(p);
        } else {
            last_degenerate = Some(p);
        }
    }
    if samples.len() < 5 {
        return Err(Error::DegenerateSample {
            point: last_degenerate.unwrap_or_default().to_vec(),
        });
    }

    let n = per_sample.len() as f64;
    let mean: [[f64; 3]; 3] = std::array::from_fn(|r| {
        std::array::from_fn(|k| per_sample.iter().map(|s| s[r][k]).sum::<f64>() / n)
    });
    let spread = per_sample
        .iter()
        .flat_map(|s| (0..9).map(move |i| (s[i / 3][i % 3] - mean[i / 3][i % 3]).abs()))
        .fold(0.0, f64::max);

    let mut residual = 0.0f64;
    let mut worst = (0, 1);
    for p in &samples {
        let cols = [
            pro[0].components(*p),
            pro[1].components(*p),
            pro[2].components(*p),
        ];
        for (r, b) in brackets.iter().enumerate() {
            let lhs = b.components(*p);
            for comp in 0..3 {
                let rhs: f64 = (0..3).map(|k| mean[r][k] * cols[k][comp]).sum();
                let e = (lhs[comp] - rhs).abs();
                if e > residual {
                    residual = e;
                    worst = BRACKET_PAIRS[r];
                }
            }
        }
    }
    if !(residual <= STRUCTURE_TOL) || !(spread <= STRUCTURE_TOL) {
        return Err(Error::NotClosed {
            i: worst.0,
            j: worst.1,
            residual: residual.max(spread),
        });
    }
    Ok(StructureFit {
        constants: StructureConstants(mean),
        spread,
        residual,
        samples,
    })
}

/// The seven transitive realizations of three-dimensional Lie algebras of
/// plane vector fields, with `X₀` spanning the isotropy at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum LieAlgebraCase {
    D1,
    D2 { lambda: f64 },
    J1,
    J2,
    J3 { gamma0: f64, gamma1: f64 },
    C1 { lambda: f64 },
    C2(Sign),
}

impl LieAlgebraCase {
    pub fn name(&self) -> String {
        match self {
            Self::D1 => "D1".into(),
            Self::D2 { lambda } => format!("D2(lambda={lambda})"),
            Self::J1 => "J1".into(),
            Self::J2 => "J2".into(),
            Self::J3 { gamma0, gamma1 } => format!("J3(gamma0={gamma0},gamma1={gamma1})"),
            Self::C1 { lambda } => format!("C1(lambda={lambda})"),
            Self::C2(s) => format!("C2{}", s.symbol()),
        }
    }

    /// Short identifier without parameters, e.g. `D2` or `C2+`.
    pub fn family(&self) -> String {
        match self {
            Self::D1 => "D1".into(),
            Self::D2 { .. } => "D2".into(),
            Self::J1 => "J1".into(),
            Self::J2 => "J2".into(),
            Self::J3 { .. } => "J3".into(),
            Self::C1 { .. } => "C1".into(),
            Self::C2(s) => format!("C2{}", s.symbol()),
        }
    }

    /// Inverse of [`family`](Self::family). `param` is `λ` for D2 and C1
    /// and `γ₀` for J3 (with `γ₁ = 1 − γ₀`); other families ignore it.
    pub fn from_family(id: &str, param: Option<f64>) -> crate::Result<Self> {
        let lambda = param.unwrap_or(2.0);
        match id {
            "D1" => Ok(Self::D1),
            "D2" => Ok(Self::D2 { lambda }),
            "J1" => Ok(Self::J1),
            "J2" => Ok(Self::J2),
            "J3" => {
                let gamma0 = param.unwrap_or(1.0);
                Ok(Self::J3 {
                    gamma0,
                    gamma1: 1.0 - gamma0,
                })
            }
            "C1" => Ok(Self::C1 {
                lambda: param.unwrap_or(0.0),
            }),
            "C2+" => Ok(Self::C2(Sign::Plus)),
            "C2-" => Ok(Self::C2(Sign::Minus)),
            _ => Err(crate::Error::InvalidParameter(format!(
                "unknown Lie algebra case {id:?}"
            ))),
        }
    }

    /// Cases exercised by the verification suites.
    pub fn suite() -> Vec<Self> {
        vec![
            Self::D1,
            Self::D2 { lambda: -1.0 },
            Self::D2 { lambda: 2.0 },
            Self::J1,
            Self::J2,
            Self::J3 {
                gamma0: 1.0,
                gamma1: 0.0,
            },
            Self::J3 {
                gamma0: 0.0,
                gamma1: 1.0,
            },
            Self::C1 { lambda: 0.0 },
            Self::C1 { lambda: -1.0 },
            Self::C1 { lambda: 2.0 },
            Self::C2(Sign::Plus),
            Self::C2(Sign::Minus),
        ]
    }

    pub fn basis(&self) -> [PolyField; 3] {
        let p = Poly::new;
        let f = PolyField::new;
        match *self {
            Self::D1 => [
                f(p(&[(-1.0, 1, 0)]), p(&[(1.0, 0, 1)])),
                PolyField::dx(),
                f(p(&[(-0.5, 2, 0)]), p(&[(1.0, 1, 1), (1.0, 0, 0)])),
            ],
            Self::D2 { lambda } => [
                f(p(&[(-1.0, 1, 0)]), p(&[(-lambda, 0, 1)])),
                PolyField::dx(),
                PolyField::dy(),
            ],
            Self::J1 => [
                f(p(&[(-1.0, 1, 0), (-1.0, 0, 1)]), p(&[(-1.0, 0, 1)])),
                PolyField::dx(),
                PolyField::dy(),
            ],
            Self::J2 => [
                f(p(&[(-1.0, 0, 1)]), p(&[(-0.5, 0, 2)])),
                f(p(&[(-1.0, 0, 0)]), p(&[(-1.0, 0, 1)])),
                f(Poly::zero(), p(&[(-1.0, 0, 0)])),
            ],
            Self::J3 { gamma0, gamma1 } => [
                f(p(&[(1.0, 0, 1)]), Poly::zero()),
                PolyField::dx(),
                f(
                    p(&[(gamma0, 1, 1), (gamma1, 1, 0)]),
                    p(&[(gamma0, 0, 2), (gamma1, 0, 1), (-1.0, 0, 0)]),
                ),
            ],
            Self::C1 { lambda } => [
                f(
                    p(&[(-lambda, 1, 0), (1.0, 0, 1)]),
                    p(&[(-1.0, 1, 0), (-lambda, 0, 1)]),
                ),
                PolyField::dx(),
                f(Poly::zero(), p(&[(-1.0, 0, 0)])),
            ],
            Self::C2(s) => {
                let e = s.f();
                [
                    PolyField::rotation(),
                    f(
                        p(&[(0.5, 2, 0), (-0.5, 0, 2), (0.5 * e, 0, 0)]),
                        p(&[(1.0, 1, 1)]),
                    ),
                    f(
                        p(&[(1.0, 1, 1)]),
                        p(&[(-0.5, 2, 0), (0.5, 0, 2), (0.5 * e, 0, 0)]),
                    ),
                ]
            }
        }
    }

    /// Bracket table generated by the realization.
    ///
    /// Agrees with the printed classification table except for `C2`, where the
    /// printed fields realize `[X2, -X1, ±X0]`; see [`Self::printed_table`].
    pub fn expected_table(&self) -> StructureConstants {
        match *self {
            Self::C2(s) => {
                StructureConstants([[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [s.f(), 0.0, 0.0]])
            }
            _ => self.printed_table(),
        }
    }

    /// Bracket table as printed in the classification.
    ///
    /// For `C2(s)` this is the table realized by `C2(-s)` after `X0 -> -X0`;
    /// the Killing form of `[-X2, X1, +X0]` is indefinite while the `+`
    /// realization is the sphere's rotation algebra.
    pub fn printed_table(&self) -> StructureConstants {
        let t = |a: [f64; 3], b: [f64; 3], g: [f64; 3]| StructureConstants([a, b, g]);
        match *self {
            Self::D1 => t([0.0, 1.0, 0.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]),
            Self::D2 { lambda } => t([0.0, 1.0, 0.0], [0.0, 0.0, lambda], [0.0; 3]),
            Self::J1 => t([0.0, 1.0, 0.0], [0.0, 1.0, 1.0], [0.0; 3]),
            Self::J2 => t([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]),
            Self::J3 { gamma0, gamma1 } => t([0.0; 3], [0.0, 1.0, 0.0], [gamma0, gamma1, 0.0]),
            Self::C1 { lambda } => t([0.0, lambda, -1.0], [0.0, 1.0, lambda], [0.0; 3]),
            Self::C2(s) => t([0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [s.f(), 0.0, 0.0]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::CatalogSpray;

    fn close(a: [f64; 2], b: [f64; 2]) -> bool {
        (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14
    }

    #[test]
    fn prolongation_examples() {
        let p = [0.3, -0.4, 1.7];
        assert_eq!(prolong(PolyField::dy()).components(p)[2], 0.0);
        let xdy = PolyField::new(Poly::zero(), Poly::new(&[(1.0, 1, 0)]));
        assert_eq!(prolong(&xdy).components(p)[2], 1.0);
        let hyp = PolyField::new(Poly::new(&[(-1.0, 1, 0)]), Poly::new(&[(1.0, 0, 1)]));
        assert!((prolong(&hyp).components(p)[2] - 3.4).abs() < 1e-15);
    }

    #[test]
    fn bracket_examples() {
        let xdy = PolyField::new(Poly::zero(), Poly::new(&[(1.0, 1, 0)]));
        let b = lie_bracket(PolyField::dx(), &xdy);
        assert!(close(b.components([0.7, -0.2]), [0.0, 1.0]));

        let c1 = LieAlgebraCase::C1 { lambda: 0.0 }.basis();
        let b = lie_bracket(&c1[0], &c1[2]);
        assert!(close(b.components([0.2, 0.5]), [1.0, 0.0]));

        let d2 = LieAlgebraCase::D2 { lambda: 3.0 }.basis();
        let b = lie_bracket(&d2[0], &d2[1]);
        assert!(close(b.components([-0.4, 0.9]), [1.0, 0.0]));
    }

    #[test]
    fn bracket_is_antisymmetric() {
        let d1 = LieAlgebraCase::D1.basis();
        let p = [0.31, -0.17];
        let a = lie_bracket(&d1[0], &d1[2]).components(p);
        let b = lie_bracket(&d1[2], &d1[0]).components(p);
        assert!(close([a[0] + b[0], a[1] + b[1]], [0.0, 0.0]));
    }

    #[test]
    fn complete_lift_examples() {
        let p = [0.2, 0.3, 1.5, -0.5];
        assert_eq!(
            complete_lift(PolyField::dx()).components(p),
            [1.0, 0.0, 0.0, 0.0]
        );
        let r = complete_lift(PolyField::rotation()).components(p);
        assert_eq!(&r[2..], &[-0.5, -1.5]);
        let xdy = PolyField::new(Poly::zero(), Poly::new(&[(1.0, 1, 0)]));
        assert_eq!(&complete_lift(&xdy).components(p)[2..], &[0.0, 1.5]);
    }

    #[test]
    fn structure_constants_d2_and_c2() {
        let fit = structure_constants(&LieAlgebraCase::D2 { lambda: 2.0 }.basis()).unwrap();
        let want = StructureConstants([[0.0, 1.0, 0.0], [0.0, 0.0, 2.0], [0.0; 3]]);
        assert!(fit.constants.max_abs_diff(&want) < 1e-9);
        let fit = structure_constants(&LieAlgebraCase::C2(Sign::Plus).basis()).unwrap();
        let want = StructureConstants([[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]]);
        assert!(
            fit.constants.max_abs_diff(&want) < 1e-9,
            "{:?}",
            fit.constants
        );
        assert!(jacobi_residual(&fit.constants) < 1e-9);
        let printed = LieAlgebraCase::C2(Sign::Minus).printed_table();
        assert!(fit.constants.negate_first().max_abs_diff(&printed) < 1e-9);
    }

    #[test]
    fn degenerate_prolongation_is_reported() {
        // For λ = 1 the prolonged isotropy field vanishes on the fiber.
        let err = structure_constants(&LieAlgebraCase::D2 { lambda: 1.0 }.basis()).unwrap_err();
        assert!(matches!(err, Error::DegenerateSample { .. }));
    }

    #[test]
    fn non_closed_basis_is_reported() {
        let basis = [
            PolyField::dx(),
            PolyField::dy(),
            PolyField::new(Poly::new(&[(1.0, 2, 0)]), Poly::new(&[(1.0, 0, 3)])),
        ];
        assert!(matches!(
            structure_constants(&basis),
            Err(Error::NotClosed { .. }) | Err(Error::DegenerateSample { .. })
        ));
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi_residual(&StructureConstants([[0.0; 3]; 3])), 0.0);
        let d1 = structure_constants(&LieAlgebraCase::D1.basis()).unwrap();
        assert!(jacobi_residual(&d1.constants) < 1e-12);
        // (1 + λ)γ₀ = 0 is the only equation touched by γ₀ when α₀ = 0.
        let perturbed = |lambda: f64| {
            let mut t = LieAlgebraCase::D2 { lambda }.expected_table();
            t.0[2][0] += 0.1;
            jacobi_residual(&t)
        };
        assert!((perturbed(2.0) - 0.3).abs() < 1e-15);
        assert_eq!(perturbed(-1.0), 0.0);
    }

    #[test]
    fn translation_symmetry_of_y_independent_ode() {
        struct F;
        impl Field<3> for F {
            fn eval<T: Real>(&self, [x, _, z]: [T; 3]) -> T {
                x.sin() * z * z
            }
        }
        let r = point_symmetry_residual(&PolyField::dy(), &F, [0.3, 0.8, -1.1]).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn translation_is_projective_for_flat_spray() {
        let r =
            projective_field_residual(&PolyField::dx(), &CatalogSpray::Flat, [0.1, 0.2, 0.6, 0.8])
                .unwrap();
        assert_eq!(r, 0.0);
    }
}
