//! Second-order ODE normal forms, the projective-flatness test and the
//! Liouville metrizability residuals.

use serde::Serialize;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::finsler::RiemannianField;
use crate::jets::{lift_all, Field, Real};
use crate::linalg::{det2, scale2, Mat2};
use crate::Sign;

/// Normal forms `y'' = f(x, y, y')` with a three-dimensional point
/// symmetry algebra, plus the flat representatives `0` and `C(1 + y)y'³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "family")]
pub enum OdeEntry {
    Zero,
    D1 {
        c: f64,
    },
    /// `C z^k`; from the algebra parameter, `k = (λ − 2)/(λ − 1)`.
    D2 {
        c: f64,
        k: f64,
    },
    /// `C z³ e^{−1/z}` for `z > 0`, extended by zero.
    J1 {
        c: f64,
    },
    J2 {
        c: f64,
    },
    C1 {
        c: f64,
        lambda: f64,
    },
    C2 {
        c: f64,
        sign: Sign,
    },
    J3 {
        c: f64,
    },
}

impl OdeEntry {
    /// D2 from the algebra parameter `λ ≠ 1`.
    pub fn d2(c: f64, lambda: f64) -> Result<Self> {
        if lambda == 1.0 {
            return Err(Error::InvalidParameter("D2 needs λ ≠ 1".into()));
        }
        Ok(OdeEntry::D2 {
            c,
            k: (lambda - 2.0) / (lambda - 1.0),
        })
    }

    /// Entries with the constants used by the suites.
    pub fn suite() -> Vec<Self> {
        let mut out = vec![OdeEntry::D1 { c: 1.0 }];
        out.extend(crate::catalog::DEFAULT_LAMBDA.map(|l| Self::d2(1.0, l).expect("λ ≠ 1")));
        out.extend([
            OdeEntry::J1 { c: 1.0 },
            OdeEntry::J2 { c: 1.0 },
            OdeEntry::C1 {
                c: 1.0,
                lambda: 0.0,
            },
            OdeEntry::C1 {
                c: 1.0,
                lambda: -1.0,
            },
            OdeEntry::C2 {
                c: 1.0,
                sign: Sign::Plus,
            },
            OdeEntry::C2 {
                c: 1.0,
                sign: Sign::Minus,
            },
        ]);
        out
    }

    pub fn family(&self) -> String {
        match self {
            OdeEntry::Zero => "zero".into(),
            OdeEntry::D1 { .. } => "D1".into(),
            OdeEntry::D2 { .. } => "D2".into(),
            OdeEntry::J1 { .. } => "J1".into(),
            OdeEntry::J2 { .. } => "J2".into(),
            OdeEntry::C1 { .. } => "C1".into(),
            OdeEntry::C2 { sign, .. } => format!("C2{}", sign.symbol()),
            OdeEntry::J3 { .. } => "J3".into(),
        }
    }

    /// `family` with `C = 1`; `param` is `λ` for D2 and C1.
    pub fn from_family(id: &str, param: Option<f64>) -> Result<Self> {
        match id {
            "zero" => Ok(OdeEntry::Zero),
            "D1" => Ok(OdeEntry::D1 { c: 1.0 }),
            "D2" => Self::d2(1.0, param.unwrap_or(-1.0)),
            "J1" => Ok(OdeEntry::J1 { c: 1.0 }),
            "J2" => Ok(OdeEntry::J2 { c: 1.0 }),
            "C1" => Ok(OdeEntry::C1 {
                c: 1.0,
                lambda: param.unwrap_or(0.0),
            }),
            "C2+" => Ok(OdeEntry::C2 {
                c: 1.0,
                sign: Sign::Plus,
            }),
            "C2-" => Ok(OdeEntry::C2 {
                c: 1.0,
                sign: Sign::Minus,
            }),
            "J3" => Ok(OdeEntry::J3 { c: 1.0 }),
            _ => Err(Error::InvalidParameter(format!(
                "unknown ODE family {id:?}"
            ))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            OdeEntry::Zero => "zero".into(),
            OdeEntry::D1 { c } | OdeEntry::J1 { c } | OdeEntry::J2 { c } | OdeEntry::J3 { c } => {
                format!("{}(C={c})", self.family())
            }
            OdeEntry::D2 { c, k } => format!("D2(C={c},k={k})"),
            OdeEntry::C1 { c, lambda } => format!("C1(C={c},lambda={lambda})"),
            OdeEntry::C2 { c, .. } => format!("{}(C={c})", self.family()),
        }
    }

    pub fn formula(&self) -> String {
        match self {
            OdeEntry::Zero => "0".into(),
            OdeEntry::D1 { c } => format!("{c}(y² − 2z)^(3/2) − y³ + 3yz"),
            OdeEntry::D2 { c, k } => format!("{c} z^{k}"),
            OdeEntry::J1 { c } => format!("{c} z³ e^(−1/z) (z > 0), 0 (z ≤ 0)"),
            OdeEntry::J2 { c } => format!("½z + {c} e^(−2x) z³"),
            OdeEntry::C1 { c, lambda } => format!("{c}(z² + 1)^(3/2) e^(−{lambda} arctan z)"),
            OdeEntry::C2 { c, sign } => {
                let s = sign.symbol();
                format!("({c}(z² + 1)^(3/2) {s} 2(xz − y)(z² + 1)) / (1 {s} (x² + y²))")
            }
            OdeEntry::J3 { c } => format!("{c}(1 + y) z³"),
        }
    }

    /// Whether the entry, taken with `C ≠ 0`, has an 8-dimensional
    /// symmetry algebra.
    pub fn expected_flat(&self) -> bool {
        match *self {
            OdeEntry::Zero | OdeEntry::J3 { .. } => true,
            OdeEntry::D2 { k, .. } => [0.0, 1.0, 2.0, 3.0].contains(&k),
            _ => false,
        }
    }

    /// A base region where `f` is defined at every check node `z ∈ [−2, 3]`
    /// when the entry has such a region.
    pub fn region(&self) -> Domain {
        match self {
            OdeEntry::D1 { .. } => Domain::rect((-0.5, 0.5), (2.5, 3.5)),
            _ => Domain::square(0.5),
        }
    }
}

impl Field<3> for OdeEntry {
    fn eval<T: Real>(&self, [x, y, z]: [T; 3]) -> T {
        match *self {
            OdeEntry::Zero => T::zero(),
            OdeEntry::D1 { c } => (y * y - z * 2.0).powf(1.5) * c - y * y * y + y * z * 3.0,
            OdeEntry::D2 { c, k } => {
                if k.fract() == 0.0 && k.abs() < 64.0 {
                    z.powi(k as i32) * c
                } else {
                    z.powf(k) * c
                }
            }
            OdeEntry::J1 { c } => {
                if z.re() > 0.0 {
                    z * z * z * (-z.recip()).exp() * c
                } else {
                    T::zero()
                }
            }
            OdeEntry::J2 { c } => z * 0.5 + (x * -2.0).exp() * z * z * z * c,
            OdeEntry::C1 { c, lambda } => (z * z + 1.0).powf(1.5) * (z.atan() * -lambda).exp() * c,
            OdeEntry::C2 { c, sign } => {
                let e = sign.f();
                let q = z * z + 1.0;
                (q.powf(1.5) * c + (x * z - y) * q * (2.0 * e)) / ((x * x + y * y) * e + 1.0)
            }
            OdeEntry::J3 { c } => (y + 1.0) * z * z * z * c,
        }
    }
}

/// A normal form with one of its fixed structural numbers scaled by
/// `1 + eps`: the `3` of `3yz` (D1), `λ` (D2), the `1` of `e^{−1/z}` (J1),
/// the `½` (J2), the power `3/2` (C1) and the `2` (C2). The free constant
/// `C` is left alone, since every `C` keeps the symmetry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Perturbed {
    pub entry: OdeEntry,
    pub eps: f64,
}

impl Perturbed {
    pub fn what(&self) -> &'static str {
        match self.entry {
            OdeEntry::D1 { .. } => "coefficient 3 of 3yz",
            OdeEntry::D2 { .. } => "algebra parameter λ",
            OdeEntry::J1 { .. } => "rate 1 in e^(−1/z)",
            OdeEntry::J2 { .. } => "coefficient ½ of z",
            OdeEntry::C1 { .. } => "power 3/2",
            OdeEntry::C2 { .. } => "coefficient 2",
            OdeEntry::Zero | OdeEntry::J3 { .. } => "nothing (flat entry)",
        }
    }
}

impl Field<3> for Perturbed {
    fn eval<T: Real>(&self, p: [T; 3]) -> T {
        let s = 1.0 + self.eps;
        let [x, y, z] = p;
        match self.entry {
            OdeEntry::D1 { c } => (y * y - z * 2.0).powf(1.5) * c - y * y * y + y * z * (3.0 * s),
            OdeEntry::D2 { c, k } => {
                let lambda = (k - 2.0) / (k - 1.0);
                z.powf((lambda * s - 2.0) / (lambda * s - 1.0)) * c
            }
            OdeEntry::J1 { c } => {
                if z.re() > 0.0 {
                    z * z * z * (-z.recip() * s).exp() * c
                } else {
                    T::zero()
                }
            }
            OdeEntry::J2 { c } => z * (0.5 * s) + (x * -2.0).exp() * z * z * z * c,
            OdeEntry::C1 { c, lambda } => {
                (z * z + 1.0).powf(1.5 * s) * (z.atan() * -lambda).exp() * c
            }
            OdeEntry::C2 { c, sign } => {
                let e = sign.f();
                let q = z * z + 1.0;
                (q.powf(1.5) * c + (x * z - y) * q * (2.0 * e * s)) / ((x * x + y * y) * e + 1.0)
            }
            OdeEntry::Zero | OdeEntry::J3 { .. } => self.entry.eval(p),
        }
    }
}

/// Interpolation nodes of the cubic fit and the nodes used to check it.
pub const FIT_NODES: [f64; 4] = [0.0, 1.0, -1.0, 2.0];
pub const CHECK_NODES: [f64; 2] = [-2.0, 3.0];
pub const CUBIC_TOL: f64 = 1e-9;

/// `f = A + Bz + Cz² + Dz³`, with the coefficients obtained by exact
/// interpolation in `z` pointwise in `(x, y)`.
#[derive(Clone, Copy, Debug)]
pub struct CubicForm<F> {
    pub f: F,
}

impl<F: Field<3>> CubicForm<F> {
    /// `[A, B, C, D]` at a base point.
    pub fn coeffs<T: Real>(&self, [x, y]: [T; 2]) -> [T; 4] {
        let at = |z: f64| self.f.eval([x, y, T::cst(z)]);
        let (f0, f1, fm, f2) = (at(0.0), at(1.0), at(-1.0), at(2.0));
        let a = f0;
        let c = (f1 + fm) * 0.5 - a;
        let b_plus_d = (f1 - fm) * 0.5;
        let d = ((f2 - a - c * 4.0) * 0.5 - b_plus_d) / 3.0;
        [a, b_plus_d - d, c, d]
    }

    pub fn coefficient(&self, i: usize) -> CubicCoeff<'_, F> {
        assert!(i < 4);
        CubicCoeff(self, i)
    }

    pub fn coeffs_at(&self, p: [f64; 2]) -> Result<[f64; 4]> {
        let c = self.coeffs(p);
        if c.iter().all(|v| v.is_finite()) {
            Ok(c)
        } else {
            Err(Error::Domain { point: p.to_vec() })
        }
    }
}

/// One coefficient of a [`CubicForm`] as a field on the base.
pub struct CubicCoeff<'a, F>(&'a CubicForm<F>, usize);

impl<F: Field<3>> Field<2> for CubicCoeff<'_, F> {
    fn eval<T: Real>(&self, p: [T; 2]) -> T {
        self.0.coeffs(p)[self.1]
    }
}

/// Fit the cubic in `z` at `at` and accept it if it reproduces `f` at the
/// check nodes.
pub fn extract_cubic<F: Field<3>>(f: F, at: [f64; 2]) -> Result<CubicForm<F>> {
    let cf = CubicForm { f };
    let [a, b, c, d] = cf.coeffs_at(at)?;
    let mut worst = 0.0f64;
    for z in CHECK_NODES {
        let exact = cf.f.at([at[0], at[1], z])?;
        worst = worst.max((exact - (a + z * (b + z * (c + z * d)))).abs());
    }
    if worst <= CUBIC_TOL {
        Ok(cf)
    } else {
        Err(Error::NotCubic {
            point: at.to_vec(),
            residual: worst,
        })
    }
}

/// The two expressions in `A..D` and their derivatives that vanish exactly
/// when the cubic ODE is point-equivalent to `y'' = 0`.
pub fn flatness_residuals<F: Field<3>>(cf: &CubicForm<F>, at: [f64; 2]) -> Result<[f64; 2]> {
    let j: [_; 4] = [0, 1, 2, 3].map(|i| lift_all(&cf.coefficient(i), at));
    let [a, b, c, d] = match j {
        [Ok(a), Ok(b), Ok(c), Ok(d)] => [a, b, c, d],
        _ => return Err(Error::Domain { point: at.to_vec() }),
    };
    let (x, y) = (0, 1);
    let r1 = -a.hess[y][y] + 2.0 / 3.0 * b.hess[x][y]
        - c.hess[x][x] / 3.0
        - d.value * a.grad[x]
        - 2.0 * a.value * d.grad[x]
        + c.value * a.grad[y]
        + a.value * c.grad[y]
        + b.value * c.grad[x] / 3.0
        - 2.0 / 3.0 * b.value * b.grad[y];
    let r2 = 2.0 / 3.0 * c.hess[x][y] - b.hess[y][y] / 3.0 - d.hess[x][x]
        + a.value * d.grad[y]
        + 2.0 * d.value * a.grad[y]
        - d.value * b.grad[x]
        - b.value * d.grad[x]
        - c.value * b.grad[y] / 3.0
        + 2.0 / 3.0 * c.value * c.grad[x];
    Ok([r1, r2])
}

pub const FLATNESS_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlatnessVerdict {
    pub flat: bool,
    /// Largest `|r₁|, |r₂|` over the points where the fit succeeded.
    pub max_residual: f64,
    pub witness: Option<[f64; 2]>,
    pub reason: Option<String>,
    pub samples: usize,
}

/// Flat iff `f` is cubic in `z` at every grid point of `region` and both
/// flatness residuals are at most [`FLATNESS_TOL`] there.
pub fn is_projectively_flat<F: Field<3>>(f: &F, region: &Domain, n: usize) -> FlatnessVerdict {
    let grid = region.verification_grid(n, f64::INFINITY);
    let mut max_residual = 0.0f64;
    for &p in &grid {
        let outcome = extract_cubic(f, p).and_then(|cf| flatness_residuals(&cf, p));
        let fail = match outcome {
            Ok([r1, r2]) => {
                let r = r1.abs().max(r2.abs());
                max_residual = max_residual.max(r);
                (r > FLATNESS_TOL).then(|| format!("flatness residuals ({r1:e}, {r2:e})"))
            }
            Err(e) => Some(e.to_string()),
        };
        if let Some(reason) = fail {
            return FlatnessVerdict {
                flat: false,
                max_residual,
                witness: Some(p),
                reason: Some(reason),
                samples: grid.len(),
            };
        }
    }
    FlatnessVerdict {
        flat: true,
        max_residual,
        witness: None,
        reason: None,
        samples: grid.len(),
    }
}

/// `a = (det g)^{−2/3} g`.
#[derive(Clone, Copy, Debug)]
pub struct ATensor<G> {
    pub g: G,
}

pub fn liouville_candidate<G: RiemannianField>(g: G) -> ATensor<G> {
    ATensor { g }
}

impl<G: RiemannianField> RiemannianField for ATensor<G> {
    fn tensor<T: Real>(&self, p: [T; 2]) -> Mat2<T> {
        let g = self.g.tensor(p);
        scale2(&g, det2(&g).powf(-2.0 / 3.0))
    }
    fn domain(&self) -> Domain {
        self.g.domain()
    }
}

/// Coefficients `K⁰..K³` of a cubic ODE `y'' = K⁰ + K¹z + K²z² + K³z³`.
pub trait ProjectiveConnectionCoeffs: Send + Sync {
    fn k_at(&self, p: [f64; 2]) -> Result<[f64; 4]>;
}

impl<F: Field<3>> ProjectiveConnectionCoeffs for CubicForm<F> {
    fn k_at(&self, p: [f64; 2]) -> Result<[f64; 4]> {
        self.coeffs_at(p)
    }
}

struct Entry<'a, A>(&'a A, usize, usize);

impl<A: RiemannianField> Field<2> for Entry<'_, A> {
    fn eval<T: Real>(&self, p: [T; 2]) -> T {
        self.0.tensor(p)[self.1][self.2]
    }
}

/// The four linear equations in `∂a` and `K` that hold iff the geodesics
/// of `g = a/(det a)²` solve the cubic ODE with coefficients `K`.
pub fn liouville_residuals<A: RiemannianField, K: ProjectiveConnectionCoeffs>(
    a: &A,
    k: &K,
    at: [f64; 2],
) -> Result<[f64; 4]> {
    let a11 = lift_all(&Entry(a, 0, 0), at)?;
    let a12 = lift_all(&Entry(a, 0, 1), at)?;
    let a22 = lift_all(&Entry(a, 1, 1), at)?;
    let [k0, k1, k2, k3] = k.k_at(at)?;
    let (x, y) = (0, 1);
    let (b11, b12, b22) = (a11.value, a12.value, a22.value);
    Ok([
        a11.grad[x] - 2.0 / 3.0 * k1 * b11 + 2.0 * k0 * b12,
        a11.grad[y] + 2.0 * a12.grad[x] - 4.0 / 3.0 * k2 * b11
            + 2.0 / 3.0 * k1 * b12
            + 2.0 * k0 * b22,
        2.0 * a12.grad[y] + a22.grad[x] - 2.0 * k3 * b11 - 2.0 / 3.0 * k2 * b12
            + 4.0 / 3.0 * k1 * b22,
        a22.grad[y] - 2.0 * k3 * b12 + 2.0 / 3.0 * k2 * b22,
    ])
}

/// `g = a / (det a)²`.
#[derive(Clone, Copy, Debug)]
pub struct Reconstructed<A> {
    pub a: A,
}

impl<A: RiemannianField> RiemannianField for Reconstructed<A> {
    fn tensor<T: Real>(&self, p: [T; 2]) -> Mat2<T> {
        let a = self.a.tensor(p);
        let d = det2(&a);
        scale2(&a, (d * d).recip())
    }
    fn domain(&self) -> Domain {
        self.a.domain()
    }
}

/// Fails if `a` is singular anywhere on a 5×5 grid of its domain.
pub fn reconstruct_metric<A: RiemannianField>(a: A) -> Result<Reconstructed<A>> {
    for p in a.domain().verification_grid(5, f64::INFINITY) {
        let d = det2(&a.tensor_at(p)?);
        if !(d.abs() > 1e-300) {
            return Err(Error::SingularTensor { point: p.to_vec() });
        }
    }
    Ok(Reconstructed { a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{CatalogSpray, ExpMetric};
    use crate::finsler::induced_odes;
    use crate::randers::{constant_curvature_metric, Model};

    #[test]
    fn cubic_extraction_examples() {
        let cf = extract_cubic(OdeEntry::Zero, [0.1, 0.2]).unwrap();
        assert_eq!(cf.coeffs_at([0.1, 0.2]).unwrap(), [0.0; 4]);

        let j2 = OdeEntry::J2 { c: 0.5 };
        let x = 0.3f64;
        let [a, b, c, d] = extract_cubic(j2, [x, 0.0])
            .unwrap()
            .coeffs_at([x, 0.0])
            .unwrap();
        assert!(a.abs() < 1e-15 && (b - 0.5).abs() < 1e-15 && c.abs() < 1e-15);
        assert!((d - 0.5 * (-2.0 * x).exp()).abs() < 1e-15);

        let c1 = OdeEntry::C1 {
            c: 1.0,
            lambda: 0.0,
        };
        assert!(matches!(
            extract_cubic(c1, [0.0, 0.0]),
            Err(Error::NotCubic { .. })
        ));
    }

    #[test]
    fn flatness_residual_examples() {
        let zero = extract_cubic(OdeEntry::Zero, [0.0, 0.0]).unwrap();
        assert_eq!(flatness_residuals(&zero, [0.0, 0.0]).unwrap(), [0.0, 0.0]);

        let j3 = extract_cubic(OdeEntry::J3 { c: 1.0 }, [0.2, 0.3]).unwrap();
        let r = flatness_residuals(&j3, [0.2, 0.3]).unwrap();
        assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12);

        let pair = induced_odes(CatalogSpray::C(Sign::Plus));
        let cf = extract_cubic(pair.plus, [0.0, 0.4]).unwrap();
        let [r1, r2] = flatness_residuals(&cf, [0.0, 0.4]).unwrap();
        assert!(r1.abs() < 1e-10 && (r2 + 1.5).abs() < 1e-10, "{r1} {r2}");
    }

    #[test]
    fn flatness_verdicts() {
        assert!(is_projectively_flat(&OdeEntry::Zero, &Domain::square(0.5), 5).flat);
        let d2 = OdeEntry::d2(1.0, 0.0).unwrap();
        assert_eq!(d2, OdeEntry::D2 { c: 1.0, k: 2.0 });
        assert!(is_projectively_flat(&d2, &d2.region(), 5).flat);
        for e in OdeEntry::suite() {
            let v = is_projectively_flat(&e, &e.region(), 5);
            assert_eq!(v.flat, e.expected_flat(), "{}", e.name());
            assert_eq!(v.witness.is_some(), !v.flat);
        }
        assert!(OdeEntry::d2(1.0, 1.0).is_err());
    }

    #[test]
    fn liouville_candidate_examples() {
        let e = liouville_candidate(constant_curvature_metric(Model::Euclidean));
        assert_eq!(e.tensor_at([0.3, 0.1]).unwrap(), [[1.0, 0.0], [0.0, 1.0]]);

        let a = liouville_candidate(ExpMetric(Sign::Minus));
        let x = 0.7f64;
        let m = a.tensor_at([x, 0.0]).unwrap();
        assert!((m[0][0] - (x / 3.0).exp()).abs() < 1e-14);
        assert!((m[1][1] - (-5.0 * x / 3.0).exp()).abs() < 1e-14);
    }

    #[test]
    fn liouville_residual_examples() {
        let e = liouville_candidate(constant_curvature_metric(Model::Euclidean));
        let zero = CubicForm { f: OdeEntry::Zero };
        assert_eq!(
            liouville_residuals(&e, &zero, [0.2, 0.1]).unwrap(),
            [0.0; 4]
        );

        let a = liouville_candidate(ExpMetric(Sign::Minus));
        let k = CubicForm {
            f: OdeEntry::J2 { c: -0.5 },
        };
        for r in liouville_residuals(&a, &k, [0.4, -0.3]).unwrap() {
            assert!(r.abs() < 1e-13);
        }
        let flipped = CubicForm {
            f: OdeEntry::J2 { c: 0.5 },
        };
        let r = liouville_residuals(&a, &flipped, [0.0, 0.0]).unwrap();
        assert!((r[2].abs() - 2.0).abs() < 1e-13, "{r:?}");
    }

    #[test]
    fn reconstruction_examples() {
        let e = reconstruct_metric(liouville_candidate(constant_curvature_metric(
            Model::Euclidean,
        )))
        .unwrap();
        assert_eq!(e.tensor_at([0.5, 0.5]).unwrap(), [[1.0, 0.0], [0.0, 1.0]]);

        let g = reconstruct_metric(liouville_candidate(ExpMetric(Sign::Minus))).unwrap();
        let m = g.tensor_at([0.9, 0.0]).unwrap();
        assert!((m[0][0] / 2.7f64.exp() - 1.0).abs() < 1e-13);
        assert!((m[1][1] / 0.9f64.exp() - 1.0).abs() < 1e-13);

        #[derive(Clone, Copy)]
        struct Degenerate;
        impl RiemannianField for Degenerate {
            fn tensor<T: Real>(&self, [x, _]: [T; 2]) -> Mat2<T> {
                [[x, x], [x, x]]
            }
            fn domain(&self) -> Domain {
                Domain::square(1.0)
            }
        }
        assert!(matches!(
            reconstruct_metric(Degenerate),
            Err(Error::SingularTensor { .. })
        ));
    }
}
