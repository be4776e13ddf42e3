//! Normal forms: the sprays with a three-dimensional projective algebra,
//! the metrics realizing them, and a listing used by the CLI.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::classify::OdeEntry;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::finsler::{FinslerMetric, MetricKind, Riemannian, RiemannianField, Spray};
use crate::jets::Real;
use crate::linalg::Mat2;
use crate::randers::{
    beta_for, constant_curvature_metric, randers_metric, ConstantCurvature, Model, RandersMetric,
    RotationalBeta,
};
use crate::symmetry::{LieAlgebraCase, PolyField};
use crate::Sign;

fn check_k(k: f64) -> Result<f64> {
    if k > 0.0 && k.is_finite() {
        Ok(k)
    } else {
        Err(Error::InvalidParameter(format!(
            "k must be positive, got {k}"
        )))
    }
}

/// `Γ = u∂x + v∂y − 2G¹∂u − 2G²∂v` in normal form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CatalogSpray {
    Flat,
    A,
    B { k: f64, sign: Sign },
    C(Sign),
}

impl CatalogSpray {
    pub fn b(k: f64, sign: Sign) -> Result<Self> {
        Ok(CatalogSpray::B {
            k: check_k(k)?,
            sign,
        })
    }

    pub fn name(&self) -> String {
        match self {
            CatalogSpray::Flat => "flat".into(),
            CatalogSpray::A => "a".into(),
            CatalogSpray::B { k, sign } => format!("bk{}(k={k})", sign.symbol()),
            CatalogSpray::C(s) => format!("c{}", s.symbol()),
        }
    }

    pub fn formula(&self) -> String {
        match self {
            CatalogSpray::Flat => "u∂x + v∂y".into(),
            CatalogSpray::A => "u∂x + v∂y − √(u²+v²)(v∂u − u∂v)".into(),
            CatalogSpray::B { k, sign } => {
                let s = sign.symbol();
                format!("u∂x + v∂y − ({k}√(u²+v²) {s} 2(xv − yu))/(1 {s} (x²+y²)) (v∂u − u∂v)")
            }
            CatalogSpray::C(sign) => {
                format!("u∂x + v∂y − ½(3u² {} e^(−2x)v²)∂u − uv∂v", sign.symbol())
            }
        }
    }

    pub fn all(ks: &[f64]) -> Vec<Self> {
        let mut out = vec![CatalogSpray::Flat, CatalogSpray::A];
        for sign in [Sign::Plus, Sign::Minus] {
            out.extend(ks.iter().map(|&k| CatalogSpray::B { k, sign }));
        }
        out.extend([CatalogSpray::C(Sign::Plus), CatalogSpray::C(Sign::Minus)]);
        out
    }

    /// Geodesics through `ξ` and `−ξ` share trajectories.
    pub fn reversible(&self) -> bool {
        matches!(self, CatalogSpray::Flat | CatalogSpray::C(_))
    }
}

impl Spray for CatalogSpray {
    fn coeffs<T: Real>(&self, [x, y, u, v]: [T; 4]) -> [T; 2] {
        match *self {
            CatalogSpray::Flat => [T::zero(); 2],
            CatalogSpray::A => {
                let n = (u * u + v * v).sqrt() * 0.5;
                [n * v, -(n * u)]
            }
            CatalogSpray::B { k, sign } => {
                let e = sign.f();
                let n = (u * u + v * v).sqrt();
                // Rotational term taken from the conformal factor of α; it induces
                // the ±2(xz − y)(1 + z²) term of the C2 family.
                let s = (n * k + (x * v - y * u) * (2.0 * e)) / ((x * x + y * y) * e + 1.0);
                [s * v * 0.5, -(s * u * 0.5)]
            }
            CatalogSpray::C(sign) => {
                let w = (x * -2.0).exp() * sign.f();
                [(u * u * 3.0 + w * v * v) * 0.25, u * v * 0.5]
            }
        }
    }

    fn domain(&self) -> Domain {
        match self {
            CatalogSpray::B {
                sign: Sign::Minus, ..
            } => Domain::disk(1.0),
            CatalogSpray::C(Sign::Plus) => {
                Domain::rect((-std::f64::consts::LN_2, 10.0), (-10.0, 10.0))
            }
            _ => Domain::square(10.0),
        }
    }
}

/// The Riemannian metrics `(c±)`:
/// `e^{3x}/(2e^x − 1)² dx² + e^x/(2e^x − 1) dy²` and `e^{3x}dx² + e^x dy²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpMetric(pub Sign);

impl RiemannianField for ExpMetric {
    fn tensor<T: Real>(&self, [x, _]: [T; 2]) -> Mat2<T> {
        let ex = x.exp();
        let (gxx, gyy) = match self.0 {
            Sign::Plus => {
                let d = ex * 2.0 - 1.0;
                // NaN unless 2e^x − 1 > 0, so evaluation outside the domain errors.
                let guard = d.ln() * 0.0;
                (ex * ex * ex / (d * d) + guard, ex / d + guard)
            }
            Sign::Minus => (ex * ex * ex, ex),
        };
        [[gxx, T::zero()], [T::zero(), gyy]]
    }

    fn domain(&self) -> Domain {
        match self.0 {
            Sign::Plus => Domain::rect((-std::f64::consts::LN_2, 5.0), (-5.0, 5.0)),
            Sign::Minus => Domain::square(5.0),
        }
    }
}

/// Identifier of a normal-form metric, as accepted on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricId {
    Euclidean,
    A,
    B { k: f64, sign: Sign },
    C(Sign),
}

impl MetricId {
    pub fn all(ks: &[f64]) -> Vec<Self> {
        let mut out = vec![MetricId::Euclidean, MetricId::A];
        for sign in [Sign::Plus, Sign::Minus] {
            out.extend(ks.iter().map(|&k| MetricId::B { k, sign }));
        }
        out.extend([MetricId::C(Sign::Plus), MetricId::C(Sign::Minus)]);
        out
    }

    /// Parse `a`, `c+`, `c-`, `euclidean`, or `bk+`/`bk-` with a separate `k`.
    pub fn parse(id: &str, k: Option<f64>) -> Result<Self> {
        let need_k = || {
            k.ok_or_else(|| Error::InvalidParameter(format!("{id} needs a parameter k")))
                .and_then(check_k)
        };
        match id {
            "euclidean" => Ok(MetricId::Euclidean),
            "a" => Ok(MetricId::A),
            "bk+" => Ok(MetricId::B {
                k: need_k()?,
                sign: Sign::Plus,
            }),
            "bk-" => Ok(MetricId::B {
                k: need_k()?,
                sign: Sign::Minus,
            }),
            "c+" => Ok(MetricId::C(Sign::Plus)),
            "c-" => Ok(MetricId::C(Sign::Minus)),
            _ => Err(Error::InvalidParameter(format!("unknown metric id {id:?}"))),
        }
    }

    pub fn spray(&self) -> CatalogSpray {
        match *self {
            MetricId::Euclidean => CatalogSpray::Flat,
            MetricId::A => CatalogSpray::A,
            MetricId::B { k, sign } => CatalogSpray::B { k, sign },
            MetricId::C(s) => CatalogSpray::C(s),
        }
    }

    pub fn formula(&self) -> String {
        match self {
            MetricId::Euclidean => "√(dx² + dy²)".into(),
            MetricId::A => "√(dx² + dy²) + ½(y dx − x dy)".into(),
            MetricId::B { k, sign } => {
                let s = sign.symbol();
                format!("(√(dx² + dy²) + ({k}/2)(y dx − x dy)) / (1 {s} (x² + y²))")
            }
            MetricId::C(Sign::Plus) => "√(e^(3x)/(2e^x − 1)² dx² + e^x/(2e^x − 1) dy²)".into(),
            MetricId::C(Sign::Minus) => "√(e^(3x)dx² + e^x dy²)".into(),
        }
    }

    /// The metric with the rotational one-form in the orientation whose
    /// geodesic spray matches [`spray`](Self::spray).
    pub fn metric(&self) -> Result<CatalogMetric> {
        self.metric_oriented(Sign::Plus)
    }

    /// As [`metric`](Self::metric), choosing the sign of the one-form of the
    /// Randers entries explicitly. `Sign::Minus` is `−(k/2)(y dx − x dy)/(1 ± r²)`.
    pub fn metric_oriented(&self, orientation: Sign) -> Result<CatalogMetric> {
        let randers = |model: Model, k: f64, domain: Domain| -> Result<CatalogMetric> {
            let beta = RotationalBeta {
                orientation,
                ..beta_for(model, k)?
            };
            Ok(CatalogMetric::Randers(randers_metric(
                constant_curvature_metric(model),
                beta,
                domain,
            )?))
        };
        match *self {
            MetricId::Euclidean => Ok(CatalogMetric::Constant(Riemannian(
                constant_curvature_metric(Model::Euclidean),
            ))),
            MetricId::A => randers(Model::Euclidean, 1.0, Domain::disk(1.8)),
            MetricId::B { k, sign } => {
                let model = Model::from_sign(sign);
                randers(model, check_k(k)?, model.domain().with_radius(1.8 / k))
            }
            MetricId::C(s) => Ok(CatalogMetric::Exp(Riemannian(ExpMetric(s)))),
        }
    }

    /// A basis of the projective algebra of the metric.
    pub fn projective_fields(&self) -> [PolyField; 3] {
        match *self {
            MetricId::Euclidean | MetricId::A => Model::Euclidean.killing_fields(),
            MetricId::B { sign, .. } => Model::from_sign(sign).killing_fields(),
            MetricId::C(_) => LieAlgebraCase::J2.basis(),
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricId::Euclidean => write!(f, "euclidean"),
            MetricId::A => write!(f, "a"),
            MetricId::B { k, sign } => write!(f, "bk{}(k={k})", sign.symbol()),
            MetricId::C(s) => write!(f, "c{}", s.symbol()),
        }
    }
}

/// Concrete metric of a [`MetricId`].
#[derive(Clone, Copy, Debug)]
pub enum CatalogMetric {
    Constant(Riemannian<ConstantCurvature>),
    Exp(Riemannian<ExpMetric>),
    Randers(RandersMetric<ConstantCurvature, RotationalBeta>),
}

impl FinslerMetric for CatalogMetric {
    fn eval<T: Real>(&self, p: [T; 4]) -> T {
        match self {
            CatalogMetric::Constant(m) => m.eval(p),
            CatalogMetric::Exp(m) => m.eval(p),
            CatalogMetric::Randers(m) => m.eval(p),
        }
    }
    fn kind(&self) -> MetricKind {
        match self {
            CatalogMetric::Randers(_) => MetricKind::Randers,
            _ => MetricKind::Riemannian,
        }
    }
    fn domain(&self) -> Domain {
        match self {
            CatalogMetric::Constant(m) => m.domain(),
            CatalogMetric::Exp(m) => m.domain(),
            CatalogMetric::Randers(m) => m.domain(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub id: String,
    pub family: &'static str,
    pub formula: String,
    pub domain: Option<Domain>,
    pub parameters: &'static str,
}

/// Suite defaults for the parametrized families.
pub const DEFAULT_K: [f64; 3] = [0.5, 1.0, 2.0];
pub const DEFAULT_LAMBDA: [f64; 2] = [-1.0, 2.0];

const K_NOTE: &str = "k > 0 (suite defaults 0.5, 1, 2)";
const LAMBDA_NOTE: &str = "λ real (suite defaults −1, 2)";

fn sign_pair() -> [Sign; 2] {
    [Sign::Plus, Sign::Minus]
}

/// Every entry in listing order. Parametrized entries appear once, shown
/// at a representative parameter.
pub fn listing() -> Vec<CatalogEntry> {
    let mut out = Vec::new();
    let metric_ids = [
        ("euclidean", MetricId::Euclidean, ""),
        ("a", MetricId::A, ""),
        (
            "bk+",
            MetricId::B {
                k: 1.0,
                sign: Sign::Plus,
            },
            K_NOTE,
        ),
        (
            "bk-",
            MetricId::B {
                k: 1.0,
                sign: Sign::Minus,
            },
            K_NOTE,
        ),
        ("c+", MetricId::C(Sign::Plus), ""),
        ("c-", MetricId::C(Sign::Minus), ""),
    ];
    for (id, m, parameters) in metric_ids {
        out.push(CatalogEntry {
            id: id.into(),
            family: "metric",
            formula: m.formula(),
            domain: m.metric().ok().map(|m| m.domain()),
            parameters,
        });
    }
    for (id, m, parameters) in metric_ids {
        let s = m.spray();
        let id = if id == "euclidean" {
            "flat".to_string()
        } else {
            format!("spray:{id}")
        };
        out.push(CatalogEntry {
            id,
            family: "spray",
            formula: s.formula(),
            domain: Some(s.domain()),
            parameters,
        });
    }
    let odes = [
        (OdeEntry::Zero, ""),
        (OdeEntry::D1 { c: 1.0 }, "C"),
        (
            OdeEntry::D2 { c: 1.0, k: 1.5 },
            "C, λ ≠ 1, k = (λ − 2)/(λ − 1) (suite defaults λ = −1, 2)",
        ),
        (OdeEntry::J1 { c: 1.0 }, "C"),
        (OdeEntry::J2 { c: 1.0 }, "C"),
        (
            OdeEntry::C1 {
                c: 1.0,
                lambda: 0.0,
            },
            "C, λ real",
        ),
        (
            OdeEntry::C2 {
                c: 1.0,
                sign: Sign::Plus,
            },
            "C",
        ),
        (
            OdeEntry::C2 {
                c: 1.0,
                sign: Sign::Minus,
            },
            "C",
        ),
        (OdeEntry::J3 { c: 1.0 }, "C, h(y) = 1 + y"),
    ];
    for (e, parameters) in odes {
        out.push(CatalogEntry {
            id: format!("ode:{}", e.family()),
            family: "ode",
            formula: e.formula(),
            domain: None,
            parameters,
        });
    }
    let mut algebras = vec![
        (LieAlgebraCase::D1, ""),
        (LieAlgebraCase::D2 { lambda: 2.0 }, LAMBDA_NOTE),
        (LieAlgebraCase::J1, ""),
        (LieAlgebraCase::J2, ""),
        (
            LieAlgebraCase::J3 {
                gamma0: 1.0,
                gamma1: 0.0,
            },
            "γ₀, γ₁ real",
        ),
        (LieAlgebraCase::C1 { lambda: 0.0 }, LAMBDA_NOTE),
    ];
    algebras.extend(sign_pair().map(|s| (LieAlgebraCase::C2(s), "")));
    for (case, parameters) in algebras {
        let [a, b, c] = case.basis();
        out.push(CatalogEntry {
            id: format!("lie:{}", case.family()),
            family: "algebra",
            formula: format!("⟨{a}, {b}, {c}⟩"),
            domain: None,
            parameters,
        });
    }
    out
}

/// Resolve `id` (with its optional parameter) to a detailed description.
pub fn show(id: &str, param: Option<f64>) -> Result<String> {
    if let Ok(m) = MetricId::parse(id, param) {
        let metric = m.metric()?;
        let spray = m.spray();
        let fields = m.projective_fields().map(|f| f.to_string()).join(", ");
        return Ok(format!(
            "{m}\n  metric: F = {}\n  kind: {:?}\n  domain: {:?}\n  spray: {}\n  spray domain: {:?}\n  projective fields: {fields}\n",
            m.formula(),
            metric.kind(),
            metric.domain(),
            spray.formula(),
            spray.domain(),
        ));
    }
    if let Some(rest) = id.strip_prefix("spray:") {
        let s = MetricId::parse(rest, param)?.spray();
        return Ok(format!(
            "{}\n  spray: {}\n  domain: {:?}\n",
            s.name(),
            s.formula(),
            s.domain()
        ));
    }
    if id == "flat" {
        let s = CatalogSpray::Flat;
        return Ok(format!(
            "flat\n  spray: {}\n  domain: {:?}\n",
            s.formula(),
            s.domain()
        ));
    }
    if let Some(rest) = id.strip_prefix("ode:") {
        let e = OdeEntry::from_family(rest, param)?;
        return Ok(format!("{}\n  ODE: y'' = {}\n", e.name(), e.formula()));
    }
    if let Some(rest) = id.strip_prefix("lie:") {
        let case = LieAlgebraCase::from_family(rest, param)?;
        let [a, b, c] = case.basis();
        let t = case.expected_table();
        return Ok(format!(
            "{}\n  basis: X0 = {a}, X1 = {b}, X2 = {c}\n  [X0,X1] = {:?}\n  [X0,X2] = {:?}\n  [X1,X2] = {:?}\n",
            case.name(),
            t.alpha(),
            t.beta(),
            t.gamma()
        ));
    }
    Err(Error::InvalidParameter(format!(
        "unknown catalog id {id:?}"
    )))
}

impl FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" => Ok(Sign::Plus),
            "-" => Ok(Sign::Minus),
            _ => Err(Error::InvalidParameter(format!(
                "expected + or -, got {s:?}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_is_long_enough_and_unique() {
        let l = listing();
        assert!(l.len() >= 20);
        let mut ids: Vec<_> = l.iter().map(|e| e.id.clone()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), l.len());
    }

    #[test]
    fn show_examples() {
        let s = show("c-", None).unwrap();
        assert!(s.contains("√(e^(3x)dx² + e^x dy²)"));
        assert!(s.contains("uv∂v"));
        assert!(show("bk+", Some(2.0)).unwrap().contains("(2/2)"));
        assert!(show("bk+", None).is_err());
        assert!(show("bk+", Some(-1.0)).is_err());
        assert!(show("nope", None).is_err());
    }

    #[test]
    fn spray_b_at_zero_curvature_limit_values() {
        let s = CatalogSpray::B {
            k: 2.0,
            sign: Sign::Plus,
        };
        // s = (2·1 + 2(0·0 − 0·1))/1 at the origin
        assert_eq!(s.coeffs_at([0.0, 0.0, 1.0, 0.0]).unwrap(), [0.0, -1.0]);
        // Off the origin: s = (2 + 2(0.5·1 − 0))/(1 + 0.25) = 2.4
        let g = s.coeffs_at([0.5, 0.0, 0.0, 1.0]).unwrap();
        assert!((g[0] - 1.2).abs() < 1e-15 && g[1].abs() < 1e-15);
    }

    #[test]
    fn exp_metric_values() {
        let g = ExpMetric(Sign::Plus).tensor_at([0.0, 0.0]).unwrap();
        assert_eq!(g, [[1.0, 0.0], [0.0, 1.0]]);
        assert!(ExpMetric(Sign::Plus).tensor_at([-1.0, 0.0]).is_err());
        let g = ExpMetric(Sign::Minus).tensor_at([1.0, 0.0]).unwrap();
        assert!((g[0][0] - 3f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn b_metric_domain_respects_positivity() {
        let m = MetricId::B {
            k: 2.0,
            sign: Sign::Plus,
        }
        .metric()
        .unwrap();
        assert_eq!(m.domain().max_radius, Some(0.9));
    }
}
