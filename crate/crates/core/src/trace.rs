//! Fixed-step RK4 integration of sprays and scalar second-order ODEs, and
//! post-processing of the resulting traces.

use serde::Serialize;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::finsler::{RiemannianField, Spray};
use crate::jets::Field;
use crate::linalg::{quad2, solve3};
use crate::randers::{christoffel, CurveSample};

/// A second-order system `(ẋ, ẏ, u̇, v̇) = (u, v, a¹, a²)`.
pub trait SecondOrderSystem: Send + Sync {
    fn acceleration(&self, p: [f64; 4]) -> Result<[f64; 2]>;
    fn domain(&self) -> Domain;
}

impl<S: Spray> SecondOrderSystem for S {
    fn acceleration(&self, p: [f64; 4]) -> Result<[f64; 2]> {
        let [g1, g2] = self.coeffs_at(p)?;
        Ok([-2.0 * g1, -2.0 * g2])
    }
    fn domain(&self) -> Domain {
        Spray::domain(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Halt {
    LeftDomain { t: f64 },
    FiberCollapsed { t: f64 },
    Evaluation { t: f64, message: String },
    BlowUp { x: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct GeodesicTrace {
    /// Rows `(t, x, y, u, v)`, `t` strictly increasing.
    pub samples: Vec<[f64; 5]>,
    pub method: &'static str,
    pub step: f64,
    pub halt: Option<Halt>,
}

impl GeodesicTrace {
    pub fn last(&self) -> [f64; 5] {
        *self.samples.last().expect("trace is never empty")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,y,u,v\n");
        for s in &self.samples {
            let row: Vec<String> = s.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn rk4_step<S: SecondOrderSystem>(sys: &S, s: [f64; 4], h: f64) -> Result<[f64; 4]> {
    let deriv = |p: [f64; 4]| -> Result<[f64; 4]> {
        let [a1, a2] = sys.acceleration(p)?;
        Ok([p[2], p[3], a1, a2])
    };
    let axpy = |p: [f64; 4], k: [f64; 4], c: f64| std::array::from_fn(|i| p[i] + c * k[i]);
    let k1 = deriv(s)?;
    let k2 = deriv(axpy(s, k1, 0.5 * h))?;
    let k3 = deriv(axpy(s, k2, 0.5 * h))?;
    let k4 = deriv(axpy(s, k3, h))?;
    Ok(std::array::from_fn(|i| {
        s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

pub const FIBER_FLOOR: f64 = 1e-12;

/// Integrate from `init = (x, y, u, v)` over `[0, tmax]` with
/// `round(tmax/step)` equal steps.
pub fn integrate_spray<S: SecondOrderSystem>(
    sys: &S,
    init: [f64; 4],
    tmax: f64,
    step: f64,
) -> Result<GeodesicTrace> {
    if !(step > 0.0) || !(tmax >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need step > 0 and tmax >= 0 (step {step}, tmax {tmax})"
        )));
    }
    let domain = sys.domain();
    if !domain.contains(init[0], init[1]) || init[2].hypot(init[3]) < FIBER_FLOOR {
        return Err(Error::OutsideDomain {
            point: init.to_vec(),
        });
    }
    let n = ((tmax / step).round() as usize).max(usize::from(tmax > 0.0));
    let h = if n > 0 { tmax / n as f64 } else { step };
    let mut samples = Vec::with_capacity(n + 1);
    samples.push([0.0, init[0], init[1], init[2], init[3]]);
    let mut state = init;
    let mut halt = None;
    for i in 1..=n {
        let t = i as f64 * h;
        match rk4_step(sys, state, h) {
            Ok(next) => {
                if !domain.contains(next[0], next[1]) {
                    halt = Some(Halt::LeftDomain { t });
                    break;
                }
                if next[2].hypot(next[3]) < FIBER_FLOOR {
                    halt = Some(Halt::FiberCollapsed { t });
                    break;
                }
                state = next;
                samples.push([t, next[0], next[1], next[2], next[3]]);
            }
            Err(e) => {
                halt = Some(Halt::Evaluation {
                    t,
                    message: e.to_string(),
                });
                break;
            }
        }
    }
    Ok(GeodesicTrace {
        samples,
        method: "rk4",
        step: h,
        halt,
    })
}

/// Solution samples `(x, y, y')` of `y'' = f(x, y, y')`.
#[derive(Clone, Debug, Serialize)]
pub struct PlaneCurve {
    pub samples: Vec<[f64; 3]>,
    pub step: f64,
    pub halt: Option<Halt>,
}

pub const BLOW_UP: f64 = 1e6;

pub fn integrate_ode<F: Field<3>>(
    f: &F,
    init: [f64; 3],
    xmax: f64,
    step: f64,
) -> Result<PlaneCurve> {
    let [x0, y0, z0] = init;
    if !(step > 0.0) || !(xmax >= x0) {
        return Err(Error::InvalidParameter(format!(
            "need step > 0 and xmax >= x0 (step {step}, xmax {xmax})"
        )));
    }
    f.at(init)?;
    let n = (((xmax - x0) / step).round() as usize).max(usize::from(xmax > x0));
    let h = if n > 0 { (xmax - x0) / n as f64 } else { step };
    let rhs = |x: f64, y: f64, z: f64| -> Result<[f64; 2]> { Ok([z, f.at([x, y, z])?]) };
    let mut samples = vec![init];
    let (mut y, mut z) = (y0, z0);
    let mut halt = None;
    for i in 0..n {
        let x = x0 + i as f64 * h;
        let step = (|| -> Result<(f64, f64)> {
            let k1 = rhs(x, y, z)?;
            let k2 = rhs(x + 0.5 * h, y + 0.5 * h * k1[0], z + 0.5 * h * k1[1])?;
            let k3 = rhs(x + 0.5 * h, y + 0.5 * h * k2[0], z + 0.5 * h * k2[1])?;
            let k4 = rhs(x + h, y + h * k3[0], z + h * k3[1])?;
            Ok((
                y + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                z + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ))
        })();
        match step {
            Ok((ny, nz)) if nz.abs() <= BLOW_UP => {
                y = ny;
                z = nz;
                samples.push([x0 + (i + 1) as f64 * h, y, z]);
            }
            Ok(_) => {
                halt = Some(Halt::BlowUp { x: x + h });
                break;
            }
            Err(e) => {
                halt = Some(Halt::Evaluation {
                    t: x + h,
                    message: e.to_string(),
                });
                break;
            }
        }
    }
    Ok(PlaneCurve {
        samples,
        step: h,
        halt,
    })
}

/// Cubic Hermite interpolation on one interval of width `h`.
fn hermite(p0: f64, m0: f64, p1: f64, m1: f64, h: f64, s: f64) -> (f64, f64) {
    let (s2, s3) = (s * s, s * s * s);
    let val = (2.0 * s3 - 3.0 * s2 + 1.0) * p0
        + (s3 - 2.0 * s2 + s) * h * m0
        + (-2.0 * s3 + 3.0 * s2) * p1
        + (s3 - s2) * h * m1;
    let der = ((6.0 * s2 - 6.0 * s) * p0
        + (3.0 * s2 - 4.0 * s + 1.0) * h * m0
        + (-6.0 * s2 + 6.0 * s) * p1
        + (3.0 * s2 - 2.0 * s) * h * m1)
        / h;
    (val, der)
}

impl PlaneCurve {
    /// `y(x)` by cubic Hermite interpolation between samples.
    pub fn y_at(&self, x: f64) -> Option<f64> {
        let first = self.samples.first()?[0];
        let i = ((x - first) / self.step).floor();
        if i < 0.0 {
            return None;
        }
        let i = (i as usize).min(self.samples.len().saturating_sub(2));
        let (a, b) = (self.samples.get(i)?, self.samples.get(i + 1)?);
        if x > b[0] + 1e-12 {
            return None;
        }
        let h = b[0] - a[0];
        Some(hermite(a[1], a[2], b[1], b[2], h, (x - a[0]) / h).0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CircleFit {
    pub center: [f64; 2],
    pub radius: f64,
    pub rms: f64,
}

/// Algebraic (Kåsa) circle fit of the base points of a trace.
pub fn circle_fit(trace: &GeodesicTrace) -> Result<CircleFit> {
    let pts: Vec<[f64; 2]> = trace.samples.iter().map(|s| [s[1], s[2]]).collect();
    circle_fit_points(&pts)
}

pub fn circle_fit_points(pts: &[[f64; 2]]) -> Result<CircleFit> {
    if pts.len() < 10 {
        return Err(Error::DegenerateFit(format!(
            "need at least 10 samples, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = pts.iter().map(|p| p[1]).sum::<f64>() / n;
    // Minimize Σ (X² + Y² + D X + E Y + F)² in centered coordinates.
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for p in pts {
        let (x, y) = (p[0] - mx, p[1] - my);
        let row = [x, y, 1.0];
        let rhs = -(x * x + y * y);
        for i in 0..3 {
            for j in 0..3 {
                ata[j][i] += row[i] * row[j];
            }
            atb[i] += row[i] * rhs;
        }
    }
    let [d, e, f] =
        solve3(ata, atb).ok_or_else(|| Error::DegenerateFit("samples are collinear".into()))?;
    let (cx, cy) = (-0.5 * d, -0.5 * e);
    let r2 = cx * cx + cy * cy - f;
    if !(r2 > 0.0) {
        return Err(Error::DegenerateFit(format!(
            "non-positive squared radius {r2}"
        )));
    }
    let radius = r2.sqrt();
    let center = [cx + mx, cy + my];
    let rms = (pts
        .iter()
        .map(|p| ((p[0] - center[0]).hypot(p[1] - center[1]) - radius).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(CircleFit {
        center,
        radius,
        rms,
    })
}

/// Total turning of the velocity `(u, v)` along the trace, in turns.
/// Positive means counterclockwise.
pub fn winding(trace: &GeodesicTrace) -> f64 {
    let angle: f64 = trace
        .samples
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            (a[3] * b[4] - a[4] * b[3]).atan2(a[3] * b[3] + a[4] * b[4])
        })
        .sum();
    angle / std::f64::consts::TAU
}

/// Resample at uniform α-arc-length. Positions come from cubic Hermite
/// interpolation in `t`; velocities are the interpolated `ċ` scaled to
/// α-unit length. The `t` column of the result is arc length.
pub fn unit_speed_resample<A: RiemannianField>(
    trace: &GeodesicTrace,
    alpha: &A,
) -> Result<GeodesicTrace> {
    let speed =
        |s: &[f64; 5]| quad2(&alpha.tensor([s[1], s[2]]), [s[3], s[4]], [s[3], s[4]]).sqrt();
    let n = trace.samples.len();
    if n < 2 {
        return Ok(trace.clone());
    }
    let mut arc = Vec::with_capacity(n);
    arc.push(0.0);
    for w in trace.samples.windows(2) {
        let ds = 0.5 * (speed(&w[0]) + speed(&w[1])) * (w[1][0] - w[0][0]);
        if !(ds > 0.0) {
            return Err(Error::Invariant(format!(
                "arc length not increasing at t = {}",
                w[1][0]
            )));
        }
        arc.push(arc.last().unwrap() + ds);
    }
    let total = *arc.last().unwrap();
    let ds = total / (n - 1) as f64;
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for j in 0..n {
        let s = if j == n - 1 { total } else { j as f64 * ds };
        while seg + 2 < n && arc[seg + 1] < s {
            seg += 1;
        }
        let (a, b) = (trace.samples[seg], trace.samples[seg + 1]);
        let h = b[0] - a[0];
        let frac = ((s - arc[seg]) / (arc[seg + 1] - arc[seg])).clamp(0.0, 1.0);
        let (x, u) = hermite(a[1], a[3], b[1], b[3], h, frac);
        let (y, v) = hermite(a[2], a[4], b[2], b[4], h, frac);
        let sigma = quad2(&alpha.tensor([x, y]), [u, v], [u, v]).sqrt();
        out.push([s, x, y, u / sigma, v / sigma]);
    }
    Ok(GeodesicTrace {
        samples: out,
        method: "arc-length resample",
        step: ds,
        halt: trace.halt.clone(),
    })
}

/// Unit-α-speed curve sample at `state`, with the acceleration of `sys`
/// converted to the arc-length parametrization.
pub fn unit_speed_sample<S: SecondOrderSystem, A: RiemannianField>(
    sys: &S,
    alpha: &A,
    state: [f64; 4],
) -> Result<CurveSample> {
    let [x, y, u, v] = state;
    let acc = sys.acceleration(state)?;
    let g = alpha.tensor([x, y]);
    let sigma = quad2(&g, [u, v], [u, v]).sqrt();
    let gam = christoffel(alpha, [x, y]);
    let xi = [u, v];
    let nabla: [f64; 2] = std::array::from_fn(|i| {
        let mut a = acc[i];
        for j in 0..2 {
            for k in 0..2 {
                a += gam[i][j][k] * xi[j] * xi[k];
            }
        }
        a
    });
    let sigma_dot = quad2(&g, xi, nabla) / sigma;
    Ok(CurveSample {
        pos: [x, y],
        vel: [u / sigma, v / sigma],
        acc: std::array::from_fn(|i| acc[i] / (sigma * sigma) - xi[i] * sigma_dot / sigma.powi(3)),
    })
}
