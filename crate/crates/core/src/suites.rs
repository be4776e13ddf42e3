//! Verification suites over the whole catalog, producing one report per
//! check.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog::{CatalogSpray, MetricId, DEFAULT_K, DEFAULT_LAMBDA};
use crate::classify::{
    extract_cubic, flatness_residuals, is_projectively_flat, liouville_candidate,
    liouville_residuals, reconstruct_metric, OdeEntry, Perturbed, CUBIC_TOL, FLATNESS_TOL,
};
use crate::domain::{fiber_directions, Domain};
use crate::error::{Error, Result};
use crate::finsler::{
    geodesic_spray, induced_ode_direct, induced_odes, is_strongly_convex, projective_residual,
    smoothness_at_zero, transpose_odes, FinslerMetric, RadialShift, RiemannianField, Spray,
    SMOOTHNESS_TOL,
};
use crate::jets::Field;
use crate::randers::{
    alpha_norm, area_form, beta_for, constant_curvature_metric, exterior_derivative,
    geodesic_curvature, magnetic_residual, GaugeShifted, LorentzOperator, MagneticFlow, Model,
    LORENTZ_TOL,
};
use crate::symmetry::{
    jacobi_residual, point_symmetry_residual, projective_field_residual, structure_constants,
    LieAlgebraCase, PlaneVectorField, PolyField, STRUCTURE_TOL,
};
use crate::trace::{circle_fit, integrate_spray, unit_speed_resample, unit_speed_sample, winding};
use crate::Sign;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_SEED: u64 = 0x5eed_2d5f;

/// Default tolerances of the checks.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Tolerances {
    pub projective: f64,
    pub pipeline: f64,
    pub homogeneity: f64,
    pub reversibility: f64,
    pub smoothness: f64,
    pub symmetry: f64,
    pub structure: f64,
    pub separation: f64,
    pub flatness: f64,
    pub liouville: f64,
    pub round_trip: f64,
    pub exterior: f64,
    pub lorentz: f64,
    pub speed_drift: f64,
    pub killing: f64,
    pub magnetic: f64,
    pub curvature: f64,
    pub circle: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    projective: 1e-9,
    pipeline: 1e-9,
    homogeneity: 1e-12,
    reversibility: 1e-9,
    smoothness: SMOOTHNESS_TOL,
    symmetry: 1e-9,
    structure: STRUCTURE_TOL,
    separation: 1e-4,
    flatness: FLATNESS_TOL,
    liouville: 1e-9,
    round_trip: 1e-12,
    exterior: 1e-10,
    lorentz: LORENTZ_TOL,
    speed_drift: 1e-7,
    killing: 1e-8,
    magnetic: 1e-6,
    curvature: 1e-5,
    circle: 1e-6,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Symmetry,
    Flatness,
    Metrizability,
    Equivalence,
    Randers,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Symmetry,
        Suite::Flatness,
        Suite::Metrizability,
        Suite::Equivalence,
        Suite::Randers,
    ];

    /// `all` or a single suite name.
    pub fn parse_selection(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            Ok(Self::ALL.to_vec())
        } else {
            Ok(vec![s.parse()?])
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|suite| suite.to_string() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Symmetry => "symmetry",
            Suite::Flatness => "flatness",
            Suite::Metrizability => "metrizability",
            Suite::Equivalence => "equivalence",
            Suite::Randers => "randers",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub seed: u64,
    /// Points per axis of base grids; each check has its own default.
    pub grid: Option<usize>,
    /// Replaces the tolerance of every upper-bound check.
    pub tol: Option<f64>,
    /// Restrict the symmetry and flatness suites to one family, e.g. `C2+`.
    pub case: Option<String>,
    pub ks: Vec<f64>,
    pub lambdas: Vec<f64>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            grid: None,
            tol: None,
            case: None,
            ks: DEFAULT_K.to_vec(),
            lambdas: DEFAULT_LAMBDA.to_vec(),
        }
    }
}

impl Options {
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
    fn grid(&self, default: usize) -> usize {
        self.grid.unwrap_or(default).max(1)
    }
    fn wants(&self, family: &str) -> bool {
        self.case.as_deref().is_none_or(|c| c == family)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Pass iff `max_residual ≤ tolerance`.
    AtMost,
    /// Pass iff `max_residual > tolerance`; used for separation checks where
    /// a quantity must be visibly nonzero.
    Exceeds,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub record: &'static str,
    pub suite: Suite,
    pub check: String,
    pub entry: String,
    pub grid: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub mode: Mode,
    pub pass: bool,
    pub witness: Option<Vec<f64>>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub record: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub suites: Vec<Suite>,
    pub tolerances: Tolerances,
}

pub fn header(suites: &[Suite], opts: &Options) -> Header {
    let mut tolerances = TOLERANCES;
    if let Some(t) = opts.tol {
        // Only the upper-bound checks take the override.
        let separation = tolerances.separation;
        tolerances = Tolerances {
            projective: t,
            pipeline: t,
            homogeneity: t,
            reversibility: t,
            smoothness: t,
            symmetry: t,
            structure: t,
            separation,
            flatness: t,
            liouville: t,
            round_trip: t,
            exterior: t,
            lorentz: t,
            speed_drift: t,
            killing: t,
            magnetic: t,
            curvature: t,
            circle: t,
        };
    }
    Header {
        record: "header",
        version: VERSION,
        seed: opts.seed,
        suites: suites.to_vec(),
        tolerances,
    }
}

/// Running maximum of a residual over sample points; evaluation errors
/// count as infinite residuals.
struct Acc {
    max: f64,
    worst: Option<Vec<f64>>,
    samples: usize,
    errors: usize,
    first_error: Option<String>,
}

impl Acc {
    fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            worst: None,
            samples: 0,
            errors: 0,
            first_error: None,
        }
    }

    fn add(&mut self, point: &[f64], r: Result<f64>) {
        self.samples += 1;
        match r {
            Ok(v) if v.is_finite() => {
                if v > self.max {
                    self.max = v;
                    self.worst = Some(point.to_vec());
                }
            }
            Ok(v) => {
                self.errors += 1;
                self.first_error
                    .get_or_insert(format!("non-finite residual {v}"));
                self.max = f64::INFINITY;
                self.worst = Some(point.to_vec());
            }
            Err(e) => {
                self.errors += 1;
                if self.first_error.is_none() {
                    self.first_error = Some(e.to_string());
                }
                self.max = f64::INFINITY;
                self.worst = Some(point.to_vec());
            }
        }
    }

    fn report(
        self,
        suite: Suite,
        check: &str,
        entry: String,
        tolerance: f64,
        mode: Mode,
    ) -> VerificationReport {
        let max = if self.samples == 0 {
            f64::INFINITY
        } else {
            self.max
        };
        let pass = self.errors == 0
            && self.samples > 0
            && match mode {
                Mode::AtMost => max <= tolerance,
                Mode::Exceeds => max > tolerance,
            };
        let grid = format!("{} samples", self.samples);
        let note = self
            .first_error
            .map(|e| format!("{} evaluation error(s); first: {e}", self.errors));
        let witness = match mode {
            Mode::AtMost if pass => None,
            _ => self.worst,
        };
        VerificationReport {
            record: "check",
            suite,
            check: check.into(),
            entry,
            grid,
            max_residual: max,
            tolerance,
            mode,
            pass,
            witness,
            note,
        }
    }
}

fn with_grid(mut r: VerificationReport, grid: String) -> VerificationReport {
    r.grid = format!("{grid}; {}", r.grid);
    r
}

fn with_note(mut r: VerificationReport, note: impl Into<String>) -> VerificationReport {
    let note = note.into();
    r.note = Some(match r.note {
        Some(old) => format!("{note}; {old}"),
        None => note,
    });
    r
}

fn failed(
    suite: Suite,
    check: &str,
    entry: String,
    tolerance: f64,
    e: &Error,
) -> VerificationReport {
    let mut acc = Acc::new();
    acc.add(&[], Err(e.clone()));
    acc.report(suite, check, entry, tolerance, Mode::AtMost)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Run one suite. Reports come back in catalog order.
pub fn run(suite: Suite, opts: &Options) -> Vec<VerificationReport> {
    match suite {
        Suite::Symmetry => symmetry_suite(opts),
        Suite::Flatness => flatness_suite(opts),
        Suite::Metrizability => metrizability_suite(opts),
        Suite::Equivalence => equivalence_suite(opts),
        Suite::Randers => randers_suite(opts),
    }
}

pub fn run_all(suites: &[Suite], opts: &Options) -> Vec<VerificationReport> {
    suites.iter().flat_map(|&s| run(s, opts)).collect()
}

// ---------------------------------------------------------------- equivalence

fn metric_grid(domain: &Domain, n: usize) -> Vec<[f64; 2]> {
    domain.verification_grid(n, 0.5)
}

pub(crate) fn equivalence_suite(opts: &Options) -> Vec<VerificationReport> {
    let s = Suite::Equivalence;
    let mut out = Vec::new();
    let n = opts.grid(5);
    let dirs = fiber_directions(8, 0.1);
    let zs = linspace(-2.0, 2.0, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    for id in MetricId::all(&opts.ks) {
        let entry = id.to_string();
        let metric = match id.metric() {
            Ok(m) => m,
            Err(e) => {
                out.push(failed(s, "metric_construction", entry, 0.0, &e));
                continue;
            }
        };
        let spray = id.spray();
        let geo = geodesic_spray(metric);
        let grid = metric_grid(&metric.domain(), n);
        let grid_desc = format!("{n}x{n} base x 8 directions");

        let mut acc = Acc::new();
        for &[x, y] in &grid {
            for &[u, v] in &dirs {
                let p = [x, y, u, v];
                acc.add(&p, projective_residual(&geo, &spray, p));
            }
        }
        out.push(with_grid(
            acc.report(
                s,
                "projective_equivalence",
                entry.clone(),
                opts.tol(TOLERANCES.projective),
                Mode::AtMost,
            ),
            grid_desc.clone(),
        ));

        if let MetricId::B { .. } = id {
            // The other orientation of the rotational one-form.
            match id.metric_oriented(Sign::Minus) {
                Ok(other) => {
                    let geo_other = geodesic_spray(other);
                    let mut acc = Acc::new();
                    for &[x, y] in &grid {
                        for &[u, v] in &dirs {
                            let p = [x, y, u, v];
                            acc.add(&p, projective_residual(&geo_other, &spray, p));
                        }
                    }
                    out.push(with_note(
                        with_grid(
                            acc.report(s, "opposite_orientation_differs", entry.clone(), TOLERANCES.separation, Mode::Exceeds),
                            grid_desc.clone(),
                        ),
                        "one-form −(k/2)(y dx − x dy)/(1 ± r²) is not equivalent to the normal-form spray",
                    ));
                }
                Err(e) => out.push(failed(
                    s,
                    "opposite_orientation_differs",
                    entry.clone(),
                    0.0,
                    &e,
                )),
            }
        }

        let direct = induced_ode_direct(metric);
        let via_spray = induced_odes(geo);
        let mut acc = Acc::new();
        for &[x, y] in &grid {
            for &z in &zs {
                let p = [x, y, z];
                let plus = direct
                    .plus
                    .at(p)
                    .and_then(|a| via_spray.plus.at(p).map(|b| (a - b).abs()));
                acc.add(&p, plus);
                let minus = direct
                    .minus
                    .at(p)
                    .and_then(|a| via_spray.minus.at(p).map(|b| (a - b).abs()));
                acc.add(&p, minus);
            }
        }
        out.push(with_grid(
            acc.report(
                s,
                "pipeline_agreement",
                entry.clone(),
                opts.tol(TOLERANCES.pipeline),
                Mode::AtMost,
            ),
            format!("{n}x{n}x9 (x, y, z), both branches"),
        ));

        let mut acc = Acc::new();
        let (bx, by) = metric.domain().shrunk(0.9).clipped(0.5).grid_box();
        for _ in 0..20 {
            let x = rng.gen_range(bx.0..bx.1);
            let y = rng.gen_range(by.0..by.1);
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = rng.gen_range(0.5..2.0);
            let (u, v) = (r * th.cos(), r * th.sin());
            for lam in [0.5, 2.0, 7.3] {
                let p = [x, y, u, v];
                let q = [x, y, lam * u, lam * v];
                let f = metric
                    .at(p)
                    .and_then(|a| metric.at(q).map(|b| (b - lam * a).abs() / (lam * a).abs()));
                acc.add(&p, f);
                for g in [
                    spray
                        .coeffs_at(p)
                        .and_then(|a| spray.coeffs_at(q).map(|b| (a, b))),
                    geo.coeffs_at(p)
                        .and_then(|a| geo.coeffs_at(q).map(|b| (a, b))),
                ] {
                    let rel = g.map(|(a, b)| {
                        let scale = lam * lam * a[0].abs().max(a[1].abs()).max(r * r);
                        (b[0] - lam * lam * a[0])
                            .abs()
                            .max((b[1] - lam * lam * a[1]).abs())
                            / scale
                    });
                    acc.add(&p, rel);
                }
            }
        }
        out.push(with_grid(
            acc.report(
                s,
                "homogeneity",
                entry.clone(),
                opts.tol(TOLERANCES.homogeneity),
                Mode::AtMost,
            ),
            "20 seeded random (x, y, ξ) x λ in {0.5, 2, 7.3}".into(),
        ));

        let mut acc = Acc::new();
        match is_strongly_convex(&metric, &grid, 16) {
            Ok(rep) => acc.add(&rep.witness, Ok(rep.min_eigenvalue)),
            Err(e) => acc.add(&[], Err(e)),
        }
        out.push(with_note(
            with_grid(
                acc.report(s, "strong_convexity", entry, 0.0, Mode::Exceeds),
                format!("{n}x{n} base x 16 directions"),
            ),
            "residual is the smallest eigenvalue of the fundamental tensor",
        ));
    }

    for spray in CatalogSpray::all(&opts.ks) {
        let entry = spray.name();
        let pair = induced_odes(spray);
        let grid = metric_grid(&spray.domain(), n);
        let mut same = Acc::new();
        let mut opposite = Acc::new();
        let mut apart = Acc::new();
        for &[x, y] in &grid {
            for &z in &zs {
                let p = [x, y, z];
                let fp = pair.plus.at(p);
                let fm = pair.minus.at(p);
                match (fp, fm) {
                    (Ok(a), Ok(b)) => {
                        same.add(&p, Ok((a - b).abs()));
                        opposite.add(&p, Ok((a + b).abs()));
                        apart.add(&p, Ok((a - b).abs()));
                    }
                    (Err(e), _) | (_, Err(e)) => {
                        same.add(&p, Err(e.clone()));
                        opposite.add(&p, Err(e.clone()));
                        apart.add(&p, Err(e));
                    }
                }
            }
        }
        let tol = opts.tol(TOLERANCES.reversibility);
        let gd = format!("{n}x{n}x9 (x, y, z)");
        if spray.reversible() {
            out.push(with_grid(
                same.report(s, "reversible: f- = f+", entry.clone(), tol, Mode::AtMost),
                gd,
            ));
        } else {
            // Only (a) is purely odd in ξ; the b sprays carry a quadratic
            // rotational part, so there f+ + f- is nonzero.
            if matches!(spray, CatalogSpray::A) {
                out.push(with_grid(
                    opposite.report(
                        s,
                        "irreversible: f- = -f+",
                        entry.clone(),
                        tol,
                        Mode::AtMost,
                    ),
                    gd.clone(),
                ));
            }
            out.push(with_grid(
                apart.report(
                    s,
                    "irreversible: f- != f+",
                    entry.clone(),
                    TOLERANCES.separation,
                    Mode::Exceeds,
                ),
                gd,
            ));
        }

        let t = transpose_odes(pair);
        let mut acc = Acc::new();
        for p in spray.domain().verification_grid(3, 0.5) {
            let r = smoothness_at_zero(&t, p);
            let worst = r
                .mismatches
                .iter()
                .map(|m| (m.from_above - m.from_below).abs())
                .fold(
                    0.0,
                    |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) },
                );
            acc.add(&p, Ok(worst));
        }
        out.push(with_note(
            with_grid(
                acc.report(
                    s,
                    "transposed_smooth_at_zero",
                    entry,
                    opts.tol(TOLERANCES.smoothness),
                    Mode::AtMost,
                ),
                "3x3 base".into(),
            ),
            "residual is the largest one-sided mismatch above the tolerance (0 when none)",
        ));
    }
    out
}

// ---------------------------------------------------------------- symmetry

fn symmetry_pairs(opts: &Options) -> Vec<(LieAlgebraCase, OdeEntry)> {
    let mut pairs = vec![(LieAlgebraCase::D1, OdeEntry::D1 { c: 1.0 })];
    for &l in &opts.lambdas {
        if let Ok(e) = OdeEntry::d2(1.0, l) {
            pairs.push((LieAlgebraCase::D2 { lambda: l }, e));
        }
    }
    pairs.push((LieAlgebraCase::J1, OdeEntry::J1 { c: 1.0 }));
    pairs.push((LieAlgebraCase::J2, OdeEntry::J2 { c: 1.0 }));
    for &l in &opts.lambdas {
        pairs.push((
            LieAlgebraCase::C1 { lambda: l },
            OdeEntry::C1 { c: 1.0, lambda: l },
        ));
    }
    for sign in [Sign::Plus, Sign::Minus] {
        pairs.push((LieAlgebraCase::C2(sign), OdeEntry::C2 { c: 1.0, sign }));
    }
    pairs
}

/// Points `(x, y, z)` of the symmetry grid where the normal form is
/// defined by its printed formula.
pub fn symmetry_grid(entry: &OdeEntry, n: usize) -> Vec<[f64; 3]> {
    let zs = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let mut out = Vec::new();
    for [x, y] in Domain::square(0.3).grid(n) {
        for z in zs {
            let ok = match *entry {
                OdeEntry::D1 { .. } => y * y - 2.0 * z > 0.0,
                OdeEntry::J1 { .. } => z > 0.0,
                OdeEntry::D2 { k, .. } => k.fract() == 0.0 || z > 0.0,
                _ => true,
            };
            if ok {
                out.push([x, y, z]);
            }
        }
    }
    out
}

pub(crate) fn symmetry_suite(opts: &Options) -> Vec<VerificationReport> {
    let s = Suite::Symmetry;
    let mut out = Vec::new();
    let n = opts.grid(3);
    for (case, ode) in symmetry_pairs(opts) {
        if !opts.wants(&case.family()) {
            continue;
        }
        let grid = symmetry_grid(&ode, n);
        let gd = format!(
            "{n}x{n} in [-0.3, 0.3]^2 x z in {{-2..2}} ({} usable)",
            grid.len()
        );
        let basis = case.basis();
        for (i, field) in basis.iter().enumerate() {
            let mut acc = Acc::new();
            for p in &grid {
                acc.add(p, point_symmetry_residual(field, &ode, *p));
            }
            let mut r = with_grid(
                acc.report(
                    s,
                    &format!("point_symmetry X{i}"),
                    format!("{} / {}", case.name(), ode.name()),
                    opts.tol(TOLERANCES.symmetry),
                    Mode::AtMost,
                ),
                gd.clone(),
            );
            if matches!(ode, OdeEntry::J1 { .. }) {
                r = with_note(r, "sampled at z > 0; the form is extended by 0 for z <= 0");
            }
            out.push(r);
        }

        let perturbed = Perturbed {
            entry: ode,
            eps: 0.01,
        };
        // A perturbed D2 exponent is no longer an integer.
        let pgrid: Vec<[f64; 3]> = match ode {
            OdeEntry::D2 { .. } => grid.iter().copied().filter(|p| p[2] > 0.0).collect(),
            _ => grid.clone(),
        };
        let mut acc = Acc::new();
        for field in &basis {
            for p in &pgrid {
                acc.add(p, point_symmetry_residual(field, &perturbed, *p));
            }
        }
        out.push(with_note(
            with_grid(
                acc.report(
                    s,
                    "perturbed_breaks_symmetry",
                    format!("{} / {}", case.name(), ode.name()),
                    TOLERANCES.separation,
                    Mode::Exceeds,
                ),
                gd.clone(),
            ),
            format!("{} scaled by 1.01", perturbed.what()),
        ));

        let scaled = scale_constant(ode, 1.01);
        let mut acc = Acc::new();
        for field in &basis {
            for p in &grid {
                acc.add(p, point_symmetry_residual(field, &scaled, *p));
            }
        }
        out.push(with_note(
            with_grid(
                acc.report(
                    s,
                    "free_constant_keeps_symmetry",
                    format!("{} / {}", case.name(), scaled.name()),
                    opts.tol(TOLERANCES.symmetry),
                    Mode::AtMost,
                ),
                gd,
            ),
            "C scaled by 1.01",
        ));
    }

    let mut cases = LieAlgebraCase::suite();
    for &l in &opts.lambdas {
        for c in [
            LieAlgebraCase::D2 { lambda: l },
            LieAlgebraCase::C1 { lambda: l },
        ] {
            if !cases.contains(&c) && l != 1.0 {
                cases.push(c);
            }
        }
    }
    for case in cases {
        if !opts.wants(&case.family()) {
            continue;
        }
        out.extend(structure_reports(case, opts));
    }
    out
}

fn scale_constant(e: OdeEntry, s: f64) -> OdeEntry {
    match e {
        OdeEntry::D1 { c } => OdeEntry::D1 { c: c * s },
        OdeEntry::D2 { c, k } => OdeEntry::D2 { c: c * s, k },
        OdeEntry::J1 { c } => OdeEntry::J1 { c: c * s },
        OdeEntry::J2 { c } => OdeEntry::J2 { c: c * s },
        OdeEntry::C1 { c, lambda } => OdeEntry::C1 { c: c * s, lambda },
        OdeEntry::C2 { c, sign } => OdeEntry::C2 { c: c * s, sign },
        OdeEntry::J3 { c } => OdeEntry::J3 { c: c * s },
        OdeEntry::Zero => OdeEntry::Zero,
    }
}

fn structure_reports(case: LieAlgebraCase, opts: &Options) -> Vec<VerificationReport> {
    let s = Suite::Symmetry;
    let entry = case.name();
    let basis = case.basis();
    let mut out = Vec::new();
    match structure_constants(&basis) {
        Ok(fit) => {
            let expected = case.expected_table();
            let mut acc = Acc::new();
            acc.add(
                &[],
                Ok(fit
                    .constants
                    .max_abs_diff(&expected)
                    .max(fit.residual)
                    .max(fit.spread)),
            );
            out.push(with_note(
                with_grid(
                    acc.report(
                        s,
                        "structure_constants",
                        entry.clone(),
                        opts.tol(TOLERANCES.structure),
                        Mode::AtMost,
                    ),
                    "5 generic (x, y, z) samples".into(),
                ),
                format!("computed {:?}", fit.constants.0),
            ));
            if let LieAlgebraCase::C2(sign) = case {
                let printed = LieAlgebraCase::C2(-sign).printed_table();
                let mut acc = Acc::new();
                acc.add(&[], Ok(fit.constants.negate_first().max_abs_diff(&printed)));
                out.push(with_note(
                    acc.report(
                        s,
                        "printed_table_up_to_basis",
                        entry.clone(),
                        opts.tol(TOLERANCES.structure),
                        Mode::AtMost,
                    ),
                    format!(
                        "basis (-X0, X1, X2) gives the printed table of {}",
                        LieAlgebraCase::C2(-sign).name()
                    ),
                ));
            }
            let mut acc = Acc::new();
            acc.add(&[], Ok(jacobi_residual(&fit.constants)));
            out.push(acc.report(
                s,
                "jacobi",
                entry.clone(),
                opts.tol(TOLERANCES.structure),
                Mode::AtMost,
            ));
        }
        Err(e) => out.push(failed(
            s,
            "structure_constants",
            entry.clone(),
            opts.tol(TOLERANCES.structure),
            &e,
        )),
    }
    let at0 = |f: &PolyField| f.components([0.0, 0.0]);
    let mut acc = Acc::new();
    let x0 = at0(&basis[0]);
    acc.add(&[0.0, 0.0], Ok(x0[0].abs().max(x0[1].abs())));
    out.push(acc.report(
        s,
        "isotropy X0(0) = 0",
        entry.clone(),
        opts.tol(TOLERANCES.structure),
        Mode::AtMost,
    ));
    let (x1, x2) = (at0(&basis[1]), at0(&basis[2]));
    let mut acc = Acc::new();
    acc.add(&[0.0, 0.0], Ok((x1[0] * x2[1] - x1[1] * x2[0]).abs()));
    out.push(with_note(
        acc.report(
            s,
            "transitivity det(X1, X2)(0) != 0",
            entry,
            TOLERANCES.separation,
            Mode::Exceeds,
        ),
        "residual is |det(X1(0), X2(0))|",
    ));
    out
}

// ---------------------------------------------------------------- flatness

pub(crate) fn flatness_suite(opts: &Options) -> Vec<VerificationReport> {
    let s = Suite::Flatness;
    let mut out = Vec::new();
    let n = opts.grid(5);
    let mut flat: Vec<OdeEntry> = vec![OdeEntry::Zero];
    flat.extend([0.0, 1.0, 2.0, 3.0].map(|k| OdeEntry::D2 { c: 1.0, k }));
    flat.push(OdeEntry::J3 { c: 1.0 });
    let mut entries: Vec<OdeEntry> = flat;
    for e in OdeEntry::suite() {
        if !entries.contains(&e) {
            entries.push(e);
        }
    }
    for e in entries {
        if !opts.wants(&e.family()) {
            continue;
        }
        let region = e.region();
        let v = is_projectively_flat(&e, &region, n);
        let gd = format!("{n}x{n} over {:?} x {:?}", region.x, region.y);
        let mut r = VerificationReport {
            record: "check",
            suite: s,
            check: String::new(),
            entry: e.name(),
            grid: format!("{gd}; {} samples", v.samples),
            max_residual: v.max_residual,
            tolerance: opts.tol(FLATNESS_TOL),
            mode: Mode::AtMost,
            pass: false,
            witness: v.witness.map(|w| w.to_vec()),
            note: v.reason.clone(),
        };
        if e.expected_flat() {
            r.check = "flat".into();
            r.pass = v.flat && v.max_residual <= r.tolerance;
        } else {
            r.check = "not_flat_with_witness".into();
            r.mode = Mode::Exceeds;
            r.tolerance = FLATNESS_TOL;
            // Deviation at the witness: the flatness residual, or the
            // cubic-fit residual when f is not cubic there.
            r.max_residual = match (&v.witness, v.reason.as_deref()) {
                (Some(w), _) => witness_deviation(&e, *w),
                _ => v.max_residual,
            };
            r.pass = !v.flat && v.witness.is_some();
        }
        out.push(r);
    }

    if opts.wants("c+") || opts.case.is_none() {
        let pair = induced_odes(CatalogSpray::C(Sign::Plus));
        let mut acc = Acc::new();
        let r = extract_cubic(&pair.plus, [0.0, 0.0])
            .and_then(|cf| flatness_residuals(&cf, [0.0, 0.0]));
        acc.add(
            &[0.0, 0.0],
            r.map(|[r1, r2]| r1.abs().max((r2 + 1.5).abs())),
        );
        out.push(with_note(
            acc.report(
                s,
                "coefficient residuals (0, -3/2) at origin",
                "c+".into(),
                opts.tol(1e-10),
                Mode::AtMost,
            ),
            "residual is the distance of (r1, r2) from (0, -3/2)",
        ));
    }
    out
}

fn witness_deviation(e: &OdeEntry, w: [f64; 2]) -> f64 {
    match extract_cubic(e, w) {
        Ok(cf) => flatness_residuals(&cf, w).map_or(f64::INFINITY, |[a, b]| a.abs().max(b.abs())),
        Err(Error::NotCubic { residual, .. }) => residual,
        Err(_) => f64::INFINITY,
    }
}

// ---------------------------------------------------------------- metrizability

pub(crate) fn metrizability_suite(opts: &Options) -> Vec<VerificationReport> {
    let s = Suite::Metrizability;
    let mut out = Vec::new();
    let n = opts.grid(5);
    for sign in [Sign::Plus, Sign::Minus] {
        let id = MetricId::C(sign);
        let entry = id.to_string();
        let g = crate::catalog::ExpMetric(sign);
        let metric = crate::finsler::Riemannian(g);
        let pair = induced_ode_direct(metric);
        let a = liouville_candidate(g);
        let grid = metric_grid(&g.domain(), n);
        let mut acc = Acc::new();
        for &p in &grid {
            let r = extract_cubic(&pair.plus, p).and_then(|k| liouville_residuals(&a, &k, p));
            acc.add(&p, r.map(|r| r.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
        }
        out.push(with_grid(
            acc.report(
                s,
                "liouville_residuals",
                entry.clone(),
                opts.tol(TOLERANCES.liouville),
                Mode::AtMost,
            ),
            format!("{n}x{n} base"),
        ));
        out.push(round_trip_report(g, &entry, n, opts));
    }
    out.push(round_trip_report(
        constant_curvature_metric(Model::Euclidean),
        "euclidean",
        n,
        opts,
    ));
    for model in [Model::Sphere, Model::Hyperbolic] {
        out.push(round_trip_report(
            constant_curvature_metric(model),
            &format!("{model:?}").to_lowercase(),
            n,
            opts,
        ));
    }

    match MetricId::A.metric() {
        Ok(m) => {
            let pair = induced_ode_direct(m);
            let grid = metric_grid(&m.domain(), n);
            // Every sample must be non-cubic, so the reported value is the
            // smallest check-node deviation.
            let mut least = f64::INFINITY;
            let mut witness = None;
            let mut note = None;
            for &p in &grid {
                let dev = match extract_cubic(&pair.plus, p) {
                    Ok(_) => 0.0,
                    Err(Error::NotCubic { residual, .. }) => residual,
                    Err(e) => {
                        note.get_or_insert(e.to_string());
                        0.0
                    }
                };
                if dev < least {
                    least = dev;
                    witness = Some(p.to_vec());
                }
            }
            out.push(VerificationReport {
                record: "check",
                suite: s,
                check: "not_cubic".into(),
                entry: "a".into(),
                grid: format!("{n}x{n} base; {} samples", grid.len()),
                max_residual: least,
                tolerance: CUBIC_TOL,
                mode: Mode::Exceeds,
                pass: least > CUBIC_TOL,
                witness,
                note: Some(note.unwrap_or_else(|| {
                    "residual is the smallest check-node deviation from a cubic in z".into()
                })),
            });
        }
        Err(e) => out.push(failed(s, "not_cubic", "a".into(), CUBIC_TOL, &e)),
    }
    out
}

fn round_trip_report<G: RiemannianField + Copy>(
    g: G,
    entry: &str,
    n: usize,
    opts: &Options,
) -> VerificationReport {
    let s = Suite::Metrizability;
    let grid = metric_grid(&g.domain(), n);
    let mut acc = Acc::new();
    match reconstruct_metric(liouville_candidate(g)) {
        Ok(back) => {
            for &p in &grid {
                let r = g.tensor_at(p).and_then(|a| {
                    back.tensor_at(p).map(|b| {
                        let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                        (0..4)
                            .map(|i| (a[i / 2][i % 2] - b[i / 2][i % 2]).abs())
                            .fold(0.0, f64::max)
                            / scale
                    })
                });
                acc.add(&p, r);
            }
        }
        Err(e) => acc.add(&[], Err(e)),
    }
    with_grid(
        acc.report(
            s,
            "reconstruct_after_candidate",
            entry.into(),
            opts.tol(TOLERANCES.round_trip),
            Mode::AtMost,
        ),
        format!("{n}x{n} base, relative"),
    )
}

// ---------------------------------------------------------------- randers

pub(crate) fn randers_suite(opts: &Options) -> Vec<VerificationReport> {
    let s = Suite::Randers;
    let mut out = Vec::new();
    let n = opts.grid(5);
    let models = [Model::Euclidean, Model::Sphere, Model::Hyperbolic];
    for model in models {
        let alpha = constant_curvature_metric(model);
        let grid = model.domain().verification_grid(n, 0.5);
        for &k in &opts.ks {
            let entry = format!("{model:?}(k={k})").to_lowercase();
            let (beta, form) = match (beta_for(model, k), area_form(alpha, k)) {
                (Ok(b), Ok(f)) => (b, f),
                (Err(e), _) | (_, Err(e)) => {
                    out.push(failed(s, "construction", entry, 0.0, &e));
                    continue;
                }
            };
            let shifted = GaugeShifted { beta, c: 0.7 };
            let mut acc = Acc::new();
            for &p in &grid {
                let w = form.omega12(p);
                acc.add(&p, exterior_derivative(&beta, p).map(|d| (d - w).abs()));
                acc.add(&p, exterior_derivative(&shifted, p).map(|d| (d - w).abs()));
            }
            out.push(with_grid(
                acc.report(
                    s,
                    "d(beta) = Omega",
                    entry.clone(),
                    opts.tol(TOLERANCES.exterior),
                    Mode::AtMost,
                ),
                format!("{n}x{n} base, beta and beta + d(0.7xy)"),
            ));

            let op = LorentzOperator { form };
            let mut acc = Acc::new();
            for &p in &grid {
                acc.add(&p, Ok(op.square_defect(p)));
            }
            out.push(with_grid(
                acc.report(
                    s,
                    "J^2 = -k^2 Id",
                    entry.clone(),
                    opts.tol(TOLERANCES.lorentz),
                    Mode::AtMost,
                ),
                format!("{n}x{n} base"),
            ));

            let flow = MagneticFlow { form };
            let mut acc = Acc::new();
            match integrate_spray(&flow, [0.0, 0.0, 1.0, 0.0], 10.0, 1e-3) {
                Ok(tr) => {
                    let s0 = alpha_norm(&alpha, [0.0, 0.0], [1.0, 0.0]);
                    for row in &tr.samples {
                        let sp = alpha_norm(&alpha, [row[1], row[2]], [row[3], row[4]]);
                        acc.add(row, Ok((sp - s0).abs()));
                    }
                    let mut r = with_grid(
                        acc.report(
                            s,
                            "alpha_speed_drift",
                            entry.clone(),
                            opts.tol(TOLERANCES.speed_drift),
                            Mode::AtMost,
                        ),
                        "rk4 step 1e-3 on [0, 10]".into(),
                    );
                    if let Some(h) = tr.halt {
                        r = with_note(r, format!("trace stopped early: {h:?}"));
                    }
                    out.push(r);
                }
                Err(e) => out.push(failed(s, "alpha_speed_drift", entry.clone(), 0.0, &e)),
            }
        }
    }

    // Normal-form sprays against their magnetic description.
    let mut magnetic_cases: Vec<(CatalogSpray, Model, f64)> =
        vec![(CatalogSpray::A, Model::Euclidean, 1.0)];
    for sign in [Sign::Plus, Sign::Minus] {
        for &k in &opts.ks {
            magnetic_cases.push((CatalogSpray::B { k, sign }, Model::from_sign(sign), k));
        }
    }
    for (spray, model, k) in magnetic_cases {
        let entry = spray.name();
        let alpha = constant_curvature_metric(model);
        let form = match area_form(alpha, k) {
            Ok(f) => f,
            Err(e) => {
                out.push(failed(s, "magnetic_residual", entry, 0.0, &e));
                continue;
            }
        };
        let trace = integrate_spray(&spray, [0.0, 0.0, 1.0, 0.0], 2.0, 1e-3)
            .and_then(|t| unit_speed_resample(&t, &alpha));
        let mut mag = Acc::new();
        let mut curv = Acc::new();
        match trace {
            Ok(t) => {
                for row in t.samples.iter().step_by(20) {
                    let state = [row[1], row[2], row[3], row[4]];
                    match unit_speed_sample(&spray, &alpha, state) {
                        Ok(c) => {
                            mag.add(row, magnetic_residual(&alpha, &form, &c));
                            curv.add(
                                row,
                                geodesic_curvature(&alpha, &c).map(|kappa| (kappa - k).abs()),
                            );
                        }
                        Err(e) => {
                            mag.add(row, Err(e.clone()));
                            curv.add(row, Err(e));
                        }
                    }
                }
            }
            Err(e) => {
                mag.add(&[], Err(e.clone()));
                curv.add(&[], Err(e));
            }
        }
        let gd =
            "trace from (0,0,1,0), t in [0, 2], step 1e-3, arc-length resampled, every 20th sample"
                .to_string();
        out.push(with_grid(
            mag.report(
                s,
                "magnetic_residual",
                entry.clone(),
                opts.tol(TOLERANCES.magnetic),
                Mode::AtMost,
            ),
            gd.clone(),
        ));
        out.push(with_grid(
            curv.report(
                s,
                "geodesic_curvature = k",
                entry,
                opts.tol(TOLERANCES.curvature),
                Mode::AtMost,
            ),
            gd,
        ));
    }

    // Projective (Killing) fields of each metric against its geodesic spray.
    let dirs = fiber_directions(8, 0.1);
    for id in MetricId::all(&opts.ks) {
        let entry = id.to_string();
        let metric = match id.metric() {
            Ok(m) => m,
            Err(e) => {
                out.push(failed(s, "projective_fields", entry, 0.0, &e));
                continue;
            }
        };
        let geo = geodesic_spray(metric);
        let grid = metric_grid(&metric.domain(), n.min(3));
        for (i, field) in id.projective_fields().iter().enumerate() {
            let mut acc = Acc::new();
            for &[x, y] in &grid {
                for &[u, v] in &dirs {
                    let p = [x, y, u, v];
                    acc.add(&p, projective_field_residual(field, &geo, p));
                }
            }
            out.push(with_note(
                with_grid(
                    acc.report(
                        s,
                        &format!("projective_field X{i}"),
                        entry.clone(),
                        opts.tol(TOLERANCES.killing),
                        Mode::AtMost,
                    ),
                    format!("{0}x{0} base x 8 directions", n.min(3)),
                ),
                format!("X{i} = {field}"),
            ));
        }
    }
    if let Some(&k) = opts.ks.first() {
        let spray = CatalogSpray::B {
            k,
            sign: Sign::Plus,
        };
        let mut acc = Acc::new();
        for [u, v] in fiber_directions(8, 0.1) {
            let p = [0.1, 0.2, u, v];
            acc.add(&p, projective_field_residual(&PolyField::dx(), &spray, p));
        }
        out.push(with_note(
            acc.report(
                s,
                "translation_not_projective",
                spray.name(),
                1e-3,
                Mode::Exceeds,
            ),
            "∂x against the spray at (0.1, 0.2)",
        ));
    }

    out.extend(trace_geometry_reports(opts));
    out
}

fn trace_geometry_reports(opts: &Options) -> Vec<VerificationReport> {
    let s = Suite::Randers;
    let mut out = Vec::new();
    match integrate_spray(
        &CatalogSpray::A,
        [0.0, 0.0, 1.0, 0.0],
        std::f64::consts::TAU,
        1e-3,
    ) {
        Ok(t) => {
            let gd = "trace from (0,0,1,0), t in [0, 2pi], step 1e-3".to_string();
            let mut acc = Acc::new();
            match circle_fit(&t) {
                Ok(fit) => {
                    let dev = (fit.center[0])
                        .abs()
                        .max((fit.center[1] - 1.0).abs())
                        .max((fit.radius - 1.0).abs());
                    acc.add(&[fit.center[0], fit.center[1], fit.radius], Ok(dev));
                }
                Err(e) => acc.add(&[], Err(e)),
            }
            out.push(with_grid(
                acc.report(
                    s,
                    "circle center (0,1) radius 1",
                    "a".into(),
                    opts.tol(TOLERANCES.circle),
                    Mode::AtMost,
                ),
                gd.clone(),
            ));

            let last = t.last();
            let mut acc = Acc::new();
            acc.add(&last, Ok(last[1].hypot(last[2])));
            out.push(with_grid(
                acc.report(
                    s,
                    "closes at origin",
                    "a".into(),
                    opts.tol(TOLERANCES.circle),
                    Mode::AtMost,
                ),
                gd.clone(),
            ));

            let mut acc = Acc::new();
            acc.add(&[], Ok(winding(&t)));
            out.push(with_note(
                with_grid(
                    acc.report(s, "counterclockwise", "a".into(), 0.5, Mode::Exceeds),
                    gd,
                ),
                "residual is the winding number of the velocity",
            ));
        }
        Err(e) => out.push(failed(
            s,
            "circle center (0,1) radius 1",
            "a".into(),
            0.0,
            &e,
        )),
    }

    // F is constant along its own geodesics.
    if let Ok(m) = MetricId::A.metric() {
        let geo = geodesic_spray(m);
        let mut acc = Acc::new();
        match integrate_spray(&geo, [0.0, -1.0, 1.0, 0.0], 2.0, 1e-3) {
            Ok(t) => {
                let f0 = m.at([0.0, -1.0, 1.0, 0.0]);
                for row in &t.samples {
                    let f = m.at([row[1], row[2], row[3], row[4]]);
                    acc.add(row, f.and_then(|f| f0.clone().map(|f0| (f - f0).abs())));
                }
            }
            Err(e) => acc.add(&[], Err(e)),
        }
        out.push(with_grid(
            acc.report(
                s,
                "F constant along geodesics",
                "a".into(),
                opts.tol(TOLERANCES.speed_drift),
                Mode::AtMost,
            ),
            "geodesic spray of the metric from (0,-1,1,0), t in [0, 2], step 1e-3".into(),
        ));
    }

    for (entry, r) in [
        ("a", rk4_ratio_a()),
        ("flat + radial term", rk4_ratio_radial()),
    ] {
        let mut acc = Acc::new();
        acc.add(&[], r.clone().map(|ratio| (ratio - 16.0).abs()));
        let note = match &r {
            Ok(ratio) => format!("ratio = {ratio:.4}"),
            Err(_) => String::new(),
        };
        out.push(with_note(
            acc.report(
                s,
                "rk4 convergence ratio in [12, 20]",
                entry.into(),
                4.0,
                Mode::AtMost,
            ),
            note,
        ));
    }
    let mut acc = Acc::new();
    acc.add(&[], rk4_flat_error());
    out.push(with_note(
        acc.report(
            s,
            "rk4 exact on flat spray",
            "flat".into(),
            1e-12,
            Mode::AtMost,
        ),
        "straight lines are integrated exactly, so the halving ratio is undefined there",
    ));
    out
}

/// Final-point error of RK4 on spray (a) against `(sin t, 1 − cos t)`,
/// step `0.08` versus `0.04` on `[0, 2]`.
pub fn rk4_ratio_a() -> Result<f64> {
    let err = |h: f64| -> Result<f64> {
        let t = integrate_spray(&CatalogSpray::A, [0.0, 0.0, 1.0, 0.0], 2.0, h)?;
        let l = t.last();
        Ok((l[1] - 2f64.sin()).hypot(l[2] - (1.0 - 2f64.cos())))
    };
    Ok(err(0.08)? / err(0.04)?)
}

/// Step-halving ratio of successive differences on the flat spray with a
/// radial term `ρ = u/2`, whose trajectories are straight lines traversed
/// at a non-affine speed.
pub fn rk4_ratio_radial() -> Result<f64> {
    let spray = RadialShift {
        spray: CatalogSpray::Flat,
        rho: [0.0, 0.0, 0.0, 0.5, 0.0],
    };
    let end = |h: f64| -> Result<[f64; 5]> {
        Ok(integrate_spray(&spray, [0.0, 0.0, 1.0, 0.3], 1.0, h)?.last())
    };
    let (a, b, c) = (end(0.1)?, end(0.05)?, end(0.025)?);
    let d = |p: [f64; 5], q: [f64; 5]| (1..5).map(|i| (p[i] - q[i]).abs()).fold(0.0, f64::max);
    Ok(d(a, b) / d(b, c))
}

/// Final-point error of RK4 on the flat spray.
pub fn rk4_flat_error() -> Result<f64> {
    let t = integrate_spray(&CatalogSpray::Flat, [0.1, -0.2, 0.7, 0.4], 3.0, 0.01)?;
    let l = t.last();
    Ok((l[1] - 2.2).abs().max((l[2] - 1.0).abs()))
}

/// Name of the check plus `PASS`/`FAIL`, for `--summary`.
pub fn summary_table(reports: &[VerificationReport]) -> String {
    let mut s = String::new();
    for r in reports {
        s.push_str(&format!(
            "{:<4} {:<13} {:<38} {:<28} {:>10.3e} {} {:.1e}\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.suite.to_string(),
            r.check,
            r.entry,
            r.max_residual,
            if r.mode == Mode::AtMost { "<=" } else { "> " },
            r.tolerance
        ));
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    s.push_str(&format!("{} checks, {} failed\n", reports.len(), failed));
    s
}
