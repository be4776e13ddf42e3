//! Cross-checks between independently transcribed catalog pieces.

use projspray::catalog::{CatalogSpray, MetricId};
use projspray::classify::OdeEntry;
use projspray::finsler::{geodesic_spray, induced_ode_direct, induced_odes, projective_residual};
use projspray::symmetry::{point_symmetry_residual, LieAlgebraCase};
use projspray::{Domain, Field, Sign};

const KS: [f64; 3] = [0.5, 1.0, 2.0];

fn grid() -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for [x, y] in Domain::square(0.4).grid(4) {
        for z in [-2.0, -0.5, 0.0, 0.7, 3.0] {
            out.push([x, y, z]);
        }
    }
    out
}

#[test]
fn b_spray_induces_the_c2_family() {
    for sign in [Sign::Plus, Sign::Minus] {
        for k in KS {
            let pair = induced_odes(CatalogSpray::B { k, sign });
            let ode = OdeEntry::C2 { c: k, sign };
            for p in grid() {
                let got = pair.plus.at(p).unwrap();
                let want = ode.at(p).unwrap();
                assert!(
                    (got - want).abs() < 1e-12,
                    "{sign:?} k={k} at {p:?}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn c2_fields_are_symmetries_of_the_b_spray_odes() {
    for sign in [Sign::Plus, Sign::Minus] {
        let pair = induced_odes(CatalogSpray::B { k: 1.0, sign });
        for field in LieAlgebraCase::C2(sign).basis() {
            for p in grid() {
                let r = point_symmetry_residual(&field, &pair.plus, p).unwrap();
                assert!(r < 1e-9, "{sign:?} {field} at {p:?}: {r}");
            }
        }
    }
}

#[test]
fn c_sprays_induce_j2_like_cubics() {
    // f = ½z ± ½e^(−2x)z³.
    for sign in [Sign::Plus, Sign::Minus] {
        let pair = induced_odes(CatalogSpray::C(sign));
        for p @ [x, _, z] in grid() {
            let want = 0.5 * z + sign.f() * 0.5 * (-2.0 * x).exp() * z.powi(3);
            assert!((pair.plus.at(p).unwrap() - want).abs() < 1e-12);
        }
    }
}

#[test]
fn only_the_constructed_orientation_matches() {
    for sign in [Sign::Plus, Sign::Minus] {
        for k in KS {
            let id = MetricId::B { k, sign };
            let spray = id.spray();
            let built = geodesic_spray(id.metric_oriented(Sign::Plus).unwrap());
            let printed = geodesic_spray(id.metric_oriented(Sign::Minus).unwrap());
            let mut worst_built: f64 = 0.0;
            let mut best_printed = f64::INFINITY;
            for [x, y] in Domain::disk(0.3 / k.max(1.0)).grid(4) {
                for t in 0..8 {
                    let a = t as f64 * std::f64::consts::FRAC_PI_4;
                    let p = [x, y, a.cos(), a.sin()];
                    worst_built = worst_built.max(projective_residual(&built, &spray, p).unwrap());
                    best_printed =
                        best_printed.min(projective_residual(&printed, &spray, p).unwrap());
                }
            }
            assert!(worst_built < 1e-9, "{id}: {worst_built}");
            assert!(best_printed > 1e-3, "{id}: {best_printed}");
        }
    }
}

#[test]
fn direct_and_spray_pipelines_agree_off_grid() {
    for id in MetricId::all(&KS) {
        let m = id.metric().unwrap();
        let direct = induced_ode_direct(m);
        let via = induced_odes(geodesic_spray(m));
        for [x, y] in Domain::disk(0.25).grid(3) {
            for z in [-1.3, 0.2, 2.2] {
                let p = [x, y, z];
                let a = direct.plus.at(p).unwrap();
                let b = via.plus.at(p).unwrap();
                assert!(
                    (a - b).abs() < 1e-9 * (1.0 + a.abs()),
                    "{id} {p:?}: {a} vs {b}"
                );
                let a = direct.minus.at(p).unwrap();
                let b = via.minus.at(p).unwrap();
                assert!(
                    (a - b).abs() < 1e-9 * (1.0 + a.abs()),
                    "{id} {p:?}: {a} vs {b}"
                );
            }
        }
    }
}
