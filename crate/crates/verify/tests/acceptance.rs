//! Acceptance criteria 1–11, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) and exits non-zero when any
//! criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use oriented_geodesics::frame::coefficients;
use oriented_geodesics::geodesic::{gram_matrix, signature};
use oriented_geodesics::tangent::{hopf_sample, HopfReport, HopfThresholds};
use oriented_geodesics::{
    catalog_surface, compose, decompose, AmbientVector, EpsilonSpace, GeodesicPoint,
    HypersurfaceChart, Method, SampleGrid, StructureField, SurfaceSpec, TangentAtGeodesic,
    TangentHypersurfacePoint, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn chart(eps: i64, n: usize, spec: SurfaceSpec) -> HypersurfaceChart {
    catalog_surface(EpsilonSpace::from_sign(eps, n).unwrap(), &spec).unwrap()
}

fn sphere(eps: i64, n: usize, r: f64) -> HypersurfaceChart {
    chart(
        eps,
        n,
        SurfaceSpec::GeodesicSphere {
            center: None,
            radius: r,
        },
    )
}

fn ellipsoid() -> HypersurfaceChart {
    chart(
        1,
        2,
        SurfaceSpec::NormalizedEllipsoid {
            semi_axes: [1.0, 1.0, 1.0, 1.2],
        },
    )
}

fn label(c: &HypersurfaceChart) -> String {
    let s = c.space();
    let model = if s.eps() > 0.0 { "S" } else { "H" };
    format!("{}{}", model, s.n() + 1)
}

/// Evaluates `f` at every sample of the default grid, in grid order.
fn over_grid<T: Send>(
    c: &HypersurfaceChart,
    f: impl Fn(&TangentHypersurfacePoint) -> T + Sync,
) -> Vec<T> {
    let pts = SampleGrid::default_for(c.space().n()).points(c).unwrap();
    pts.par_iter()
        .map(|(u, th)| f(&TangentHypersurfacePoint::new(c, u, th).unwrap()))
        .collect()
}

fn max(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_lemma() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst, mut sum_err) = (0.0_f64, 0.0_f64);
    for n in 2..=6 {
        for eps in [1, -1] {
            let s = EpsilonSpace::from_sign(eps, n).unwrap();
            let mut raw = vec![AmbientVector::from_fn(s.dim(), |_, _| {
                rng.random_range(-0.5..0.5)
            })];
            raw[0][0] = 2.0;
            for _ in 0..n {
                raw.push(AmbientVector::from_fn(s.dim(), |_, _| {
                    rng.random_range(-1.0..1.0)
                }));
            }
            let mut signs = vec![1_i8];
            signs.extend(std::iter::repeat_n(eps as i8, n));
            let frame = s.gram_schmidt(&raw, &signs).unwrap()[1..].to_vec();
            for _ in 0..1000 {
                let c: Vec<f64> = loop {
                    let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let r = c.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if r > 0.1 && r <= 1.0 {
                        break c.iter().map(|x| x / r).collect();
                    }
                };
                let mut v = &frame[0] * c[0];
                for (e, ck) in frame.iter().zip(&c).skip(1) {
                    v.axpy(*ck, e, 1.0);
                }
                let a = decompose(&s, &frame, &v).unwrap();
                let back = compose(&s, &frame, &a).unwrap();
                worst = worst.max((&back - &v).amax());
                let q: f64 = coefficients(&a).iter().map(|x| x * x).sum();
                sum_err = sum_err.max((q - 1.0).abs());
            }
        }
    }
    verdict(
        worst <= 1e-12 && sum_err <= 1e-13,
        format!("round trip {worst:.2e}, coefficient sum {sum_err:.2e} (n = 2..6, both signs)"),
    )
}

fn generic_point(eps: i64, n: usize, rng: &mut ChaCha8Rng) -> Arc<GeodesicPoint> {
    let s = EpsilonSpace::from_sign(eps, n).unwrap();
    let mut x0 = AmbientVector::from_fn(s.dim(), |_, _| rng.random_range(-0.5..0.5));
    x0[0] = 2.0;
    let v0 = AmbientVector::from_fn(s.dim(), |_, _| rng.random_range(-1.0..1.0));
    let out = s.gram_schmidt(&[x0, v0], &[1, eps as i8]).unwrap();
    Arc::new(GeodesicPoint::new(s, out[0].clone(), out[1].clone()).unwrap())
}

fn tangent_gap(a: &TangentAtGeodesic, b: &TangentAtGeodesic) -> f64 {
    (a - b).euclidean_norm()
}

fn c2_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0_f64;
    let mut sig_ok = true;
    for n in 2..=4 {
        for eps in [1, -1] {
            let e = eps as f64;
            let p = generic_point(eps, n, &mut rng);
            let frame = p.tangent_frame();
            let g = gram_matrix(&frame, |a, b| a.metric_g(b).unwrap());
            let want = if eps == 1 { (2 * n, 0, 0) } else { (n, n, 0) };
            sig_ok &= signature(&g, 1e-10) == want;
            if n == 2 {
                let gb = gram_matrix(&frame, |a, b| a.metric_gbar(b).unwrap());
                sig_ok &= signature(&gb, 1e-10) == (2, 2, 0);
            }
            for _ in 0..50 {
                let mut t = || {
                    let d = p.space().dim();
                    let x = AmbientVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
                    let y = AmbientVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
                    p.tangent_rejecting(&x, &y)
                };
                let (a, b) = (t(), t());
                let gab = a.metric_g(&b).unwrap();
                worst = worst.max(tangent_gap(&a.j().j(), &(&a * -e)));
                worst = worst.max((a.j().metric_g(&b.j()).unwrap() - e * gab).abs());
                if n == 2 {
                    let ja = a.j_prime().unwrap();
                    worst = worst.max(tangent_gap(&ja.j_prime().unwrap(), &(&a * -1.0)));
                    worst = worst.max(tangent_gap(&a.j().j_prime().unwrap(), &ja.j()));
                    worst = worst.max((ja.metric_g(&b.j_prime().unwrap()).unwrap() - gab).abs());
                }
            }
        }
    }
    verdict(
        worst <= 1e-10 && sig_ok,
        format!(
            "identities {worst:.2e}, signatures {}",
            if sig_ok { "ok" } else { "wrong" }
        ),
    )
}

fn c3_oracle() -> Outcome {
    let surfaces = [
        sphere(1, 2, FRAC_PI_4),
        sphere(-1, 2, 1.0),
        sphere(1, 3, FRAC_PI_4),
        ellipsoid(),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for c in &surfaces {
        let gap = max(over_grid(c, |p| {
            let an = p.shape_operator_analytic().unwrap();
            let fd = p.shape_operator_fd(1e-4, false).unwrap();
            (&fd.a_matrix - &an.a_matrix).amax()
        }));
        let n = c.space().n();
        let d = c.domain();
        let mut orders = Vec::new();
        for t in [0.3, 0.55, 0.8] {
            let u: Vec<f64> = (0..n).map(|i| d[i].0 + t * (d[i].1 - d[i].0)).collect();
            let mut th = vec![0.7 + t];
            th.extend(std::iter::repeat_n(0.2, n - 2));
            let th = oriented_geodesics::HypersphericalAngles::from_slice(&th).unwrap();
            let p = TangentHypersurfacePoint::new(c, &u, &th).unwrap();
            let an = p.shape_operator_analytic().unwrap();
            let err =
                |h: f64| (&p.shape_operator_fd(h, false).unwrap().a_matrix - &an.a_matrix).amax();
            orders.push((err(1e-3) / err(5e-4)).log2());
        }
        let in_range = orders.iter().all(|o| (1.7..=2.3).contains(o));
        ok &= gap <= 1e-6 && in_range;
        let ords: Vec<String> = orders.iter().map(|o| format!("{o:.2}")).collect();
        parts.push(format!("{} {gap:.1e} order [{}]", label(c), ords.join(" ")));
    }
    verdict(ok, parts.join("; "))
}

fn c4_umbilic_hopf() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for c in [
        sphere(1, 2, FRAC_PI_4),
        sphere(1, 3, FRAC_PI_4),
        sphere(-1, 2, 1.0),
        sphere(-1, 3, 1.0),
    ] {
        let eps = c.space().eps();
        let rows = over_grid(&c, |p| {
            let xi = p.xi();
            let an = p
                .shape_operator_analytic()
                .unwrap()
                .hopf_check(&xi)
                .unwrap();
            let fd = p
                .shape_operator_fd(1e-4, false)
                .unwrap()
                .hopf_check(&xi)
                .unwrap();
            let ml = an.mu * p.curvatures()[0];
            (
                an.residual,
                fd.residual,
                (ml.abs() - 1.0).abs(),
                ml.signum() == eps,
            )
        });
        let ra = max(rows.iter().map(|r| r.0));
        let rf = max(rows.iter().map(|r| r.1));
        let dev = max(rows.iter().map(|r| r.2));
        let sign = rows.iter().all(|r| r.3);
        ok &= ra <= 1e-8 && rf <= 1e-6 && dev <= 1e-6 && sign;
        parts.push(format!(
            "{} res {ra:.1e}/{rf:.1e} ||mu lambda|-1| {dev:.1e}{}",
            label(&c),
            if sign { "" } else { " SIGN" }
        ));
    }
    verdict(ok, parts.join("; "))
}

fn c5_ellipsoid_not_hopf() -> Outcome {
    let c = ellipsoid();
    let rows = over_grid(&c, |p| {
        let xi = p.xi();
        let an = p
            .shape_operator_analytic()
            .unwrap()
            .hopf_check(&xi)
            .unwrap();
        let fd = p
            .shape_operator_fd(1e-4, false)
            .unwrap()
            .hopf_check(&xi)
            .unwrap();
        (an.residual >= 0.01, fd.residual >= 0.01)
    });
    let frac = |k: usize| {
        rows.iter()
            .filter(|r| if k == 0 { r.0 } else { r.1 })
            .count() as f64
            / rows.len() as f64
    };
    let (fa, ff) = (frac(0), frac(1));
    verdict(
        fa >= 0.5 && ff >= 0.5,
        format!(
            "samples with residual >= 0.01: {:.1}% analytic, {:.1}% fd",
            100.0 * fa,
            100.0 * ff
        ),
    )
}

fn c6_great_sphere() -> Outcome {
    let c = sphere(1, 2, FRAC_PI_2);
    let pts = SampleGrid::default_for(2).points(&c).unwrap();
    let mut verdicts = Vec::new();
    for method in [Method::Analytic, Method::Fd] {
        let samples: Vec<_> = pts
            .par_iter()
            .map(|(u, th)| hopf_sample(&c, u, th, StructureField::Xi, method, 1e-4))
            .collect();
        let r = HopfReport::aggregate(
            StructureField::Xi,
            samples,
            HopfThresholds::for_method(method),
        );
        verdicts.push((r.verdict, r.degenerate_count));
    }
    verdict(
        verdicts.iter().all(|v| v.0 == Verdict::Degenerate),
        format!(
            "analytic {:?} ({} degenerate), fd {:?} ({} degenerate)",
            verdicts[0].0, verdicts[0].1, verdicts[1].0, verdicts[1].1
        ),
    )
}

fn c7_xi_prime() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, c) in [
        ("ellipsoid", ellipsoid()),
        ("S3 sphere", sphere(1, 2, FRAC_PI_4)),
        ("H3 sphere", sphere(-1, 2, 1.0)),
    ] {
        let rows = over_grid(&c, |p| {
            let f = p.xi_prime().unwrap();
            let e = p.shape_operator_analytic().unwrap().hopf_check(&f).unwrap();
            let (_, lm) = p.lambda_pm().unwrap();
            (e.residual, (e.mu - lm).abs())
        });
        let res = max(rows.iter().map(|r| r.0));
        let dev = max(rows.iter().map(|r| r.1));
        let pass = res <= 1e-8 && dev <= 1e-6;
        ok &= pass;
        parts.push(format!(
            "{name} res {res:.1e} |mu-lambda-| {dev:.1e}{}",
            if pass { "" } else { " (fails)" }
        ));
    }
    verdict(ok, parts.join("; "))
}

fn convex_n2() -> Vec<(&'static str, HypersurfaceChart)> {
    vec![
        ("ellipsoid", ellipsoid()),
        ("S3 sphere", sphere(1, 2, FRAC_PI_4)),
        ("H3 sphere", sphere(-1, 2, 1.0)),
    ]
}

fn c8_h_matrix() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, c) in convex_n2() {
        let rows = over_grid(&c, |p| {
            let hm = p.h_matrix(&p.shape_operator_analytic().unwrap()).unwrap();
            (
                hm.entry_residual,
                hm.eigen_residual
                    .max(hm.trace_residual)
                    .max(hm.product_residual),
                hm.lambda_plus * hm.lambda_minus < 0.0,
            )
        });
        let entry = max(rows.iter().map(|r| r.0));
        let ident = max(rows.iter().map(|r| r.1));
        let sign = rows.iter().all(|r| r.2);
        ok &= entry <= 1e-8 && ident <= 1e-10 && sign;
        parts.push(format!("{name} entries {entry:.1e} identities {ident:.1e}"));
    }
    verdict(ok, parts.join("; "))
}

fn c9_nullity() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, c) in convex_n2() {
        let worst = max(over_grid(&c, |p| {
            let nb = p.normal();
            nb.metric_gbar(&nb).unwrap().abs()
        }));
        ok &= worst <= 1e-12;
        parts.push(format!("{name} {worst:.1e}"));
    }
    verdict(ok, format!("|Gbar(N,N)|: {}", parts.join("; ")))
}

fn c10_alpha_plane() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, c) in convex_n2() {
        let rows = over_grid(&c, |p| {
            p.alpha_plane_check(&p.shape_operator_analytic().unwrap())
                .unwrap()
        });
        let j = max(rows.iter().map(|r| r.j_invariance_residual));
        let x = max(rows.iter().map(|r| r.xi_prime_residual));
        let jp = max(rows.iter().map(|r| r.j_prime_invariance_residual));
        let rel = max(rows.iter().map(|r| r.relation_residual));
        let sign = rows[0].relation_sign;
        ok &= j <= 1e-8 && x <= 1e-8;
        parts.push(format!(
            "{name} J-inv {j:.1e} xi' {x:.1e} (J'-inv {jp:.1e}, Je0 = {sign:+} J'N {rel:.1e})"
        ));
    }
    verdict(ok, parts.join("; "))
}

fn c11_cli() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    let mut ok = true;
    let mut parts = Vec::new();
    for f in &files {
        let stem = f.file_stem().unwrap().to_string_lossy().into_owned();
        let mut outputs = Vec::new();
        let mut codes = Vec::new();
        for k in 0..2 {
            let out = tmp.path().join(format!("run{k}"));
            let status = Command::new(env!("CARGO_BIN_EXE_verify"))
                .arg("--scenario")
                .arg(f)
                .arg("--out")
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?;
            codes.push(status.status.code().unwrap_or(-1));
            outputs.push(std::fs::read(out.join(format!("{stem}.json"))).unwrap_or_default());
        }
        let same = !outputs[0].is_empty() && outputs[0] == outputs[1];
        ok &= same && codes == [0, 0];
        parts.push(format!(
            "{stem} {} exit {}",
            if same { "identical" } else { "DIFFERS" },
            codes[0]
        ));
    }
    verdict(ok && !files.is_empty(), parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("compose/decompose round trip", c1_lemma),
        ("structure algebra", c2_structure),
        ("shape operator oracle agreement", c3_oracle),
        ("geodesic spheres are Hopf for xi", c4_umbilic_hopf),
        ("ellipsoid is not Hopf for xi", c5_ellipsoid_not_hopf),
        ("great sphere is degenerate", c6_great_sphere),
        ("xi' is Hopf with curvature lambda-", c7_xi_prime),
        ("h-matrix entries and spectrum", c8_h_matrix),
        ("normal is Gbar-null", c9_nullity),
        ("alpha-plane invariance", c10_alpha_plane),
        ("CLI determinism", c11_cli),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {:>2} {tag} {title} [{:.1}s]: {detail}",
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
