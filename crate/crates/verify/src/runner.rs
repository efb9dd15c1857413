//! Executes a scenario over its sample grid.

use std::collections::{BTreeMap, BTreeSet};

use oriented_geodesics::catalog::{check_convexity, CONVEXITY_TOL};
use oriented_geodesics::tangent::{
    EXPRESSION_TOL_ANALYTIC, EXPRESSION_TOL_FD, GRAM_RCOND_MIN, PROJECTION_TOL,
};
use oriented_geodesics::{
    catalog_surface, compose, decompose, Epsilon, EpsilonSpace, HypersphericalAngles,
    HypersurfaceChart, SampleGrid, ShapeOperatorSample, StructureField, SurfaceSpec,
    TangentHypersurfacePoint,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scenario::{CheckName, Expectation, Scenario, Tolerances};

/// |𝔾̄(N̄, N̄)| bound.
pub const GBAR_TOL: f64 = 1e-12;
/// Plane-membership bound of the α-plane check.
pub const ALPHA_TOL: f64 = 1e-8;
pub const H_ENTRY_TOL: f64 = 1e-8;
/// Eigenvalue, trace and product identities of the h-matrix.
pub const H_IDENTITY_TOL: f64 = 1e-10;
pub const LEMMA_TOL: f64 = 1e-12;
pub const LEMMA_SUM_TOL: f64 = 1e-13;

/// Umbilicity defect below which ξ's target curvature ε/λ is reported.
pub const UMBILIC_TOL: f64 = 1e-8;

pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Hopf,
    NotHopf,
    Pass,
    Fail,
    Degenerate,
}

impl Outcome {
    fn meets(self, e: Expectation) -> bool {
        matches!(
            (self, e),
            (Outcome::Hopf, Expectation::Hopf)
                | (Outcome::NotHopf, Expectation::NotHopf)
                | (Outcome::Pass, Expectation::Pass)
                | (Outcome::Fail, Expectation::Fail)
                | (Outcome::Degenerate, Expectation::Degenerate)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub index: usize,
    pub u: Vec<f64>,
    pub theta: Vec<f64>,
    /// Closed-form route for Hopf checks, the check's own metric otherwise.
    pub residual: Option<f64>,
    pub residual_fd: Option<f64>,
    pub mu: Option<f64>,
    /// Closed-form value μ should take (λ₋ for ξ', ε/λ for ξ at umbilic points).
    pub mu_target: Option<f64>,
    pub verdict: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckReport {
    pub name: CheckName,
    pub expect: Expectation,
    pub status: Status,
    pub outcome: Outcome,
    pub worst_residual: Option<f64>,
    pub worst_residual_fd: Option<f64>,
    pub fraction_above_floor: Option<f64>,
    pub degenerate_count: usize,
    pub mu: Option<MuStats>,
    pub extra: BTreeMap<String, f64>,
    pub samples: Vec<SampleRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedTolerances {
    pub gbar_tol: f64,
    pub alpha_tol: f64,
    pub h_entry_tol: f64,
    pub h_identity_tol: f64,
    pub lemma_tol: f64,
    pub lemma_sum_tol: f64,
    pub convexity_tol: f64,
    pub gram_rcond_min: f64,
    pub projection_tol: f64,
    pub expression_tol_analytic: f64,
    pub expression_tol_fd: f64,
}

impl FixedTolerances {
    fn current() -> Self {
        Self {
            gbar_tol: GBAR_TOL,
            alpha_tol: ALPHA_TOL,
            h_entry_tol: H_ENTRY_TOL,
            h_identity_tol: H_IDENTITY_TOL,
            lemma_tol: LEMMA_TOL,
            lemma_sum_tol: LEMMA_SUM_TOL,
            convexity_tol: CONVEXITY_TOL,
            gram_rcond_min: GRAM_RCOND_MIN,
            projection_tol: PROJECTION_TOL,
            expression_tol_analytic: EXPRESSION_TOL_ANALYTIC,
            expression_tol_fd: EXPRESSION_TOL_FD,
        }
    }
}

/// Conventions and numerical settings behind the numbers in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub version: String,
    pub ambient_product: String,
    pub tangent_form: String,
    pub surface_normal: String,
    pub second_form: String,
    pub catalog_orientation: String,
    pub shape_operator: String,
    pub structure_fields: String,
    pub chart_derivatives: String,
    pub fd_scheme: String,
    pub fd_step: f64,
    pub fd_richardson: bool,
    pub tolerances: Tolerances,
    pub fixed: FixedTolerances,
    pub seed: u64,
}

impl Provenance {
    fn new(s: &Scenario, seed: u64) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").into(),
            ambient_product: "<a,b> = a0 b0 + eps sum ai bi".into(),
            tangent_form: "eps <a,b>".into(),
            surface_normal: "det(phi, d1 phi, ..., dn phi, N) > 0".into(),
            second_form: "h_ij = <d_i d_j phi, N>".into(),
            catalog_orientation:
                "normal points toward the center; sphere lambda = cot r (eps=+1), coth r (eps=-1)"
                    .into(),
            shape_operator: "A = -(tangential part of D Nbar), Nbar = (0, N)".into(),
            structure_fields: "xi = -J Nbar, xi' = -J' Nbar".into(),
            chart_derivatives: "dual numbers".into(),
            fd_scheme: "central differences of the point map".into(),
            fd_step: s.fd_step,
            fd_richardson: false,
            tolerances: s.tolerances,
            fixed: FixedTolerances::current(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Convexity {
    pub required: bool,
    pub convex: bool,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub scenario: Option<String>,
    pub epsilon: Epsilon,
    pub n: usize,
    pub surface: SurfaceSpec,
    pub grid: SampleGrid,
    pub sample_count: usize,
    pub provenance: Provenance,
    pub convexity: Convexity,
    pub checks: Vec<CheckReport>,
    pub overall: Status,
    pub exit_code: i32,
}

impl RunReport {
    /// 0 when every expectation holds, 1 on a violation, 3 when a
    /// degeneracy aborted a check.
    fn exit_code_for(checks: &[CheckReport]) -> i32 {
        if checks.iter().any(|c| c.status == Status::Fail) {
            1
        } else if checks.iter().any(|c| c.status == Status::Degenerate) {
            3
        } else {
            0
        }
    }
}

/// Runs every requested check; `seed` overrides the scenario seed.
pub fn run(scenario: &Scenario, seed: Option<u64>) -> Result<RunReport> {
    scenario.validate()?;
    let space = EpsilonSpace::new(scenario.epsilon, scenario.n)?;
    let chart = catalog_surface(space, &scenario.surface)?;
    let grid = scenario.grid();
    let points = grid.points(&chart)?;
    let seed = seed.or(scenario.seed).unwrap_or(DEFAULT_SEED);

    let mut seen = BTreeSet::new();
    let distinct: Vec<Vec<f64>> = points
        .iter()
        .filter(|(u, _)| seen.insert(u.iter().map(|x| x.to_bits()).collect::<Vec<_>>()))
        .map(|(u, _)| u.clone())
        .collect();
    let convexity = match check_convexity(&chart, &distinct) {
        Ok(()) => Convexity {
            required: scenario.require_convex,
            convex: true,
            detail: None,
        },
        Err(e) => Convexity {
            required: scenario.require_convex,
            convex: false,
            detail: Some(e.to_string()),
        },
    };

    let names: Vec<CheckName> = scenario.checks.iter().map(|c| c.name).collect();
    let per_sample: Vec<Vec<SampleRecord>> = if scenario.require_convex && !convexity.convex {
        Vec::new()
    } else {
        let ctx = Context {
            chart: &chart,
            checks: &names,
            tol: &scenario.tolerances,
            step: scenario.fd_step,
            seed,
        };
        points
            .par_iter()
            .enumerate()
            .map(|(i, (u, th))| ctx.evaluate(i, u, th))
            .collect()
    };

    let checks: Vec<CheckReport> = scenario
        .checks
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            let samples: Vec<SampleRecord> = per_sample.iter().map(|row| row[k].clone()).collect();
            summarize(spec.name, spec.expectation(), samples, &scenario.tolerances)
        })
        .collect();
    let exit_code = RunReport::exit_code_for(&checks);
    let overall = match exit_code {
        0 => Status::Pass,
        3 => Status::Degenerate,
        _ => Status::Fail,
    };
    Ok(RunReport {
        scenario: scenario.name.clone(),
        epsilon: scenario.epsilon,
        n: scenario.n,
        surface: scenario.surface.clone(),
        sample_count: points.len(),
        grid,
        provenance: Provenance::new(scenario, seed),
        convexity,
        checks,
        overall,
        exit_code,
    })
}

struct Context<'a> {
    chart: &'a HypersurfaceChart,
    checks: &'a [CheckName],
    tol: &'a Tolerances,
    step: f64,
    seed: u64,
}

/// Per-sample outcome before the grid coordinates are attached.
struct Partial {
    residual: Option<f64>,
    residual_fd: Option<f64>,
    mu: Option<f64>,
    mu_target: Option<f64>,
    verdict: Outcome,
    note: Option<String>,
}

impl Partial {
    fn degenerate(note: impl ToString) -> Self {
        Self {
            residual: None,
            residual_fd: None,
            mu: None,
            mu_target: None,
            verdict: Outcome::Degenerate,
            note: Some(note.to_string()),
        }
    }

    fn bounded(residual: f64, tol: f64) -> Self {
        Self {
            residual: Some(residual),
            residual_fd: None,
            mu: None,
            mu_target: None,
            verdict: if residual <= tol {
                Outcome::Pass
            } else {
                Outcome::Fail
            },
            note: None,
        }
    }
}

impl Context<'_> {
    fn evaluate(&self, index: usize, u: &[f64], th: &HypersphericalAngles) -> Vec<SampleRecord> {
        let point = TangentHypersurfacePoint::new(self.chart, u, th).map_err(|e| e.to_string());
        let analytic = point
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|p| p.shape_operator_analytic().map_err(|e| e.to_string()));
        let fd = point.as_ref().map_err(Clone::clone).and_then(|p| {
            p.shape_operator_fd(self.step, false)
                .map_err(|e| e.to_string())
        });
        self.checks
            .iter()
            .map(|&name| {
                let part = match &point {
                    Err(e) => Partial::degenerate(e),
                    Ok(p) => self.check(name, index, p, &analytic, &fd),
                };
                SampleRecord {
                    index,
                    u: u.to_vec(),
                    theta: th.to_vec(),
                    residual: part.residual,
                    residual_fd: part.residual_fd,
                    mu: part.mu,
                    mu_target: part.mu_target,
                    verdict: part.verdict,
                    note: part.note,
                }
            })
            .collect()
    }

    fn check(
        &self,
        name: CheckName,
        index: usize,
        p: &TangentHypersurfacePoint,
        analytic: &std::result::Result<ShapeOperatorSample, String>,
        fd: &std::result::Result<ShapeOperatorSample, String>,
    ) -> Partial {
        match name {
            CheckName::HopfJ => self.hopf(p, StructureField::Xi, analytic, fd),
            CheckName::HopfJprime => self.hopf(p, StructureField::XiPrime, analytic, fd),
            CheckName::OracleAgreement => match (analytic, fd) {
                (Ok(a), Ok(f)) => {
                    Partial::bounded((&f.a_matrix - &a.a_matrix).amax(), self.tol.oracle_tol)
                }
                (Err(e), _) | (_, Err(e)) => Partial::degenerate(e),
            },
            CheckName::GbarNull => {
                let nb = p.normal();
                match nb.metric_gbar(&nb) {
                    Ok(v) => Partial::bounded(v.abs(), GBAR_TOL),
                    Err(e) => Partial::degenerate(e),
                }
            }
            CheckName::HMatrix => match analytic {
                Err(e) => Partial::degenerate(e),
                Ok(a) => match p.h_matrix(a) {
                    Err(e) => Partial::degenerate(e),
                    Ok(hm) => {
                        let identities = hm
                            .eigen_residual
                            .max(hm.trace_residual)
                            .max(hm.product_residual);
                        let sign_ok = !p.forms().is_convex(CONVEXITY_TOL)
                            || hm.lambda_plus * hm.lambda_minus < 0.0;
                        let ok = hm.entry_residual <= H_ENTRY_TOL
                            && identities <= H_IDENTITY_TOL
                            && sign_ok;
                        Partial {
                            residual: Some(hm.entry_residual.max(identities)),
                            residual_fd: None,
                            mu: None,
                            mu_target: None,
                            verdict: if ok { Outcome::Pass } else { Outcome::Fail },
                            note: (!sign_ok).then(|| "lambda+ lambda- is not negative".into()),
                        }
                    }
                },
            },
            CheckName::AlphaPlane => match analytic {
                Err(e) => Partial::degenerate(e),
                Ok(a) => match p.alpha_plane_check(a) {
                    Err(e) => Partial::degenerate(e),
                    Ok(r) => Partial::bounded(
                        r.j_invariance_residual.max(r.xi_prime_residual),
                        ALPHA_TOL,
                    ),
                },
            },
            CheckName::LemmaRoundtrip => self.lemma(index, p),
        }
    }

    fn classify(&self, residual: f64, tol: f64) -> Outcome {
        if residual <= tol {
            Outcome::Hopf
        } else if residual >= self.tol.reject_floor {
            Outcome::NotHopf
        } else {
            Outcome::Degenerate
        }
    }

    fn hopf(
        &self,
        p: &TangentHypersurfacePoint,
        field: StructureField,
        analytic: &std::result::Result<ShapeOperatorSample, String>,
        fd: &std::result::Result<ShapeOperatorSample, String>,
    ) -> Partial {
        let f = match p.structure_field(field) {
            Ok(f) => f,
            Err(e) => return Partial::degenerate(e),
        };
        let entry = |s: &std::result::Result<ShapeOperatorSample, String>| {
            s.as_ref()
                .map_err(Clone::clone)
                .and_then(|s| s.hopf_check(&f).map_err(|e| e.to_string()))
        };
        match (entry(analytic), entry(fd)) {
            (Ok(a), Ok(d)) => {
                let va = self.classify(a.residual, self.tol.hopf_tol);
                let vd = self.classify(d.residual, self.tol.hopf_tol_fd);
                let verdict = if va == vd {
                    va
                } else if va == Outcome::NotHopf || vd == Outcome::NotHopf {
                    Outcome::NotHopf
                } else {
                    Outcome::Degenerate
                };
                let mu_target = match field {
                    StructureField::XiPrime => p.lambda_pm().ok().map(|(_, lm)| lm),
                    StructureField::Xi => {
                        let ff = p.forms();
                        let l = ff.principal_curvatures[0];
                        (ff.umbilicity_defect() <= UMBILIC_TOL && l.abs() > CONVEXITY_TOL)
                            .then(|| p.space().eps() / l)
                    }
                };
                Partial {
                    residual: Some(a.residual),
                    residual_fd: Some(d.residual),
                    mu: Some(a.mu),
                    mu_target,
                    verdict,
                    note: None,
                }
            }
            (Err(e), _) | (_, Err(e)) => Partial::degenerate(e),
        }
    }

    /// Round trips of compose/decompose on the principal frame at this point.
    fn lemma(&self, index: usize, p: &TangentHypersurfacePoint) -> Partial {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let space = p.space();
        let frame = p.frame();
        let n = frame.len();
        let mut worst: f64 = 0.0;
        let mut sum_err: f64 = 0.0;
        for _ in 0..8 {
            // vector → angles → vector
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
            let back = decompose(space, frame, &v).and_then(|a| {
                let coeffs = oriented_geodesics::frame::coefficients(&a);
                sum_err = sum_err.max((coeffs.iter().map(|x| x * x).sum::<f64>() - 1.0).abs());
                compose(space, frame, &a)
            });
            match back {
                Ok(w) => worst = worst.max((&w - &v).amax()),
                Err(e) => return Partial::degenerate(e),
            }
            // angles → vector → angles
            let mut th = vec![rng.random_range(0.0..std::f64::consts::TAU)];
            th.extend((2..n).map(|_| rng.random_range(-1.4..1.4)));
            let angles = match HypersphericalAngles::from_slice(&th) {
                Ok(a) => a,
                Err(e) => return Partial::degenerate(e),
            };
            match compose(space, frame, &angles).and_then(|w| decompose(space, frame, &w)) {
                Ok(b) => {
                    for (x, y) in b.to_vec().iter().zip(&th) {
                        let d = (x - y).abs();
                        worst = worst.max(d.min(std::f64::consts::TAU - d));
                    }
                }
                Err(e) => return Partial::degenerate(e),
            }
        }
        let mut part = Partial::bounded(worst, LEMMA_TOL);
        if sum_err > LEMMA_SUM_TOL {
            part.verdict = Outcome::Fail;
            part.note = Some(format!("coefficient square sum off by {sum_err:e}"));
        }
        part
    }
}

fn summarize(
    name: CheckName,
    expect: Expectation,
    samples: Vec<SampleRecord>,
    tol: &Tolerances,
) -> CheckReport {
    let degenerate_count = samples
        .iter()
        .filter(|s| s.verdict == Outcome::Degenerate)
        .count();
    let fold_max = |it: &mut dyn Iterator<Item = f64>| {
        it.fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))))
    };
    let worst_residual = fold_max(&mut samples.iter().filter_map(|s| s.residual));
    let worst_residual_fd = fold_max(&mut samples.iter().filter_map(|s| s.residual_fd));
    let any = |o: Outcome| samples.iter().any(|s| s.verdict == o);
    let outcome = if samples.is_empty() {
        Outcome::Degenerate
    } else if name.is_hopf() {
        if any(Outcome::NotHopf) {
            Outcome::NotHopf
        } else if samples.iter().all(|s| s.verdict == Outcome::Hopf) {
            Outcome::Hopf
        } else {
            Outcome::Degenerate
        }
    } else if any(Outcome::Fail) {
        Outcome::Fail
    } else if degenerate_count > 0 {
        Outcome::Degenerate
    } else {
        Outcome::Pass
    };
    let status = if outcome.meets(expect) {
        Status::Pass
    } else if outcome == Outcome::Degenerate {
        Status::Degenerate
    } else {
        Status::Fail
    };
    let mus: Vec<f64> = samples.iter().filter_map(|s| s.mu).collect();
    let mu = (!mus.is_empty()).then(|| MuStats {
        min: mus.iter().copied().fold(f64::INFINITY, f64::min),
        max: mus.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: mus.iter().sum::<f64>() / mus.len() as f64,
    });
    let fraction_above_floor = (name.is_hopf() && !samples.is_empty()).then(|| {
        let above = samples
            .iter()
            .filter(|s| s.residual.is_some_and(|r| r >= tol.reject_floor))
            .count();
        above as f64 / samples.len() as f64
    });
    let mut extra = BTreeMap::new();
    let dev = samples
        .iter()
        .filter_map(|s| Some((s.mu? - s.mu_target?).abs()))
        .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
    if let Some(d) = dev {
        extra.insert("max_mu_target_deviation".to_string(), d);
    }
    CheckReport {
        name,
        expect,
        status,
        outcome,
        worst_residual,
        worst_residual_fd,
        fraction_above_floor,
        degenerate_count,
        mu,
        extra,
        samples,
    }
}
