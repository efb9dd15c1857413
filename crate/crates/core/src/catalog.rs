//! Built-in test surfaces.
//!
//! All charts share the hyperspherical parametrization of the unit sphere in
//! `c^⊥` about a center `c`: `u = (θ₁, …, θₙ)` with θ₁ periodic and the
//! remaining angles kept away from the poles. The frame of `c^⊥` is oriented
//! so that the normal of a round sphere points towards its center; geodesic
//! spheres then have `λ = cot r` (ε = +1) and `λ = coth r` (ε = −1).
//!
//! Maps are written once over generic dual numbers; jets come from
//! hyper-dual evaluation and are exact to rounding.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_dual::{Dual64, DualNum, HyperDual64};
use serde::{Deserialize, Serialize};

use crate::ambient::{AmbientVector, Epsilon, EpsilonSpace};
use crate::error::{GeometryError, Result};
use crate::frame::coefficients_generic;
use crate::surface::{HypersurfaceChart, Jet, SurfaceMap};

/// Distance kept between the latitude angles and the chart poles.
pub const POLE_MARGIN: f64 = 0.35;

/// Surface kinds and their parameters, as written in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    /// Points at distance `radius` from `center` (default e₀).
    GeodesicSphere {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        radius: f64,
    },
    /// `E(u)/|E(u)|` with `E = a₀e₀ + Σ aₖ sₖ(u) wₖ`; ε = +1 and n = 2 only.
    NormalizedEllipsoid { semi_axes: [f64; 4] },
    /// Radial graph `ρ(u) = radius + Σ quadratic[k]·sₖ(u)²` over the unit
    /// sphere of `c^⊥`.
    GraphOverSphere {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        radius: f64,
        quadratic: Vec<f64>,
    },
}

impl SurfaceSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SurfaceSpec::GeodesicSphere { .. } => "geodesic_sphere",
            SurfaceSpec::NormalizedEllipsoid { .. } => "normalized_ellipsoid",
            SurfaceSpec::GraphOverSphere { .. } => "graph_over_sphere",
        }
    }
}

/// Builds the analytic chart for `spec` in `space`.
pub fn catalog_surface(space: EpsilonSpace, spec: &SurfaceSpec) -> Result<HypersurfaceChart> {
    let map: Arc<dyn SurfaceMap> = match spec {
        SurfaceSpec::GeodesicSphere { center, radius } => {
            Arc::new(RadialGraph::new(space, center.as_deref(), *radius, None)?)
        }
        SurfaceSpec::GraphOverSphere {
            center,
            radius,
            quadratic,
        } => Arc::new(RadialGraph::new(
            space,
            center.as_deref(),
            *radius,
            Some(quadratic.clone()),
        )?),
        SurfaceSpec::NormalizedEllipsoid { semi_axes } => {
            Arc::new(NormalizedEllipsoid::new(space, *semi_axes)?)
        }
    };
    HypersurfaceChart::new(space, map)
}

/// Principal curvatures within this distance of zero do not count as convex.
pub const CONVEXITY_TOL: f64 = 1e-9;

/// Rejects the chart unless every grid point has principal curvatures of one
/// strict sign.
pub fn check_convexity(chart: &HypersurfaceChart, points: &[Vec<f64>]) -> Result<()> {
    for u in points {
        let ff = chart.fundamental_forms(u)?;
        if !ff.is_convex(CONVEXITY_TOL) {
            return Err(GeometryError::NonConvex {
                u: u.clone(),
                curvatures: ff.principal_curvatures,
            });
        }
    }
    Ok(())
}

/// Maps written over generic dual numbers.
trait DualMap {
    fn n(&self) -> usize;
    fn eval_dual<D: DualNum<Primitive = f64> + Copy>(&self, u: &[D]) -> Vec<D>;
}

fn to_vector(v: Vec<f64>) -> AmbientVector {
    AmbientVector::from_vec(v)
}

fn eval_plain<M: DualMap>(m: &M, u: &[f64]) -> AmbientVector {
    to_vector(m.eval_dual(u))
}

fn first_jet_dual<M: DualMap>(m: &M, u: &[f64]) -> (AmbientVector, Vec<AmbientVector>) {
    let n = m.n();
    let mut point = None;
    let mut first = Vec::with_capacity(n);
    for i in 0..n {
        let args: Vec<Dual64> = u
            .iter()
            .enumerate()
            .map(|(k, &x)| Dual64::new(x, if k == i { 1.0 } else { 0.0 }))
            .collect();
        let out = m.eval_dual(&args);
        if point.is_none() {
            point = Some(to_vector(out.iter().map(|d| d.re).collect()));
        }
        first.push(to_vector(out.iter().map(|d| d.eps).collect()));
    }
    (point.unwrap_or_else(|| eval_plain(m, u)), first)
}

fn jet_hyperdual<M: DualMap>(m: &M, u: &[f64]) -> Jet {
    let n = m.n();
    let mut point = None;
    let mut first = vec![AmbientVector::zeros(0); n];
    let mut second = vec![vec![AmbientVector::zeros(0); n]; n];
    for i in 0..n {
        for j in i..n {
            let args: Vec<HyperDual64> = u
                .iter()
                .enumerate()
                .map(|(k, &x)| {
                    HyperDual64::new(
                        x,
                        if k == i { 1.0 } else { 0.0 },
                        if k == j { 1.0 } else { 0.0 },
                        0.0,
                    )
                })
                .collect();
            let out = m.eval_dual(&args);
            if point.is_none() {
                point = Some(to_vector(out.iter().map(|d| d.re).collect()));
            }
            if i == j {
                first[i] = to_vector(out.iter().map(|d| d.eps1).collect());
            }
            let d2 = to_vector(out.iter().map(|d| d.eps1eps2).collect());
            second[j][i] = d2.clone();
            second[i][j] = d2;
        }
    }
    Jet {
        point: point.unwrap_or_else(|| eval_plain(m, u)),
        first,
        second,
    }
}

fn latitude_domain(n: usize) -> Vec<(f64, f64)> {
    let mut d = vec![(0.0, TAU)];
    d.extend((1..n).map(|_| (-FRAC_PI_2 + POLE_MARGIN, FRAC_PI_2 - POLE_MARGIN)));
    d
}

fn first_periodic(n: usize) -> Vec<bool> {
    let mut p = vec![false; n];
    p[0] = true;
    p
}

/// Unit center and the (reoriented) orthonormal frame of its complement.
fn center_frame(
    space: &EpsilonSpace,
    center: Option<&[f64]>,
) -> Result<(AmbientVector, Vec<AmbientVector>)> {
    let c = match center {
        Some(c) => {
            if c.len() != space.dim() {
                return Err(GeometryError::DimensionMismatch {
                    expected: space.dim(),
                    got: c.len(),
                });
            }
            AmbientVector::from_column_slice(c)
        }
        None => space.axis(0),
    };
    let q = space.dot(&c, &c);
    if !(q > 0.0) {
        return Err(GeometryError::InvalidParameter(format!(
            "center must satisfy <c,c> > 0, got {q}"
        )));
    }
    let c = c / q.sqrt();
    let mut frame = space.orthogonal_complement(&[&c])?;
    // At u = 0 the chart is φ = C c + S w₀ with ∂ᵢφ ∝ wᵢ; orient it so the
    // normal there is εS c − C w₀, which gives spheres λ = cot r / coth r.
    let (cr, sr) = trig(space.epsilon(), REFERENCE_RADIUS);
    let d = space.dim();
    let mut m = DMatrix::<f64>::zeros(d, d);
    m.set_column(0, &(&c * cr + &frame[0] * sr));
    for i in 1..=space.n() {
        m.set_column(i, &frame[i]);
    }
    m.set_column(d - 1, &(&c * (space.eps() * sr) - &frame[0] * cr));
    if m.determinant() < 0.0 {
        frame[1] = -&frame[1];
    }
    Ok((c, frame))
}

/// Any radius works for the orientation test; the sign is radius-independent.
const REFERENCE_RADIUS: f64 = 0.5;

/// `(C(ρ), S(ρ))`: `(cos, sin)` for ε = +1 and `(cosh, sinh)` for ε = −1.
fn trig<D: DualNum<Primitive = f64> + Copy>(eps: Epsilon, rho: D) -> (D, D) {
    match eps {
        Epsilon::Plus => (rho.cos(), rho.sin()),
        Epsilon::Minus => (rho.cosh(), rho.sinh()),
    }
}

/// Geodesic spheres and radial graphs over them.
#[derive(Debug, Clone)]
pub struct RadialGraph {
    space: EpsilonSpace,
    center: AmbientVector,
    frame: Vec<AmbientVector>,
    radius: f64,
    quadratic: Option<Vec<f64>>,
}

impl RadialGraph {
    pub fn new(
        space: EpsilonSpace,
        center: Option<&[f64]>,
        radius: f64,
        quadratic: Option<Vec<f64>>,
    ) -> Result<Self> {
        let max_r = match space.epsilon() {
            Epsilon::Plus => std::f64::consts::PI,
            Epsilon::Minus => f64::INFINITY,
        };
        if !(radius > 0.0 && radius < max_r) {
            return Err(GeometryError::InvalidParameter(format!(
                "radius {radius} outside (0, {max_r})"
            )));
        }
        if let Some(q) = &quadratic {
            if q.len() != space.n() + 1 {
                return Err(GeometryError::DimensionMismatch {
                    expected: space.n() + 1,
                    got: q.len(),
                });
            }
            let spread: f64 = q.iter().map(|x| x.abs()).sum();
            if !q.iter().all(|x| x.is_finite())
                || radius - spread <= 0.0
                || radius + spread >= max_r
            {
                return Err(GeometryError::InvalidParameter(
                    "radial perturbation leaves the admissible radius range".into(),
                ));
            }
        }
        let (center, frame) = center_frame(&space, center)?;
        Ok(Self {
            space,
            center,
            frame,
            radius,
            quadratic,
        })
    }

    pub fn center(&self) -> &AmbientVector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl DualMap for RadialGraph {
    fn n(&self) -> usize {
        self.space.n()
    }

    fn eval_dual<D: DualNum<Primitive = f64> + Copy>(&self, u: &[D]) -> Vec<D> {
        let s = coefficients_generic(u);
        let rho = match &self.quadratic {
            None => D::from(self.radius),
            Some(q) => s
                .iter()
                .zip(q)
                .fold(D::from(self.radius), |acc, (&sk, &qk)| acc + sk * sk * qk),
        };
        let (c, sn) = trig(self.space.epsilon(), rho);
        (0..self.space.dim())
            .map(|a| {
                let dir = s
                    .iter()
                    .zip(&self.frame)
                    .fold(D::zero(), |acc, (&sk, w)| acc + sk * w[a]);
                c * self.center[a] + sn * dir
            })
            .collect()
    }
}

impl SurfaceMap for RadialGraph {
    fn coords(&self) -> usize {
        self.space.n()
    }
    fn eval(&self, u: &[f64]) -> AmbientVector {
        eval_plain(self, u)
    }
    fn jet(&self, u: &[f64]) -> Option<Jet> {
        Some(jet_hyperdual(self, u))
    }
    fn first_jet(&self, u: &[f64]) -> Option<(AmbientVector, Vec<AmbientVector>)> {
        Some(first_jet_dual(self, u))
    }
    fn domain(&self) -> Vec<(f64, f64)> {
        latitude_domain(self.space.n())
    }
    fn periodic(&self) -> Vec<bool> {
        first_periodic(self.space.n())
    }
}

/// Radial projection of an ellipsoid of ℝ⁴ onto 𝕊³.
#[derive(Debug, Clone)]
pub struct NormalizedEllipsoid {
    center: AmbientVector,
    frame: Vec<AmbientVector>,
    semi_axes: [f64; 4],
}

impl NormalizedEllipsoid {
    pub fn new(space: EpsilonSpace, semi_axes: [f64; 4]) -> Result<Self> {
        if space.epsilon() != Epsilon::Plus {
            return Err(GeometryError::InvalidParameter(
                "normalized ellipsoid requires epsilon = +1".into(),
            ));
        }
        space.require_n(2)?;
        if !semi_axes.iter().all(|a| a.is_finite() && *a > 0.0) {
            return Err(GeometryError::InvalidParameter(format!(
                "semi-axes must be positive, got {semi_axes:?}"
            )));
        }
        let (center, frame) = center_frame(&space, None)?;
        Ok(Self {
            center,
            frame,
            semi_axes,
        })
    }
}

impl DualMap for NormalizedEllipsoid {
    fn n(&self) -> usize {
        2
    }

    fn eval_dual<D: DualNum<Primitive = f64> + Copy>(&self, u: &[D]) -> Vec<D> {
        let s = coefficients_generic(u);
        let e: Vec<D> = (0..4)
            .map(|a| {
                let mut x = D::from(self.semi_axes[0] * self.center[a]);
                for k in 0..3 {
                    x += s[k] * (self.semi_axes[k + 1] * self.frame[k][a]);
                }
                x
            })
            .collect();
        let norm = e.iter().fold(D::zero(), |acc, &x| acc + x * x).sqrt();
        e.into_iter().map(|x| x / norm).collect()
    }
}

impl SurfaceMap for NormalizedEllipsoid {
    fn coords(&self) -> usize {
        2
    }
    fn eval(&self, u: &[f64]) -> AmbientVector {
        eval_plain(self, u)
    }
    fn jet(&self, u: &[f64]) -> Option<Jet> {
        Some(jet_hyperdual(self, u))
    }
    fn first_jet(&self, u: &[f64]) -> Option<(AmbientVector, Vec<AmbientVector>)> {
        Some(first_jet_dual(self, u))
    }
    fn domain(&self) -> Vec<(f64, f64)> {
        latitude_domain(2)
    }
    fn periodic(&self) -> Vec<bool> {
        first_periodic(2)
    }
}
