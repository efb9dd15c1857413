//! Hyperspherical angles over an orthonormal frame.
//!
//! For angles `θ₁ ∈ [0, 2π)`, `θ₂, …, θ_{n−1} ∈ [−π/2, π/2]` the unit vector
//!
//! ```text
//! v = cosθ₁ cosθ₂ … cosθ_{n−1} e₁
//!   + sinθ₁ cosθ₂ … cosθ_{n−1} e₂
//!   + sinθ₂ cosθ₃ … cosθ_{n−1} e₃
//!   + …
//!   + sinθ_{n−1} eₙ
//! ```
//!
//! covers the unit sphere of span(e₁, …, eₙ). [`decompose`] inverts it by
//! peeling off the last angle and recursing, resolving θ₁ with `atan2`.
//!
//! Frames live in tangent spaces of the pseudo-sphere; orthonormality and
//! coefficients are taken with respect to the positive definite form
//! `ε<·,·>_ε`.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_dual::{Dual64, DualNum};
use serde::{Deserialize, Serialize};

use crate::ambient::{AmbientVector, EpsilonSpace};
use crate::error::{GeometryError, Result};

/// Tolerance on frame orthonormality accepted by [`compose`] and [`decompose`].
pub const FRAME_TOL: f64 = 1e-8;
/// Tolerance on `|v|² − 1` and on the out-of-span residual in [`decompose`].
pub const UNIT_TOL: f64 = 1e-8;
/// `|cos θₖ|` below this value is treated as the pole `|θₖ| = π/2`.
pub const POLE_TOL: f64 = 1e-9;

/// Angles `θ₁` and `θ₂ … θ_{n−1}`; for n = 2 `rest` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypersphericalAngles {
    pub theta1: f64,
    pub rest: Vec<f64>,
}

impl HypersphericalAngles {
    /// Validates ranges; `theta1` is reduced modulo 2π.
    pub fn new(theta1: f64, rest: Vec<f64>) -> Result<Self> {
        if !theta1.is_finite() {
            return Err(GeometryError::AngleOutOfRange(format!("theta1 = {theta1}")));
        }
        for (k, t) in rest.iter().enumerate() {
            if !t.is_finite() || t.abs() > FRAC_PI_2 + 1e-12 {
                return Err(GeometryError::AngleOutOfRange(format!(
                    "theta{} = {t} outside [-pi/2, pi/2]",
                    k + 2
                )));
            }
        }
        Ok(Self {
            theta1: theta1.rem_euclid(TAU),
            rest,
        })
    }

    /// A circle angle for n = 2.
    pub fn circle(theta: f64) -> Self {
        Self {
            theta1: theta.rem_euclid(TAU),
            rest: Vec::new(),
        }
    }

    /// Dimension n of the sphere's ambient span (number of frame vectors).
    pub fn n(&self) -> usize {
        self.rest.len() + 2
    }

    /// All angles in order `θ₁, …, θ_{n−1}`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rest.len() + 1);
        out.push(self.theta1);
        out.extend_from_slice(&self.rest);
        out
    }

    pub fn from_slice(thetas: &[f64]) -> Result<Self> {
        let (first, rest) = thetas
            .split_first()
            .ok_or_else(|| GeometryError::AngleOutOfRange("no angles given".into()))?;
        Self::new(*first, rest.to_vec())
    }
}

/// Coefficients of v on the frame for angles `θ₁ … θ_m`; returns m + 1 values.
///
/// Generic over dual numbers so that charts built from these coordinates can
/// be differentiated exactly.
pub fn coefficients_generic<D: DualNum<Primitive = f64> + Copy>(thetas: &[D]) -> Vec<D> {
    let m = thetas.len();
    let n = m + 1;
    // tail[k] = cos θ_k … cos θ_{m} (1-based angle index), tail[m+1] = 1
    let mut tail = vec![D::one(); m + 2];
    for k in (1..=m).rev() {
        tail[k] = tail[k + 1] * thetas[k - 1].cos();
    }
    let mut c = Vec::with_capacity(n);
    if m == 0 {
        c.push(D::one());
        return c;
    }
    c.push(thetas[0].cos() * tail[2]);
    c.push(thetas[0].sin() * tail[2]);
    for k in 3..=n {
        c.push(thetas[k - 2].sin() * tail[k]);
    }
    c
}

/// Coefficients of v on the frame (length n).
pub fn coefficients(angles: &HypersphericalAngles) -> Vec<f64> {
    coefficients_generic(&angles.to_vec())
}

/// Partial derivatives `∂θₖ` of the coefficient vector, k = 1 … n−1.
pub fn coefficient_derivatives(angles: &HypersphericalAngles) -> Vec<Vec<f64>> {
    let thetas = angles.to_vec();
    (0..thetas.len())
        .map(|k| {
            let duals: Vec<Dual64> = thetas
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let d = Dual64::from_re(t);
                    if i == k {
                        d.derivative()
                    } else {
                        d
                    }
                })
                .collect();
            coefficients_generic(&duals)
                .into_iter()
                .map(|c| c.eps)
                .collect()
        })
        .collect()
}

/// Largest deviation of the frame's Gram matrix (positive form) from the identity.
pub fn frame_deviation(space: &EpsilonSpace, frame: &[AmbientVector]) -> f64 {
    let mut dev = 0.0_f64;
    for (i, a) in frame.iter().enumerate() {
        for (j, b) in frame.iter().enumerate().skip(i) {
            let want = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((space.tangent_dot(a, b) - want).abs());
        }
    }
    dev
}

fn check_frame(space: &EpsilonSpace, frame: &[AmbientVector], n: usize) -> Result<()> {
    if frame.len() != n {
        return Err(GeometryError::FrameSize {
            expected: n,
            got: frame.len(),
        });
    }
    if let Some(bad) = frame.iter().find(|e| e.len() != space.dim()) {
        return Err(GeometryError::DimensionMismatch {
            expected: space.dim(),
            got: bad.len(),
        });
    }
    let dev = frame_deviation(space, frame);
    if dev > FRAME_TOL {
        return Err(GeometryError::NonOrthonormalFrame { deviation: dev });
    }
    Ok(())
}

fn combine(space: &EpsilonSpace, frame: &[AmbientVector], coeffs: &[f64]) -> AmbientVector {
    let mut v = AmbientVector::zeros(space.dim());
    for (e, c) in frame.iter().zip(coeffs) {
        v.axpy(*c, e, 1.0);
    }
    v
}

/// Builds the unit vector with the given angles on an orthonormal frame.
pub fn compose(
    space: &EpsilonSpace,
    frame: &[AmbientVector],
    angles: &HypersphericalAngles,
) -> Result<AmbientVector> {
    check_frame(space, frame, angles.n())?;
    Ok(combine(space, frame, &coefficients(angles)))
}

/// Unit directions `vₖ = ∂θₖ v / |∂θₖ v|`, k = 1 … n−1.
///
/// At a pole of a later angle `∂θₖ v` vanishes; the unnormalized derivative is
/// returned in that case.
pub fn angle_directions(
    space: &EpsilonSpace,
    frame: &[AmbientVector],
    angles: &HypersphericalAngles,
) -> Result<Vec<AmbientVector>> {
    check_frame(space, frame, angles.n())?;
    Ok(coefficient_derivatives(angles)
        .into_iter()
        .map(|dc| {
            let norm = dc.iter().map(|c| c * c).sum::<f64>().sqrt();
            let scale = if norm > POLE_TOL { 1.0 / norm } else { 1.0 };
            let scaled: Vec<f64> = dc.iter().map(|c| c * scale).collect();
            combine(space, frame, &scaled)
        })
        .collect())
}

/// Recovers angles from frame coefficients (which must have unit length).
pub fn angles_from_coefficients(coeffs: &[f64]) -> Result<HypersphericalAngles> {
    let n = coeffs.len();
    if n < 2 {
        return Err(GeometryError::DimensionTooSmall(n));
    }
    let mut rest = vec![0.0; n - 2];
    // remaining[k] = |(c₁, …, c_k)|, computed once to keep the recursion stable
    let mut remaining = vec![0.0_f64; n + 1];
    for k in 1..=n {
        remaining[k] = remaining[k - 1].hypot(coeffs[k - 1]);
    }
    // Peel θ_{k−1} from c_k for k = n … 3. Dividing by the running product of
    // cosines is the same as normalizing by remaining[k].
    for k in (3..=n).rev() {
        let below = remaining[k - 1];
        if below / remaining[k].max(f64::MIN_POSITIVE) < POLE_TOL {
            // pole: this angle is ±π/2 and every earlier angle is 0
            rest[k - 3] = FRAC_PI_2.copysign(coeffs[k - 1]);
            return Ok(HypersphericalAngles { theta1: 0.0, rest });
        }
        rest[k - 3] = coeffs[k - 1].atan2(below);
    }
    let theta1 = coeffs[1].atan2(coeffs[0]).rem_euclid(TAU);
    Ok(HypersphericalAngles { theta1, rest })
}

/// Inverse of [`compose`]: angles of a unit vector lying in span(frame).
pub fn decompose(
    space: &EpsilonSpace,
    frame: &[AmbientVector],
    v: &AmbientVector,
) -> Result<HypersphericalAngles> {
    if frame.len() < 2 {
        return Err(GeometryError::DimensionTooSmall(frame.len()));
    }
    check_frame(space, frame, frame.len())?;
    if v.len() != space.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: space.dim(),
            got: v.len(),
        });
    }
    let coeffs: Vec<f64> = frame.iter().map(|e| space.tangent_dot(v, e)).collect();
    let norm_sq: f64 = coeffs.iter().map(|c| c * c).sum();
    let residual = (v - combine(space, frame, &coeffs)).norm();
    if residual > UNIT_TOL * v.norm().max(1.0) {
        return Err(GeometryError::OutsideSpan { residual });
    }
    if (norm_sq - 1.0).abs() > UNIT_TOL {
        return Err(GeometryError::NotUnit {
            deviation: norm_sq - 1.0,
        });
    }
    angles_from_coefficients(&coeffs)
}
