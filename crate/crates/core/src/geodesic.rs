//! Points and tangent vectors of the space of oriented geodesics 𝕃(𝕊ⁿ⁺¹_ε).
//!
//! An oriented geodesic is the oriented plane `x ∧ v` spanned by a point `x`
//! of the pseudo-sphere and a unit tangent `v`. Tangent vectors at `x ∧ v` are
//! bivectors `x ∧ X + v ∧ Y` with `X, Y ⟂ x, v`; they are stored as the pair
//! `(X, Y)` so that the structures below act exactly:
//!
//! * `𝔾((X₁,Y₁),(X₂,Y₂)) = <X₁,X₂>_ε + ε<Y₁,Y₂>_ε` (restriction of `<<·,·>>_ε`),
//! * `𝕁(X, Y) = (−εY, X)`, with `𝕁² = −ε`,
//! * `𝕁'(X, Y) = (J'X, J'Y)` for n = 2, J' the positive quarter turn of the
//!   oriented plane `(x∧v)^⊥`,
//! * `𝔾̄(s, t) = −ε 𝔾(s, 𝕁𝕁' t)` for n = 2.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::ambient::{AmbientVector, Bivector, EpsilonSpace};
use crate::error::{GeometryError, Result};

/// Tolerance on the defining identities of a geodesic point.
pub const POINT_TOL: f64 = 1e-10;
/// Tolerance on `X, Y ⟂ x, v` for tangent vectors.
pub const TANGENT_TOL: f64 = 1e-8;

/// Oriented geodesic `x ∧ v`: `<x,x> = 1`, `<v,v> = ε`, `<x,v> = 0`.
#[derive(Debug, Clone)]
pub struct GeodesicPoint {
    space: EpsilonSpace,
    x: AmbientVector,
    v: AmbientVector,
    /// Positive-form orthonormal basis of `(x∧v)^⊥`, oriented so that
    /// `det(x, v, w₁, …, wₙ) > 0`.
    complement: Vec<AmbientVector>,
}

impl GeodesicPoint {
    pub fn new(space: EpsilonSpace, x: AmbientVector, v: AmbientVector) -> Result<Self> {
        for (name, len) in [("x", x.len()), ("v", v.len())] {
            if len != space.dim() {
                return Err(GeometryError::InvalidGeodesicPoint(format!(
                    "{name} has length {len}, expected {}",
                    space.dim()
                )));
            }
        }
        let xx = space.dot(&x, &x) - 1.0;
        let vv = space.dot(&v, &v) - space.eps();
        let xv = space.dot(&x, &v);
        if xx.abs() > POINT_TOL || vv.abs() > POINT_TOL || xv.abs() > POINT_TOL {
            return Err(GeometryError::InvalidGeodesicPoint(format!(
                "<x,x>-1 = {xx:e}, <v,v>-eps = {vv:e}, <x,v> = {xv:e}"
            )));
        }
        let complement = complement_basis(&space, &x, &v)?;
        Ok(Self {
            space,
            x,
            v,
            complement,
        })
    }

    pub fn space(&self) -> &EpsilonSpace {
        &self.space
    }

    pub fn x(&self) -> &AmbientVector {
        &self.x
    }

    pub fn v(&self) -> &AmbientVector {
        &self.v
    }

    /// Oriented orthonormal basis of the complement plane(s) `(x∧v)^⊥`.
    pub fn complement(&self) -> &[AmbientVector] {
        &self.complement
    }

    /// The bivector `x ∧ v`.
    pub fn bivector(&self) -> Bivector {
        let mut b = Bivector::zeros(self.space.dim());
        b.add_wedge(1.0, &self.x, &self.v);
        b
    }

    /// Point of the geodesic at parameter t.
    pub fn eval(&self, t: f64) -> AmbientVector {
        match self.space.epsilon() {
            crate::Epsilon::Plus => &self.x * t.cos() + &self.v * t.sin(),
            crate::Epsilon::Minus => &self.x * t.cosh() + &self.v * t.sinh(),
        }
    }

    /// Component of `u` orthogonal to x and v.
    pub fn reject(&self, u: &AmbientVector) -> AmbientVector {
        let s = &self.space;
        let mut w = u.clone();
        w.axpy(-s.dot(u, &self.x), &self.x, 1.0);
        w.axpy(-s.eps() * s.dot(u, &self.v), &self.v, 1.0);
        w
    }

    fn orthogonality_residual(&self, u: &AmbientVector) -> f64 {
        let s = &self.space;
        let scale = u.norm().max(1.0);
        s.dot(u, &self.x).abs().max(s.dot(u, &self.v).abs()) / scale
    }

    /// `x ∧ X + v ∧ Y`, rejecting X, Y that are not orthogonal to x and v.
    pub fn tangent_lift(&self, x_part: &AmbientVector, y_part: &AmbientVector) -> Result<Bivector> {
        for u in [x_part, y_part] {
            if u.len() != self.space.dim() {
                return Err(GeometryError::DimensionMismatch {
                    expected: self.space.dim(),
                    got: u.len(),
                });
            }
            let r = self.orthogonality_residual(u);
            if r > TANGENT_TOL {
                return Err(GeometryError::NotTangent { residual: r });
            }
        }
        Ok(self.lift_unchecked(x_part, y_part))
    }

    fn lift_unchecked(&self, x_part: &AmbientVector, y_part: &AmbientVector) -> Bivector {
        let mut b = Bivector::zeros(self.space.dim());
        b.add_wedge(1.0, &self.x, x_part);
        b.add_wedge(1.0, &self.v, y_part);
        b
    }

    /// `<<·,·>>_ε`-orthogonal projection of a bivector onto the tangent space.
    ///
    /// Returns the tangent part and the Euclidean norm of the rejected
    /// component.
    pub fn tangent_project(self: &Arc<Self>, b: &Bivector) -> Result<(TangentAtGeodesic, f64)> {
        let s = &self.space;
        if b.dim() != s.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: s.dim(),
                got: b.dim(),
            });
        }
        let mut x_part = AmbientVector::zeros(s.dim());
        let mut y_part = AmbientVector::zeros(s.dim());
        // {x∧wᵢ} has <<·,·>> = <wᵢ,wᵢ> = ε and {v∧wᵢ} has ε·ε = 1; the two
        // families are mutually orthogonal.
        for w in &self.complement {
            let xw = contract(s, b, &self.x, w);
            let vw = contract(s, b, &self.v, w);
            x_part.axpy(xw * s.eps(), w, 1.0);
            y_part.axpy(vw, w, 1.0);
        }
        let t = TangentAtGeodesic {
            base: Arc::clone(self),
            x_part,
            y_part,
        };
        let residual = (b - &t.lift()).norm();
        Ok((t, residual))
    }

    /// Tangent `(X, Y)` at this point.
    pub fn tangent(
        self: &Arc<Self>,
        x_part: AmbientVector,
        y_part: AmbientVector,
    ) -> Result<TangentAtGeodesic> {
        self.tangent_lift(&x_part, &y_part)?;
        Ok(TangentAtGeodesic {
            base: Arc::clone(self),
            x_part,
            y_part,
        })
    }

    /// Tangent built from vectors orthogonal to x, v by construction; only
    /// their orthogonal parts are kept.
    pub fn tangent_rejecting(
        self: &Arc<Self>,
        x_part: &AmbientVector,
        y_part: &AmbientVector,
    ) -> TangentAtGeodesic {
        TangentAtGeodesic {
            base: Arc::clone(self),
            x_part: self.reject(x_part),
            y_part: self.reject(y_part),
        }
    }

    pub fn zero_tangent(self: &Arc<Self>) -> TangentAtGeodesic {
        let d = self.space.dim();
        TangentAtGeodesic {
            base: Arc::clone(self),
            x_part: AmbientVector::zeros(d),
            y_part: AmbientVector::zeros(d),
        }
    }

    /// The 2n coordinate tangents `(wᵢ, 0)` then `(0, wᵢ)`.
    pub fn tangent_frame(self: &Arc<Self>) -> Vec<TangentAtGeodesic> {
        let d = self.space.dim();
        let zero = AmbientVector::zeros(d);
        let mut out: Vec<_> = self
            .complement
            .iter()
            .map(|w| TangentAtGeodesic {
                base: Arc::clone(self),
                x_part: w.clone(),
                y_part: zero.clone(),
            })
            .collect();
        out.extend(self.complement.iter().map(|w| TangentAtGeodesic {
            base: Arc::clone(self),
            x_part: zero.clone(),
            y_part: w.clone(),
        }));
        out
    }

    /// The quarter turn J' of the complement plane (n = 2).
    pub fn rotate_complement(&self, u: &AmbientVector) -> Result<AmbientVector> {
        self.space.require_n(2)?;
        let s = &self.space;
        let (w1, w2) = (&self.complement[0], &self.complement[1]);
        let a = s.tangent_dot(u, w1);
        let b = s.tangent_dot(u, w2);
        Ok(w2 * a - w1 * b)
    }

    fn same_as(&self, other: &GeodesicPoint) -> bool {
        self.space == other.space
            && (&self.x - &other.x).norm() <= 1e-12
            && (&self.v - &other.v).norm() <= 1e-12
    }
}

/// `<<B, a∧b>>_ε` for vectors a, b.
fn contract(s: &EpsilonSpace, b: &Bivector, a: &AmbientVector, c: &AmbientVector) -> f64 {
    let d = s.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            let w = s.weight(i) * s.weight(j);
            acc += w * b.get(i, j) * (a[i] * c[j] - a[j] * c[i]);
        }
    }
    acc
}

/// Positive-form orthonormal basis of `span(x, v)^⊥`, oriented so that
/// `det(x, v, w₁, …, wₙ) > 0`.
pub fn complement_basis(
    space: &EpsilonSpace,
    x: &AmbientVector,
    v: &AmbientVector,
) -> Result<Vec<AmbientVector>> {
    space.orthogonal_complement(&[x, v])
}

/// Tangent vector `x ∧ X + v ∧ Y` at an oriented geodesic.
#[derive(Debug, Clone)]
pub struct TangentAtGeodesic {
    base: Arc<GeodesicPoint>,
    x_part: AmbientVector,
    y_part: AmbientVector,
}

impl TangentAtGeodesic {
    pub fn base(&self) -> &Arc<GeodesicPoint> {
        &self.base
    }

    /// X, the coefficient of x.
    pub fn x_part(&self) -> &AmbientVector {
        &self.x_part
    }

    /// Y, the coefficient of v.
    pub fn y_part(&self) -> &AmbientVector {
        &self.y_part
    }

    pub fn lift(&self) -> Bivector {
        self.base.lift_unchecked(&self.x_part, &self.y_part)
    }

    /// Euclidean norm of the lifted bivector's coordinates.
    pub fn euclidean_norm(&self) -> f64 {
        self.lift().norm()
    }

    fn check_base(&self, other: &TangentAtGeodesic) -> Result<()> {
        if Arc::ptr_eq(&self.base, &other.base) || self.base.same_as(&other.base) {
            Ok(())
        } else {
            Err(GeometryError::BaseMismatch)
        }
    }

    /// 𝔾 in closed form.
    pub fn metric_g(&self, other: &TangentAtGeodesic) -> Result<f64> {
        self.check_base(other)?;
        Ok(self.g(other))
    }

    #[inline]
    pub(crate) fn g(&self, other: &TangentAtGeodesic) -> f64 {
        let s = self.base.space();
        s.dot(&self.x_part, &other.x_part) + s.eps() * s.dot(&self.y_part, &other.y_part)
    }

    /// 𝕁: `(X, Y) ↦ (−εY, X)`.
    pub fn j(&self) -> TangentAtGeodesic {
        let eps = self.base.space().eps();
        TangentAtGeodesic {
            base: Arc::clone(&self.base),
            x_part: &self.y_part * (-eps),
            y_part: self.x_part.clone(),
        }
    }

    /// 𝕁' (n = 2 only).
    pub fn j_prime(&self) -> Result<TangentAtGeodesic> {
        Ok(TangentAtGeodesic {
            base: Arc::clone(&self.base),
            x_part: self.base.rotate_complement(&self.x_part)?,
            y_part: self.base.rotate_complement(&self.y_part)?,
        })
    }

    /// Neutral metric `𝔾̄(s, t) = −ε 𝔾(s, 𝕁𝕁' t)` (n = 2 only).
    pub fn metric_gbar(&self, other: &TangentAtGeodesic) -> Result<f64> {
        self.check_base(other)?;
        let jjt = other.j_prime()?.j();
        Ok(-self.base.space().eps() * self.g(&jjt))
    }

    /// Largest `|<X,x>|, |<X,v>|, |<Y,x>|, |<Y,v>|`, scaled by the norms.
    pub fn tangency_residual(&self) -> f64 {
        self.base
            .orthogonality_residual(&self.x_part)
            .max(self.base.orthogonality_residual(&self.y_part))
    }

    /// Linear combination `Σ cᵢ tᵢ` over a common base.
    pub fn combination(
        base: &Arc<GeodesicPoint>,
        coeffs: &[f64],
        tangents: &[TangentAtGeodesic],
    ) -> TangentAtGeodesic {
        let mut acc = base.zero_tangent();
        for (c, t) in coeffs.iter().zip(tangents) {
            acc.x_part.axpy(*c, &t.x_part, 1.0);
            acc.y_part.axpy(*c, &t.y_part, 1.0);
        }
        acc
    }
}

impl Add for &TangentAtGeodesic {
    type Output = TangentAtGeodesic;
    fn add(self, rhs: &TangentAtGeodesic) -> TangentAtGeodesic {
        TangentAtGeodesic {
            base: Arc::clone(&self.base),
            x_part: &self.x_part + &rhs.x_part,
            y_part: &self.y_part + &rhs.y_part,
        }
    }
}

impl Sub for &TangentAtGeodesic {
    type Output = TangentAtGeodesic;
    fn sub(self, rhs: &TangentAtGeodesic) -> TangentAtGeodesic {
        TangentAtGeodesic {
            base: Arc::clone(&self.base),
            x_part: &self.x_part - &rhs.x_part,
            y_part: &self.y_part - &rhs.y_part,
        }
    }
}

impl Mul<f64> for &TangentAtGeodesic {
    type Output = TangentAtGeodesic;
    fn mul(self, s: f64) -> TangentAtGeodesic {
        TangentAtGeodesic {
            base: Arc::clone(&self.base),
            x_part: &self.x_part * s,
            y_part: &self.y_part * s,
        }
    }
}

impl Neg for &TangentAtGeodesic {
    type Output = TangentAtGeodesic;
    fn neg(self) -> TangentAtGeodesic {
        self * -1.0
    }
}

/// Gram matrix of a bilinear form over a list of tangents.
pub fn gram_matrix<F>(tangents: &[TangentAtGeodesic], form: F) -> DMatrix<f64>
where
    F: Fn(&TangentAtGeodesic, &TangentAtGeodesic) -> f64,
{
    let k = tangents.len();
    DMatrix::from_fn(k, k, |i, j| form(&tangents[i], &tangents[j]))
}

/// Counts of (positive, negative, near-zero) eigenvalues of a symmetric matrix.
pub fn signature(m: &DMatrix<f64>, tol: f64) -> (usize, usize, usize) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let pos = eig.iter().filter(|&&l| l > tol).count();
    let neg = eig.iter().filter(|&&l| l < -tol).count();
    (pos, neg, eig.len() - pos - neg)
}
