//! Signature-ε scalar products on ℝⁿ⁺² and the bivector algebra Λ²(ℝⁿ⁺²).
//!
//! The scalar product is `<a,b>_ε = a₀b₀ + ε Σ_{i≥1} aᵢbᵢ`. With this choice the
//! unit level set `<x,x>_ε = 1` is the round sphere for ε = +1 and the
//! two-sheeted hyperboloid (with negative definite induced metric) for ε = −1.
//!
//! Bivectors are stored by their components on `e_i ∧ e_j` for `i < j`, in
//! lexicographic order. The flat metric on Λ² is the one induced by the
//! determinant rule `<<a∧b, c∧d>> = <a,c><b,d> − <a,d><b,c>`, which is diagonal
//! on the coordinate basis with weights `η_i η_j`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};

/// A vector of ℝⁿ⁺². No normalization is implied.
pub type AmbientVector = DVector<f64>;

/// Threshold on `|<w,w>|` below which a Gram-Schmidt step is declared degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Sign of the ambient signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum Epsilon {
    /// Round sphere.
    Plus,
    /// Hyperbolic space (anti-isometric model).
    Minus,
}

impl Epsilon {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Epsilon::Plus => 1.0,
            Epsilon::Minus => -1.0,
        }
    }
}

impl TryFrom<i64> for Epsilon {
    type Error = GeometryError;

    fn try_from(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Epsilon::Plus),
            -1 => Ok(Epsilon::Minus),
            other => Err(GeometryError::InvalidEpsilon(other)),
        }
    }
}

impl From<Epsilon> for i64 {
    fn from(e: Epsilon) -> i64 {
        match e {
            Epsilon::Plus => 1,
            Epsilon::Minus => -1,
        }
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::Plus => write!(f, "+1"),
            Epsilon::Minus => write!(f, "-1"),
        }
    }
}

/// Ambient signature context: the sign ε and the hypersurface dimension n
/// (the ambient space is ℝⁿ⁺²).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonSpace {
    epsilon: Epsilon,
    n: usize,
}

impl EpsilonSpace {
    pub fn new(epsilon: Epsilon, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(GeometryError::DimensionTooSmall(n));
        }
        Ok(Self { epsilon, n })
    }

    /// Builds a space from a raw sign, rejecting anything but ±1.
    pub fn from_sign(sign: i64, n: usize) -> Result<Self> {
        Self::new(Epsilon::try_from(sign)?, n)
    }

    #[inline]
    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    /// ε as a float.
    #[inline]
    pub fn eps(&self) -> f64 {
        self.epsilon.value()
    }

    /// Hypersurface dimension n.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Ambient dimension n + 2.
    #[inline]
    pub fn dim(&self) -> usize {
        self.n + 2
    }

    /// Diagonal entry of the ambient metric on axis `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 {
            1.0
        } else {
            self.eps()
        }
    }

    pub fn require_n(&self, required: usize) -> Result<()> {
        if self.n != required {
            return Err(GeometryError::UnsupportedDimension {
                required,
                got: self.n,
            });
        }
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    /// `<a,b>_ε`, validating lengths.
    pub fn eps_dot(&self, a: &AmbientVector, b: &AmbientVector) -> Result<f64> {
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        Ok(self.dot(a, b))
    }

    /// `<a,b>_ε` without length validation; panics on mismatched lengths.
    #[inline]
    pub fn dot(&self, a: &AmbientVector, b: &AmbientVector) -> f64 {
        assert_eq!(a.len(), b.len(), "ambient vectors of different length");
        let tail: f64 = a.iter().zip(b.iter()).skip(1).map(|(x, y)| x * y).sum();
        a[0] * b[0] + self.eps() * tail
    }

    /// The positive definite form `ε<a,b>_ε` used on tangent spaces of the
    /// pseudo-sphere (spacelike for ε = +1, the negated metric for ε = −1).
    #[inline]
    pub fn tangent_dot(&self, a: &AmbientVector, b: &AmbientVector) -> f64 {
        self.eps() * self.dot(a, b)
    }

    /// `<<A,B>>_ε` on Λ².
    pub fn biv_dot(&self, a: &Bivector, b: &Bivector) -> Result<f64> {
        self.check_len(a.dim())?;
        self.check_len(b.dim())?;
        Ok(self.biv_dot_unchecked(a, b))
    }

    pub(crate) fn biv_dot_unchecked(&self, a: &Bivector, b: &Bivector) -> f64 {
        let d = a.dim;
        let mut acc = 0.0;
        let mut k = 0;
        for i in 0..d {
            for j in (i + 1)..d {
                acc += self.weight(i) * self.weight(j) * a.comps[k] * b.comps[k];
                k += 1;
            }
        }
        acc
    }

    /// ε-signature Gram-Schmidt.
    ///
    /// Inputs are first scaled to unit Euclidean norm. Each step subtracts the
    /// ε-projections onto the previous outputs and normalizes so that
    /// `<wᵢ,wᵢ>_ε = target_signs[i]`.
    pub fn gram_schmidt(
        &self,
        vectors: &[AmbientVector],
        target_signs: &[i8],
    ) -> Result<Vec<AmbientVector>> {
        if vectors.len() != target_signs.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: vectors.len(),
                got: target_signs.len(),
            });
        }
        let mut out: Vec<AmbientVector> = Vec::with_capacity(vectors.len());
        for (step, (v, &sign)) in vectors.iter().zip(target_signs).enumerate() {
            self.check_len(v.len())?;
            if sign != 1 && sign != -1 {
                return Err(GeometryError::InvalidParameter(format!(
                    "target sign {sign} at step {step}"
                )));
            }
            let norm = v.norm();
            if norm == 0.0 || !norm.is_finite() {
                return Err(GeometryError::DegenerateSpan { step, value: 0.0 });
            }
            let mut w = v / norm;
            for prev in &out {
                let pp = self.dot(prev, prev);
                let c = self.dot(&w, prev) / pp;
                w.axpy(-c, prev, 1.0);
            }
            let q = self.dot(&w, &w);
            if q.abs() < DEGENERACY_TOL {
                return Err(GeometryError::DegenerateSpan { step, value: q });
            }
            let got: i8 = if q > 0.0 { 1 } else { -1 };
            if got != sign {
                return Err(GeometryError::SignMismatch {
                    step,
                    expected: sign,
                    got,
                });
            }
            w /= q.abs().sqrt();
            out.push(w);
        }
        Ok(out)
    }

    /// Positive-form orthonormal basis of the ε-orthogonal complement of
    /// `spanning` (whose members must be mutually orthogonal and non-null),
    /// oriented so that `det(spanning…, w₁, …) > 0`.
    ///
    /// The complement must be definite: it is orthonormalized with respect to
    /// `ε<·,·>_ε`.
    pub fn orthogonal_complement(&self, spanning: &[&AmbientVector]) -> Result<Vec<AmbientVector>> {
        let d = self.dim();
        for s in spanning {
            self.check_len(s.len())?;
        }
        let reject = |u: &AmbientVector| {
            let mut w = u.clone();
            for s in spanning {
                w.axpy(-self.dot(u, s) / self.dot(s, s), s, 1.0);
            }
            w
        };
        let mut candidates: Vec<AmbientVector> = (0..d).map(|i| reject(&self.axis(i))).collect();
        let k = d - spanning.len();
        let mut basis: Vec<AmbientVector> = Vec::with_capacity(k);
        for step in 0..k {
            // greedy: largest remaining positive-form norm first
            let (best, q) = candidates
                .iter()
                .enumerate()
                .map(|(i, c)| (i, self.tangent_dot(c, c)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty candidates");
            if q < DEGENERACY_TOL {
                return Err(GeometryError::DegenerateSpan { step, value: q });
            }
            let w = candidates.swap_remove(best) / q.sqrt();
            for c in candidates.iter_mut() {
                let proj = self.tangent_dot(c, &w);
                c.axpy(-proj, &w, 1.0);
            }
            basis.push(w);
        }
        let mut m = DMatrix::<f64>::zeros(d, d);
        for (i, s) in spanning.iter().enumerate() {
            m.set_column(i, s);
        }
        for (i, w) in basis.iter().enumerate() {
            m.set_column(spanning.len() + i, w);
        }
        if m.determinant() < 0.0 {
            if let Some(last) = basis.last_mut() {
                *last *= -1.0;
            }
        }
        Ok(basis)
    }

    /// Standard basis vector `e_i` of ℝⁿ⁺².
    pub fn axis(&self, i: usize) -> AmbientVector {
        let mut v = AmbientVector::zeros(self.dim());
        v[i] = 1.0;
        v
    }
}

/// Element of Λ²(ℝᵈ), stored on the basis `e_i ∧ e_j`, `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bivector {
    dim: usize,
    comps: Vec<f64>,
}

impl Bivector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            comps: vec![0.0; dim * (dim - 1) / 2],
        }
    }

    /// Ambient dimension d (the bivector has d(d−1)/2 components).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.comps
    }

    /// Position of the pair `(i, j)`, `i < j`, in the component array.
    pub fn index(dim: usize, i: usize, j: usize) -> usize {
        assert!(i < j && j < dim, "bivector index ({i},{j}) out of range");
        i * (2 * dim - i - 1) / 2 + (j - i - 1)
    }

    /// Component on `e_i ∧ e_j`, antisymmetric in (i, j).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.comps[Self::index(self.dim, i, j)],
            std::cmp::Ordering::Greater => -self.comps[Self::index(self.dim, j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// Euclidean norm of the component array.
    pub fn norm(&self) -> f64 {
        self.comps.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// `self += s · (a ∧ b)` without allocating.
    pub fn add_wedge(&mut self, s: f64, a: &AmbientVector, b: &AmbientVector) {
        let d = self.dim;
        let mut k = 0;
        for i in 0..d {
            for j in (i + 1)..d {
                self.comps[k] += s * (a[i] * b[j] - a[j] * b[i]);
                k += 1;
            }
        }
    }
}

/// `a ∧ b`, with component (i, j) equal to `aᵢbⱼ − aⱼbᵢ`.
pub fn wedge(a: &AmbientVector, b: &AmbientVector) -> Result<Bivector> {
    if a.len() != b.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let mut out = Bivector::zeros(a.len());
    out.add_wedge(1.0, a, b);
    Ok(out)
}

impl Add for &Bivector {
    type Output = Bivector;
    fn add(self, rhs: &Bivector) -> Bivector {
        assert_eq!(self.dim, rhs.dim);
        Bivector {
            dim: self.dim,
            comps: self
                .comps
                .iter()
                .zip(&rhs.comps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Bivector {
    type Output = Bivector;
    fn sub(self, rhs: &Bivector) -> Bivector {
        assert_eq!(self.dim, rhs.dim);
        Bivector {
            dim: self.dim,
            comps: self
                .comps
                .iter()
                .zip(&rhs.comps)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl AddAssign<&Bivector> for Bivector {
    fn add_assign(&mut self, rhs: &Bivector) {
        assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.comps.iter_mut().zip(&rhs.comps) {
            *a += b;
        }
    }
}

impl Mul<f64> for &Bivector {
    type Output = Bivector;
    fn mul(self, s: f64) -> Bivector {
        Bivector {
            dim: self.dim,
            comps: self.comps.iter().map(|c| c * s).collect(),
        }
    }
}

impl Neg for &Bivector {
    type Output = Bivector;
    fn neg(self) -> Bivector {
        self * -1.0
    }
}
