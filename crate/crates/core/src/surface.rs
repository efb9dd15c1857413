//! Parametrized hypersurfaces of the pseudo-sphere and their fundamental forms.
//!
//! Conventions:
//!
//! * `gᵢⱼ = <∂ᵢφ, ∂ⱼφ>_ε` (positive definite for ε = +1, negative definite for
//!   ε = −1);
//! * the unit normal N satisfies `<N,N>_ε = ε` and is oriented so that
//!   `(φ, ∂₁φ, …, ∂ₙφ, N)` is positively oriented in ℝⁿ⁺²;
//! * `hᵢⱼ = <∂ᵢ∂ⱼφ, N>_ε`;
//! * principal curvatures solve `h e = λ g e`, computed through the
//!   equivalent definite problem `(εh) e = λ (εg) e`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::ambient::{AmbientVector, EpsilonSpace};
use crate::error::{GeometryError, Result};

/// Tolerance on `<φ,φ> − 1` at evaluated chart points.
pub const ON_SPACE_TOL: f64 = 1e-10;
/// Relative singular value below which a chart is not an immersion.
pub const IMMERSION_TOL: f64 = 1e-8;

/// Value, first and second coordinate derivatives of a chart at a point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub point: AmbientVector,
    pub first: Vec<AmbientVector>,
    /// Symmetric: `second[i][j] = ∂ᵢ∂ⱼφ`.
    pub second: Vec<Vec<AmbientVector>>,
}

/// A smooth map from an open set of ℝⁿ into ℝⁿ⁺².
///
/// Maps that can differentiate themselves exactly override [`SurfaceMap::jet`].
pub trait SurfaceMap: Send + Sync + fmt::Debug {
    /// Number of chart coordinates n.
    fn coords(&self) -> usize;

    fn eval(&self, u: &[f64]) -> AmbientVector;

    fn jet(&self, _u: &[f64]) -> Option<Jet> {
        None
    }

    /// Value and first derivatives; defaults to the full jet when available.
    fn first_jet(&self, u: &[f64]) -> Option<(AmbientVector, Vec<AmbientVector>)> {
        self.jet(u).map(|j| (j.point, j.first))
    }

    /// Rectangular coordinate domain, one `(lo, hi)` per coordinate.
    fn domain(&self) -> Vec<(f64, f64)>;

    /// Coordinates whose domain wraps around (angles).
    fn periodic(&self) -> Vec<bool> {
        vec![false; self.coords()]
    }
}

/// How chart derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DerivativeMode {
    /// Use the map's exact jet.
    #[default]
    Analytic,
    /// Central differences, optionally Richardson-extrapolated over (h, h/2).
    FiniteDifference { step: f64, richardson: bool },
}

/// Immersion `φ: U ⊂ ℝⁿ → 𝕊ⁿ⁺¹_ε` together with a derivative mode.
#[derive(Debug, Clone)]
pub struct HypersurfaceChart {
    space: EpsilonSpace,
    map: Arc<dyn SurfaceMap>,
    mode: DerivativeMode,
    /// Chart coordinate i reads map coordinate `perm[i]`.
    perm: Vec<usize>,
}

impl HypersurfaceChart {
    pub fn new(space: EpsilonSpace, map: Arc<dyn SurfaceMap>) -> Result<Self> {
        if map.coords() != space.n() {
            return Err(GeometryError::DimensionMismatch {
                expected: space.n(),
                got: map.coords(),
            });
        }
        let perm = (0..space.n()).collect();
        Ok(Self {
            space,
            map,
            mode: DerivativeMode::Analytic,
            perm,
        })
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Result<Self> {
        if let DerivativeMode::FiniteDifference { step, .. } = mode {
            if !(step > 1e-10 && step < 1e-1) {
                return Err(GeometryError::StepUnderflow(step));
            }
        }
        self.mode = mode;
        Ok(self)
    }

    /// The same surface with chart coordinates `i` and `j` exchanged; this
    /// reverses the orientation and therefore the normal.
    pub fn with_swapped_coordinates(mut self, i: usize, j: usize) -> Self {
        self.perm.swap(i, j);
        self
    }

    pub fn space(&self) -> &EpsilonSpace {
        &self.space
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn map(&self) -> &Arc<dyn SurfaceMap> {
        &self.map
    }

    pub fn domain(&self) -> Vec<(f64, f64)> {
        let d = self.map.domain();
        self.perm.iter().map(|&p| d[p]).collect()
    }

    pub fn periodic(&self) -> Vec<bool> {
        let p = self.map.periodic();
        self.perm.iter().map(|&i| p[i]).collect()
    }

    fn to_map_coords(&self, u: &[f64]) -> Vec<f64> {
        let mut m = vec![0.0; u.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            m[p] = u[i];
        }
        m
    }

    fn check_u(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.space.n() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.space.n(),
                got: u.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, u: &[f64]) -> Result<AmbientVector> {
        self.check_u(u)?;
        let p = self.map.eval(&self.to_map_coords(u));
        if p.len() != self.space.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.space.dim(),
                got: p.len(),
            });
        }
        let dev = self.space.dot(&p, &p) - 1.0;
        if dev.abs() > ON_SPACE_TOL {
            return Err(GeometryError::OffSpaceForm {
                u: u.to_vec(),
                deviation: dev,
            });
        }
        Ok(p)
    }

    fn permute_jet(&self, jet: Jet) -> Jet {
        let n = self.perm.len();
        let first = self.perm.iter().map(|&p| jet.first[p].clone()).collect();
        let second = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| jet.second[self.perm[i]][self.perm[j]].clone())
                    .collect()
            })
            .collect();
        Jet {
            point: jet.point,
            first,
            second,
        }
    }

    /// Value, first and second derivatives at `u`.
    pub fn jet(&self, u: &[f64]) -> Result<Jet> {
        let point = self.eval(u)?;
        let jet = match self.mode {
            DerivativeMode::Analytic => match self.map.jet(&self.to_map_coords(u)) {
                Some(j) => self.permute_jet(j),
                None => self.fd_jet(u, 1e-3, true)?,
            },
            DerivativeMode::FiniteDifference { step, richardson } => {
                self.fd_jet(u, step, richardson)?
            }
        };
        Ok(Jet { point, ..jet })
    }

    /// Value and first derivatives only.
    pub fn first_jet(&self, u: &[f64]) -> Result<(AmbientVector, Vec<AmbientVector>)> {
        let point = self.eval(u)?;
        match self.mode {
            DerivativeMode::Analytic => {
                if let Some((_, first)) = self.map.first_jet(&self.to_map_coords(u)) {
                    let first = self.perm.iter().map(|&p| first[p].clone()).collect();
                    return Ok((point, first));
                }
                let j = self.fd_jet(u, 1e-3, true)?;
                Ok((point, j.first))
            }
            DerivativeMode::FiniteDifference { .. } => {
                let j = self.jet(u)?;
                Ok((point, j.first))
            }
        }
    }

    fn fd_jet_at(&self, u: &[f64], h: f64) -> Result<Jet> {
        let n = self.space.n();
        let at = |du: &[(usize, f64)]| -> Result<AmbientVector> {
            let mut v = u.to_vec();
            for &(i, d) in du {
                v[i] += d;
            }
            self.eval(&v)
        };
        let center = at(&[])?;
        let mut first = Vec::with_capacity(n);
        let mut second = vec![vec![AmbientVector::zeros(self.space.dim()); n]; n];
        for i in 0..n {
            let p = at(&[(i, h)])?;
            let m = at(&[(i, -h)])?;
            first.push((&p - &m) / (2.0 * h));
            second[i][i] = (&p - &center * 2.0 + &m) / (h * h);
            for j in 0..i {
                let pp = at(&[(i, h), (j, h)])?;
                let pm = at(&[(i, h), (j, -h)])?;
                let mp = at(&[(i, -h), (j, h)])?;
                let mm = at(&[(i, -h), (j, -h)])?;
                let d = (pp - pm - mp + mm) / (4.0 * h * h);
                second[i][j] = d.clone();
                second[j][i] = d;
            }
        }
        Ok(Jet {
            point: center,
            first,
            second,
        })
    }

    fn fd_jet(&self, u: &[f64], h: f64, richardson: bool) -> Result<Jet> {
        let coarse = self.fd_jet_at(u, h)?;
        if !richardson {
            return Ok(coarse);
        }
        let fine = self.fd_jet_at(u, h / 2.0)?;
        let extrap = |c: &AmbientVector, f: &AmbientVector| (f * 4.0 - c) / 3.0;
        let first = coarse
            .first
            .iter()
            .zip(&fine.first)
            .map(|(c, f)| extrap(c, f))
            .collect();
        let second = coarse
            .second
            .iter()
            .zip(&fine.second)
            .map(|(cr, fr)| cr.iter().zip(fr).map(|(c, f)| extrap(c, f)).collect())
            .collect();
        Ok(Jet {
            point: coarse.point,
            first,
            second,
        })
    }

    /// Unit normal at `u`.
    pub fn unit_normal(&self, u: &[f64]) -> Result<AmbientVector> {
        let (p, first) = self.first_jet(u)?;
        normal_from_first_jet(&self.space, u, &p, &first)
    }

    /// First and second fundamental forms, principal data and mean curvature.
    pub fn fundamental_forms(&self, u: &[f64]) -> Result<FundamentalForms> {
        let jet = self.jet(u)?;
        FundamentalForms::from_jet(&self.space, u, jet)
    }
}

/// Unit normal from φ and its first derivatives.
pub fn normal_from_first_jet(
    space: &EpsilonSpace,
    u: &[f64],
    point: &AmbientVector,
    first: &[AmbientVector],
) -> Result<AmbientVector> {
    let d = space.dim();
    let n = space.n();
    // immersion: the tangent vectors must be independent
    let mut t = DMatrix::<f64>::zeros(d, n);
    for (i, f) in first.iter().enumerate() {
        t.set_column(i, f);
    }
    let sv = t.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > IMMERSION_TOL * smax.max(1.0)) {
        return Err(GeometryError::ImmersionFailure {
            u: u.to_vec(),
            sigma: smin,
        });
    }
    // Rows r·η are Euclidean-orthogonal to the cofactor vector c; then
    // <c, r>_ε = 0. cₖ is the determinant with eₖ appended as the last row.
    let mut m = DMatrix::<f64>::zeros(d, d);
    let rows = std::iter::once(point).chain(first.iter());
    for (i, r) in rows.enumerate() {
        for k in 0..d {
            m[(i, k)] = r[k] * space.weight(k);
        }
    }
    let mut normal = AmbientVector::zeros(d);
    for k in 0..d {
        let mut mk = m.clone();
        for c in 0..d {
            mk[(d - 1, c)] = if c == k { 1.0 } else { 0.0 };
        }
        normal[k] = mk.determinant();
    }
    let q = space.dot(&normal, &normal);
    if q * space.eps() <= 0.0 || !q.is_finite() {
        return Err(GeometryError::ImmersionFailure {
            u: u.to_vec(),
            sigma: q,
        });
    }
    normal /= q.abs().sqrt();
    let mut frame = DMatrix::<f64>::zeros(d, d);
    frame.set_column(0, point);
    for (i, f) in first.iter().enumerate() {
        frame.set_column(i + 1, f);
    }
    frame.set_column(d - 1, &normal);
    if frame.determinant() < 0.0 {
        normal = -normal;
    }
    Ok(normal)
}

/// First/second fundamental forms and principal data at a chart point.
#[derive(Debug, Clone)]
pub struct FundamentalForms {
    pub point: AmbientVector,
    /// Coordinate tangent vectors `∂ᵢφ`.
    pub tangents: Vec<AmbientVector>,
    pub first: DMatrix<f64>,
    pub second: DMatrix<f64>,
    pub normal: AmbientVector,
    /// Ascending.
    pub principal_curvatures: Vec<f64>,
    /// `eₖ`, orthonormal for the positive form `ε<·,·>_ε`.
    pub principal_directions: Vec<AmbientVector>,
    /// Column k holds the coordinates of `eₖ` on `∂₁φ, …, ∂ₙφ`.
    pub direction_coords: DMatrix<f64>,
    pub mean_curvature: f64,
}

impl FundamentalForms {
    pub fn from_jet(space: &EpsilonSpace, u: &[f64], jet: Jet) -> Result<Self> {
        let n = space.n();
        let normal = normal_from_first_jet(space, u, &jet.point, &jet.first)?;
        let first = DMatrix::from_fn(n, n, |i, j| space.dot(&jet.first[i], &jet.first[j]));
        let second = DMatrix::from_fn(n, n, |i, j| {
            let a = space.dot(&jet.second[i][j], &normal);
            let b = space.dot(&jet.second[j][i], &normal);
            0.5 * (a + b)
        });
        let (curv, coords) = generalized_eigen(&(&first * space.eps()), &(&second * space.eps()))?;
        let directions: Vec<AmbientVector> = (0..n)
            .map(|k| {
                let mut e = AmbientVector::zeros(space.dim());
                for i in 0..n {
                    e.axpy(coords[(i, k)], &jet.first[i], 1.0);
                }
                e
            })
            .collect();
        let mean = curv.iter().sum::<f64>() / n as f64;
        Ok(Self {
            point: jet.point,
            tangents: jet.first,
            first,
            second,
            normal,
            principal_curvatures: curv,
            principal_directions: directions,
            direction_coords: coords,
            mean_curvature: mean,
        })
    }

    /// `g⁻¹h`.
    pub fn shape_matrix(&self) -> Result<DMatrix<f64>> {
        self.first
            .clone()
            .lu()
            .solve(&self.second)
            .ok_or_else(|| GeometryError::EigenFailure("singular first fundamental form".into()))
    }

    /// `Σ λₖ cₖ cₖᵀ g`, which equals `g⁻¹h` when the principal data are right.
    pub fn reconstructed_shape_matrix(&self, space: &EpsilonSpace) -> DMatrix<f64> {
        let n = self.principal_curvatures.len();
        let mut acc = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let c = self.direction_coords.column(k);
            acc += c * c.transpose() * self.principal_curvatures[k];
        }
        acc * &self.first * space.eps()
    }

    /// `maxᵢ |λᵢ − mean(λ)|`.
    pub fn umbilicity_defect(&self) -> f64 {
        umbilicity_defect(&self.principal_curvatures)
    }

    /// Whether all principal curvatures share one strict sign, by at least `tol`.
    pub fn is_convex(&self, tol: f64) -> bool {
        let all_pos = self.principal_curvatures.iter().all(|&l| l > tol);
        let all_neg = self.principal_curvatures.iter().all(|&l| l < -tol);
        all_pos || all_neg
    }

    /// `ε<a, b>_ε` summed over the given coordinates, i.e. the coordinate
    /// vector of an ambient tangent on the principal frame.
    pub fn principal_coords(&self, space: &EpsilonSpace, a: &AmbientVector) -> Vec<f64> {
        self.principal_directions
            .iter()
            .map(|e| space.tangent_dot(a, e))
            .collect()
    }
}

/// `maxᵢ |λᵢ − mean(λ)|`.
pub fn umbilicity_defect(curvatures: &[f64]) -> f64 {
    if curvatures.is_empty() {
        return 0.0;
    }
    let mean = curvatures.iter().sum::<f64>() / curvatures.len() as f64;
    curvatures
        .iter()
        .fold(0.0_f64, |m, l| m.max((l - mean).abs()))
}

/// Solves `Q c = λ P c` for symmetric Q and symmetric positive definite P.
///
/// Returns ascending eigenvalues and P-orthonormal eigenvectors as columns.
pub fn generalized_eigen(p: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = p.nrows();
    let psym = (p + p.transpose()) * 0.5;
    let qsym = (q + q.transpose()) * 0.5;
    let chol = Cholesky::new(psym)
        .ok_or_else(|| GeometryError::EigenFailure("metric is not definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| GeometryError::EigenFailure("singular Cholesky factor".into()))?;
    let c = &linv * qsym * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let lt_inv = linv.transpose();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let col: DVector<f64> = &lt_inv * eig.eigenvectors.column(i);
        vectors.set_column(k, &col);
    }
    Ok((values, vectors))
}
