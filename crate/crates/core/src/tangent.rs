//! The tangent hypersurface ℋ(Σ) of a hypersurface Σ ⊂ 𝕊ⁿ⁺¹_ε.
//!
//! A point of ℋ(Σ) is the oriented geodesic `φ(u) ∧ v(u, θ)` where
//! `v = compose(e(u), θ)` over the oriented principal frame `e₁ … eₙ` of Σ at
//! u. The unit normal is `N̄ = v ∧ N`, i.e. the tangent pair `(0, N)`.
//!
//! The shape operator is `A X = −(D_X N̄)ᵀ`, the negated tangential part of
//! the ambient derivative. It is computed by two independent routes:
//!
//! * finite differences of the point map `(u, θ) ↦ (φ ∧ v, v ∧ N)` in Λ²
//!   coordinates followed by [`GeodesicPoint::tangent_project`];
//! * closed-form images of the principal directions,
//!   `A(dφ̄ eₖ) = (ε gₙₖ N, λₖ Σ_{l<n} g^{kl} v_l)` and `A(dφ̄ ∂θₖ) = 0`.
//!
//! Away from the base point the frame is transported by tangential projection
//! followed by Gram-Schmidt. This field is smooth also at umbilic points and
//! has no tangential connection at the base, which is what the closed-form
//! route assumes.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ambient::{wedge, AmbientVector, Bivector, EpsilonSpace};
use crate::catalog::POLE_MARGIN;
use crate::error::{GeometryError, Result};
use crate::frame::{
    angle_directions, coefficient_derivatives, coefficients, coefficients_generic, frame_deviation,
    HypersphericalAngles,
};
use crate::geodesic::{gram_matrix, GeodesicPoint, TangentAtGeodesic};
use crate::surface::{normal_from_first_jet, FundamentalForms, HypersurfaceChart};

/// Largest accepted Euclidean residual of a projected finite-difference basis vector.
pub const PROJECTION_TOL: f64 = 1e-6;
/// Smallest accepted `min|σ| / max|σ|` over the eigenvalues of the basis Gram matrix.
pub const GRAM_RCOND_MIN: f64 = 1e-8;
/// Relative residual allowed when expressing a structure field in the basis.
pub const EXPRESSION_TOL_ANALYTIC: f64 = 1e-8;
pub const EXPRESSION_TOL_FD: f64 = 1e-6;
/// Accepted range for finite-difference steps on (u, θ).
pub const MIN_STEP: f64 = 1e-8;
pub const MAX_STEP: f64 = 1e-2;
/// Tolerance for accepting a supplied frame as principal.
pub const PRINCIPAL_TOL: f64 = 1e-8;

/// How a shape-operator sample was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Fd,
    Analytic,
}

/// Structure vector fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureField {
    /// `ξ = −𝕁N̄`.
    Xi,
    /// `ξ' = −𝕁'N̄` (n = 2).
    XiPrime,
}

/// A point of ℋ(Σ) with its surface data.
#[derive(Debug, Clone)]
pub struct TangentHypersurfacePoint {
    chart: HypersurfaceChart,
    u: Vec<f64>,
    angles: HypersphericalAngles,
    forms: FundamentalForms,
    frame: Vec<AmbientVector>,
    curvatures: Vec<f64>,
    /// Column k: coordinates of `eₖ` on `∂₁φ … ∂ₙφ`.
    frame_coords: DMatrix<f64>,
    geodesic: Arc<GeodesicPoint>,
}

impl TangentHypersurfacePoint {
    /// Point over the principal frame at u, oriented so that
    /// `det(φ, e₁, …, eₙ, N) > 0`.
    pub fn new(
        chart: &HypersurfaceChart,
        u: &[f64],
        angles: &HypersphericalAngles,
    ) -> Result<Self> {
        let forms = chart.fundamental_forms(u)?;
        let mut frame = forms.principal_directions.clone();
        let mut coords = forms.direction_coords.clone();
        let n = frame.len();
        let d = chart.space().dim();
        let mut m = DMatrix::<f64>::zeros(d, d);
        m.set_column(0, &forms.point);
        for (k, e) in frame.iter().enumerate() {
            m.set_column(k + 1, e);
        }
        m.set_column(d - 1, &forms.normal);
        if m.determinant() < 0.0 {
            frame[n - 1] = -&frame[n - 1];
            let flipped = -coords.column(n - 1);
            coords.set_column(n - 1, &flipped);
        }
        let curvatures = forms.principal_curvatures.clone();
        Self::assemble(chart, u, angles, forms, frame, curvatures, coords)
    }

    /// Point over a caller-supplied orthonormal frame of `T_uΣ`, which must
    /// consist of principal directions (any frame qualifies at umbilic points).
    pub fn with_frame(
        chart: &HypersurfaceChart,
        u: &[f64],
        angles: &HypersphericalAngles,
        frame: Vec<AmbientVector>,
    ) -> Result<Self> {
        let space = chart.space();
        let forms = chart.fundamental_forms(u)?;
        let n = space.n();
        if frame.len() != n {
            return Err(GeometryError::FrameSize {
                expected: n,
                got: frame.len(),
            });
        }
        let dev = frame_deviation(space, &frame);
        if dev > crate::frame::FRAME_TOL {
            return Err(GeometryError::NonOrthonormalFrame { deviation: dev });
        }
        let ginv =
            forms.first.clone().try_inverse().ok_or_else(|| {
                GeometryError::EigenFailure("singular first fundamental form".into())
            })?;
        let shape = &ginv * &forms.second;
        let mut coords = DMatrix::<f64>::zeros(n, n);
        let mut curvatures = Vec::with_capacity(n);
        let mut worst: f64 = 0.0;
        for (k, e) in frame.iter().enumerate() {
            let rhs = DVector::from_iterator(n, forms.tangents.iter().map(|t| space.dot(t, e)));
            let c = &ginv * rhs;
            let mut back = AmbientVector::zeros(space.dim());
            for i in 0..n {
                back.axpy(c[i], &forms.tangents[i], 1.0);
            }
            worst = worst.max((&back - e).norm());
            let lambda = space.eps() * (c.transpose() * &forms.second * &c)[(0, 0)];
            worst = worst.max((&shape * &c - &c * lambda).norm() / lambda.abs().max(1.0));
            coords.set_column(k, &c);
            curvatures.push(lambda);
        }
        if worst > PRINCIPAL_TOL {
            return Err(GeometryError::FrameNotPrincipal { residual: worst });
        }
        Self::assemble(chart, u, angles, forms, frame, curvatures, coords)
    }

    fn assemble(
        chart: &HypersurfaceChart,
        u: &[f64],
        angles: &HypersphericalAngles,
        forms: FundamentalForms,
        frame: Vec<AmbientVector>,
        curvatures: Vec<f64>,
        frame_coords: DMatrix<f64>,
    ) -> Result<Self> {
        let space = *chart.space();
        if angles.n() != space.n() {
            return Err(GeometryError::DimensionMismatch {
                expected: space.n(),
                got: angles.n(),
            });
        }
        let v = crate::frame::compose(&space, &frame, angles)?;
        let geodesic = Arc::new(GeodesicPoint::new(space, forms.point.clone(), v)?);
        Ok(Self {
            chart: chart.clone(),
            u: u.to_vec(),
            angles: angles.clone(),
            forms,
            frame,
            curvatures,
            frame_coords,
            geodesic,
        })
    }

    pub fn chart(&self) -> &HypersurfaceChart {
        &self.chart
    }

    pub fn space(&self) -> &EpsilonSpace {
        self.chart.space()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn angles(&self) -> &HypersphericalAngles {
        &self.angles
    }

    pub fn forms(&self) -> &FundamentalForms {
        &self.forms
    }

    /// The frame `e₁ … eₙ` used by compose.
    pub fn frame(&self) -> &[AmbientVector] {
        &self.frame
    }

    /// Principal curvatures matching [`Self::frame`].
    pub fn curvatures(&self) -> &[f64] {
        &self.curvatures
    }

    pub fn geodesic(&self) -> &Arc<GeodesicPoint> {
        &self.geodesic
    }

    pub fn v(&self) -> &AmbientVector {
        self.geodesic.v()
    }

    pub fn surface_normal(&self) -> &AmbientVector {
        &self.forms.normal
    }

    fn n(&self) -> usize {
        self.space().n()
    }

    /// `N̄ = v ∧ N`.
    pub fn normal(&self) -> TangentAtGeodesic {
        let d = self.space().dim();
        self.geodesic
            .tangent_rejecting(&AmbientVector::zeros(d), &self.forms.normal)
    }

    /// `ξ = −𝕁N̄ = ε(N, 0)`.
    pub fn xi(&self) -> TangentAtGeodesic {
        -&self.normal().j()
    }

    /// `ξ' = −𝕁'N̄ = (0, −J'N)`.
    pub fn xi_prime(&self) -> Result<TangentAtGeodesic> {
        Ok(-&self.normal().j_prime()?)
    }

    pub fn structure_field(&self, field: StructureField) -> Result<TangentAtGeodesic> {
        match field {
            StructureField::Xi => Ok(self.xi()),
            StructureField::XiPrime => self.xi_prime(),
        }
    }

    /// `(N̄, ξ, ξ')`, the last only for n = 2.
    pub fn normal_and_structure(
        &self,
    ) -> (
        TangentAtGeodesic,
        TangentAtGeodesic,
        Option<TangentAtGeodesic>,
    ) {
        (self.normal(), self.xi(), self.xi_prime().ok())
    }

    /// `∂θₖ v`, unnormalized.
    fn angle_derivatives(&self) -> Vec<AmbientVector> {
        coefficient_derivatives(&self.angles)
            .into_iter()
            .map(|dc| combine(self.space(), &self.frame, &dc))
            .collect()
    }

    /// Frame field near u: base frame projected to `T_{u'}Σ` and
    /// re-orthonormalized.
    pub fn transported_frame(
        &self,
        u: &[f64],
    ) -> Result<(AmbientVector, Vec<AmbientVector>, AmbientVector)> {
        let space = self.space();
        let (p, first) = self.chart.first_jet(u)?;
        let normal = normal_from_first_jet(space, u, &p, &first)?;
        let eps = space.eps();
        let projected: Vec<AmbientVector> = self
            .frame
            .iter()
            .map(|e| {
                let mut w = e.clone();
                w.axpy(-space.dot(e, &p), &p, 1.0);
                w.axpy(-eps * space.dot(e, &normal), &normal, 1.0);
                w
            })
            .collect();
        let signs = vec![if eps > 0.0 { 1i8 } else { -1 }; projected.len()];
        let frame = space.gram_schmidt(&projected, &signs)?;
        Ok((p, frame, normal))
    }

    /// `(φ, v, N)` at parameters `q = (u', θ')`.
    fn state(&self, q: &[f64]) -> Result<(AmbientVector, AmbientVector, AmbientVector)> {
        let n = self.n();
        let (p, frame, normal) = self.transported_frame(&q[..n])?;
        let c = coefficients_generic::<f64>(&q[n..]);
        Ok((p, combine(self.space(), &frame, &c), normal))
    }

    fn base_params(&self) -> Vec<f64> {
        let mut q = self.u.clone();
        q.extend(self.angles.to_vec());
        q
    }

    fn central_difference(&self, a: usize, h: f64) -> Result<(Bivector, Bivector)> {
        let mut qp = self.base_params();
        let mut qm = qp.clone();
        qp[a] += h;
        qm[a] -= h;
        let (pp, vp, np) = self.state(&qp)?;
        let (pm, vm, nm) = self.state(&qm)?;
        let db = &(&wedge(&pp, &vp)? - &wedge(&pm, &vm)?) * (0.5 / h);
        let dn = &(&wedge(&vp, &np)? - &wedge(&vm, &nm)?) * (0.5 / h);
        Ok((db, dn))
    }

    /// Derivatives of `φ∧v` and `v∧N` along each parameter, as Λ² vectors.
    fn parameter_derivatives(
        &self,
        step: f64,
        richardson: bool,
    ) -> Result<Vec<(Bivector, Bivector)>> {
        if !(step > MIN_STEP && step < MAX_STEP) {
            return Err(GeometryError::StepUnderflow(step));
        }
        (0..2 * self.n() - 1)
            .map(|a| {
                let coarse = self.central_difference(a, step)?;
                if !richardson {
                    return Ok(coarse);
                }
                let fine = self.central_difference(a, step / 2.0)?;
                let ex = |c: &Bivector, f: &Bivector| &(&(f * 4.0) - c) * (1.0 / 3.0);
                Ok((ex(&coarse.0, &fine.0), ex(&coarse.1, &fine.1)))
            })
            .collect()
    }

    /// `dφ̄` of the n surface coordinate directions and the n − 1 angle
    /// directions, by finite differences and tangent projection.
    pub fn tangent_basis(&self, step: f64, richardson: bool) -> Result<Vec<TangentAtGeodesic>> {
        let derivs = self.parameter_derivatives(step, richardson)?;
        Ok(self.project_fd(&derivs)?.0)
    }

    fn project_fd(
        &self,
        derivs: &[(Bivector, Bivector)],
    ) -> Result<(Vec<TangentAtGeodesic>, Vec<TangentAtGeodesic>, f64, f64)> {
        let mut basis = Vec::with_capacity(derivs.len());
        let mut images = Vec::with_capacity(derivs.len());
        let mut basis_res: f64 = 0.0;
        let mut image_res: f64 = 0.0;
        for (db, dn) in derivs {
            let (b, rb) = self.geodesic.tangent_project(db)?;
            let (t, rn) = self.geodesic.tangent_project(dn)?;
            basis_res = basis_res.max(rb / db.norm().max(1.0));
            image_res = image_res.max(rn);
            basis.push(b);
            images.push(-&t);
        }
        if basis_res > PROJECTION_TOL {
            return Err(GeometryError::NotTangent {
                residual: basis_res,
            });
        }
        Ok((basis, images, basis_res, image_res))
    }

    /// Shape operator from finite differences of the point map.
    pub fn shape_operator_fd(&self, step: f64, richardson: bool) -> Result<ShapeOperatorSample> {
        let derivs = self.parameter_derivatives(step, richardson)?;
        let (basis, images, basis_res, _) = self.project_fd(&derivs)?;
        ShapeOperatorSample::new(Method::Fd, basis, images, self.normal(), basis_res)
    }

    /// `dφ̄(∂uᵢ)` and `dφ̄(∂θₖ)` in closed form.
    pub fn analytic_basis(&self) -> Vec<TangentAtGeodesic> {
        let space = self.space();
        let eps = space.eps();
        let v = self.v();
        let normal = &self.forms.normal;
        let d = space.dim();
        let coeffs = coefficients(&self.angles);
        let mut out = Vec::with_capacity(2 * self.n() - 1);
        for t in &self.forms.tangents {
            // h(v, ∂ᵢφ) = Σ cₖ λₖ <eₖ, ∂ᵢφ>
            let hv: f64 = (0..self.n())
                .map(|k| coeffs[k] * self.curvatures[k] * space.dot(&self.frame[k], t))
                .sum();
            let mut y = -t;
            y.axpy(space.tangent_dot(t, v), v, 1.0);
            out.push(self.geodesic.tangent_rejecting(&(normal * (eps * hv)), &y));
        }
        let zero = AmbientVector::zeros(d);
        for dv in self.angle_derivatives() {
            out.push(self.geodesic.tangent_rejecting(&dv, &zero));
        }
        out
    }

    /// `dφ̄(eₖ)` for the frame directions.
    pub fn principal_basis(&self, basis: &[TangentAtGeodesic]) -> Vec<TangentAtGeodesic> {
        let n = self.n();
        (0..n)
            .map(|k| {
                let c: Vec<f64> = self.frame_coords.column(k).iter().copied().collect();
                TangentAtGeodesic::combination(&self.geodesic, &c, &basis[..n])
            })
            .collect()
    }

    /// `A(dφ̄ eₖ) = (ε gₙₖ N, λₖ Σ_{l<n} g^{kl} v_l)` where `v_l = Σ g_{lk} eₖ`,
    /// `v_l` (l < n) being the unit angle directions and `vₙ = v`.
    pub fn principal_images(&self) -> Result<Vec<TangentAtGeodesic>> {
        let space = self.space();
        let n = self.n();
        let mut vs = angle_directions(space, &self.frame, &self.angles)?;
        vs.push(self.v().clone());
        let g = DMatrix::from_fn(n, n, |l, k| space.tangent_dot(&vs[l], &self.frame[k]));
        let ginv = g.clone().try_inverse().ok_or_else(|| {
            GeometryError::InvalidParameter("angle directions degenerate at a pole".into())
        })?;
        let normal = &self.forms.normal;
        Ok((0..n)
            .map(|k| {
                let x = normal * (space.eps() * g[(n - 1, k)]);
                let mut y = AmbientVector::zeros(space.dim());
                for l in 0..n - 1 {
                    y.axpy(self.curvatures[k] * ginv[(k, l)], &vs[l], 1.0);
                }
                self.geodesic.tangent_rejecting(&x, &y)
            })
            .collect())
    }

    /// n = 2 closed forms `A(dφ̄e₁) = (ε cosθ N, −λ₁ sinθ v⊥)`,
    /// `A(dφ̄e₂) = (ε sinθ N, λ₂ cosθ v⊥)` with `v⊥ = ∂θ v`.
    pub fn planar_images(&self) -> Result<[TangentAtGeodesic; 2]> {
        let space = self.space();
        space.require_n(2)?;
        let eps = space.eps();
        let (s, c) = self.angles.theta1.sin_cos();
        let vp = &self.angle_derivatives()[0];
        let normal = &self.forms.normal;
        let (l1, l2) = (self.curvatures[0], self.curvatures[1]);
        Ok([
            self.geodesic
                .tangent_rejecting(&(normal * (eps * c)), &(vp * (-l1 * s))),
            self.geodesic
                .tangent_rejecting(&(normal * (eps * s)), &(vp * (l2 * c))),
        ])
    }

    /// Shape operator from the closed-form images in the closed-form basis.
    pub fn shape_operator_analytic(&self) -> Result<ShapeOperatorSample> {
        let n = self.n();
        let basis = self.analytic_basis();
        let principal = self.principal_images()?;
        let mut images = Vec::with_capacity(2 * n - 1);
        for t in &self.forms.tangents {
            // ∂ᵢφ = Σₖ aᵢₖ eₖ
            let a: Vec<f64> = self
                .frame
                .iter()
                .map(|e| self.space().tangent_dot(t, e))
                .collect();
            images.push(TangentAtGeodesic::combination(
                &self.geodesic,
                &a,
                &principal,
            ));
        }
        for _ in 1..n {
            images.push(self.geodesic.zero_tangent());
        }
        ShapeOperatorSample::new(Method::Analytic, basis, images, self.normal(), 0.0)
    }

    /// Shape operator by the requested method.
    pub fn shape_operator(
        &self,
        method: Method,
        step: f64,
        richardson: bool,
    ) -> Result<ShapeOperatorSample> {
        match method {
            Method::Fd => self.shape_operator_fd(step, richardson),
            Method::Analytic => self.shape_operator_analytic(),
        }
    }

    /// `λ₊ = λ₁cos²θ + λ₂sin²θ` and `λ₋ = −(λ₁sin²θ + λ₂cos²θ)` (n = 2).
    pub fn lambda_pm(&self) -> Result<(f64, f64)> {
        self.space().require_n(2)?;
        let (s, c) = self.angles.theta1.sin_cos();
        let (l1, l2) = (self.curvatures[0], self.curvatures[1]);
        Ok((l1 * c * c + l2 * s * s, -(l1 * s * s + l2 * c * c)))
    }

    /// `𝔾(A·,·)` on `(e₀, dφ̄e₁, dφ̄e₂)` against its closed form (n = 2).
    pub fn h_matrix(&self, sample: &ShapeOperatorSample) -> Result<HMatrixReport> {
        self.space().require_n(2)?;
        let triple = self.principal_triple(sample);
        let assembled = DMatrix::from_fn(3, 3, |a, b| triple.1[a].g(&triple.0[b]));
        let (s2, c2) = (2.0 * self.angles.theta1).sin_cos();
        let (l1, l2) = (self.curvatures[0], self.curvatures[1]);
        let h = 0.5 * (l1 + l2);
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(3, 3, &[
            0.0, 0.0, 0.0,
            0.0, l1 * c2, h * s2,
            0.0, h * s2, -l2 * c2,
        ]);
        let (lp, lm) = self.lambda_pm()?;
        let sym = (&assembled + assembled.transpose()) * 0.5;
        let mut eig: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let mut target = vec![0.0, lp, lm];
        target.sort_by(f64::total_cmp);
        let eigen_residual = eig
            .iter()
            .zip(&target)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let block = sym.view((1, 1), (2, 2));
        let trace = block.trace();
        let det = block[(0, 0)] * block[(1, 1)] - block[(0, 1)] * block[(1, 0)];
        Ok(HMatrixReport {
            entry_residual: (&assembled - &expected).amax(),
            assembled,
            expected,
            eigenvalues: eig,
            eigen_residual,
            lambda_plus: lp,
            lambda_minus: lm,
            trace_residual: (trace - (l1 - l2) * c2).abs(),
            product_residual: (det - (-l1 * l2 * c2 * c2 - h * h * s2 * s2)).abs(),
            closed_form_trace_residual: (lp + lm - (l1 - l2) * c2).abs(),
            closed_form_product_residual: (lp * lm - (-l1 * l2 * c2 * c2 - h * h * s2 * s2)).abs(),
        })
    }

    /// `(e₀, dφ̄e₁, dφ̄e₂)` and their images under A.
    fn principal_triple(
        &self,
        sample: &ShapeOperatorSample,
    ) -> (Vec<TangentAtGeodesic>, Vec<TangentAtGeodesic>) {
        let mut ts = vec![sample.basis[2].clone()];
        let mut images = vec![sample.images[2].clone()];
        for k in 0..2 {
            let c: Vec<f64> = self.frame_coords.column(k).iter().copied().collect();
            ts.push(TangentAtGeodesic::combination(
                &self.geodesic,
                &c,
                &sample.basis[..2],
            ));
            images.push(TangentAtGeodesic::combination(
                &self.geodesic,
                &c,
                &sample.images[..2],
            ));
        }
        (ts, images)
    }

    /// α-plane checks at this point (n = 2, convex Σ).
    pub fn alpha_plane_check(&self, sample: &ShapeOperatorSample) -> Result<AlphaPlaneReport> {
        self.space().require_n(2)?;
        let (l1, l2) = (self.curvatures[0], self.curvatures[1]);
        if l1 * l2 <= 0.0 {
            return Err(GeometryError::NonConvex {
                u: self.u.clone(),
                curvatures: self.curvatures.clone(),
            });
        }
        let hm = self.h_matrix(sample)?;
        let (ts, _) = self.principal_triple(sample);
        let block = hm.assembled.view((1, 1), (2, 2)).into_owned();
        let block = (&block + block.transpose()) * 0.5;
        let eig = block.symmetric_eigen();
        let k = if (eig.eigenvalues[0] - hm.lambda_plus).abs()
            <= (eig.eigenvalues[1] - hm.lambda_plus).abs()
        {
            0
        } else {
            1
        };
        let x = eig.eigenvectors.column(k);
        let v_plus = TangentAtGeodesic::combination(&self.geodesic, &[x[0], x[1]], &ts[1..]);
        let e0 = ts[0].clone();
        let plane = [e0.clone(), v_plus.clone()];
        let j_res = plane_residual(&plane, &e0.j()).max(plane_residual(&plane, &v_plus.j()));
        let jp_res =
            plane_residual(&plane, &e0.j_prime()?).max(plane_residual(&plane, &v_plus.j_prime()?));
        let xi_p = self.xi_prime()?;
        let xi_res = plane_residual(&plane, &xi_p);
        // 𝕁e₀ against 𝕁'N̄
        let je0 = e0.j();
        let jpn = self.normal().j_prime()?;
        let scale = je0.euclidean_norm().max(1e-300);
        let plus = (&je0 - &jpn).euclidean_norm() / scale;
        let minus = (&je0 + &jpn).euclidean_norm() / scale;
        let (sign, rel) = if plus <= minus {
            (1.0, plus)
        } else {
            (-1.0, minus)
        };
        Ok(AlphaPlaneReport {
            lambda_plus: hm.lambda_plus,
            lambda_minus: hm.lambda_minus,
            product: hm.lambda_plus * hm.lambda_minus,
            j_invariance_residual: j_res,
            xi_prime_residual: xi_res,
            j_prime_invariance_residual: jp_res,
            relation_sign: sign,
            relation_residual: rel,
        })
    }
}

fn combine(space: &EpsilonSpace, frame: &[AmbientVector], coeffs: &[f64]) -> AmbientVector {
    let mut v = AmbientVector::zeros(space.dim());
    for (e, c) in frame.iter().zip(coeffs) {
        v.axpy(*c, e, 1.0);
    }
    v
}

fn stacked(t: &TangentAtGeodesic) -> DVector<f64> {
    let x = t.x_part();
    let y = t.y_part();
    DVector::from_iterator(x.len() + y.len(), x.iter().chain(y.iter()).copied())
}

/// Relative Euclidean distance of `t` from `span(plane)`.
fn plane_residual(plane: &[TangentAtGeodesic], t: &TangentAtGeodesic) -> f64 {
    let cols: Vec<DVector<f64>> = plane.iter().map(stacked).collect();
    let m = DMatrix::from_columns(&cols);
    let target = stacked(t);
    let norm = target.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let svd = m.clone().svd(true, true);
    match svd.solve(&target, 1e-12) {
        Ok(c) => (&m * c - &target).norm() / norm,
        Err(_) => f64::INFINITY,
    }
}

/// Shape operator of ℋ(Σ) at one point, on the (2n − 1)-vector basis
/// `dφ̄(∂u₁ … ∂uₙ, ∂θ₁ … ∂θ_{n−1})`.
#[derive(Debug, Clone)]
pub struct ShapeOperatorSample {
    pub method: Method,
    pub basis: Vec<TangentAtGeodesic>,
    /// `A(basisⱼ)` as tangents at the base geodesic.
    pub images: Vec<TangentAtGeodesic>,
    /// `𝔾(basisᵢ, basisⱼ)`.
    pub gram: DMatrix<f64>,
    /// Column j holds the coordinates of `A(basisⱼ)`.
    pub a_matrix: DMatrix<f64>,
    pub normal: TangentAtGeodesic,
    pub gram_rcond: f64,
    /// Largest relative projection residual of the basis (zero for analytic).
    pub basis_residual: f64,
    /// Largest relative residual of `A(basisⱼ) − Σ Aᵢⱼ basisᵢ`.
    pub image_residual: f64,
}

impl ShapeOperatorSample {
    pub fn new(
        method: Method,
        basis: Vec<TangentAtGeodesic>,
        images: Vec<TangentAtGeodesic>,
        normal: TangentAtGeodesic,
        basis_residual: f64,
    ) -> Result<Self> {
        let gram = gram_matrix(&basis, |a, b| a.g(b));
        let sym = (&gram + gram.transpose()) * 0.5;
        let eig = sym.symmetric_eigenvalues();
        let big = eig.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let small = eig.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        let rcond = if big > 0.0 { small / big } else { 0.0 };
        if !(rcond >= GRAM_RCOND_MIN) {
            return Err(GeometryError::SingularGram { rcond });
        }
        let k = basis.len();
        let rhs = DMatrix::from_fn(k, k, |i, j| basis[i].g(&images[j]));
        let a_matrix = gram
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or(GeometryError::SingularGram { rcond })?;
        let base = Arc::clone(basis[0].base());
        let mut image_residual: f64 = 0.0;
        for (j, img) in images.iter().enumerate() {
            let c: Vec<f64> = a_matrix.column(j).iter().copied().collect();
            let rebuilt = TangentAtGeodesic::combination(&base, &c, &basis);
            let scale = img.euclidean_norm().max(1.0);
            image_residual = image_residual.max((img - &rebuilt).euclidean_norm() / scale);
        }
        Ok(Self {
            method,
            basis,
            images,
            gram,
            a_matrix,
            normal,
            gram_rcond: rcond,
            basis_residual,
            image_residual,
        })
    }

    /// `max |(G A) − (G A)ᵀ|`.
    pub fn self_adjointness_defect(&self) -> f64 {
        let ga = &self.gram * &self.a_matrix;
        (&ga - ga.transpose()).amax()
    }

    /// `max(|𝔾(N̄, basisᵢ)|, |𝔾(N̄, N̄) − 1|)`.
    pub fn normal_defect(&self) -> f64 {
        let unit = (self.normal.g(&self.normal) - 1.0).abs();
        self.basis
            .iter()
            .fold(unit, |m, b| m.max(self.normal.g(b).abs()))
    }

    /// Largest Euclidean norm of the images of the angle directions.
    pub fn angle_image_norm(&self) -> f64 {
        let n = (self.basis.len() + 1) / 2;
        self.images[n..]
            .iter()
            .fold(0.0_f64, |m, t| m.max(t.euclidean_norm()))
    }

    pub fn expression_tolerance(&self) -> f64 {
        match self.method {
            Method::Fd => EXPRESSION_TOL_FD,
            Method::Analytic => EXPRESSION_TOL_ANALYTIC,
        }
    }

    /// Coordinates of `t` on the basis and the relative residual.
    pub fn express(&self, t: &TangentAtGeodesic) -> Result<(Vec<f64>, f64)> {
        let k = self.basis.len();
        let rhs = DVector::from_iterator(k, self.basis.iter().map(|b| b.g(t)));
        let c = self
            .gram
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or(GeometryError::SingularGram {
                rcond: self.gram_rcond,
            })?;
        let c: Vec<f64> = c.iter().copied().collect();
        let rebuilt = TangentAtGeodesic::combination(self.basis[0].base(), &c, &self.basis);
        let scale = t.euclidean_norm().max(1e-300);
        Ok((c, (t - &rebuilt).euclidean_norm() / scale))
    }

    /// `A t` for a tangent in the span of the basis.
    pub fn apply(&self, t: &TangentAtGeodesic) -> Result<(TangentAtGeodesic, f64)> {
        let (c, res) = self.express(t)?;
        Ok((
            TangentAtGeodesic::combination(self.basis[0].base(), &c, &self.images),
            res,
        ))
    }

    /// μ and the relative residual of `A f − μ f`.
    pub fn hopf_check(&self, field: &TangentAtGeodesic) -> Result<HopfEntry> {
        let (w, expr) = self.apply(field)?;
        if expr > self.expression_tolerance() {
            return Err(GeometryError::NotExpressible { residual: expr });
        }
        let ff = field.g(field);
        if ff.abs() < 1e-14 {
            return Err(GeometryError::InvalidParameter(
                "structure field is null".into(),
            ));
        }
        let mu = w.g(field) / ff;
        let scale = w.euclidean_norm().max(field.euclidean_norm());
        let residual = (&w - &(field * mu)).euclidean_norm() / scale;
        Ok(HopfEntry {
            mu,
            residual,
            expression_residual: expr,
        })
    }
}

/// Outcome of one Hopf test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfEntry {
    pub mu: f64,
    pub residual: f64,
    pub expression_residual: f64,
}

/// `𝔾(A·,·)` on `(e₀, dφ̄e₁, dφ̄e₂)`.
#[derive(Debug, Clone)]
pub struct HMatrixReport {
    pub assembled: DMatrix<f64>,
    pub expected: DMatrix<f64>,
    pub entry_residual: f64,
    /// Ascending eigenvalues of the symmetrized assembled matrix.
    pub eigenvalues: Vec<f64>,
    /// Against the ascending set `{0, λ₊, λ₋}`.
    pub eigen_residual: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Trace and determinant of the lower 2×2 block against the closed forms.
    pub trace_residual: f64,
    pub product_residual: f64,
    /// The same identities evaluated on the closed-form λ±.
    pub closed_form_trace_residual: f64,
    pub closed_form_product_residual: f64,
}

/// α-plane diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaPlaneReport {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub product: f64,
    /// Relative distance of `𝕁e₀` and `𝕁v₊` from `span(e₀, v₊)`.
    pub j_invariance_residual: f64,
    /// Relative distance of `ξ'` from `span(e₀, v₊)`.
    pub xi_prime_residual: f64,
    /// As `j_invariance_residual` for 𝕁'.
    pub j_prime_invariance_residual: f64,
    /// s with `𝕁e₀ ≈ s 𝕁'N̄`.
    pub relation_sign: f64,
    pub relation_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Hopf,
    NotHopf,
    Degenerate,
}

/// Verdict thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfThresholds {
    pub hopf_tol: f64,
    pub reject_floor: f64,
}

impl HopfThresholds {
    pub fn for_method(method: Method) -> Self {
        Self {
            hopf_tol: match method {
                Method::Analytic => 1e-8,
                Method::Fd => 1e-6,
            },
            reject_floor: 0.01,
        }
    }
}

/// One grid sample of a Hopf test; `entry` is `None` when the sample was
/// degenerate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfSample {
    pub u: Vec<f64>,
    pub angles: Vec<f64>,
    pub entry: Option<HopfEntry>,
    pub degenerate: Option<String>,
}

/// Aggregate of Hopf tests over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfReport {
    pub structure_field: StructureField,
    pub verdict: Verdict,
    pub worst_residual: f64,
    pub fraction_above_floor: f64,
    pub degenerate_count: usize,
    pub mu_min: f64,
    pub mu_max: f64,
    pub mu_mean: f64,
    pub samples: Vec<HopfSample>,
}

impl HopfReport {
    /// HOPF if every sample is at most `hopf_tol`; NOT_HOPF if some sample is
    /// at least `reject_floor`; DEGENERATE otherwise.
    pub fn aggregate(
        field: StructureField,
        samples: Vec<HopfSample>,
        thresholds: HopfThresholds,
    ) -> Self {
        let entries: Vec<&HopfEntry> = samples.iter().filter_map(|s| s.entry.as_ref()).collect();
        let degenerate_count = samples.len() - entries.len();
        let worst = entries.iter().fold(0.0_f64, |m, e| m.max(e.residual));
        let above = entries
            .iter()
            .filter(|e| e.residual >= thresholds.reject_floor)
            .count();
        let verdict = if above > 0 {
            Verdict::NotHopf
        } else if degenerate_count == 0 && !entries.is_empty() && worst <= thresholds.hopf_tol {
            Verdict::Hopf
        } else {
            Verdict::Degenerate
        };
        let mus: Vec<f64> = entries.iter().map(|e| e.mu).collect();
        let (mu_min, mu_max, mu_mean) = if mus.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            (
                mus.iter().copied().fold(f64::INFINITY, f64::min),
                mus.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mus.iter().sum::<f64>() / mus.len() as f64,
            )
        };
        let fraction = if samples.is_empty() {
            0.0
        } else {
            above as f64 / samples.len() as f64
        };
        Self {
            structure_field: field,
            verdict,
            worst_residual: worst,
            fraction_above_floor: fraction,
            degenerate_count,
            mu_min,
            mu_max,
            mu_mean,
            samples,
        }
    }
}

/// Hopf test of one structure field at one point; degeneracies become a
/// degenerate sample instead of an error.
pub fn hopf_sample(
    chart: &HypersurfaceChart,
    u: &[f64],
    angles: &HypersphericalAngles,
    field: StructureField,
    method: Method,
    step: f64,
) -> HopfSample {
    let entry = TangentHypersurfacePoint::new(chart, u, angles).and_then(|p| {
        let sample = p.shape_operator(method, step, false)?;
        sample.hopf_check(&p.structure_field(field)?)
    });
    match entry {
        Ok(e) => HopfSample {
            u: u.to_vec(),
            angles: angles.to_vec(),
            entry: Some(e),
            degenerate: None,
        },
        Err(e) => HopfSample {
            u: u.to_vec(),
            angles: angles.to_vec(),
            entry: None,
            degenerate: Some(e.to_string()),
        },
    }
}

/// Sample counts per chart coordinate and per angle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleGrid {
    pub u: Vec<usize>,
    pub theta: Vec<usize>,
}

impl SampleGrid {
    /// 12 × 12 × 8 for n = 2; 6ⁿ × 4ⁿ⁻¹ otherwise.
    pub fn default_for(n: usize) -> Self {
        if n == 2 {
            Self {
                u: vec![12, 12],
                theta: vec![8],
            }
        } else {
            Self {
                u: vec![6; n],
                theta: vec![4; n - 1],
            }
        }
    }

    pub fn len(&self) -> usize {
        self.u.iter().chain(&self.theta).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell-centered samples: u over the chart domain, θ₁ over [0, 2π) and
    /// later angles over the latitude band used by the catalog.
    pub fn points(
        &self,
        chart: &HypersurfaceChart,
    ) -> Result<Vec<(Vec<f64>, HypersphericalAngles)>> {
        let n = chart.space().n();
        if self.u.len() != n || self.theta.len() != n - 1 {
            return Err(GeometryError::InvalidParameter(format!(
                "grid needs {n} u counts and {} theta counts",
                n - 1
            )));
        }
        if self.u.iter().chain(&self.theta).any(|&c| c == 0) {
            return Err(GeometryError::InvalidParameter(
                "grid counts must be positive".into(),
            ));
        }
        let mut axes: Vec<Vec<f64>> = chart
            .domain()
            .iter()
            .zip(&self.u)
            .map(|(&(lo, hi), &k)| cells(lo, hi, k))
            .collect();
        axes.push(cells(0.0, TAU, self.theta[0]));
        for &k in &self.theta[1..] {
            axes.push(cells(-FRAC_PI_2 + POLE_MARGIN, FRAC_PI_2 - POLE_MARGIN, k));
        }
        let mut out = Vec::with_capacity(self.len());
        for q in cartesian(&axes) {
            let angles = HypersphericalAngles::from_slice(&q[n..])?;
            out.push((q[..n].to_vec(), angles));
        }
        Ok(out)
    }
}

fn cells(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| lo + (i as f64 + 0.5) * (hi - lo) / k as f64)
        .collect()
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{catalog_surface, SurfaceSpec};
    use std::f64::consts::FRAC_PI_4;

    fn sphere(eps: i64, n: usize, r: f64) -> HypersurfaceChart {
        let s = EpsilonSpace::from_sign(eps, n).unwrap();
        catalog_surface(
            s,
            &SurfaceSpec::GeodesicSphere {
                center: None,
                radius: r,
            },
        )
        .unwrap()
    }

    fn ellipsoid() -> HypersurfaceChart {
        let s = EpsilonSpace::from_sign(1, 2).unwrap();
        catalog_surface(
            s,
            &SurfaceSpec::NormalizedEllipsoid {
                semi_axes: [1.0, 1.0, 1.0, 1.2],
            },
        )
        .unwrap()
    }

    fn pt(chart: &HypersurfaceChart, u: &[f64], th: &[f64]) -> TangentHypersurfacePoint {
        TangentHypersurfacePoint::new(chart, u, &HypersphericalAngles::from_slice(th).unwrap())
            .unwrap()
    }

    #[test]
    fn v_follows_frame_at_axis_angles() {
        let c = ellipsoid();
        let p0 = pt(&c, &[0.3, 0.2], &[0.0]);
        assert!((p0.v() - &p0.frame()[0]).norm() < 1e-15);
        let p1 = pt(&c, &[0.3, 0.2], &[FRAC_PI_2]);
        assert!((p1.v() - &p1.frame()[1]).norm() < 1e-15);
        let s = c.space();
        assert!(s.dot(p1.v(), p1.surface_normal()).abs() < 1e-14);
    }

    #[test]
    fn principal_frame_orientation() {
        let c = ellipsoid();
        let p = pt(&c, &[1.3, -0.4], &[0.5]);
        let mut m = DMatrix::<f64>::zeros(4, 4);
        m.set_column(0, &p.forms().point);
        m.set_column(1, &p.frame()[0]);
        m.set_column(2, &p.frame()[1]);
        m.set_column(3, p.surface_normal());
        assert!(m.determinant() > 0.0);
    }

    #[test]
    fn transported_frame_matches_base() {
        let c = ellipsoid();
        let p = pt(&c, &[0.3, 0.2], &[0.7]);
        let (_, f, _) = p.transported_frame(&[0.3, 0.2]).unwrap();
        for (a, b) in f.iter().zip(p.frame()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn fd_basis_matches_analytic_basis() {
        for (c, u, th) in [
            (ellipsoid(), vec![0.3, 0.2], vec![0.7]),
            (sphere(-1, 2, 1.0), vec![2.0, -0.5], vec![4.0]),
            (sphere(1, 3, 0.9), vec![1.0, 0.3, -0.2], vec![2.0, 0.4]),
        ] {
            let p = pt(&c, &u, &th);
            let fd = p.tangent_basis(1e-4, true).unwrap();
            let an = p.analytic_basis();
            for (a, b) in fd.iter().zip(&an) {
                assert!(
                    (a - b).euclidean_norm() < 1e-8,
                    "{}",
                    (a - b).euclidean_norm()
                );
            }
        }
    }

    #[test]
    fn angle_direction_image_is_phi_wedge_v_perp() {
        let c = ellipsoid();
        let p = pt(&c, &[0.3, 0.2], &[0.7]);
        let b = p.tangent_basis(1e-4, true).unwrap();
        let (s, co) = 0.7_f64.sin_cos();
        let vperp = &p.frame()[0] * (-s) + &p.frame()[1] * co;
        let expected = wedge(&p.forms().point, &vperp).unwrap();
        assert!((&b[2].lift() - &expected).norm() < 1e-9);
    }

    #[test]
    fn normal_and_structure_fields() {
        for eps in [1, -1] {
            let c = sphere(eps, 2, 0.8);
            let p = pt(&c, &[0.5, 0.1], &[1.1]);
            let (nb, xi, xip) = p.normal_and_structure();
            assert!((nb.metric_g(&nb).unwrap() - 1.0).abs() < 1e-12);
            // ξ = ε (N, 0)
            let e = eps as f64;
            assert!((xi.x_part() - p.surface_normal() * e).norm() < 1e-14);
            assert!(xi.y_part().norm() < 1e-14);
            let xip = xip.unwrap();
            assert!(xip.x_part().norm() < 1e-14);
            assert!((xip.metric_g(&xip).unwrap() - 1.0).abs() < 1e-12);
            assert!(nb.metric_gbar(&nb).unwrap().abs() < 1e-12);
        }
        let p = pt(&sphere(1, 3, 0.8), &[0.5, 0.1, 0.2], &[1.1, 0.3]);
        assert!(p.normal_and_structure().2.is_none());
    }

    #[test]
    fn planar_and_general_images_agree() {
        for c in [ellipsoid(), sphere(-1, 2, 1.0)] {
            let p = pt(&c, &[0.3, 0.2], &[0.7]);
            let gen = p.principal_images().unwrap();
            let pl = p.planar_images().unwrap();
            for (a, b) in gen.iter().zip(pl.iter()) {
                assert!((a - b).euclidean_norm() < 1e-13);
            }
        }
    }

    #[test]
    fn fd_and_analytic_shape_operators_agree() {
        let cases = vec![
            (sphere(1, 2, FRAC_PI_4), vec![0.3, 0.2], vec![0.7]),
            (sphere(-1, 2, 1.0), vec![2.0, -0.5], vec![4.0]),
            (
                sphere(1, 3, FRAC_PI_4),
                vec![1.0, 0.3, -0.2],
                vec![2.0, 0.4],
            ),
            (ellipsoid(), vec![0.3, 0.2], vec![0.7]),
            (ellipsoid(), vec![4.0, -0.8], vec![2.5]),
        ];
        for (c, u, th) in cases {
            let p = pt(&c, &u, &th);
            let fd = p.shape_operator_fd(1e-4, false).unwrap();
            let an = p.shape_operator_analytic().unwrap();
            let d = (&fd.a_matrix - &an.a_matrix).amax();
            assert!(d < 1e-6, "{d:e}");
            assert!(fd.self_adjointness_defect() < 1e-7);
            assert!(an.self_adjointness_defect() < 1e-10);
            assert!(fd.normal_defect() < 1e-8 && an.normal_defect() < 1e-10);
            assert!(fd.angle_image_norm() < 1e-8 && an.angle_image_norm() == 0.0);
        }
    }

    #[test]
    fn umbilic_hopf_curvature() {
        for (eps, n, r) in [
            (1, 2, FRAC_PI_4),
            (-1, 2, 1.0),
            (1, 3, FRAC_PI_4),
            (-1, 3, 1.0),
        ] {
            let c = sphere(eps, n, r);
            let u = [0.4, 0.3, -0.2];
            let th = [1.9, 0.5];
            let p = pt(&c, &u[..n], &th[..n - 1]);
            let lambda = p.curvatures()[0];
            for method in [Method::Analytic, Method::Fd] {
                let s = p.shape_operator(method, 1e-4, false).unwrap();
                let h = s.hopf_check(&p.xi()).unwrap();
                let tol = HopfThresholds::for_method(method).hopf_tol;
                assert!(h.residual <= tol, "{eps} {n} {method:?}: {:e}", h.residual);
                // μλ = ε
                assert!((h.mu * lambda - eps as f64).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn great_sphere_is_degenerate() {
        let c = sphere(1, 2, FRAC_PI_2);
        let p = pt(&c, &[0.4, 0.3], &[1.0]);
        for method in [Method::Analytic, Method::Fd] {
            let err = p.shape_operator(method, 1e-4, false).unwrap_err();
            assert!(matches!(err, GeometryError::SingularGram { .. }), "{err:?}");
        }
    }

    #[test]
    fn h_matrix_and_identities() {
        for c in [ellipsoid(), sphere(-1, 2, 1.0)] {
            let p = pt(&c, &[0.3, 0.2], &[0.7]);
            let s = p.shape_operator_analytic().unwrap();
            let hm = p.h_matrix(&s).unwrap();
            assert!(hm.entry_residual < 1e-10, "{}", hm.entry_residual);
            assert!(hm.eigen_residual < 1e-10);
            assert!(hm.trace_residual < 1e-10 && hm.product_residual < 1e-10);
            assert!(hm.closed_form_trace_residual < 1e-12);
            assert!(hm.closed_form_product_residual < 1e-12);
        }
    }

    #[test]
    fn alpha_plane_quarter_pi_sphere() {
        let c = sphere(1, 2, FRAC_PI_4);
        let p = pt(&c, &[0.3, 0.2], &[0.7]);
        let s = p.shape_operator_analytic().unwrap();
        let a = p.alpha_plane_check(&s).unwrap();
        assert!((a.lambda_plus - 1.0).abs() < 1e-12);
        assert!((a.lambda_minus + 1.0).abs() < 1e-12);
        assert!(a.product < 0.0);
        assert!(a.j_prime_invariance_residual < 1e-10);
        assert!(a.relation_residual < 1e-12);
    }

    #[test]
    fn umbilic_results_are_frame_independent() {
        let c = sphere(1, 2, FRAC_PI_4);
        let u = [0.3, 0.2];
        let base = pt(&c, &u, &[0.7]);
        let (s, co) = 1.234_f64.sin_cos();
        let f = base.frame();
        let rotated = vec![&f[0] * co + &f[1] * s, &f[1] * co - &f[0] * s];
        let angles = crate::frame::decompose(c.space(), &rotated, base.v()).unwrap();
        let other = TangentHypersurfacePoint::with_frame(&c, &u, &angles, rotated).unwrap();
        assert!((other.v() - base.v()).norm() < 1e-12);
        let h0 = base
            .shape_operator_analytic()
            .unwrap()
            .hopf_check(&base.xi())
            .unwrap();
        let h1 = other
            .shape_operator_analytic()
            .unwrap()
            .hopf_check(&other.xi())
            .unwrap();
        assert!((h0.residual - h1.residual).abs() < 1e-9);
        assert!((h0.mu - h1.mu).abs() < 1e-9);
    }

    #[test]
    fn non_principal_frame_rejected() {
        let c = ellipsoid();
        let u = [0.3, 0.2];
        let base = pt(&c, &u, &[0.7]);
        let (s, co) = 0.5_f64.sin_cos();
        let f = base.frame();
        let rotated = vec![&f[0] * co + &f[1] * s, &f[1] * co - &f[0] * s];
        let err = TangentHypersurfacePoint::with_frame(&c, &u, base.angles(), rotated).unwrap_err();
        assert!(matches!(err, GeometryError::FrameNotPrincipal { .. }));
    }

    #[test]
    fn step_bounds() {
        let p = pt(&ellipsoid(), &[0.3, 0.2], &[0.7]);
        assert!(matches!(
            p.shape_operator_fd(1e-9, false).unwrap_err(),
            GeometryError::StepUnderflow(_)
        ));
        assert!(p.shape_operator_fd(0.05, false).is_err());
    }

    #[test]
    fn grid_sizes() {
        let c = ellipsoid();
        let g = SampleGrid::default_for(2);
        assert_eq!(g.points(&c).unwrap().len(), 12 * 12 * 8);
        let c3 = sphere(1, 3, 0.7);
        let g3 = SampleGrid::default_for(3);
        assert_eq!(g3.points(&c3).unwrap().len(), 6 * 6 * 6 * 4 * 4);
        assert!(SampleGrid {
            u: vec![2],
            theta: vec![2]
        }
        .points(&c)
        .is_err());
    }

    #[test]
    fn aggregate_verdicts() {
        let mk = |r: Option<f64>| HopfSample {
            u: vec![],
            angles: vec![],
            entry: r.map(|residual| HopfEntry {
                mu: 1.0,
                residual,
                expression_residual: 0.0,
            }),
            degenerate: r.is_none().then(|| "x".to_string()),
        };
        let t = HopfThresholds {
            hopf_tol: 1e-8,
            reject_floor: 0.01,
        };
        let agg = |v: Vec<Option<f64>>| {
            HopfReport::aggregate(StructureField::Xi, v.into_iter().map(mk).collect(), t).verdict
        };
        assert_eq!(agg(vec![Some(1e-12), Some(1e-9)]), Verdict::Hopf);
        assert_eq!(agg(vec![Some(1e-12), Some(0.2)]), Verdict::NotHopf);
        assert_eq!(agg(vec![Some(1e-12), Some(1e-4)]), Verdict::Degenerate);
        assert_eq!(agg(vec![None, None]), Verdict::Degenerate);
    }
}
