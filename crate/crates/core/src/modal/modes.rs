//! Eigenmodes of a z-invariant layer at imaginary frequency.
//!
//! With fields ∝ e^{i(k_x + 2πn/p)x + i k_y y} and ω = iξ the tangential
//! Fourier amplitudes obey a real first-order system in z. Its square splits
//! into two families:
//!
//! * x-transverse-electric modes (E_x = 0), eigenvectors of
//!   `A = K_x² + q²[[ε]]`, symmetric;
//! * x-transverse-magnetic modes (H_x = 0), eigenvectors of
//!   `B = (K_x [[ε]]⁻¹ K_x + q²)·[[1/ε]]⁻¹`, solved as the symmetric-definite
//!   pencil `S y = β [[1/ε]] y` with `S = K_x [[ε]]⁻¹ K_x + q²`.
//!
//! Both acquire `+k_y²`, so eigenvectors do not depend on k_y. The decay
//! constant of a mode is κ = √(eigenvalue + k_y²); in the e^{iλz} notation
//! λ = iκ. The normal component E_x uses the inverse (Li) factorisation
//! `[[1/ε]]⁻¹`, the tangential ones the Laurent rule `[[ε]]`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use super::geometry::{order_wavevectors, BlochPoint, GratingGeometry};
use crate::error::{Error, Result};
use crate::units::wavenumber;

/// Fourier coefficients c_0..c_{count-1} of a two-level profile that takes
/// `inside` on a centred fraction `f` of the period and `outside` elsewhere.
pub fn profile_coefficients(inside: f64, outside: f64, f: f64, count: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(count);
    c.push(f * inside + (1.0 - f) * outside);
    for j in 1..count {
        let arg = std::f64::consts::PI * j as f64;
        c.push((inside - outside) * (arg * f).sin() / arg);
    }
    c
}

/// Symmetric Toeplitz matrix T_{nm} = c_{|n−m|} of size `size`.
pub fn toeplitz(c: &[f64], size: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| c[i.abs_diff(j)])
}

/// ky-independent modal data of one layer.
#[derive(Debug, Clone)]
pub struct LayerModes {
    pub(crate) q: f64,
    pub(crate) kxs: Vec<f64>,
    /// α_j, eigenvalues of K_x² + q²[[ε]] (ascending).
    pub(crate) a_values: DVector<f64>,
    /// Orthonormal eigenvectors W (H_x profiles of the E_x = 0 family).
    pub(crate) a_vectors: DMatrix<f64>,
    /// β_j of the H_x = 0 family (ascending).
    pub(crate) b_values: DVector<f64>,
    /// E_x profiles V of the H_x = 0 family.
    pub(crate) b_ex: DMatrix<f64>,
    /// [[1/ε]]⁻¹ V.
    pub(crate) b_dual: DMatrix<f64>,
    /// S⁻¹ K_x [[ε]]⁻¹ W, the k_y-proportional H_y part of the E_x = 0 family.
    pub(crate) a_coupling: DMatrix<f64>,
    /// (K_x² + q²[[ε]])⁻¹ K_x V, the k_y-proportional E_y part of the H_x = 0 family.
    pub(crate) b_coupling: DMatrix<f64>,
    /// Residual of the discretised eigen-equations, relative.
    pub(crate) residual: f64,
}

fn eigen_error(q: f64, kx: f64, reason: &str) -> Error {
    Error::Eigen {
        xi: q * crate::units::HBAR_C,
        kx,
        ky: f64::NAN,
        reason: reason.to_string(),
    }
}

fn sorted_symmetric_eigen(m: DMatrix<f64>) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m, 1e-15, 10_000)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_fn(n, |i, _| eig.eigenvalues[idx[i]]);
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    Some((values, vectors))
}

impl LayerModes {
    /// Modes of a layer described by its Laurent matrix `[[ε]]` and the
    /// inverse-rule matrix `[[1/ε]]`, at wavenumber q = ξ/ħc > 0 and order
    /// wavevectors `kxs`.
    pub fn from_toeplitz(
        laurent: &DMatrix<f64>,
        inverse: &DMatrix<f64>,
        q: f64,
        kxs: &[f64],
    ) -> Result<Self> {
        let m = kxs.len();
        let kx0 = kxs[m / 2];
        if !(q > 0.0) {
            return Err(eigen_error(q, kx0, "layer modes need a positive frequency"));
        }
        let q2 = q * q;

        // E_x = 0 family
        let mut a_mat = laurent * q2;
        for i in 0..m {
            a_mat[(i, i)] += kxs[i] * kxs[i];
        }
        let (a_values, a_vectors) = sorted_symmetric_eigen(a_mat.clone())
            .ok_or_else(|| eigen_error(q, kx0, "symmetric eigen-solver did not converge (E_x = 0 family)"))?;

        // H_x = 0 family: S y = β [[1/ε]] y
        let chol_e = Cholesky::new(laurent.clone())
            .ok_or_else(|| eigen_error(q, kx0, "[[eps]] is not positive definite"))?;
        let kx_diag = DMatrix::from_diagonal(&DVector::from_column_slice(kxs));
        let einv_kx = chol_e.solve(&kx_diag);
        let mut s_mat = &kx_diag * &einv_kx;
        s_mat = (&s_mat + s_mat.transpose()) * 0.5;
        for i in 0..m {
            s_mat[(i, i)] += q2;
        }
        let chol_inv = Cholesky::new(inverse.clone())
            .ok_or_else(|| eigen_error(q, kx0, "[[1/eps]] is not positive definite"))?;
        let l = chol_inv.l();
        let lt = l.transpose();
        let linv_s = l
            .solve_lower_triangular(&s_mat)
            .ok_or_else(|| eigen_error(q, kx0, "singular Cholesky factor"))?;
        let c = l
            .solve_lower_triangular(&linv_s.transpose())
            .ok_or_else(|| eigen_error(q, kx0, "singular Cholesky factor"))?;
        let c = (&c + c.transpose()) * 0.5;
        let (b_values, z) = sorted_symmetric_eigen(c)
            .ok_or_else(|| eigen_error(q, kx0, "symmetric eigen-solver did not converge (H_x = 0 family)"))?;
        // y = L⁻ᵀ z satisfies yᵀ[[1/ε]]y = 1; v = [[1/ε]] y = L z.
        let y = lt
            .solve_upper_triangular(&z)
            .ok_or_else(|| eigen_error(q, kx0, "singular Cholesky factor"))?;
        let v = &l * &z;

        if a_values.iter().chain(b_values.iter()).any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(eigen_error(q, kx0, "non-positive modal eigenvalue"));
        }

        // S⁻¹ = Y diag(1/β) Yᵀ
        let einv_w = chol_e.solve(&a_vectors);
        let kx_einv_w = &kx_diag * einv_w;
        let mut y_scaled = y.clone();
        for (j, mut col) in y_scaled.column_iter_mut().enumerate() {
            col /= b_values[j];
        }
        let a_coupling = &y_scaled * (y.transpose() * kx_einv_w);
        // (K_x² + q²[[ε]])⁻¹ = W diag(1/α) Wᵀ
        let mut w_scaled = a_vectors.clone();
        for (j, mut col) in w_scaled.column_iter_mut().enumerate() {
            col /= a_values[j];
        }
        let b_coupling = &w_scaled * (a_vectors.transpose() * (&kx_diag * &v));

        // residuals of A w = α w and S P v = β v (S P v = S y)
        let mut residual: f64 = 0.0;
        let a_scale = a_values.amax().max(f64::MIN_POSITIVE);
        for j in 0..m {
            let r = &a_mat * a_vectors.column(j) - a_vectors.column(j) * a_values[j];
            residual = residual.max(r.amax() / a_scale);
        }
        let sy = &s_mat * &y;
        for j in 0..m {
            let r = sy.column(j) - v.column(j) * b_values[j];
            let scale = (b_values[j] * v.column(j).amax()).max(sy.column(j).amax());
            residual = residual.max(r.amax() / scale.max(f64::MIN_POSITIVE));
        }

        Ok(LayerModes {
            q,
            kxs: kxs.to_vec(),
            a_values,
            a_vectors,
            b_values,
            b_ex: v,
            b_dual: y,
            a_coupling,
            b_coupling,
            residual,
        })
    }

    /// Lamellar layer: ridges of permittivity `eps` in vacuum.
    pub fn lamellar(g: &GratingGeometry, eps: f64, q: f64, kx: f64, truncation_n: usize) -> Result<Self> {
        let m = 2 * truncation_n + 1;
        let kxs = order_wavevectors(kx, g.period(), truncation_n);
        let f = g.filling_factor();
        let laurent = toeplitz(&profile_coefficients(eps, 1.0, f, m), m);
        let inverse = toeplitz(&profile_coefficients(1.0 / eps, 1.0, f, m), m);
        Self::from_toeplitz(&laurent, &inverse, q, &kxs)
    }

    /// Homogeneous isotropic medium, in closed form. Mode n of each family
    /// is the plane wave of order n.
    pub fn homogeneous(eps: f64, q: f64, kxs: &[f64]) -> Self {
        let m = kxs.len();
        let alpha = DVector::from_iterator(m, kxs.iter().map(|k| k * k + q * q * eps));
        let coupling = DMatrix::from_diagonal(&DVector::from_iterator(
            m,
            kxs.iter().zip(alpha.iter()).map(|(k, a)| k / a),
        ));
        LayerModes {
            q,
            kxs: kxs.to_vec(),
            a_values: alpha.clone(),
            a_vectors: DMatrix::identity(m, m),
            b_values: alpha,
            b_ex: DMatrix::identity(m, m),
            b_dual: DMatrix::identity(m, m) * eps,
            a_coupling: coupling.clone(),
            b_coupling: coupling,
            residual: 0.0,
        }
    }

    pub fn order_count(&self) -> usize {
        self.kxs.len()
    }

    /// Largest relative residual of the discretised eigen-equations.
    pub fn residual_value(&self) -> f64 {
        self.residual
    }

    /// Decay constants (E_x = 0 family, H_x = 0 family) at k_y.
    pub fn decay_constants(&self, ky: f64) -> (Vec<f64>, Vec<f64>) {
        let k2 = ky * ky;
        (
            self.a_values.iter().map(|a| (a + k2).sqrt()).collect(),
            self.b_values.iter().map(|b| (b + k2).sqrt()).collect(),
        )
    }

    /// Tangential field matrices (X, Y) at k_y: column j of X holds (E_x, E_y)
    /// and of Y holds (H_x, H_y) of mode j for the downward (e^{+κz}) wave.
    /// The upward wave has the same X column and the opposite Y column.
    /// Columns 0..M are the E_x = 0 family, M..2M the H_x = 0 family.
    pub fn field_matrices(&self, ky: f64) -> (DMatrix<f64>, DMatrix<f64>, Vec<f64>) {
        let m = self.order_count();
        let q = self.q;
        let (ka, kb) = self.decay_constants(ky);
        let mut x = DMatrix::zeros(2 * m, 2 * m);
        let mut y = DMatrix::zeros(2 * m, 2 * m);
        for j in 0..m {
            let ey_scale = ka[j] * q / self.a_values[j];
            let hy_scale = -q * kb[j] / self.b_values[j];
            for i in 0..m {
                let w = self.a_vectors[(i, j)];
                // E_x = 0 family
                x[(m + i, j)] = ey_scale * w;
                y[(i, j)] = w;
                y[(m + i, j)] = ky * self.a_coupling[(i, j)];
                // H_x = 0 family
                x[(i, m + j)] = self.b_ex[(i, j)];
                x[(m + i, m + j)] = ky * self.b_coupling[(i, j)];
                y[(m + i, m + j)] = hy_scale * self.b_dual[(i, j)];
            }
        }
        let mut kappa = ka;
        kappa.extend(kb);
        (x, y, kappa)
    }
}

/// Modes of the grating layer at one Bloch point.
#[derive(Debug, Clone)]
pub struct ModeSet {
    pub truncation_n: usize,
    pub point: BlochPoint,
    /// ε(iξ) of the ridges.
    pub eps: f64,
    pub(crate) layer: LayerModes,
}

impl ModeSet {
    /// Decay constants κ (1/nm) of both families, each sorted ascending
    /// (slowest decay first). The corresponding e^{iλz} eigenvalues are λ = iκ.
    pub fn decay_constants(&self) -> (Vec<f64>, Vec<f64>) {
        self.layer.decay_constants(self.point.ky)
    }

    /// All 2(2N+1) decay constants, sorted ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let (a, b) = self.decay_constants();
        let mut all: Vec<f64> = a.into_iter().chain(b).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    pub fn len(&self) -> usize {
        2 * self.layer.order_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fourier coefficients of the H_x profiles (E_x = 0 family), one column per mode.
    pub fn te_x_profiles(&self) -> &DMatrix<f64> {
        &self.layer.a_vectors
    }

    /// Fourier coefficients of the E_x profiles (H_x = 0 family), one column per mode.
    pub fn tm_x_profiles(&self) -> &DMatrix<f64> {
        &self.layer.b_ex
    }

    /// Largest relative residual of the discretised eigen-equations.
    pub fn residual(&self) -> f64 {
        self.layer.residual
    }
}

/// Eigenmodes of the grating layer (ridges of permittivity `eps`, vacuum
/// grooves) with orders −N..N at the Bloch point `pt` (ξ > 0).
pub fn grating_modes(g: &GratingGeometry, eps: f64, pt: &BlochPoint, truncation_n: usize) -> Result<ModeSet> {
    if !(eps >= 1.0) {
        return Err(Error::domain("eps", format!("must be at least 1, got {eps}")));
    }
    if truncation_n < 1 {
        return Err(Error::domain("truncation_n", "must be at least 1"));
    }
    let q = wavenumber(pt.xi);
    let layer = LayerModes::lamellar(g, eps, q, pt.kx, truncation_n).map_err(|e| match e {
        Error::Eigen { xi, kx, reason, .. } => Error::Eigen { xi, kx, ky: pt.ky, reason },
        other => other,
    })?;
    Ok(ModeSet {
        truncation_n,
        point: *pt,
        eps,
        layer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn toeplitz_of_full_ridge_is_diagonal() {
        let c = profile_coefficients(5.0, 1.0, 1.0, 4);
        assert!((c[0] - 5.0).abs() < 1e-15);
        assert!(c[1..].iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn uniform_slab_has_homogeneous_eigenvalues() {
        let g = GratingGeometry::new(350.0, 350.0, 100.0).unwrap();
        let eps = 40.0;
        let pt = BlochPoint::new(0.003, 0.002, 0.2, &g).unwrap();
        let modes = grating_modes(&g, eps, &pt, 4).unwrap();
        let q = wavenumber(pt.xi);
        let expected: Vec<f64> = order_wavevectors(pt.kx, 350.0, 4)
            .iter()
            .map(|k| (eps * q * q + k * k + pt.ky * pt.ky).sqrt())
            .collect();
        let (a, b) = modes.decay_constants();
        let expected = sorted(expected);
        for (x, y) in a.iter().zip(&expected) {
            assert!((x / y - 1.0).abs() < 1e-12, "{x} vs {y}");
        }
        for (x, y) in b.iter().zip(&expected) {
            assert!((x / y - 1.0).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn empty_grating_gives_vacuum_dispersion() {
        let g = GratingGeometry::sample_one();
        let pt = BlochPoint::new(-0.004, 0.01, 0.3, &g).unwrap();
        let modes = grating_modes(&g, 1.0, &pt, 3).unwrap();
        let q = wavenumber(pt.xi);
        let expected = sorted(
            order_wavevectors(pt.kx, g.period(), 3)
                .iter()
                .map(|k| (q * q + k * k + pt.ky * pt.ky).sqrt())
                .collect(),
        );
        let (a, b) = modes.decay_constants();
        for v in [a, b] {
            for (x, y) in v.iter().zip(&expected) {
                assert!((x / y - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gold_grating_residual_and_count() {
        let g = GratingGeometry::sample_one();
        let xi = 0.16243;
        let eps = crate::materials::MaterialModel::gold().permittivity(xi).unwrap();
        let pt = BlochPoint::new(0.002, 0.001, xi, &g).unwrap();
        let modes = grating_modes(&g, eps, &pt, 10).unwrap();
        assert_eq!(modes.len(), 42);
        assert!(modes.residual() < 1e-8, "{}", modes.residual());
        let ev = modes.eigenvalues();
        assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        assert!(ev.iter().all(|&k| k > 0.0));
    }

    #[test]
    fn slowest_mode_converges_with_truncation() {
        // slowest-decaying mode of sample 1 at the first Matsubara frequency
        let g = GratingGeometry::sample_one();
        let xi = crate::materials::matsubara_frequency(1, &crate::materials::Environment::room());
        let eps = crate::materials::MaterialModel::gold().permittivity(xi).unwrap();
        let pt = BlochPoint::new(0.0, 0.0, xi, &g).unwrap();
        let slowest = |n| grating_modes(&g, eps, &pt, n).unwrap().eigenvalues()[0];
        let seq: Vec<f64> = [1, 2, 4, 8, 16].iter().map(|&n| slowest(n)).collect();
        let deltas: Vec<f64> = seq.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        assert!(deltas.windows(2).all(|w| w[1] < w[0]), "{seq:?}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = GratingGeometry::sample_one();
        let pt = BlochPoint::new(0.0, 0.0, 0.1, &g).unwrap();
        assert!(grating_modes(&g, 0.5, &pt, 3).is_err());
        assert!(grating_modes(&g, 2.0, &pt, 0).is_err());
        let static_pt = BlochPoint::new(0.0, 0.0, 0.0, &g).unwrap();
        assert!(matches!(grating_modes(&g, 2.0, &static_pt, 3), Err(Error::Eigen { .. })));
    }
}
