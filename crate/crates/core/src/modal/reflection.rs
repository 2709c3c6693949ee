//! Boundary matching: reflection operators of the flat plate and of the
//! grating on its gold substrate, in a common vacuum plane-wave basis.
//!
//! The basis of the gap is, for each diffraction order n, the E_x = 0 wave
//! (index n) and the H_x = 0 wave (index M + n), normalised as in
//! [`LayerModes::homogeneous`]. Amplitudes of downward waves are referenced
//! at the grating top, upward ones at the plate, so both operators and the
//! diagonal translation operator compose directly.
//!
//! Amplitudes are tangential electric fields, so on a flat surface the
//! eigenvalues of each order block are r_TE and −r_TM. The sign drops out of
//! every round trip.

use nalgebra::DMatrix;

use super::geometry::{order_wavevectors, BlochPoint, GratingGeometry};
use super::modes::{LayerModes, ModeSet};
use crate::error::{Error, Result};
use crate::units::wavenumber;

/// Reflection operator over (diffraction order, polarisation family).
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionOperator {
    pub truncation_n: usize,
    /// 2(2N+1) square, real at imaginary frequency.
    pub matrix: DMatrix<f64>,
}

impl ReflectionOperator {
    pub fn order_count(&self) -> usize {
        2 * self.truncation_n + 1
    }

    /// Row/column index of order n (−N..N) in family 0 (E_x = 0) or 1 (H_x = 0).
    pub fn index(&self, order: i64, family: usize) -> usize {
        (order + self.truncation_n as i64) as usize + family * self.order_count()
    }

    /// 2×2 specular block of order 0.
    pub fn specular(&self) -> [[f64; 2]; 2] {
        let a = self.index(0, 0);
        let b = self.index(0, 1);
        [
            [self.matrix[(a, a)], self.matrix[(a, b)]],
            [self.matrix[(b, a)], self.matrix[(b, b)]],
        ]
    }

    /// Moduli of the eigenvalues of the operator.
    pub fn spectral_radius(&self) -> f64 {
        self.matrix
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Eigenvalues of a real 2×2 block (assumed real, as for a specular block of a
/// passive isotropic surface), sorted ascending.
pub fn block_eigenvalues(b: [[f64; 2]; 2]) -> [f64; 2] {
    let tr = b[0][0] + b[1][1];
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    [0.5 * tr - disc, 0.5 * tr + disc]
}

/// Admittance of a homogeneous half-space below (H = T E for a field made of
/// downward waves only). Stored as four diagonals over the orders:
/// rows (H_x, H_y), columns (E_x, E_y).
#[derive(Debug, Clone)]
pub(crate) struct BlockDiagonal {
    pub xx: Vec<f64>,
    pub xy: Vec<f64>,
    pub yx: Vec<f64>,
    pub yy: Vec<f64>,
}

impl BlockDiagonal {
    pub(crate) fn half_space_admittance(eps: f64, q: f64, kxs: &[f64], ky: f64) -> Self {
        let m = kxs.len();
        let (mut xx, mut xy, mut yx, mut yy) =
            (Vec::with_capacity(m), Vec::with_capacity(m), Vec::with_capacity(m), Vec::with_capacity(m));
        let qe = q * q * eps;
        for &k in kxs {
            let kappa = (k * k + ky * ky + qe).sqrt();
            let den = kappa * q;
            xx.push(-ky * k / den);
            xy.push((k * k + qe) / den);
            yx.push(-(ky * ky + qe) / den);
            yy.push(ky * k / den);
        }
        BlockDiagonal { xx, xy, yx, yy }
    }

    /// self · x for a (2M × c) matrix x.
    pub(crate) fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.xx.len();
        let mut out = DMatrix::zeros(2 * m, x.ncols());
        for c in 0..x.ncols() {
            for i in 0..m {
                let ex = x[(i, c)];
                let ey = x[(m + i, c)];
                out[(i, c)] = self.xx[i] * ex + self.xy[i] * ey;
                out[(m + i, c)] = self.yx[i] * ex + self.yy[i] * ey;
            }
        }
        out
    }
}

/// Largest-to-smallest pivot ratio of an LU factorisation, a cheap
/// condition estimate.
fn pivot_ratio(lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let u = lu.u();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for i in 0..u.nrows() {
        let v = u[(i, i)].abs();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

pub(crate) const CONDITION_LIMIT: f64 = 1e12;

/// Solves a x = b, reporting singular or ill-conditioned systems.
pub(crate) fn solve(a: DMatrix<f64>, b: &DMatrix<f64>, pt: (f64, f64, f64), check: bool) -> Result<DMatrix<f64>> {
    let lu = a.lu();
    if check {
        let cond = pivot_ratio(&lu);
        if !(cond < CONDITION_LIMIT) {
            return Err(Error::IllConditioned {
                condition: cond,
                xi: pt.0,
                kx: pt.1,
                ky: pt.2,
            });
        }
    }
    lu.solve(b).ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
        xi: pt.0,
        kx: pt.1,
        ky: pt.2,
    })
}

/// R = (Y + Γ X)⁻¹ (Y − Γ X): reflection of waves in the medium (X, Y) from
/// a structure of admittance Γ; `gamma_x` is the product Γ X.
fn reflection_from_admittance(
    y: &DMatrix<f64>,
    gamma_x: &DMatrix<f64>,
    pt: (f64, f64, f64),
    check: bool,
) -> Result<DMatrix<f64>> {
    let lhs = y + gamma_x;
    let rhs = y - gamma_x;
    solve(lhs, &rhs, pt, check)
}

/// Per-(ξ, k_x) solver for the grating and the plate; k_y enters through
/// [`GratingSolver::grating`] and [`GratingSolver::plate`].
#[derive(Debug, Clone)]
pub struct GratingSolver {
    pub truncation_n: usize,
    q: f64,
    kx: f64,
    kxs: Vec<f64>,
    height: f64,
    eps: f64,
    layer: Option<LayerModes>,
    vacuum: LayerModes,
    check_condition: bool,
}

impl GratingSolver {
    /// Prepares the modal data at ξ > 0 (through ε = ε(iξ) and q = ξ/ħc).
    pub fn new(g: &GratingGeometry, eps: f64, xi: f64, kx: f64, truncation_n: usize) -> Result<Self> {
        let q = wavenumber(xi);
        let kxs = order_wavevectors(kx, g.period(), truncation_n);
        let layer = if g.is_flat() || eps == 1.0 {
            None
        } else if g.width() == 0.0 {
            Some(LayerModes::homogeneous(1.0, q, &kxs))
        } else {
            Some(LayerModes::lamellar(g, eps, q, kx, truncation_n)?)
        };
        let height = if g.width() == g.period() || eps == 1.0 { 0.0 } else { g.height() };
        Ok(GratingSolver {
            truncation_n,
            q,
            kx,
            vacuum: LayerModes::homogeneous(1.0, q, &kxs),
            kxs,
            height,
            eps,
            layer,
            check_condition: true,
        })
    }

    /// Builds the solver from modes that were already computed.
    pub fn from_modes(g: &GratingGeometry, modes: &ModeSet) -> Result<Self> {
        let mut s = Self::new(
            &GratingGeometry::new(g.period(), g.period(), 0.0)?,
            modes.eps,
            modes.point.xi,
            modes.point.kx,
            modes.truncation_n,
        )?;
        if !g.is_flat() {
            s.layer = Some(modes.layer.clone());
            s.height = g.height();
        }
        Ok(s)
    }

    pub fn order_wavevectors(&self) -> &[f64] {
        &self.kxs
    }

    pub fn wavenumber(&self) -> f64 {
        self.q
    }

    pub fn layer(&self) -> Option<&LayerModes> {
        self.layer.as_ref()
    }

    fn tag(&self, ky: f64) -> (f64, f64, f64) {
        (self.q * crate::units::HBAR_C, self.kx, ky)
    }

    /// Vacuum decay constants of the 2(2N+1) basis waves at k_y.
    pub fn vacuum_decay(&self, ky: f64) -> Vec<f64> {
        let (a, b) = self.vacuum.decay_constants(ky);
        a.into_iter().chain(b).collect()
    }

    /// Reflection of the flat plate (bulk of the same metal) for upward waves.
    pub fn plate(&self, ky: f64) -> Result<DMatrix<f64>> {
        let (x1, y1, _) = self.vacuum.field_matrices(ky);
        let t = BlockDiagonal::half_space_admittance(self.eps, self.q, &self.kxs, ky);
        reflection_from_admittance(&y1, &t.apply(&x1), self.tag(ky), self.check_condition)
    }

    /// Reflection of the grating on its substrate for downward waves,
    /// referenced at the ridge tops.
    pub fn grating(&self, ky: f64) -> Result<DMatrix<f64>> {
        let layer = if self.height > 0.0 { self.layer.as_ref() } else { None };
        stack_reflection(
            &self.vacuum,
            layer.map(|l| (l, self.height)),
            self.eps,
            ky,
            self.tag(ky),
            self.check_condition,
        )
    }
}

/// Reflection, seen from the vacuum modes `vacuum`, of an optional layer of
/// thickness h on a half-space of permittivity `eps_substrate`.
pub(crate) fn stack_reflection(
    vacuum: &LayerModes,
    layer: Option<(&LayerModes, f64)>,
    eps_substrate: f64,
    ky: f64,
    tag: (f64, f64, f64),
    check: bool,
) -> Result<DMatrix<f64>> {
    let (x1, y1, _) = vacuum.field_matrices(ky);
    let substrate = BlockDiagonal::half_space_admittance(eps_substrate, vacuum.q, &vacuum.kxs, ky);
    let (layer, height) = match layer {
        Some(l) => l,
        None => return reflection_from_admittance(&y1, &substrate.apply(&x1), tag, check),
    };
    let (x2, y2, kappa) = layer.field_matrices(ky);
    // reflection at the substrate, seen from inside the layer
    let r_bottom = reflection_from_admittance(&y2, &substrate.apply(&x2), tag, check)?;
    // propagate to the top: R' = Φ R Φ
    let phase: Vec<f64> = kappa.iter().map(|k| (-k * height).exp()).collect();
    let n = phase.len();
    let r_top = DMatrix::from_fn(n, n, |i, j| phase[i] * r_bottom[(i, j)] * phase[j]);
    // admittance at the top: Γ = Y(I − R')·[X(I + R')]⁻¹
    let u = &x2 + &x2 * &r_top;
    let v = &y2 - &y2 * &r_top;
    let gamma = solve(u.transpose(), &v.transpose(), tag, false)?.transpose();
    reflection_from_admittance(&y1, &(gamma * &x1), tag, check)
}

/// Reflection operator of the grating on bulk metal at `pt`.
pub fn grating_reflection(g: &GratingGeometry, modes: &ModeSet, pt: &BlochPoint) -> Result<ReflectionOperator> {
    if modes.point.xi != pt.xi || modes.point.kx != pt.kx {
        return Err(Error::domain("modes", "modes were computed at a different Bloch point"));
    }
    let solver = GratingSolver::from_modes(g, modes)?;
    Ok(ReflectionOperator {
        truncation_n: modes.truncation_n,
        matrix: solver.grating(pt.ky)?,
    })
}

/// Reflection operator of the flat plate (metal of permittivity `eps`) at `pt`.
pub fn plate_reflection(eps: f64, pt: &BlochPoint, period: f64, truncation_n: usize) -> Result<ReflectionOperator> {
    let flat = GratingGeometry::new(period, period, 0.0)?;
    let solver = GratingSolver::new(&flat, eps, pt.xi, pt.kx, truncation_n)?;
    Ok(ReflectionOperator {
        truncation_n,
        matrix: solver.plate(pt.ky)?,
    })
}

/// Diagonal translation operator e^{−κ_n d}, κ_n = √(ξ²/(ħc)² + (k_x + 2πn/p)² + k_y²),
/// repeated for both families.
pub fn translation_operator(d: f64, pt: &BlochPoint, period: f64, truncation_n: usize) -> Result<Vec<f64>> {
    if !(d >= 0.0) {
        return Err(Error::domain("d", format!("must be non-negative, got {d}")));
    }
    let q = wavenumber(pt.xi);
    let diag: Vec<f64> = order_wavevectors(pt.kx, period, truncation_n)
        .iter()
        .map(|k| (-(q * q + k * k + pt.ky * pt.ky).sqrt() * d).exp())
        .collect();
    Ok(diag.iter().chain(diag.iter()).copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifshitz::fresnel;
    use crate::materials::MaterialModel;

    fn gold_eps(xi: f64) -> f64 {
        MaterialModel::gold().permittivity(xi).unwrap()
    }

    fn fresnel_of_order(xi: f64, k: f64, ky: f64, eps: f64) -> [f64; 2] {
        let f = fresnel(xi, (k * k + ky * ky).sqrt(), eps).unwrap();
        // the H_x = 0 family is measured by E_x, which flips the TM sign
        let mut v = [f.r_te, -f.r_tm];
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn plate_blocks_are_fresnel() {
        let g = GratingGeometry::sample_one();
        let xi = 0.5;
        let eps = gold_eps(xi);
        let pt = BlochPoint::new(0.004, 0.003, xi, &g).unwrap();
        let r = plate_reflection(eps, &pt, g.period(), 3).unwrap();
        let kxs = order_wavevectors(pt.kx, g.period(), 3);
        for (i, &k) in kxs.iter().enumerate() {
            let n = i as i64 - 3;
            let (a, b) = (r.index(n, 0), r.index(n, 1));
            let block = [[r.matrix[(a, a)], r.matrix[(a, b)]], [r.matrix[(b, a)], r.matrix[(b, b)]]];
            let ev = block_eigenvalues(block);
            let expected = fresnel_of_order(xi, k, pt.ky, eps);
            assert!((ev[0] - expected[0]).abs() < 1e-12 && (ev[1] - expected[1]).abs() < 1e-12,
                "order {n}: {ev:?} vs {expected:?}");
            // no coupling between orders
            for (j, _) in kxs.iter().enumerate() {
                if j != i {
                    assert_eq!(r.matrix[(a, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn zero_height_grating_is_the_plate() {
        let g = GratingGeometry::new(350.0, 130.0, 0.0).unwrap();
        let xi = 0.3;
        let eps = gold_eps(xi);
        let pt = BlochPoint::new(0.001, 0.002, xi, &g).unwrap();
        let s = GratingSolver::new(&g, eps, xi, pt.kx, 4).unwrap();
        let rg = s.grating(pt.ky).unwrap();
        let rp = s.plate(pt.ky).unwrap();
        assert!((&rg - &rp).amax() < 1e-14);
    }

    #[test]
    fn thick_solid_film_is_fresnel() {
        let xi = 0.3;
        let eps = gold_eps(xi);
        // full ridge, through the general lamellar path
        let g = GratingGeometry::new(350.0, 350.0 * (1.0 - 1e-12), 400.0).unwrap();
        let pt = BlochPoint::new(0.002, 0.001, xi, &g).unwrap();
        let modes = grating_modes_for_test(&g, eps, &pt);
        let r = grating_reflection(&g, &modes, &pt).unwrap();
        let ev = block_eigenvalues(r.specular());
        let expected = fresnel_of_order(xi, pt.kx, pt.ky, eps);
        assert!((ev[0] - expected[0]).abs() < 1e-6 && (ev[1] - expected[1]).abs() < 1e-6, "{ev:?} vs {expected:?}");
    }

    fn grating_modes_for_test(g: &GratingGeometry, eps: f64, pt: &BlochPoint) -> ModeSet {
        super::super::modes::grating_modes(g, eps, pt, 4).unwrap()
    }

    #[test]
    fn empty_layer_delays_the_substrate() {
        // f → 0: bulk gold recessed by h
        let xi = 0.4;
        let eps = gold_eps(xi);
        let h = 50.0;
        let g = GratingGeometry::new(350.0, 0.0, h).unwrap();
        let pt = BlochPoint::new(0.0, 0.004, xi, &g).unwrap();
        let s = GratingSolver::new(&g, eps, xi, pt.kx, 2).unwrap();
        let rg = s.grating(pt.ky).unwrap();
        let rp = s.plate(pt.ky).unwrap();
        let kappa = s.vacuum_decay(pt.ky);
        for i in 0..rg.nrows() {
            for j in 0..rg.ncols() {
                let expected = rp[(i, j)] * (-(kappa[i] + kappa[j]) * h).exp();
                assert!((rg[(i, j)] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn translation_examples() {
        let g = GratingGeometry::sample_one();
        let pt = BlochPoint::new(0.0, 0.0, 0.0, &g).unwrap();
        let t = translation_operator(500.0, &pt, g.period(), 2).unwrap();
        assert_eq!(t[2], 1.0);
        assert_eq!(t.len(), 10);
        let pt = BlochPoint::new(0.001, 0.002, 0.2, &g).unwrap();
        let t = translation_operator(1e-12, &pt, g.period(), 2).unwrap();
        assert!(t.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let t = translation_operator(500.0, &pt, g.period(), 2).unwrap();
        assert!(t.iter().all(|&v| v > 0.0 && v < 1.0));
        // κ = 0.01 nm⁻¹ at d = 500 nm
        let q = 0.01f64;
        let pt = BlochPoint::new(0.0, 0.0, q * crate::units::HBAR_C, &g).unwrap();
        let t = translation_operator(500.0, &pt, g.period(), 0).unwrap();
        assert!((t[0] - (-5.0f64).exp()).abs() < 1e-15);
        assert!((t[0] - 6.74e-3).abs() < 1e-5);
    }

    fn sample_solver(xi: f64, kx: f64, n: usize) -> GratingSolver {
        let g = GratingGeometry::sample_one();
        GratingSolver::new(&g, gold_eps(xi), xi, kx, n).unwrap()
    }

    #[test]
    fn mirror_symmetry_in_kx() {
        let n = 5;
        let m = 2 * n + 1;
        let (xi, kx, ky) = (0.2, 0.0031, 0.0017);
        let plus = sample_solver(xi, kx, n).grating(ky).unwrap();
        let minus = sample_solver(xi, -kx, n).grating(ky).unwrap();
        // x → −x: reverse orders, flip the sign of the H_x = 0 family
        let map = |i: usize| -> (usize, f64) {
            let (fam, o) = (i / m, i % m);
            (fam * m + (m - 1 - o), if fam == 0 { 1.0 } else { -1.0 })
        };
        let mut worst: f64 = 0.0;
        for i in 0..2 * m {
            for j in 0..2 * m {
                let (a, sa) = map(i);
                let (b, sb) = map(j);
                worst = worst.max((minus[(i, j)] - sa * sb * plus[(a, b)]).abs());
            }
        }
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn grating_is_passive() {
        for &(xi, kx, ky) in &[(0.05, 0.0, 0.0), (0.3, 0.008, 0.004), (2.0, 0.002, 0.03)] {
            let r = ReflectionOperator {
                truncation_n: 6,
                matrix: sample_solver(xi, kx, 6).grating(ky).unwrap(),
            };
            let rho = r.spectral_radius();
            assert!(rho < 1.0 + 1e-9, "xi={xi}: {rho}");
        }
    }

    #[test]
    fn specular_tm_tends_to_conductor_at_low_frequency() {
        let r = ReflectionOperator {
            truncation_n: 6,
            matrix: sample_solver(1e-4, 1e-6, 6).grating(0.0).unwrap(),
        };
        let s = r.specular();
        // H_x = 0 family at k_y = 0 is TM
        assert!((s[1][1] + 1.0).abs() < 1e-3, "{s:?}");
        assert!(s[0][1].abs() < 1e-12 && s[1][0].abs() < 1e-12);
    }

    #[test]
    fn convergence_in_truncation() {
        let spec = |n| {
            let r = ReflectionOperator { truncation_n: n, matrix: sample_solver(0.3, 0.002, n).grating(0.001).unwrap() };
            r.specular()[1][1]
        };
        let (a, b) = (spec(10), spec(20));
        assert!((a - b).abs() < 1e-2 * b.abs(), "{a} {b}");
    }
}
