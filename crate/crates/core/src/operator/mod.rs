//! Discretization of the integrated photoacoustic operator and its Gram
//! kernel.
//!
//! The forward operator maps interior source coefficients to boundary data
//! indexed by (frequency, detector); the Gram kernel is the integral
//! kernel of adjoint∘forward restricted to the interior grid. Strongly
//! attenuating media use direct frequency quadrature (the integrand decays
//! like e^(−2ε Im κ)); weakly attenuating media use the closed-form split
//! into a constant-attenuation line-integral part plus two perturbations,
//! since the direct frequency integral is only conditionally convergent.

mod forward;
mod freq;
mod gram;
mod weak;

pub use forward::OperatorMatrix;
pub use freq::{FrequencyGrid, Panel};
pub use gram::{gram_direct, gram_from_forward, gram_quadrature, pwp_consistency_sampled};
pub use weak::{
    gram_weak, gram_weak_f0, gram_weak_f1, gram_weak_f2, kappa_star_transform, DiagonalRule,
    KappaStarTransform, WeakGramOptions,
};

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{interior_grid, sphere_quadrature, BallGeometry, BoundaryQuadrature, InteriorGrid};
use crate::wavekernel::KERNEL_PREFACTOR;

/// Relative Hermitian defect above which a Gram matrix is rejected.
pub const HERMITIAN_DEFECT_TOL: f64 = 1e-8;

/// Boundary and interior quadratures with the detector–source distance
/// table, shared by every assembly route.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub geom: BallGeometry,
    pub boundary: BoundaryQuadrature,
    pub interior: InteriorGrid,
    /// distances |ξ_j − y_k|, shape (n_boundary, n_interior)
    pub dist: Array2<f64>,
}

impl Discretization {
    pub fn new(geom: BallGeometry, n_boundary: usize, h: f64) -> Result<Self> {
        let boundary = sphere_quadrature(&geom, n_boundary)?;
        let interior = interior_grid(&geom, h)?;
        Self::from_parts(geom, boundary, interior)
    }

    pub fn from_parts(
        geom: BallGeometry,
        boundary: BoundaryQuadrature,
        interior: InteriorGrid,
    ) -> Result<Self> {
        let nb = boundary.len();
        let ni = interior.len();
        let mut dist = Array2::<f64>::zeros((nb, ni));
        for (j, xi) in boundary.points.iter().enumerate() {
            for (k, y) in interior.points.iter().enumerate() {
                let d = [xi[0] - y[0], xi[1] - y[1], xi[2] - y[2]];
                dist[[j, k]] = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            }
        }
        let min_dist = dist.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_dist < geom.eps / 2.0 {
            return Err(Error::Geometry(format!(
                "detector-source separation {min_dist} is below eps/2 = {}",
                geom.eps / 2.0
            )));
        }
        Ok(Discretization { geom, boundary, interior, dist })
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary.len()
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    /// Kernel block for one frequency: K[j,k] = e^(iκ|ξ_j−y_k|) /
    /// (4π√(2π) |ξ_j−y_k|), without quadrature weights.
    pub fn kernel_block(&self, kappa: Complex64) -> Array2<Complex64> {
        let (nb, ni) = self.dist.dim();
        let mut block = Array2::<Complex64>::zeros((nb, ni));
        block
            .axis_iter_mut(ndarray::Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(j, mut row)| {
                for k in 0..ni {
                    let r = self.dist[[j, k]];
                    let decay = (-kappa.im * r).exp();
                    let (s, c) = (kappa.re * r).sin_cos();
                    row[k] = Complex64::new(c, s) * (decay * KERNEL_PREFACTOR / r);
                }
            });
        block
    }
}

/// Metadata echoed into reports and binary exports.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GramMeta {
    pub model: String,
    pub assembly: String,
    pub omega_cut: f64,
    pub n_boundary: usize,
    pub n_interior: usize,
    pub spacing: f64,
    pub radius: f64,
    pub eps: f64,
}

/// Dense Hermitian matrix of Gram kernel samples F[a,b] ≈ F(x_a, y_b)
/// together with the interior quadrature weights.
#[derive(Debug, Clone)]
pub struct GramKernel {
    pub values: Array2<Complex64>,
    pub weights: Vec<f64>,
    pub hermitian_defect: f64,
    pub meta: GramMeta,
}

impl GramKernel {
    pub fn new(values: Array2<Complex64>, weights: Vec<f64>, meta: GramMeta) -> Result<Self> {
        let n = weights.len();
        if values.dim() != (n, n) {
            return Err(Error::Format(format!(
                "gram matrix shape {:?} does not match {} weights",
                values.dim(),
                n
            )));
        }
        let mut defect = 0.0f64;
        let mut max_abs = 0.0f64;
        for a in 0..n {
            for b in a..n {
                let d = (values[[a, b]] - values[[b, a]].conj()).norm();
                defect = defect.max(d);
                max_abs = max_abs.max(values[[a, b]].norm());
            }
        }
        Ok(GramKernel { values, weights, hermitian_defect: defect / max_abs.max(1e-300), meta })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// Symmetrically weighted matrix W^(1/2) F W^(1/2) whose eigenvalues
    /// approximate the continuum eigenvalues.
    pub fn weighted(&self) -> Array2<Complex64> {
        let n = self.n();
        let sqrt_w: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let mut out = self.values.clone();
        for a in 0..n {
            for b in 0..n {
                out[[a, b]] *= sqrt_w[a] * sqrt_w[b];
            }
        }
        out
    }

    /// Rejects matrices whose Hermitian defect exceeds the tolerance.
    pub fn check_hermitian(&self) -> Result<()> {
        if self.hermitian_defect > HERMITIAN_DEFECT_TOL {
            return Err(Error::Numerics(format!(
                "hermitian defect {:.3e} exceeds {:.1e}",
                self.hermitian_defect, HERMITIAN_DEFECT_TOL
            )));
        }
        Ok(())
    }

    /// Largest relative entry difference against another Gram matrix.
    pub fn max_rel_diff(&self, other: &GramKernel) -> f64 {
        let scale = self
            .values
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max)
            / scale
    }
}
