//! Eigenvalue spectra of Gram matrices and decay-law fitting.
//!
//! Eigenvalues of the symmetrically weighted matrix W^(1/2) F W^(1/2)
//! approximate the eigenvalues of the continuum operator. Spectra are
//! reported in decreasing order with tiny negative values (discretization
//! noise) clamped to zero; anything more negative is an assembly defect.
//!
//! Two decay laws are fitted by least squares in log space: the power law
//! λ_n ≈ C n^(−p) of weakly attenuating media and the stretched
//! exponential λ_n ≈ e^(a − c n^s) of strongly attenuating media.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::GramKernel;

/// Relative size below which negative eigenvalues count as noise.
pub const NEGATIVE_EIGENVALUE_TOL: f64 = 1e-6;

/// Sorted eigenvalue spectrum of a Gram matrix.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Eigenvalues in decreasing order, clamped at zero.
    pub eigenvalues: Vec<f64>,
    pub n_modes: usize,
    /// Most negative raw eigenvalue relative to λ₁ before clamping.
    pub negative_defect: f64,
    pub model: String,
    pub assembly: String,
}

impl SpectrumReport {
    pub fn from_eigenvalues(mut raw: Vec<f64>, model: &str, assembly: &str) -> Result<Self> {
        raw.sort_by(|a, b| b.total_cmp(a));
        let lambda1 = raw.first().copied().unwrap_or(0.0).max(0.0);
        let most_negative = raw.last().copied().unwrap_or(0.0).min(0.0);
        let defect = if lambda1 > 0.0 { -most_negative / lambda1 } else { 0.0 };
        if defect > NEGATIVE_EIGENVALUE_TOL {
            return Err(Error::Numerics(format!(
                "negative eigenvalue {most_negative:.6e} is {defect:.3e} of lambda_1 = {lambda1:.6e}; \
                 assembly defect"
            )));
        }
        let eigenvalues: Vec<f64> = raw.into_iter().map(|v| v.max(0.0)).collect();
        let n_modes = eigenvalues.len();
        Ok(SpectrumReport {
            eigenvalues,
            n_modes,
            negative_defect: defect,
            model: model.to_string(),
            assembly: assembly.to_string(),
        })
    }

    pub fn lambda1(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

/// Eigendecomposition of the weighted Gram matrix.
///
/// The matrix is validated for Hermitian defect, symmetrized, and routed
/// through the real symmetric solver when the imaginary part is noise
/// (the assembled kernels are real for symmetric coefficients), falling
/// back to the complex Hermitian solver otherwise.
pub fn eigen_spectrum(gram: &GramKernel) -> Result<SpectrumReport> {
    gram.check_hermitian()?;
    let weighted = gram.weighted();
    let n = gram.n();
    let max_abs = weighted.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1e-300);
    let max_im = weighted.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max);
    let raw: Vec<f64> = if max_im <= 1e-12 * max_abs {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                m[(a, b)] = 0.5 * (weighted[[a, b]].re + weighted[[b, a]].re);
            }
        }
        m.symmetric_eigenvalues().iter().copied().collect()
    } else {
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                m[(a, b)] = 0.5 * (weighted[[a, b]] + weighted[[b, a]].conj());
            }
        }
        m.symmetric_eigenvalues().iter().copied().collect()
    };
    SpectrumReport::from_eigenvalues(raw, &gram.meta.model, &gram.meta.assembly)
}

/// Eigenvalues (descending) of an explicit real symmetric kernel matrix
/// with quadrature weights, used by the synthetic-kernel oracles.
pub fn eigen_weighted(matrix: &DMatrix<f64>, weights: &[f64]) -> Vec<f64> {
    let n = weights.len();
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            m[(a, b)] = 0.5 * (matrix[(a, b)] + matrix[(b, a)]) * sqrt_w[a] * sqrt_w[b];
        }
    }
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Decay law fitted to a spectrum segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayLaw {
    /// λ_n ≈ prefactor · n^(−p)
    PowerLaw { p: f64 },
    /// λ_n ≈ prefactor · exp(−c n^s)
    StretchedExp { c: f64, s: f64 },
}

/// Least-squares fit diagnostics over a 1-based index range.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub law: DecayLaw,
    pub prefactor: f64,
    pub r_squared: f64,
    pub fit_range: (usize, usize),
}

/// Eigenvalues below this multiple of λ₁ are excluded from fits (double
/// precision floor).
pub const FIT_FLOOR: f64 = 1e-14;

fn fit_points(spectrum: &SpectrumReport, range: (usize, usize)) -> Result<Vec<(usize, f64)>> {
    let (lo, hi) = range;
    if lo < 1 || hi > spectrum.n_modes || hi < lo + 9 {
        return Err(Error::InvalidParameter(format!(
            "fit range {lo}..{hi} needs at least 10 modes inside 1..{}",
            spectrum.n_modes
        )));
    }
    let floor = FIT_FLOOR * spectrum.lambda1();
    let pts: Vec<(usize, f64)> = (lo..=hi)
        .map(|n| (n, spectrum.eigenvalues[n - 1]))
        .filter(|&(_, v)| v > floor)
        .collect();
    if pts.len() < 10 {
        return Err(Error::InvalidParameter(
            "fewer than 10 eigenvalues above the precision floor in the fit range".into(),
        ));
    }
    Ok(pts)
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let mean = sy / n;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean) * (y - mean)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r2 = if ss_tot <= f64::EPSILON * mean.abs().max(1.0) { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, intercept, r2)
}

/// Fits log λ_n = log C − p log n over the range.
pub fn fit_power(spectrum: &SpectrumReport, range: (usize, usize)) -> Result<DecayFit> {
    let pts = fit_points(spectrum, range)?;
    let xs: Vec<f64> = pts.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|&(_, v)| v.ln()).collect();
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok(DecayFit {
        law: DecayLaw::PowerLaw { p: -slope },
        prefactor: intercept.exp(),
        r_squared: r2,
        fit_range: range,
    })
}

/// Fits log λ_n = a − c n^s for a fixed stretch exponent s.
pub fn fit_stretched(spectrum: &SpectrumReport, s: f64, range: (usize, usize)) -> Result<DecayFit> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("stretch exponent must be in (0,1), got {s}")));
    }
    let pts = fit_points(spectrum, range)?;
    let xs: Vec<f64> = pts.iter().map(|&(n, _)| (n as f64).powf(s)).collect();
    let ys: Vec<f64> = pts.iter().map(|&(_, v)| v.ln()).collect();
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok(DecayFit {
        law: DecayLaw::StretchedExp { c: -slope, s },
        prefactor: intercept.exp(),
        r_squared: r2,
        fit_range: range,
    })
}

/// Comparison of a strongly and a weakly attenuating spectrum from the
/// same geometry.
#[derive(Debug, Clone)]
pub struct DecayComparison {
    /// First index from which the strong eigenvalues stay below the weak
    /// ones for the rest of the comparable range; None if never.
    pub crossover: Option<usize>,
    /// λ_strong(n)/λ_weak(n) over the comparable range.
    pub ratios: Vec<f64>,
    pub n_compared: usize,
}

/// Locates the crossover index beyond which the strong-model eigenvalues
/// fall permanently below the weak-model eigenvalues. Only indices where
/// both spectra sit above the precision floor are compared.
pub fn compare_decay(weak: &SpectrumReport, strong: &SpectrumReport) -> DecayComparison {
    let floor_w = FIT_FLOOR * weak.lambda1();
    let floor_s = FIT_FLOOR * strong.lambda1();
    let n = weak
        .eigenvalues
        .iter()
        .zip(&strong.eigenvalues)
        .take_while(|(w, s)| **w > floor_w && **s > floor_s)
        .count();
    let ratios: Vec<f64> = (0..n).map(|k| strong.eigenvalues[k] / weak.eigenvalues[k]).collect();
    let mut crossover = None;
    for k in (0..n).rev() {
        if ratios[k] >= 1.0 {
            crossover = if k + 1 < n { Some(k + 2) } else { None };
            break;
        }
        if k == 0 {
            crossover = Some(1);
        }
    }
    DecayComparison { crossover, ratios, n_compared: n }
}
