//! Attenuation coefficients κ(ω) and their holomorphic extensions κ̃(z).
//!
//! An attenuation coefficient is a function κ: ℝ → ℂ̄₊ with the symmetry
//! κ(−ω) = −conj(κ(ω)) that extends holomorphically to the closed upper
//! half-plane H̄ and maps it into itself. The module carries the five
//! catalog models (thermo-viscous, Kowar–Scherzer–Bonnefond, power law,
//! modified Szabo, Nachman–Smith–Waag) plus the non-attenuating linear
//! medium and user-supplied custom coefficients.
//!
//! Every catalog model is classified as either *strong* (Im κ(ω) grows
//! like κ₀|ω|^β) or *weak* (κ(ω) = ω/c + iκ∞ + κ_*(ω) with a bounded,
//! square-integrable residual κ_*). The classification drives which Gram
//! assembly route the operator module takes.
//!
//! All fractional powers use the principal branch, φ ∈ (−π, π].

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Evaluator for a user-supplied holomorphic extension κ̃ on H̄.
#[derive(Clone)]
pub struct CustomModel {
    pub name: String,
    eval: Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
}

impl CustomModel {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        CustomModel { name: name.into(), eval: Arc::new(eval) }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }
}

impl fmt::Debug for CustomModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomModel").field("name", &self.name).finish()
    }
}

/// An attenuation model: one of the catalog entries or a custom coefficient.
///
/// Models are immutable after construction; evaluation is pure and safe to
/// call concurrently.
#[derive(Debug, Clone)]
pub enum AttenuationModel {
    /// κ(ω) = ω / √(1 − iτω), τ > 0. Strong, infinite propagation speed.
    ThermoViscous { tau: f64 },
    /// κ(ω) = ω (1 + α / √(1 + (−iτω)^γ)), γ ∈ (0,1), α > 0, τ > 0.
    /// Strong, propagation speed 1.
    KowarScherzerBonnefond { gamma: f64, alpha: f64, tau: f64 },
    /// κ(ω) = ω + iα(−iω)^γ, γ ∈ (0,1), α > 0. Strong, speed 1.
    PowerLaw { gamma: f64, alpha: f64 },
    /// κ(ω) = ω √(1 + α(−iω)^(γ−1)), γ ∈ (0,1), α > 0. Strong, speed 1.
    ModifiedSzabo { gamma: f64, alpha: f64 },
    /// κ(ω) = (ω/c₀) √((1 − iτ̃ω)/(1 − iτω)), c₀ > 0, 0 < τ̃ < τ.
    /// Weak, propagation speed c₀√(τ/τ̃).
    NachmanSmithWaag { c0: f64, tau: f64, tau_tilde: f64 },
    /// κ(ω) = ω/c, the non-attenuating medium. Weak with κ∞ = 0, κ_* ≡ 0.
    LinearNonAttenuating { c: f64 },
    /// User-supplied holomorphic extension; classified empirically.
    Custom(CustomModel),
}

impl AttenuationModel {
    /// Short identifier used in configs, manifests and CSV metadata.
    pub fn name(&self) -> &str {
        match self {
            AttenuationModel::ThermoViscous { .. } => "thermo_viscous",
            AttenuationModel::KowarScherzerBonnefond { .. } => "kowar_scherzer_bonnefond",
            AttenuationModel::PowerLaw { .. } => "power_law",
            AttenuationModel::ModifiedSzabo { .. } => "modified_szabo",
            AttenuationModel::NachmanSmithWaag { .. } => "nachman_smith_waag",
            AttenuationModel::LinearNonAttenuating { .. } => "linear",
            AttenuationModel::Custom(c) => &c.name,
        }
    }

    /// Checks the parameter ranges of the catalog models.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            AttenuationModel::ThermoViscous { tau } => {
                if !(tau > 0.0 && tau.is_finite()) {
                    return bad(format!("thermo_viscous requires tau > 0, got {tau}"));
                }
            }
            AttenuationModel::KowarScherzerBonnefond { gamma, alpha, tau } => {
                if !(gamma > 0.0 && gamma < 1.0) {
                    return bad(format!("kowar_scherzer_bonnefond requires gamma in (0,1), got {gamma}"));
                }
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return bad(format!("kowar_scherzer_bonnefond requires alpha > 0, got {alpha}"));
                }
                if !(tau > 0.0 && tau.is_finite()) {
                    return bad(format!("kowar_scherzer_bonnefond requires tau > 0, got {tau}"));
                }
            }
            AttenuationModel::PowerLaw { gamma, alpha } => {
                if !(gamma > 0.0 && gamma < 1.0) {
                    return bad(format!("power_law requires gamma in (0,1), got {gamma}"));
                }
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return bad(format!("power_law requires alpha > 0, got {alpha}"));
                }
            }
            AttenuationModel::ModifiedSzabo { gamma, alpha } => {
                if !(gamma > 0.0 && gamma < 1.0) {
                    return bad(format!("modified_szabo requires gamma in (0,1), got {gamma}"));
                }
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return bad(format!("modified_szabo requires alpha > 0, got {alpha}"));
                }
            }
            AttenuationModel::NachmanSmithWaag { c0, tau, tau_tilde } => {
                if !(c0 > 0.0 && c0.is_finite()) {
                    return bad(format!("nachman_smith_waag requires c0 > 0, got {c0}"));
                }
                if !(tau_tilde > 0.0 && tau_tilde < tau && tau.is_finite()) {
                    return bad(format!(
                        "nachman_smith_waag requires 0 < tau_tilde < tau, got tau_tilde={tau_tilde}, tau={tau}"
                    ));
                }
            }
            AttenuationModel::LinearNonAttenuating { c } => {
                if !(c > 0.0 && c.is_finite()) {
                    return bad(format!("linear requires c > 0, got {c}"));
                }
            }
            AttenuationModel::Custom(_) => {}
        }
        Ok(())
    }

    /// Evaluates κ(ω) on the real axis with the principal branch for all
    /// fractional powers.
    pub fn kappa(&self, omega: f64) -> Complex64 {
        self.kappa_tilde_unchecked(Complex64::new(omega, 0.0))
    }

    /// Evaluates the holomorphic extension κ̃(z) for Im z ≥ 0.
    ///
    /// Points on the real axis are routed through the same expression as
    /// [`Self::kappa`], so the restriction agrees to machine precision.
    pub fn kappa_tilde(&self, z: Complex64) -> Result<Complex64> {
        if z.im < 0.0 {
            return Err(Error::Domain(format!(
                "kappa_tilde requires Im z >= 0, got z = {z}"
            )));
        }
        Ok(self.kappa_tilde_unchecked(z))
    }

    fn kappa_tilde_unchecked(&self, z: Complex64) -> Complex64 {
        if z == Complex64::ZERO && !matches!(self, AttenuationModel::Custom(_)) {
            // every catalog coefficient carries a factor z
            return Complex64::ZERO;
        }
        let i = Complex64::I;
        match *self {
            AttenuationModel::ThermoViscous { tau } => z / (1.0 - i * tau * z).sqrt(),
            AttenuationModel::KowarScherzerBonnefond { gamma, alpha, tau } => {
                z * (1.0 + alpha / (1.0 + (-i * tau * z).powf(gamma)).sqrt())
            }
            AttenuationModel::PowerLaw { gamma, alpha } => z + i * alpha * (-i * z).powf(gamma),
            AttenuationModel::ModifiedSzabo { gamma, alpha } => {
                z * (1.0 + alpha * (-i * z).powf(gamma - 1.0)).sqrt()
            }
            AttenuationModel::NachmanSmithWaag { c0, tau, tau_tilde } => {
                z / c0 * ((1.0 - i * tau_tilde * z) / (1.0 - i * tau * z)).sqrt()
            }
            AttenuationModel::LinearNonAttenuating { c } => z / c,
            AttenuationModel::Custom(ref m) => m.eval(z),
        }
    }
}

/// Parameters of a strong attenuation coefficient: Im κ(ω) ≥ κ₀|ω|^β for
/// |ω| ≥ ω₀, together with the ℓ = 0 polynomial bound |κ(ω)| ≤ κ₁(1+|ω|)^N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrongParams {
    pub kappa0: f64,
    pub beta: f64,
    pub omega0: f64,
    pub kappa1: f64,
    pub n_exp: u32,
}

/// Weak decomposition κ(ω) = ω/c + iκ∞ + κ_*(ω).
#[derive(Debug, Clone)]
pub struct WeakSplit {
    pub c: f64,
    pub kappa_inf: f64,
    model: AttenuationModel,
}

impl WeakSplit {
    pub fn new(c: f64, kappa_inf: f64, model: AttenuationModel) -> Self {
        WeakSplit { c, kappa_inf, model }
    }

    /// The residual κ_*(ω) = κ(ω) − ω/c − iκ∞.
    pub fn kappa_star(&self, omega: f64) -> Complex64 {
        self.model.kappa(omega) - Complex64::new(omega / self.c, self.kappa_inf)
    }

    pub fn model(&self) -> &AttenuationModel {
        &self.model
    }

    /// True when the residual vanishes identically (non-attenuating medium).
    pub fn is_lossless(&self) -> bool {
        matches!(self.model, AttenuationModel::LinearNonAttenuating { .. })
    }
}

/// Result of classifying an attenuation coefficient.
#[derive(Debug, Clone)]
pub enum Classification {
    Strong(StrongParams),
    Weak(WeakSplit),
}

impl Classification {
    pub fn strong(&self) -> Result<&StrongParams> {
        match self {
            Classification::Strong(p) => Ok(p),
            Classification::Weak(_) => {
                Err(Error::WrongClass { expected: "strong", got: "weak" })
            }
        }
    }

    pub fn weak(&self) -> Result<&WeakSplit> {
        match self {
            Classification::Weak(w) => Ok(w),
            Classification::Strong(_) => {
                Err(Error::WrongClass { expected: "weak", got: "strong" })
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Classification::Strong(_) => "strong",
            Classification::Weak(_) => "weak",
        }
    }
}

/// Margin applied to the leading asymptotic constant when choosing κ₀;
/// the tables only assert existence of the constant.
const STRONG_MARGIN: f64 = 0.9;

/// Computes the propagation speed c = lim_{ω→∞} iω/κ̃(iω) numerically.
///
/// The ratio is evaluated on the geometric ladder ω = ω_max·2^(−k) and the
/// limit is recovered with two levels of Aitken Δ² extrapolation, which is
/// exact for error terms of the form a·ω^(−p). Divergence (infinite speed)
/// is declared when the ratio grows monotonically by more than a factor of
/// two across three ladder steps.
pub fn propagation_speed(model: &AttenuationModel, omega_max: f64, tol: f64) -> Result<f64> {
    model.validate()?;
    if !(omega_max >= 1e6) {
        return Err(Error::InvalidParameter(format!(
            "propagation_speed requires omega_max >= 1e6, got {omega_max}"
        )));
    }
    const LADDER: usize = 10;
    // values ordered with increasing ω, v[LADDER-1] at ω_max
    let mut v = [0.0f64; LADDER];
    for (k, slot) in v.iter_mut().enumerate() {
        let omega = omega_max * 0.5f64.powi((LADDER - 1 - k) as i32);
        let z = Complex64::new(0.0, omega);
        let kt = model.kappa_tilde(z)?;
        if kt == Complex64::ZERO {
            return Err(Error::NoLimit(format!("kappa_tilde vanishes at z = {z}")));
        }
        let ratio = z / kt;
        // for admissible coefficients iω/κ̃(iω) is real and positive
        if ratio.im.abs() > 1e-6 * ratio.norm() {
            return Err(Error::NoLimit(format!(
                "iω/κ̃(iω) is not asymptotically real at ω = {omega}: {ratio}"
            )));
        }
        *slot = ratio.re;
    }

    // divergence: |v| grows by more than 2x across three consecutive steps
    let mut divergent = false;
    for w in v.windows(4) {
        if w[1] > w[0] && w[2] > w[1] && w[3] > w[2] && w[3] > 2.0 * w[0] {
            divergent = true;
        }
    }
    if divergent {
        return Ok(f64::INFINITY);
    }

    let aitken = |a: f64, b: f64, c: f64| -> f64 {
        let denom = c - 2.0 * b + a;
        if denom.abs() < 1e-300 {
            c
        } else {
            c - (c - b) * (c - b) / denom
        }
    };
    let sweep = |s: &[f64]| -> Vec<f64> {
        s.windows(3).map(|w| aitken(w[0], w[1], w[2])).collect()
    };
    // two iterated Aitken levels; the error model a·ω^(−p) is geometric in
    // the ladder index, which Δ² removes order by order
    let l2 = sweep(&sweep(&v));
    let limit = *l2.last().unwrap();
    let prev = l2[l2.len() - 2];
    if (limit - prev).abs() > tol * (1.0 + limit.abs()) {
        return Err(Error::NoLimit(format!(
            "extrapolation of iω/κ̃(iω) did not settle: {prev} vs {limit}"
        )));
    }
    if !(limit > 0.0) {
        return Err(Error::NoLimit(format!("extrapolated speed {limit} is not positive")));
    }
    Ok(limit)
}

/// Classifies a model as strong or weak.
///
/// Catalog models use the classification recorded in the model tables with
/// κ₀ set to [`STRONG_MARGIN`] times the leading asymptotic constant and ω₀
/// found by scanning the supplied grid; the strong inequality is then
/// verified on every grid point beyond ω₀. Custom models are classified
/// empirically from the grid samples, which is a heuristic.
pub fn classify(model: &AttenuationModel, grid: &[f64]) -> Result<Classification> {
    model.validate()?;
    if grid.is_empty() {
        return Err(Error::InvalidParameter("classification grid is empty".into()));
    }
    match *model {
        AttenuationModel::ThermoViscous { tau } => {
            // Im κ(ω) = √(ω/2τ) + O(1/ω)
            let p = strong_from_asymptotics(model, 1.0 / (2.0 * tau).sqrt(), 0.5, 1.0, 1, grid)?;
            Ok(Classification::Strong(p))
        }
        AttenuationModel::KowarScherzerBonnefond { gamma, alpha, tau } => {
            // Im κ(ω) = α τ^(−γ/2) sin(πγ/4) ω^(1−γ/2) (1 + O(ω^−γ))
            let c0 = alpha * tau.powf(-gamma / 2.0) * (std::f64::consts::PI * gamma / 4.0).sin();
            let p = strong_from_asymptotics(model, c0, 1.0 - gamma / 2.0, 1.0 + alpha, 1, grid)?;
            Ok(Classification::Strong(p))
        }
        AttenuationModel::PowerLaw { gamma, alpha } => {
            // Im κ(ω) = α sin((1−γ)π/2) |ω|^γ exactly
            let c0 = alpha * ((1.0 - gamma) * std::f64::consts::PI / 2.0).sin();
            let p = strong_from_asymptotics(model, c0, gamma, 1.0 + alpha, 1, grid)?;
            Ok(Classification::Strong(p))
        }
        AttenuationModel::ModifiedSzabo { gamma: _, alpha } => {
            // Im κ(ω) = ω + O(ω^γ)
            let p = strong_from_asymptotics(model, 1.0, 1.0, 1.0 + alpha, 1, grid)?;
            Ok(Classification::Strong(p))
        }
        AttenuationModel::NachmanSmithWaag { c0, tau, tau_tilde } => {
            let c = c0 * (tau / tau_tilde).sqrt();
            let kappa_inf = (tau - tau_tilde) / (2.0 * c0 * tau * (tau_tilde * tau).sqrt());
            Ok(Classification::Weak(WeakSplit::new(c, kappa_inf, model.clone())))
        }
        AttenuationModel::LinearNonAttenuating { c } => {
            Ok(Classification::Weak(WeakSplit::new(c, 0.0, model.clone())))
        }
        AttenuationModel::Custom(_) => classify_empirical(model, grid),
    }
}

/// Builds `StrongParams` from the table asymptotics: κ₀ = margin × leading
/// constant, ω₀ scanned from the grid, and the inequality verified beyond ω₀.
fn strong_from_asymptotics(
    model: &AttenuationModel,
    leading: f64,
    beta: f64,
    kappa1: f64,
    n_exp: u32,
    grid: &[f64],
) -> Result<StrongParams> {
    let kappa0 = STRONG_MARGIN * leading;
    let mut abs: Vec<f64> = grid.iter().map(|w| w.abs()).filter(|w| *w > 0.0).collect();
    abs.sort_by(|a, b| a.total_cmp(b));
    abs.dedup();
    // smallest grid magnitude such that the inequality holds from there on
    let holds = |w: f64| model.kappa(w).im >= kappa0 * w.powf(beta);
    let mut omega0 = 0.0;
    for (idx, &w) in abs.iter().enumerate() {
        if !holds(w) {
            omega0 = match abs.get(idx + 1) {
                Some(&next) => next,
                None => {
                    return Err(Error::Classification(format!(
                        "strong inequality fails at the largest grid point ω = {w}"
                    )))
                }
            };
        }
    }
    for &w in abs.iter().filter(|w| **w >= omega0) {
        if !holds(w) {
            return Err(Error::Classification(format!(
                "strong inequality Im κ ≥ κ₀|ω|^β fails at ω = {w} beyond ω₀ = {omega0}"
            )));
        }
    }
    Ok(StrongParams { kappa0, beta, omega0, kappa1, n_exp })
}

/// Heuristic classification of a custom coefficient from grid samples.
fn classify_empirical(model: &AttenuationModel, grid: &[f64]) -> Result<Classification> {
    let mut abs: Vec<f64> = grid.iter().map(|w| w.abs()).filter(|w| *w > 0.0).collect();
    abs.sort_by(|a, b| a.total_cmp(b));
    abs.dedup();
    if abs.len() < 8 {
        return Err(Error::Classification(
            "need at least 8 distinct grid magnitudes to classify a custom model".into(),
        ));
    }

    // fit log Im κ = log c + β log ω on the top half of the grid
    let top = &abs[abs.len() / 2..];
    let mut pts = Vec::new();
    for &w in top {
        let im = model.kappa(w).im;
        if im > 0.0 {
            pts.push((w.ln(), im.ln()));
        }
    }
    if pts.len() == top.len() {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let beta = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let logc = (sy - beta * sx) / n;
        if beta > 0.05 {
            // looks like power growth; take κ₀ below the fitted constant
            let kappa0 = STRONG_MARGIN * logc.exp();
            let holds = |w: f64| model.kappa(w).im >= kappa0 * w.powf(beta);
            let mut omega0 = 0.0;
            let mut ok = true;
            for (idx, &w) in abs.iter().enumerate() {
                if !holds(w) {
                    match abs.get(idx + 1) {
                        Some(&next) => omega0 = next,
                        None => ok = false,
                    }
                }
            }
            if ok {
                // polynomial bound fitted on the grid
                let kappa1 = abs
                    .iter()
                    .map(|&w| model.kappa(w).norm() / (1.0 + w))
                    .fold(0.0f64, f64::max)
                    * 1.1;
                return Ok(Classification::Strong(StrongParams {
                    kappa0,
                    beta,
                    omega0,
                    kappa1,
                    n_exp: 1,
                }));
            }
        }
    }

    // weak attempt: c from Re κ slope at the top of the grid, κ∞ from Im κ
    let w_hi = *abs.last().unwrap();
    let re_hi = model.kappa(w_hi).re;
    if re_hi.abs() < 1e-12 {
        return Err(Error::Classification(
            "custom model has neither growing Im κ nor a linear Re κ term".into(),
        ));
    }
    let c = w_hi / re_hi;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Classification(format!(
            "estimated wave speed {c} is not positive"
        )));
    }
    let kappa_inf = model.kappa(w_hi).im.max(0.0);
    let split = WeakSplit::new(c, kappa_inf, model.clone());
    // residual must be bounded and decaying on the grid
    let r_lo = split.kappa_star(abs[abs.len() / 2]).norm();
    let r_hi = split.kappa_star(w_hi).norm();
    let bounded = abs.iter().all(|&w| split.kappa_star(w).norm() < 1e6);
    if !bounded || (r_hi > 0.5 * r_lo && r_hi > 1e-10) {
        return Err(Error::Classification(
            "custom model residual κ_* does not decay on the grid; \
             neither strong nor weak criteria hold"
                .into(),
        ));
    }
    Ok(Classification::Weak(split))
}

/// Maximum of |κ(−ω) + conj(κ(ω))| over the grid.
pub fn validate_symmetry(model: &AttenuationModel, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&w| (model.kappa(-w) + model.kappa(w).conj()).norm())
        .fold(0.0, f64::max)
}

/// One sample of the range map z ↦ κ̃(z).
#[derive(Debug, Clone, Copy)]
pub struct RangeSample {
    pub z: Complex64,
    pub kappa: Complex64,
    /// Set when Im κ̃(z) < −1e−10, i.e. the sample escapes H̄.
    pub flagged: bool,
}

/// Tolerance below which Im κ̃ counts as escaping the closed upper half-plane.
pub const RANGE_FLAG_TOL: f64 = 1e-10;

/// Evaluates κ̃ on a sample grid of H̄, flagging any point mapped below H̄.
pub fn range_grid(model: &AttenuationModel, zs: &[Complex64]) -> Result<Vec<RangeSample>> {
    zs.iter()
        .map(|&z| {
            let kappa = model.kappa_tilde(z)?;
            Ok(RangeSample { z, kappa, flagged: kappa.im < -RANGE_FLAG_TOL })
        })
        .collect()
}
