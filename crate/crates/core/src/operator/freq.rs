//! Frequency quadrature grids for the operator assembly.
//!
//! Nodes are Gauss–Legendre points on geometric panels [0,1],[1,2],[2,4],…
//! mirrored to negative frequencies. Panels are split and their order is
//! chosen from the phase variation of κ across the panel (the integrands
//! oscillate like e^(iκ·distance)), and panels whose amplitude weight is
//! negligible get low order. Extending ω_cut appends panels and leaves all
//! existing nodes untouched, so truncation studies isolate the pure tail
//! contribution.

use crate::attenuation::{AttenuationModel, StrongParams};
use crate::error::{Error, Result};
use crate::quad;
use crate::wavekernel::default_omega_cut;

/// Phase span (radians) a single panel may carry before it is split.
const MAX_PANEL_PHASE: f64 = 40.0;

/// One quadrature panel [lo, hi] with its Gauss–Legendre order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub lo: f64,
    pub hi: f64,
    pub order: usize,
}

/// Symmetric frequency grid; nodes are stored for ω > 0 and mirrored.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    panels: Vec<Panel>,
    /// (ω, weight) for ω > 0, ascending.
    positive: Vec<(f64, f64)>,
    omega_cut: f64,
}

impl FrequencyGrid {
    /// Grid for a strong coefficient on a geometry of diameter `diam`:
    /// ω_cut from the e^(−35) tail rule rounded up to a power of two, and
    /// panel resolution driven by the decay weight e^(−2ε Im κ).
    pub fn for_strong(
        model: &AttenuationModel,
        params: &StrongParams,
        eps: f64,
        diam: f64,
    ) -> Result<FrequencyGrid> {
        if !(eps > 0.0 && diam > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "frequency grid requires eps > 0 and diam > 0, got eps={eps}, diam={diam}"
            )));
        }
        let cut = pow2_ceil(default_omega_cut(params.kappa0, params.beta, eps));
        let amp = |omega: f64| (-2.0 * eps * model.kappa(omega).im).exp();
        let grid = Self::build(model, cut, 2.0 * diam, &amp);
        // tail weight must be negligible at the cut
        let tail = amp(grid.omega_cut);
        if tail >= 1e-12 {
            return Err(Error::Numerics(format!(
                "strong grid tail weight e^(-2 eps Im kappa) = {tail:.3e} at omega_cut = {} \
                 is above 1e-12",
                grid.omega_cut
            )));
        }
        Ok(grid)
    }

    /// Band-limited grid up to `omega_band` for weak coefficients. The
    /// amplitude callback weights panel resolution (pass `|_| 1.0` for a
    /// flat weight).
    pub fn banded(
        model: &AttenuationModel,
        omega_band: f64,
        diam: f64,
        amp: &dyn Fn(f64) -> f64,
    ) -> Result<FrequencyGrid> {
        if !(omega_band > 0.0 && diam > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "frequency grid requires omega_band > 0 and diam > 0, got {omega_band}, {diam}"
            )));
        }
        Ok(Self::build(model, pow2_ceil(omega_band), 2.0 * diam, amp))
    }

    fn build(
        model: &AttenuationModel,
        omega_cut: f64,
        phase_scale: f64,
        amp: &dyn Fn(f64) -> f64,
    ) -> FrequencyGrid {
        let mut panels = Vec::new();
        for (lo, hi) in crate::wavekernel::geometric_panels(omega_cut) {
            split_panel(model, lo, hi, phase_scale, amp, &mut panels);
        }
        let positive = nodes_for(&panels);
        FrequencyGrid { panels, positive, omega_cut }
    }

    /// Same grid with panels appended up to 2·ω_cut; existing nodes are
    /// bit-identical.
    pub fn extend_doubled(
        &self,
        model: &AttenuationModel,
        phase_scale: f64,
        amp: &dyn Fn(f64) -> f64,
    ) -> FrequencyGrid {
        let mut panels = self.panels.clone();
        let new_cut = 2.0 * self.omega_cut;
        let mut lo = self.omega_cut;
        while lo < new_cut {
            let hi = (lo * 2.0).min(new_cut);
            split_panel(model, lo, hi, phase_scale, amp, &mut panels);
            lo = hi;
        }
        let positive = nodes_for(&panels);
        FrequencyGrid { panels, positive, omega_cut: new_cut }
    }

    pub fn omega_cut(&self) -> f64 {
        self.omega_cut
    }

    /// Positive-frequency nodes, ascending.
    pub fn positive_nodes(&self) -> &[(f64, f64)] {
        &self.positive
    }

    /// Full symmetric node list (negative mirror first, ascending).
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let mut all: Vec<(f64, f64)> =
            self.positive.iter().rev().map(|&(w, wt)| (-w, wt)).collect();
        all.extend_from_slice(&self.positive);
        all
    }

    /// Number of nodes in the full symmetric grid.
    pub fn len(&self) -> usize {
        2 * self.positive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty()
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }
}

fn pow2_ceil(x: f64) -> f64 {
    let mut p = 1.0f64;
    while p < x {
        p *= 2.0;
    }
    p
}

/// Splits [lo, hi] so each part carries at most `MAX_PANEL_PHASE` radians
/// of κ-phase, with order and split count relaxed where `amp` is small.
fn split_panel(
    model: &AttenuationModel,
    lo: f64,
    hi: f64,
    phase_scale: f64,
    amp: &dyn Fn(f64) -> f64,
    out: &mut Vec<Panel>,
) {
    let span = (model.kappa(hi) - model.kappa(lo)).norm() * phase_scale;
    let weight = amp(lo).max(amp(hi));
    let parts = if weight < 1e-10 { 1 } else { (span / MAX_PANEL_PHASE).ceil().max(1.0) as usize };
    let step = (hi - lo) / parts as f64;
    for p in 0..parts {
        let a = lo + step * p as f64;
        let b = if p + 1 == parts { hi } else { lo + step * (p + 1) as f64 };
        let sub_span = (model.kappa(b) - model.kappa(a)).norm() * phase_scale;
        let mut order = ((0.5 * sub_span).ceil() as usize + 10).clamp(8, 40);
        let w = amp(a).max(amp(b));
        if w < 1e-10 {
            order = 8;
        } else if w < 1e-6 {
            order = order.min(16);
        }
        out.push(Panel { lo: a, hi: b, order });
    }
}

fn nodes_for(panels: &[Panel]) -> Vec<(f64, f64)> {
    let mut nodes = Vec::new();
    for p in panels {
        quad::gl_panel(p.lo, p.hi, p.order, &mut nodes);
    }
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attenuation::classify;

    #[test]
    fn strong_grid_reaches_tail_rule() {
        let m = AttenuationModel::ThermoViscous { tau: 1.0 };
        let grid: Vec<f64> = (1..200).map(|k| 0.5 * k as f64).collect();
        let class = classify(&m, &grid).unwrap();
        let p = *class.strong().unwrap();
        let fg = FrequencyGrid::for_strong(&m, &p, 0.2, 2.0).unwrap();
        // κ₀ ω^β = 35/(2ε) gives ω ≈ 1.9e4; next power of two is 32768
        assert_eq!(fg.omega_cut(), 32768.0);
        let tail = (-2.0 * 0.2 * m.kappa(fg.omega_cut()).im).exp();
        assert!(tail < 1e-12);
        // weights integrate the constant 1 to 2·ω_cut over the mirrored grid
        let total: f64 = fg.nodes().iter().map(|&(_, w)| w).sum();
        assert!((total - 2.0 * fg.omega_cut()).abs() < 1e-6 * fg.omega_cut());
    }

    #[test]
    fn grid_is_symmetric() {
        let m = AttenuationModel::LinearNonAttenuating { c: 1.0 };
        let fg = FrequencyGrid::banded(&m, 64.0, 2.0, &|_| 1.0).unwrap();
        let all = fg.nodes();
        let n = all.len();
        for k in 0..n / 2 {
            assert_eq!(all[k].0, -all[n - 1 - k].0);
            assert_eq!(all[k].1, all[n - 1 - k].1);
        }
    }

    #[test]
    fn doubling_preserves_existing_nodes() {
        let m = AttenuationModel::ThermoViscous { tau: 1.0 };
        let grid: Vec<f64> = (1..200).map(|k| 0.5 * k as f64).collect();
        let class = classify(&m, &grid).unwrap();
        let p = *class.strong().unwrap();
        let eps = 0.2;
        let amp = {
            let m = m.clone();
            move |omega: f64| (-2.0 * eps * m.kappa(omega).im).exp()
        };
        let fg = FrequencyGrid::for_strong(&m, &p, eps, 2.0).unwrap();
        let fg2 = fg.extend_doubled(&m, 4.0, &amp);
        assert_eq!(fg2.omega_cut(), 2.0 * fg.omega_cut());
        let a = fg.positive_nodes();
        let b = fg2.positive_nodes();
        assert!(b.len() > a.len());
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn banded_grid_resolves_oscillation() {
        // linear model, c=1: a panel [a,b] carries (b−a)·2·diam radians;
        // resolution rule caps panels at MAX_PANEL_PHASE
        let m = AttenuationModel::LinearNonAttenuating { c: 1.0 };
        let fg = FrequencyGrid::banded(&m, 128.0, 1.6, &|_| 1.0).unwrap();
        for p in fg.panels() {
            let span = (p.hi - p.lo) * 3.2;
            assert!(span <= MAX_PANEL_PHASE * 1.001, "panel {:?} span {span}", p);
        }
        // sin integrates correctly over the grid: ∫ cos(s·ω) dω, s = diam
        let s = 1.6;
        let got: f64 = fg.nodes().iter().map(|&(w, wt)| wt * (s * w).cos()).sum();
        let want = 2.0 * (s * fg.omega_cut()).sin() / s;
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }
}
