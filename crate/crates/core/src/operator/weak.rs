//! Gram kernel of weakly attenuating media via the three-part split.
//!
//! For κ(ω) = ω/c + iκ∞ + κ_*(ω) the frequency integral of the Gram
//! kernel is only conditionally convergent, so it is never evaluated
//! directly. Instead the kernel is split as F = F⁰ + F¹ + F²:
//!
//! - F⁰ collapses the frequency integral exactly into a line integral
//!   over the circle in which the bisection plane of the two points cuts
//!   the measurement sphere;
//! - F¹ is linear in κ_* and trades its frequency integral for the
//!   inverse Fourier transform κ̌_*, precomputed on a uniform time grid;
//! - F² collects the quadratic remainder e^z − 1 − z, which is absolutely
//!   convergent and integrated over an explicit frequency band.
//!
//! The pointwise F⁰ kernel diverges like 1/|x−y| on the diagonal, which
//! is integrable but not samplable; diagonal entries therefore use a
//! regularization rule (see [`DiagonalRule`]).

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::{Discretization, FrequencyGrid, GramKernel, GramMeta};
use crate::attenuation::WeakSplit;
use crate::error::{Error, Result};
use crate::geometry::{bisection_circle, BallGeometry, BoundaryQuadrature};
use crate::quad;
use crate::wavekernel::{norm3, KERNEL_PREFACTOR};

const SQRT_TAU: f64 = 2.5066282746310002; // √(2π)

/// e^z − 1 − z evaluated stably for small |z|.
fn expm1m(z: Complex64) -> Complex64 {
    if z.norm_sqr() < 2.5e-3 {
        // series from z²/2 up to z⁸/8!
        let mut acc = Complex64::new(1.0 / 40320.0, 0.0);
        for denom in [5040.0, 720.0, 120.0, 24.0, 6.0, 2.0] {
            acc = acc * z + 1.0 / denom;
        }
        acc * z * z
    } else {
        z.exp() - 1.0 - z
    }
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Closed-form constant-attenuation kernel F⁰(x, y) for x ≠ y: a line
/// integral over the bisection circle γ. On a ball the projection factor
/// |ν − ⟨e,ν⟩e|⁻¹ is the constant R/r_circle, leaving
///
/// ```text
/// F⁰(x,y) = R/(16π²|y−x|) ∫₀^{2π} e^(−2κ∞ d(θ)) / d(θ) dθ,
/// ```
///
/// with d(θ) the distance from x to the circle point. The trapezoidal
/// rule on the periodic integrand is refined until the value settles to
/// 1e−10 relative.
pub fn gram_weak_f0(split: &WeakSplit, geom: &BallGeometry, x: [f64; 3], y: [f64; 3]) -> Result<f64> {
    if !geom.contains_source(x) || !geom.contains_source(y) {
        return Err(Error::Geometry("F0 arguments must lie in the source region".into()));
    }
    let dxy = norm3(sub3(y, x));
    if dxy == 0.0 {
        return Err(Error::Geometry(
            "F0 closed form is singular on the diagonal; use the diagonal rule".into(),
        ));
    }
    let circle = bisection_circle(geom, x, y)?;
    let integral = circle_integral(split.kappa_inf, &circle, x)?;
    Ok(geom.radius / (16.0 * std::f64::consts::PI.powi(2) * dxy) * integral)
}

/// ∫₀^{2π} e^(−2κ∞ d(θ))/d(θ) dθ over a bisection circle.
fn circle_integral(
    kappa_inf: f64,
    circle: &crate::geometry::BisectionCircle,
    x: [f64; 3],
) -> Result<f64> {
    let basis = circle.in_plane_basis();
    let eval = |m: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..m {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            let p = circle.point(theta, basis);
            let d = norm3(sub3(p, x));
            s += (-2.0 * kappa_inf * d).exp() / d;
        }
        s * 2.0 * std::f64::consts::PI / m as f64
    };
    let mut m = 32;
    let mut prev = eval(m);
    loop {
        m *= 2;
        let next = eval(m);
        if (next - prev).abs() <= 1e-10 * next.abs() || m >= 8192 {
            return Ok(next);
        }
        prev = next;
    }
}

/// Coincidence strength of the F⁰ singularity: A(x, e) = lim |x−y|·F⁰ as
/// y → x along direction e.
fn f0_coincidence(split: &WeakSplit, geom: &BallGeometry, x: [f64; 3], e: [f64; 3]) -> Result<f64> {
    let d = crate::wavekernel::dot3(sub3(x, geom.center), e);
    let r2 = geom.radius * geom.radius - d * d;
    let circle = crate::geometry::BisectionCircle {
        center: [
            geom.center[0] + d * e[0],
            geom.center[1] + d * e[1],
            geom.center[2] + d * e[2],
        ],
        radius: r2.max(0.0).sqrt(),
        normal: e,
    };
    let integral = circle_integral(split.kappa_inf, &circle, x)?;
    Ok(geom.radius / (16.0 * std::f64::consts::PI.powi(2)) * integral)
}

/// Tabulated inverse Fourier transform κ̌_*(t) of the weak residual,
/// sampled uniformly in ω and interpolated linearly in t. Arguments
/// outside the tabulated range evaluate to zero.
#[derive(Debug, Clone)]
pub struct KappaStarTransform {
    dt_fine: f64,
    fine: Vec<Complex64>,
    dt_coarse: f64,
    coarse: Vec<Complex64>,
    t_fine_max: f64,
    pub t_max: f64,
    pub omega_band: f64,
    /// Largest |κ̌_*| seen near the transform period edges; small values
    /// certify that the circular wrap-around does not alias the tails.
    edge_max: f64,
}

impl KappaStarTransform {
    /// κ̌_*(t) by linear interpolation; zero outside the tabulated range.
    pub fn eval(&self, t: f64) -> Complex64 {
        let at = t.abs();
        if at <= self.t_fine_max {
            interp(&self.fine, self.dt_fine, self.t_fine_max, t)
        } else if at <= self.t_max {
            interp(&self.coarse, self.dt_coarse, self.t_max, t)
        } else {
            Complex64::ZERO
        }
    }

    /// ‖κ̌_*‖₂ over the tabulated window.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.coarse.iter().map(|z| z.norm_sqr()).sum();
        (sum * self.dt_coarse).sqrt()
    }
}

fn interp(table: &[Complex64], dt: f64, t_abs_max: f64, t: f64) -> Complex64 {
    let pos = (t + t_abs_max) / dt;
    let idx = pos.floor() as isize;
    if idx < 0 {
        return table[0];
    }
    let idx = idx as usize;
    if idx + 1 >= table.len() {
        return *table.last().unwrap();
    }
    let frac = pos - idx as f64;
    table[idx] * (1.0 - frac) + table[idx + 1] * frac
}

/// Computes κ̌_*(t) = (2π)^(−1/2) ∫ κ_*(ω) e^(iωt) dω on a uniform grid by
/// a zero-padded discrete transform.
///
/// The sampling extends to the frequency where |κ_*| has fallen below
/// `threshold` times its maximum, the spacing is π/t_max so the transform
/// covers |t| ≤ t_max, and the grid is zero-padded by a factor of at
/// least eight before the FFT.
pub fn kappa_star_transform(
    split: &WeakSplit,
    t_max: f64,
    threshold: f64,
) -> Result<KappaStarTransform> {
    if split.is_lossless() {
        // κ_* ≡ 0: an empty table evaluates to zero everywhere
        return Ok(KappaStarTransform {
            dt_fine: 1.0,
            fine: vec![Complex64::ZERO; 2],
            dt_coarse: 1.0,
            coarse: vec![Complex64::ZERO; 2],
            t_fine_max: 0.5,
            t_max,
            omega_band: 0.0,
            edge_max: 0.0,
        });
    }
    let max_resid = (0..=4000)
        .map(|k| split.kappa_star(0.01 * k as f64).norm())
        .fold(0.0f64, f64::max);
    if max_resid == 0.0 {
        return Err(Error::InvalidParameter("weak residual vanishes on the scan grid".into()));
    }
    let mut omega_band = 1.0f64;
    loop {
        let here = split.kappa_star(omega_band).norm();
        let above = split.kappa_star(1.5 * omega_band).norm();
        if here < threshold * max_resid && above < threshold * max_resid {
            break;
        }
        omega_band *= 2.0;
        if omega_band > 1e9 {
            return Err(Error::Numerics(format!(
                "weak residual decays too slowly: |kappa_star| = {here:.3e} at omega = {omega_band:.3e}"
            )));
        }
    }

    // The period of the discrete transform must cover the decay range of
    // κ̌_* on both sides, otherwise the circular wrap-around aliases the
    // exponential tail into the read window. Start from a generous decay
    // allowance and grow it until the values near the period edges are
    // negligible.
    let mut t_decay = 32.0f64;
    for attempt in 0..4 {
        let table = build_transform(split, omega_band, t_max, t_decay)?;
        let peak = table
            .coarse
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let edge = table.edge_max;
        if edge <= 1e-4 * peak || attempt == 3 {
            return Ok(table);
        }
        t_decay *= 2.0;
    }
    unreachable!()
}

fn build_transform(
    split: &WeakSplit,
    omega_band: f64,
    t_max: f64,
    t_decay: f64,
) -> Result<KappaStarTransform> {
    use rayon::prelude::*;
    let period = 2.0 * (t_max + t_decay);
    let d_omega = 2.0 * std::f64::consts::PI / period;
    let half = (omega_band / d_omega).ceil() as usize;
    // symmetric sampling ±half·δω preserves κ_*(−ω) = −conj κ_*(ω) exactly
    let n = 2 * half + 1;
    // pad for linear-interpolation resolution; wide grids are already fine
    let interp_len = (period / 1.5e-3).ceil() as usize;
    let m_min = if n > (1 << 21) { n.max(interp_len) } else { (8 * n).max(interp_len) };
    let mut m = 1usize;
    while m < m_min {
        m *= 2;
    }
    let mut buf = vec![Complex64::ZERO; m];
    buf[..n].par_iter_mut().enumerate().for_each(|(k, slot)| {
        let omega = (k as f64 - half as f64) * d_omega;
        *slot = split.kappa_star(omega);
    });
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);

    // κ̌_*(t_q) = (δω/√(2π)) e^(−i·half·δω·t_q) · X[q], t_q = q·δt (mod period)
    let dt = period / m as f64;
    let scale = d_omega / SQRT_TAU;
    let value_at = |q: usize| -> Complex64 {
        let t = if q <= m / 2 { q as f64 * dt } else { (q as f64 - m as f64) * dt };
        let phase = Complex64::from_polar(1.0, -(half as f64) * d_omega * t);
        scale * phase * buf[q]
    };

    // fine table around the t = 0 structure, coarse table over the read range
    let fine_half = 512usize.min(m / 4);
    let t_fine_max = fine_half as f64 * dt;
    let mut fine = Vec::with_capacity(2 * fine_half + 1);
    for q in 0..=2 * fine_half {
        let idx = (m + q - fine_half) % m;
        fine.push(value_at(idx));
    }
    let stride = ((1e-4 / dt).floor() as usize).max(1);
    let dt_coarse = stride as f64 * dt;
    let coarse_half = ((t_max / dt_coarse).floor() as usize).saturating_sub(1).max(1);
    let mut coarse = Vec::with_capacity(2 * coarse_half + 1);
    for s in 0..=2 * coarse_half {
        let q_signed = (s as isize - coarse_half as isize) * stride as isize;
        let idx = ((q_signed % m as isize + m as isize) % m as isize) as usize;
        coarse.push(value_at(idx));
    }
    // worst magnitude near the period edges ±period/2 (5% margin)
    let edge_lo = (0.95 * m as f64 / 2.0) as usize;
    let edge_hi = (1.05 * m as f64 / 2.0) as usize;
    let mut edge_max = 0.0f64;
    for q in (edge_lo..=edge_hi.min(m - 1)).step_by(stride.max(1)) {
        edge_max = edge_max.max(value_at(q).norm());
    }
    Ok(KappaStarTransform {
        dt_fine: dt,
        fine,
        dt_coarse,
        coarse,
        t_fine_max,
        t_max: coarse_half as f64 * dt_coarse,
        omega_band,
        edge_max,
    })
}

/// First-order kernel F¹(x, y): the κ_*-linear part of the split, with the
/// frequency integral replaced by κ̌_* lookups on the surface integral.
pub fn gram_weak_f1(
    split: &WeakSplit,
    boundary: &BoundaryQuadrature,
    transform: &KappaStarTransform,
    x: [f64; 3],
    y: [f64; 3],
) -> Complex64 {
    let pref = 1.0 / (16.0 * std::f64::consts::PI.powi(2) * SQRT_TAU);
    let c = split.c;
    let kinf = split.kappa_inf;
    let mut acc = Complex64::ZERO;
    for (xi, w) in boundary.points.iter().zip(&boundary.weights) {
        let rx = norm3(sub3(*xi, x));
        let ry = norm3(sub3(*xi, y));
        let damp = (-kinf * (rx + ry)).exp();
        let term = transform.eval((ry - rx) / c) / rx - transform.eval((rx - ry) / c).conj() / ry;
        acc += *w * damp * term;
    }
    Complex64::I * pref * acc
}

/// Second-order kernel F²(x, y): the absolutely convergent quadratic
/// remainder, integrated over the banded frequency grid.
pub fn gram_weak_f2(
    split: &WeakSplit,
    boundary: &BoundaryQuadrature,
    x: [f64; 3],
    y: [f64; 3],
    freq: &FrequencyGrid,
) -> Complex64 {
    let c = split.c;
    let kinf = split.kappa_inf;
    let mut acc = Complex64::ZERO;
    for (omega, w_omega) in freq.nodes() {
        let ks = split.kappa_star(omega);
        let mut inner = Complex64::ZERO;
        for (xi, w) in boundary.points.iter().zip(&boundary.weights) {
            let rx = norm3(sub3(*xi, x));
            let ry = norm3(sub3(*xi, y));
            let phase = Complex64::from_polar((-kinf * (rx + ry)).exp(), omega / c * (ry - rx));
            let z = Complex64::I * (ks * ry - ks.conj() * rx);
            inner += *w * phase * expm1m(z) / (rx * ry);
        }
        acc += w_omega * inner;
    }
    acc * KERNEL_PREFACTOR * KERNEL_PREFACTOR
}

/// Diagonal regularization rule for the singular F⁰ part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalRule {
    /// Voxel mean of the 1/|x−y| singularity: F⁰[a,a] = Ā(x_a)·J/h with
    /// J the self-potential of the unit cube and Ā the direction-averaged
    /// coincidence strength. Consistent with the Nyström limit.
    VoxelAverage,
    /// Band-limited direct quadrature of the constant-attenuation part:
    /// F⁰[a,a] = 2·ω_band/(32π³)·Σ_j wξ_j e^(−2κ∞ r)/r².
    BandLimited,
}

/// Options for the weak Gram assembly.
#[derive(Debug, Clone, Copy)]
pub struct WeakGramOptions {
    /// Frequency band for the F² quadrature and the band-limited diagonal.
    pub omega_band: f64,
    /// Residual cutoff for the κ̌_* sampling range.
    pub kstar_threshold: f64,
    /// Safety factor on the κ̌_* time range beyond diam(Ω_ε)/c.
    pub t_pad: f64,
    pub diagonal: DiagonalRule,
}

impl Default for WeakGramOptions {
    fn default() -> Self {
        WeakGramOptions {
            omega_band: 64.0,
            kstar_threshold: 1e-6,
            t_pad: 1.25,
            diagonal: DiagonalRule::VoxelAverage,
        }
    }
}

/// Self-potential of the unit cube ∫ dz/|z| over [−1/2,1/2]³, reduced to a
/// one-dimensional integral by the max-norm spherical parametrization.
fn cube_self_potential() -> f64 {
    static VALUE: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *VALUE.get_or_init(|| {
        let f = |phi: f64| {
            let m = phi.cos().abs().max(phi.sin().abs());
            (m * m + 1.0).sqrt() / m - 1.0
        };
        6.0 * quad::integrate_adaptive(&f, 0.0, 2.0 * std::f64::consts::PI, 1e-13) / 8.0
    })
}

/// Assembles the full weak Gram matrix F = F⁰ + F¹ + F² on the
/// discretized geometry.
pub fn gram_weak(
    split: &WeakSplit,
    disc: &Discretization,
    opts: &WeakGramOptions,
) -> Result<GramKernel> {
    let n = disc.n_interior();
    let nb = disc.n_boundary();
    let geom = disc.geom;
    let lossless = split.is_lossless();

    // F0 off-diagonal entries (real symmetric)
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut row = vec![0.0; n];
            for b in a + 1..n {
                row[b] =
                    gram_weak_f0(split, &geom, disc.interior.points[a], disc.interior.points[b])
                        .expect("interior grid points are valid F0 arguments");
            }
            row
        })
        .collect();
    let mut values = Array2::<Complex64>::zeros((n, n));
    for (a, row) in rows.iter().enumerate() {
        for b in a + 1..n {
            values[[a, b]] = Complex64::new(row[b], 0.0);
            values[[b, a]] = Complex64::new(row[b], 0.0);
        }
    }

    // residual corrections
    let diam = 2.0 * geom.interior_radius();
    let mut transform = None;
    if !lossless {
        let tr = kappa_star_transform(split, opts.t_pad * diam / split.c, opts.kstar_threshold)?;
        // F1 (pairs including the diagonal)
        let f1_rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|a| {
                let mut row = vec![Complex64::ZERO; n];
                let pref = Complex64::I / (16.0 * std::f64::consts::PI.powi(2) * SQRT_TAU);
                for b in a..n {
                    let mut acc = Complex64::ZERO;
                    for j in 0..nb {
                        let rx = disc.dist[[j, a]];
                        let ry = disc.dist[[j, b]];
                        let damp = (-split.kappa_inf * (rx + ry)).exp();
                        let term = tr.eval((ry - rx) / split.c) / rx
                            - tr.eval((rx - ry) / split.c).conj() / ry;
                        acc += disc.boundary.weights[j] * damp * term;
                    }
                    row[b] = pref * acc;
                }
                row
            })
            .collect();
        for (a, row) in f1_rows.iter().enumerate() {
            for b in a..n {
                values[[a, b]] += row[b];
                if b > a {
                    values[[b, a]] += row[b].conj();
                }
            }
        }

        // F2 over the banded grid, 2·Re of the positive-frequency GEMM sum
        let model = split.model().clone();
        let max_resid =
            (0..=4000).map(|k| split.kappa_star(0.01 * k as f64).norm()).fold(0.0f64, f64::max);
        let amp = move |omega: f64| {
            let r = model.kappa(omega)
                - Complex64::new(omega / split.c, split.kappa_inf);
            (r.norm() / max_resid).powi(2)
        };
        let freq = FrequencyGrid::banded(split.model(), opts.omega_band, diam, &amp)?;
        let mut acc = Array2::<Complex64>::zeros((n, n));
        let sqrt_wxi: Vec<f64> = disc.boundary.weights.iter().map(|w| w.sqrt()).collect();
        let chunk = 2 * rayon::current_num_threads().max(1);
        for nodes in freq.positive_nodes().chunks(chunk) {
            let blocks: Vec<Array2<Complex64>> = nodes
                .par_iter()
                .map(|&(omega, w_omega)| f2_block(split, disc, &sqrt_wxi, omega, w_omega))
                .collect();
            for b in blocks {
                acc += &b;
            }
        }
        values += &acc.mapv(|z| Complex64::new(2.0 * z.re, 0.0));
        transform = Some(tr);
    }

    // diagonal rule for the F0 part
    match opts.diagonal {
        DiagonalRule::VoxelAverage => {
            let h = disc.interior.spacing;
            let j_cube = cube_self_potential();
            let dirs = fibonacci_directions(32);
            let diag: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|a| {
                    let x = disc.interior.points[a];
                    let mean: f64 = dirs
                        .iter()
                        .map(|e| f0_coincidence(split, &geom, x, *e).expect("interior point"))
                        .sum::<f64>()
                        / dirs.len() as f64;
                    mean * j_cube / h
                })
                .collect();
            for (a, d) in diag.iter().enumerate() {
                values[[a, a]] += Complex64::new(*d, 0.0);
            }
        }
        DiagonalRule::BandLimited => {
            let pref = KERNEL_PREFACTOR * KERNEL_PREFACTOR * 2.0 * opts.omega_band;
            for a in 0..n {
                let mut s = 0.0;
                for j in 0..nb {
                    let r = disc.dist[[j, a]];
                    s += disc.boundary.weights[j] * (-2.0 * split.kappa_inf * r).exp() / (r * r);
                }
                values[[a, a]] += Complex64::new(pref * s, 0.0);
            }
        }
    }

    let _ = transform;
    GramKernel::new(
        values,
        disc.interior.weights.clone(),
        GramMeta {
            model: split.model().name().to_string(),
            assembly: "weak-split".to_string(),
            // 0 marks the exact full-band closed form of the lossless case
            omega_cut: if lossless { 0.0 } else { opts.omega_band },
            n_boundary: nb,
            n_interior: n,
            spacing: disc.interior.spacing,
            radius: geom.radius,
            eps: geom.eps,
        },
    )
}

/// One positive-frequency Hermitian term of the F² sum, with quadrature
/// weights folded in as square roots. The remainder is expanded into the
/// separable products
///
/// ```text
/// f²·p_y·conj(p_x) = (P+Kr+Qm)ᴴ(Qm) + (Qm)ᴴ(P+Kr) + (Kr)ᴴ(Kr),
/// ```
///
/// with P the constant-attenuation factor, Kr = iκ_*·r·P and
/// Qm = (e^(iκ_* r) − 1 − iκ_* r)·P, so every term stays quadratically
/// small in κ_* — no large cancelling products appear.
fn f2_block(
    split: &WeakSplit,
    disc: &Discretization,
    sqrt_wxi: &[f64],
    omega: f64,
    w_omega: f64,
) -> Array2<Complex64> {
    let (nb, ni) = disc.dist.dim();
    let ks = split.kappa_star(omega);
    let kinf = split.kappa_inf;
    let c = split.c;
    let sw = w_omega.sqrt();
    let mut p = Array2::<Complex64>::zeros((nb, ni));
    let mut kr = Array2::<Complex64>::zeros((nb, ni));
    let mut qm = Array2::<Complex64>::zeros((nb, ni));
    for j in 0..nb {
        let s = sw * sqrt_wxi[j];
        for k in 0..ni {
            let r = disc.dist[[j, k]];
            let base = Complex64::from_polar((-kinf * r).exp() * s * KERNEL_PREFACTOR / r, omega / c * r);
            let z = Complex64::I * ks * r;
            p[[j, k]] = base;
            kr[[j, k]] = z * base;
            qm[[j, k]] = expm1m(z) * base;
        }
    }
    let a = &p + &kr + &qm;
    let ah = a.mapv(|z| z.conj());
    let qmh = qm.mapv(|z| z.conj());
    let krh = kr.mapv(|z| z.conj());
    let mut out = ah.t().dot(&qm);
    out += &qmh.t().dot(&(&p + &kr));
    out += &krh.t().dot(&kr);
    out
}

fn fibonacci_directions(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}
