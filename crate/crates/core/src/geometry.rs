//! Ball measurement geometry: sphere quadrature on the measurement
//! surface, voxel grid for the interior sources, and bisection-plane
//! circles for the closed-form weak kernel.
//!
//! The measurement surface is the sphere of radius R around `center`; the
//! admissible source region is the concentric ball of radius R − ε. The
//! standoff ε keeps every source at distance at least ε from every
//! detector, so the kernel singularity is never sampled.

use crate::error::{Error, Result};
use crate::wavekernel::{dot3, norm3};

#[inline]
fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Sphere of radius R with standoff ε; sources live in |x − center| < R − ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallGeometry {
    pub center: [f64; 3],
    pub radius: f64,
    pub eps: f64,
}

impl BallGeometry {
    pub fn new(center: [f64; 3], radius: f64, eps: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("sphere radius must be positive, got {radius}")));
        }
        if !(eps > 0.0 && eps < radius) {
            return Err(Error::InvalidParameter(format!(
                "standoff must satisfy 0 < eps < R, got eps={eps}, R={radius}"
            )));
        }
        Ok(BallGeometry { center, radius, eps })
    }

    /// Radius of the source region Ω_ε.
    pub fn interior_radius(&self) -> f64 {
        self.radius - self.eps
    }

    pub fn contains_source(&self, x: [f64; 3]) -> bool {
        norm3(sub3(x, self.center)) < self.interior_radius()
    }
}

/// Quadrature nodes and weights on the measurement sphere.
#[derive(Debug, Clone)]
pub struct BoundaryQuadrature {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl BoundaryQuadrature {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Fibonacci-spiral nodes with equal weights 4πR²/n.
///
/// The spiral gives near-uniform coverage, and equal weights keep the
/// adjoint and the Gram assembly symmetric.
pub fn sphere_quadrature(geom: &BallGeometry, n: usize) -> Result<BoundaryQuadrature> {
    if n < 16 {
        return Err(Error::InvalidParameter(format!("sphere quadrature needs n >= 16, got {n}")));
    }
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let r = geom.radius;
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
        let rho = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden * i as f64;
        points.push([
            geom.center[0] + r * rho * phi.cos(),
            geom.center[1] + r * rho * phi.sin(),
            geom.center[2] + r * z,
        ]);
    }
    let w = 4.0 * std::f64::consts::PI * r * r / n as f64;
    Ok(BoundaryQuadrature { points, weights: vec![w; n] })
}

/// Voxel nodes and weights covering the source region Ω_ε.
#[derive(Debug, Clone)]
pub struct InteriorGrid {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub spacing: f64,
}

impl InteriorGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Uniform lattice of spacing h clipped to Ω_ε, weight h³ per node.
///
/// The lattice is vertex-centered on the geometry center, so the center
/// point itself is always a node.
pub fn interior_grid(geom: &BallGeometry, h: f64) -> Result<InteriorGrid> {
    let r_int = geom.interior_radius();
    if !(h > 0.0 && h < r_int / 2.0) {
        return Err(Error::InvalidParameter(format!(
            "lattice spacing must satisfy 0 < h < (R-eps)/2, got h={h}, R-eps={r_int}"
        )));
    }
    let m = (r_int / h).ceil() as i64;
    let mut points = Vec::new();
    for i in -m..=m {
        for j in -m..=m {
            for k in -m..=m {
                let p = [
                    geom.center[0] + h * i as f64,
                    geom.center[1] + h * j as f64,
                    geom.center[2] + h * k as f64,
                ];
                if norm3(sub3(p, geom.center)) < r_int {
                    points.push(p);
                }
            }
        }
    }
    if points.is_empty() {
        return Err(Error::Geometry("interior grid is empty".into()));
    }
    let w = h * h * h;
    let n = points.len();
    Ok(InteriorGrid { points, weights: vec![w; n], spacing: h })
}

/// Intersection of the measurement sphere with the bisection plane of a
/// point pair: the support of the closed-form weak kernel.
#[derive(Debug, Clone, Copy)]
pub struct BisectionCircle {
    pub center: [f64; 3],
    pub radius: f64,
    pub normal: [f64; 3],
}

impl BisectionCircle {
    /// Two orthonormal vectors spanning the circle plane.
    pub fn in_plane_basis(&self) -> ([f64; 3], [f64; 3]) {
        let n = self.normal;
        let pick = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let mut u = [
            pick[1] * n[2] - pick[2] * n[1],
            pick[2] * n[0] - pick[0] * n[2],
            pick[0] * n[1] - pick[1] * n[0],
        ];
        let un = norm3(u);
        u = [u[0] / un, u[1] / un, u[2] / un];
        let v = [
            n[1] * u[2] - n[2] * u[1],
            n[2] * u[0] - n[0] * u[2],
            n[0] * u[1] - n[1] * u[0],
        ];
        (u, v)
    }

    /// Point at angle θ on the circle.
    pub fn point(&self, theta: f64, basis: ([f64; 3], [f64; 3])) -> [f64; 3] {
        let (u, v) = basis;
        let (s, c) = theta.sin_cos();
        [
            self.center[0] + self.radius * (c * u[0] + s * v[0]),
            self.center[1] + self.radius * (c * u[1] + s * v[1]),
            self.center[2] + self.radius * (c * u[2] + s * v[2]),
        ]
    }
}

/// Circle in which the bisection plane of x and y cuts the sphere.
///
/// The plane passes through the midpoint with normal along x − y; its
/// distance d from the sphere center gives the circle radius √(R² − d²).
/// Both points interior guarantees the plane meets the sphere.
pub fn bisection_circle(geom: &BallGeometry, x: [f64; 3], y: [f64; 3]) -> Result<BisectionCircle> {
    let diff = sub3(x, y);
    let dist = norm3(diff);
    if dist == 0.0 {
        return Err(Error::Geometry("bisection circle of a degenerate pair x = y".into()));
    }
    let e = [diff[0] / dist, diff[1] / dist, diff[2] / dist];
    let mid = [0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1]), 0.5 * (x[2] + y[2])];
    let d = dot3(sub3(mid, geom.center), e);
    let r2 = geom.radius * geom.radius - d * d;
    if r2 < 0.0 {
        return Err(Error::Geometry(format!(
            "bisection plane misses the sphere (d = {d}, R = {})",
            geom.radius
        )));
    }
    Ok(BisectionCircle {
        center: [
            geom.center[0] + d * e[0],
            geom.center[1] + d * e[1],
            geom.center[2] + d * e[2],
        ],
        radius: r2.sqrt(),
        normal: e,
    })
}
