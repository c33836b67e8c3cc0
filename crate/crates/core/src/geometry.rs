//! Level-set geometry kernel: region classification, interface normals, and
//! the point-sampling generators (interior grids, interface samples, boundary
//! samples).
//!
//! A geometry is an axis-aligned box carrying a level-set function `phi`
//! whose zero set is the interface. The sign of `interior_sign * phi`
//! classifies a point into the interior sub-domain (positive) or the exterior
//! sub-domain (negative). All operations here are pure functions of their
//! inputs and safe to call concurrently.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::rng::SplitMix64;
use crate::{Error, Result};

/// Maximum supported ambient dimension.
pub const MAX_DIM: usize = 3;

/// A spatial location (or direction) in 2 or 3 dimensions.
///
/// Stored inline so sample sets stay allocation-free; only the first
/// `dim()` coordinates are meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: usize,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.len() < 2 || coords.len() > MAX_DIM {
            return Err(Error::InvalidInput(format!(
                "point dimension must be 2 or 3, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "point coordinates must be finite, got {coords:?}"
            )));
        }
        let mut buf = [0.0; MAX_DIM];
        buf[..coords.len()].copy_from_slice(coords);
        Ok(Self {
            coords: buf,
            dim: coords.len(),
        })
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Self {
            coords: [x, y, 0.0],
            dim: 2,
        }
    }

    pub fn xyz(x: f64, y: f64, z: f64) -> Self {
        Self {
            coords: [x, y, z],
            dim: 3,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    #[inline]
    pub fn get(&self, axis: usize) -> f64 {
        debug_assert!(axis < self.dim);
        self.coords[axis]
    }

    /// Euclidean norm of the coordinate vector.
    pub fn norm(&self) -> f64 {
        self.coords().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Lexicographic coordinate ordering; the tie-break rule used wherever a
    /// deterministic order over points is needed.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        for (a, b) in self.coords().iter().zip(other.coords()) {
            match a.partial_cmp(b) {
                Some(Ordering::Equal) | None => continue,
                Some(ord) => return ord,
            }
        }
        Ordering::Equal
    }

    /// True when every coordinate differs by at most `tol`.
    pub fn approx_eq(&self, other: &Point, tol: f64) -> bool {
        self.dim == other.dim
            && self
                .coords()
                .iter()
                .zip(other.coords())
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Axis-aligned bounding box of the computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    lo: Point,
    hi: Point,
}

impl DomainBox {
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        if lo.dim() != hi.dim() {
            return Err(Error::DimensionMismatch {
                expected: lo.dim(),
                got: hi.dim(),
            });
        }
        for k in 0..lo.dim() {
            let (a, b) = (lo.get(k), hi.get(k));
            if a.partial_cmp(&b) != Some(Ordering::Less) {
                return Err(Error::InvalidInput(format!(
                    "box must satisfy lo < hi per axis; axis {k} has [{}, {}]",
                    lo.get(k),
                    hi.get(k)
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    /// Cube `[lo, hi]^dim`.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        let l = vec![lo; dim];
        let h = vec![hi; dim];
        Self::new(Point::new(&l)?, Point::new(&h)?)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn lo(&self) -> &Point {
        &self.lo
    }

    pub fn hi(&self) -> &Point {
        &self.hi
    }

    pub fn diagonal(&self) -> f64 {
        (0..self.dim())
            .map(|k| (self.hi.get(k) - self.lo.get(k)).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.dim() == self.dim()
            && (0..self.dim()).all(|k| x.get(k) >= self.lo.get(k) && x.get(k) <= self.hi.get(k))
    }

    /// Quasi-uniform points on every face of the box, `m_per_face` each.
    ///
    /// 2D edges carry `m_per_face` uniformly spaced points with endpoints
    /// excluded (no duplicated corners). 3D faces carry a golden-ratio
    /// lattice, which keeps the count exact for any `m_per_face`.
    pub fn sample_boundary(&self, m_per_face: usize) -> Result<Vec<Point>> {
        if m_per_face == 0 {
            return Err(Error::InvalidInput(
                "boundary sampling needs at least one point per face".into(),
            ));
        }
        let d = self.dim();
        let mut out = Vec::with_capacity(2 * d * m_per_face);
        for axis in 0..d {
            for &side in &[self.lo.get(axis), self.hi.get(axis)] {
                let others: Vec<usize> = (0..d).filter(|&k| k != axis).collect();
                for i in 0..m_per_face {
                    let mut c = [0.0; MAX_DIM];
                    c[axis] = side;
                    match others.len() {
                        1 => {
                            let k = others[0];
                            let t = (i + 1) as f64 / (m_per_face + 1) as f64;
                            c[k] = self.lo.get(k) + t * (self.hi.get(k) - self.lo.get(k));
                        }
                        2 => {
                            // Kronecker lattice on the face rectangle.
                            let u = (i as f64 + 0.5) / m_per_face as f64;
                            let v = (i as f64 * 0.618_033_988_749_894_9 + 0.5).fract();
                            let (ka, kb) = (others[0], others[1]);
                            c[ka] = self.lo.get(ka) + u * (self.hi.get(ka) - self.lo.get(ka));
                            c[kb] = self.lo.get(kb) + v * (self.hi.get(kb) - self.lo.get(kb));
                        }
                        _ => unreachable!("dimension limited to 2 or 3"),
                    }
                    let mut coords = [0.0; MAX_DIM];
                    coords[..d].copy_from_slice(&c[..d]);
                    out.push(Point { coords, dim: d });
                }
            }
        }
        Ok(out)
    }
}

/// Which side of the interface a point falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// Interior sub-domain.
    Omega1,
    /// Exterior sub-domain.
    Omega2,
    /// Within the classification tolerance of the interface.
    OnInterface,
}

/// An interface point with the unit normal pointing out of the interior
/// sub-domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSample {
    pub point: Point,
    pub normal: Point,
}

type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&Point) -> [f64; MAX_DIM] + Send + Sync>;

/// How interface points are generated for a geometry.
#[derive(Clone)]
pub enum InterfaceSampler {
    /// Star-shaped 2D curve `rho = radius(theta)` about `center`; points come
    /// from uniform parameter spacing.
    Polar {
        center: [f64; 2],
        radius: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
    /// Implicit 3D surface sampled by casting golden-lattice rays from an
    /// interior centroid and projecting each crossing onto the zero set.
    RayCast { centroid: [f64; 3] },
}

/// Level-set description of the domain and its interface.
///
/// Sign convention: `interior_sign * phi(x) > 0` exactly when `x` lies in the
/// interior sub-domain.
#[derive(Clone)]
pub struct LevelSetGeometry {
    dim: usize,
    domain: DomainBox,
    phi: ScalarFn,
    grad_phi: GradFn,
    interior_sign: f64,
    sampler: InterfaceSampler,
}

impl fmt::Debug for LevelSetGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevelSetGeometry")
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("interior_sign", &self.interior_sign)
            .finish_non_exhaustive()
    }
}

const MIN_GRAD_NORM: f64 = 1e-14;

impl LevelSetGeometry {
    pub fn new(
        domain: DomainBox,
        phi: ScalarFn,
        grad_phi: GradFn,
        interior_sign: f64,
        sampler: InterfaceSampler,
    ) -> Result<Self> {
        if interior_sign != 1.0 && interior_sign != -1.0 {
            return Err(Error::InvalidInput(format!(
                "interior_sign must be +1 or -1, got {interior_sign}"
            )));
        }
        Ok(Self {
            dim: domain.dim(),
            domain,
            phi,
            grad_phi,
            interior_sign,
            sampler,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn interior_sign(&self) -> f64 {
        self.interior_sign
    }

    /// Level-set value at `x`.
    pub fn phi(&self, x: &Point) -> f64 {
        (self.phi)(x)
    }

    /// Level-set gradient at `x` (first `dim()` entries).
    pub fn grad_phi(&self, x: &Point) -> [f64; MAX_DIM] {
        (self.grad_phi)(x)
    }

    /// Default tolerance for deciding that a grid node sits on the interface.
    pub fn default_classify_tol(&self) -> f64 {
        1e-12 * self.domain.diagonal()
    }

    fn check_dim(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(())
    }

    /// Classify `x` by the sign of `interior_sign * phi`.
    pub fn classify(&self, x: &Point, tol: f64) -> Result<Region> {
        self.check_dim(x)?;
        if tol.partial_cmp(&0.0) != Some(Ordering::Greater) {
            return Err(Error::InvalidInput(format!(
                "classification tolerance must be positive, got {tol}"
            )));
        }
        let signed = self.interior_sign * self.phi(x);
        Ok(if signed > tol {
            Region::Omega1
        } else if signed < -tol {
            Region::Omega2
        } else {
            Region::OnInterface
        })
    }

    /// Unit normal on the interface, oriented from the interior sub-domain
    /// into the exterior one.
    pub fn unit_normal(&self, x: &Point) -> Result<Point> {
        self.check_dim(x)?;
        let g = self.grad_phi(x);
        let norm = g[..self.dim].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= MIN_GRAD_NORM {
            return Err(Error::DegenerateNormal {
                point: x.coords().to_vec(),
                grad_norm: norm,
            });
        }
        let scale = -self.interior_sign / norm;
        let mut coords = [0.0; MAX_DIM];
        for k in 0..self.dim {
            coords[k] = scale * g[k];
        }
        Ok(Point {
            coords,
            dim: self.dim,
        })
    }

    /// All `n_per_dim^dim` cell-center nodes of the domain box in
    /// lexicographic coordinate order.
    pub fn grid_nodes(&self, n_per_dim: usize) -> Result<Vec<Point>> {
        if n_per_dim < 2 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 2 nodes per dimension, got {n_per_dim}"
            )));
        }
        let d = self.dim;
        let axis_coord = |axis: usize, i: usize| -> f64 {
            let lo = self.domain.lo.get(axis);
            let hi = self.domain.hi.get(axis);
            lo + (i as f64 + 0.5) * (hi - lo) / n_per_dim as f64
        };
        let total = n_per_dim.pow(d as u32);
        let mut nodes = Vec::with_capacity(total);
        for flat in 0..total {
            let mut idx = flat;
            let mut coords = [0.0; MAX_DIM];
            // Last axis varies fastest so iteration order is lexicographic.
            for axis in (0..d).rev() {
                coords[axis] = axis_coord(axis, idx % n_per_dim);
                idx /= n_per_dim;
            }
            nodes.push(Point { coords, dim: d });
        }
        Ok(nodes)
    }

    /// Tensor-product grid of `n_per_dim^dim` cell-center nodes spanning the
    /// domain box, classified into the two sub-domains. Nodes within `tol` of
    /// the interface are dropped.
    pub fn sample_uniform_grid(
        &self,
        n_per_dim: usize,
        tol: f64,
    ) -> Result<(Vec<Point>, Vec<Point>)> {
        let mut omega1 = Vec::new();
        let mut omega2 = Vec::new();
        for p in self.grid_nodes(n_per_dim)? {
            match self.classify(&p, tol)? {
                Region::Omega1 => omega1.push(p),
                Region::Omega2 => omega2.push(p),
                Region::OnInterface => {}
            }
        }
        Ok((omega1, omega2))
    }

    /// `m` points on the zero level set with attached outward normals.
    ///
    /// 2D parametric curves use uniform parameter spacing `theta_k = 2 pi k / m`;
    /// 3D implicit surfaces cast a golden-lattice ray bundle from the interior
    /// centroid (rotated by a seed-derived phase) and project each crossing
    /// onto the surface.
    pub fn sample_interface(&self, m: usize, seed: u64) -> Result<Vec<InterfaceSample>> {
        if m == 0 {
            return Err(Error::InvalidInput(
                "interface sampling needs at least one point".into(),
            ));
        }
        let tol = 1e-10 * self.domain.diagonal();
        let points = match &self.sampler {
            InterfaceSampler::Polar { center, radius } => {
                let mut pts = Vec::with_capacity(m);
                for k in 0..m {
                    let theta = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                    let r = radius(theta);
                    if !r.is_finite() || r <= 0.0 {
                        return Err(Error::SamplingFailed {
                            candidate: k,
                            reason: format!("parametric radius {r} at theta {theta}"),
                        });
                    }
                    pts.push(Point::xy(
                        center[0] + r * theta.cos(),
                        center[1] + r * theta.sin(),
                    ));
                }
                pts
            }
            InterfaceSampler::RayCast { centroid } => {
                let phase = SplitMix64::new(seed).next_uniform() * 2.0 * std::f64::consts::PI;
                let mut pts = Vec::with_capacity(m);
                for k in 0..m {
                    let dir = fibonacci_direction(k, m, phase);
                    let p = self.cast_ray(centroid, &dir, k, tol)?;
                    pts.push(p);
                }
                pts
            }
        };
        let check_tol = 1e-8 * self.domain.diagonal();
        points
            .into_iter()
            .enumerate()
            .map(|(k, point)| {
                let residual = self.phi(&point).abs();
                if residual > check_tol {
                    return Err(Error::SamplingFailed {
                        candidate: k,
                        reason: format!("sample off the interface, |phi| = {residual:.3e}"),
                    });
                }
                let normal = self.unit_normal(&point)?;
                Ok(InterfaceSample { point, normal })
            })
            .collect()
    }

    /// Project `x0` onto the zero level set with damped Newton steps along
    /// the level-set gradient.
    pub fn project_to_interface(&self, x0: &Point, tol: f64, max_iter: usize) -> Result<Point> {
        self.check_dim(x0)?;
        let mut x = *x0;
        let mut residual = self.phi(&x);
        for _ in 0..max_iter {
            if residual.abs() <= tol {
                return Ok(x);
            }
            let g = self.grad_phi(&x);
            let g2: f64 = g[..self.dim].iter().map(|v| v * v).sum();
            if g2.sqrt() <= MIN_GRAD_NORM {
                return Err(Error::DegenerateNormal {
                    point: x.coords().to_vec(),
                    grad_norm: g2.sqrt(),
                });
            }
            // Newton step, halved until the residual actually shrinks.
            let mut step = 1.0;
            loop {
                let mut coords = [0.0; MAX_DIM];
                for k in 0..self.dim {
                    coords[k] = x.get(k) - step * residual * g[k] / g2;
                }
                let candidate = Point {
                    coords,
                    dim: self.dim,
                };
                let cand_res = self.phi(&candidate);
                if cand_res.abs() < residual.abs() || step < 1.0 / 64.0 {
                    x = candidate;
                    residual = cand_res;
                    break;
                }
                step *= 0.5;
            }
        }
        if residual.abs() <= tol {
            return Ok(x);
        }
        Err(Error::ProjectionFailed {
            candidate: 0,
            iterations: max_iter,
            residual: residual.abs(),
            last: x.coords().to_vec(),
        })
    }

    /// March along `centroid + t * dir` until `phi` changes sign, bisect the
    /// bracket, then polish with Newton projection.
    fn cast_ray(
        &self,
        centroid: &[f64; 3],
        dir: &[f64; 3],
        candidate: usize,
        tol: f64,
    ) -> Result<Point> {
        let at = |t: f64| -> Point {
            Point::xyz(
                centroid[0] + t * dir[0],
                centroid[1] + t * dir[1],
                centroid[2] + t * dir[2],
            )
        };
        // Distance at which the ray leaves the box.
        let mut t_max = f64::INFINITY;
        for k in 0..3 {
            if dir[k].abs() > 1e-300 {
                let t1 = (self.domain.lo.get(k) - centroid[k]) / dir[k];
                let t2 = (self.domain.hi.get(k) - centroid[k]) / dir[k];
                t_max = t_max.min(t1.max(t2));
            }
        }
        if !t_max.is_finite() || t_max <= 0.0 {
            return Err(Error::SamplingFailed {
                candidate,
                reason: "ray does not leave the domain box".into(),
            });
        }
        let steps = 512;
        let s0 = self.interior_sign * self.phi(&at(0.0));
        if s0 <= 0.0 {
            return Err(Error::SamplingFailed {
                candidate,
                reason: "ray origin is not inside the interior sub-domain".into(),
            });
        }
        let mut lo = 0.0;
        let mut hi = None;
        for i in 1..=steps {
            let t = t_max * i as f64 / steps as f64;
            if self.interior_sign * self.phi(&at(t)) <= 0.0 {
                hi = Some(t);
                break;
            }
            lo = t;
        }
        let Some(mut hi) = hi else {
            return Err(Error::SamplingFailed {
                candidate,
                reason: "no sign change of phi along the ray".into(),
            });
        };
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.interior_sign * self.phi(&at(mid)) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.project_to_interface(&at(0.5 * (lo + hi)), tol, 50)
            .map_err(|e| match e {
                Error::ProjectionFailed {
                    iterations,
                    residual,
                    last,
                    ..
                } => Error::ProjectionFailed {
                    candidate,
                    iterations,
                    residual,
                    last,
                },
                other => other,
            })
    }
}

/// Direction `k` of an `m`-point Fibonacci lattice on the unit sphere, with
/// the azimuth rotated by `phase`.
fn fibonacci_direction(k: usize, m: usize, phase: f64) -> [f64; 3] {
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
    let rho = (1.0 - z * z).max(0.0).sqrt();
    let az = golden_angle * k as f64 + phase;
    [rho * az.cos(), rho * az.sin(), z]
}

/// Builders for the level-set shapes used by the built-in problems.
pub mod shapes {
    use super::*;

    /// Circle of radius `r0` centered at the origin: `phi = x^2 + y^2 - r0^2`,
    /// negative inside.
    pub fn circle(box_half_width: f64, r0: f64) -> LevelSetGeometry {
        let domain = DomainBox::cube(-box_half_width, box_half_width, 2).expect("valid box");
        LevelSetGeometry::new(
            domain,
            Arc::new(move |p: &Point| p.get(0) * p.get(0) + p.get(1) * p.get(1) - r0 * r0),
            Arc::new(|p: &Point| [2.0 * p.get(0), 2.0 * p.get(1), 0.0]),
            -1.0,
            InterfaceSampler::Polar {
                center: [0.0, 0.0],
                radius: Arc::new(move |_| r0),
            },
        )
        .expect("valid geometry")
    }

    /// Star-shaped curve `rho(theta) = r0 + r1 sin(omega theta)` about
    /// `center`: `phi = rho^2 - r(theta)^2`, negative inside.
    pub fn polar_star(
        box_half_width: f64,
        center: [f64; 2],
        r0: f64,
        r1: f64,
        omega: f64,
    ) -> LevelSetGeometry {
        let domain = DomainBox::cube(-box_half_width, box_half_width, 2).expect("valid box");
        let radius = move |theta: f64| r0 + r1 * (omega * theta).sin();
        let phi = move |p: &Point| {
            let dx = p.get(0) - center[0];
            let dy = p.get(1) - center[1];
            let theta = dy.atan2(dx);
            let r = radius(theta);
            dx * dx + dy * dy - r * r
        };
        let grad = move |p: &Point| {
            let dx = p.get(0) - center[0];
            let dy = p.get(1) - center[1];
            let rho2 = dx * dx + dy * dy;
            let theta = dy.atan2(dx);
            let r = radius(theta);
            let dr = r1 * omega * (omega * theta).cos();
            // d(theta)/dx = -dy/rho^2, d(theta)/dy = dx/rho^2
            [
                2.0 * dx + 2.0 * r * dr * dy / rho2,
                2.0 * dy - 2.0 * r * dr * dx / rho2,
                0.0,
            ]
        };
        LevelSetGeometry::new(
            domain,
            Arc::new(phi),
            Arc::new(grad),
            -1.0,
            InterfaceSampler::Polar {
                center,
                radius: Arc::new(radius),
            },
        )
        .expect("valid geometry")
    }

    /// Sphere of radius `r0` at the origin: `phi = r0^2 - (x^2 + y^2 + z^2)`,
    /// positive inside.
    pub fn sphere(box_half_width: f64, r0: f64) -> LevelSetGeometry {
        let domain = DomainBox::cube(-box_half_width, box_half_width, 3).expect("valid box");
        LevelSetGeometry::new(
            domain,
            Arc::new(move |p: &Point| {
                r0 * r0 - (p.get(0) * p.get(0) + p.get(1) * p.get(1) + p.get(2) * p.get(2))
            }),
            Arc::new(|p: &Point| [-2.0 * p.get(0), -2.0 * p.get(1), -2.0 * p.get(2)]),
            1.0,
            InterfaceSampler::RayCast {
                centroid: [0.0, 0.0, 0.0],
            },
        )
        .expect("valid geometry")
    }

    /// Heart-shaped surface
    /// `phi = (x^2 + 9/4 y^2 + z^2 - 1)^3 - x^2 z^3 - 9/80 y^2 z^3`,
    /// negative inside.
    pub fn heart(box_half_width: f64) -> LevelSetGeometry {
        let domain = DomainBox::cube(-box_half_width, box_half_width, 3).expect("valid box");
        let phi = |p: &Point| {
            let (x, y, z) = (p.get(0), p.get(1), p.get(2));
            let q = x * x + 2.25 * y * y + z * z - 1.0;
            q * q * q - x * x * z * z * z - 0.1125 * y * y * z * z * z
        };
        let grad = |p: &Point| {
            let (x, y, z) = (p.get(0), p.get(1), p.get(2));
            let q = x * x + 2.25 * y * y + z * z - 1.0;
            let q2 = q * q;
            [
                6.0 * x * q2 - 2.0 * x * z * z * z,
                13.5 * y * q2 - 0.225 * y * z * z * z,
                6.0 * z * q2 - 3.0 * x * x * z * z - 0.3375 * y * y * z * z,
            ]
        };
        LevelSetGeometry::new(
            domain,
            Arc::new(phi),
            Arc::new(grad),
            -1.0,
            InterfaceSampler::RayCast {
                centroid: [0.0, 0.0, 0.0],
            },
        )
        .expect("valid geometry")
    }
}
