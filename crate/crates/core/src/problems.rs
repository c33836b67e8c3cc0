//! Built-in benchmark problems and the machinery that derives the problem
//! data (source, jump, and boundary functions) from a pair of exact
//! sub-domain solutions.
//!
//! Every built-in problem is manufactured: an exact solution is fixed first
//! and the data functions are assembled from it, so the residual of the exact
//! solution vanishes identically and errors can be measured exactly.

use std::sync::Arc;

use crate::geometry::{shapes, LevelSetGeometry, Point, MAX_DIM};
use crate::{Error, Result};

type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&Point) -> [f64; MAX_DIM] + Send + Sync>;

/// A smooth scalar function with hand-coded gradient and Laplacian.
#[derive(Clone)]
pub struct ScalarField {
    value: ScalarFn,
    gradient: GradFn,
    laplacian: ScalarFn,
}

impl ScalarField {
    pub fn new(value: ScalarFn, gradient: GradFn, laplacian: ScalarFn) -> Self {
        Self {
            value,
            gradient,
            laplacian,
        }
    }

    /// The constant zero field.
    pub fn zero() -> Self {
        Self {
            value: Arc::new(|_| 0.0),
            gradient: Arc::new(|_| [0.0; MAX_DIM]),
            laplacian: Arc::new(|_| 0.0),
        }
    }

    pub fn value(&self, x: &Point) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &Point) -> [f64; MAX_DIM] {
        (self.gradient)(x)
    }

    pub fn laplacian(&self, x: &Point) -> f64 {
        (self.laplacian)(x)
    }
}

/// Piecewise-constant diffusion coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseCoefficient {
    pub beta1: f64,
    pub beta2: f64,
}

impl PiecewiseCoefficient {
    pub fn new(beta1: f64, beta2: f64) -> Result<Self> {
        if !(beta1.is_finite() && beta1 > 0.0 && beta2.is_finite() && beta2 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "diffusion coefficients must be positive, got ({beta1}, {beta2})"
            )));
        }
        Ok(Self { beta1, beta2 })
    }
}

/// One benchmark instance: geometry, coefficient, data functions, and the
/// optional exact solution they were derived from.
#[derive(Clone)]
pub struct ProblemSpec {
    name: String,
    geometry: Arc<LevelSetGeometry>,
    beta: PiecewiseCoefficient,
    f1: ScalarFn,
    f2: ScalarFn,
    g_j: ScalarFn,
    g_f: ScalarFn,
    g_d: ScalarFn,
    exact: Option<(ScalarField, ScalarField)>,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("beta", &self.beta)
            .field("geometry", &self.geometry)
            .field("has_exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn geometry(&self) -> &Arc<LevelSetGeometry> {
        &self.geometry
    }

    pub fn beta(&self) -> PiecewiseCoefficient {
        self.beta
    }

    /// Source term on the interior sub-domain.
    pub fn f1(&self, x: &Point) -> f64 {
        (self.f1)(x)
    }

    /// Source term on the exterior sub-domain.
    pub fn f2(&self, x: &Point) -> f64 {
        (self.f2)(x)
    }

    /// Prescribed solution jump on the interface.
    pub fn g_j(&self, x: &Point) -> f64 {
        (self.g_j)(x)
    }

    /// Prescribed flux jump on the interface.
    pub fn g_f(&self, x: &Point) -> f64 {
        (self.g_f)(x)
    }

    /// Dirichlet boundary value.
    pub fn g_d(&self, x: &Point) -> f64 {
        (self.g_d)(x)
    }

    pub fn exact(&self) -> Option<(&ScalarField, &ScalarField)> {
        self.exact.as_ref().map(|(u1, u2)| (u1, u2))
    }
}

/// Assemble a [`ProblemSpec`] from a pair of exact sub-domain solutions:
/// `f_i = -beta_i lap u_i`, `g_j = u1 - u2`, `g_f = beta1 grad u1 . n -
/// beta2 grad u2 . n`, and `g_D = u2` restricted to the outer boundary
/// (the boundary always lies in the exterior sub-domain here).
pub fn derive_data_from_exact(
    name: &str,
    geometry: Arc<LevelSetGeometry>,
    beta: PiecewiseCoefficient,
    u1: ScalarField,
    u2: ScalarField,
) -> ProblemSpec {
    let dim = geometry.dim();
    let f1 = {
        let u1 = u1.clone();
        let b = beta.beta1;
        Arc::new(move |x: &Point| -b * u1.laplacian(x)) as ScalarFn
    };
    let f2 = {
        let u2 = u2.clone();
        let b = beta.beta2;
        Arc::new(move |x: &Point| -b * u2.laplacian(x)) as ScalarFn
    };
    let g_j = {
        let (u1, u2) = (u1.clone(), u2.clone());
        Arc::new(move |x: &Point| u1.value(x) - u2.value(x)) as ScalarFn
    };
    let g_f = {
        let (u1, u2) = (u1.clone(), u2.clone());
        let geom = geometry.clone();
        Arc::new(move |x: &Point| {
            let n = geom
                .unit_normal(x)
                .expect("flux jump data requested at a point with degenerate normal");
            let dot = |g: [f64; MAX_DIM]| -> f64 { (0..dim).map(|k| g[k] * n.get(k)).sum() };
            beta.beta1 * dot(u1.gradient(x)) - beta.beta2 * dot(u2.gradient(x))
        }) as ScalarFn
    };
    let g_d = {
        let u2 = u2.clone();
        Arc::new(move |x: &Point| u2.value(x)) as ScalarFn
    };
    ProblemSpec {
        name: name.to_string(),
        geometry,
        beta,
        f1,
        f2,
        g_j,
        g_f,
        g_d,
        exact: Some((u1, u2)),
    }
}

fn r2_about(x: &Point, offset: [f64; 2]) -> (f64, f64, f64) {
    let dx = x.get(0) - offset[0];
    let dy = x.get(1) - offset[1];
    (dx, dy, dx * dx + dy * dy)
}

/// Guard for fields containing `ln(2r)`: the logarithm blows up at the
/// origin, which the built-in geometries keep outside the exterior
/// sub-domain.
fn checked_log_2r(r: f64) -> f64 {
    assert!(
        r > 1e-12,
        "domain error: ln(2r) evaluated at r = {r:.3e} <= 1e-12"
    );
    (2.0 * r).ln()
}

/// Sunflower-shaped 2D interface with a 20-petal star boundary and a mild
/// coefficient contrast. `r_from_center` switches the radial variable of the
/// exact solution from the origin (default) to the petal center.
pub fn make_sunflower(r_from_center: bool) -> ProblemSpec {
    let c = 0.02 * 5.0_f64.sqrt();
    let geometry = Arc::new(shapes::polar_star(1.04, [c, c], 0.4, 0.2, 20.0));
    let beta = PiecewiseCoefficient::new(1.0, 10.0).expect("positive betas");
    let offset = if r_from_center { [c, c] } else { [0.0, 0.0] };

    let u1 = {
        let b = beta.beta1;
        ScalarField::new(
            Arc::new(move |x: &Point| r2_about(x, offset).2 / b),
            Arc::new(move |x: &Point| {
                let (dx, dy, _) = r2_about(x, offset);
                [2.0 * dx / b, 2.0 * dy / b, 0.0]
            }),
            Arc::new(move |_| 4.0 / b),
        )
    };
    let u2 = {
        let b = beta.beta2;
        ScalarField::new(
            Arc::new(move |x: &Point| {
                let r2 = r2_about(x, offset).2;
                (r2 * r2 - 0.1 * checked_log_2r(r2.sqrt())) / b
            }),
            Arc::new(move |x: &Point| {
                let (dx, dy, r2) = r2_about(x, offset);
                [
                    (4.0 * r2 * dx - 0.1 * dx / r2) / b,
                    (4.0 * r2 * dy - 0.1 * dy / r2) / b,
                    0.0,
                ]
            }),
            // ln r is harmonic in 2D, so only the quartic contributes.
            Arc::new(move |x: &Point| 16.0 * r2_about(x, offset).2 / b),
        )
    };
    derive_data_from_exact("sunflower", geometry, beta, u1, u2)
}

/// Sphere interface in 3D with a cosine-product interior solution and zero
/// exterior solution.
pub fn make_sphere() -> ProblemSpec {
    let geometry = Arc::new(shapes::sphere(1.0, 0.5));
    let beta = PiecewiseCoefficient::new(10.0, 1.0).expect("positive betas");
    let u1 = ScalarField::new(
        Arc::new(|x: &Point| x.get(0).cos() * x.get(1).cos() * x.get(2).cos()),
        Arc::new(|x: &Point| {
            let (cx, cy, cz) = (x.get(0).cos(), x.get(1).cos(), x.get(2).cos());
            let (sx, sy, sz) = (x.get(0).sin(), x.get(1).sin(), x.get(2).sin());
            [-sx * cy * cz, -cx * sy * cz, -cx * cy * sz]
        }),
        Arc::new(|x: &Point| -3.0 * x.get(0).cos() * x.get(1).cos() * x.get(2).cos()),
    );
    derive_data_from_exact("sphere", geometry, beta, u1, ScalarField::zero())
}

/// Heart-shaped 3D interface.
pub fn make_heart() -> ProblemSpec {
    let geometry = Arc::new(shapes::heart(1.5));
    let beta = PiecewiseCoefficient::new(8.0, 1.0).expect("positive betas");
    let u1 = ScalarField::new(
        Arc::new(|x: &Point| x.get(1) * x.get(1)),
        Arc::new(|x: &Point| [0.0, 2.0 * x.get(1), 0.0]),
        Arc::new(|_| 2.0),
    );
    let u2 = ScalarField::new(
        Arc::new(|x: &Point| x.get(0).cos() * x.get(1).cos() * x.get(2).cos()),
        Arc::new(|x: &Point| {
            let (cx, cy, cz) = (x.get(0).cos(), x.get(1).cos(), x.get(2).cos());
            let (sx, sy, sz) = (x.get(0).sin(), x.get(1).sin(), x.get(2).sin());
            [-sx * cy * cz, -cx * sy * cz, -cx * cy * sz]
        }),
        Arc::new(|x: &Point| -3.0 * x.get(0).cos() * x.get(1).cos() * x.get(2).cos()),
    );
    derive_data_from_exact("heart", geometry, beta, u1, u2)
}

/// Circle interface with configurable (typically high-contrast) coefficients
/// and homogeneous jump conditions.
pub fn make_circle(beta1: f64, beta2: f64) -> Result<ProblemSpec> {
    let geometry = Arc::new(shapes::circle(1.0, 0.5));
    let beta = PiecewiseCoefficient::new(beta1, beta2)?;
    let r0_cubed = 0.5_f64.powi(3);

    let cubic = |b: f64, shift: f64| -> ScalarField {
        ScalarField::new(
            Arc::new(move |x: &Point| {
                let r2 = x.get(0) * x.get(0) + x.get(1) * x.get(1);
                r2 * r2.sqrt() / b + shift
            }),
            Arc::new(move |x: &Point| {
                let r = (x.get(0) * x.get(0) + x.get(1) * x.get(1)).sqrt();
                [3.0 * r * x.get(0) / b, 3.0 * r * x.get(1) / b, 0.0]
            }),
            Arc::new(move |x: &Point| 9.0 * (x.get(0) * x.get(0) + x.get(1) * x.get(1)).sqrt() / b),
        )
    };
    let u1 = cubic(beta1, 0.0);
    let u2 = cubic(beta2, (1.0 / beta1 - 1.0 / beta2) * r0_cubed);
    Ok(derive_data_from_exact("circle", geometry, beta, u1, u2))
}

/// Flower-shaped 2D interface with five petals and a non-homogeneous jump.
pub fn make_flower() -> ProblemSpec {
    let geometry = Arc::new(shapes::polar_star(1.0, [0.0, 0.0], 0.5, 1.0 / 7.0, 5.0));
    let beta = PiecewiseCoefficient::new(10.0, 1.0).expect("positive betas");
    let u1 = ScalarField::new(
        Arc::new(|x: &Point| (x.get(0) * x.get(0) + x.get(1) * x.get(1)).exp()),
        Arc::new(|x: &Point| {
            let e = (x.get(0) * x.get(0) + x.get(1) * x.get(1)).exp();
            [2.0 * x.get(0) * e, 2.0 * x.get(1) * e, 0.0]
        }),
        Arc::new(|x: &Point| {
            let r2 = x.get(0) * x.get(0) + x.get(1) * x.get(1);
            (4.0 + 4.0 * r2) * r2.exp()
        }),
    );
    let u2 = ScalarField::new(
        Arc::new(|x: &Point| {
            let r2 = x.get(0) * x.get(0) + x.get(1) * x.get(1);
            0.1 * r2 * r2 - 0.01 * checked_log_2r(r2.sqrt())
        }),
        Arc::new(|x: &Point| {
            let r2 = x.get(0) * x.get(0) + x.get(1) * x.get(1);
            [
                0.4 * r2 * x.get(0) - 0.01 * x.get(0) / r2,
                0.4 * r2 * x.get(1) - 0.01 * x.get(1) / r2,
                0.0,
            ]
        }),
        Arc::new(|x: &Point| 1.6 * (x.get(0) * x.get(0) + x.get(1) * x.get(1))),
    );
    derive_data_from_exact("flower", geometry, beta, u1, u2)
}

/// Parameters a caller may pass when instantiating a built-in problem.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProblemParams {
    /// Required for `circle`; rejected elsewhere.
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    /// Sunflower only: measure the radial variable of the exact solution
    /// from the petal center instead of the origin.
    pub r_from_center: bool,
}

/// Names accepted by [`builtin`].
pub const PROBLEM_NAMES: [&str; 5] = ["sunflower", "sphere", "heart", "circle", "flower"];

/// Instantiate a built-in problem by name.
pub fn builtin(name: &str, params: &ProblemParams) -> Result<ProblemSpec> {
    let fixed_beta = |spec: ProblemSpec| -> Result<ProblemSpec> {
        if params.beta1.is_some() || params.beta2.is_some() {
            return Err(Error::InvalidConfig(format!(
                "problem `{name}` has fixed coefficients; beta overrides only apply to `circle`"
            )));
        }
        Ok(spec)
    };
    match name {
        "sunflower" => fixed_beta(make_sunflower(params.r_from_center)),
        "sphere" => fixed_beta(make_sphere()),
        "heart" => fixed_beta(make_heart()),
        "flower" => fixed_beta(make_flower()),
        "circle" => {
            let (Some(b1), Some(b2)) = (params.beta1, params.beta2) else {
                return Err(Error::InvalidConfig(
                    "problem `circle` requires beta1 and beta2".into(),
                ));
            };
            make_circle(b1, b2)
        }
        other => Err(Error::UnknownProblem {
            name: other.to_string(),
            available: PROBLEM_NAMES.join(", "),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Region;
    use crate::rng::SplitMix64;

    fn all_problems() -> Vec<ProblemSpec> {
        vec![
            make_sunflower(false),
            make_sphere(),
            make_heart(),
            make_circle(1000.0, 1.0).unwrap(),
            make_flower(),
        ]
    }

    #[test]
    fn beta_values_match_benchmarks() {
        let betas: Vec<(f64, f64)> = all_problems()
            .iter()
            .map(|p| (p.beta().beta1, p.beta().beta2))
            .collect();
        assert_eq!(
            betas,
            vec![
                (1.0, 10.0),
                (10.0, 1.0),
                (8.0, 1.0),
                (1000.0, 1.0),
                (10.0, 1.0)
            ]
        );
    }

    #[test]
    fn sunflower_values() {
        let p = make_sunflower(false);
        let (_, u2) = p.exact().unwrap();
        assert!((u2.value(&Point::xy(0.5, 0.0)) - 0.00625).abs() < 1e-15);
        // interface radius at theta = pi/40 is 0.6: sample index 1 of m = 80
        let s = &p.geometry().sample_interface(80, 0).unwrap()[1];
        let c = 0.02 * 5.0_f64.sqrt();
        let rho = ((s.point.get(0) - c).powi(2) + (s.point.get(1) - c).powi(2)).sqrt();
        assert!((rho - 0.6).abs() < 1e-12);
    }

    #[test]
    fn sphere_values() {
        let p = make_sphere();
        let (u1, u2) = p.exact().unwrap();
        assert_eq!(u2.value(&Point::xyz(0.7, -0.3, 0.2)), 0.0);
        let x = Point::xyz(0.5, 0.0, 0.0);
        assert!((p.g_j(&x) - 0.5_f64.cos()).abs() < 1e-15);
        // f1 = -beta1 * (-3 u1) = 30 u1
        let y = Point::xyz(0.1, 0.2, -0.1);
        assert!((p.f1(&y) - 30.0 * u1.value(&y)).abs() < 1e-13);
    }

    #[test]
    fn heart_values() {
        let p = make_heart();
        let x = Point::xyz(0.2, -0.1, 0.3);
        assert!((p.f1(&x) + 16.0).abs() < 1e-13);
        assert!((p.geometry().phi(&Point::xyz(0.0, 0.0, 0.0)) + 1.0).abs() < 1e-15);
        assert_eq!(
            p.geometry()
                .classify(&Point::xyz(0.0, 0.0, 0.0), 1e-10)
                .unwrap(),
            Region::Omega1
        );
    }

    #[test]
    fn circle_values() {
        let p = make_circle(1000.0, 1.0).unwrap();
        let (_, u2) = p.exact().unwrap();
        assert!((u2.value(&Point::xy(1.0, 0.0)) - 0.875125).abs() < 1e-15);
        // homogeneous jumps by construction
        for s in p.geometry().sample_interface(16, 0).unwrap() {
            assert!(p.g_j(&s.point).abs() < 1e-14);
            assert!(p.g_f(&s.point).abs() < 1e-12);
        }
    }

    #[test]
    fn flower_values() {
        let p = make_flower();
        let (_, u2) = p.exact().unwrap();
        assert!((u2.value(&Point::xy(0.5, 0.0)) - 0.00625).abs() < 1e-15);
    }

    #[test]
    fn derive_zero_solutions_give_zero_data() {
        let geometry = Arc::new(shapes::circle(1.0, 0.5));
        let beta = PiecewiseCoefficient::new(2.0, 3.0).unwrap();
        let p = derive_data_from_exact(
            "zero",
            geometry.clone(),
            beta,
            ScalarField::zero(),
            ScalarField::zero(),
        );
        let x = Point::xy(0.1, 0.2);
        assert_eq!(p.f1(&x), 0.0);
        assert_eq!(p.f2(&x), 0.0);
        assert_eq!(p.g_d(&Point::xy(1.0, 0.3)), 0.0);
        let s = geometry.sample_interface(4, 0).unwrap()[1];
        assert_eq!(p.g_j(&s.point), 0.0);
        assert_eq!(p.g_f(&s.point), 0.0);
    }

    #[test]
    fn derive_quadratic_source() {
        // u1 = x^2 + y^2 with beta1 = 1 has f1 = -4 everywhere
        let geometry = Arc::new(shapes::circle(1.0, 0.5));
        let beta = PiecewiseCoefficient::new(1.0, 1.0).unwrap();
        let u1 = ScalarField::new(
            Arc::new(|x: &Point| x.get(0) * x.get(0) + x.get(1) * x.get(1)),
            Arc::new(|x: &Point| [2.0 * x.get(0), 2.0 * x.get(1), 0.0]),
            Arc::new(|_| 4.0),
        );
        let p = derive_data_from_exact("quad", geometry, beta, u1, ScalarField::zero());
        assert_eq!(p.f1(&Point::xy(0.3, -0.1)), -4.0);
    }

    /// Finite-difference consistency of the hand-coded derivatives.
    #[test]
    fn exact_fields_pass_fd_consistency() {
        let h = 1e-4;
        for p in all_problems() {
            let geom = p.geometry();
            let d = geom.dim();
            let (u1, u2) = p.exact().unwrap();
            let tol = geom.default_classify_tol();
            let mut rng = SplitMix64::new(17);
            let mut checked = 0;
            while checked < 100 {
                let coords: Vec<f64> = (0..d)
                    .map(|k| {
                        let lo = geom.domain().lo().get(k);
                        let hi = geom.domain().hi().get(k);
                        lo + rng.next_uniform() * (hi - lo)
                    })
                    .collect();
                let x = Point::new(&coords).unwrap();
                let field = match geom.classify(&x, tol).unwrap() {
                    Region::Omega1 => u1,
                    Region::Omega2 => u2,
                    Region::OnInterface => continue,
                };
                // keep the stencil away from the interface and the log pole
                if geom.phi(&x).abs() < 10.0 * h || x.norm() < 0.05 {
                    continue;
                }
                checked += 1;

                let grad = field.gradient(&x);
                let mut fd_lap = 0.0;
                let scale = field.value(&x).abs().max(1.0);
                for k in 0..d {
                    let mut cp = coords.clone();
                    cp[k] += h;
                    let up = field.value(&Point::new(&cp).unwrap());
                    let mut cm = coords.clone();
                    cm[k] -= h;
                    let um = field.value(&Point::new(&cm).unwrap());
                    let fd_grad = (up - um) / (2.0 * h);
                    assert!(
                        (grad[k] - fd_grad).abs() <= 1e-6 * fd_grad.abs().max(scale),
                        "{}: gradient axis {k} at {x}: {} vs fd {}",
                        p.name(),
                        grad[k],
                        fd_grad
                    );
                    fd_lap += (up - 2.0 * field.value(&x) + um) / (h * h);
                }
                let lap = field.laplacian(&x);
                assert!(
                    (lap - fd_lap).abs() <= 1e-6 * fd_lap.abs().max(scale).max(10.0),
                    "{}: laplacian at {x}: {lap} vs fd {fd_lap}",
                    p.name()
                );
            }
        }
    }

    #[test]
    fn log_fields_reject_the_origin() {
        use std::panic::{catch_unwind, AssertUnwindSafe};
        let p = make_flower();
        let (_, u2) = p.exact().unwrap();
        let result = catch_unwind(AssertUnwindSafe(|| u2.value(&Point::xy(0.0, 0.0))));
        assert!(result.is_err());
        let p = make_sunflower(false);
        let (_, u2) = p.exact().unwrap();
        let result = catch_unwind(AssertUnwindSafe(|| u2.value(&Point::xy(1e-13, 0.0))));
        assert!(result.is_err());
    }

    #[test]
    fn registry_round_trip() {
        for name in PROBLEM_NAMES {
            let params = ProblemParams {
                beta1: (name == "circle").then_some(1000.0),
                beta2: (name == "circle").then_some(1.0),
                r_from_center: false,
            };
            let p = builtin(name, &params).unwrap();
            assert_eq!(p.name(), name);
        }
        assert!(matches!(
            builtin("torus", &ProblemParams::default()).unwrap_err(),
            Error::UnknownProblem { .. }
        ));
        assert!(matches!(
            builtin("circle", &ProblemParams::default()).unwrap_err(),
            Error::InvalidConfig(_)
        ));
        let bad = ProblemParams {
            beta1: Some(2.0),
            beta2: Some(1.0),
            r_from_center: false,
        };
        assert!(builtin("sphere", &bad).is_err());
    }

    #[test]
    fn sunflower_grid_partition() {
        let p = make_sunflower(false);
        let tol = p.geometry().default_classify_tol();
        let (o1, o2) = p.geometry().sample_uniform_grid(20, tol).unwrap();
        assert_eq!((o1.len(), o2.len()), (51, 349));
    }

    #[test]
    fn sphere_grid_partition() {
        let p = make_sphere();
        let tol = p.geometry().default_classify_tol();
        let (o1, o2) = p.geometry().sample_uniform_grid(10, tol).unwrap();
        assert_eq!((o1.len(), o2.len()), (56, 944));
    }
}
