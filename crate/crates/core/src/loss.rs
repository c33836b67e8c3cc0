//! The four discrete least-squares loss terms, their total, per-point
//! residual indicators, and the parameter-gradient path.
//!
//! The loss is defined over an abstract field interface rather than over
//! networks alone, so the exact manufactured solutions can be pushed through
//! the identical code path; with derived data the residuals then cancel to
//! roundoff, which is the strongest available correctness check.
//!
//! Summation order is fixed (sequential in sample index order) so repeated
//! evaluations are bit-identical.

use crate::geometry::{InterfaceSample, LevelSetGeometry, Point, Region};
use crate::network::{DerivativeMode, MlpParams, PairGrad, PiecewiseNetwork, SpatialSeed};
use crate::problems::{ProblemSpec, ScalarField};
use crate::{Error, Result};

/// Categorized collocation points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub omega1: Vec<Point>,
    pub omega2: Vec<Point>,
    pub interface: Vec<InterfaceSample>,
    pub boundary: Vec<Point>,
}

impl SampleSet {
    /// Uniform base sample set: an interior cell-center grid, uniformly
    /// parameterized interface samples, and per-face boundary points.
    pub fn build(
        problem: &ProblemSpec,
        grid_per_dim: usize,
        m_interface: usize,
        m_boundary_per_face: usize,
        seed: u64,
    ) -> Result<Self> {
        let geom = problem.geometry();
        let tol = geom.default_classify_tol();
        let (omega1, omega2) = geom.sample_uniform_grid(grid_per_dim, tol)?;
        let interface = geom.sample_interface(m_interface, seed)?;
        let boundary = geom.domain().sample_boundary(m_boundary_per_face)?;
        Ok(Self {
            omega1,
            omega2,
            interface,
            boundary,
        })
    }

    pub fn counts(&self) -> SampleCounts {
        SampleCounts {
            m1: self.omega1.len(),
            m2: self.omega2.len(),
            m_interface: self.interface.len(),
            m_boundary: self.boundary.len(),
        }
    }

    pub fn total_len(&self) -> usize {
        self.omega1.len() + self.omega2.len() + self.interface.len() + self.boundary.len()
    }

    fn check_nonempty(&self) -> Result<()> {
        if self.omega1.is_empty() {
            return Err(Error::EmptySamples("omega1"));
        }
        if self.omega2.is_empty() {
            return Err(Error::EmptySamples("omega2"));
        }
        if self.interface.is_empty() {
            return Err(Error::EmptySamples("interface"));
        }
        if self.boundary.is_empty() {
            return Err(Error::EmptySamples("boundary"));
        }
        Ok(())
    }
}

/// Sizes of the four sample categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SampleCounts {
    pub m1: usize,
    pub m2: usize,
    pub m_interface: usize,
    pub m_boundary: usize,
}

/// Weights of the interface and boundary terms.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossWeights {
    pub beta_j: f64,
    pub beta_f: f64,
    pub alpha: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            beta_j: 1.0,
            beta_f: 1.0,
            alpha: 500.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        if self.beta_j < 0.0 || self.beta_f < 0.0 || self.alpha < 0.0 {
            return Err(Error::InvalidInput(format!(
                "loss weights must be non-negative, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// The four discrete loss terms and their sum.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossBreakdown {
    pub l1: f64,
    pub l2: f64,
    pub l_gamma: f64,
    pub l_boundary: f64,
    pub total: f64,
}

impl LossBreakdown {
    fn new(l1: f64, l2: f64, l_gamma: f64, l_boundary: f64) -> Self {
        Self {
            l1,
            l2,
            l_gamma,
            l_boundary,
            total: l1 + l2 + l_gamma + l_boundary,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
    }
}

/// Per-point residual indicators: each entry is that point's summand of the
/// corresponding loss term including the alpha/beta_j/beta_f weights but not
/// the 1/M normalization, so the mean per category recovers the loss term.
#[derive(Debug, Clone)]
pub struct PointResiduals {
    pub omega1: Vec<(Point, f64)>,
    pub omega2: Vec<(Point, f64)>,
    pub interface: Vec<(InterfaceSample, f64)>,
    pub boundary: Vec<(Point, f64)>,
}

/// What the loss needs from a scalar field on one sub-domain.
pub trait FieldEval {
    fn value(&self, x: &Point) -> Result<f64>;
    fn value_and_normal_deriv(&self, x: &Point, n: &Point) -> Result<(f64, f64)>;
    fn laplacian(&self, x: &Point) -> Result<f64>;
}

impl FieldEval for ScalarField {
    fn value(&self, x: &Point) -> Result<f64> {
        Ok(ScalarField::value(self, x))
    }

    fn value_and_normal_deriv(&self, x: &Point, n: &Point) -> Result<(f64, f64)> {
        let g = self.gradient(x);
        let dot = (0..x.dim()).map(|k| g[k] * n.get(k)).sum();
        Ok((ScalarField::value(self, x), dot))
    }

    fn laplacian(&self, x: &Point) -> Result<f64> {
        Ok(ScalarField::laplacian(self, x))
    }
}

/// One network branch viewed as a field.
pub struct MlpField<'a> {
    pub params: &'a MlpParams,
    pub mode: DerivativeMode,
}

impl FieldEval for MlpField<'_> {
    fn value(&self, x: &Point) -> Result<f64> {
        self.params.forward(x.coords())
    }

    fn value_and_normal_deriv(&self, x: &Point, n: &Point) -> Result<(f64, f64)> {
        let (_, vd) = self
            .params
            .value_dir_trace(x.coords(), n.coords(), self.mode)?;
        Ok((vd.value, vd.dir_deriv))
    }

    fn laplacian(&self, x: &Point) -> Result<f64> {
        Ok(self.params.spatial_eval(x.coords(), self.mode)?.laplacian)
    }
}

/// Mean squared PDE residual `(1/M) sum | -beta_i lap u - f |^2`.
pub fn interior_loss<F>(u: &dyn FieldEval, pts: &[Point], beta_i: f64, f: F) -> Result<f64>
where
    F: Fn(&Point) -> f64,
{
    if pts.is_empty() {
        return Err(Error::EmptySamples("interior"));
    }
    let mut sum = 0.0;
    for x in pts {
        let r = -beta_i * u.laplacian(x)? - f(x);
        sum += r * r;
    }
    Ok(sum / pts.len() as f64)
}

/// Weighted mean squared boundary mismatch `(alpha/M) sum | u - g_D |^2`.
pub fn boundary_loss<F>(u: &dyn FieldEval, pts: &[Point], g_d: F, alpha: f64) -> Result<f64>
where
    F: Fn(&Point) -> f64,
{
    if pts.is_empty() {
        return Err(Error::EmptySamples("boundary"));
    }
    let mut sum = 0.0;
    for x in pts {
        let r = u.value(x)? - g_d(x);
        sum += r * r;
    }
    Ok(alpha * sum / pts.len() as f64)
}

/// Interface term: value-jump and flux-jump mean squares with their weights.
pub fn interface_loss<Gj, Gf>(
    u1: &dyn FieldEval,
    u2: &dyn FieldEval,
    samples: &[InterfaceSample],
    g_j: Gj,
    g_f: Gf,
    beta: (f64, f64),
    weights: &LossWeights,
) -> Result<f64>
where
    Gj: Fn(&Point) -> f64,
    Gf: Fn(&Point) -> f64,
{
    if samples.is_empty() {
        return Err(Error::EmptySamples("interface"));
    }
    let mut value_sum = 0.0;
    let mut flux_sum = 0.0;
    for s in samples {
        let (v1, d1) = u1.value_and_normal_deriv(&s.point, &s.normal)?;
        let (v2, d2) = u2.value_and_normal_deriv(&s.point, &s.normal)?;
        let jv = (v1 - v2) - g_j(&s.point);
        let jf = (beta.0 * d1 - beta.1 * d2) - g_f(&s.point);
        value_sum += jv * jv;
        flux_sum += jf * jf;
    }
    let m = samples.len() as f64;
    Ok(weights.beta_j * value_sum / m + weights.beta_f * flux_sum / m)
}

/// Total loss over a sample set for an arbitrary field pair.
pub fn total_loss(
    u1: &dyn FieldEval,
    u2: &dyn FieldEval,
    problem: &ProblemSpec,
    samples: &SampleSet,
    weights: &LossWeights,
) -> Result<LossBreakdown> {
    samples.check_nonempty()?;
    weights.validate()?;
    let beta = problem.beta();
    let l1 = interior_loss(u1, &samples.omega1, beta.beta1, |x| problem.f1(x))?;
    let l2 = interior_loss(u2, &samples.omega2, beta.beta2, |x| problem.f2(x))?;
    let l_gamma = interface_loss(
        u1,
        u2,
        &samples.interface,
        |x| problem.g_j(x),
        |x| problem.g_f(x),
        (beta.beta1, beta.beta2),
        weights,
    )?;
    let l_boundary = boundary_by_region(u1, u2, problem.geometry(), &samples.boundary, |x| {
        problem.g_d(x)
    })
    .map(|sum| weights.alpha * sum / samples.boundary.len() as f64)?;
    Ok(LossBreakdown::new(l1, l2, l_gamma, l_boundary))
}

/// Boundary mismatch sum with each point evaluated through the branch its
/// region selects (the built-in domains put the whole boundary in the
/// exterior sub-domain).
fn boundary_by_region<F>(
    u1: &dyn FieldEval,
    u2: &dyn FieldEval,
    geometry: &LevelSetGeometry,
    pts: &[Point],
    g_d: F,
) -> Result<f64>
where
    F: Fn(&Point) -> f64,
{
    if pts.is_empty() {
        return Err(Error::EmptySamples("boundary"));
    }
    let tol = geometry.default_classify_tol();
    let mut sum = 0.0;
    for x in pts {
        let u = match geometry.classify(x, tol)? {
            Region::Omega1 => u1.value(x)?,
            Region::Omega2 => u2.value(x)?,
            Region::OnInterface => return Err(Error::AmbiguousRegion),
        };
        let r = u - g_d(x);
        sum += r * r;
    }
    Ok(sum)
}

/// Total loss of a piecewise network.
pub fn total_loss_network(
    pn: &PiecewiseNetwork,
    problem: &ProblemSpec,
    samples: &SampleSet,
    weights: &LossWeights,
    mode: DerivativeMode,
) -> Result<LossBreakdown> {
    let u1 = MlpField {
        params: pn.net1(),
        mode,
    };
    let u2 = MlpField {
        params: pn.net2(),
        mode,
    };
    total_loss(&u1, &u2, problem, samples, weights)
}

/// Total loss of a piecewise network together with its gradient with respect
/// to every parameter of both networks.
pub fn total_loss_with_grad(
    pn: &PiecewiseNetwork,
    problem: &ProblemSpec,
    samples: &SampleSet,
    weights: &LossWeights,
    mode: DerivativeMode,
) -> Result<(LossBreakdown, PairGrad)> {
    samples.check_nonempty()?;
    weights.validate()?;
    let beta = problem.beta();
    let mut grad = PairGrad::zeros_like(pn);

    // Interior terms: residual -beta_i lap u_i - f_i per point.
    let interior = |net: &MlpParams,
                    g: &mut crate::network::ParamGrad,
                    pts: &[Point],
                    b: f64,
                    f: &dyn Fn(&Point) -> f64|
     -> Result<f64> {
        let m = pts.len() as f64;
        let mut sum = 0.0;
        for x in pts {
            let (trace, eval) = net.laplacian_trace(x.coords(), mode)?;
            let r = -b * eval.laplacian - f(x);
            sum += r * r;
            let seed = SpatialSeed::laplacian(2.0 * r * (-b) / m);
            net.backprop(&trace, &seed, g)?;
        }
        Ok(sum / m)
    };
    let l1 = interior(
        pn.net1(),
        &mut grad.net1,
        &samples.omega1,
        beta.beta1,
        &|x| problem.f1(x),
    )?;
    let l2 = interior(
        pn.net2(),
        &mut grad.net2,
        &samples.omega2,
        beta.beta2,
        &|x| problem.f2(x),
    )?;

    // Interface term.
    let m_gamma = samples.interface.len() as f64;
    let mut value_sum = 0.0;
    let mut flux_sum = 0.0;
    for s in &samples.interface {
        let x = s.point.coords();
        let n = s.normal.coords();
        let (t1, vd1) = pn.net1().value_dir_trace(x, n, mode)?;
        let (t2, vd2) = pn.net2().value_dir_trace(x, n, mode)?;
        let jv = (vd1.value - vd2.value) - problem.g_j(&s.point);
        let jf = (beta.beta1 * vd1.dir_deriv - beta.beta2 * vd2.dir_deriv) - problem.g_f(&s.point);
        value_sum += jv * jv;
        flux_sum += jf * jf;

        let cv = 2.0 * weights.beta_j * jv / m_gamma;
        let cf = 2.0 * weights.beta_f * jf / m_gamma;
        pn.net1().backprop(
            &t1,
            &SpatialSeed {
                value: cv,
                direction: Some((n, cf * beta.beta1)),
                laplacian: 0.0,
            },
            &mut grad.net1,
        )?;
        pn.net2().backprop(
            &t2,
            &SpatialSeed {
                value: -cv,
                direction: Some((n, -cf * beta.beta2)),
                laplacian: 0.0,
            },
            &mut grad.net2,
        )?;
    }
    let l_gamma = weights.beta_j * value_sum / m_gamma + weights.beta_f * flux_sum / m_gamma;

    // Boundary term.
    let geometry = pn.geometry();
    let tol = geometry.default_classify_tol();
    let m_b = samples.boundary.len() as f64;
    let mut boundary_sum = 0.0;
    for x in &samples.boundary {
        let (net, g) = match geometry.classify(x, tol)? {
            Region::Omega1 => (pn.net1(), &mut grad.net1),
            Region::Omega2 => (pn.net2(), &mut grad.net2),
            Region::OnInterface => return Err(Error::AmbiguousRegion),
        };
        let (trace, v) = net.value_trace(x.coords())?;
        let r = v - problem.g_d(x);
        boundary_sum += r * r;
        let seed = SpatialSeed::value(2.0 * weights.alpha * r / m_b);
        net.backprop(&trace, &seed, g)?;
    }
    let l_boundary = weights.alpha * boundary_sum / m_b;

    Ok((LossBreakdown::new(l1, l2, l_gamma, l_boundary), grad))
}

/// Per-point residual indicators for a field pair over arbitrary candidate
/// samples (used by the refinement loop to rank candidates).
pub fn pointwise_residuals(
    u1: &dyn FieldEval,
    u2: &dyn FieldEval,
    problem: &ProblemSpec,
    candidates: &SampleSet,
    weights: &LossWeights,
) -> Result<PointResiduals> {
    let beta = problem.beta();
    let geometry = problem.geometry();
    let tol = geometry.default_classify_tol();

    let interior = |u: &dyn FieldEval, pts: &[Point], b: f64, f: &dyn Fn(&Point) -> f64| {
        pts.iter()
            .map(|x| {
                let r = -b * u.laplacian(x)? - f(x);
                Ok((*x, r * r))
            })
            .collect::<Result<Vec<_>>>()
    };
    let omega1 = interior(u1, &candidates.omega1, beta.beta1, &|x| problem.f1(x))?;
    let omega2 = interior(u2, &candidates.omega2, beta.beta2, &|x| problem.f2(x))?;

    let interface = candidates
        .interface
        .iter()
        .map(|s| {
            let (v1, d1) = u1.value_and_normal_deriv(&s.point, &s.normal)?;
            let (v2, d2) = u2.value_and_normal_deriv(&s.point, &s.normal)?;
            let jv = (v1 - v2) - problem.g_j(&s.point);
            let jf = (beta.beta1 * d1 - beta.beta2 * d2) - problem.g_f(&s.point);
            Ok((*s, weights.beta_j * jv * jv + weights.beta_f * jf * jf))
        })
        .collect::<Result<Vec<_>>>()?;

    let boundary = candidates
        .boundary
        .iter()
        .map(|x| {
            let u = match geometry.classify(x, tol)? {
                Region::Omega1 => u1.value(x)?,
                Region::Omega2 => u2.value(x)?,
                Region::OnInterface => return Err(Error::AmbiguousRegion),
            };
            let r = u - problem.g_d(x);
            Ok((*x, weights.alpha * r * r))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PointResiduals {
        omega1,
        omega2,
        interface,
        boundary,
    })
}

/// Residual indicators of a piecewise network.
pub fn pointwise_residuals_network(
    pn: &PiecewiseNetwork,
    problem: &ProblemSpec,
    candidates: &SampleSet,
    weights: &LossWeights,
    mode: DerivativeMode,
) -> Result<PointResiduals> {
    let u1 = MlpField {
        params: pn.net1(),
        mode,
    };
    let u2 = MlpField {
        params: pn.net2(),
        mode,
    };
    pointwise_residuals(&u1, &u2, problem, candidates, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_circle, make_sphere, ProblemSpec};
    use std::sync::Arc;

    fn constant_field(c: f64) -> ScalarField {
        ScalarField::new(
            Arc::new(move |_| c),
            Arc::new(|_| [0.0; 3]),
            Arc::new(|_| 0.0),
        )
    }

    fn circle_samples(problem: &ProblemSpec) -> SampleSet {
        SampleSet::build(problem, 10, 32, 20, 0).unwrap()
    }

    #[test]
    fn interior_loss_examples() {
        let pts = vec![
            Point::xy(0.1, 0.2),
            Point::xy(0.3, -0.1),
            Point::xy(-0.2, 0.0),
        ];
        // constant field, zero source
        let u = constant_field(5.0);
        assert_eq!(interior_loss(&u, &pts, 2.0, |_| 0.0).unwrap(), 0.0);
        // laplacian identically 2, beta 1, f = 0 -> mean of |-2|^2 = 4
        let u = ScalarField::new(Arc::new(|_| 0.0), Arc::new(|_| [0.0; 3]), Arc::new(|_| 2.0));
        assert!((interior_loss(&u, &pts, 1.0, |_| 0.0).unwrap() - 4.0).abs() < 1e-15);
        assert!(matches!(
            interior_loss(&u, &[], 1.0, |_| 0.0).unwrap_err(),
            Error::EmptySamples(_)
        ));
    }

    #[test]
    fn boundary_loss_examples() {
        let pts: Vec<Point> = (0..10).map(|i| Point::xy(i as f64 * 0.1, 1.0)).collect();
        let u = constant_field(1.0);
        assert!((boundary_loss(&u, &pts, |_| 1.0, 500.0).unwrap()).abs() < 1e-15);
        assert!((boundary_loss(&u, &pts, |_| 0.0, 500.0).unwrap() - 500.0).abs() < 1e-12);
        assert_eq!(boundary_loss(&u, &pts, |_| 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn interface_loss_examples() {
        let problem = make_circle(2.0, 2.0).unwrap();
        let samples = problem.geometry().sample_interface(8, 0).unwrap();
        let w = LossWeights {
            beta_j: 1.0,
            beta_f: 1.0,
            alpha: 500.0,
        };
        // identical branches, homogeneous data
        let u = constant_field(3.0);
        let l = interface_loss(&u, &u, &samples, |_| 0.0, |_| 0.0, (2.0, 2.0), &w).unwrap();
        assert_eq!(l, 0.0);
        // constants 1 and 0: unit value jump, zero flux jump
        let one = constant_field(1.0);
        let zero = constant_field(0.0);
        let l = interface_loss(&one, &zero, &samples, |_| 0.0, |_| 0.0, (1.0, 1.0), &w).unwrap();
        assert!((l - 1.0).abs() < 1e-15);
    }

    #[test]
    fn oracle_zero_on_circle() {
        let problem = make_circle(1000.0, 1.0).unwrap();
        let samples = circle_samples(&problem);
        let (u1, u2) = problem.exact().unwrap();
        let b = total_loss(u1, u2, &problem, &samples, &LossWeights::default()).unwrap();
        assert!(b.l1 <= 1e-18, "l1 = {}", b.l1);
        assert!(b.l2 <= 1e-18, "l2 = {}", b.l2);
        assert!(b.l_gamma <= 1e-18, "l_gamma = {}", b.l_gamma);
        assert!(b.l_boundary <= 1e-18, "l_boundary = {}", b.l_boundary);
    }

    #[test]
    fn zero_network_on_sphere() {
        // u2 = 0 is exact outside the sphere, so a zero network has zero
        // exterior and boundary residuals while l1 and l_gamma stay positive.
        let problem = make_sphere();
        let samples = SampleSet::build(&problem, 6, 20, 10, 0).unwrap();
        let zero = constant_field(0.0);
        let b = total_loss(&zero, &zero, &problem, &samples, &LossWeights::default()).unwrap();
        assert_eq!(b.l2, 0.0);
        assert_eq!(b.l_boundary, 0.0);
        assert!(b.l1 > 0.0);
        assert!(b.l_gamma > 0.0);
    }

    #[test]
    fn total_is_sum_of_parts() {
        let problem = make_circle(7.0, 3.0).unwrap();
        let samples = circle_samples(&problem);
        let u1 = constant_field(0.4);
        let u2 = constant_field(-0.3);
        let b = total_loss(&u1, &u2, &problem, &samples, &LossWeights::default()).unwrap();
        assert_eq!(b.total, b.l1 + b.l2 + b.l_gamma + b.l_boundary);
        assert!(b.l1 >= 0.0 && b.l2 >= 0.0 && b.l_gamma >= 0.0 && b.l_boundary >= 0.0);
    }

    #[test]
    fn duplicating_samples_preserves_means() {
        let problem = make_circle(10.0, 1.0).unwrap();
        let samples = circle_samples(&problem);
        let doubled = SampleSet {
            omega1: [samples.omega1.clone(), samples.omega1.clone()].concat(),
            omega2: [samples.omega2.clone(), samples.omega2.clone()].concat(),
            interface: [samples.interface.clone(), samples.interface.clone()].concat(),
            boundary: [samples.boundary.clone(), samples.boundary.clone()].concat(),
        };
        let u1 = constant_field(0.7);
        let u2 = constant_field(0.1);
        let w = LossWeights::default();
        let a = total_loss(&u1, &u2, &problem, &samples, &w).unwrap();
        let b = total_loss(&u1, &u2, &problem, &doubled, &w).unwrap();
        for (x, y) in [
            (a.l1, b.l1),
            (a.l2, b.l2),
            (a.l_gamma, b.l_gamma),
            (a.l_boundary, b.l_boundary),
        ] {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn residual_indicators_average_to_loss_terms() {
        let problem = make_circle(1000.0, 1.0).unwrap();
        let samples = circle_samples(&problem);
        let u1 = constant_field(0.2);
        let u2 = constant_field(-0.1);
        let w = LossWeights::default();
        let res = pointwise_residuals(&u1, &u2, &problem, &samples, &w).unwrap();
        let breakdown = total_loss(&u1, &u2, &problem, &samples, &w).unwrap();

        let mean = |v: &[(Point, f64)]| v.iter().map(|(_, r)| r).sum::<f64>() / v.len() as f64;
        assert!((mean(&res.omega1) - breakdown.l1).abs() < 1e-12);
        assert!((mean(&res.omega2) - breakdown.l2).abs() < 1e-12);
        let mean_if =
            res.interface.iter().map(|(_, r)| r).sum::<f64>() / res.interface.len() as f64;
        assert!((mean_if - breakdown.l_gamma).abs() < 1e-12);
        let mean_b = res.boundary.iter().map(|(_, r)| r).sum::<f64>() / res.boundary.len() as f64;
        assert!((mean_b - breakdown.l_boundary).abs() < 1e-12);
        assert!(res
            .omega1
            .iter()
            .chain(&res.omega2)
            .chain(&res.boundary)
            .all(|(_, r)| *r >= 0.0));
    }

    #[test]
    fn exact_fields_have_zero_indicators() {
        let problem = make_circle(1000.0, 1.0).unwrap();
        let samples = circle_samples(&problem);
        let (u1, u2) = problem.exact().unwrap();
        let res = pointwise_residuals(u1, u2, &problem, &samples, &LossWeights::default()).unwrap();
        for (_, r) in res.omega1.iter().chain(&res.omega2).chain(&res.boundary) {
            assert!(*r <= 1e-18);
        }
        for (_, r) in &res.interface {
            assert!(*r <= 1e-18);
        }
    }
}
