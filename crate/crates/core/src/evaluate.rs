//! Error metrics against exact solutions and field export for external
//! plotting.

use serde::Serialize;

use crate::geometry::{LevelSetGeometry, Point, Region};
use crate::loss::{pointwise_residuals_network, LossWeights, SampleSet};
use crate::network::{DerivativeMode, PiecewiseNetwork};
use crate::problems::ProblemSpec;
use crate::{Error, Result};

/// Default evaluation-grid resolutions per dimension.
pub fn default_eval_resolution(dim: usize) -> usize {
    match dim {
        2 => 201,
        _ => 51,
    }
}

/// Dense cell-center tensor grid restricted to the two sub-domains;
/// interface-touching nodes are dropped. Node order is lexicographic.
#[derive(Debug, Clone)]
pub struct EvaluationGrid {
    nodes: Vec<(Point, Region)>,
    resolution: usize,
}

impl EvaluationGrid {
    pub fn new(geometry: &LevelSetGeometry, n_per_dim: usize) -> Result<Self> {
        let tol = geometry.default_classify_tol();
        let mut nodes = Vec::new();
        for p in geometry.grid_nodes(n_per_dim)? {
            match geometry.classify(&p, tol)? {
                Region::OnInterface => {}
                region => nodes.push((p, region)),
            }
        }
        Ok(Self {
            nodes,
            resolution: n_per_dim,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn nodes(&self) -> &[(Point, Region)] {
        &self.nodes
    }
}

/// Relative L2 error of the piecewise network against the exact solution,
/// by equal-weight quadrature over the grid (the weights cancel in the
/// ratio).
pub fn relative_l2_error(
    pn: &PiecewiseNetwork,
    problem: &ProblemSpec,
    grid: &EvaluationGrid,
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty evaluation grid".into()));
    }
    let (u1, u2) = problem
        .exact()
        .ok_or_else(|| Error::NoExactSolution(problem.name().to_string()))?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, region) in &grid.nodes {
        let (exact, net) = match region {
            Region::Omega1 => (u1.value(p), pn.net1().forward(p.coords())?),
            Region::Omega2 => (u2.value(p), pn.net2().forward(p.coords())?),
            Region::OnInterface => unreachable!("interface nodes are dropped"),
        };
        let diff = exact - net;
        num += diff * diff;
        den += exact * exact;
    }
    if den == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok((num / den).sqrt())
}

/// How strongly the largest interior residual indicators cluster around the
/// interface.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualLocalization {
    /// Fraction of top-decile interior indicators within the distance
    /// threshold of the interface.
    pub fraction_near_interface: f64,
    /// First-order distance threshold (`|phi| / |grad phi|` units).
    pub distance_threshold: f64,
    /// Number of points in the top decile.
    pub top_decile_count: usize,
}

/// Rank the interior PDE residual indicators of `pn` on a dense grid and
/// measure what fraction of the top decile sits within `distance_threshold`
/// of the interface (estimated to first order as `|phi| / |grad phi|`).
pub fn residual_localization(
    pn: &PiecewiseNetwork,
    problem: &ProblemSpec,
    weights: &LossWeights,
    mode: DerivativeMode,
    grid_per_dim: usize,
    distance_threshold: f64,
) -> Result<ResidualLocalization> {
    let geometry = problem.geometry();
    let tol = geometry.default_classify_tol();
    let (omega1, omega2) = geometry.sample_uniform_grid(grid_per_dim, tol)?;
    let candidates = SampleSet {
        omega1,
        omega2,
        interface: Vec::new(),
        boundary: Vec::new(),
    };
    let residuals = pointwise_residuals_network(pn, problem, &candidates, weights, mode)?;
    let mut interior: Vec<(Point, f64)> = residuals
        .omega1
        .into_iter()
        .chain(residuals.omega2)
        .collect();
    if interior.is_empty() {
        return Err(Error::EmptySamples("interior"));
    }
    interior.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.lex_cmp(&b.0))
    });
    let top = ((interior.len() as f64 * 0.1).ceil() as usize).clamp(1, interior.len());
    let near = interior[..top]
        .iter()
        .filter(|(p, _)| {
            let g = geometry.grad_phi(p);
            let norm = g[..p.dim()].iter().map(|v| v * v).sum::<f64>().sqrt();
            norm > 0.0 && geometry.phi(p).abs() / norm <= distance_threshold
        })
        .count();
    Ok(ResidualLocalization {
        fraction_near_interface: near as f64 / top as f64,
        distance_threshold,
        top_decile_count: top,
    })
}

/// One exported grid node.
#[derive(Debug, Clone, Serialize)]
pub struct FieldRecord {
    pub coords: Vec<f64>,
    pub region: Region,
    pub u_nn: f64,
    pub u_exact: Option<f64>,
    pub error: Option<f64>,
}

/// Tabulate the network (and, when available, the exact solution and error)
/// over the grid, one record per node in lexicographic coordinate order.
pub fn export_fields(
    pn: &PiecewiseNetwork,
    problem: &ProblemSpec,
    grid: &EvaluationGrid,
) -> Result<Vec<FieldRecord>> {
    let exact = problem.exact();
    let mut out = Vec::with_capacity(grid.len());
    for (p, region) in &grid.nodes {
        let u_nn = match region {
            Region::Omega1 => pn.net1().forward(p.coords())?,
            Region::Omega2 => pn.net2().forward(p.coords())?,
            Region::OnInterface => unreachable!("interface nodes are dropped"),
        };
        let u_exact = exact.map(|(u1, u2)| match region {
            Region::Omega1 => u1.value(p),
            _ => u2.value(p),
        });
        out.push(FieldRecord {
            coords: p.coords().to_vec(),
            region: *region,
            u_nn,
            u_exact,
            error: u_exact.map(|e| e - u_nn),
        });
    }
    Ok(out)
}
