//! Residual-driven sample refinement: enlarge candidate pools, rank them by
//! the pointwise residual indicator at the current parameters, keep the top
//! fraction, and retrain.
//!
//! Points are only ever added, so the sample set of level `k + 1` strictly
//! contains that of level `k`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::evaluate::{relative_l2_error, EvaluationGrid};
use crate::geometry::{InterfaceSample, Point};
use crate::loss::{
    pointwise_residuals_network, total_loss_network, LossBreakdown, LossWeights, PointResiduals,
    SampleCounts, SampleSet,
};
use crate::network::PiecewiseNetwork;
use crate::problems::ProblemSpec;
use crate::rng::{derive_seed, SeedComponent};
use crate::trainer::{train_observed, TrainConfig, TrainLog, TrainObserver};
use crate::{Error, Result};

/// Coordinates are considered the same sampling location within this bound.
const DEDUP_TOL: f64 = 1e-12;

/// Refinement-loop parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    /// Candidate densification per level (grid resolution multiplier and
    /// interface/boundary count multiplier).
    pub refine_factor: usize,
    /// Fraction of ranked candidates to keep, per category or globally.
    pub keep_fraction: f64,
    /// Number of refinement levels after level 0.
    pub levels: usize,
    /// Rank candidates within each category independently instead of in one
    /// global list.
    pub per_category_ranking: bool,
    /// Start each level from the previous level's trained parameters.
    pub warm_start: bool,
    /// Also generate boundary candidates (frozen by default).
    pub refine_boundary: bool,
    /// Level-0 training configuration.
    pub train: TrainConfig,
    /// Epoch count for levels >= 1 (level-0 count when absent).
    pub epochs_per_level: Option<u64>,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            refine_factor: 5,
            keep_fraction: 0.10,
            levels: 3,
            per_category_ranking: true,
            warm_start: true,
            refine_boundary: false,
            train: TrainConfig::default(),
            epochs_per_level: None,
        }
    }
}

impl AdaptiveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.refine_factor < 2 {
            return Err(Error::InvalidConfig(format!(
                "refine_factor must be at least 2, got {}",
                self.refine_factor
            )));
        }
        if !self.keep_fraction.is_finite() || self.keep_fraction <= 0.0 || self.keep_fraction > 1.0
        {
            return Err(Error::InvalidConfig(format!(
                "keep_fraction must lie in (0, 1], got {}",
                self.keep_fraction
            )));
        }
        self.train.validate()
    }
}

/// Everything fixed across the refinement levels of one adaptive run.
#[derive(Debug, Clone)]
pub struct AdaptiveRun<'a> {
    pub problem: &'a ProblemSpec,
    pub widths: Vec<usize>,
    pub grid_per_dim: usize,
    pub m_interface: usize,
    pub m_boundary_per_face: usize,
    pub weights: LossWeights,
    pub eval_grid_per_dim: usize,
}

/// Outcome of one refinement level.
#[derive(Debug, Clone)]
pub struct RefinementLevel {
    pub level: usize,
    pub counts: SampleCounts,
    pub network: PiecewiseNetwork,
    pub loss: LossBreakdown,
    pub rel_l2_error: Option<f64>,
    pub log: TrainLog,
}

/// Candidate pool for the next level: a denser interior grid plus fresh
/// interface (and optionally boundary) samples, with anything already in the
/// training set removed.
pub fn generate_candidates(
    problem: &ProblemSpec,
    base_grid_per_dim: usize,
    current: &SampleSet,
    cfg: &AdaptiveConfig,
    level: usize,
    master_seed: u64,
) -> Result<SampleSet> {
    cfg.validate()?;
    let geom = problem.geometry();
    let tol = geom.default_classify_tol();
    let (grid1, grid2) = geom.sample_uniform_grid(cfg.refine_factor * base_grid_per_dim, tol)?;
    let omega1 = exclude_points(grid1, &[&current.omega1, &current.omega2]);
    let omega2 = exclude_points(grid2, &[&current.omega1, &current.omega2]);

    let seed = derive_seed(master_seed, SeedComponent::Refinement(level as u32));
    let fresh = geom.sample_interface(cfg.refine_factor * current.interface.len(), seed)?;
    let existing: Vec<Point> = current.interface.iter().map(|s| s.point).collect();
    let interface: Vec<InterfaceSample> = fresh
        .into_iter()
        .filter(|s| !existing.iter().any(|p| p.approx_eq(&s.point, DEDUP_TOL)))
        .collect();

    let boundary = if cfg.refine_boundary {
        let d = geom.dim();
        let per_face = current.boundary.len() / (2 * d);
        let fresh = geom
            .domain()
            .sample_boundary(cfg.refine_factor * per_face.max(1))?;
        exclude_points(fresh, &[&current.boundary])
    } else {
        Vec::new()
    };

    Ok(SampleSet {
        omega1,
        omega2,
        interface,
        boundary,
    })
}

fn exclude_points(candidates: Vec<Point>, existing: &[&[Point]]) -> Vec<Point> {
    candidates
        .into_iter()
        .filter(|c| {
            !existing
                .iter()
                .any(|list| list.iter().any(|p| p.approx_eq(c, DEDUP_TOL)))
        })
        .collect()
}

/// The candidates to add: the top `ceil(keep_fraction * count)` by indicator,
/// ranked per category or globally. Ties break toward lexicographically
/// smaller points.
pub fn select_top(residuals: &PointResiduals, keep_fraction: f64, per_category: bool) -> SampleSet {
    if per_category {
        SampleSet {
            omega1: take_top(&residuals.omega1, keep_fraction, |p| *p),
            omega2: take_top(&residuals.omega2, keep_fraction, |p| *p),
            interface: take_top(&residuals.interface, keep_fraction, |s| s.point),
            boundary: take_top(&residuals.boundary, keep_fraction, |p| *p),
        }
    } else {
        #[derive(Clone, Copy)]
        enum Tagged {
            O1(Point),
            O2(Point),
            If(InterfaceSample),
            Bd(Point),
        }
        let mut all: Vec<(Tagged, f64)> = Vec::new();
        all.extend(residuals.omega1.iter().map(|(p, r)| (Tagged::O1(*p), *r)));
        all.extend(residuals.omega2.iter().map(|(p, r)| (Tagged::O2(*p), *r)));
        all.extend(
            residuals
                .interface
                .iter()
                .map(|(s, r)| (Tagged::If(*s), *r)),
        );
        all.extend(residuals.boundary.iter().map(|(p, r)| (Tagged::Bd(*p), *r)));
        let location = |t: &Tagged| match t {
            Tagged::O1(p) | Tagged::O2(p) | Tagged::Bd(p) => *p,
            Tagged::If(s) => s.point,
        };
        sort_ranked(&mut all, &location);
        all.truncate(keep_count(keep_fraction, all.len()));
        let mut out = SampleSet {
            omega1: Vec::new(),
            omega2: Vec::new(),
            interface: Vec::new(),
            boundary: Vec::new(),
        };
        for (t, _) in all {
            match t {
                Tagged::O1(p) => out.omega1.push(p),
                Tagged::O2(p) => out.omega2.push(p),
                Tagged::If(s) => out.interface.push(s),
                Tagged::Bd(p) => out.boundary.push(p),
            }
        }
        out
    }
}

fn take_top<T: Copy>(
    entries: &[(T, f64)],
    keep_fraction: f64,
    location: impl Fn(&T) -> Point,
) -> Vec<T> {
    let mut ranked: Vec<(T, f64)> = entries.to_vec();
    sort_ranked(&mut ranked, &|t| location(t));
    ranked.truncate(keep_count(keep_fraction, entries.len()));
    ranked.into_iter().map(|(t, _)| t).collect()
}

fn sort_ranked<T>(entries: &mut [(T, f64)], location: &dyn Fn(&T) -> Point) {
    entries.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| location(&a.0).lex_cmp(&location(&b.0)))
    });
}

/// `ceil(fraction * count)`, clamped to the pool size; the epsilon absorbs
/// binary-representation noise like `0.1 * 10 = 1.0000000000000002`.
fn keep_count(fraction: f64, count: usize) -> usize {
    if count == 0 {
        return 0;
    }
    let target = fraction * count as f64;
    (((target - 1e-9).ceil()) as usize).clamp(1, count)
}

/// Run the full refinement loop: train on the base uniform sample set, then
/// repeatedly rank a denser candidate pool at the trained parameters, add the
/// top fraction, and retrain.
pub fn adaptive_solve(
    run: &AdaptiveRun,
    cfg: &AdaptiveConfig,
    observer: &mut dyn TrainObserver,
) -> Result<Vec<RefinementLevel>> {
    cfg.validate()?;
    let problem = run.problem;
    let geometry = problem.geometry();
    let master_seed = cfg.train.seed;

    let mut samples = SampleSet::build(
        problem,
        run.grid_per_dim,
        run.m_interface,
        run.m_boundary_per_face,
        derive_seed(master_seed, SeedComponent::InterfaceSampling),
    )?;
    let eval_grid = EvaluationGrid::new(geometry, run.eval_grid_per_dim)?;

    let mut levels = Vec::with_capacity(cfg.levels + 1);
    let mut pn = PiecewiseNetwork::init(&run.widths, master_seed, geometry.clone())?;

    for level in 0..=cfg.levels {
        if level > 0 {
            let candidates =
                generate_candidates(problem, run.grid_per_dim, &samples, cfg, level, master_seed)?;
            let residuals = pointwise_residuals_network(
                &pn,
                problem,
                &candidates,
                &run.weights,
                cfg.train.derivative_mode,
            )?;
            let selected = select_top(&residuals, cfg.keep_fraction, cfg.per_category_ranking);
            samples.omega1.extend(selected.omega1);
            samples.omega2.extend(selected.omega2);
            samples.interface.extend(selected.interface);
            samples.boundary.extend(selected.boundary);

            if !cfg.warm_start {
                let seed = derive_seed(master_seed, SeedComponent::Refinement(level as u32));
                pn = PiecewiseNetwork::init(&run.widths, seed, geometry.clone())?;
            }
        }

        let mut level_cfg = cfg.train.clone();
        if level > 0 {
            if let Some(epochs) = cfg.epochs_per_level {
                level_cfg.epochs = epochs;
            }
        }
        observer.on_level_start(level);
        let (trained, log) =
            train_observed(pn, problem, &samples, &run.weights, &level_cfg, observer).map_err(
                |e| Error::LevelFailed {
                    level,
                    source: Box::new(e),
                },
            )?;
        pn = trained;

        let loss = total_loss_network(
            &pn,
            problem,
            &samples,
            &run.weights,
            level_cfg.derivative_mode,
        )?;
        let rel_l2_error = match problem.exact() {
            Some(_) => Some(relative_l2_error(&pn, problem, &eval_grid)?),
            None => None,
        };
        levels.push(RefinementLevel {
            level,
            counts: samples.counts(),
            network: pn.clone(),
            loss,
            rel_l2_error,
            log,
        });
    }
    Ok(levels)
}
