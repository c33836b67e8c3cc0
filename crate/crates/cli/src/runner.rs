//! The solve / adaptive / evaluate pipelines behind the subcommands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use dls_core::adaptive::{adaptive_solve, AdaptiveRun};
use dls_core::evaluate::{export_fields, relative_l2_error, residual_localization, EvaluationGrid};
use dls_core::loss::{total_loss_network, SampleSet};
use dls_core::network::PiecewiseNetwork;
use dls_core::problems::{ProblemSpec, PROBLEM_NAMES};
use dls_core::rng::{derive_seed, SeedComponent};
use dls_core::trainer::{train_observed, AdamState, TrainLogEntry, TrainObserver};

use crate::config::{Overrides, RunConfig};
use crate::report::{
    write_fields_csv, write_levels_csv, Checkpoint, LevelSummary, RunReport, TrainingLogWriter,
};
use crate::CliError;

/// Candidate-grid densification used for the report's residual-localization
/// metric, mirroring the refinement default.
const LOCALIZATION_GRID_FACTOR: usize = 5;
const LOCALIZATION_DISTANCE: f64 = 0.1;

struct RunObserver {
    log: TrainingLogWriter,
    dir: PathBuf,
    seed: u64,
    checkpoint_every: u64,
    error: Option<CliError>,
}

impl RunObserver {
    fn new(
        dir: &Path,
        seed: u64,
        checkpoint_every: u64,
        with_level: bool,
    ) -> Result<Self, CliError> {
        Ok(Self {
            log: TrainingLogWriter::create(dir, with_level)?,
            dir: dir.to_path_buf(),
            seed,
            checkpoint_every,
            error: None,
        })
    }

    fn record<T>(&mut self, result: Result<T, CliError>) {
        if let (Err(e), None) = (result, &self.error) {
            self.error = Some(e);
        }
    }

    fn finish(mut self) -> Result<(), CliError> {
        let flush = self.log.flush();
        self.record(flush);
        match self.error {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

impl TrainObserver for RunObserver {
    fn on_level_start(&mut self, level: usize) {
        self.log.current_level = level;
    }

    fn on_log(&mut self, entry: &TrainLogEntry) {
        let res = self.log.write_entry(entry);
        self.record(res);
    }

    fn on_checkpoint(&mut self, epoch: u64, pn: &PiecewiseNetwork, state: &AdamState) {
        // The canonical `checkpoint.json` always holds the latest state;
        // periodic multiples additionally keep a numbered copy.
        let ckpt = Checkpoint::from_network(pn, self.seed, epoch, Some(state));
        if self.checkpoint_every > 0 && epoch > 0 && epoch.is_multiple_of(self.checkpoint_every) {
            let res = ckpt.save(&self.dir.join(format!("checkpoint_{epoch:08}.json")));
            self.record(res);
        }
        let res = ckpt.save(&self.dir.join("checkpoint.json"));
        self.record(res);
    }
}

fn prepare_run_dir(cfg: &RunConfig, command: &str) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(cfg.resolved_output_dir(command));
    std::fs::create_dir_all(&dir).map_err(|e| {
        CliError::Io(format!(
            "cannot create run directory `{}`: {e}",
            dir.display()
        ))
    })?;
    std::fs::write(dir.join("config.toml"), cfg.echo_toml()?)
        .map_err(|e| CliError::Io(format!("cannot write config echo: {e}")))?;
    Ok(dir)
}

fn build_samples(cfg: &RunConfig, problem: &ProblemSpec) -> Result<SampleSet, CliError> {
    SampleSet::build(
        problem,
        cfg.sampling.grid_per_dim,
        cfg.sampling.interface,
        cfg.sampling.boundary_per_face,
        derive_seed(cfg.train.seed, SeedComponent::InterfaceSampling),
    )
    .map_err(CliError::from)
}

fn write_final_artifacts(
    dir: &Path,
    cfg: &RunConfig,
    problem: &ProblemSpec,
    pn: &PiecewiseNetwork,
    levels: Vec<LevelSummary>,
    command: &str,
    started: Instant,
) -> Result<RunReport, CliError> {
    let dim = problem.geometry().dim();
    let eval_grid = EvaluationGrid::new(problem.geometry(), cfg.eval_resolution(dim))?;
    let records = export_fields(pn, problem, &eval_grid)?;
    write_fields_csv(dir, dim, &records)?;
    write_levels_csv(dir, &levels)?;

    let localization = residual_localization(
        pn,
        problem,
        &cfg.loss_weights(),
        cfg.derivative_mode()?,
        LOCALIZATION_GRID_FACTOR * cfg.sampling.grid_per_dim,
        LOCALIZATION_DISTANCE,
    )?;

    let final_level = levels.last().expect("at least one level");
    let report = RunReport {
        command: command.to_string(),
        problem: problem.name().to_string(),
        config: cfg.clone(),
        final_loss: dls_core::loss::LossBreakdown {
            // recomputed below; placeholder replaced immediately
            l1: 0.0,
            l2: 0.0,
            l_gamma: 0.0,
            l_boundary: 0.0,
            total: final_level.total_loss,
        },
        final_rel_l2_error: final_level.rel_l2_error,
        residual_localization: Some(localization),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        levels,
        artifacts: vec![
            "config.toml".into(),
            "checkpoint.json".into(),
            "training_log.csv".into(),
            "levels.csv".into(),
            "fields.csv".into(),
        ],
    };
    Ok(report)
}

/// `solve`: train on the fixed uniform sample set, evaluate, write the run
/// directory.
pub fn cmd_solve(config_path: &Path, overrides: &Overrides) -> Result<PathBuf, CliError> {
    let started = Instant::now();
    let cfg = RunConfig::load(config_path, overrides)?;
    let problem = cfg.build_problem()?;
    let geometry = problem.geometry().clone();
    let samples = build_samples(&cfg, &problem)?;
    let dir = prepare_run_dir(&cfg, "solve")?;

    let train_cfg = cfg.to_train_config()?;
    let widths = cfg.widths(geometry.dim());
    let pn = PiecewiseNetwork::init(&widths, train_cfg.seed, geometry.clone())?;

    let mut observer = RunObserver::new(&dir, train_cfg.seed, train_cfg.checkpoint_every, false)?;
    let result = train_observed(
        pn,
        &problem,
        &samples,
        &cfg.loss_weights(),
        &train_cfg,
        &mut observer,
    );
    let (pn, _log) = match result {
        Ok(ok) => {
            observer.finish()?;
            ok
        }
        Err(e) => {
            // partial artifacts (training log + last checkpoint) stay behind
            let _ = observer.finish();
            return Err(e.into());
        }
    };

    let final_loss = total_loss_network(
        &pn,
        &problem,
        &samples,
        &cfg.loss_weights(),
        train_cfg.derivative_mode,
    )?;
    let dim = geometry.dim();
    let eval_grid = EvaluationGrid::new(&geometry, cfg.eval_resolution(dim))?;
    let rel = match problem.exact() {
        Some(_) => Some(relative_l2_error(&pn, &problem, &eval_grid)?),
        None => None,
    };
    let levels = vec![LevelSummary::new(0, samples.counts(), &final_loss, rel)];

    let mut report = write_final_artifacts(&dir, &cfg, &problem, &pn, levels, "solve", started)?;
    report.final_loss = final_loss;
    let report_path = report.save(&dir)?;

    println!("run directory: {}", dir.display());
    println!("total loss: {:.6e}", report.final_loss.total);
    if let Some(err) = report.final_rel_l2_error {
        println!("relative L2 error: {err:.6e}");
    }
    println!("report: {}", report_path.display());
    Ok(dir)
}

/// `adaptive`: the refinement loop, then the same artifact set plus a
/// populated `levels.csv`.
pub fn cmd_adaptive(config_path: &Path, overrides: &Overrides) -> Result<PathBuf, CliError> {
    let started = Instant::now();
    let cfg = RunConfig::load(config_path, overrides)?;
    let adaptive_section = cfg.adaptive.clone().unwrap_or_default();
    let adaptive_cfg = cfg.to_adaptive_config(&adaptive_section)?;
    let problem = cfg.build_problem()?;
    let geometry = problem.geometry().clone();
    let dir = prepare_run_dir(&cfg, "adaptive")?;

    let run = AdaptiveRun {
        problem: &problem,
        widths: cfg.widths(geometry.dim()),
        grid_per_dim: cfg.sampling.grid_per_dim,
        m_interface: cfg.sampling.interface,
        m_boundary_per_face: cfg.sampling.boundary_per_face,
        weights: cfg.loss_weights(),
        eval_grid_per_dim: cfg.eval_resolution(geometry.dim()),
    };
    let mut observer = RunObserver::new(&dir, cfg.train.seed, cfg.train.checkpoint_every, true)?;
    let result = adaptive_solve(&run, &adaptive_cfg, &mut observer);
    let levels = match result {
        Ok(levels) => {
            observer.finish()?;
            levels
        }
        Err(e) => {
            let _ = observer.finish();
            return Err(e.into());
        }
    };

    let mut summaries: Vec<LevelSummary> = levels
        .iter()
        .map(|l| LevelSummary::new(l.level as i64, l.counts, &l.loss, l.rel_l2_error))
        .collect();
    let last = levels.last().expect("at least level 0");

    // Optional uniform reference trained for the same total epoch budget,
    // reported as level -1.
    if let Some(ref_grid) = adaptive_section.uniform_reference {
        let total_epochs: u64 = levels
            .iter()
            .map(|l| l.log.entries.last().map_or(0, |e| e.epoch))
            .sum();
        let ref_samples = SampleSet::build(
            &problem,
            ref_grid,
            adaptive_cfg.refine_factor * cfg.sampling.interface,
            cfg.sampling.boundary_per_face,
            derive_seed(cfg.train.seed, SeedComponent::InterfaceSampling),
        )?;
        let mut ref_cfg = adaptive_cfg.train.clone();
        ref_cfg.epochs = total_epochs.max(1);
        let ref_pn = PiecewiseNetwork::init(&run.widths, ref_cfg.seed, geometry.clone())?;
        let (ref_pn, _) = dls_core::trainer::train(
            ref_pn,
            &problem,
            &ref_samples,
            &cfg.loss_weights(),
            &ref_cfg,
        )?;
        let ref_loss = total_loss_network(
            &ref_pn,
            &problem,
            &ref_samples,
            &cfg.loss_weights(),
            ref_cfg.derivative_mode,
        )?;
        let eval_grid = EvaluationGrid::new(&geometry, run.eval_grid_per_dim)?;
        let ref_err = match problem.exact() {
            Some(_) => Some(relative_l2_error(&ref_pn, &problem, &eval_grid)?),
            None => None,
        };
        summaries.push(LevelSummary::new(
            -1,
            ref_samples.counts(),
            &ref_loss,
            ref_err,
        ));
    }

    let mut report = write_final_artifacts(
        &dir,
        &cfg,
        &problem,
        &last.network,
        summaries,
        "adaptive",
        started,
    )?;
    report.final_loss = last.loss;
    let report_path = report.save(&dir)?;

    println!("run directory: {}", dir.display());
    for l in &report.levels {
        println!(
            "level {}: M1={} M2={} M_Gamma={} M_boundary={} loss={:.4e} rel_l2={}",
            l.level,
            l.m1,
            l.m2,
            l.m_gamma,
            l.m_boundary,
            l.total_loss,
            l.rel_l2_error
                .map(|e| format!("{e:.4e}"))
                .unwrap_or_else(|| "-".into())
        );
    }
    println!("report: {}", report_path.display());
    Ok(dir)
}

/// `evaluate`: reload a checkpoint and print its metrics without training.
pub fn cmd_evaluate(
    checkpoint_path: &Path,
    config_path: &Path,
    grid_override: Option<usize>,
    overrides: &Overrides,
) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path, overrides)?;
    let problem = cfg.build_problem()?;
    let geometry = problem.geometry().clone();
    let ckpt = Checkpoint::load(checkpoint_path)?;

    let expected = cfg.widths(geometry.dim());
    if ckpt.widths != expected {
        return Err(CliError::Config(format!(
            "checkpoint widths {:?} do not match config widths {:?}",
            ckpt.widths, expected
        )));
    }
    let pn = PiecewiseNetwork::new(ckpt.net1, ckpt.net2, geometry.clone())?;

    let samples = build_samples(&cfg, &problem)?;
    let loss = total_loss_network(
        &pn,
        &problem,
        &samples,
        &cfg.loss_weights(),
        cfg.derivative_mode()?,
    )?;
    let dim = geometry.dim();
    let resolution = grid_override.unwrap_or_else(|| cfg.eval_resolution(dim));
    let eval_grid = EvaluationGrid::new(&geometry, resolution)?;

    println!(
        "checkpoint: {} (epoch {})",
        checkpoint_path.display(),
        ckpt.epoch
    );
    if problem.exact().is_some() {
        let rel = relative_l2_error(&pn, &problem, &eval_grid)?;
        println!("relative_l2_error: {rel:e}");
    }
    println!("l1: {:e}", loss.l1);
    println!("l2: {:e}", loss.l2);
    println!("l_gamma: {:e}", loss.l_gamma);
    println!("l_boundary: {:e}", loss.l_boundary);
    println!("total: {:e}", loss.total);
    Ok(())
}

/// `list-problems`: the registry, one name per line.
pub fn cmd_list_problems() {
    println!("built-in problems:");
    for name in PROBLEM_NAMES {
        if name == "circle" {
            println!("  {name} (requires problem.beta1 and problem.beta2)");
        } else {
            println!("  {name}");
        }
    }
}
