//! Run-directory artifacts: checkpoints, CSV tables, and the JSON report.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dls_core::evaluate::{FieldRecord, ResidualLocalization};
use dls_core::geometry::Region;
use dls_core::loss::{LossBreakdown, SampleCounts};
use dls_core::network::{MlpParams, PiecewiseNetwork};
use dls_core::trainer::{AdamState, TrainLogEntry};

use crate::config::RunConfig;
use crate::CliError;

/// Serialized network pair plus optimizer state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub widths: Vec<usize>,
    pub seed: u64,
    pub epoch: u64,
    pub net1: MlpParams,
    pub net2: MlpParams,
    pub adam: Option<AdamState>,
}

impl Checkpoint {
    pub fn from_network(
        pn: &PiecewiseNetwork,
        seed: u64,
        epoch: u64,
        adam: Option<&AdamState>,
    ) -> Self {
        Self {
            widths: pn.net1().widths().to_vec(),
            seed,
            epoch,
            net1: pn.net1().clone(),
            net2: pn.net2().clone(),
            adam: adam.cloned(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let file = File::create(path)
            .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", path.display())))?;
        serde_json::to_writer(BufWriter::new(file), self)
            .map_err(|e| CliError::Io(format!("cannot write `{}`: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read `{}`: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("corrupt checkpoint `{}`: {e}", path.display())))
    }
}

/// One row of `levels.csv` / the report's `levels` array.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSummary {
    /// Refinement level index; -1 marks the optional uniform reference run.
    pub level: i64,
    pub m1: usize,
    pub m2: usize,
    pub m_gamma: usize,
    pub m_boundary: usize,
    pub total_loss: f64,
    pub rel_l2_error: Option<f64>,
}

impl LevelSummary {
    pub fn new(level: i64, counts: SampleCounts, loss: &LossBreakdown, rel: Option<f64>) -> Self {
        Self {
            level,
            m1: counts.m1,
            m2: counts.m2,
            m_gamma: counts.m_interface,
            m_boundary: counts.m_boundary,
            total_loss: loss.total,
            rel_l2_error: rel,
        }
    }
}

/// Machine-readable summary of a run. Timing fields are the only entries
/// that vary between identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub problem: String,
    pub config: RunConfig,
    pub levels: Vec<LevelSummary>,
    pub final_loss: LossBreakdown,
    pub final_rel_l2_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_localization: Option<ResidualLocalization>,
    pub wall_clock_seconds: f64,
    pub artifacts: Vec<String>,
}

impl RunReport {
    /// Write `report.json`, first checking that every listed artifact exists.
    pub fn save(&self, dir: &Path) -> Result<PathBuf, CliError> {
        for artifact in &self.artifacts {
            let p = dir.join(artifact);
            if !p.exists() {
                return Err(CliError::Io(format!(
                    "artifact `{}` listed in the report does not exist",
                    p.display()
                )));
            }
        }
        let path = dir.join("report.json");
        let file = File::create(&path)
            .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)
            .map_err(|e| CliError::Io(format!("cannot write `{}`: {e}", path.display())))?;
        w.write_all(b"\n")
            .map_err(|e| CliError::Io(format!("cannot write `{}`: {e}", path.display())))?;
        Ok(path)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Streaming writer for `training_log.csv`.
pub struct TrainingLogWriter {
    w: BufWriter<File>,
    with_level: bool,
    pub current_level: usize,
}

impl TrainingLogWriter {
    pub fn create(dir: &Path, with_level: bool) -> Result<Self, CliError> {
        let path = dir.join("training_log.csv");
        let file = File::create(&path)
            .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        let header = if with_level {
            "level,epoch,l1,l2,l_gamma,l_boundary,total,seconds"
        } else {
            "epoch,l1,l2,l_gamma,l_boundary,total,seconds"
        };
        writeln!(w, "{header}").map_err(|e| CliError::Io(e.to_string()))?;
        Ok(Self {
            w,
            with_level,
            current_level: 0,
        })
    }

    pub fn write_entry(&mut self, e: &TrainLogEntry) -> Result<(), CliError> {
        let l = &e.loss;
        if self.with_level {
            writeln!(
                self.w,
                "{},{},{},{},{},{},{},{}",
                self.current_level,
                e.epoch,
                l.l1,
                l.l2,
                l.l_gamma,
                l.l_boundary,
                l.total,
                e.seconds
            )
        } else {
            writeln!(
                self.w,
                "{},{},{},{},{},{},{}",
                e.epoch, l.l1, l.l2, l.l_gamma, l.l_boundary, l.total, e.seconds
            )
        }
        .map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn flush(&mut self) -> Result<(), CliError> {
        self.w.flush().map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Write `levels.csv`.
pub fn write_levels_csv(dir: &Path, levels: &[LevelSummary]) -> Result<(), CliError> {
    let path = dir.join("levels.csv");
    let file = File::create(&path)
        .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "level,M1,M2,M_Gamma,M_boundary,total_loss,rel_l2_error")
        .map_err(|e| CliError::Io(e.to_string()))?;
    for l in levels {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            l.level,
            l.m1,
            l.m2,
            l.m_gamma,
            l.m_boundary,
            l.total_loss,
            fmt_opt(l.rel_l2_error)
        )
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// Write `fields.csv` (`x,y[,z],region,u_nn,u_exact,error`).
pub fn write_fields_csv(dir: &Path, dim: usize, records: &[FieldRecord]) -> Result<(), CliError> {
    let path = dir.join("fields.csv");
    let file = File::create(&path)
        .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    let coords_header = if dim == 2 { "x,y" } else { "x,y,z" };
    writeln!(w, "{coords_header},region,u_nn,u_exact,error")
        .map_err(|e| CliError::Io(e.to_string()))?;
    for r in records {
        let coords = r
            .coords
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let region = match r.region {
            Region::Omega1 => "omega1",
            Region::Omega2 => "omega2",
            Region::OnInterface => "interface",
        };
        writeln!(
            w,
            "{coords},{region},{},{},{}",
            r.u_nn,
            fmt_opt(r.u_exact),
            fmt_opt(r.error)
        )
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}
