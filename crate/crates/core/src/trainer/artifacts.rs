use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::pec::{CensusRow, PecResult};
use super::run::{EpisodeRecord, Trainer};
use crate::error::{Error, Result};
use crate::nn::Scalar;
use crate::sac::SacAgent;

const CHECKPOINT_VERSION: u32 = 1;

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

fn write_all(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => Error::Parse {
            line,
            msg: format!("{}: {kind:?}", path.display()),
        },
    }
}

fn read_rows<R: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<R>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<R>, _>>()
        .map_err(|e| csv_error(path, e))
}

fn write_rows<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One row of an episode log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub index: usize,
    pub r: f64,
    pub final_energy: f64,
    #[serde(rename = "return")]
    pub ret: f64,
    pub eval: bool,
}

impl From<&EpisodeRecord> for EpisodeRow {
    fn from(rec: &EpisodeRecord) -> Self {
        EpisodeRow {
            index: rec.index,
            r: rec.r,
            final_energy: rec.final_energy(),
            ret: rec.ret,
            eval: rec.eval,
        }
    }
}

/// Append-only episode table, flushed after every row.
pub struct EpisodeLog {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl EpisodeLog {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(EpisodeLog {
            path: path.to_path_buf(),
            writer: csv::Writer::from_writer(create(path)?),
        })
    }

    /// Reopens an existing log for appending.
    pub fn append_to(path: &Path) -> Result<Self> {
        let file = OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(EpisodeLog {
            path: path.to_path_buf(),
            writer: csv::WriterBuilder::new().has_headers(false).from_writer(file),
        })
    }

    pub fn record(&mut self, rec: &EpisodeRecord) -> Result<()> {
        self.writer
            .serialize(EpisodeRow::from(rec))
            .map_err(|e| csv_error(&self.path, e))?;
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn read_episode_log(path: &Path) -> Result<Vec<EpisodeRow>> {
    read_rows(path)
}

/// One row of a PEC table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PecRow {
    pub r: f64,
    pub energy: f64,
    pub exact: Option<f64>,
    pub abs_error: Option<f64>,
    pub fidelity: Option<f64>,
    pub seen: bool,
    pub nearest_fallback: bool,
    /// Circuit file, relative to the table's directory.
    pub circuit: String,
}

fn circuit_name(i: usize, r: f64) -> String {
    format!("circuit_{i:04}_r{r:.4}.txt")
}

/// Writes `pec.csv` plus one circuit file per grid point under `dir`.
pub fn write_pec(dir: &Path, result: &PecResult) -> Result<()> {
    let circuits = dir.join("circuits");
    ensure_dir(&circuits)?;
    let mut rows = Vec::with_capacity(result.points.len());
    for (i, p) in result.points.iter().enumerate() {
        let name = circuit_name(i, p.r);
        write_all(&circuits.join(&name), &p.circuit.to_text())?;
        rows.push(PecRow {
            r: p.r,
            energy: p.energy,
            exact: p.exact,
            abs_error: p.exact.map(|e| (p.energy - e).abs()),
            fidelity: p.fidelity,
            seen: p.seen,
            nearest_fallback: p.nearest_fallback,
            circuit: format!("circuits/{name}"),
        });
    }
    write_rows(&dir.join("pec.csv"), rows)
}

pub fn read_pec(path: &Path) -> Result<Vec<PecRow>> {
    read_rows(path)
}

pub fn write_census(path: &Path, rows: &[CensusRow]) -> Result<()> {
    write_rows(path, rows)
}

pub fn census_csv(rows: &[CensusRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("census rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("ascii table")
}

/// Reference energy at one parameter value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub r: f64,
    pub energy: f64,
}

/// Reads an `r,energy` table of reference energies.
pub fn read_reference(path: &Path) -> Result<Vec<ReferenceRow>> {
    read_rows(path)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointState {
    version: u32,
    episodes_done: usize,
    steps_done: usize,
    updates_done: usize,
    log_alpha_discrete: f64,
    log_alpha_continuous: f64,
    buffer_len: usize,
    buffer_cursor: usize,
    #[serde(default)]
    pools: Vec<PoolEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoolEntry {
    r: f64,
    energies: Vec<f64>,
}

/// Networks, temperatures, schedule position and reward pools of a trainer.
/// Replay contents and optimizer moments are not persisted.
pub fn save_checkpoint(dir: &Path, trainer: &Trainer) -> Result<()> {
    ensure_dir(dir)?;
    let agent = trainer.agent();
    for (name, text) in agent.network_texts() {
        write_all(&dir.join(name), &text)?;
    }
    let state = CheckpointState {
        version: CHECKPOINT_VERSION,
        episodes_done: trainer.episodes_done(),
        steps_done: trainer.steps_done(),
        updates_done: trainer.updates_done(),
        log_alpha_discrete: agent.temps.log_alpha_discrete,
        log_alpha_continuous: agent.temps.log_alpha_continuous,
        buffer_len: trainer.buffer().len(),
        buffer_cursor: trainer.buffer().cursor(),
        pools: trainer
            .engine()
            .pools()
            .map(|(r, e)| PoolEntry {
                r,
                energies: e.to_vec(),
            })
            .collect(),
    };
    write_all(
        &dir.join("state.toml"),
        &toml::to_string(&state).expect("checkpoint state serializes"),
    )
}

/// Loads networks and temperatures into `agent`; returns the number of
/// episodes the checkpoint had completed.
pub fn load_agent<T: Scalar>(dir: &Path, agent: &mut SacAgent<T>) -> Result<usize> {
    let state_path = dir.join("state.toml");
    let text = fs::read_to_string(&state_path).map_err(|e| Error::io(&state_path, e))?;
    let state: CheckpointState = toml::from_str(&text).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("{}: {}", state_path.display(), e.message()),
    })?;
    if state.version != CHECKPOINT_VERSION {
        return Err(Error::Invalid(format!(
            "checkpoint version {} is not supported",
            state.version
        )));
    }
    agent.load_network_texts(|name| {
        let p = dir.join(name);
        fs::read_to_string(&p).map_err(|e| Error::io(&p, e))
    })?;
    agent.temps.log_alpha_discrete = state.log_alpha_discrete;
    agent.temps.log_alpha_continuous = state.log_alpha_continuous;
    Ok(state.episodes_done)
}
