use std::path::Path;

use serde::Deserialize;

use super::PauliSum;
use crate::error::{Error, Result};

/// Tolerance used when matching parameter values against sampled ones.
pub const R_MATCH_EPS: f64 = 1e-9;

/// Hamiltonians `H(R)` sampled at discrete parameter values inside `[r_min, r_max]`.
#[derive(Clone, Debug)]
pub struct HamiltonianFamily {
    r_min: f64,
    r_max: f64,
    n: usize,
    samples: Vec<(f64, PauliSum)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    r_min: f64,
    r_max: f64,
    #[serde(rename = "sample", default)]
    samples: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    r: f64,
    path: String,
}

impl HamiltonianFamily {
    pub fn new(r_min: f64, r_max: f64, samples: Vec<(f64, PauliSum)>) -> Result<Self> {
        if !(r_min.is_finite() && r_max.is_finite()) || r_min > r_max {
            return Err(Error::Invalid(format!(
                "bad parameter bounds [{r_min}, {r_max}]"
            )));
        }
        let n = samples
            .first()
            .map(|(_, h)| h.n_qubits())
            .ok_or_else(|| Error::Invalid("family has no samples".into()))?;
        let mut samples = samples;
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (r, h) in &samples {
            if *r < r_min - R_MATCH_EPS || *r > r_max + R_MATCH_EPS {
                return Err(Error::Invalid(format!(
                    "R = {r} outside [{r_min}, {r_max}]"
                )));
            }
            if h.n_qubits() != n {
                return Err(Error::Invalid(format!(
                    "Hamiltonian at R = {r} has {} qubits, family has {n}",
                    h.n_qubits()
                )));
            }
        }
        if samples.windows(2).any(|w| (w[1].0 - w[0].0).abs() < R_MATCH_EPS) {
            return Err(Error::Invalid("duplicate R value in family".into()));
        }
        Ok(HamiltonianFamily {
            r_min,
            r_max,
            n,
            samples,
        })
    }

    /// A single-parameter family, used for the fixed-geometry mode.
    pub fn single(r: f64, h: PauliSum) -> Result<Self> {
        HamiltonianFamily::new(r, r, vec![(r, h)])
    }

    /// Loads a TOML manifest with `r_min`, `r_max` and `[[sample]]` tables
    /// holding `r` and a Hamiltonian `path` relative to `base`.
    pub fn load(manifest: &str, base: &Path) -> Result<Self> {
        let m: Manifest = toml::from_str(manifest).map_err(|e| Error::Parse {
            line: e.span().map(|s| line_of(manifest, s.start)).unwrap_or(0),
            msg: e.message().to_string(),
        })?;
        if m.samples.is_empty() {
            return Err(Error::Invalid("manifest lists no samples".into()));
        }
        for s in &m.samples {
            if s.r < m.r_min - R_MATCH_EPS || s.r > m.r_max + R_MATCH_EPS {
                return Err(Error::Invalid(format!(
                    "R = {} outside [{}, {}]",
                    s.r, m.r_min, m.r_max
                )));
            }
        }
        let samples = m
            .samples
            .iter()
            .map(|s| {
                let path = base.join(&s.path);
                let text =
                    std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                Ok((s.r, PauliSum::parse(&text)?))
            })
            .collect::<Result<Vec<_>>>()?;
        HamiltonianFamily::new(m.r_min, m.r_max, samples)
    }

    /// Loads a `.toml` manifest, or any other file as a single Hamiltonian
    /// placed at `R = 0`.
    pub fn load_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e == "toml") {
            HamiltonianFamily::load(&text, path.parent().unwrap_or(Path::new(".")))
        } else {
            HamiltonianFamily::single(0.0, PauliSum::parse(&text)?)
        }
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[(f64, PauliSum)] {
        &self.samples
    }

    pub fn r_values(&self) -> Vec<f64> {
        self.samples.iter().map(|(r, _)| *r).collect()
    }

    pub fn contains(&self, r: f64) -> bool {
        self.r_min - R_MATCH_EPS <= r && r <= self.r_max + R_MATCH_EPS
    }

    /// Hamiltonian sampled exactly at `r`, if any.
    pub fn get(&self, r: f64) -> Option<&PauliSum> {
        self.samples
            .iter()
            .find(|(s, _)| (s - r).abs() < R_MATCH_EPS)
            .map(|(_, h)| h)
    }

    /// Sample closest to `r` (ties resolve toward the smaller R).
    pub fn nearest(&self, r: f64) -> (f64, &PauliSum) {
        let (s, h) = self
            .samples
            .iter()
            .min_by(|a, b| (a.0 - r).abs().total_cmp(&(b.0 - r).abs()))
            .expect("family is never empty");
        (*s, h)
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Renders a manifest for `entries` of `(r, relative path)`.
pub fn manifest_text(r_min: f64, r_max: f64, entries: &[(f64, String)]) -> String {
    let mut out = format!("r_min = {r_min:?}\nr_max = {r_max:?}\n");
    for (r, path) in entries {
        out.push_str(&format!("\n[[sample]]\nr = {r:?}\npath = {path:?}\n"));
    }
    out
}
