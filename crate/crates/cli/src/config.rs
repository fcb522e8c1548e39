use std::path::{Path, PathBuf};

use clap::ValueEnum;
use pbn_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// Vertex cap for classical runs.
pub const MAX_CLASSICAL_VERTICES: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    /// CSV point cloud, Vietoris-Rips filtration.
    #[default]
    Points,
    /// CSV edge list `u,v,weight`, clique filtration on weights.
    Graph,
    /// JSON filtered complex.
    Complex,
    /// CSV point cloud, lazy witness filtration on `landmarks`.
    Witness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Classical,
    QuantumSim,
    Both,
}

impl Mode {
    pub fn classical(self) -> bool {
        matches!(self, Mode::Classical | Mode::Both)
    }

    pub fn quantum(self) -> bool {
        matches!(self, Mode::QuantumSim | Mode::Both)
    }
}

/// Run configuration as read from `--config`; every field may be overridden
/// on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub kind: InputKind,
    pub landmarks: Option<Vec<usize>>,
    /// Vertex count for edge lists with isolated vertices.
    pub vertices: Option<usize>,
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub q: usize,
    pub mode: Mode,
    pub eps: f64,
    pub eta: f64,
    pub seed: u64,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    /// Replace every approximate stage by its dense exact counterpart.
    pub exact: bool,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            kind: InputKind::Points,
            landmarks: None,
            vertices: None,
            t: None,
            s: None,
            q: 1,
            mode: Mode::Classical,
            eps: 0.05,
            eta: 0.05,
            seed: 0,
            gamma: None,
            lambda: None,
            exact: false,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Input(format!("cannot open config {}: {e}", path.display())))?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }

    pub fn input(&self) -> Result<&Path> {
        self.input.as_deref().ok_or_else(|| Error::Input("no input file given".into()))
    }

    /// `(t, s)` with `s` defaulting to `t`.
    pub fn scales(&self) -> Result<(f64, f64)> {
        let t = self.t.ok_or_else(|| Error::Input("no scale t given".into()))?;
        let s = self.s.unwrap_or(t);
        check_scales(t, s)?;
        Ok((t, s))
    }

    /// Checks the fields that do not depend on the chosen scales.
    pub fn validate(&self) -> Result<()> {
        self.input()?;
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::Input(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Input(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if self.kind == InputKind::Witness && self.landmarks.as_ref().is_none_or(Vec::is_empty) {
            return Err(Error::Input("witness input needs a non-empty landmark list".into()));
        }
        Ok(())
    }
}

pub fn check_scales(t: f64, s: f64) -> Result<()> {
    if !t.is_finite() || !s.is_finite() {
        return Err(Error::Input(format!("scales must be finite, got t = {t}, s = {s}")));
    }
    if t > s {
        return Err(Error::Input(format!("need t <= s, got t = {t}, s = {s}")));
    }
    Ok(())
}
