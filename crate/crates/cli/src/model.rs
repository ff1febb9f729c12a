//! Loading chains from files or generator specs.

use std::fs;
use std::path::{Path, PathBuf};

use adaptive_smc::generators;
use adaptive_smc::io;
use adaptive_smc::{MarkovChain, ModelError, RabinAutomaton};
use clap::Args;

use crate::CliError;

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Transition file.
    #[arg(long, requires = "lab", conflicts_with = "gen")]
    pub tra: Option<PathBuf>,
    /// Label file.
    #[arg(long, requires = "tra")]
    pub lab: Option<PathBuf>,
    /// Initial distribution (default: state 0).
    #[arg(long, requires = "tra")]
    pub init: Option<PathBuf>,
    /// State rewards in [0, 1] (default: all zero).
    #[arg(long, requires = "tra")]
    pub rew: Option<PathBuf>,
    /// Built-in family instead of files: fig1:M, fig3:N, fig4:N,M,
    /// random:N,D,SEED or ergodic:N,FLOOR,SEED.
    #[arg(long, value_name = "FAMILY")]
    pub gen: Option<String>,
}

fn located(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| located(path, e))
}

impl ModelArgs {
    pub fn load(&self) -> Result<MarkovChain, CliError> {
        if let Some(spec) = &self.gen {
            return Ok(generators::from_spec(spec)?);
        }
        let (Some(tra), Some(lab)) = (&self.tra, &self.lab) else {
            return Err(CliError::Input("give --tra and --lab, or --gen".into()));
        };
        let (tra_text, lab_text) = (read(tra)?, read(lab)?);
        io::parse_tra(&tra_text).map_err(|e| located(tra, e))?;
        io::parse_lab(&lab_text).map_err(|e| located(lab, e))?;
        let rew = self.rew.as_deref().map(read).transpose()?;
        let init = self.init.as_deref().map(read).transpose()?;
        io::parse_chain(&tra_text, &lab_text, rew.as_deref(), init.as_deref()).map_err(|e| match e {
            ModelError::Parse(e) => {
                let files: Vec<String> = [&self.rew, &self.init].into_iter().flatten().map(|p| p.display().to_string()).collect();
                CliError::Input(format!("{}: {e}", files.join(" or ")))
            }
            e => CliError::Input(e.to_string()),
        })
    }
}

pub fn load_hoa(path: &Path) -> Result<RabinAutomaton, CliError> {
    io::parse_hoa(&read(path)?).map_err(|e| located(path, e))
}

/// Writes `<prefix>.tra`, `.lab`, `.rew` and `.init`; returns the paths.
pub fn write_chain(chain: &MarkovChain, prefix: &Path) -> Result<Vec<PathBuf>, CliError> {
    let files = [
        ("tra", io::to_tra(chain)),
        ("lab", io::to_lab(chain)),
        ("rew", io::to_rew(chain)),
        ("init", io::to_init(chain)),
    ];
    let mut written = Vec::new();
    for (ext, text) in files {
        let mut path = prefix.as_os_str().to_owned();
        path.push(".");
        path.push(ext);
        let path = PathBuf::from(path);
        fs::write(&path, text).map_err(|e| located(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
