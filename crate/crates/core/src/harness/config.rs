use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assembly::CoefficientField;
use crate::error::{Error, Result};
use crate::linalg::ArnoldiOptions;
use crate::mesh::DomainKind;
use crate::solvers::{SchemeKind, SolverOptions};
use crate::C64;

/// Output encoding of a result table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::invalid(format!("unknown output format '{other}'"))),
        }
    }
}

/// One experiment: a domain, a scheme, its grids and the eigenvalues wanted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub domain: DomainKind,
    pub scheme: SchemeKind,
    pub k: f64,
    pub n_re: f64,
    pub n_im: f64,
    /// Intervals per side of the coarse grid, or of the only grid for a direct solve.
    pub coarse: usize,
    /// Fine grid of the two-grid schemes.
    pub fine: Option<usize>,
    /// Intermediate grid of the local scheme.
    pub meso: Option<usize>,
    pub local_levels: usize,
    /// Number of eigenvalues reported, counted from the first.
    pub count: usize,
    /// Report only this eigenvalue (1-based). The local scheme defaults to 2.
    pub index: Option<usize>,
    pub eig_tol: f64,
    pub pairing_threshold: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let arnoldi = ArnoldiOptions::default();
        Self {
            domain: DomainKind::Square,
            scheme: SchemeKind::Direct,
            k: 1.0,
            n_re: 4.0,
            n_im: 0.0,
            coarse: 64,
            fine: None,
            meso: None,
            local_levels: 1,
            count: 4,
            index: None,
            eig_tol: arnoldi.eig_tol,
            pairing_threshold: 0.1,
            seed: arnoldi.seed,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

impl ExperimentConfig {
    /// Applies one `key = value` setting. Keys mirror the command-line flags;
    /// dashes and underscores are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "domain" => self.domain = value.parse()?,
            "scheme" => self.scheme = value.parse()?,
            "k" => self.k = parse(&key, value)?,
            "n_re" => self.n_re = parse(&key, value)?,
            "n_im" => self.n_im = parse(&key, value)?,
            "subdiv" | "coarse" => self.coarse = parse(&key, value)?,
            "fine" => self.fine = Some(parse(&key, value)?),
            "meso" => self.meso = Some(parse(&key, value)?),
            "local_levels" => self.local_levels = parse(&key, value)?,
            "count" => self.count = parse(&key, value)?,
            "index" => self.index = Some(parse(&key, value)?),
            "eig_tol" => self.eig_tol = parse(&key, value)?,
            "pairing_threshold" => self.pairing_threshold = parse(&key, value)?,
            "seed" => self.seed = parse(&key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            _ => return Err(Error::invalid(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text`; `#` starts a comment.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value, got '{line}'", no + 1)))?;
            self.set(key, value)
                .map_err(|e| e.context(format!("line {}", no + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_str(&std::fs::read_to_string(path)?)
            .map_err(|e| e.context(path.display().to_string()))?;
        Ok(cfg)
    }

    pub fn n(&self) -> C64 {
        C64::new(self.n_re, self.n_im)
    }

    pub fn coefficients(&self) -> Result<CoefficientField> {
        CoefficientField::constant(self.k, self.n())
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            arnoldi: ArnoldiOptions {
                eig_tol: self.eig_tol,
                seed: self.seed,
                ..ArnoldiOptions::default()
            },
            pairing_threshold: self.pairing_threshold,
            ..SolverOptions::default()
        }
    }

    /// Eigenvalue indices reported by this experiment.
    pub fn indices(&self) -> Vec<usize> {
        match (self.index, self.scheme) {
            (Some(j), _) => vec![j],
            (None, SchemeKind::Local3) => vec![2],
            (None, _) => (1..=self.count).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_grid = |name: &str, n: usize| {
            if n == 0 || !n.is_multiple_of(4) {
                Err(Error::invalid(format!(
                    "{name} interval count must be a positive multiple of 4, got {n}"
                )))
            } else {
                Ok(())
            }
        };
        check_grid("coarse", self.coarse)?;
        if self.count == 0 {
            return Err(Error::invalid("count must be at least 1"));
        }
        if self.index == Some(0) {
            return Err(Error::invalid("eigenvalue indices are 1-based"));
        }
        if !(self.eig_tol > 0.0) || !(self.pairing_threshold > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        self.coefficients()?;
        match self.scheme {
            SchemeKind::Direct => {}
            SchemeKind::TwoGrid1 | SchemeKind::TwoGrid2 => {
                let fine = self
                    .fine
                    .ok_or_else(|| Error::invalid("two-grid schemes need a fine grid"))?;
                check_grid("fine", fine)?;
                refinement_steps(self.coarse, fine)?;
            }
            SchemeKind::Local3 => {
                let meso = self
                    .meso
                    .ok_or_else(|| Error::invalid("the local scheme needs a meso grid"))?;
                check_grid("meso", meso)?;
                refinement_steps(self.coarse, meso)?;
                if self.local_levels == 0 {
                    return Err(Error::invalid("local_levels must be at least 1"));
                }
                if self.domain == DomainKind::Square {
                    return Err(Error::invalid("the square has no singular corner to refine around"));
                }
            }
        }
        Ok(())
    }
}

/// Number of halvings taking `coarse` intervals to `fine`.
pub(crate) fn refinement_steps(coarse: usize, fine: usize) -> Result<usize> {
    if fine <= coarse || !fine.is_multiple_of(coarse) || !(fine / coarse).is_power_of_two() {
        return Err(Error::invalid(format!(
            "fine grid ({fine}) must be a power-of-two multiple of the coarse grid ({coarse})"
        )));
    }
    Ok((fine / coarse).trailing_zeros() as usize)
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse '{value}' for {key}")))
}
