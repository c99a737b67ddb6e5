use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lambda_zeno::exact::LossPolicy;
use lambda_zeno::protocol::{DriveMode, Engine};
use lambda_zeno::validation::{Fault, Suite};
use lambda_zeno::{MeasurementBasis, PhysicalParams, PolarizationLabel, ZenoError};
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config, or parameters outside the model's domain.
    Usage(String),
    /// A run or validation that failed on valid input.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl From<ZenoError> for CliError {
    fn from(e: ZenoError) -> Self {
        match e {
            ZenoError::InvalidParameter(_)
            | ZenoError::InvalidSpec(_)
            | ZenoError::InvalidState(_)
            | ZenoError::ResourceLimit(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Unit in which `detuning` (and the sweep detuning grid) is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetuningUnit {
    Gamma1d,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PreludeMode {
    /// One sigma+ photon, kept only if it came back sigma-.
    Kick,
    /// One sigma+ photon, both reflected outcomes kept.
    Unconditioned,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    Dark,
    AllPlus,
    AllMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowSelect {
    Final,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FigurePart {
    Map,
    Panels,
}

/// Every knob of every subcommand. Unset fields take subcommand defaults.
/// The JSON config file uses the same names with underscores.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_at: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    /// Photon frequency; overridden by --detuning.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// omega - omega0 in units of --detuning-unit.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning_unit: Option<DetuningUnit>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma1d: Option<f64>,
    /// Nonradiative decay rate.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Collective cooperativity; sets gamma = gamma1d (N+1) / (2 c_n).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_n: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub in_pol: Option<PolarizationLabel>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<MeasurementBasis>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialKind>,
    /// Custom initial ground amplitudes as [re, im] pairs (config file only).
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_v: Option<usize>,
    /// Spin rotation angle between photons, in (-pi, pi].
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_phase: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prelude: Option<PreludeMode>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveMode>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine: Option<Engine>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss_policy: Option<LossPolicy>,
    /// Check that V photons leave the prepared dark state untouched.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify_dark: Option<bool>,

    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_at_list: Option<Vec<usize>>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning_steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_steps: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_at_max: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1_min: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1_steps: Option<usize>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<RowSelect>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub part: Option<FigurePart>,

    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<Vec<Suite>>,
    #[arg(long, hide = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault: Option<Fault>,
    /// Also write the validation report as JSON to this path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,

    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Output file; standard output if absent.
    #[arg(long, short)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),* $(,)?) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: Settings) -> Self {
        overlay!(self, top;
            n_at, omega0, omega, detuning, detuning_unit, gamma1d, gamma, c_n,
            in_pol, basis, initial, amplitudes,
            n_v, field_phase, prelude, drive, engine, loss_policy, verify_dark,
            n_at_list, detuning_min, detuning_max, detuning_steps,
            phi_min, phi_max, phi_steps, n_at_max, c1_min, c1_max, c1_steps, rows, part,
            suite, fault, report, format, output, seed,
        );
        self
    }

    pub fn loss_policy(&self) -> LossPolicy {
        self.loss_policy.unwrap_or_default()
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }

    /// Fills the physical fields shared by all subcommands. `c_n` wins over
    /// `gamma` only when the user set it or `gamma` is unset.
    pub fn default_physics(&mut self, n_at: usize, c_n: Option<f64>) -> Result<(), CliError> {
        if self.gamma.is_some() && self.c_n.is_some() {
            return Err(CliError::Usage("set either gamma or c_n, not both".into()));
        }
        self.n_at.get_or_insert(n_at);
        self.omega0.get_or_insert(0.0);
        self.gamma1d.get_or_insert(1.0);
        if self.gamma.is_none() && self.c_n.is_none() {
            match c_n {
                Some(c) => self.c_n = Some(c),
                None => self.gamma = Some(0.0),
            }
        }
        if self.detuning.is_some() || self.omega.is_none() {
            self.detuning.get_or_insert(0.0);
            self.detuning_unit.get_or_insert(DetuningUnit::Gamma1d);
        }
        Ok(())
    }

    fn gamma_for(&self, n_at: usize) -> Result<f64, CliError> {
        let g1 = self.gamma1d.unwrap_or(1.0);
        match (self.gamma, self.c_n) {
            (Some(g), _) => Ok(g),
            (None, Some(c)) if c > 0.0 => Ok(if c.is_infinite() {
                0.0
            } else {
                g1 * (n_at as f64 + 1.0) / (2.0 * c)
            }),
            (None, Some(c)) => Err(CliError::Usage(format!("c_n must be positive, got {c}"))),
            (None, None) => Ok(0.0),
        }
    }

    /// Converts a detuning in the configured unit to `ω − ω₀`.
    pub fn detuning_scale(&self, n_at: usize) -> Result<f64, CliError> {
        match self.detuning_unit.unwrap_or(DetuningUnit::Gamma1d) {
            DetuningUnit::Gamma1d => Ok(self.gamma1d.unwrap_or(1.0)),
            DetuningUnit::Gamma => {
                let g = self.gamma_for(n_at)?;
                if g > 0.0 {
                    Ok(g)
                } else {
                    Err(CliError::Usage(
                        "detuning in units of gamma needs gamma > 0".into(),
                    ))
                }
            }
        }
    }

    /// Parameters for `n_at` atoms at `detuning` (configured unit), or at the
    /// configured frequency when `detuning` is `None`.
    pub fn params_at(
        &self,
        n_at: usize,
        detuning: Option<f64>,
    ) -> Result<PhysicalParams, CliError> {
        let omega0 = self.omega0.unwrap_or(0.0);
        let omega = match detuning.or(self.detuning) {
            Some(d) => omega0 + d * self.detuning_scale(n_at)?,
            None => self.omega.unwrap_or(omega0),
        };
        Ok(PhysicalParams::new(
            omega0,
            omega,
            self.gamma1d.unwrap_or(1.0),
            self.gamma_for(n_at)?,
            n_at,
        )?)
    }

    pub fn params(&self) -> Result<PhysicalParams, CliError> {
        self.params_at(self.n_at.unwrap_or(1), None)
    }
}

/// `steps` evenly spaced points from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    match steps {
        0 => Err(CliError::Usage("grid needs at least one step".into())),
        1 => Ok(vec![min]),
        _ => Ok((0..steps)
            .map(|k| min + (max - min) * k as f64 / (steps - 1) as f64)
            .collect()),
    }
}

pub fn logspace(min: f64, max: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if !(min > 0.0 && max > 0.0) {
        return Err(CliError::Usage("log grid bounds must be positive".into()));
    }
    Ok(linspace(min.log10(), max.log10(), steps)?
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = Settings {
            n_at: Some(3),
            gamma: Some(0.2),
            ..Default::default()
        };
        let flags = Settings {
            n_at: Some(5),
            ..Default::default()
        };
        let merged = file.overlay(flags);
        assert_eq!(merged.n_at, Some(5));
        assert_eq!(merged.gamma, Some(0.2));
    }

    #[test]
    fn settings_round_trip() {
        let mut s = Settings {
            in_pol: Some(PolarizationLabel::V),
            engine: Some(Engine::Collective),
            loss_policy: Some(LossPolicy::PaperReduced),
            n_at_list: Some(vec![1, 2, 4]),
            suite: Some(vec![Suite::Airy]),
            ..Default::default()
        };
        s.default_physics(4, Some(5.0)).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<Settings>(&text).unwrap(), s);
    }

    #[test]
    fn cooperativity_sets_gamma() {
        let mut s = Settings::default();
        s.default_physics(4, Some(5.0)).unwrap();
        assert!((s.params().unwrap().gamma - 0.5).abs() < 1e-15);
    }

    #[test]
    fn detuning_in_gamma_units() {
        let mut s = Settings {
            detuning: Some(2.0),
            detuning_unit: Some(DetuningUnit::Gamma),
            ..Default::default()
        };
        s.default_physics(4, Some(5.0)).unwrap();
        assert!((s.params().unwrap().omega - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grids() {
        assert_eq!(linspace(0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
        let g = logspace(0.01, 100.0, 5).unwrap();
        assert!((g[2] - 1.0).abs() < 1e-12);
        assert!(linspace(0.0, 1.0, 0).is_err());
    }
}
