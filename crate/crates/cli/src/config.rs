//! TOML run configuration and its validation.
//!
//! Rates are dimensionless (`kappa = 1`) unless `units` says otherwise:
//!
//! * `units = "kappa"`: couplings are multiples of `kappa`; give `kappa` or
//!   set `dimensionless = true`;
//! * `units = "rad/s"`: couplings and `kappa` are absolute angular rates.
//!
//! Times are always in units of `1/kappa`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ringsqueeze::hamiltonian::{EnsembleCoupling, PhysicalParams};
use ringsqueeze::protocols::ProtocolSpec;
use ringsqueeze::{Direction, EnsembleDrive, LaserConfig, ModeLabel, ProtocolKind};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Units {
    #[serde(rename = "kappa")]
    Kappa,
    #[serde(rename = "rad/s")]
    RadPerSecond,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub units: Option<Units>,
    pub dimensionless: Option<bool>,
    pub kappa: Option<f64>,
    pub threshold: Option<f64>,
    /// Reserved; every computation is deterministic.
    pub seed: Option<u64>,
    pub laser: Option<RawLaser>,
    pub physical: Option<RawPhysical>,
    pub protocol: Option<RawProtocol>,
    pub steady_state: Option<RawSteadyState>,
    pub evolve: Option<RawEvolve>,
    pub modes: Option<RawModes>,
    pub oracle: Option<RawOracle>,
    pub sweep: Option<RawSweep>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLaser {
    pub direction: Option<Direction>,
    pub ensembles: Vec<EnsembleDrive>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPhysical {
    pub direction: Option<Direction>,
    pub atoms: u64,
    pub ensembles: Vec<EnsembleCoupling>,
    pub omega_c: f64,
    pub omega_1: f64,
    pub omega_lu: f64,
    pub omega_ls: f64,
    pub kappa: f64,
    pub gamma: f64,
}

impl RawPhysical {
    fn params(&self) -> PhysicalParams {
        PhysicalParams {
            atoms: self.atoms,
            ensembles: self.ensembles.clone(),
            omega_c: self.omega_c,
            omega_1: self.omega_1,
            omega_lu: self.omega_lu,
            omega_ls: self.omega_ls,
            kappa: self.kappa,
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawProtocol {
    pub kind: ProtocolKind,
    pub xi: f64,
    pub beta_ref: Option<f64>,
    pub duration: Option<f64>,
    pub durations: Option<Vec<f64>>,
    pub max_ratio: Option<f64>,
    pub step_order: Option<Vec<usize>>,
    pub samples_per_step: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    #[default]
    Lab,
    /// Single-ensemble squeezing frame with `xi = atanh(beta_s / beta_u)`.
    Squeezed,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSteadyState {
    pub modes: Option<Vec<String>>,
    pub frame: Option<Frame>,
    pub sweep_ratios: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEvolve {
    pub duration: f64,
    pub samples: Option<usize>,
    pub modes: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawModes {
    pub atoms: usize,
    pub k_length: Option<f64>,
    pub spacing: Option<f64>,
    pub wavenumber: Option<f64>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOracle {
    pub modes: Vec<String>,
    pub cutoff: Option<usize>,
    pub cutoffs: Option<Vec<usize>>,
    pub times: Option<Vec<f64>>,
    pub damping: Option<bool>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    /// Protocol config files, relative to this file.
    pub configs: Option<Vec<PathBuf>>,
    /// Values of `xi` substituted into this file's `[protocol]` table.
    pub xi: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct SteadyStateConfig {
    pub modes: Option<Vec<ModeLabel>>,
    pub frame: Frame,
    pub sweep_ratios: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EvolveConfig {
    pub duration: f64,
    pub samples: usize,
    pub modes: Option<Vec<ModeLabel>>,
}

#[derive(Debug, Clone)]
pub struct ModesConfig {
    pub atoms: usize,
    pub spacing: f64,
    pub wavenumber: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub modes: Vec<ModeLabel>,
    pub cutoffs: Vec<usize>,
    pub times: Vec<f64>,
    pub damping: bool,
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub protocols: Vec<ProtocolSpec>,
}

/// Validated configuration; sections not present stay `None`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub path: PathBuf,
    /// Parsed document, echoed into reports.
    pub echo: toml::Value,
    pub units: Option<Units>,
    pub kappa: f64,
    pub threshold: f64,
    /// Couplings in absolute units.
    pub laser: Option<LaserConfig>,
    /// Where the couplings came from: `laser-table` or `coupling-strengths`.
    pub laser_source: &'static str,
    pub protocol: Option<ProtocolSpec>,
    pub steady_state: Option<SteadyStateConfig>,
    pub evolve: Option<EvolveConfig>,
    pub modes: Option<ModesConfig>,
    pub oracle: Option<OracleConfig>,
    pub sweep: Option<SweepConfig>,
}

fn labels(raw: &[String], errors: &mut Vec<String>, what: &str) -> Vec<ModeLabel> {
    raw.iter()
        .filter_map(|s| match s.parse::<ModeLabel>() {
            Ok(l) => Some(l),
            Err(e) => {
                errors.push(format!("{what}: {e}"));
                None
            }
        })
        .collect()
}

fn positive(v: f64, name: &str, errors: &mut Vec<String>) {
    if !(v > 0.0 && v.is_finite()) {
        errors.push(format!("{name} must be positive and finite, got {v}"));
    }
}

fn protocol_spec(raw: &RawProtocol, kappa: f64, errors: &mut Vec<String>) -> ProtocolSpec {
    let mut spec = ProtocolSpec::new(raw.kind, raw.xi);
    spec.kappa = kappa;
    if let Some(b) = raw.beta_ref {
        spec.beta_ref = b;
    }
    match (raw.duration, &raw.durations) {
        (Some(_), Some(_)) => errors.push("protocol: give either duration or durations, not both".into()),
        (Some(d), None) => spec.durations = vec![d],
        (None, Some(ds)) => spec.durations = ds.clone(),
        (None, None) => {}
    }
    if let Some(m) = raw.max_ratio {
        spec.max_ratio = m;
    }
    if let Some(o) = &raw.step_order {
        spec.step_order = o.clone();
    }
    if let Some(n) = raw.samples_per_step {
        spec.samples_per_step = n;
    }
    errors.extend(spec.violations().into_iter().map(|v| format!("protocol: {v}")));
    spec
}

/// Reads and validates a config file, reporting every violation at once.
pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(vec![format!("{}: {e}", path.display())]))?;
    let echo: toml::Value =
        toml::from_str(&text).map_err(|e| CliError::Config(vec![format!("{}: {e}", path.display())]))?;
    let raw: RawConfig =
        toml::from_str(&text).map_err(|e| CliError::Config(vec![format!("{}: {e}", path.display())]))?;
    let mut errors = Vec::new();

    let kappa = match (raw.units, raw.kappa, raw.dimensionless.unwrap_or(false)) {
        (_, Some(k), true) => {
            errors.push(format!("kappa = {k} conflicts with dimensionless = true"));
            1.0
        }
        (Some(Units::Kappa), None, false) => {
            errors.push("units = \"kappa\" needs a value for kappa or dimensionless = true".into());
            1.0
        }
        (Some(Units::RadPerSecond), None, _) => {
            errors.push("units = \"rad/s\" needs kappa in rad/s".into());
            1.0
        }
        (None, Some(k), false) => {
            errors.push(format!("kappa = {k} given without declaring units"));
            1.0
        }
        (_, Some(k), false) => {
            positive(k, "kappa", &mut errors);
            k
        }
        (_, None, _) => 1.0,
    };
    // couplings given in units of kappa are scaled to absolute rates
    let scale = if raw.units == Some(Units::Kappa) { kappa } else { 1.0 };

    let threshold = raw.threshold.unwrap_or(0.99);
    if !(0.0..=1.0).contains(&threshold) {
        errors.push(format!("threshold must lie in [0, 1], got {threshold}"));
    }

    let laser = match (&raw.laser, &raw.physical) {
        (Some(_), Some(_)) => {
            errors.push("give either [laser] or [physical], not both".into());
            None
        }
        (Some(l), None) => {
            let cfg = LaserConfig::new(
                l.direction.unwrap_or(Direction::Clockwise),
                l.ensembles
                    .iter()
                    .map(|e| EnsembleDrive { beta_u: e.beta_u * scale, beta_s: e.beta_s * scale, ..*e })
                    .collect(),
            );
            if cfg.ensembles.is_empty() || cfg.ensembles.len() > 2 {
                errors.push(format!("laser: expected 1 or 2 ensembles, got {}", cfg.ensembles.len()));
            }
            if let Err(e) = cfg.validate() {
                errors.push(format!("laser: {e} (stability rule beta_u >= beta_s)"));
            }
            Some(cfg)
        }
        (None, Some(raw_p)) => {
            let p = raw_p.params();
            if raw.units != Some(Units::RadPerSecond) {
                errors.push("[physical] parameters require units = \"rad/s\"".into());
            }
            if (p.kappa - kappa).abs() > 1e-12 * kappa.abs() {
                errors.push(format!("physical.kappa = {} differs from kappa = {kappa}", p.kappa));
            }
            errors.extend(p.violations(10.0).into_iter().map(|v| format!("physical: {v}")));
            match p.to_laser_config(raw_p.direction.unwrap_or(Direction::Clockwise)) {
                Ok(cfg) => {
                    if let Err(e) = cfg.validate() {
                        errors.push(format!("physical: {e} (stability rule beta_u >= beta_s)"));
                    }
                    Some(cfg)
                }
                Err(e) => {
                    errors.push(format!("physical: {e}"));
                    None
                }
            }
        }
        (None, None) => None,
    };

    let protocol = raw.protocol.as_ref().map(|p| protocol_spec(p, kappa, &mut errors));

    let steady_state = raw.steady_state.as_ref().map(|s| {
        let modes = s.modes.as_ref().map(|m| labels(m, &mut errors, "steady_state.modes"));
        let frame = s.frame.unwrap_or_default();
        if frame == Frame::Squeezed {
            match &laser {
                Some(l) if l.ensembles.len() != 1 => {
                    errors.push("steady_state: the squeezed frame needs exactly one ensemble".into())
                }
                Some(l) if l.ensembles[0].phi_u != l.ensembles[0].phi_s => {
                    errors.push("steady_state: the squeezed frame needs phi_u = phi_s".into())
                }
                _ => {}
            }
        }
        let sweep_ratios = s.sweep_ratios.clone().unwrap_or_default();
        if sweep_ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            errors.push("steady_state.sweep_ratios must be finite and non-negative".into());
        }
        SteadyStateConfig { modes, frame, sweep_ratios }
    });

    let evolve = raw.evolve.as_ref().map(|e| {
        if !(e.duration >= 0.0 && e.duration.is_finite()) {
            errors.push(format!("evolve.duration must be non-negative, got {}", e.duration));
        }
        let samples = e.samples.unwrap_or(50);
        if samples == 0 {
            errors.push("evolve.samples must be at least 1".into());
        }
        let modes = e.modes.as_ref().map(|m| labels(m, &mut errors, "evolve.modes"));
        EvolveConfig { duration: e.duration, samples, modes }
    });

    let modes = raw.modes.as_ref().map(|m| {
        if m.atoms == 0 {
            errors.push("modes.atoms must be at least 1".into());
        }
        let (spacing, wavenumber) = match (m.k_length, m.spacing, m.wavenumber) {
            (Some(kl), None, None) => {
                positive(kl, "modes.k_length", &mut errors);
                (kl / m.atoms.max(1) as f64, 1.0)
            }
            (None, Some(d), Some(k)) => {
                positive(d, "modes.spacing", &mut errors);
                positive(k, "modes.wavenumber", &mut errors);
                (d, k)
            }
            _ => {
                errors.push("modes: give k_length, or spacing together with wavenumber".into());
                (1.0, 1.0)
            }
        };
        let threshold = m.threshold.unwrap_or(ringsqueeze::modes::DEFICIT_WARNING);
        positive(threshold, "modes.threshold", &mut errors);
        ModesConfig { atoms: m.atoms, spacing, wavenumber, threshold }
    });

    let oracle = raw.oracle.as_ref().map(|o| {
        let modes = labels(&o.modes, &mut errors, "oracle.modes");
        if modes.is_empty() || modes.len() > ringsqueeze::fock::MAX_MODES {
            errors.push(format!("oracle.modes: expected 1 to {} modes", ringsqueeze::fock::MAX_MODES));
        }
        let cutoffs = match (o.cutoff, &o.cutoffs) {
            (Some(_), Some(_)) => {
                errors.push("oracle: give either cutoff or cutoffs".into());
                vec![]
            }
            (_, Some(c)) => c.clone(),
            (c, None) => vec![c.unwrap_or(ringsqueeze::fock::DEFAULT_CUTOFF); modes.len()],
        };
        if cutoffs.len() != modes.len() {
            errors.push(format!("oracle: {} cutoffs for {} modes", cutoffs.len(), modes.len()));
        }
        let times = o.times.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            errors.push("oracle.times must be finite and non-negative".into());
        }
        let tolerance = o.tolerance.unwrap_or(1e-3);
        positive(tolerance, "oracle.tolerance", &mut errors);
        OracleConfig { modes, cutoffs, times, damping: o.damping.unwrap_or(true), tolerance }
    });

    let sweep = raw.sweep.as_ref().map(|s| {
        let mut protocols = Vec::new();
        let dir = path.parent().unwrap_or(Path::new("."));
        for c in s.configs.iter().flatten() {
            match parse_config(&dir.join(c)) {
                Ok(rc) => match rc.protocol {
                    Some(p) => protocols.push(p),
                    None => errors.push(format!("sweep: {} has no [protocol] table", c.display())),
                },
                Err(CliError::Config(v)) => errors.extend(v.into_iter().map(|m| format!("sweep: {}: {m}", c.display()))),
                Err(e) => errors.push(format!("sweep: {}: {e}", c.display())),
            }
        }
        if let Some(xis) = &s.xi {
            match &protocol {
                Some(base) => protocols.extend(xis.iter().map(|&xi| ProtocolSpec { xi, ..base.clone() })),
                None => errors.push("sweep.xi needs a [protocol] table to vary".into()),
            }
        }
        if protocols.is_empty() {
            errors.push("sweep: nothing to run".into());
        }
        SweepConfig { protocols }
    });

    if errors.is_empty() {
        Ok(RunConfig {
            path: path.to_path_buf(),
            echo,
            units: raw.units,
            kappa,
            threshold,
            laser_source: if raw.physical.is_some() { "coupling-strengths" } else { "laser-table" },
            laser,
            protocol,
            steady_state,
            evolve,
            modes,
            oracle,
            sweep,
        })
    } else {
        Err(CliError::Config(errors))
    }
}
