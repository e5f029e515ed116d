//! Run configuration: defaults, flat `key = value` files, and command-line
//! overrides, validated with explicit range errors.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use workmoments::model::SystemParams;
use workmoments::tpm::{CouplingForm, MeasurementBasis, TotalSystemModel};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type CfgResult<T> = Result<T, ConfigError>;

fn err<T>(key: &str, message: impl std::fmt::Display) -> CfgResult<T> {
    Err(ConfigError(format!("{key}: {message}")))
}

/// Complete run configuration with every tunable key.
#[derive(Debug, Clone)]
pub struct RunConfig {
    // system
    pub omega0: f64,
    pub beta: f64,
    pub gamma_down: f64,
    pub lambda0: f64,
    pub drive_omega: f64,
    pub cycles: f64,
    pub steps: usize,
    pub instantaneous_basis: bool,
    // sampling
    pub n_traj: u64,
    pub master_seed: u64,
    pub tolerance: f64,
    pub dump_records: bool,
    // composite reference model
    pub n_modes: usize,
    pub n_max: usize,
    pub mode_freqs: Vec<f64>,
    pub couplings: Vec<f64>,
    pub coupling_form: CouplingForm,
    pub measurement: MeasurementBasis,
    pub oracle_steps: usize,
    // fluctuation-dissipation grid
    pub fdt_lambda_min: f64,
    pub fdt_lambda_max: f64,
    pub fdt_lambda_count: usize,
    pub fdt_gamma_min: f64,
    pub fdt_gamma_max: f64,
    pub fdt_gamma_count: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            omega0: 1.0,
            beta: 2.0,
            gamma_down: 0.01,
            lambda0: 0.05,
            drive_omega: 1.0,
            cycles: 10.0,
            steps: 10_000,
            instantaneous_basis: false,
            n_traj: 1_000_000,
            master_seed: 123_456_789,
            tolerance: 0.0032,
            dump_records: false,
            n_modes: 1,
            n_max: 3,
            mode_freqs: vec![1.0],
            couplings: vec![0.02],
            coupling_form: CouplingForm::Full,
            measurement: MeasurementBasis::Bare,
            oracle_steps: 2500,
            fdt_lambda_min: 0.001,
            fdt_lambda_max: 0.1,
            fdt_lambda_count: 20,
            fdt_gamma_min: 0.0,
            fdt_gamma_max: 0.05,
            fdt_gamma_count: 11,
        }
    }
}

/// Optional overrides collected from the command line; `None` keeps the
/// file or default value.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Level splitting ω₀ (energy unit; keep at 1.0 for reduced units)
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Inverse temperature as the product βħω₀
    #[arg(long)]
    pub beta: Option<f64>,
    /// Emission rate Γ↓ in units of ω₀
    #[arg(long)]
    pub gamma_down: Option<f64>,
    /// Drive amplitude λ₀ in units of ħω₀
    #[arg(long)]
    pub lambda0: Option<f64>,
    /// Drive angular frequency in units of ω₀
    #[arg(long)]
    pub drive_omega: Option<f64>,
    /// Protocol duration in drive periods
    #[arg(long)]
    pub cycles: Option<f64>,
    /// Time-grid size
    #[arg(long)]
    pub steps: Option<usize>,
    /// Allow durations off the drive zeroes; measure in the eigenbasis of H_S(τ)
    #[arg(long)]
    pub instantaneous_basis: bool,
    /// Number of trajectories for the jump ensemble
    #[arg(long)]
    pub n_traj: Option<u64>,
    /// Master seed of the deterministic per-trajectory generators
    #[arg(long)]
    pub master_seed: Option<u64>,
    /// Comparison tolerance on |⟨Wⁿ⟩_MC − ⟨Wⁿ⟩_ME|/(ħω₀)ⁿ
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Dump one line per trajectory record
    #[arg(long)]
    pub dump_records: bool,
    /// Number of bosonic modes of the reference model (0-3)
    #[arg(long)]
    pub n_modes: Option<usize>,
    /// Occupation truncation per mode
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Comma-separated mode frequencies in units of ω₀
    #[arg(long, value_delimiter = ',')]
    pub mode_freqs: Option<Vec<f64>>,
    /// Comma-separated coupling strengths g_k in units of ħω₀
    #[arg(long, value_delimiter = ',')]
    pub couplings: Option<Vec<f64>>,
    /// Coupling structure: full | rwa
    #[arg(long)]
    pub coupling_form: Option<String>,
    /// Measurement convention: bare | total
    #[arg(long)]
    pub measurement: Option<String>,
    /// Time-grid size of the reference-model propagation
    #[arg(long)]
    pub oracle_steps: Option<usize>,
    #[arg(long)]
    pub fdt_lambda_min: Option<f64>,
    #[arg(long)]
    pub fdt_lambda_max: Option<f64>,
    #[arg(long)]
    pub fdt_lambda_count: Option<usize>,
    #[arg(long)]
    pub fdt_gamma_min: Option<f64>,
    #[arg(long)]
    pub fdt_gamma_max: Option<f64>,
    #[arg(long)]
    pub fdt_gamma_count: Option<usize>,
}

impl RunConfig {
    /// Defaults, then file values, then command-line overrides; validated.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> CfgResult<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("config {}: {e}", path.display())))?;
            cfg.apply_file(&text)?;
        }
        cfg.apply_overrides(overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, text: &str) -> CfgResult<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> CfgResult<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> CfgResult<T> {
            value
                .parse()
                .map_err(|_| ConfigError(format!("{key}: cannot parse `{value}`")))
        }
        fn parse_list(key: &str, value: &str) -> CfgResult<Vec<f64>> {
            value
                .split(',')
                .map(|s| parse::<f64>(key, s.trim()))
                .collect()
        }
        match key {
            "omega0" => self.omega0 = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "gamma_down" => self.gamma_down = parse(key, value)?,
            "lambda0" => self.lambda0 = parse(key, value)?,
            "drive_omega" => self.drive_omega = parse(key, value)?,
            "cycles" => self.cycles = parse(key, value)?,
            "steps" => self.steps = parse(key, value)?,
            "instantaneous_basis" => self.instantaneous_basis = parse(key, value)?,
            "n_traj" => self.n_traj = parse(key, value)?,
            "master_seed" => self.master_seed = parse(key, value)?,
            "tolerance" => self.tolerance = parse(key, value)?,
            "dump_records" => self.dump_records = parse(key, value)?,
            "n_modes" => self.n_modes = parse(key, value)?,
            "n_max" => self.n_max = parse(key, value)?,
            "mode_freqs" => self.mode_freqs = parse_list(key, value)?,
            "couplings" => self.couplings = parse_list(key, value)?,
            "coupling_form" => self.coupling_form = parse_coupling(value)?,
            "measurement" => self.measurement = parse_measurement(value)?,
            "oracle_steps" => self.oracle_steps = parse(key, value)?,
            "fdt_lambda_min" => self.fdt_lambda_min = parse(key, value)?,
            "fdt_lambda_max" => self.fdt_lambda_max = parse(key, value)?,
            "fdt_lambda_count" => self.fdt_lambda_count = parse(key, value)?,
            "fdt_gamma_min" => self.fdt_gamma_min = parse(key, value)?,
            "fdt_gamma_max" => self.fdt_gamma_max = parse(key, value)?,
            "fdt_gamma_count" => self.fdt_gamma_count = parse(key, value)?,
            _ => return err(key, "unknown key"),
        }
        Ok(())
    }

    fn apply_overrides(&mut self, o: &Overrides) -> CfgResult<()> {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = o.$field.clone() { self.$field = v; })*
            };
        }
        take!(
            omega0,
            beta,
            gamma_down,
            lambda0,
            drive_omega,
            cycles,
            steps,
            n_traj,
            master_seed,
            tolerance,
            n_modes,
            n_max,
            mode_freqs,
            couplings,
            oracle_steps,
            fdt_lambda_min,
            fdt_lambda_max,
            fdt_lambda_count,
            fdt_gamma_min,
            fdt_gamma_max,
            fdt_gamma_count
        );
        if o.instantaneous_basis {
            self.instantaneous_basis = true;
        }
        if o.dump_records {
            self.dump_records = true;
        }
        if let Some(v) = &o.coupling_form {
            self.coupling_form = parse_coupling(v)?;
        }
        if let Some(v) = &o.measurement {
            self.measurement = parse_measurement(v)?;
        }
        Ok(())
    }

    fn validate(&self) -> CfgResult<()> {
        // System ranges are enforced by the model constructor so the error
        // text names the offending key.
        self.system_params()?;
        if self.n_traj < 1 {
            return err("n_traj", "must be at least 1");
        }
        if !(self.tolerance > 0.0) {
            return err("tolerance", "must be positive");
        }
        if self.n_modes > 3 {
            return err("n_modes", "at most 3 modes are supported");
        }
        if self.mode_freqs.len() != self.n_modes {
            return err("mode_freqs", format!("expected {} entries", self.n_modes));
        }
        if self.couplings.len() != self.n_modes {
            return err("couplings", format!("expected {} entries", self.n_modes));
        }
        if self.mode_freqs.iter().any(|&w| !(w > 0.0)) {
            return err("mode_freqs", "must be positive");
        }
        if self.oracle_steps < 2 {
            return err("oracle_steps", "must be at least 2");
        }
        if self.fdt_lambda_count < 1 || self.fdt_gamma_count < 1 {
            return err("fdt_lambda_count/fdt_gamma_count", "must be at least 1");
        }
        if !(self.fdt_lambda_min > 0.0) || self.fdt_lambda_max < self.fdt_lambda_min {
            return err("fdt_lambda_min/fdt_lambda_max", "need 0 < min <= max");
        }
        if self.fdt_gamma_min < 0.0 || self.fdt_gamma_max < self.fdt_gamma_min {
            return err("fdt_gamma_min/fdt_gamma_max", "need 0 <= min <= max");
        }
        Ok(())
    }

    pub fn system_params(&self) -> CfgResult<SystemParams> {
        let mut p = SystemParams::new(
            self.omega0,
            self.beta,
            self.gamma_down,
            self.lambda0,
            self.drive_omega,
            self.cycles,
            self.steps,
        )
        .map_err(|e| ConfigError(e.to_string()))?;
        p.instantaneous_basis = self.instantaneous_basis;
        Ok(p)
    }

    pub fn total_model(&self) -> CfgResult<TotalSystemModel> {
        let mut system = self.system_params()?;
        system.steps = self.oracle_steps;
        let model = TotalSystemModel {
            system,
            n_modes: self.n_modes,
            n_max: self.n_max,
            mode_freqs: self.mode_freqs.clone(),
            couplings: self
                .couplings
                .iter()
                .map(|&g| Complex64::new(g, 0.0))
                .collect(),
            coupling_form: self.coupling_form,
            measurement: self.measurement,
        };
        model.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(model)
    }

    /// Log-spaced drive amplitudes of the scan grid.
    pub fn fdt_lambdas(&self) -> Vec<f64> {
        let n = self.fdt_lambda_count;
        if n == 1 {
            return vec![self.fdt_lambda_min];
        }
        let (lo, hi) = (self.fdt_lambda_min.ln(), self.fdt_lambda_max.ln());
        (0..n)
            .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    /// Linearly spaced coupling rates of the scan grid.
    pub fn fdt_gammas(&self) -> Vec<f64> {
        let n = self.fdt_gamma_count;
        if n == 1 {
            return vec![self.fdt_gamma_min];
        }
        (0..n)
            .map(|i| {
                self.fdt_gamma_min
                    + (self.fdt_gamma_max - self.fdt_gamma_min) * i as f64 / (n - 1) as f64
            })
            .collect()
    }

    /// Render the effective configuration, for the run log.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "beta={} gamma_down={} lambda0={} drive_omega={} cycles={} steps={}",
            self.beta, self.gamma_down, self.lambda0, self.drive_omega, self.cycles, self.steps
        );
        let _ = writeln!(
            s,
            "n_traj={} master_seed={} tolerance={}",
            self.n_traj, self.master_seed, self.tolerance
        );
        s
    }
}

fn parse_coupling(value: &str) -> CfgResult<CouplingForm> {
    match value.to_ascii_lowercase().as_str() {
        "full" => Ok(CouplingForm::Full),
        "rwa" => Ok(CouplingForm::Rwa),
        other => err("coupling_form", format!("expected full|rwa, got `{other}`")),
    }
}

fn parse_measurement(value: &str) -> CfgResult<MeasurementBasis> {
    match value.to_ascii_lowercase().as_str() {
        "bare" => Ok(MeasurementBasis::Bare),
        "total" => Ok(MeasurementBasis::Total),
        other => err("measurement", format!("expected bare|total, got `{other}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let mut cfg = RunConfig::default();
        cfg.apply_file("").unwrap();
        assert_eq!(cfg.steps, 10_000);
        assert_eq!(cfg.n_traj, 1_000_000);
        let p = cfg.system_params().unwrap();
        assert!((p.tau() - 20.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let mut cfg = RunConfig::default();
        cfg.apply_file("# comment\n\nbeta = 1.5 # inline\n")
            .unwrap();
        assert_eq!(cfg.beta, 1.5);
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let mut cfg = RunConfig::default();
        let e = cfg.apply_file("betta = 2.0").unwrap_err();
        assert!(e.0.contains("betta"), "{e}");
    }

    #[test]
    fn out_of_range_value_names_the_key() {
        let mut cfg = RunConfig::default();
        cfg.apply_file("gamma_down = -0.1").unwrap();
        let e = cfg.validate().unwrap_err();
        assert!(e.0.contains("gamma_down"), "{e}");
    }

    #[test]
    fn unparsable_value_names_the_key() {
        let mut cfg = RunConfig::default();
        let e = cfg.apply_file("cycles = ten").unwrap_err();
        assert!(e.0.contains("cycles"), "{e}");
    }

    #[test]
    fn grids_have_requested_shape() {
        let cfg = RunConfig::default();
        let lambdas = cfg.fdt_lambdas();
        let gammas = cfg.fdt_gammas();
        assert_eq!(lambdas.len(), 20);
        assert_eq!(gammas.len(), 11);
        assert!((lambdas[0] - 0.001).abs() < 1e-15);
        assert!((lambdas[19] - 0.1).abs() < 1e-12);
        assert!(lambdas.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(gammas[0], 0.0);
        assert!((gammas[10] - 0.05).abs() < 1e-15);
    }
}
