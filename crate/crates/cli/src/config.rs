//! Experiment configuration: presets, flat `key = value` files and overrides.

use std::fmt;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Custom,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Fig2,
        Experiment::Fig3,
        Experiment::Fig4,
        Experiment::Fig5,
        Experiment::Fig6,
        Experiment::Fig7,
        Experiment::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::Fig6 => "fig6",
            Experiment::Fig7 => "fig7",
            Experiment::Custom => "custom",
        }
    }

    /// QD-probability sweeps as opposed to estimator comparisons.
    pub fn is_probability(self) -> bool {
        matches!(self, Experiment::Fig2 | Experiment::Fig3 | Experiment::Custom)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Methods {
    pub quadrature: bool,
    pub series: bool,
    pub mc: bool,
}

impl Methods {
    fn parse(v: &str) -> Result<Self, String> {
        let mut m = Methods {
            quadrature: false,
            series: false,
            mc: false,
        };
        for item in split_list(v) {
            match item {
                "quadrature" => m.quadrature = true,
                "series" => m.series = true,
                "mc" => m.mc = true,
                other => return Err(format!("unknown method '{other}'")),
            }
        }
        if !(m.quadrature || m.series || m.mc) {
            return Err("no methods selected".into());
        }
        Ok(m)
    }

    fn render(&self) -> String {
        let mut v = Vec::new();
        if self.quadrature {
            v.push("quadrature");
        }
        if self.series {
            v.push("series");
        }
        if self.mc {
            v.push("mc");
        }
        v.join(",")
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub k_db: Vec<f64>,
    pub beta_delta: Vec<f64>,
    pub theta_delta_deg: Vec<f64>,
    pub theta_1_deg: f64,
    pub n_antennas: usize,
    pub rates: (f64, f64),
    pub samples: usize,
    pub seed: u64,
    pub methods: Methods,
    /// 0 lets the pool pick.
    pub workers: usize,
    pub timing: bool,
    pub plots: bool,
}

const KEYS: [&str; 12] = [
    "k_db",
    "beta_delta",
    "theta_delta_deg",
    "theta_1_deg",
    "n_antennas",
    "rates",
    "samples",
    "seed",
    "methods",
    "workers",
    "timing",
    "plots",
];

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_SEED: u64 = 20240601;

fn k_grid() -> Vec<f64> {
    (0..=10).map(f64::from).collect()
}

impl ExperimentConfig {
    pub fn preset(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            k_db: k_grid(),
            beta_delta: vec![1.0],
            theta_delta_deg: vec![10.0],
            theta_1_deg: 30.0,
            n_antennas: 4,
            rates: (1.0, 1.0),
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            methods: Methods {
                quadrature: true,
                series: true,
                mc: true,
            },
            workers: 0,
            timing: false,
            plots: true,
        };
        match experiment {
            Experiment::Fig2 => ExperimentConfig {
                beta_delta: vec![5.0, 25.0],
                ..base
            },
            Experiment::Fig3 => ExperimentConfig {
                beta_delta: vec![100.0],
                theta_delta_deg: vec![5.0, 10.0],
                ..base
            },
            Experiment::Fig4 => ExperimentConfig {
                k_db: vec![10.0],
                beta_delta: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
                ..base
            },
            Experiment::Fig5 => base,
            Experiment::Fig6 | Experiment::Fig7 => ExperimentConfig {
                beta_delta: vec![1.0, 10.0, 100.0],
                theta_delta_deg: vec![5.0, 10.0],
                ..base
            },
            Experiment::Custom => base,
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |msg: String| CliError::Config(format!("key '{key}': {msg}"));
        let value = value.trim();
        match key {
            "k_db" => self.k_db = parse_grid(value).map_err(bad)?,
            "beta_delta" => self.beta_delta = parse_grid(value).map_err(bad)?,
            "theta_delta_deg" => self.theta_delta_deg = parse_grid(value).map_err(bad)?,
            "theta_1_deg" => self.theta_1_deg = parse_num(value).map_err(bad)?,
            "n_antennas" => self.n_antennas = parse_num(value).map_err(bad)?,
            "rates" => {
                let v = parse_list::<f64>(value).map_err(bad)?;
                match v[..] {
                    [r_i, r_j] => self.rates = (r_i, r_j),
                    _ => return Err(bad(format!("expected two rates, got {}", v.len()))),
                }
            }
            "samples" => self.samples = parse_num(value).map_err(bad)?,
            "seed" => self.seed = parse_num(value).map_err(bad)?,
            "methods" => self.methods = Methods::parse(value).map_err(bad)?,
            "workers" => self.workers = parse_num(value).map_err(bad)?,
            "timing" => self.timing = parse_num(value).map_err(bad)?,
            "plots" => self.plots = parse_num(value).map_err(bad)?,
            _ => {
                return Err(CliError::Config(format!(
                    "unknown key '{key}' (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies a `key=value` override as given on the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), CliError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override '{pair}' is not key=value")))?;
        self.set(k.trim(), v)
    }

    /// Applies every setting of a flat config file.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected 'key = value', got '{raw}'", ln + 1))
            })?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let err = |k: &str, m: &str| Err(CliError::Config(format!("key '{k}': {m}")));
        for (k, g) in [
            ("k_db", &self.k_db),
            ("beta_delta", &self.beta_delta),
            ("theta_delta_deg", &self.theta_delta_deg),
        ] {
            if g.is_empty() {
                return err(k, "grid is empty");
            }
            if g.iter().any(|x| !x.is_finite()) {
                return err(k, "grid values must be finite");
            }
        }
        if self.beta_delta.iter().any(|&b| b <= 0.0) {
            return err("beta_delta", "values must be positive");
        }
        if self.n_antennas < 2 {
            return err("n_antennas", "need at least 2 antennas");
        }
        if !(self.rates.0 > 0.0 && self.rates.1 > 0.0) || !self.rates.0.is_finite() || !self.rates.1.is_finite() {
            return err("rates", "rates must be positive and finite");
        }
        if self.samples < qd_core::mc::MIN_SAMPLES {
            return err("samples", "need at least 1000 samples");
        }
        if !self.theta_1_deg.is_finite() {
            return err("theta_1_deg", "must be finite");
        }
        Ok(())
    }

    /// The resolved configuration in config-file syntax.
    pub fn render(&self) -> String {
        let grid = |g: &[f64]| g.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
        format!(
            "experiment = {}\nk_db = {}\nbeta_delta = {}\ntheta_delta_deg = {}\ntheta_1_deg = {}\n\
             n_antennas = {}\nrates = {},{}\nsamples = {}\nseed = {}\nmethods = {}\nworkers = {}\n\
             timing = {}\nplots = {}\n",
            self.experiment,
            grid(&self.k_db),
            grid(&self.beta_delta),
            grid(&self.theta_delta_deg),
            self.theta_1_deg,
            self.n_antennas,
            self.rates.0,
            self.rates.1,
            self.samples,
            self.seed,
            self.methods.render(),
            self.workers,
            self.timing,
            self.plots,
        )
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_num<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse '{v}'"))
}

fn parse_list<T: FromStr>(v: &str) -> Result<Vec<T>, String> {
    split_list(v).map(parse_num).collect()
}

/// A comma list, or `start:stop:step` with `stop` included when hit.
fn parse_grid(v: &str) -> Result<Vec<f64>, String> {
    if v.contains(':') {
        let parts: Vec<f64> = v.split(':').map(|s| parse_num(s.trim())).collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(format!("range '{v}' must be start:stop:step"));
        };
        if !(step > 0.0) || !(stop >= start) {
            return Err(format!("range '{v}' needs step > 0 and stop >= start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        if n > 100_000 {
            return Err(format!("range '{v}' has too many points"));
        }
        return Ok((0..=n).map(|i| start + i as f64 * step).collect());
    }
    parse_list(v)
}
