//! JSON run configurations: parsing, key checks, defaults and validation.
//!
//! Defaults (applied when a key is absent and echoed in every summary):
//!
//! | command     | key              | default                 |
//! |-------------|------------------|-------------------------|
//! | exponents   | k_max            | 10                      |
//! | shoot       | R                | 1                       |
//! | shoot       | tol              | 1e-10                   |
//! | shoot       | nodes            | 4096                    |
//! | shoot       | b_min, b_max     | 1e-4, 1e4               |
//! | shoot       | sweep_points     | 41                      |
//! | shoot       | r_search         | 1e6                     |
//! | scan        | p_grid           | [p]                     |
//! | scan        | b_min, b_max     | 1e-3, 1e3               |
//! | scan        | b_points         | 40 (log-spaced)         |
//! | scan        | r_max            | 1e4                     |
//! | scan        | tol              | 1e-10                   |
//! | minimize    | R                | 1                       |
//! | minimize    | q                | p + 1                   |
//! | minimize    | nodes            | 2000                    |
//! | minimize    | max_iterations   | 20000                   |
//! | minimize    | tol              | 1e-12 (relative decrease over 10 steps) |
//! | eigen       | R                | 1                       |
//! | eigen       | nodes            | 2000                    |
//! | pohozaev    | R                | outermost profile radius |
//! | asymptotics | window           | last 40% of the t-range |
//!
//! Relative `profile` paths are resolved against the directory holding
//! the configuration file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use biharm_core::radial_ode::ShootOptions;
use biharm_core::ProblemParams;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Exponents,
    Shoot,
    Scan,
    Minimize,
    Eigen,
    Pohozaev,
    Asymptotics,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Exponents => "exponents",
            Command::Shoot => "shoot",
            Command::Scan => "scan",
            Command::Minimize => "minimize",
            Command::Eigen => "eigen",
            Command::Pohozaev => "pohozaev",
            Command::Asymptotics => "asymptotics",
        }
    }

    fn option_keys(self) -> &'static [&'static str] {
        match self {
            Command::Exponents => &["k_max"],
            Command::Shoot => &["R", "tol", "nodes", "b_min", "b_max", "sweep_points", "r_search"],
            Command::Scan => &["p_grid", "b_grid", "b_min", "b_max", "b_points", "r_max", "tol"],
            Command::Minimize => &["R", "q", "nodes", "max_iterations", "tol"],
            Command::Eigen => &["R", "nodes"],
            Command::Pohozaev => &["R", "profile"],
            Command::Asymptotics => &["profile", "window"],
        }
    }

    pub fn accepts_tol(self) -> bool {
        self.option_keys().contains(&"tol")
    }
}

const COMMON_KEYS: [&str; 5] = ["command", "N", "alpha", "l", "p"];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Command,
    #[serde(rename = "N")]
    n: u32,
    alpha: f64,
    l: f64,
    p: Option<f64>,
    #[serde(rename = "R")]
    radius: Option<f64>,
    tol: Option<f64>,
    nodes: Option<usize>,
    b_min: Option<f64>,
    b_max: Option<f64>,
    sweep_points: Option<usize>,
    r_search: Option<f64>,
    p_grid: Option<Vec<f64>>,
    b_grid: Option<Vec<f64>>,
    b_points: Option<usize>,
    r_max: Option<f64>,
    q: Option<f64>,
    max_iterations: Option<usize>,
    profile: Option<PathBuf>,
    window: Option<[f64; 2]>,
    k_max: Option<usize>,
}

/// Effective, fully defaulted settings of one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Settings {
    Exponents {
        k_max: usize,
    },
    Shoot {
        #[serde(rename = "R")]
        radius: f64,
        tol: f64,
        nodes: usize,
        b_min: f64,
        b_max: f64,
        sweep_points: usize,
        r_search: f64,
    },
    Scan {
        p_grid: Vec<f64>,
        b_grid: Vec<f64>,
        r_max: f64,
        tol: f64,
    },
    Minimize {
        #[serde(rename = "R")]
        radius: f64,
        q: f64,
        nodes: usize,
        max_iterations: usize,
        tol: f64,
    },
    Eigen {
        #[serde(rename = "R")]
        radius: f64,
        nodes: usize,
    },
    Pohozaev {
        profile: PathBuf,
        #[serde(rename = "R")]
        radius: Option<f64>,
    },
    Asymptotics {
        profile: PathBuf,
        window: Option<[f64; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: ProblemParams,
    /// False when an `exponents` run omits p; p-dependent output is skipped.
    pub p_given: bool,
    pub settings: Settings,
}

impl RunConfig {
    pub fn shoot_options(&self) -> Option<ShootOptions> {
        match self.settings {
            Settings::Shoot {
                tol,
                nodes,
                b_min,
                b_max,
                sweep_points,
                r_search,
                ..
            } => Some(ShootOptions {
                tol,
                nodes,
                b_min,
                b_max,
                sweep_points,
                r_search,
            }),
            _ => None,
        }
    }

    /// Effective inputs as echoed into the run summary.
    pub fn echo(&self) -> Value {
        let mut params = serde_json::json!({
            "N": self.params.n,
            "alpha": self.params.alpha,
            "l": self.params.l,
        });
        if self.p_given {
            params["p"] = self.params.p.into();
        }
        serde_json::json!({
            "params": params,
            "settings": serde_json::to_value(&self.settings).expect("settings serialize"),
        })
    }
}

fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Validation(format!("`{name}` must be positive and finite, got {x}")))
    }
}

/// Parses a configuration document. `base` is the directory used to
/// resolve relative profile paths.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig, CliError> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Config(format!("malformed configuration: {e}")))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| CliError::Config("configuration must be a JSON object".into()))?;
    let command: Command = match obj.get("command") {
        None => return Err(CliError::Config("missing required field `command`".into())),
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| CliError::Config(format!("field `command`: {e}")))?,
    };
    let allowed: BTreeSet<&str> = COMMON_KEYS.iter().chain(command.option_keys()).copied().collect();
    let all_known: BTreeSet<&str> = [
        Command::Exponents,
        Command::Shoot,
        Command::Scan,
        Command::Minimize,
        Command::Eigen,
        Command::Pohozaev,
        Command::Asymptotics,
    ]
    .iter()
    .flat_map(|c| c.option_keys().iter().copied())
    .chain(COMMON_KEYS)
    .collect();
    for key in obj.keys() {
        if !all_known.contains(key.as_str()) {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        if !allowed.contains(key.as_str()) {
            return Err(CliError::Config(format!(
                "key `{key}` does not apply to command `{}`",
                command.name()
            )));
        }
    }
    let raw: RawConfig =
        serde_json::from_value(doc).map_err(|e| CliError::Config(format!("invalid configuration: {e}")))?;
    build(raw, base)
}

fn build(raw: RawConfig, base: &Path) -> Result<RunConfig, CliError> {
    let p_given = raw.p.is_some();
    let params = match raw.p {
        Some(p) => ProblemParams::new(raw.n, raw.alpha, raw.l, p)?,
        None if raw.command == Command::Exponents => {
            // p-independent quantities only; any admissible p serves.
            let probe = ProblemParams::new(raw.n, raw.alpha, raw.l, 2.0)?;
            probe.with_p(probe.p_s())?
        }
        None => return Err(CliError::Config("missing required field `p`".into())),
    };
    let radius = raw.radius.map(|r| positive("R", r)).transpose()?;
    let tol = raw.tol.map(|t| positive("tol", t)).transpose()?;
    let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
    let settings = match raw.command {
        Command::Exponents => Settings::Exponents {
            k_max: raw.k_max.unwrap_or(10),
        },
        Command::Shoot => {
            let d = ShootOptions::default();
            Settings::Shoot {
                radius: radius.unwrap_or(1.0),
                tol: tol.unwrap_or(d.tol),
                nodes: raw.nodes.unwrap_or(d.nodes),
                b_min: positive("b_min", raw.b_min.unwrap_or(d.b_min))?,
                b_max: positive("b_max", raw.b_max.unwrap_or(d.b_max))?,
                sweep_points: raw.sweep_points.unwrap_or(d.sweep_points),
                r_search: positive("r_search", raw.r_search.unwrap_or(d.r_search))?,
            }
        }
        Command::Scan => {
            let b_grid = match (raw.b_grid, raw.b_min.is_some() || raw.b_max.is_some() || raw.b_points.is_some()) {
                (Some(_), true) => {
                    return Err(CliError::Validation(
                        "give either `b_grid` or `b_min`/`b_max`/`b_points`, not both".into(),
                    ))
                }
                (Some(g), false) => g,
                (None, _) => {
                    let lo = positive("b_min", raw.b_min.unwrap_or(1e-3))?;
                    let hi = positive("b_max", raw.b_max.unwrap_or(1e3))?;
                    let n = raw.b_points.unwrap_or(40);
                    if n < 2 || hi <= lo {
                        return Err(CliError::Validation(format!(
                            "b range [{lo}, {hi}] with {n} points is empty"
                        )));
                    }
                    (0..n)
                        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
                        .collect()
                }
            };
            let p_grid = raw.p_grid.unwrap_or_else(|| vec![params.p]);
            for &p in &p_grid {
                params.with_p(p)?;
            }
            Settings::Scan {
                p_grid,
                b_grid,
                r_max: positive("r_max", raw.r_max.unwrap_or(1e4))?,
                tol: tol.unwrap_or(1e-10),
            }
        }
        Command::Minimize => Settings::Minimize {
            radius: radius.unwrap_or(1.0),
            q: raw.q.unwrap_or(params.p + 1.0),
            nodes: raw.nodes.unwrap_or(2000),
            max_iterations: raw.max_iterations.unwrap_or(20_000),
            tol: tol.unwrap_or(1e-12),
        },
        Command::Eigen => Settings::Eigen {
            radius: radius.unwrap_or(1.0),
            nodes: raw.nodes.unwrap_or(2000),
        },
        Command::Pohozaev => Settings::Pohozaev {
            profile: resolve(
                raw.profile
                    .ok_or_else(|| CliError::Config("missing required field `profile`".into()))?,
            ),
            radius,
        },
        Command::Asymptotics => {
            if let Some([a, b]) = raw.window {
                if !(a < b) {
                    return Err(CliError::Validation(format!("window [{a}, {b}] is empty")));
                }
            }
            Settings::Asymptotics {
                profile: resolve(
                    raw.profile
                        .ok_or_else(|| CliError::Config("missing required field `profile`".into()))?,
                ),
                window: raw.window,
            }
        }
    };
    Ok(RunConfig {
        command: raw.command,
        params,
        p_given,
        settings,
    })
}

/// Replaces the tolerance of commands that take one.
pub fn override_tol(cfg: &mut RunConfig, value: f64) -> Result<(), CliError> {
    let value = positive("--tol", value)?;
    match &mut cfg.settings {
        Settings::Shoot { tol, .. } | Settings::Scan { tol, .. } | Settings::Minimize { tol, .. } => {
            *tol = value;
            Ok(())
        }
        _ => Err(CliError::Validation(format!(
            "--tol does not apply to command `{}`",
            cfg.command.name()
        ))),
    }
}
