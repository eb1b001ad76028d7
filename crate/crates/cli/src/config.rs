//! Flat configuration document behind every subcommand.
//!
//! The format is line-oriented `section.key = value` text: language-agnostic,
//! diff-friendly, and free of any parser dependency.  `#` starts a comment,
//! blank lines are ignored, unknown keys are rejected.  The same syntax is
//! accepted by the repeatable `--set key=value` flag, so command-line
//! overrides mirror the file keys exactly.

use anyhow::{anyhow, bail, Context, Result};
use radlab_core::dynamics::{Datum, RunConfig};
use radlab_core::exponents::{Family, Mode, ProblemParams};
use radlab_core::geometry::{ManifoldKind, ManifoldSpec, RadialGrid};
use radlab_core::harness::SweepAxis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatumKind {
    Gaussian,
    Bump,
    Indicator,
}

/// Every tunable of the laboratory with its default value.  Parsing a
/// document or a `--set` pair only overwrites the named field; the physical
/// gates are revalidated when the config is turned into core types.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    // problem
    pub mode: Mode,
    pub p: f64,
    pub m: f64,
    pub sigma: f64,
    pub dim: u32,
    pub c_sp: f64,
    pub c_p: Option<f64>,
    // manifold
    pub kind: ManifoldKind,
    // grid
    pub r_max: f64,
    pub nr: usize,
    // datum
    pub datum_kind: DatumKind,
    pub amplitude: f64,
    pub width: f64,
    pub radius: f64,
    // run
    pub t_end: f64,
    pub dt0: f64,
    pub truncation_k: f64,
    pub reaction: bool,
    pub diffusion: bool,
    pub blowup_threshold: f64,
    pub record_qs: Vec<f64>,
    // query
    pub qs: Vec<f64>,
    pub q0: Option<f64>,
    pub family: Option<Family>,
    pub datum_index: f64,
    pub beta: Option<(f64, f64)>,
    pub samples: usize,
    pub seed: u64,
    // sweep
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            mode: Mode::PLap,
            p: 2.0,
            m: 2.0,
            sigma: 3.0,
            dim: 3,
            c_sp: 1.0,
            c_p: None,
            kind: ManifoldKind::Euclidean,
            r_max: 40.0,
            nr: 400,
            datum_kind: DatumKind::Gaussian,
            amplitude: 1e-2,
            width: 3.0,
            radius: 2.0,
            t_end: 5.0,
            dt0: 1e-4,
            truncation_k: 1e12,
            reaction: true,
            diffusion: true,
            blowup_threshold: 1e8,
            record_qs: vec![2.0, 4.0],
            qs: vec![2.0, 4.0, 8.0, 16.0],
            q0: None,
            family: None,
            datum_index: 1.0,
            beta: None,
            samples: 1000,
            seed: 0,
            axis: SweepAxis::Amplitude,
            values: Vec::new(),
        }
    }
}

/// Key reference printed under `--help`; one line per key with its default.
pub const CONFIG_HELP: &str = "\
Configuration keys (flat `section.key = value` lines; `#` starts a comment;
the same keys work with `--set section.key=value`):

  problem.mode          plap | pme                                   [plap]
  problem.p             diffusion exponent, 2N/(N+1) < p < N (plap)  [2]
  problem.m             diffusion exponent, m > 1 (pme)              [2]
  problem.sigma         reaction exponent; > p-1 (plap), > m (pme)   [3]
  problem.dim           dimension N >= 3                             [3]
  problem.c_sp          Sobolev-type constant, > 0                   [1]
  problem.c_p           Poincare constant, > 0, or `none`            [none]
  manifold.kind         euclidean | hyperbolic                       [euclidean]
  grid.r_max            ball radius R > 0                            [40]
  grid.nr               interior node count                          [400]
  datum.kind            gaussian | bump | indicator                  [gaussian]
  datum.amplitude       initial amplitude >= 0                       [0.01]
  datum.width           gaussian width                               [3]
  datum.radius          bump/indicator support radius                [2]
  run.t_end             final time                                   [5]
  run.dt0               initial step (accuracy ceiling is 50*dt0)    [0.0001]
  run.truncation_k      reaction truncation level k                  [1e12]
  run.reaction          true | false                                 [true]
  run.diffusion         true | false                                 [true]
  run.blowup_threshold  sup-norm level declared blow-up              [1e8]
  run.record_qs         extra recorded L^q exponents, comma list     [2,4]
  query.qs              q grid for exponents/thresholds, comma list  [2,4,8,16]
  query.q0              ladder base, or `none` for max(sigma0, 1+)   [none]
  query.family          decay-rate family compared by `verify` at
                        the recorded finite q: thm1ii | prop42 |
                        thm3 | prop71 | pme | none                   [none]
  query.datum_index     datum exponent handed to that family        [1]
  query.beta            `s,q` pair for the beta exponent, or `none`  [none]
  query.samples         identity-suite draw count                    [1000]
  query.seed            RNG seed for randomized checks               [0]
  sweep.axis            amplitude | sigma | p | m | dim              [amplitude]
  sweep.values          axis values, comma list                      []
";

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    let v = match value {
        "inf" | "infinity" => f64::INFINITY,
        _ => value
            .parse()
            .with_context(|| format!("config key `{key}`: `{value}` is not a number"))?,
    };
    Ok(v)
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|piece| parse_f64(key, piece.trim()))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => bail!("config key `{key}`: expected `true` or `false`, got `{value}`"),
    }
}

fn parse_int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    value
        .parse()
        .with_context(|| format!("config key `{key}`: `{value}` is not a valid integer"))
}

impl CliConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "problem.mode" => {
                self.mode = match value {
                    "plap" => Mode::PLap,
                    "pme" => Mode::Pme,
                    _ => bail!("config key `problem.mode`: expected `plap` or `pme`, got `{value}`"),
                }
            }
            "problem.p" => self.p = parse_f64(key, value)?,
            "problem.m" => self.m = parse_f64(key, value)?,
            "problem.sigma" => self.sigma = parse_f64(key, value)?,
            "problem.dim" => self.dim = parse_int(key, value)?,
            "problem.c_sp" => self.c_sp = parse_f64(key, value)?,
            "problem.c_p" => {
                self.c_p = match value {
                    "none" => None,
                    _ => Some(parse_f64(key, value)?),
                }
            }
            "manifold.kind" => {
                self.kind = match value {
                    "euclidean" => ManifoldKind::Euclidean,
                    "hyperbolic" => ManifoldKind::Hyperbolic,
                    _ => bail!(
                        "config key `manifold.kind`: expected `euclidean` or `hyperbolic`, got `{value}`"
                    ),
                }
            }
            "grid.r_max" => self.r_max = parse_f64(key, value)?,
            "grid.nr" => self.nr = parse_int(key, value)?,
            "datum.kind" => {
                self.datum_kind = match value {
                    "gaussian" => DatumKind::Gaussian,
                    "bump" => DatumKind::Bump,
                    "indicator" => DatumKind::Indicator,
                    _ => bail!(
                        "config key `datum.kind`: expected `gaussian`, `bump`, or `indicator`, got `{value}`"
                    ),
                }
            }
            "datum.amplitude" => self.amplitude = parse_f64(key, value)?,
            "datum.width" => self.width = parse_f64(key, value)?,
            "datum.radius" => self.radius = parse_f64(key, value)?,
            "run.t_end" => self.t_end = parse_f64(key, value)?,
            "run.dt0" => self.dt0 = parse_f64(key, value)?,
            "run.truncation_k" => self.truncation_k = parse_f64(key, value)?,
            "run.reaction" => self.reaction = parse_bool(key, value)?,
            "run.diffusion" => self.diffusion = parse_bool(key, value)?,
            "run.blowup_threshold" => self.blowup_threshold = parse_f64(key, value)?,
            "run.record_qs" => self.record_qs = parse_list(key, value)?,
            "query.qs" => self.qs = parse_list(key, value)?,
            "query.q0" => {
                self.q0 = match value {
                    "none" => None,
                    _ => Some(parse_f64(key, value)?),
                }
            }
            "query.family" => {
                self.family = match value {
                    "none" => None,
                    "thm1ii" => Some(Family::Thm1ii),
                    "prop42" => Some(Family::Prop42),
                    "thm2" => Some(Family::Thm2),
                    "thm3" => Some(Family::Thm3),
                    "prop71" => Some(Family::Prop71),
                    "pme" => Some(Family::PmeThm),
                    _ => bail!(
                        "config key `query.family`: expected one of none, thm1ii, prop42, thm2, thm3, prop71, pme; got `{value}`"
                    ),
                }
            }
            "query.datum_index" => self.datum_index = parse_f64(key, value)?,
            "query.beta" => {
                self.beta = match value {
                    "none" => None,
                    _ => {
                        let pair = parse_list(key, value)?;
                        if pair.len() != 2 {
                            bail!("config key `query.beta`: expected `s,q`, got `{value}`");
                        }
                        Some((pair[0], pair[1]))
                    }
                }
            }
            "query.samples" => self.samples = parse_int(key, value)?,
            "query.seed" => self.seed = parse_int(key, value)?,
            "sweep.axis" => {
                self.axis = match value {
                    "amplitude" => SweepAxis::Amplitude,
                    "sigma" => SweepAxis::Sigma,
                    "p" => SweepAxis::P,
                    "m" => SweepAxis::M,
                    "dim" => SweepAxis::Dim,
                    _ => bail!(
                        "config key `sweep.axis`: expected one of amplitude, sigma, p, m, dim; got `{value}`"
                    ),
                }
            }
            "sweep.values" => self.values = parse_list(key, value)?,
            _ => bail!("unknown config key `{key}` (see --help for the key list)"),
        }
        Ok(())
    }

    /// Applies a whole document, reporting the first offending line.
    pub fn apply_document(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, got `{raw}`", lineno + 1))?;
            self.set(key.trim(), value.trim())
                .with_context(|| format!("line {}", lineno + 1))?;
        }
        Ok(())
    }

    /// Applies one `--set key=value` pair.
    pub fn apply_override(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects `key=value`, got `{pair}`"))?;
        self.set(key.trim(), value.trim())
    }

    /// The problem parameters, with every constructor gate rechecked.
    pub fn problem_params(&self) -> Result<ProblemParams> {
        let params = match self.mode {
            Mode::PLap => ProblemParams::plap(self.p, self.sigma, self.dim, self.c_sp, self.c_p),
            Mode::Pme => ProblemParams::pme(self.m, self.sigma, self.dim, self.c_sp, self.c_p),
        }?;
        Ok(params)
    }

    /// The full run configuration; `validate` re-runs every physical gate.
    pub fn run_config(&self) -> Result<RunConfig> {
        let datum = match self.datum_kind {
            DatumKind::Gaussian => Datum::Gaussian {
                amplitude: self.amplitude,
                width: self.width,
            },
            DatumKind::Bump => Datum::Bump {
                amplitude: self.amplitude,
                radius: self.radius,
            },
            DatumKind::Indicator => Datum::Indicator {
                amplitude: self.amplitude,
                radius: self.radius,
            },
        };
        let config = RunConfig {
            manifold: ManifoldSpec::new(self.kind, self.dim)?,
            params: self.problem_params()?,
            grid: RadialGrid::new(self.r_max, self.nr)?,
            datum,
            t_end: self.t_end,
            dt0: self.dt0,
            truncation_k: self.truncation_k,
            reaction_on: self.reaction,
            diffusion_on: self.diffusion,
            blowup_threshold: self.blowup_threshold,
            record_qs: self.record_qs.clone(),
        };
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build_a_valid_run_config() {
        let config = CliConfig::default();
        let run = config.run_config().unwrap();
        assert_eq!(run.params.sigma(), 3.0);
        assert_eq!(run.record_qs, vec![2.0, 4.0]);
    }

    #[test]
    fn documents_apply_in_order_with_comments() {
        let mut config = CliConfig::default();
        config
            .apply_document(
                "# a comment\n\
                 problem.p = 3    # trailing comment\n\
                 problem.dim = 4\n\
                 \n\
                 datum.amplitude = 2e-3\n\
                 problem.p = 2.5\n",
            )
            .unwrap();
        assert_eq!(config.p, 2.5);
        assert_eq!(config.dim, 4);
        assert_eq!(config.amplitude, 2e-3);
    }

    #[test]
    fn unknown_keys_and_malformed_lines_are_rejected() {
        let mut config = CliConfig::default();
        let err = config.apply_document("problem.widht = 3\n").unwrap_err();
        assert!(format!("{err:#}").contains("unknown config key `problem.widht`"));
        assert!(config.apply_document("no equals sign\n").is_err());
        assert!(config.apply_override("grid.nr=not_a_number").is_err());
    }

    #[test]
    fn physical_gates_fire_at_build_time() {
        let mut config = CliConfig::default();
        config.set("problem.sigma", "0.5").unwrap(); // below p-1 for p=2
        assert!(config.run_config().is_err());

        let mut config = CliConfig::default();
        config.set("problem.mode", "pme").unwrap();
        config.set("problem.m", "0.9").unwrap();
        assert!(config.problem_params().is_err());
    }

    #[test]
    fn lists_and_optionals_parse() {
        let mut config = CliConfig::default();
        config.set("run.record_qs", "2, 3.5, 7").unwrap();
        assert_eq!(config.record_qs, vec![2.0, 3.5, 7.0]);
        config.set("sweep.values", "").unwrap();
        assert!(config.values.is_empty());
        config.set("problem.c_p", "1.5").unwrap();
        assert_eq!(config.c_p, Some(1.5));
        config.set("problem.c_p", "none").unwrap();
        assert_eq!(config.c_p, None);
        config.set("query.beta", "2,4").unwrap();
        assert_eq!(config.beta, Some((2.0, 4.0)));
        config.set("query.qs", "2,inf").unwrap();
        assert!(config.qs[1].is_infinite());
    }
}
