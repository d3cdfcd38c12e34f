//! Validated run configuration built from the command line.

use serde_json::{json, Value};
use triwalk_core::limit::LimitModel;
use triwalk_core::walk::{CoinOperator, InitialSpin, StepProtocol};
use triwalk_core::Complex;

use crate::args::{CoinArgs, SpinArgs};
use crate::CliError;

/// Parsed spins may be off by this much in squared norm before renormalizing.
pub const SPIN_PARSE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum CoinSetup {
    Rotation { theta: f64 },
    General { gamma: f64, delta: f64, xi: f64, theta: f64 },
    ThreeCoin([[f64; 4]; 3]),
}

impl CoinSetup {
    pub fn from_coin_args(args: &CoinArgs) -> Result<Self, CliError> {
        match (&args.theta, &args.general) {
            (Some(theta), None) => Ok(CoinSetup::Rotation { theta: finite(*theta, "--theta")? }),
            (None, Some(text)) => {
                let [gamma, delta, xi, theta] = parse_floats::<4>(text, ',', "--general")?;
                Ok(CoinSetup::General { gamma, delta, xi, theta })
            }
            (None, None) => Err(CliError::Config("one of --theta or --general is required".into())),
            (Some(_), Some(_)) => {
                Err(CliError::Config("--theta and --general are mutually exclusive".into()))
            }
        }
    }

    pub fn three_coin(text: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = text.split(';').collect();
        if parts.len() != 3 {
            return Err(CliError::Config(format!(
                "--three-coin needs 3 ';'-separated coins, got {}",
                parts.len()
            )));
        }
        let mut coins = [[0.0; 4]; 3];
        for (slot, part) in coins.iter_mut().zip(parts) {
            *slot = parse_floats::<4>(part, ',', "--three-coin")?;
        }
        Ok(CoinSetup::ThreeCoin(coins))
    }

    pub fn protocol(&self) -> Result<StepProtocol, CliError> {
        Ok(match *self {
            CoinSetup::Rotation { theta } => StepProtocol::three_period(theta)?,
            CoinSetup::General { gamma, delta, xi, theta } => {
                StepProtocol::with_j_step(CoinOperator::general(gamma, delta, xi, theta)?)?
            }
            CoinSetup::ThreeCoin(coins) => StepProtocol::new(
                coins
                    .iter()
                    .map(|&[g, d, x, t]| CoinOperator::general(g, d, x, t))
                    .collect::<Result<Vec<_>, _>>()?,
            )?,
        })
    }

    pub fn limit_model(&self, spin: InitialSpin) -> Result<LimitModel, CliError> {
        Ok(match *self {
            CoinSetup::Rotation { theta } => LimitModel::rotation(theta, spin)?,
            CoinSetup::General { gamma, delta, xi, theta } => {
                LimitModel::new(CoinOperator::general(gamma, delta, xi, theta)?, spin)?
            }
            CoinSetup::ThreeCoin(_) => {
                return Err(CliError::Config("no limit law is available for three distinct coins".into()))
            }
        })
    }

    /// Same coin with a different angle (rotation and general only).
    pub fn with_theta(&self, theta: f64) -> Self {
        match *self {
            CoinSetup::General { gamma, delta, xi, .. } => {
                CoinSetup::General { gamma, delta, xi, theta }
            }
            _ => CoinSetup::Rotation { theta },
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CoinSetup::Rotation { theta } => json!({ "kind": "rotation", "theta": theta }),
            CoinSetup::General { gamma, delta, xi, theta } => json!({
                "kind": "general",
                "gamma": gamma,
                "delta": delta,
                "xi": xi,
                "theta": theta,
            }),
            CoinSetup::ThreeCoin(coins) => json!({
                "kind": "three-coin",
                "coins": coins
                    .iter()
                    .map(|c| json!({ "gamma": c[0], "delta": c[1], "xi": c[2], "theta": c[3] }))
                    .collect::<Vec<_>>(),
            }),
        }
    }
}

pub fn parse_spin(args: &SpinArgs) -> Result<InitialSpin, CliError> {
    if let Some(name) = &args.spin {
        return match name.as_str() {
            "symmetric" => Ok(InitialSpin::symmetric()),
            other => Err(CliError::Config(format!("unknown spin '{other}' (expected 'symmetric')"))),
        };
    }
    let (Some(a), Some(b)) = (&args.alpha, &args.beta) else {
        return Ok(InitialSpin::symmetric());
    };
    let [ar, ai] = parse_floats::<2>(a, ',', "--alpha")?;
    let [br, bi] = parse_floats::<2>(b, ',', "--beta")?;
    let (alpha, beta) = (Complex::new(ar, ai), Complex::new(br, bi));
    let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
    if (norm_sq - 1.0).abs() > SPIN_PARSE_TOLERANCE {
        return Err(CliError::Config(format!(
            "spin has |alpha|^2 + |beta|^2 = {norm_sq}, expected 1"
        )));
    }
    let norm = norm_sq.sqrt();
    Ok(InitialSpin::new(alpha / norm, beta / norm)?)
}

/// Inclusive grid `lo:hi:n`; a single point is `lo`.
pub fn parse_sweep(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!("--theta-sweep expects lo:hi:n, got '{text}'")));
    }
    let lo = parse_float(parts[0], "--theta-sweep")?;
    let hi = parse_float(parts[1], "--theta-sweep")?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("--theta-sweep count '{}' is not a positive integer", parts[2])))?;
    if n == 0 {
        return Err(CliError::Config("--theta-sweep needs at least one angle".into()));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let span = hi - lo;
    Ok((0..n).map(|i| lo + span * i as f64 / (n - 1) as f64).collect())
}

pub fn spin_json(spin: &InitialSpin) -> Value {
    let (a, b) = (spin.alpha(), spin.beta());
    json!({ "alpha": [a.re, a.im], "beta": [b.re, b.im] })
}

pub fn parse_floats<const N: usize>(text: &str, sep: char, flag: &str) -> Result<[f64; N], CliError> {
    let parts: Vec<&str> = text.split(sep).collect();
    if parts.len() != N {
        return Err(CliError::Config(format!(
            "{flag} expects {N} '{sep}'-separated numbers, got '{text}'"
        )));
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = parse_float(part, flag)?;
    }
    Ok(out)
}

fn parse_float(text: &str, flag: &str) -> Result<f64, CliError> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{flag}: '{text}' is not a number")))?;
    finite(v, flag)
}

fn finite(v: f64, flag: &str) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{flag}: value must be finite")))
    }
}
