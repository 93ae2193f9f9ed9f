//! Flag parsing into a resolved parameter set that is echoed with every report.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use padic_gas::domain::{pair_key, pairs, ChargeVector};
use padic_gas::scalar::ratio_text;
use padic_gas::{ExponentAssignment, Limits, RhoSpec, Scalar};
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Core(padic_gas::Error),
    /// A check battery ran to completion with failures.
    Failed(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<padic_gas::Error> for CliError {
    fn from(e: padic_gas::Error) -> Self {
        match e {
            padic_gas::Error::Parse(m) => CliError::Usage(m),
            padic_gas::Error::Dimension { .. } => CliError::Usage(e.to_string()),
            other => CliError::Core(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Flags shared by every subcommand. Each one is optional here so that values
/// read with `--from-json` can be overridden selectively.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Number of points.
    #[arg(long)]
    pub n: Option<usize>,
    /// Residue field size.
    #[arg(long)]
    pub q: Option<u64>,
    /// Exponent of the largest distance to the origin.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Exponent of the smallest distance to the origin.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// Pair exponents `s_1_2=1,s_1_3=0,...`, or `@FILE` holding that text or a JSON object.
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<String>,
    /// Comma-separated charges; the pair exponents become `beta * c_i * c_j`.
    #[arg(long, allow_hyphen_values = true)]
    pub charges: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Radial density: `ball:M`, `exp`, `gauss` or `table:m=v;...`.
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<String>,
    /// evaluate: full | reduced | restricted | n2 | n3 | mehta | expectation | low-temp.
    #[arg(long)]
    pub form: Option<String>,
    /// sample: mc | exact | levels.
    #[arg(long)]
    pub mode: Option<String>,
    /// auto | exact | float.
    #[arg(long)]
    pub precision: Option<String>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Restrict to reduced filtrations or the reduced region.
    #[arg(long)]
    pub reduced: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Bounds file with `key=value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Parameters from a report (or bare parameter object) printed earlier.
    #[arg(long)]
    pub from_json: Option<PathBuf>,
}

/// The fully resolved inputs of one run, in canonical text form.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charges: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reduced: bool,
}

#[derive(Deserialize)]
struct Envelope {
    command: String,
    params: Params,
}

/// Reads parameters from a report or a bare parameter object.
pub fn load_params(path: &Path, command: &str) -> CliResult<Params> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if value.get("params").is_some() {
        let env: Envelope =
            serde_json::from_value(value).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if env.command != command {
            return usage(format!(
                "{} holds a {:?} report, not {command:?}",
                path.display(),
                env.command
            ));
        }
        Ok(env.params)
    } else {
        serde_json::from_value(value).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

pub fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

impl Params {
    /// Flags given on the command line win over loaded values.
    pub fn overlay(mut self, f: &Flags) -> Params {
        macro_rules! take {
            ($($field:ident),*) => { $( if f.$field.is_some() { self.$field = f.$field.clone(); } )* };
        }
        take!(n, q, a, b, s, charges, beta, rho, form, mode, precision, depth, samples, seed);
        self.reduced |= f.reduced;
        self
    }

    pub fn n(&self) -> CliResult<usize> {
        self.n.map_or_else(|| usage("--n is required"), Ok)
    }

    /// Defaults to 2 and records the choice.
    pub fn q(&mut self) -> CliResult<u64> {
        let q = *self.q.get_or_insert(2);
        if q < 2 {
            return usage(format!("--q {q}: residue field size must be at least 2"));
        }
        Ok(q)
    }

    fn scalar(slot: &mut Option<String>, name: &str, default: &str) -> CliResult<Scalar> {
        let raw = slot.get_or_insert_with(|| default.to_string());
        let v = Scalar::parse(raw).map_err(|e| CliError::Usage(format!("--{name}: {e}")))?;
        *raw = v.to_string();
        Ok(v)
    }

    pub fn a(&mut self) -> CliResult<Scalar> {
        Self::scalar(&mut self.a, "a", "0")
    }

    pub fn b(&mut self) -> CliResult<Scalar> {
        Self::scalar(&mut self.b, "b", "0")
    }

    pub fn beta(&mut self) -> CliResult<Scalar> {
        if self.beta.is_none() {
            return usage("--beta is required with charges");
        }
        Self::scalar(&mut self.beta, "beta", "")
    }

    pub fn rho(&mut self) -> CliResult<RhoSpec> {
        let raw = self.rho.get_or_insert_with(|| "ball:0".to_string());
        let rho = RhoSpec::parse(raw)?;
        *raw = rho.to_string();
        Ok(rho)
    }

    pub fn limits(config: Option<&Path>) -> CliResult<Limits> {
        match config {
            None => Ok(Limits::default()),
            Some(p) => Ok(Limits::from_kv_str(&read(p)?)?),
        }
    }

    /// The pair exponents in canonical order; missing keys are announced.
    pub fn s_vector(&mut self, n: usize) -> CliResult<Vec<Scalar>> {
        let raw = self.s.clone().unwrap_or_default();
        let text = match raw.strip_prefix('@') {
            Some(path) => s_file_text(Path::new(path))?,
            None => raw,
        };
        let (s, missing) = ExponentAssignment::parse_s(n, &text).map_err(|e| match e {
            padic_gas::Error::Parse(m) => CliError::Usage(m),
            other => CliError::from(other),
        })?;
        if !missing.is_empty() {
            eprintln!("notice: {} pair exponent(s) default to 0: {}", missing.len(), missing.join(","));
        }
        self.s = Some(canonical_s(n, &s));
        Ok(s)
    }

    pub fn exponents(&mut self) -> CliResult<ExponentAssignment> {
        let n = self.n()?;
        let (a, b) = (self.a()?, self.b()?);
        let s = self.s_vector(n)?;
        Ok(ExponentAssignment::new(n, a, b, s)?)
    }

    /// Unit charges when none are given.
    pub fn charge_vector(&mut self) -> CliResult<ChargeVector> {
        let n = self.n()?;
        let beta = self.beta()?;
        let charges = match &self.charges {
            Some(text) => ChargeVector::parse_charges(text)?,
            None => ChargeVector::unit(n, beta.clone()).charges,
        };
        if charges.len() != n {
            return usage(format!("--charges has {} entries, expected n = {n}", charges.len()));
        }
        self.charges = Some(charges.iter().map(ratio_text).collect::<Vec<_>>().join(","));
        Ok(ChargeVector::new(charges, beta)?)
    }

    pub fn force_float(&mut self) -> CliResult<bool> {
        let p = self.precision.get_or_insert_with(|| "auto".to_string());
        match p.as_str() {
            "auto" | "exact" => Ok(false),
            "float" => Ok(true),
            other => usage(format!("--precision {other:?}: expected auto, exact or float")),
        }
    }

    pub fn wants_exact(&self) -> bool {
        self.precision.as_deref() == Some("exact")
    }
}

fn s_file_text(path: &Path) -> CliResult<String> {
    let text = read(path)?;
    if !text.trim_start().starts_with('{') {
        return Ok(text);
    }
    let map: std::collections::BTreeMap<String, Scalar> =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(map
        .into_iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(","))
}

pub fn canonical_s(n: usize, s: &[Scalar]) -> String {
    pairs(n)
        .into_iter()
        .zip(s)
        .map(|((i, j), v)| format!("{}={v}", pair_key(i, j)))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_vector_is_canonicalized() {
        let mut p = Params {
            n: Some(3),
            s: Some("s_2_3=1/2,s_1_2=1".into()),
            ..Default::default()
        };
        let s = p.s_vector(3).unwrap();
        assert_eq!(s, vec![Scalar::int(1), Scalar::zero(), Scalar::ratio(1, 2)]);
        assert_eq!(p.s.as_deref(), Some("s_1_2=1,s_1_3=0,s_2_3=1/2"));
    }

    #[test]
    fn unknown_key_is_usage_error_listing_keys() {
        let mut p = Params {
            n: Some(3),
            s: Some("s_1_4=1".into()),
            ..Default::default()
        };
        match p.s_vector(3) {
            Err(CliError::Usage(m)) => assert!(m.contains("s_1_2,s_1_3,s_2_3"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overlay_prefers_flags() {
        let base = Params {
            n: Some(3),
            q: Some(5),
            ..Default::default()
        };
        let flags = Flags {
            q: Some(7),
            ..Default::default()
        };
        let p = base.overlay(&flags);
        assert_eq!((p.n, p.q), (Some(3), Some(7)));
    }

    #[test]
    fn params_round_trip() {
        let p = Params {
            n: Some(2),
            q: Some(3),
            a: Some("-1/2".into()),
            reduced: true,
            ..Default::default()
        };
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"n":2,"q":3,"a":"-1/2","reduced":true}"#);
        assert_eq!(serde_json::from_str::<Params>(&text).unwrap(), p);
    }
}
