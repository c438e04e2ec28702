//! Shared run configuration: command-line flags merged over an optional
//! JSON file, plus parsing of exact and floating parameter values.

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use blobloop::cft::{y_of_r, KacParams};
use blobloop::transfer::Boundary;
use blobloop::{RingMode, SectorLabel};
use clap::Args;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Deserialize;

/// A parameter value kept both as typed and as a float. Accepts
/// integers, decimals and fractions such as `3/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Value {
    pub text: String,
    pub exact: Option<BigRational>,
    pub float: f64,
}

impl FromStr for Value {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let exact = exact_rational(t);
        let float = match &exact {
            Some(q) => q.to_f64().context("value out of range")?,
            None => t.parse::<f64>().with_context(|| format!("`{s}` is not a number"))?,
        };
        Ok(Value {
            text: t.to_string(),
            exact,
            float,
        })
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let s = match Raw::deserialize(d)? {
            Raw::Num(v) => v.to_string(),
            Raw::Text(s) => s,
        };
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn exact_rational(t: &str) -> Option<BigRational> {
    if let Some((n, d)) = t.split_once('/') {
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n.trim().parse().ok()?, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let q = BigRational::new(digits, BigInt::from(10u32).pow(frac.len() as u32));
    Some(if neg { -q } else { q })
}

/// Boundary coupling: a value or `inf`.
#[derive(Debug, Clone, PartialEq)]
pub enum Lambda {
    Infinite,
    Finite(Value),
}

impl FromStr for Lambda {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "saturated" => Ok(Lambda::Infinite),
            v => Ok(Lambda::Finite(v.parse()?)),
        }
    }
}

impl<'de> Deserialize<'de> for Lambda {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        v.text.parse().map_err(serde::de::Error::custom)
    }
}

impl Lambda {
    pub fn boundary(&self) -> Boundary<f64> {
        match self {
            Lambda::Infinite => Boundary::Saturated,
            Lambda::Finite(v) => Boundary::Coupling(v.float),
        }
    }
}

fn parse_ring(s: &str) -> Result<RingMode> {
    s.parse().map_err(anyhow::Error::from)
}

fn parse_sector(s: &str) -> Result<SectorLabel> {
    s.parse().map_err(anyhow::Error::from)
}

/// Flags shared by every subcommand. Each one may also come from the JSON
/// file given with `--config`; flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Widths, comma separated.
    #[arg(long = "N", alias = "n", value_delimiter = ',', global = true)]
    #[serde(rename = "N", default)]
    pub n: Vec<usize>,
    /// Number of time steps.
    #[arg(long = "M", global = true)]
    #[serde(rename = "M", default)]
    pub m: Option<usize>,
    /// Minimal-model parameter; sets `x = 2 cos(pi/(p+1))`.
    #[arg(long, global = true)]
    #[serde(default)]
    pub p: Option<f64>,
    /// Bulk loop weight, overriding the value implied by `p`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default)]
    pub x: Option<Value>,
    /// Boundary Kac label; sets `y = y(r)`.
    #[arg(long, global = true, conflicts_with = "y")]
    #[serde(default)]
    pub r: Option<f64>,
    /// Boundary loop weight.
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default)]
    pub y: Option<Value>,
    /// Weight of winding loops away from the boundary.
    #[arg(long, global = true, conflicts_with_all = ["alpha", "beta"], allow_hyphen_values = true)]
    #[serde(default)]
    pub l: Option<Value>,
    /// Weight of winding loops touching the boundary.
    #[arg(long = "m", global = true, conflicts_with_all = ["alpha", "beta"], allow_hyphen_values = true)]
    #[serde(rename = "m", default)]
    pub m_weight: Option<Value>,
    /// Hyperbolic winding parameter, `l = 2 cosh(alpha)`; `re` or `re,im`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default)]
    pub alpha: Option<String>,
    /// Second winding parameter, `m = sinh(alpha+beta)/sinh(beta)`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default)]
    pub beta: Option<String>,
    /// Boundary coupling: a value or `inf`.
    #[arg(long, global = true)]
    #[serde(default)]
    pub lambda: Option<Lambda>,
    /// Arithmetic: f64, rational or poly.
    #[arg(long, global = true, value_parser = parse_ring)]
    #[serde(default, deserialize_with = "de_ring")]
    pub ring: Option<RingMode>,
    /// Comparison tolerance.
    #[arg(long, global = true)]
    #[serde(default)]
    pub tol: Option<f64>,
    /// Series cutoff.
    #[arg(long, global = true)]
    #[serde(default)]
    pub cutoff: Option<usize>,
    /// Sectors, e.g. `T0,T2*`.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_sector)]
    #[serde(default, deserialize_with = "de_sectors")]
    pub sector: Vec<SectorLabel>,
    /// RSOS sector `(d, a)`: `d`.
    #[arg(long, global = true)]
    #[serde(default)]
    pub d: Option<usize>,
    /// RSOS sector `(d, a)`: `a`.
    #[arg(long, global = true)]
    #[serde(default)]
    pub a: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    #[serde(default)]
    pub jobs: Option<usize>,
    /// JSON file with any of the above keys.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn de_ring<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<RingMode>, D::Error> {
    let s: Option<String> = Option::deserialize(d)?;
    s.map(|s| s.parse().map_err(serde::de::Error::custom)).transpose()
}

fn de_sectors<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<SectorLabel>, D::Error> {
    let v: Vec<String> = Vec::deserialize(d)?;
    v.iter().map(|s| s.parse().map_err(serde::de::Error::custom)).collect()
}

impl RunConfig {
    /// Fills every unset flag from the `--config` file, if any.
    pub fn resolve(self) -> Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let file: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(RunConfig {
            n: if self.n.is_empty() { file.n } else { self.n },
            m: self.m.or(file.m),
            p: self.p.or(file.p),
            x: self.x.or(file.x),
            r: self.r.or(file.r),
            y: self.y.or(file.y),
            l: self.l.or(file.l),
            m_weight: self.m_weight.or(file.m_weight),
            alpha: self.alpha.or(file.alpha),
            beta: self.beta.or(file.beta),
            lambda: self.lambda.or(file.lambda),
            ring: self.ring.or(file.ring),
            tol: self.tol.or(file.tol),
            cutoff: self.cutoff.or(file.cutoff),
            sector: if self.sector.is_empty() { file.sector } else { self.sector },
            d: self.d.or(file.d),
            a: self.a.or(file.a),
            out: self.out.or(file.out),
            jobs: self.jobs.or(file.jobs),
            config: Some(path),
        })
    }

    /// Rejects parameter groups that exclude each other.
    pub fn validate(&self) -> Result<()> {
        if self.r.is_some() && self.y.is_some() {
            bail!("give either --r or --y, not both");
        }
        let weights = self.l.is_some() || self.m_weight.is_some();
        let hyperbolic = self.alpha.is_some() || self.beta.is_some();
        if weights && hyperbolic {
            bail!("give either --l/--m or --alpha/--beta, not both");
        }
        if self.alpha.is_some() != self.beta.is_some() {
            bail!("--alpha and --beta go together");
        }
        Ok(())
    }

    pub fn widths(&self, default: &[usize]) -> Vec<usize> {
        if self.n.is_empty() {
            default.to_vec()
        } else {
            self.n.clone()
        }
    }

    pub fn single_width(&self, default: usize) -> Result<usize> {
        match self.n.as_slice() {
            [] => Ok(default),
            [n] => Ok(*n),
            _ => bail!("this command takes a single --N"),
        }
    }

    pub fn integer_p(&self, default: usize) -> Result<usize> {
        match self.p {
            None => Ok(default),
            Some(p) if p.fract() == 0.0 && p >= 2.0 => Ok(p as usize),
            Some(p) => bail!("this command needs an integer p >= 2, got {p}"),
        }
    }

    pub fn lambda(&self) -> Lambda {
        self.lambda.clone().unwrap_or(Lambda::Infinite)
    }

    /// Bulk weight as a float: `--x`, else from `p`.
    pub fn x_float(&self, default_p: f64) -> Result<f64> {
        match &self.x {
            Some(v) => Ok(v.float),
            None => Ok(KacParams::new(self.p.unwrap_or(default_p))?.x()),
        }
    }

    /// Boundary weight as a float: `--y`, else `y(r)`, else `y(1)`.
    pub fn y_float(&self, default_p: f64) -> f64 {
        match (&self.y, self.r) {
            (Some(v), _) => v.float,
            (None, r) => y_of_r(self.p.unwrap_or(default_p), r.unwrap_or(1.0)),
        }
    }

    /// Winding weights `(l, m)`, from either parameter group; defaults to 1.
    pub fn winding(&self) -> Result<(Complex64, Complex64)> {
        if let (Some(a), Some(b)) = (&self.alpha, &self.beta) {
            let params = blobloop::amplitudes::WindingParams::new(parse_complex(a)?, parse_complex(b)?)?;
            return Ok((params.l(), params.m()));
        }
        let get = |v: &Option<Value>| Complex64::new(v.as_ref().map_or(1.0, |v| v.float), 0.0);
        Ok((get(&self.l), get(&self.m_weight)))
    }
}

/// `re` or `re,im`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().with_context(|| format!("`{t}` is not a number"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => bail!("expected `re` or `re,im`, got `{s}`"),
    }
}
