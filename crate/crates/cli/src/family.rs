//! Modulation-format specs used on the command line.
//!
//! `gaussian`, `uniform:M`, `mb:M`, `mb:M:LAMBDA`, `opt:M` and
//! `opt:M:NU1:NU2`. Without explicit parameters the MB and tailored
//! formats are optimized for the design point given by `--c` and
//! `--design-snr`. Parameters are in integer-grid units.

use std::fmt;
use std::str::FromStr;

use qamshape::nl_model::{optimize_mb, optimize_tailored};
use qamshape::ssfm::{Modulation, SweepFamily};
use qamshape::{mb_pmf, square_qam, tailored_pmf, NlChannelModel, Pmf, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum FormatSpec {
    Gaussian,
    Uniform(usize),
    Mb { order: usize, lambda: Option<f64> },
    Opt { order: usize, nu: Option<(f64, f64)> },
}

impl FromStr for FormatSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let order = |i: usize| -> std::result::Result<usize, String> {
            let o: usize = parts
                .get(i)
                .ok_or_else(|| format!("format `{s}` needs a QAM order"))?
                .parse()
                .map_err(|_| format!("bad QAM order in `{s}`"))?;
            square_qam(o).map_err(|e| e.to_string())?;
            Ok(o)
        };
        let real = |i: usize| -> std::result::Result<f64, String> {
            let v: f64 = parts[i].parse().map_err(|_| format!("bad number `{}` in `{s}`", parts[i]))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("non-finite parameter in `{s}`"))
            }
        };
        match (parts[0], parts.len()) {
            ("gaussian", 1) => Ok(FormatSpec::Gaussian),
            ("uniform", 2) => Ok(FormatSpec::Uniform(order(1)?)),
            ("mb", 2) => Ok(FormatSpec::Mb { order: order(1)?, lambda: None }),
            ("mb", 3) => Ok(FormatSpec::Mb { order: order(1)?, lambda: Some(real(2)?) }),
            ("opt", 2) => Ok(FormatSpec::Opt { order: order(1)?, nu: None }),
            ("opt", 4) => Ok(FormatSpec::Opt { order: order(1)?, nu: Some((real(2)?, real(3)?)) }),
            _ => Err(format!(
                "unknown format `{s}`; expected gaussian, uniform:M, mb:M[:LAMBDA] or opt:M[:NU1:NU2]"
            )),
        }
    }
}

impl fmt::Display for FormatSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatSpec::Gaussian => write!(f, "gaussian"),
            FormatSpec::Uniform(m) => write!(f, "uniform:{m}"),
            FormatSpec::Mb { order, lambda: None } => write!(f, "mb:{order}"),
            FormatSpec::Mb { order, lambda: Some(l) } => write!(f, "mb:{order}:{l}"),
            FormatSpec::Opt { order, nu: None } => write!(f, "opt:{order}"),
            FormatSpec::Opt { order, nu: Some((a, b)) } => write!(f, "opt:{order}:{a}:{b}"),
        }
    }
}

/// A resolved format: its simulation input plus a description of the
/// parameters actually used.
pub struct Resolved {
    pub family: SweepFamily,
    pub params: String,
}

impl FormatSpec {
    pub fn resolve(&self, design: &NlChannelModel) -> Result<Resolved> {
        let label = self.to_string();
        let (modulation, params) = match *self {
            FormatSpec::Gaussian => (Modulation::Gaussian, "complex Gaussian".to_string()),
            FormatSpec::Uniform(m) => {
                (Modulation::discrete(&square_qam(m)?, Pmf::uniform(m))?, "uniform".to_string())
            }
            FormatSpec::Mb { order, lambda } => {
                let c = square_qam(order)?;
                let lambda = match lambda {
                    Some(l) => l,
                    None => optimize_mb(&c, design)?.0,
                };
                (Modulation::discrete(&c, mb_pmf(&c, lambda)?)?, format!("lambda={lambda}"))
            }
            FormatSpec::Opt { order, nu } => {
                let c = square_qam(order)?;
                let (nu1, nu2) = match nu {
                    Some(v) => v,
                    None => {
                        let (a, b, _) = optimize_tailored(&c, design)?;
                        (a, b)
                    }
                };
                (Modulation::discrete(&c, tailored_pmf(&c, nu1, nu2)?)?, format!("nu1={nu1} nu2={nu2}"))
            }
        };
        Ok(Resolved { family: SweepFamily::new(label, modulation), params })
    }
}

pub fn parse_list(s: &str) -> std::result::Result<Vec<FormatSpec>, String> {
    let specs: Vec<FormatSpec> = s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect::<std::result::Result<_, _>>()?;
    if specs.is_empty() {
        return Err("empty format list".into());
    }
    Ok(specs)
}
