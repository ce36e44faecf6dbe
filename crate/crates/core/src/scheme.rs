//! Short scheme identifiers used by the experiments and the command line:
//! `lgl<r>` (interpolation), `lglc<r>` (collocation) for even orders `r`,
//! and `imex-yoshida<r>` for `r ∈ {4, 6}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{yoshida_compose, ArkStepper, StageSolveConfig, Stepper};
use crate::tableau::{build_scheme, ArkScheme, Variant, MAX_PRIMARY_STAGES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SchemeSpec {
    Ark { s1: usize, variant: Variant },
    /// The order-2 method composed by Yoshida's technique.
    ImexYoshida { order: usize },
}

impl SchemeSpec {
    pub fn ark(s1: usize, variant: Variant) -> Result<Self> {
        if !(2..=MAX_PRIMARY_STAGES).contains(&s1) {
            return Err(Error::invalid(format!(
                "s1 must be in 2..={MAX_PRIMARY_STAGES}, got {s1}"
            )));
        }
        Ok(SchemeSpec::Ark { s1, variant })
    }

    pub fn order(&self) -> usize {
        match *self {
            SchemeSpec::Ark { s1, .. } => 2 * (s1 - 1),
            SchemeSpec::ImexYoshida { order } => order,
        }
    }

    /// The underlying ARK scheme (the order-2 base for compositions).
    pub fn ark_scheme(&self) -> Result<ArkScheme> {
        match *self {
            SchemeSpec::Ark { s1, variant } => build_scheme(s1, variant),
            SchemeSpec::ImexYoshida { .. } => build_scheme(2, Variant::Interpolation),
        }
    }

    pub fn stepper(&self, cfg: StageSolveConfig) -> Result<Box<dyn Stepper + Send>> {
        let base = ArkStepper::new(self.ark_scheme()?, cfg);
        Ok(match *self {
            SchemeSpec::Ark { .. } => Box::new(base),
            SchemeSpec::ImexYoshida { order } => Box::new(yoshida_compose(base, order)?),
        })
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SchemeSpec::Ark {
                variant: Variant::Interpolation,
                ..
            } => write!(f, "lgl{}", self.order()),
            SchemeSpec::Ark {
                variant: Variant::Collocation,
                ..
            } => write!(f, "lglc{}", self.order()),
            SchemeSpec::ImexYoshida { order } => write!(f, "imex-yoshida{order}"),
        }
    }
}

fn parse_order(digits: &str, name: &str) -> Result<usize> {
    digits
        .parse::<usize>()
        .map_err(|_| Error::invalid(format!("unknown scheme '{name}'")))
}

impl FromStr for SchemeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let name = s.trim().to_ascii_lowercase();
        if let Some(rest) = name.strip_prefix("imex-yoshida") {
            let order = parse_order(rest.trim_start_matches(':'), s)?;
            if order != 4 && order != 6 {
                return Err(Error::invalid(format!(
                    "imex-yoshida supports orders 4 and 6, got {order}"
                )));
            }
            return Ok(SchemeSpec::ImexYoshida { order });
        }
        let (variant, rest) = if let Some(r) = name.strip_prefix("lglc") {
            (Variant::Collocation, r)
        } else if let Some(r) = name.strip_prefix("lgl") {
            (Variant::Interpolation, r)
        } else {
            return Err(Error::invalid(format!("unknown scheme '{s}'")));
        };
        let order = parse_order(rest, s)?;
        if order < 2 || order % 2 != 0 {
            return Err(Error::invalid(format!("scheme order must be even and >= 2, got {order}")));
        }
        SchemeSpec::ark(order / 2 + 1, variant)
    }
}

impl TryFrom<String> for SchemeSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SchemeSpec> for String {
    fn from(s: SchemeSpec) -> String {
        s.to_string()
    }
}
