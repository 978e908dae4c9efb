//! Parametric frequency and severity distributions.

mod continuous;
mod discrete;

use std::collections::BTreeMap;

pub use continuous::{Continuous, ContinuousFamily};
pub use discrete::{AbCoefficients, Discrete, DiscreteFamily, ZeroMass};

use crate::error::{Error, Result};

/// Named parameters, as written in configuration files.
pub type ParamMap = BTreeMap<String, f64>;

/// Extracts `required` then `optional` parameters in order, rejecting unknown keys.
pub(crate) fn take_params(
    family: &str,
    par: &ParamMap,
    required: &[&str],
    optional: &[(&str, f64)],
) -> Result<Vec<f64>> {
    for key in par.keys() {
        let known = required.contains(&key.as_str()) || optional.iter().any(|(k, _)| k == key);
        if !known {
            let mut expected: Vec<&str> = required.to_vec();
            expected.extend(optional.iter().map(|(k, _)| *k));
            return Err(Error::param(
                key,
                format!(
                    "unknown parameter for `{family}` (expected one of: {})",
                    expected.join(", ")
                ),
            ));
        }
    }
    let mut out = Vec::with_capacity(required.len() + optional.len());
    for r in required {
        let v = par
            .get(*r)
            .copied()
            .ok_or_else(|| Error::param(*r, format!("required by `{family}`")))?;
        out.push(v);
    }
    for (k, default) in optional {
        out.push(par.get(*k).copied().unwrap_or(*default));
    }
    Ok(out)
}

/// Builds a [`ParamMap`] from literal pairs.
pub fn params(pairs: &[(&str, f64)]) -> ParamMap {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}
