//! Config files: a list of shipped scenario names plus full scenario blocks,
//! in TOML or JSON.

use std::fs;
use std::path::Path;

use cornerpmt_core::scenario::{shipped, shipped_by_name, Scenario};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Shipped scenarios to include by name.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shipped: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scenario: Vec<Scenario>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Ok(serde_json::from_str(&text)?),
            Some("toml") | None => toml::from_str(&text).map_err(|source| CliError::Toml { path: path.into(), source }),
            Some(other) => Err(CliError::Config(format!("unknown config extension .{other}, expected .toml or .json"))),
        }
    }

    /// Scenarios in file order: shipped references first, then blocks.
    pub fn scenarios(&self) -> Result<Vec<Scenario>> {
        let mut out = Vec::with_capacity(self.shipped.len() + self.scenario.len());
        for name in &self.shipped {
            out.push(shipped_by_name(name)?);
        }
        out.extend(self.scenario.iter().cloned());
        Ok(out)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }
}

/// Resolves `--config` and `--scenario` into a validated scenario list.
/// Without a config file the shipped set is used.
pub fn select(config: Option<&Path>, name: Option<&str>) -> Result<Vec<Scenario>> {
    let all = match config {
        Some(p) => ConfigFile::load(p)?.scenarios()?,
        None => shipped()?,
    };
    let picked: Vec<Scenario> = match name {
        None => all,
        Some(n) => {
            let exact: Vec<Scenario> = all.iter().filter(|s| s.name == n).cloned().collect();
            if !exact.is_empty() {
                exact
            } else if config.is_none() {
                vec![shipped_by_name(n)?]
            } else {
                return Err(CliError::Config(format!("no scenario named {n} in the config file")));
            }
        }
    };
    if picked.is_empty() {
        return Err(CliError::Config("no scenarios selected".into()));
    }
    let mut names = std::collections::BTreeSet::new();
    for s in &picked {
        s.validate().map_err(CliError::in_scenario(&s.name))?;
        if !names.insert(s.name.as_str()) {
            return Err(CliError::Config(format!("duplicate scenario name {}", s.name)));
        }
    }
    Ok(picked)
}

/// (table, key, doc) for the keys documented in the reference config.
const DOCS: &[(&str, &str, &str)] = &[
    ("scenario", "name", "unique name, also the output subdirectory"),
    ("scenario", "epsilon", "collar half-width parameter; the collar covers [-2ε, 2ε]"),
    ("scenario", "n_t", "collar intervals (even)"),
    ("scenario", "sigma_grid", "torus grid size per direction; ignored by spherical corners"),
    ("scenario", "delta_sweep", "strictly decreasing mollification scales, each ≤ ε/10"),
    ("mollifier", "delta", "overwritten by each sweep member"),
    ("mollifier", "plateau", "height of the bandwidth profile σ, fixed at 1/100 by the construction"),
    ("mollifier", "quadrature_tol", "absolute quadrature error target per component"),
    ("mollifier", "refined_band_nodes", "uniform refined intervals across [0, 2w] on each side, w = plateau·δ²"),
    ("grid", "interior_spacing", "largest radial spacing inside Σ"),
    ("grid", "max_spacing", "largest radial spacing in the exterior"),
    ("grid", "growth", "ratio of neighbouring intervals in graded zones"),
    ("grid", "s_max_factor", "outer boundary s_max = s_Σ + factor·r(Σ)"),
    ("grid", "max_nodes", "radial node budget"),
    ("solver", "shooting", "cross-check the FD solve by shooting"),
    ("solver", "ode_rtol", "shooting relative tolerance"),
    ("solver", "ode_atol", "shooting absolute tolerance"),
    ("solver", "decay_fraction", "outer fraction of the radial range used by the decay fit"),
    ("pipeline", "asymptotic_tol", "allowed drift of the Hawking-mass limit"),
    ("pipeline", "check_s_max", "re-solve with s_max doubled and report the change of A and B"),
    ("oracle", "levels", "[n_t, torus grid] pairs, each doubling the previous"),
    ("oracle", "positions", "sample positions in units of ε"),
    ("oracle", "extrapolate", "Richardson-extrapolate the oracle over the levels"),
    ("tolerances", "outside", "|γ_δ - γ| outside the band (criterion 1a)"),
    ("tolerances", "c0_order", "minimum fitted order of max|γ_δ - γ| (criterion 1b)"),
    ("tolerances", "c0_floor", "deviations below this skip the order test"),
    ("tolerances", "uniform_growth", "largest growth of band sups per δ halving (criterion 2)"),
    ("tolerances", "uniform_floor", "band sups below this count as zero"),
    ("tolerances", "distributional", "extrapolated ∫R_δ dt against 2(H₋ - H₊) (criterion 3)"),
    ("tolerances", "decay_agreement", "|A_decay - A_integral| (criterion 4)"),
    ("tolerances", "mass_relation", "m(g̃_δ) against m(𝒢) + (n-1)A_δ (criterion 4)"),
    ("tolerances", "pmt_floor", "m(g̃_δ) ≥ -pmt_floor on (H) scenarios (criterion 5)"),
    ("tolerances", "extrapolated_mass", "extrapolated mass ≥ m(𝒢) - extrapolated_mass (criterion 5)"),
    ("tolerances", "decay_order", "minimum fitted order of A_δ → 0 (criterion 4)"),
    ("tolerances", "decay_floor", "|A_δ| below this counts as vanished"),
    ("tolerances", "energy_floor_ratio", "strict jump: min energy ≥ ratio × largest-δ energy (criterion 6)"),
    ("tolerances", "energy_vanishing", "no jump: energy at the smallest δ (criterion 6)"),
    ("tolerances", "roundoff", "allowance on sign conditions"),
    ("tolerances", "s_max_shift", "change of A and B when s_max doubles"),
    ("tolerances", "oracle_relative", "relative oracle agreement at the finest level (criterion 7)"),
    ("tolerances", "oracle_order", "minimum fitted order of the plain oracle errors"),
    ("tolerances", "oracle_order_floor", "oracle levels below this are roundoff-limited, left out of the fit"),
    ("tolerances", "line_integral", "absolute error target of the band line integrals"),
    ("tolerances", "jump", "jumps within this of zero count as equality in condition (H)"),
];

/// The shipped scenarios as a TOML config, with every documented default
/// annotated in place.
pub fn reference_toml() -> Result<String> {
    let raw = toml::to_string(&ConfigFile { shipped: Vec::new(), scenario: shipped()? })?;
    let mut out = String::from(
        "# Reference configuration: every shipped scenario with all defaults spelled out.\n\
         # Generated by `cargo run -p cornerpmt --example reference`; edit a copy.\n\n",
    );
    let mut table = String::new();
    for line in raw.lines() {
        let trimmed = line.trim_start();
        if trimmed.starts_with('[') {
            let header = trimmed.trim_matches(|c| c == '[' || c == ']');
            table = header.rsplit('.').next().unwrap_or("").to_string();
        } else if let Some((key, _)) = trimmed.split_once(" = ") {
            if let Some((_, _, doc)) = DOCS.iter().find(|(t, k, _)| *t == table && *k == key) {
                out.push_str("# ");
                out.push_str(doc);
                out.push('\n');
            }
        }
        out.push_str(line);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_round_trips() {
        let text = reference_toml().unwrap();
        let back: ConfigFile = toml::from_str(&text).unwrap();
        assert_eq!(back.scenarios().unwrap(), shipped().unwrap());
        assert!(text.contains("# relative oracle agreement"));
    }

    #[test]
    fn json_config_round_trips() {
        let c = ConfigFile { shipped: vec!["flat_flat".into()], scenario: vec![shipped_by_name("torus_kink").unwrap()] };
        let back: ConfigFile = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn selection_by_alias_and_unknown_name() {
        assert_eq!(select(None, Some("flat_in_schwarzschild")).unwrap()[0].name, "flat_in_schwarzschild_R4_m0.5");
        assert!(select(None, Some("missing")).is_err());
        assert_eq!(select(None, None).unwrap().len(), 8);
    }
}
