//! On-disk formats: the versioned path document and the report tables.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use cornerpmt_core::collar::{CurvatureField, MetricPath};
use cornerpmt_core::concentration::ConcentrationReport;
use cornerpmt_core::corner::{CornerMetric, Side};
use cornerpmt_core::equivalence::OracleEquivalence;
use cornerpmt_core::mollifier::{LemmaReport, MollifiedPath};
use cornerpmt_core::scenario::Check;
use cornerpmt_core::slice::SliceKind;
use cornerpmt_core::spherical::{ConformalSolution, PipelineResult, SphericalMetric};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A collar path or a mollified path. Mollified paths carry `delta` and
/// their refined (non-uniform) `t_grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDocument {
    pub format_version: u32,
    pub family: String,
    pub slice_kind: SliceKind,
    pub epsilon: f64,
    pub n_t: usize,
    pub t_grid: Vec<f64>,
    pub slices: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<CornerMetric>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl PathDocument {
    pub fn from_path(path: &MetricPath, corner: Option<&CornerMetric>) -> Self {
        PathDocument {
            format_version: FORMAT_VERSION,
            family: corner.map_or("custom", |c| c.family_name()).to_string(),
            slice_kind: path.kind,
            epsilon: path.epsilon,
            n_t: path.n_t,
            t_grid: (0..path.len()).map(|k| path.t(k)).collect(),
            slices: (0..path.len()).map(|k| path.raw(k).to_vec()).collect(),
            profile: corner.cloned(),
            delta: None,
        }
    }

    pub fn from_mollified(m: &MollifiedPath, corner: Option<&CornerMetric>) -> Self {
        let w = m.width();
        PathDocument {
            delta: Some(m.config.delta),
            t_grid: m.s_grid.clone(),
            slices: m.gamma.chunks(w).map(<[f64]>::to_vec).collect(),
            ..PathDocument::from_path(&m.base, corner)
        }
    }

    /// Rebuilds the collar path; mollified documents are rejected.
    pub fn to_metric_path(&self) -> Result<MetricPath> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::Config(format!("unsupported path format version {}", self.format_version)));
        }
        if self.delta.is_some() {
            return Err(CliError::Config("a mollified path document is not a collar path".into()));
        }
        if self.slices.len() != self.n_t + 1 || self.t_grid.len() != self.n_t + 1 {
            return Err(CliError::Config("path document length does not match n_t".into()));
        }
        let values: Vec<f64> = self.slices.iter().flatten().copied().collect();
        let path = MetricPath::from_samples(self.slice_kind, self.epsilon, self.n_t, values)?;
        let h = path.spacing();
        if self.t_grid.iter().enumerate().any(|(k, &t)| (t - path.t(k)).abs() > 1e-12 * h) {
            return Err(CliError::Config("t_grid is not the uniform collar grid".into()));
        }
        Ok(path)
    }

    pub fn write(&self, file: &Path) -> Result<()> {
        let f = fs::File::create(file).map_err(CliError::io(file))?;
        serde_json::to_writer(BufWriter::new(f), self)?;
        Ok(())
    }

    pub fn read(file: &Path) -> Result<Self> {
        let text = fs::read_to_string(file).map_err(CliError::io(file))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Writes `rows` as `<dir>/<stem>.csv` or `<dir>/<stem>.json`.
pub fn write_table<T: Serialize>(dir: &Path, stem: &str, rows: &[T], format: Format) -> Result<PathBuf> {
    match format {
        Format::Csv => {
            let file = dir.join(format!("{stem}.csv"));
            let mut w = csv::Writer::from_path(&file)?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush().map_err(CliError::io(&file))?;
            Ok(file)
        }
        Format::Json => {
            let file = dir.join(format!("{stem}.json"));
            let f = fs::File::create(&file).map_err(CliError::io(&file))?;
            serde_json::to_writer_pretty(BufWriter::new(f), rows)?;
            Ok(file)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaRow {
    pub delta: f64,
    pub lipschitz_l: f64,
    pub c0_deviation: f64,
    pub c0_bound: f64,
    pub outside_deviation: f64,
    pub outside_bit_identical: bool,
    pub c1_modulus: f64,
    pub d1_fd_error_h: f64,
    pub d1_fd_error_h2: f64,
    pub d1_fd_order: f64,
    pub d1_fd_noise: f64,
    pub d2_fd_error_h: f64,
    pub d2_fd_error_h2: f64,
    pub d2_fd_order: f64,
    pub d2_fd_noise: f64,
    pub regime_overlap: f64,
    pub eigen_margin: f64,
    pub quadrature_error: f64,
}

impl From<&LemmaReport> for LemmaRow {
    fn from(l: &LemmaReport) -> Self {
        LemmaRow {
            delta: l.delta,
            lipschitz_l: l.lipschitz_l,
            c0_deviation: l.c0_deviation,
            c0_bound: l.c0_bound,
            outside_deviation: l.outside_deviation,
            outside_bit_identical: l.outside_bit_identical,
            c1_modulus: l.c1_modulus,
            d1_fd_error_h: l.d1_fd_errors[0],
            d1_fd_error_h2: l.d1_fd_errors[1],
            d1_fd_order: l.d1_fd_order,
            d1_fd_noise: l.d1_fd_noise,
            d2_fd_error_h: l.d2_fd_errors[0],
            d2_fd_error_h2: l.d2_fd_errors[1],
            d2_fd_order: l.d2_fd_order,
            d2_fd_noise: l.d2_fd_noise,
            regime_overlap: l.regime_overlap,
            eigen_margin: l.eigen_margin,
            quadrature_error: l.quadrature_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub delta: f64,
    pub sup_outer: f64,
    pub sup_inner_residual: f64,
    pub sup_total: f64,
    pub min_line_integral: f64,
    pub max_line_integral: f64,
    pub min_h_jump: f64,
    pub max_h_jump: f64,
    pub line_integral_error: f64,
}

impl From<&ConcentrationReport> for ConcentrationRow {
    fn from(c: &ConcentrationReport) -> Self {
        ConcentrationRow {
            delta: c.delta,
            sup_outer: c.band_sup_outer,
            sup_inner_residual: c.band_sup_inner_residual,
            sup_total: c.band_sup_total,
            min_line_integral: c.min_line_integral(),
            max_line_integral: c.max_line_integral(),
            min_h_jump: c.min_h_jump(),
            max_h_jump: c.max_h_jump(),
            line_integral_error: c.line_integral_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassRow {
    pub delta: f64,
    pub m_base: f64,
    pub m_tilde: f64,
    pub m_tilde_predicted: f64,
    pub m_hat: Option<f64>,
    pub m_hat_predicted: Option<f64>,
    pub a_decay: f64,
    pub a_integral: f64,
    pub a_shooting: Option<f64>,
    pub b_decay: f64,
    pub b_integral: f64,
    pub energy_first: f64,
    pub energy_second: f64,
    pub smallness: f64,
    pub sup_u_minus_1: f64,
    pub min_v: f64,
    pub max_v: f64,
    pub first_identity_stated: f64,
    pub first_identity_consistent: f64,
    pub second_identity_stated: Option<f64>,
    pub second_identity_consistent: Option<f64>,
    pub mass_drift: f64,
}

impl MassRow {
    pub fn new(delta: f64, p: &PipelineResult) -> Self {
        let m = &p.masses;
        MassRow {
            delta,
            m_base: m.m_base,
            m_tilde: m.m_tilde,
            m_tilde_predicted: m.m_tilde_predicted,
            m_hat: m.m_hat,
            m_hat_predicted: m.m_hat_predicted,
            a_decay: p.first.a_decay,
            a_integral: p.first.a_integral,
            a_shooting: p.first.a_shooting,
            b_decay: p.second.a_decay,
            b_integral: p.second.a_integral,
            energy_first: p.first.energy,
            energy_second: p.second.energy,
            smallness: p.first.smallness,
            sup_u_minus_1: p.first.sup_deviation,
            min_v: p.second.min_u,
            max_v: p.second.max_u,
            first_identity_stated: m.first_identity_stated,
            first_identity_consistent: m.first_identity_consistent,
            second_identity_stated: m.second_identity_stated,
            second_identity_consistent: m.second_identity_consistent,
            mass_drift: m.max_drift,
        }
    }
}

/// One node of a conformal solve, for plotting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionRow {
    pub s: f64,
    pub r: f64,
    pub u: f64,
    pub potential: f64,
}

pub fn solution_rows(metric: &SphericalMetric, sol: &ConformalSolution) -> Vec<SolutionRow> {
    (0..metric.len())
        .map(|i| SolutionRow { s: metric.s_grid[i], r: metric.r[i], u: sol.u[i], potential: sol.potential[i] })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub scenario: String,
    pub criterion: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckRow {
    pub fn new(scenario: &str, c: &Check) -> Self {
        CheckRow {
            scenario: scenario.to_string(),
            criterion: c.criterion,
            name: c.name.clone(),
            passed: c.passed,
            detail: c.detail.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub level: &'static str,
    pub n_t: usize,
    pub sigma_grid: usize,
    pub scalar: f64,
    pub gauss: f64,
    pub evolution: f64,
}

pub fn oracle_rows(o: &OracleEquivalence) -> Vec<OracleRow> {
    let mut rows: Vec<OracleRow> = o
        .levels
        .iter()
        .map(|l| OracleRow {
            level: "plain",
            n_t: l.n_t,
            sigma_grid: l.sigma_grid,
            scalar: l.errors.scalar,
            gauss: l.errors.gauss,
            evolution: l.errors.evolution,
        })
        .collect();
    if let (Some(e), Some(last)) = (o.extrapolated, o.levels.last()) {
        rows.push(OracleRow {
            level: "extrapolated",
            n_t: last.n_t,
            sigma_grid: last.sigma_grid,
            scalar: e.scalar,
            gauss: e.gauss,
            evolution: e.evolution,
        });
    }
    rows
}

/// Collar curvature per slice, reduced over `Σ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureRow {
    pub index: usize,
    pub t: f64,
    pub side: &'static str,
    pub min_scalar: f64,
    pub max_scalar: f64,
    pub min_mean: f64,
    pub max_mean: f64,
    pub min_gauss: f64,
    pub max_gauss: f64,
    pub max_a_squared: f64,
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

pub fn curvature_rows(field: &CurvatureField) -> Vec<CurvatureRow> {
    field
        .slices
        .iter()
        .map(|s| {
            let (min_scalar, max_scalar) = min_max(&s.scalar);
            let (min_mean, max_mean) = min_max(&s.mean);
            let (min_gauss, max_gauss) = min_max(&s.gauss);
            CurvatureRow {
                index: s.index,
                t: s.t,
                side: match s.side {
                    Side::Minus => "minus",
                    Side::Plus => "plus",
                },
                min_scalar,
                max_scalar,
                min_mean,
                max_mean,
                min_gauss,
                max_gauss,
                max_a_squared: min_max(&s.a_squared).1,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use cornerpmt_core::collar::build_collar;
    use cornerpmt_core::corner::{SphericalCorner, TorusCorner};

    #[test]
    fn path_document_round_trips_bit_exactly() {
        let c = CornerMetric::Spherical(SphericalCorner::flat_in_schwarzschild(4.0, 0.5).unwrap());
        let p = build_collar(&c, 1.0, 64, 0).unwrap();
        let doc = PathDocument::from_path(&p, Some(&c));
        let text = serde_json::to_string(&doc).unwrap();
        let back: PathDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_metric_path().unwrap(), p);
        assert!(text.contains("\"family\":\"spherical\""));
    }

    #[test]
    fn torus_document_keeps_components() {
        let c = CornerMetric::TorusCollar(TorusCorner::kinked(8));
        let p = build_collar(&c, 1.0, 16, 8).unwrap();
        let doc = PathDocument::from_path(&p, Some(&c));
        assert_eq!(doc.slices[0].len(), 3 * 64);
        assert_eq!(doc.to_metric_path().unwrap(), p);
    }

    #[test]
    fn mollified_document_is_not_a_collar() {
        let c = CornerMetric::Spherical(SphericalCorner::flat_in_schwarzschild(4.0, 0.5).unwrap());
        let p = build_collar(&c, 1.0, 64, 0).unwrap();
        let cfg = cornerpmt_core::mollifier::MollifierConfig { delta: 0.1, ..Default::default() };
        let m = cornerpmt_core::mollifier::mollify_path(&p, &cfg).unwrap();
        let doc = PathDocument::from_mollified(&m, Some(&c));
        assert_eq!(doc.delta, Some(0.1));
        assert_eq!(doc.t_grid.len(), doc.slices.len());
        assert!(doc.to_metric_path().is_err());
    }
}
