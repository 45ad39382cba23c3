//! Shipped geometries, per-δ runs and the sweep verdicts.
//!
//! A [`Scenario`] fixes a corner metric, grids, a decreasing δ sweep and every
//! tolerance. [`prepare`] builds the collar once, [`run_delta`] mollifies and
//! measures one sweep member, and [`sweep_report`] reduces the members to a
//! list of [`Check`]s tagged with the acceptance criterion they belong to.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // std inherent methods take precedence when std is linked
use num_traits::Float;

use crate::collar::{build_collar, second_fundamental_form, MetricPath};
use crate::concentration::{
    concentration_profile, distributional_scalar_curvature, mean_curvature_jump, ConcentrationReport,
    DistributionalLimit, MeanCurvatureJump,
};
use crate::corner::{CornerMetric, Side, SphericalCorner, TorusCorner};
use crate::equivalence::{oracle_equivalence, OracleEquivalence, SAMPLE_POSITIONS};
use crate::extrapolate::{extrapolate_sweep, fit_order, Extrapolation};
use crate::mollifier::{mollify_path, verify_lemmas, LemmaReport, MollifierConfig};
use crate::profile::RadialProfile;
use crate::spherical::{run_pipeline, PipelineOptions, PipelineResult, RadialGeometry};
use crate::{Error, Result};

/// Every threshold a sweep is judged against.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct Tolerances {
    /// `|γ_δ - γ|` allowed outside `|s| > δ/2`.
    pub outside: f64,
    /// Minimum fitted order of `max |γ_δ - γ|` against δ.
    pub c0_order: f64,
    /// Deviations below this count as exact when fitting orders.
    pub c0_floor: f64,
    /// Largest growth of band sups between consecutive sweep members.
    pub uniform_growth: f64,
    /// Band sups below this are treated as zero by the growth check.
    pub uniform_floor: f64,
    /// Error of the extrapolated line integral against `2 (H₋ - H₊)`.
    pub distributional: f64,
    /// `|A_decay - A_integral| ≤ decay_agreement (1 + |A_decay|)`.
    pub decay_agreement: f64,
    /// Error of `m(g̃_δ) = m(𝒢) + (n-1) A_δ`.
    pub mass_relation: f64,
    /// `m(g̃_δ) ≥ -pmt_floor`.
    pub pmt_floor: f64,
    /// Strict jump: extrapolated `m(g̃_δ) ≥ m(𝒢) - extrapolated_mass`.
    pub extrapolated_mass: f64,
    /// Minimum fitted order of `|A_δ|` against δ.
    pub decay_order: f64,
    /// `|A_δ|` below this on every member counts as vanishing.
    pub decay_floor: f64,
    /// Strict jump: `min_δ E_δ ≥ energy_floor_ratio · E_{δ_max}`.
    pub energy_floor_ratio: f64,
    /// No jump: `E_{δ_min} ≤ energy_vanishing`.
    pub energy_vanishing: f64,
    /// Roundoff allowance for sign conditions (`E ≥ 0`, monotone sups).
    pub roundoff: f64,
    /// Change of `A`, `B` when `s_max` doubles.
    pub s_max_shift: f64,
    /// Relative oracle agreement at the finest level.
    pub oracle_relative: f64,
    /// Minimum fitted order of the plain oracle errors.
    pub oracle_order: f64,
    /// Oracle levels with relative error below this are roundoff-limited and
    /// left out of the order fit.
    pub oracle_order_floor: f64,
    /// Absolute error target of the band line integrals.
    pub line_integral: f64,
    /// Jumps within this of zero count as equality in condition (H).
    pub jump: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            outside: 1e-10,
            c0_order: 1.8,
            c0_floor: 1e-10,
            uniform_growth: 1.5,
            uniform_floor: 1e-8,
            distributional: 1e-3,
            decay_agreement: 1e-6,
            mass_relation: 1e-8,
            pmt_floor: 1e-6,
            extrapolated_mass: 1e-3,
            decay_order: 1.0,
            decay_floor: 1e-12,
            energy_floor_ratio: 0.5,
            energy_vanishing: 1e-4,
            roundoff: 1e-12,
            s_max_shift: 1e-6,
            oracle_relative: 1e-6,
            oracle_order: 1.9,
            oracle_order_floor: 1e-7,
            line_integral: 1e-9,
            jump: 1e-9,
        }
    }
}

/// Oracle comparison grids. `levels` double in `n_t` (and the torus grid).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleSettings {
    pub levels: Vec<(usize, usize)>,
    /// Sample positions in units of `ε`, nodes of every level.
    pub positions: Vec<f64>,
    /// Richardson-extrapolate the oracle over the levels.
    pub extrapolate: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scenario {
    pub name: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub description: String,
    pub corner: CornerMetric,
    /// Collar half-width parameter; the path covers `[-2ε, 2ε]`.
    pub epsilon: f64,
    pub n_t: usize,
    /// Torus grid size; ignored by spherical corners.
    #[cfg_attr(feature = "serde", serde(default))]
    pub sigma_grid: usize,
    /// Strictly decreasing.
    pub delta_sweep: Vec<f64>,
    /// Kernel settings; `delta` is overwritten by each sweep member.
    #[cfg_attr(feature = "serde", serde(default))]
    pub mollifier: MollifierConfig,
    /// Conformal and mass pipeline, spherical corners only.
    #[cfg_attr(feature = "serde", serde(default))]
    pub pipeline: Option<PipelineOptions>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub oracle: Option<OracleSettings>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub tolerances: Tolerances,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::InvalidConfig("scenario needs a name".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!("{}: epsilon must be positive", self.name)));
        }
        if self.delta_sweep.is_empty() {
            return Err(Error::InvalidConfig(format!("{}: empty delta sweep", self.name)));
        }
        if self.delta_sweep.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidConfig(format!("{}: delta sweep must be strictly decreasing", self.name)));
        }
        for &d in &self.delta_sweep {
            self.config(d).validate(self.epsilon)?;
        }
        match self.corner {
            CornerMetric::TorusCollar(_) => {
                if self.sigma_grid < 5 {
                    return Err(Error::InvalidConfig(format!("{}: torus grid must have at least 5 nodes", self.name)));
                }
                if self.pipeline.is_some() {
                    return Err(Error::InvalidConfig(format!(
                        "{}: the torus family is collar-local and has no mass pipeline",
                        self.name
                    )));
                }
            }
            CornerMetric::Spherical(_) => {}
        }
        Ok(())
    }

    pub fn config(&self, delta: f64) -> MollifierConfig {
        MollifierConfig { delta, ..self.mollifier }
    }

    pub fn spherical(&self) -> Option<&SphericalCorner> {
        match &self.corner {
            CornerMetric::Spherical(c) => Some(c),
            CornerMetric::TorusCollar(_) => None,
        }
    }

    /// Mass of the unsmoothed geometry, read off the exterior profile.
    pub fn expected_mass(&self) -> Option<f64> {
        self.spherical().and_then(|c| c.exterior_mass())
    }
}

fn spherical_scenario(name: &str, description: &str, corner: SphericalCorner) -> Scenario {
    Scenario {
        name: name.to_string(),
        description: description.to_string(),
        corner: CornerMetric::Spherical(corner),
        epsilon: 1.0,
        n_t: 4000,
        sigma_grid: 0,
        delta_sweep: vec![0.1, 0.05, 0.025],
        mollifier: MollifierConfig::default(),
        pipeline: Some(PipelineOptions::default()),
        oracle: Some(OracleSettings {
            levels: vec![(1000, 0), (2000, 0), (4000, 0)],
            positions: SAMPLE_POSITIONS.to_vec(),
            extrapolate: false,
        }),
        tolerances: Tolerances::default(),
    }
}

/// Proper distance from the Schwarzschild minimal sphere to areal radius `r`.
pub fn throat_distance(mass: f64, r: f64) -> f64 {
    let a = r - 2.0 * mass;
    (r * a).sqrt() + 2.0 * mass * ((r.sqrt() + a.sqrt()) / (2.0 * mass).sqrt()).ln()
}

fn flat_flat() -> Result<Scenario> {
    let flat = RadialProfile::Flat { anchor_s: 0.0, anchor_r: 0.0 };
    let c = SphericalCorner::new(3, 4.0, flat, flat)?;
    Ok(spherical_scenario("flat_flat", "Euclidean space cut along the sphere of radius 4", c))
}

fn flat_in_schwarzschild(radius: f64, mass: f64) -> Result<Scenario> {
    let c = SphericalCorner::flat_in_schwarzschild(radius, mass)?;
    let name = format!("flat_in_schwarzschild_R{radius}_m{mass}");
    let desc = format!("flat ball of areal radius {radius} glued to a Schwarzschild exterior of mass {mass}");
    Ok(spherical_scenario(&name, &desc, c))
}

fn negative_mass() -> Result<Scenario> {
    let c = SphericalCorner::flat_in_schwarzschild(4.0, -0.5)?;
    Ok(spherical_scenario(
        "negative_mass",
        "flat ball of areal radius 4 glued to a Schwarzschild exterior of mass -0.5",
        c,
    ))
}

fn equal_h() -> Result<Scenario> {
    let m = 0.5;
    let p = RadialProfile::SchwarzschildThroat { mass: m };
    let c = SphericalCorner::new(3, throat_distance(m, 4.0), p, p)?;
    Ok(spherical_scenario(
        "equal_H",
        "Schwarzschild mass 0.5 from its minimal sphere, cut at areal radius 4 (no jump)",
        c,
    ))
}

fn torus_kink() -> Scenario {
    Scenario {
        name: "torus_kink".into(),
        description: "conformally perturbed flat torus collar with a mean-curvature kink".into(),
        corner: CornerMetric::TorusCollar(TorusCorner::kinked(64)),
        epsilon: 1.0,
        n_t: 200,
        sigma_grid: 64,
        delta_sweep: vec![0.1, 0.05, 0.025],
        mollifier: MollifierConfig::default(),
        pipeline: None,
        oracle: Some(OracleSettings {
            levels: vec![(100, 32), (200, 64), (400, 128)],
            positions: vec![-1.0, -0.6, 0.6, 1.0],
            extrapolate: true,
        }),
        tolerances: Tolerances::default(),
    }
}

/// The shipped scenario set, in a fixed order.
pub fn shipped() -> Result<Vec<Scenario>> {
    Ok(vec![
        flat_flat()?,
        flat_in_schwarzschild(4.0, 0.5)?,
        flat_in_schwarzschild(4.0, 0.1)?,
        flat_in_schwarzschild(10.0, 0.5)?,
        flat_in_schwarzschild(10.0, 0.1)?,
        negative_mass()?,
        equal_h()?,
        torus_kink(),
    ])
}

/// Shipped scenario by name; `flat_in_schwarzschild` alone means `R = 4, m = 0.5`.
pub fn shipped_by_name(name: &str) -> Result<Scenario> {
    let key = if name == "flat_in_schwarzschild" { "flat_in_schwarzschild_R4_m0.5" } else { name };
    shipped()?
        .into_iter()
        .find(|s| s.name == key)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown scenario `{name}`")))
}

/// Condition (H) on the unsmoothed corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Hypothesis {
    /// `H₋ > H₊` somewhere and `H₋ ≥ H₊` everywhere.
    Strict,
    /// `H₋ = H₊` everywhere.
    Equal,
    /// `H₋ < H₊` somewhere.
    Violated,
}

impl Hypothesis {
    pub fn holds(self) -> bool {
        self != Hypothesis::Violated
    }

    pub fn annotation(self) -> Option<&'static str> {
        match self {
            Hypothesis::Violated => Some(
                "hypothesis (H) fails: the positive mass statement does not apply and a negative mass is expected",
            ),
            _ => None,
        }
    }
}

/// The collar and its corner data, shared by all sweep members.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub path: MetricPath,
    pub jump: MeanCurvatureJump,
    /// `H₋ - H₊` per `Σ` node from the closed-form sides.
    pub closed_form_jump: Vec<f64>,
    pub hypothesis: Hypothesis,
    /// `sup |A₋ - A₊|` at `t = 0`.
    pub second_fundamental_form_gap: f64,
}

fn closed_form_jump(corner: &CornerMetric, sigma_grid: usize) -> Result<Vec<f64>> {
    match corner {
        CornerMetric::Spherical(c) => Ok(vec![c.mean_curvature(Side::Minus)? - c.mean_curvature(Side::Plus)?]),
        CornerMetric::TorusCollar(t) => {
            let n = sigma_grid;
            let h = 2.0 * core::f64::consts::PI / n as f64;
            let mut out = Vec::with_capacity(n * n);
            for j in 0..n {
                for i in 0..n {
                    let (x1, x2) = (i as f64 * h, j as f64 * h);
                    out.push(t.mean_curvature(Side::Minus, x1, x2) - t.mean_curvature(Side::Plus, x1, x2));
                }
            }
            Ok(out)
        }
    }
}

pub fn prepare(s: &Scenario) -> Result<Prepared> {
    s.validate()?;
    let path = build_collar(&s.corner, s.epsilon, s.n_t, s.sigma_grid)?;
    let jump = mean_curvature_jump(&path, s.tolerances.jump)?;
    let hypothesis = if jump.violated_somewhere {
        Hypothesis::Violated
    } else if jump.strict_somewhere {
        Hypothesis::Strict
    } else {
        Hypothesis::Equal
    };
    let c = path.corner_index();
    let am = second_fundamental_form(&path, c, Side::Minus)?;
    let ap = second_fundamental_form(&path, c, Side::Plus)?;
    Ok(Prepared {
        closed_form_jump: closed_form_jump(&s.corner, s.sigma_grid)?,
        second_fundamental_form_gap: am.sup_distance(&ap),
        path,
        jump,
        hypothesis,
    })
}

/// Everything measured for one δ.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeltaReport {
    pub delta: f64,
    pub lemma: LemmaReport,
    pub concentration: ConcentrationReport,
    pub pipeline: Option<PipelineResult>,
}

pub fn run_delta(s: &Scenario, prep: &Prepared, delta: f64) -> Result<DeltaReport> {
    let m = mollify_path(&prep.path, &s.config(delta))?;
    let lemma = verify_lemmas(&m)?;
    let concentration = concentration_profile(&m, s.tolerances.line_integral)?;
    let pipeline = match (&s.pipeline, s.spherical()) {
        (Some(opts), Some(corner)) => {
            let geom = RadialGeometry::new(corner, Some(&m))?;
            Some(run_pipeline(&geom, opts)?)
        }
        _ => None,
    };
    Ok(DeltaReport { delta, lemma, concentration, pipeline })
}

pub fn run_oracle(s: &Scenario) -> Result<Option<OracleEquivalence>> {
    match &s.oracle {
        Some(o) => Ok(Some(oracle_equivalence(&s.corner, s.epsilon, &o.levels, &o.positions, o.extrapolate)?)),
        None => Ok(None),
    }
}

/// One pass/fail verdict.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Check {
    pub name: String,
    /// Acceptance criterion number, `1..=8`.
    pub criterion: u8,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, criterion: u8, passed: bool, detail: String) -> Self {
        Check { name: name.to_string(), criterion, passed, detail }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepReport {
    pub scenario: String,
    pub hypothesis: Hypothesis,
    pub annotation: Option<String>,
    pub deltas: Vec<f64>,
    pub c0_order: Option<f64>,
    pub distributional: DistributionalLimit,
    /// `max |limit - 2 (H₋ - H₊)|` with the closed-form jump.
    pub distributional_error: f64,
    pub decay_order: Option<f64>,
    pub extrapolated_mass: Option<Extrapolation>,
    pub energies: Vec<f64>,
    pub oracle: Option<OracleEquivalence>,
    pub checks: Vec<Check>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn max_growth(values: &[f64], floor: f64) -> f64 {
    values
        .windows(2)
        .filter(|w| w[0].max(w[1]) > floor)
        .map(|w| w[1] / w[0].max(floor))
        .fold(0.0, f64::max)
}

fn all_members(reports: &[DeltaReport], f: impl Fn(&DeltaReport) -> bool) -> bool {
    reports.iter().all(f)
}

fn list(values: impl Iterator<Item = f64>) -> String {
    let v: Vec<String> = values.map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", v.join(", "))
}

fn order_text(order: Option<f64>) -> String {
    order.map_or_else(|| "n/a".into(), |p| format!("{p:.2}"))
}

fn lemma_checks(s: &Scenario, reports: &[DeltaReport], out: &mut Vec<Check>) -> Option<f64> {
    let t = &s.tolerances;
    out.push(Check::new(
        "mollifier_outside_band",
        1,
        all_members(reports, |r| r.lemma.outside_bit_identical && r.lemma.outside_deviation <= t.outside),
        format!("max |γ_δ - γ| for |s| > δ/2: {}", list(reports.iter().map(|r| r.lemma.outside_deviation))),
    ));
    out.push(Check::new(
        "mollifier_c0_bound",
        1,
        all_members(reports, |r| r.lemma.c0_ok()),
        format!(
            "max |γ_δ - γ| {} vs L δ² {}",
            list(reports.iter().map(|r| r.lemma.c0_deviation)),
            list(reports.iter().map(|r| r.lemma.c0_bound))
        ),
    ));
    out.push(Check::new(
        "mollifier_derivative_formulas",
        1,
        all_members(reports, |r| r.lemma.fd_ok() && r.lemma.overlap_ok()),
        format!(
            "FD orders d1 {} d2 {}, regime overlap {}",
            list(reports.iter().map(|r| r.lemma.d1_fd_order)),
            list(reports.iter().map(|r| r.lemma.d2_fd_order)),
            list(reports.iter().map(|r| r.lemma.regime_overlap))
        ),
    ));
    out.push(Check::new(
        "mollifier_metric_cone",
        1,
        all_members(reports, |r| r.lemma.eigen_margin >= -t.roundoff),
        format!("eigenvalue margin {}", list(reports.iter().map(|r| r.lemma.eigen_margin))),
    ));
    let deltas: Vec<f64> = reports.iter().map(|r| r.delta).collect();
    let dev: Vec<f64> = reports.iter().map(|r| r.lemma.c0_deviation).collect();
    let order = fit_order(&deltas, &dev);
    let exact = dev.iter().all(|&d| d <= t.c0_floor);
    out.push(Check::new(
        "mollifier_c0_order",
        1,
        exact || order.is_some_and(|p| p >= t.c0_order),
        format!("fitted order {} of max |γ_δ - γ| {}", order_text(order), list(dev.iter().copied())),
    ));
    order
}

fn concentration_checks(
    s: &Scenario,
    prep: &Prepared,
    reports: &[DeltaReport],
    out: &mut Vec<Check>,
) -> Result<(DistributionalLimit, f64)> {
    let t = &s.tolerances;
    let conc: Vec<ConcentrationReport> = reports.iter().map(|r| r.concentration.clone()).collect();
    if prep.hypothesis == Hypothesis::Equal {
        let tot: Vec<f64> = conc.iter().map(|c| c.band_sup_total).collect();
        let g = max_growth(&tot, t.uniform_floor);
        out.push(Check::new(
            "band_sup_bounded",
            2,
            g <= t.uniform_growth,
            format!("sup |R_δ| over the band {} (growth {g:.3})", list(tot.iter().copied())),
        ));
    } else {
        let outer: Vec<f64> = conc.iter().map(|c| c.band_sup_outer).collect();
        let inner: Vec<f64> = conc.iter().map(|c| c.band_sup_inner_residual).collect();
        let (go, gi) = (max_growth(&outer, t.uniform_floor), max_growth(&inner, t.uniform_floor));
        out.push(Check::new(
            "band_sup_uniform",
            2,
            go <= t.uniform_growth && gi <= t.uniform_growth,
            format!(
                "outer {} (growth {go:.3}), inner residual {} (growth {gi:.3})",
                list(outer.iter().copied()),
                list(inner.iter().copied())
            ),
        ));
    }
    let dist = distributional_scalar_curvature(&conc)?;
    let err = dist
        .limit
        .iter()
        .zip(&prep.closed_form_jump)
        .fold(0.0f64, |m, (l, j)| m.max((l - 2.0 * j).abs()));
    let head = dist.limit.first().copied().unwrap_or(0.0);
    out.push(Check::new(
        "distributional_limit",
        3,
        err <= t.distributional,
        format!(
            "extrapolated ∫R_δ dt {head:.6} (first node), 2 (H₋ - H₊) {:.6}, max error {err:.3e}",
            2.0 * prep.closed_form_jump[0]
        ),
    ));
    Ok((dist, err))
}

struct PipelineOutcome {
    decay_order: Option<f64>,
    extrapolated: Option<Extrapolation>,
    energies: Vec<f64>,
}

fn pipeline_checks(
    s: &Scenario,
    prep: &Prepared,
    reports: &[DeltaReport],
    runs: &[&PipelineResult],
    out: &mut Vec<Check>,
) -> Result<PipelineOutcome> {
    let t = &s.tolerances;
    let deltas: Vec<f64> = reports.iter().map(|r| r.delta).collect();
    let agree = |a: f64, b: f64| (a - b).abs() <= t.decay_agreement * (1.0 + a.abs());
    out.push(Check::new(
        "decay_coefficient_agreement",
        4,
        runs.iter().all(|p| agree(p.first.a_decay, p.first.a_integral) && agree(p.second.a_decay, p.second.a_integral)),
        format!(
            "A_decay - A_integral {}, B_decay - B_integral {}",
            list(runs.iter().map(|p| p.first.a_decay - p.first.a_integral)),
            list(runs.iter().map(|p| p.second.a_decay - p.second.a_integral))
        ),
    ));
    let shot_ok = |c: &crate::spherical::ConformalSolution| c.a_shooting.map_or(true, |a| agree(c.a_integral, a));
    out.push(Check::new(
        "shooting_crosscheck",
        4,
        runs.iter().all(|p| shot_ok(&p.first) && shot_ok(&p.second)),
        format!(
            "sup |u_FD - u_shoot| {}, sup |v_FD - v_shoot| {}",
            list(runs.iter().map(|p| p.first.shooting_deviation.unwrap_or(0.0))),
            list(runs.iter().map(|p| p.second.shooting_deviation.unwrap_or(0.0)))
        ),
    ));
    let sups: Vec<f64> = runs.iter().map(|p| p.first.sup_deviation).collect();
    out.push(Check::new(
        "sup_estimate_decreasing",
        4,
        sups.windows(2).all(|w| w[1] <= w[0] + t.roundoff),
        format!("‖u_δ - 1‖_∞ {}", list(sups.iter().copied())),
    ));
    let expected = s.expected_mass().unwrap_or(0.0);
    let n1 = (s.spherical().map_or(3, |c| c.ambient_dim) - 1) as f64;
    let rel: Vec<f64> = runs
        .iter()
        .map(|p| {
            let m = &p.masses;
            (m.m_tilde - (expected + n1 * p.first.a_decay)).abs().max((m.m_base - expected).abs())
        })
        .collect();
    out.push(Check::new(
        "mass_shift_relation",
        4,
        rel.iter().all(|&e| e <= t.mass_relation),
        format!(
            "m(g̃_δ) {} vs m(𝒢) = {expected} plus (n-1) A_δ, max error {}",
            list(runs.iter().map(|p| p.masses.m_tilde)),
            list(rel.iter().copied())
        ),
    ));
    let a: Vec<f64> = runs.iter().map(|p| p.first.a_integral).collect();
    let decay_order = fit_order(&deltas, &a);
    let vanishing = a.iter().all(|x| x.abs() <= t.decay_floor);
    // with (H) violated R₋ keeps a δ-independent negative part and A_δ does not vanish
    if prep.hypothesis.holds() {
        out.push(Check::new(
            "decay_coefficient_vanishes",
            4,
            vanishing || decay_order.is_some_and(|p| p >= t.decay_order),
            format!("A_δ {} fitted order {}", list(a.iter().copied()), order_text(decay_order)),
        ));
    }
    let shifts: Vec<(f64, f64)> = runs.iter().filter_map(|p| p.s_max_shift).collect();
    if !shifts.is_empty() {
        out.push(Check::new(
            "outer_boundary_sensitivity",
            4,
            shifts.iter().all(|&(da, db)| da < t.s_max_shift && db < t.s_max_shift),
            format!(
                "|ΔA| {} |ΔB| {} under doubled s_max",
                list(shifts.iter().map(|x| x.0)),
                list(shifts.iter().map(|x| x.1))
            ),
        ));
    }
    out.push(Check::new(
        "maximum_principle",
        4,
        runs.iter().all(|p| p.first.min_u > 0.0 && p.second.min_u > 0.0 && p.second.max_u <= 1.0 + 1e-10),
        format!(
            "min u {} min v {} max v {}",
            list(runs.iter().map(|p| p.first.min_u)),
            list(runs.iter().map(|p| p.second.min_u)),
            list(runs.iter().map(|p| p.second.max_u))
        ),
    ));
    let mt: Vec<f64> = runs.iter().map(|p| p.masses.m_tilde).collect();
    let extrapolated = if mt.len() >= 2 { Some(extrapolate_sweep(&deltas, &mt, 1.0)?) } else { None };
    if prep.hypothesis.holds() {
        out.push(Check::new(
            "pmt_each_delta",
            5,
            mt.iter().all(|&m| m >= -t.pmt_floor),
            format!("m(g̃_δ) {}", list(mt.iter().copied())),
        ));
        let lim = extrapolated.as_ref().map_or(f64::NAN, |e| e.limit);
        let ok = if prep.hypothesis == Hypothesis::Strict {
            lim >= expected - t.extrapolated_mass && lim > 0.0
        } else {
            lim >= -t.pmt_floor
        };
        out.push(Check::new(
            "pmt_extrapolated",
            5,
            ok,
            format!("extrapolated m(g̃_δ) {lim:.9} (m(𝒢) = {expected})"),
        ));
    }
    let energies: Vec<f64> = runs.iter().map(|p| p.second.energy).collect();
    out.push(Check::new(
        "energy_nonnegative",
        6,
        energies.iter().all(|&e| e >= -t.roundoff) && runs.iter().all(|p| p.first.energy.is_finite()),
        format!("second-deformation energy {}", list(energies.iter().copied())),
    ));
    match prep.hypothesis {
        Hypothesis::Strict => {
            let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
            out.push(Check::new(
                "energy_floor",
                6,
                lo >= t.energy_floor_ratio * energies[0],
                format!("min energy {lo:.6} vs {} × largest-δ energy {:.6}", t.energy_floor_ratio, energies[0]),
            ));
        }
        Hypothesis::Equal => {
            let last = energies[energies.len() - 1];
            out.push(Check::new(
                "energy_vanishes",
                6,
                last <= t.energy_vanishing,
                format!("energy at smallest δ {last:.3e}"),
            ));
        }
        Hypothesis::Violated => {}
    }
    Ok(PipelineOutcome { decay_order, extrapolated, energies })
}

/// Criterion 7 verdicts for one oracle comparison, appended to `out`.
pub fn oracle_checks(s: &Scenario, o: &OracleEquivalence, out: &mut Vec<Check>) {
    let t = &s.tolerances;
    let fin = o.finest();
    let order_of = |e: fn(&crate::equivalence::IdentityErrors) -> f64| {
        let (h, err): (Vec<f64>, Vec<f64>) = o
            .levels
            .iter()
            .filter(|l| e(&l.errors) > t.oracle_order_floor)
            .map(|l| (1.0 / l.n_t as f64, e(&l.errors)))
            .unzip();
        h.len() < 2 || fit_order(&h, &err).is_some_and(|p| p >= t.oracle_order)
    };
    let levels = list(o.levels.iter().map(|l| l.errors.scalar));
    out.push(Check::new(
        "oracle_scalar_curvature",
        7,
        fin.scalar <= t.oracle_relative && order_of(|e| e.scalar),
        format!("relative error {:.3e} at finest grid, plain levels {levels}, order {:.2}", fin.scalar, o.orders.scalar),
    ));
    out.push(Check::new(
        "oracle_gauss_identity",
        7,
        fin.gauss <= t.oracle_relative && order_of(|e| e.gauss),
        format!("relative error {:.3e}, order {:.2}", fin.gauss, o.orders.gauss),
    ));
    out.push(Check::new(
        "oracle_evolution_identity",
        7,
        fin.evolution <= t.oracle_relative && order_of(|e| e.evolution),
        format!(
            "relative error {:.3e}, plain levels {}, order {:.2}",
            fin.evolution,
            list(o.levels.iter().map(|l| l.errors.evolution)),
            o.orders.evolution
        ),
    ));
}

/// Reduces a sweep to convergence fits and checks.
pub fn sweep_report(
    s: &Scenario,
    prep: &Prepared,
    reports: &[DeltaReport],
    oracle: Option<OracleEquivalence>,
) -> Result<SweepReport> {
    if reports.len() < 3 {
        return Err(Error::Extrapolation("a sweep report needs at least three members"));
    }
    let mut checks = Vec::new();
    let c0_order = lemma_checks(s, reports, &mut checks);
    let (distributional, distributional_error) = concentration_checks(s, prep, reports, &mut checks)?;
    let runs: Vec<&PipelineResult> = reports.iter().filter_map(|r| r.pipeline.as_ref()).collect();
    let outcome = if runs.len() == reports.len() {
        Some(pipeline_checks(s, prep, reports, &runs, &mut checks)?)
    } else {
        None
    };
    if let Some(o) = &oracle {
        oracle_checks(s, o, &mut checks);
    }
    let (decay_order, extrapolated_mass, energies) = match outcome {
        Some(o) => (o.decay_order, o.extrapolated, o.energies),
        None => (None, None, Vec::new()),
    };
    Ok(SweepReport {
        scenario: s.name.clone(),
        hypothesis: prep.hypothesis,
        annotation: prep.hypothesis.annotation().map(String::from),
        deltas: reports.iter().map(|r| r.delta).collect(),
        c0_order,
        distributional,
        distributional_error,
        decay_order,
        extrapolated_mass,
        energies,
        oracle,
        checks,
    })
}

/// A whole scenario, run sequentially.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub prepared: Prepared,
    pub members: Vec<DeltaReport>,
    pub sweep: SweepReport,
}

pub fn run_scenario(s: &Scenario) -> Result<ScenarioRun> {
    let prepared = prepare(s)?;
    let members = s.delta_sweep.iter().map(|&d| run_delta(s, &prepared, d)).collect::<Result<Vec<_>>>()?;
    let oracle = run_oracle(s)?;
    let sweep = sweep_report(s, &prepared, &members, oracle)?;
    Ok(ScenarioRun { prepared, members, sweep })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_scenarios_validate() {
        let all = shipped().unwrap();
        assert_eq!(all.len(), 8);
        for s in &all {
            s.validate().unwrap();
        }
        assert_eq!(shipped_by_name("flat_in_schwarzschild").unwrap().name, "flat_in_schwarzschild_R4_m0.5");
        assert!(shipped_by_name("nope").is_err());
    }

    #[test]
    fn rejects_unsorted_sweeps() {
        let mut s = shipped_by_name("flat_flat").unwrap();
        s.delta_sweep = vec![0.05, 0.1, 0.025];
        assert!(s.validate().is_err());
        s.delta_sweep = vec![0.2, 0.1, 0.05];
        assert!(s.validate().is_err());
    }

    #[test]
    fn throat_distance_matches_profile() {
        let p = RadialProfile::SchwarzschildThroat { mass: 0.5 };
        let r = p.jet(throat_distance(0.5, 4.0)).unwrap().r;
        assert!((r - 4.0).abs() < 1e-10, "{r}");
    }

    #[test]
    fn hypothesis_classification() {
        let h = |name: &str| prepare(&shipped_by_name(name).unwrap()).unwrap().hypothesis;
        assert_eq!(h("flat_in_schwarzschild"), Hypothesis::Strict);
        assert_eq!(h("negative_mass"), Hypothesis::Violated);
        assert_eq!(h("equal_H"), Hypothesis::Equal);
        assert_eq!(h("flat_flat"), Hypothesis::Equal);
        let p = prepare(&shipped_by_name("equal_H").unwrap()).unwrap();
        assert!(p.second_fundamental_form_gap < 1e-5, "{}", p.second_fundamental_form_gap);
    }
}
