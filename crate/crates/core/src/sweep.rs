//! Property curves over parameter grids, threshold location by bisection on
//! property indicators, and assembly of threshold tables.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::activation::{sigma_min_with, ACTIVATION_TOL};
use crate::error::{Error, Result};
use crate::measures::bounds::{published_threshold, reference_bounds};
use crate::measures::cglmp::{cglmp_value, CGLMP_LOCAL_BOUND, CGLMP_MAX_DIM};
use crate::measures::chsh::{chsh_m, chsh_value, hidden_nonlocality, violation_entropy};
use crate::measures::entanglement::{concurrence, eof_from_concurrence};
use crate::measures::filter::filtered_chsh;
use crate::measures::teleport::{sa_isotropic, sa_value};
use crate::measures::{PropertyKind, PropertyValue};
use crate::qmat::DensityMatrix;
use crate::sdp::SdpOptions;
use crate::states::{Family, FamilySpec};

/// Largest local dimension for the activation program (side `4 d^2 <= 144`).
pub const TLF_MAX_DIM: usize = 6;
pub const CLOSED_FORM_TOL: f64 = 5e-4;
pub const SDP_TOL: f64 = 1e-3;
pub const PRESCAN_POINTS: usize = 20;

/// Concurrence above which a two-qubit state counts as entangled.
const ENTANGLEMENT_SLACK: f64 = 1e-12;
/// Gap target used when only the sign of the activation program matters.
const DECISION_GAP: f64 = 1e-8;

/// Errors unless `kind` can be evaluated on members of `spec`.
pub fn check_support(spec: &FamilySpec, kind: PropertyKind) -> Result<()> {
    let qubits = spec.d == 2;
    let ok = match kind {
        PropertyKind::Eof | PropertyKind::Chsh => qubits,
        PropertyKind::Hn => qubits || spec.family == Family::Werner,
        PropertyKind::Sa => qubits || spec.family == Family::Isotropic,
        PropertyKind::Tlf => spec.d <= TLF_MAX_DIM,
        PropertyKind::Cglmp => spec.d <= CGLMP_MAX_DIM,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "property {kind} is not available for {}",
            spec.label()
        )))
    }
}

fn value(kind: PropertyKind, value: f64, indicator: bool) -> PropertyValue {
    PropertyValue {
        kind,
        value,
        indicator,
    }
}

fn closed_form(
    spec: &FamilySpec,
    kind: PropertyKind,
    p: f64,
    rho: &DensityMatrix,
) -> Result<PropertyValue> {
    Ok(match kind {
        PropertyKind::Eof => {
            let conc = concurrence(rho)?;
            value(kind, eof_from_concurrence(conc), conc > ENTANGLEMENT_SLACK)
        }
        PropertyKind::Chsh => value(kind, chsh_value(rho)?, chsh_m(rho)? > 1.0),
        PropertyKind::Hn if spec.d > 2 => {
            let f = filtered_chsh(spec.d, p)?;
            value(kind, violation_entropy(f.m), f.indicator)
        }
        PropertyKind::Hn => match hidden_nonlocality(rho) {
            Ok(h) => value(kind, h.value, h.indicator),
            // no filter can produce correlations from a product state
            Err(Error::DegenerateCorrelation) => value(kind, 0.0, false),
            Err(e) => return Err(e),
        },
        PropertyKind::Sa => {
            let sa = if spec.family == Family::Isotropic {
                sa_isotropic(spec.d, p)?
            } else {
                sa_value(rho)?
            };
            value(kind, sa.value, sa.indicator)
        }
        PropertyKind::Cglmp => {
            let i = cglmp_value(rho)?;
            value(kind, i, i > CGLMP_LOCAL_BOUND)
        }
        PropertyKind::Tlf => unreachable!("handled by the solver path"),
    })
}

/// Solves the activation program, retrying once with four times the
/// iteration budget before giving up on the point.
fn activation(rho: &DensityMatrix, p: f64, sdp: &SdpOptions) -> Result<PropertyValue> {
    let first = sigma_min_with(rho, sdp.clone())?;
    let result = if first.witness.is_certified() {
        first
    } else {
        let retry = SdpOptions {
            max_iters: sdp.max_iters.saturating_mul(4),
            ..sdp.clone()
        };
        sigma_min_with(rho, retry)?
    };
    if !result.witness.is_certified() {
        return Err(Error::EvaluationFailed {
            p,
            reason: format!(
                "solver stopped with status {:?} after {} iterations (gap {:.3e})",
                result.witness.status,
                result.witness.iterations,
                result.witness.objective - result.witness.lower_bound
            ),
        });
    }
    Ok(value(PropertyKind::Tlf, result.sigma, result.activated))
}

/// Evaluates one property at one member of the family.
pub fn evaluate(
    spec: &FamilySpec,
    kind: PropertyKind,
    p: f64,
    sdp: &SdpOptions,
) -> Result<PropertyValue> {
    check_support(spec, kind)?;
    let rho = spec.state(p)?;
    match kind {
        PropertyKind::Tlf => activation(&rho, p, sdp),
        _ => closed_form(spec, kind, p, &rho),
    }
}

/// Solver settings for indicator-only evaluations: stop once the sign
/// relative to the activation tolerance is certified, and resolve points
/// near the crossing much more tightly than the value tolerance.
pub fn decision_options(base: &SdpOptions) -> SdpOptions {
    SdpOptions {
        tol_objective: base.tol_objective.min(DECISION_GAP),
        sign_threshold: Some(-ACTIVATION_TOL),
        ..base.clone()
    }
}

fn indicator(spec: &FamilySpec, kind: PropertyKind, p: f64, sdp: &SdpOptions) -> Result<bool> {
    Ok(evaluate(spec, kind, p, sdp)?.indicator)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissingPoint {
    pub p: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCurve {
    pub family: FamilySpec,
    pub property: PropertyKind,
    pub grid: Vec<f64>,
    /// `None` where the point is missing.
    pub values: Vec<Option<f64>>,
    pub indicators: Vec<Option<bool>>,
    pub missing: Vec<MissingPoint>,
}

impl PropertyCurve {
    /// Errors with the offending pair if a point with the property precedes
    /// one without it (missing points are skipped).
    pub fn check_monotone(&self) -> Result<()> {
        let mut last_true: Option<f64> = None;
        for (&p, ind) in self.grid.iter().zip(&self.indicators) {
            match (ind, last_true) {
                (Some(true), _) => last_true = Some(p),
                (Some(false), Some(p_true)) => {
                    return Err(Error::NonMonotone { p_true, p_false: p })
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// `steps` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|k| {
                if k == steps - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    }
}

/// Evaluates the property over `grid` in parallel; failing points are
/// recorded as missing.
pub fn sample_curve(
    spec: &FamilySpec,
    kind: PropertyKind,
    grid: &[f64],
    sdp: &SdpOptions,
) -> Result<PropertyCurve> {
    check_support(spec, kind)?;
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Unsupported(
            "grid must be non-empty and strictly increasing".into(),
        ));
    }
    let results: Vec<Result<PropertyValue>> = grid
        .par_iter()
        .map(|&p| evaluate(spec, kind, p, sdp))
        .collect();
    let mut curve = PropertyCurve {
        family: spec.clone(),
        property: kind,
        grid: grid.to_vec(),
        values: Vec::with_capacity(grid.len()),
        indicators: Vec::with_capacity(grid.len()),
        missing: Vec::new(),
    };
    for (&p, r) in grid.iter().zip(results) {
        match r {
            Ok(v) => {
                curve.values.push(Some(v.value));
                curve.indicators.push(Some(v.indicator));
            }
            Err(e) => {
                curve.values.push(None);
                curve.indicators.push(None);
                curve.missing.push(MissingPoint {
                    p,
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok(curve)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reference {
    pub value: f64,
    pub citation: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub family: Family,
    pub d: usize,
    pub property: PropertyKind,
    /// Midpoint of the final bracket.
    pub threshold: f64,
    /// Indicator false at the first end, true at the second.
    pub bracket: (f64, f64),
    pub tolerance: f64,
    pub evaluations: usize,
    pub reference: Option<Reference>,
}

/// Table column holding the threshold of `kind` for `family`.
pub fn column_name(kind: PropertyKind) -> &'static str {
    match kind {
        PropertyKind::Eof => "p_E",
        PropertyKind::Sa => "p_SA",
        PropertyKind::Tlf => "p_TLF",
        PropertyKind::Hn => "p_HN",
        PropertyKind::Chsh | PropertyKind::Cglmp => "p_NL",
    }
}

pub fn default_tolerance(kind: PropertyKind) -> f64 {
    if kind == PropertyKind::Tlf {
        SDP_TOL
    } else {
        CLOSED_FORM_TOL
    }
}

/// Bisects the indicator of `kind` on `bracket = (lo, hi)` down to width
/// `tol`, after a parallel pre-scan that narrows the bracket and checks
/// monotonicity.
pub fn find_threshold(
    spec: &FamilySpec,
    kind: PropertyKind,
    bracket: (f64, f64),
    tol: f64,
    sdp: &SdpOptions,
) -> Result<ThresholdReport> {
    check_support(spec, kind)?;
    let (lo, hi) = bracket;
    if lo.is_nan() || hi.is_nan() || lo >= hi || tol.is_nan() || tol <= 0.0 {
        return Err(Error::Unsupported(format!(
            "invalid bracket ({lo}, {hi}) or tolerance {tol}"
        )));
    }
    let sdp = decision_options(sdp);
    let grid = linspace(lo, hi, PRESCAN_POINTS);
    let scan: Vec<Result<bool>> = grid
        .par_iter()
        .map(|&p| indicator(spec, kind, p, &sdp))
        .collect();
    let scan: Vec<bool> = scan.into_iter().collect::<Result<_>>()?;
    let mut evaluations = grid.len();
    if scan[0] == scan[grid.len() - 1] {
        return Err(Error::BracketDoesNotStraddle(scan[0]));
    }
    let first_true = scan
        .iter()
        .position(|&b| b)
        .expect("some indicator is true");
    if let Some(k) = scan[first_true..].iter().position(|&b| !b) {
        return Err(Error::NonMonotone {
            p_true: grid[first_true],
            p_false: grid[first_true + k],
        });
    }
    let (mut a, mut b) = (grid[first_true - 1], grid[first_true]);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        evaluations += 1;
        if indicator(spec, kind, mid, &sdp)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    let column = column_name(kind);
    Ok(ThresholdReport {
        family: spec.family,
        d: spec.d,
        property: kind,
        threshold: 0.5 * (a + b),
        bracket: (a, b),
        tolerance: tol,
        evaluations,
        reference: published_threshold(spec.family, spec.d, column).map(|value| Reference {
            value,
            citation: "published threshold table",
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Computed,
    PaperConstant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CellValue {
    Number(f64),
    /// Property not established for this row.
    Marker(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableCell {
    pub value: CellValue,
    pub tolerance: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub d: usize,
    pub thresholds: BTreeMap<String, TableCell>,
    #[serde(skip)]
    pub reports: Vec<ThresholdReport>,
}

/// Properties whose thresholds are computed for a table row.
pub fn table_properties(family: Family, d: usize) -> Result<Vec<PropertyKind>> {
    use PropertyKind::*;
    let qubits = d == 2;
    Ok(match family {
        Family::Wi | Family::Hirsch1 => vec![Eof, Sa, Tlf, Hn, Chsh],
        Family::Werner if qubits => vec![Eof, Sa, Tlf, Hn, Chsh],
        Family::Werner => vec![Tlf, Hn],
        Family::Isotropic if qubits => vec![Eof, Sa, Tlf, Cglmp],
        Family::Isotropic => vec![Sa, Tlf, Cglmp],
        Family::Hirsch2 => {
            return Err(Error::Unsupported(
                "tables are one-parameter; sweep hirsch2 on a (p, q) grid instead".into(),
            ))
        }
    })
}

fn paper_constant(value: f64) -> TableCell {
    TableCell {
        value: CellValue::Number(value),
        tolerance: 0.0,
        provenance: Provenance::PaperConstant,
    }
}

/// Computes one row per `d` (thresholds for different `d` and properties run
/// concurrently) and merges the stored reference constants.
pub fn build_table(family: Family, d_range: &[usize], sdp: &SdpOptions) -> Result<Vec<TableRow>> {
    let dims: Vec<usize> = if family.is_qudit() {
        d_range.to_vec()
    } else {
        vec![2]
    };
    let jobs: Vec<(usize, PropertyKind)> = dims
        .iter()
        .map(|&d| table_properties(family, d).map(|ks| ks.into_iter().map(move |k| (d, k))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let reports: Vec<ThresholdReport> = jobs
        .par_iter()
        .map(|&(d, kind)| {
            let spec = FamilySpec::qudit(family, d)?;
            find_threshold(&spec, kind, (0.0, 1.0), default_tolerance(kind), sdp)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(dims.len());
    for &d in &dims {
        let mut thresholds = BTreeMap::new();
        for c in reference_bounds(family, d)? {
            thresholds.insert(c.name.to_string(), paper_constant(c.value));
        }
        let row_reports: Vec<ThresholdReport> =
            reports.iter().filter(|r| r.d == d).cloned().collect();
        for r in &row_reports {
            thresholds.insert(
                column_name(r.property).to_string(),
                TableCell {
                    value: CellValue::Number(r.threshold),
                    tolerance: r.tolerance,
                    provenance: Provenance::Computed,
                },
            );
        }
        if family == Family::Werner && d > 2 {
            thresholds.insert(
                "p_SA".to_string(),
                TableCell {
                    value: CellValue::Marker("X"),
                    tolerance: 0.0,
                    provenance: Provenance::PaperConstant,
                },
            );
        }
        rows.push(TableRow {
            d,
            thresholds,
            reports: row_reports,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub p: f64,
    pub q: f64,
    pub value: Option<f64>,
    pub indicator: Option<bool>,
}

/// Two-parameter Hirsch map: `q` outer, `p` inner; failing points are
/// recorded with `None`.
pub fn sample_hirsch_grid(
    sigma: &DensityMatrix,
    kind: PropertyKind,
    p_grid: &[f64],
    q_grid: &[f64],
    sdp: &SdpOptions,
) -> Result<Vec<GridPoint>> {
    let specs: Vec<FamilySpec> = q_grid
        .iter()
        .map(|&q| FamilySpec::hirsch(q, sigma.clone()))
        .collect::<Result<_>>()?;
    check_support(&specs[0], kind)?;
    let cells: Vec<(usize, f64)> = (0..specs.len())
        .flat_map(|i| p_grid.iter().map(move |&p| (i, p)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|&(i, p)| {
            let v = evaluate(&specs[i], kind, p, sdp).ok();
            GridPoint {
                p,
                q: specs[i].q,
                value: v.map(|v| v.value),
                indicator: v.map(|v| v.indicator),
            }
        })
        .collect())
}
