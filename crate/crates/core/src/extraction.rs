//! Fitting asymptotic coefficients to deficit sequences.
//!
//! The model is `δ(n) ≈ Σ_p A_p n^{-p}` over the requested orders. Rows are
//! multiplied by `n⁶` and columns normalised before an SVD solve.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::affine::AffineCurve;
use crate::error::{Error, Result};
use crate::expansions::ExpansionCoefficients;
use crate::polygon::{deficit_sweep, DeficitSample, PolygonKind};

pub const DEFAULT_N_LIST: [usize; 7] = [16, 24, 32, 48, 64, 96, 128];
pub const DEFAULT_ORDERS: [u32; 3] = [2, 4, 6];
pub const MAX_CONDITION: f64 = 1e12;
/// Row weight exponent.
pub const WEIGHT_POWER: i32 = 6;
/// Residuals up to this multiple of the weighted accuracy count as resolved.
pub const RESOLUTION_FACTOR: f64 = 10.0;

/// Drops every `n` sharing a factor with the rotational symmetry order of the
/// curve. Those `n` carry corrections that decay only like `q^{n/gcd}`.
pub fn nonresonant(ns: &[usize], symmetry: Option<u32>) -> Vec<usize> {
    match symmetry {
        Some(m) if m > 1 => ns.iter().copied().filter(|&n| num_integer::gcd(n, m as usize) == 1).collect(),
        _ => ns.to_vec(),
    }
}

const NUISANCE_NOTE: &str = "the o(n^-6) remainder is modelled as C n^-8";

/// Deficits of one kind over increasing `n`.
#[derive(Clone, Debug, Serialize)]
pub struct DeficitSeries {
    pub kind: PolygonKind,
    pub samples: Vec<DeficitSample>,
    pub curve_id: String,
}

impl DeficitSeries {
    /// Sorts by `n` and checks that `n` increases and δ decreases strictly.
    pub fn new(kind: PolygonKind, mut samples: Vec<DeficitSample>, curve_id: impl Into<String>) -> Result<Self> {
        samples.sort_by_key(|s| s.n);
        if let Some(s) = samples.iter().find(|s| s.kind != kind) {
            return Err(Error::InvalidInput(format!("sample n = {} has kind {}", s.n, s.kind.as_str())));
        }
        for w in samples.windows(2) {
            if w[1].n == w[0].n {
                return Err(Error::InvalidInput(format!("duplicate n = {}", w[0].n)));
            }
            if !(w[1].delta < w[0].delta) {
                return Err(Error::InvalidInput(format!(
                    "deficit does not decrease between n = {} and n = {}",
                    w[0].n, w[1].n
                )));
            }
        }
        Ok(Self {
            kind,
            samples,
            curve_id: curve_id.into(),
        })
    }

    /// Solves for every `n` in `ns` (in parallel) and collects the deficits.
    pub fn compute(ac: &AffineCurve, kind: PolygonKind, ns: &[usize], curve_id: impl Into<String>) -> Result<Self> {
        Self::new(kind, deficit_sweep(ac, kind, ns)?, curve_id)
    }

    pub fn ns(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.n).collect()
    }

    /// Largest per-sample accuracy estimate.
    pub fn max_accuracy(&self) -> f64 {
        self.samples.iter().map(|s| s.accuracy_estimate).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractOptions {
    pub orders: Vec<u32>,
    /// Append `n^{-8}` when the highest requested order is 6.
    pub nuisance: bool,
    /// Treat an under-resolved fit as an error.
    pub strict: bool,
    pub max_condition: f64,
    /// Raise the lowest `n` while that lowers the uncertainty of the top order.
    pub auto_window: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            orders: DEFAULT_ORDERS.to_vec(),
            nuisance: true,
            strict: false,
            max_condition: MAX_CONDITION,
            auto_window: true,
        }
    }
}

impl ExtractOptions {
    pub fn with_orders(orders: &[u32]) -> Self {
        Self {
            orders: orders.to_vec(),
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitRow {
    pub n: usize,
    pub delta: f64,
    pub model: f64,
    pub residual: f64,
}

/// Error components of one coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Uncertainty {
    /// Statistical standard error from the fit residual.
    pub standard_error: f64,
    /// Change when the next even order is added to the model.
    pub truncation: f64,
    /// Sample accuracy pushed through the pseudo-inverse.
    pub propagated: f64,
    pub total: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtractionResult {
    pub kind: PolygonKind,
    pub curve_id: String,
    /// All fitted orders, nuisance terms included.
    pub model_orders: Vec<u32>,
    pub nuisance_orders: Vec<u32>,
    pub coefficients: BTreeMap<u32, f64>,
    pub uncertainties: BTreeMap<u32, Uncertainty>,
    pub condition_number: f64,
    /// Largest absolute residual `|δ − model|`.
    pub residual: f64,
    pub weighted_residual: f64,
    pub weighted_accuracy: f64,
    pub under_resolved: bool,
    /// Smallest and largest `n` used by the fit.
    pub window: [usize; 2],
    /// Samples below the window.
    pub excluded: Vec<usize>,
    /// Relative error per order against a prediction, when attached.
    pub comparison: BTreeMap<u32, f64>,
    pub rows: Vec<FitRow>,
    pub notes: Vec<String>,
}

impl ExtractionResult {
    pub fn coefficient(&self, order: u32) -> Option<f64> {
        self.coefficients.get(&order).copied()
    }

    pub fn uncertainty(&self, order: u32) -> Option<f64> {
        self.uncertainties.get(&order).map(|u| u.total)
    }

    /// Fills `comparison` with relative errors against `predicted`.
    pub fn attach_comparison(&mut self, predicted: &ExpansionCoefficients) {
        self.comparison = self
            .coefficients
            .iter()
            .filter_map(|(&p, &v)| {
                let pred = predicted.deficit_order(p as usize)?;
                Some((p, relative_error(v, pred)))
            })
            .collect();
    }
}

fn relative_error(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        value.abs()
    } else {
        ((value - reference) / reference).abs()
    }
}

struct Fit {
    coef: Vec<f64>,
    condition: f64,
    /// Rows of the pseudo-inverse in coefficient units, times the row weights.
    pinv: DMatrix<f64>,
    /// `(AᵀA)⁻¹` in coefficient units, for the weighted design.
    cov_unit: DMatrix<f64>,
    weighted_residuals: Vec<f64>,
}

fn weight(n: usize) -> f64 {
    (n as f64).powi(WEIGHT_POWER)
}

fn fit(samples: &[DeficitSample], orders: &[u32]) -> Result<Fit> {
    let (m, k) = (samples.len(), orders.len());
    if m < k {
        return Err(Error::InvalidInput(format!("{m} samples cannot determine {k} coefficients")));
    }
    let mut a = DMatrix::<f64>::zeros(m, k);
    let mut y = DVector::<f64>::zeros(m);
    for (i, s) in samples.iter().enumerate() {
        let w = weight(s.n);
        let nf = s.n as f64;
        for (j, &p) in orders.iter().enumerate() {
            a[(i, j)] = w * nf.powi(-(p as i32));
        }
        y[i] = w * s.delta;
    }
    let scale: Vec<f64> = (0..k).map(|j| 1.0 / a.column(j).norm()).collect();
    for (j, s) in scale.iter().enumerate() {
        a.column_mut(j).scale_mut(*s);
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !condition.is_finite() || smin == 0.0 {
        return Err(Error::RankDeficient(condition));
    }
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let sinv = DMatrix::from_diagonal(&sv.map(|s| 1.0 / s));
    let mut pinv = vt.transpose() * &sinv * u.transpose();
    let mut cov_unit = vt.transpose() * &sinv * &sinv * vt;
    for j in 0..k {
        pinv.row_mut(j).scale_mut(scale[j]);
        for l in 0..k {
            cov_unit[(j, l)] *= scale[j] * scale[l];
        }
    }
    let coef_v = &pinv * &y;
    let coef: Vec<f64> = coef_v.iter().copied().collect();
    let mut model = DVector::<f64>::zeros(m);
    for i in 0..m {
        let nf = samples[i].n as f64;
        model[i] = weight(samples[i].n) * orders.iter().zip(&coef).map(|(&p, c)| c * nf.powi(-(p as i32))).sum::<f64>();
    }
    let weighted_residuals = (y - model).iter().copied().collect();
    Ok(Fit {
        coef,
        condition,
        pinv,
        cov_unit,
        weighted_residuals,
    })
}

fn model_orders(options: &ExtractOptions) -> Result<(Vec<u32>, Vec<u32>)> {
    let mut orders = options.orders.clone();
    orders.sort_unstable();
    orders.dedup();
    if orders.is_empty() || orders[0] == 0 {
        return Err(Error::InvalidInput("orders must be positive and non-empty".into()));
    }
    let mut nuisance = Vec::new();
    if options.nuisance && orders.last() == Some(&6) {
        orders.push(8);
        nuisance.push(8);
    }
    Ok((orders, nuisance))
}

/// Next even order above the model.
fn next_order(orders: &[u32]) -> u32 {
    let top = *orders.last().unwrap();
    top + 2 - top % 2
}

/// Fits with the default options for the given orders.
pub fn extract(series: &DeficitSeries, orders: &[u32]) -> Result<ExtractionResult> {
    extract_with(series, &ExtractOptions::with_orders(orders))
}

/// Extra samples beyond the parameter count that a trimmed window must keep.
const WINDOW_SPARE: usize = 3;

pub fn extract_with(series: &DeficitSeries, options: &ExtractOptions) -> Result<ExtractionResult> {
    let (orders, nuisance) = model_orders(options)?;
    let full = fit_samples(series, &series.samples, &orders, &nuisance, options)?;
    let best = if options.auto_window {
        narrowest_uncertainty(series, full, &orders, &nuisance, options)
    } else {
        full
    };
    if options.strict && best.under_resolved {
        return Err(Error::UnderResolved {
            residual: best.weighted_residual,
            budget: RESOLUTION_FACTOR * best.weighted_accuracy,
        });
    }
    Ok(best)
}

fn narrowest_uncertainty(
    series: &DeficitSeries,
    full: ExtractionResult,
    orders: &[u32],
    nuisance: &[u32],
    options: &ExtractOptions,
) -> ExtractionResult {
    let top = *options.orders.iter().max().unwrap();
    let keep = orders.len() + WINDOW_SPARE;
    let mut best = full;
    for start in 1..series.samples.len() {
        let window = &series.samples[start..];
        if window.len() < keep {
            break;
        }
        let Ok(trial) = fit_samples(series, window, orders, nuisance, options) else {
            continue;
        };
        if trial.uncertainty(top) < best.uncertainty(top) {
            best = trial;
        }
    }
    if !best.excluded.is_empty() {
        best.notes.push(format!("fit window starts at n = {}", best.window[0]));
    }
    best
}

fn fit_samples(
    series: &DeficitSeries,
    samples: &[DeficitSample],
    orders: &[u32],
    nuisance: &[u32],
    options: &ExtractOptions,
) -> Result<ExtractionResult> {
    let orders = orders.to_vec();
    let nuisance = nuisance.to_vec();
    let base = fit(samples, &orders)?;
    if base.condition > options.max_condition {
        return Err(Error::RankDeficient(base.condition));
    }
    let (m, k) = (samples.len(), orders.len());

    let std_errors: Vec<f64> = if m > k {
        let rss: f64 = base.weighted_residuals.iter().map(|r| r * r).sum();
        let s2 = rss / (m - k) as f64;
        (0..k).map(|j| (s2 * base.cov_unit[(j, j)]).sqrt()).collect()
    } else {
        vec![0.0; k]
    };

    let mut notes = Vec::new();
    let truncation: Vec<f64> = {
        let mut extended = orders.clone();
        extended.push(next_order(&orders));
        match fit(samples, &extended) {
            Ok(ext) if ext.condition <= options.max_condition => {
                base.coef.iter().zip(&ext.coef).map(|(a, b)| (a - b).abs()).collect()
            }
            _ => {
                notes.push("truncation error not estimated: too few samples for the extended model".into());
                vec![0.0; k]
            }
        }
    };

    let weighted_acc: Vec<f64> = samples.iter().map(|s| weight(s.n) * s.accuracy_estimate).collect();
    let propagated: Vec<f64> = (0..k)
        .map(|j| (0..m).map(|i| base.pinv[(j, i)].abs() * weighted_acc[i]).sum())
        .collect();

    let mut coefficients = BTreeMap::new();
    let mut uncertainties = BTreeMap::new();
    for (j, &p) in orders.iter().enumerate() {
        coefficients.insert(p, base.coef[j]);
        let (se, tr, pr) = (std_errors[j], truncation[j], propagated[j]);
        uncertainties.insert(
            p,
            Uncertainty {
                standard_error: se,
                truncation: tr,
                propagated: pr,
                total: (se * se + tr * tr + pr * pr).sqrt(),
            },
        );
    }

    let rows: Vec<FitRow> = samples
        .iter()
        .zip(&base.weighted_residuals)
        .map(|(s, r)| {
            let residual = r / weight(s.n);
            FitRow {
                n: s.n,
                delta: s.delta,
                model: s.delta - residual,
                residual,
            }
        })
        .collect();
    let residual = rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    let weighted_residual = base.weighted_residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
    let weighted_accuracy = weighted_acc.iter().copied().fold(0.0, f64::max);
    let under_resolved = weighted_residual > RESOLUTION_FACTOR * weighted_accuracy;
    if under_resolved {
        notes.push("fit residual exceeds the deficit accuracy budget".into());
    }
    if !nuisance.is_empty() {
        notes.push(NUISANCE_NOTE.into());
    }

    Ok(ExtractionResult {
        kind: series.kind,
        curve_id: series.curve_id.clone(),
        model_orders: orders,
        nuisance_orders: nuisance,
        coefficients,
        uncertainties,
        condition_number: base.condition,
        residual,
        weighted_residual,
        weighted_accuracy,
        under_resolved,
        window: [samples[0].n, samples[samples.len() - 1].n],
        excluded: series.samples.iter().map(|s| s.n).filter(|&n| n < samples[0].n).collect(),
        comparison: BTreeMap::new(),
        rows,
        notes,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The tolerance is tighter than the error budget allows.
    Unresolvable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoefficientCheck {
    pub order: u32,
    pub fitted: f64,
    pub predicted: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    /// Absolute error budget `max accuracy · max(n)^p`.
    pub budget: f64,
    pub status: CheckStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub checks: Vec<CoefficientCheck>,
    pub all_pass: bool,
}

/// Default relative tolerances for orders 2, 4, 6.
pub fn default_tolerances() -> BTreeMap<u32, f64> {
    [(2, 1e-8), (4, 1e-4), (6, 2e-2)].into_iter().collect()
}

/// Error budget for the coefficient of `n^{-order}`.
pub fn error_budget(series: &DeficitSeries, order: u32) -> f64 {
    let nmax = series.samples.iter().map(|s| s.n).max().unwrap_or(1) as f64;
    series.max_accuracy() * nmax.powi(order as i32)
}

/// Checks fitted coefficients against a prediction, one entry per toleranced order.
pub fn compare(
    series: &DeficitSeries,
    result: &ExtractionResult,
    predicted: &ExpansionCoefficients,
    tolerances: &BTreeMap<u32, f64>,
) -> ComparisonReport {
    let checks: Vec<CoefficientCheck> = tolerances
        .iter()
        .filter_map(|(&order, &tolerance)| {
            let fitted = result.coefficient(order)?;
            let predicted = predicted.deficit_order(order as usize)?;
            let relative_error = relative_error(fitted, predicted);
            let budget = error_budget(series, order);
            let status = if tolerance * predicted.abs() < budget {
                CheckStatus::Unresolvable
            } else if relative_error <= tolerance {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            };
            Some(CoefficientCheck {
                order,
                fitted,
                predicted,
                relative_error,
                tolerance,
                budget,
                status,
            })
        })
        .collect();
    let all_pass = checks.iter().all(|c| c.status == CheckStatus::Pass);
    ComparisonReport { checks, all_pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveSpec;
    use crate::expansions::predict_deficit_coeffs;
    use std::f64::consts::PI;

    fn synthetic(kind: PolygonKind, ns: &[usize], f: impl Fn(f64) -> f64) -> DeficitSeries {
        let samples = ns
            .iter()
            .map(|&n| DeficitSample {
                n,
                delta: f(n as f64),
                kind,
                accuracy_estimate: 1e-16,
                residual: 0.0,
            })
            .collect();
        DeficitSeries::new(kind, samples, "synthetic").unwrap()
    }

    fn circle_inscribed(n: f64) -> f64 {
        PI - 0.5 * n * (2.0 * PI / n).sin()
    }

    fn circle_circumscribed(n: f64) -> f64 {
        n * (PI / n).tan() - PI
    }

    #[test]
    fn circle_inscribed_closed_form() {
        let s = synthetic(PolygonKind::Inscribed, &DEFAULT_N_LIST, circle_inscribed);
        let r = extract(&s, &[2, 4, 6]).unwrap();
        let a2 = (2.0 * PI).powi(3) / 12.0;
        assert!(((r.coefficient(2).unwrap() - a2) / a2).abs() < 1e-8);
        assert_eq!(r.nuisance_orders, vec![8]);
        let a6 = (2.0 * PI).powi(7) / 10080.0;
        assert!(((r.coefficient(6).unwrap() - a6) / a6).abs() < 1e-3);
    }

    #[test]
    fn circle_circumscribed_a4() {
        let s = synthetic(PolygonKind::Circumscribed, &DEFAULT_N_LIST, circle_circumscribed);
        let r = extract(&s, &[2, 4, 6]).unwrap();
        let a4 = (2.0 * PI).powi(5) / 240.0;
        assert!(((r.coefficient(4).unwrap() - a4) / a4).abs() < 1e-6);
    }

    #[test]
    fn errors_shrink_with_range() {
        let a4 = -(2.0 * PI).powi(5) / 240.0;
        let err = |ns: &[usize]| {
            let s = synthetic(PolygonKind::Inscribed, ns, circle_inscribed);
            let r = extract_with(
                &s,
                &ExtractOptions {
                    nuisance: false,
                    ..ExtractOptions::with_orders(&[2, 4])
                },
            )
            .unwrap();
            ((r.coefficient(4).unwrap() - a4) / a4).abs()
        };
        let coarse = err(&[8, 10, 12, 14, 16]);
        let fine = err(&[32, 40, 48, 56, 64]);
        assert!(fine < coarse / 10.0, "{coarse:e} {fine:e}");
    }

    #[test]
    fn nonmonotone_series_rejected() {
        let mk = |n, delta| DeficitSample {
            n,
            delta,
            kind: PolygonKind::Inscribed,
            accuracy_estimate: 0.0,
            residual: 0.0,
        };
        assert!(DeficitSeries::new(PolygonKind::Inscribed, vec![mk(8, 0.1), mk(16, 0.2)], "x").is_err());
        assert!(DeficitSeries::new(PolygonKind::Inscribed, vec![mk(8, 0.1), mk(8, 0.05)], "x").is_err());
    }

    #[test]
    fn too_few_samples_and_collinear_columns() {
        let s = synthetic(PolygonKind::Inscribed, &[16, 32], circle_inscribed);
        assert!(extract(&s, &[2, 4, 6]).is_err());
        let s = synthetic(PolygonKind::Inscribed, &[100, 101, 102, 103, 104], circle_inscribed);
        let opts = ExtractOptions {
            max_condition: 1e6,
            ..ExtractOptions::with_orders(&[2, 4, 6, 8, 10])
        };
        assert!(matches!(extract_with(&s, &opts), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn strict_mode_rejects_unresolved_fit() {
        let s = synthetic(PolygonKind::Inscribed, &[4, 5, 6, 7, 8, 9], circle_inscribed);
        let opts = ExtractOptions {
            nuisance: false,
            strict: true,
            ..ExtractOptions::with_orders(&[2])
        };
        assert!(matches!(extract_with(&s, &opts), Err(Error::UnderResolved { .. })));
        let lax = ExtractOptions { strict: false, ..opts };
        assert!(extract_with(&s, &lax).unwrap().under_resolved);
    }

    #[test]
    fn comparison_statuses() {
        let ac = AffineCurve::from_spec(&CurveSpec::circle(1.0), 256).unwrap();
        let pred = predict_deficit_coeffs(&ac, PolygonKind::Inscribed);
        let s = synthetic(PolygonKind::Inscribed, &DEFAULT_N_LIST, circle_inscribed);
        let r = extract(&s, &[2, 4, 6]).unwrap();
        let rep = compare(&s, &r, &pred, &[(2, 1e-8), (4, 1e-6), (6, 1e-3)].into_iter().collect());
        assert!(rep.all_pass, "{rep:?}");
        let rep = compare(&s, &r, &pred, &[(6, 1e-12)].into_iter().collect());
        assert_eq!(rep.checks[0].status, CheckStatus::Unresolvable);
    }

    #[test]
    fn real_circle_sweep_matches_prediction() {
        let ac = AffineCurve::from_spec(&CurveSpec::circle(1.0), 256).unwrap();
        let s = DeficitSeries::compute(&ac, PolygonKind::Inscribed, &[8, 16, 32, 64], "circle:1").unwrap();
        let mut r = extract(&s, &[2, 4, 6]).unwrap();
        r.attach_comparison(&predict_deficit_coeffs(&ac, PolygonKind::Inscribed));
        assert!(r.comparison[&2] < 1e-8, "{:?}", r.comparison);
    }
}
