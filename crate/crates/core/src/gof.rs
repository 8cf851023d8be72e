//! Goodness-of-fit summaries: mean absolute log-quantile deviation (FIT),
//! AIC/BIC, and the largest-observation inflation check.

use crate::error::{MtmError, Result};
use crate::estimators::{fit_mle, fit_mtm};
use crate::models::{Family, Model};
use crate::moments::Scheme;
use serde::Serialize;
use std::io::Read;
use std::path::Path;

/// Number of fitted parameters in every supported model.
pub const N_PARAMS: f64 = 2.0;

/// `(1/n) Σ |log F̂^{-1}((j - 0.5)/n) - log x_(j)|` over the sorted sample.
pub fn fit_statistic(model: &Model, data: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(MtmError::Validation("empty sample".into()));
    }
    if let Some(&x) = data.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(MtmError::Validation(format!(
            "FIT needs positive finite observations, got {x}"
        )));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let total: f64 = sorted
        .iter()
        .enumerate()
        .map(|(j, &x)| (model.log_quantile((j as f64 + 0.5) / n) - x.ln()).abs())
        .sum();
    Ok(total / n)
}

/// `(AIC, BIC)` with two parameters and the log-likelihood at `model`.
pub fn information_criteria(model: &Model, data: &[f64]) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(MtmError::Validation("empty sample".into()));
    }
    let ll = model.log_likelihood(data);
    if !ll.is_finite() {
        return Err(MtmError::Estimation(format!(
            "log-likelihood is {ll}; some observation has zero density"
        )));
    }
    let n = data.len() as f64;
    Ok((2.0 * N_PARAMS - 2.0 * ll, N_PARAMS * n.ln() - 2.0 * ll))
}

/// Copy of `data` with its largest value multiplied by `factor`.
pub fn modify_dataset(data: &[f64], factor: f64) -> Vec<f64> {
    let mut out = data.to_vec();
    if let Some((idx, _)) = out.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) {
        out[idx] *= factor;
    }
    out
}

/// Reads a one-column CSV of numbers. A non-numeric first row is treated
/// as a header; blank lines are skipped.
pub fn read_data<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let Some(field) = rec.get(0).filter(|f| !f.is_empty()) else {
            continue;
        };
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if row == 0 => continue,
            Err(_) => {
                return Err(MtmError::Validation(format!(
                    "row {}: cannot parse '{field}' as a number",
                    row + 1
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(MtmError::Validation(
            "data file contains no observations".into(),
        ));
    }
    Ok(out)
}

pub fn read_data_file(path: &Path) -> Result<Vec<f64>> {
    read_data(std::fs::File::open(path)?)
}

/// Estimator used for a goodness-of-fit row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Estimator {
    Mle,
    Mtm { scheme: Scheme },
}

/// Whether the largest observation was inflated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetTag {
    Original,
    Modified,
}

/// One fitted model with its goodness-of-fit measures.
#[derive(Clone, Debug, Serialize)]
pub struct GofReport {
    pub family: Family,
    pub estimator: Estimator,
    pub model: Model,
    /// Fréchet scale divided by the unit scale (data units); `None` otherwise.
    pub sigma_star: Option<f64>,
    pub fit: f64,
    pub aic: f64,
    pub bic: f64,
    pub n: usize,
    pub dataset: DatasetTag,
}

/// Fits `family` to `data * unit_scale` and evaluates FIT, AIC and BIC on
/// the scaled data.
pub fn gof_report(
    data: &[f64],
    family: Family,
    estimator: Estimator,
    unit_scale: f64,
    dataset: DatasetTag,
) -> Result<GofReport> {
    if !(unit_scale > 0.0 && unit_scale.is_finite()) {
        return Err(MtmError::Validation(format!(
            "unit scale must be positive, got {unit_scale}"
        )));
    }
    let scaled: Vec<f64> = data.iter().map(|x| x * unit_scale).collect();
    let model = match estimator {
        Estimator::Mle => fit_mle(&scaled, family)?,
        Estimator::Mtm { scheme } => fit_mtm(&scaled, family, &scheme)?.model,
    };
    let fit = fit_statistic(&model, &scaled)?;
    let (aic, bic) = information_criteria(&model, &scaled)?;
    let sigma_star = match model {
        Model::Frechet { sigma, .. } => Some(sigma / unit_scale),
        _ => None,
    };
    Ok(GofReport {
        family,
        estimator,
        model,
        sigma_star,
        fit,
        aic,
        bic,
        n: data.len(),
        dataset,
    })
}
