//! MTM and maximum likelihood estimators.

use crate::error::{MtmError, Result};
use crate::models::{Family, Model};
use crate::moments::{
    transformed_sorted, trimmed_moments_sorted, Scheme, SchemeClass, SchemeConstants,
};
use crate::roots::bracketed_root;
use serde::Serialize;

/// Relative size below which the sample discriminant is treated as zero.
const DISC_ROUNDING: f64 = 64.0 * f64::EPSILON;

/// Which root of the quadratic moment equation was selected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// The two candidate values of the scale (location-scale families) or tail
/// index (Fréchet), `±first_term + second_term`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Candidates {
    pub first_term: f64,
    pub second_term: f64,
}

impl Candidates {
    /// Candidates from trimmed moments. For the Fréchet family the second
    /// term changes sign because the log data decrease in `log(-log u)`.
    pub fn new(family: Family, moments: [f64; 2], k: &SchemeConstants) -> Self {
        let [t1, t2] = moments;
        let square = k.ratio * t1 * t1;
        let disc = t2 - square;
        // a difference at rounding level carries no spread information
        let disc = if disc.abs() <= DISC_ROUNDING * t2.abs().max(square) {
            0.0
        } else {
            disc
        };
        let first_term = disc.abs().sqrt() / k.eta_cross.sqrt();
        let diff = match family {
            Family::Normal | Family::Lognormal => k.m11 - k.m12,
            Family::Frechet => k.m12 - k.m11,
        };
        Candidates {
            first_term,
            second_term: t1 * diff / k.eta_cross,
        }
    }

    pub fn plus(&self) -> f64 {
        self.first_term + self.second_term
    }

    pub fn minus(&self) -> f64 {
        -self.first_term + self.second_term
    }

    pub fn value(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.plus(),
            Branch::Minus => self.minus(),
        }
    }

    /// Picks a candidate. Positive candidates win over non-positive ones;
    /// when both are positive the one closer to `reference()` wins, ties
    /// going to the plus branch.
    pub fn select<F>(&self, class: SchemeClass, reference: F) -> Result<(f64, Branch)>
    where
        F: FnOnce() -> Result<f64>,
    {
        if class == SchemeClass::Equal {
            let v = self.first_term;
            return if v > 0.0 {
                Ok((v, Branch::Plus))
            } else {
                Err(MtmError::Estimation("trimmed sample has no spread".into()))
            };
        }
        let (minus, plus) = (self.minus(), self.plus());
        match (minus > 0.0, plus > 0.0) {
            (false, false) => Err(MtmError::BothCandidatesNonPositive { minus, plus }),
            (false, true) => Ok((plus, Branch::Plus)),
            (true, false) => Ok((minus, Branch::Minus)),
            (true, true) => {
                let r = reference()?;
                if (minus - r).abs() < (plus - r).abs() {
                    Ok((minus, Branch::Minus))
                } else {
                    Ok((plus, Branch::Plus))
                }
            }
        }
    }
}

/// Outcome of an MTM fit.
#[derive(Clone, Debug, Serialize)]
pub struct MtmFit {
    pub model: Model,
    pub branch: Branch,
    pub candidates: Candidates,
    /// Sample trimmed moments `(T̂1, T̂2)`.
    pub moments: [f64; 2],
    pub scheme: Scheme,
    pub n: usize,
}

/// Converts trimmed moments to parameter estimates.
pub fn estimate_from_moments<F>(
    family: Family,
    scheme: &Scheme,
    k: &SchemeConstants,
    moments: [f64; 2],
    reference: F,
) -> Result<(Model, Branch, Candidates)>
where
    F: FnOnce() -> Result<f64>,
{
    let cand = Candidates::new(family, moments, k);
    let (v, branch) = cand.select(scheme.class(), reference)?;
    let model = model_from_candidate(family, k, moments[0], v)?;
    Ok((model, branch, cand))
}

/// Completes a scale (location-scale) or tail index (Fréchet) value `v` to
/// a full parameter vector using the first trimmed moment.
pub fn model_from_candidate(family: Family, k: &SchemeConstants, t1: f64, v: f64) -> Result<Model> {
    match family {
        Family::Normal => Model::normal(t1 - k.m11 * v, v),
        Family::Lognormal => Model::lognormal(t1 - k.m11 * v, v),
        Family::Frechet => Model::frechet(v, (t1 + v * k.m11).exp()),
    }
    .map_err(|e| MtmError::Estimation(e.to_string()))
}

/// Estimator map `(T1, T2) -> parameters` restricted to one root, without
/// checking that the result is a valid parameter vector.
pub fn params_on_branch(
    family: Family,
    k: &SchemeConstants,
    moments: [f64; 2],
    branch: Branch,
) -> [f64; 2] {
    let v = Candidates::new(family, moments, k).value(branch);
    let t1 = moments[0];
    match family {
        Family::Normal | Family::Lognormal => [t1 - k.m11 * v, v],
        Family::Frechet => [v, (t1 + v * k.m11).exp()],
    }
}

/// Reusable MTM estimator for one family and scheme.
#[derive(Clone, Debug)]
pub struct MtmEstimator {
    family: Family,
    scheme: Scheme,
    constants: SchemeConstants,
}

impl MtmEstimator {
    pub fn new(family: Family, scheme: Scheme) -> Result<Self> {
        let constants = SchemeConstants::new(family.base(), &scheme)?;
        Ok(MtmEstimator {
            family,
            scheme,
            constants,
        })
    }

    pub fn constants(&self) -> &SchemeConstants {
        &self.constants
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    /// Fits raw observations.
    pub fn fit(&self, data: &[f64]) -> Result<MtmFit> {
        let sorted = transformed_sorted(data, self.family)?;
        self.fit_sorted(&sorted, None)
    }

    /// Fits transformed (`x` or `log x`) observations sorted ascending. The
    /// MLE used to break ties between two positive candidates is computed
    /// only when needed unless `reference` is supplied.
    pub fn fit_sorted(&self, sorted: &[f64], reference: Option<f64>) -> Result<MtmFit> {
        self.scheme.check_sample_size(sorted.len())?;
        let moments = trimmed_moments_sorted(sorted, &self.scheme)?;
        let family = self.family;
        let reference = || match reference {
            Some(r) => Ok(r),
            None => mle_sorted(family, sorted).map(|m| m.pair()[mle_reference_index(family)]),
        };
        let (model, branch, candidates) =
            estimate_from_moments(family, &self.scheme, &self.constants, moments, reference)?;
        Ok(MtmFit {
            model,
            branch,
            candidates,
            moments,
            scheme: self.scheme,
            n: sorted.len(),
        })
    }
}

/// Position of the branch-selection reference in [`Model::pair`]: sigma for
/// location-scale families, beta for Fréchet.
pub fn mle_reference_index(family: Family) -> usize {
    match family {
        Family::Normal | Family::Lognormal => 1,
        Family::Frechet => 0,
    }
}

/// MTM fit of raw data.
pub fn fit_mtm(data: &[f64], family: Family, scheme: &Scheme) -> Result<MtmFit> {
    MtmEstimator::new(family, *scheme)?.fit(data)
}

/// Maximum likelihood fit of raw data.
pub fn fit_mle(data: &[f64], family: Family) -> Result<Model> {
    let sorted = transformed_sorted(data, family)?;
    mle_sorted(family, &sorted)
}

/// MLE from transformed observations (`x` for normal, `log x` otherwise).
pub fn mle_sorted(family: Family, ys: &[f64]) -> Result<Model> {
    if ys.len() < 2 {
        return Err(MtmError::Validation(
            "MLE needs at least two observations".into(),
        ));
    }
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    match family {
        Family::Normal | Family::Lognormal => {
            let var = ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
            if var <= 0.0 {
                return Err(MtmError::Estimation("sample has zero variance".into()));
            }
            Model::from_pair(family, [mean, var.sqrt()])
        }
        Family::Frechet => frechet_mle(ys, mean),
    }
}

fn frechet_mle(ys: &[f64], mean: f64) -> Result<Model> {
    let n = ys.len() as f64;
    let ymin = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if ymax == ymin {
        return Err(MtmError::Estimation("all observations are equal".into()));
    }
    // Weights exp(-(y - ymin)/beta) are rescaled x^(-1/beta); the ratio
    // below is invariant to that rescaling.
    let weighted = |beta: f64| {
        let (mut sw, mut swy) = (0.0, 0.0);
        for &y in ys {
            let w = (-(y - ymin) / beta).exp();
            sw += w;
            swy += w * y;
        }
        (sw, swy)
    };
    let xi = |beta: f64| {
        let (sw, swy) = weighted(beta);
        beta + swy / sw - mean
    };

    // Start from the coefficient of variation of x, computed on x / max(x).
    let rel: Vec<f64> = ys.iter().map(|y| (y - ymax).exp()).collect();
    let rmean = rel.iter().sum::<f64>() / n;
    let rsd = (rel.iter().map(|r| (r - rmean) * (r - rmean)).sum::<f64>() / (n - 1.0)).sqrt();
    let start = match rsd / rmean {
        cv if cv.is_finite() && cv > 0.0 => cv,
        _ => 1.0,
    };

    let (mut lo, mut hi) = (start, start);
    let mut steps = 0;
    while xi(hi) <= 0.0 {
        hi *= 2.0;
        steps += 1;
        if steps > 200 {
            return Err(MtmError::Estimation(
                "cannot bracket the Fréchet MLE from above".into(),
            ));
        }
    }
    while xi(lo) >= 0.0 {
        lo *= 0.5;
        steps += 1;
        if steps > 400 || lo < 1e-300 {
            return Err(MtmError::Estimation(
                "cannot bracket the Fréchet MLE from below".into(),
            ));
        }
    }
    let beta = bracketed_root(xi, lo, hi, 1e-10)?;
    let (sw, _) = weighted(beta);
    let log_sigma = ymin - beta * (sw / n).ln();
    Model::frechet(beta, log_sigma.exp()).map_err(|e| MtmError::Estimation(e.to_string()))
}
