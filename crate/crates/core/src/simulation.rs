//! Monte Carlo study of finite-sample bias and efficiency.
//!
//! Every replicate draws from its own ChaCha stream keyed by
//! `(seed, n, repetition, replicate)`, and per-replicate results are reduced
//! in replicate order, so results do not depend on the number of threads.

use crate::asymptotics::{are, s_mle};
use crate::error::{MtmError, Result};
use crate::estimators::{mle_reference_index, mle_sorted, MtmEstimator};
use crate::matrix::det;
use crate::models::{data_transform, Model};
use crate::moments::Scheme;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Study settings.
#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub model: Model,
    pub schemes: Vec<Scheme>,
    pub sample_sizes: Vec<usize>,
    pub replicates: usize,
    pub repetitions: usize,
    pub seed: u64,
    /// A study fails if any estimator fails on a larger share of replicates.
    pub max_failure_rate: f64,
}

impl StudyConfig {
    pub fn new(model: Model, schemes: Vec<Scheme>, sample_sizes: Vec<usize>) -> Self {
        StudyConfig {
            model,
            schemes,
            sample_sizes,
            replicates: 2000,
            repetitions: 3,
            seed: 2024,
            max_failure_rate: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.replicates < 2 {
            return Err(MtmError::Validation(format!(
                "need at least 2 replicates, got {}",
                self.replicates
            )));
        }
        if self.repetitions == 0 {
            return Err(MtmError::Validation("need at least one repetition".into()));
        }
        if self.sample_sizes.is_empty() {
            return Err(MtmError::Validation("no sample sizes given".into()));
        }
        for &n in &self.sample_sizes {
            if n < 2 {
                return Err(MtmError::Validation(format!(
                    "sample size {n} is too small"
                )));
            }
            for s in &self.schemes {
                s.check_sample_size(n)?;
            }
        }
        Ok(())
    }
}

/// Estimator label in study output.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StudyEstimator {
    Mle,
    Mtm { scheme: Scheme },
}

/// Summary for one estimator at one sample size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyRow {
    pub estimator: StudyEstimator,
    pub n: usize,
    /// Mean over repetitions of the mean ratio estimate/truth per parameter.
    pub mean_ratio: [f64; 2],
    /// Standard deviation of the per-repetition mean ratios.
    pub sd_ratio: [f64; 2],
    /// Mean over repetitions of the finite-sample relative efficiency.
    pub re: f64,
    pub sd_re: f64,
    /// Asymptotic counterpart of `re` (1 for the MLE).
    pub are: f64,
    pub failures: usize,
    pub attempts: usize,
}

/// All rows of a study, ordered by sample size, then MLE, then schemes in
/// configuration order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyResult {
    pub model: Model,
    pub replicates: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub rows: Vec<StudyRow>,
}

impl StudyResult {
    pub fn row(&self, estimator: StudyEstimator, n: usize) -> Option<&StudyRow> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator && r.n == n)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random stream for one replicate.
pub fn replicate_rng(seed: u64, n: usize, repetition: usize, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(n as u64)));
    rng.set_stream(((repetition as u64) << 32) | replicate as u64);
    rng
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

fn sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let dev: Vec<f64> = xs.iter().map(|x| (x - m).powi(2)).collect();
    (pairwise_sum(&dev) / (xs.len() - 1) as f64).sqrt()
}

/// Finite-sample relative efficiency:
/// `det(S_MLE)^{1/2} / (n · det(M)^{1/2})`, with `M` the empirical matrix of
/// cross-moments of the estimation errors.
pub fn finite_sample_re(truth: &Model, estimates: &[[f64; 2]], n: usize) -> Result<f64> {
    if estimates.len() < 2 {
        return Err(MtmError::Validation(
            "RE needs at least two estimates".into(),
        ));
    }
    let p = truth.pair();
    let m = estimates.len() as f64;
    let cross = |i: usize, j: usize| {
        let v: Vec<f64> = estimates
            .iter()
            .map(|e| (e[i] - p[i]) * (e[j] - p[j]))
            .collect();
        pairwise_sum(&v) / m
    };
    let mse = [[cross(0, 0), cross(0, 1)], [cross(1, 0), cross(1, 1)]];
    let d = det(&mse);
    if d.is_nan() || d <= 0.0 {
        return Err(MtmError::Estimation(format!(
            "singular error cross-moment matrix (det {d:e})"
        )));
    }
    Ok(det(&s_mle(truth)).sqrt() / (n as f64 * d.sqrt()))
}

/// Estimates from one replicate: MLE first, then one entry per scheme.
fn run_replicate(
    model: &Model,
    estimators: &[MtmEstimator],
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Option<[f64; 2]>> {
    let family = model.family();
    let mut ys: Vec<f64> = model
        .sample(n, rng)
        .into_iter()
        .map(|x| data_transform(family, x))
        .collect();
    ys.sort_by(f64::total_cmp);
    let mle = mle_sorted(family, &ys).ok();
    let reference = mle.map(|m| m.pair()[mle_reference_index(family)]);
    let mut out = Vec::with_capacity(estimators.len() + 1);
    out.push(mle.map(|m| m.pair()));
    for est in estimators {
        out.push(est.fit_sorted(&ys, reference).ok().map(|f| f.model.pair()));
    }
    out
}

/// Runs the study on the current rayon pool.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    config.validate()?;
    let model = config.model;
    let family = model.family();
    let estimators: Vec<MtmEstimator> = config
        .schemes
        .iter()
        .map(|s| MtmEstimator::new(family, *s))
        .collect::<Result<_>>()?;
    let labels: Vec<StudyEstimator> = std::iter::once(StudyEstimator::Mle)
        .chain(
            config
                .schemes
                .iter()
                .map(|&scheme| StudyEstimator::Mtm { scheme }),
        )
        .collect();
    let asymptotic: Vec<f64> = std::iter::once(Ok(1.0))
        .chain(
            config
                .schemes
                .iter()
                .map(|s| are(&model, s).map(|a| a.value)),
        )
        .collect::<Result<_>>()?;
    let truth = model.pair();

    let mut rows = Vec::new();
    for &n in &config.sample_sizes {
        // per estimator, per repetition
        let mut ratios = vec![vec![[0.0; 2]; config.repetitions]; labels.len()];
        let mut res = vec![vec![0.0; config.repetitions]; labels.len()];
        let mut failures = vec![0usize; labels.len()];
        for rep in 0..config.repetitions {
            let draws: Vec<Vec<Option<[f64; 2]>>> = (0..config.replicates)
                .into_par_iter()
                .map(|idx| {
                    let mut rng = replicate_rng(config.seed, n, rep, idx);
                    run_replicate(&model, &estimators, n, &mut rng)
                })
                .collect();
            for (e, label) in labels.iter().enumerate() {
                let ok: Vec<[f64; 2]> = draws.iter().filter_map(|d| d[e]).collect();
                failures[e] += config.replicates - ok.len();
                if ok.len() < 2 {
                    return Err(MtmError::Estimation(format!(
                        "{label:?} at n = {n}: fewer than two successful replicates"
                    )));
                }
                for (k, slot) in ratios[e][rep].iter_mut().enumerate() {
                    let r: Vec<f64> = ok.iter().map(|p| p[k] / truth[k]).collect();
                    *slot = mean(&r);
                }
                res[e][rep] = finite_sample_re(&model, &ok, n)?;
            }
        }
        let attempts = config.replicates * config.repetitions;
        for (e, label) in labels.iter().enumerate() {
            let rate = failures[e] as f64 / attempts as f64;
            if rate > config.max_failure_rate {
                return Err(MtmError::Estimation(format!(
                    "{label:?} at n = {n} failed on {:.2}% of replicates (limit {:.2}%); \
                     update trimming proportions",
                    100.0 * rate,
                    100.0 * config.max_failure_rate
                )));
            }
            let col = |k: usize| ratios[e].iter().map(|r| r[k]).collect::<Vec<f64>>();
            rows.push(StudyRow {
                estimator: *label,
                n,
                mean_ratio: [mean(&col(0)), mean(&col(1))],
                sd_ratio: [sd(&col(0)), sd(&col(1))],
                re: mean(&res[e]),
                sd_re: sd(&res[e]),
                are: asymptotic[e],
                failures: failures[e],
                attempts,
            });
        }
    }
    Ok(StudyResult {
        model,
        replicates: config.replicates,
        repetitions: config.repetitions,
        seed: config.seed,
        rows,
    })
}

/// Runs the study on a dedicated pool with `threads` workers.
pub fn run_study_with_threads(config: &StudyConfig, threads: usize) -> Result<StudyResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| MtmError::Validation(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_study(config))
}
