use crate::args::{parse_grid, scheme_label, warn_on_floor, ModelFlags, OutputFlag, SchemeFlags};
use crate::failure::Failure;
use clap::Args;
use mtm::asymptotics::{are, s_t};
use mtm::gof::{gof_report, modify_dataset, read_data_file, DatasetTag, Estimator, GofReport};
use mtm::simulation::{run_study, StudyConfig, StudyEstimator};
use mtm::{fit_mle, fit_mtm, Family, Model, Scheme};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

fn read_input(path: &Path) -> Result<Vec<f64>, Failure> {
    read_data_file(path).map_err(|e| match e {
        mtm::MtmError::Io(io) => Failure::Io(format!("cannot read {}: {io}", path.display())),
        other => other.into(),
    })
}

/// Multiplies the data by `unit_scale` and returns the scale applied.
fn scaled(data: &[f64], unit_scale: f64) -> Result<Vec<f64>, Failure> {
    if !(unit_scale > 0.0 && unit_scale.is_finite()) {
        return Err(Failure::Validation(format!(
            "unit scale must be positive, got {unit_scale}"
        )));
    }
    Ok(data.iter().map(|x| x * unit_scale).collect())
}

fn named(family: Family, pair: [f64; 2]) -> BTreeMap<&'static str, f64> {
    family.parameter_names().into_iter().zip(pair).collect()
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Model family: normal, lognormal or frechet.
    #[arg(long)]
    model: Family,
    /// One-column CSV of observations (header optional).
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    scheme: SchemeFlags,
    /// Fit by maximum likelihood instead of trimmed moments.
    #[arg(long, conflicts_with_all = ["schemes", "a1", "b1", "a2", "b2"])]
    mle: bool,
    /// Multiply the data by this factor before fitting; the Fréchet scale is
    /// also reported divided by it.
    #[arg(long, default_value_t = 1.0)]
    unit_scale: f64,
    #[command(flatten)]
    output: OutputFlag,
}

#[derive(Serialize)]
struct Breakdown {
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
struct FitRecord {
    model: Family,
    method: &'static str,
    n: usize,
    unit_scale: f64,
    estimates: BTreeMap<&'static str, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scheme: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    branch: Option<mtm::Branch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    candidates: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trimmed_moments: Option<[f64; 2]>,
    /// `sqrt(diag(S_T) / n)` at the estimates; absent when S_T is singular.
    #[serde(skip_serializing_if = "Option::is_none")]
    standard_errors: Option<BTreeMap<&'static str, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    asymptotic_relative_efficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    breakdown_points: Option<Breakdown>,
}

fn sigma_star(model: &Model, unit_scale: f64) -> Option<f64> {
    match model {
        Model::Frechet { sigma, .. } if unit_scale != 1.0 => Some(sigma / unit_scale),
        _ => None,
    }
}

pub fn fit(args: &FitArgs) -> Result<(), Failure> {
    let raw = read_input(&args.data)?;
    let data = scaled(&raw, args.unit_scale)?;
    let family = args.model;
    let record = if args.mle {
        let model = fit_mle(&data, family)?;
        FitRecord {
            model: family,
            method: "mle",
            n: data.len(),
            unit_scale: args.unit_scale,
            estimates: named(family, model.pair()),
            sigma_star: sigma_star(&model, args.unit_scale),
            scheme: None,
            branch: None,
            candidates: None,
            trimmed_moments: None,
            standard_errors: None,
            asymptotic_relative_efficiency: None,
            breakdown_points: None,
        }
    } else {
        let scheme = args.scheme.single()?;
        warn_on_floor(&scheme, data.len());
        let fit = fit_mtm(&data, family, &scheme)?;
        let n = data.len() as f64;
        let standard_errors = s_t(&fit.model, &scheme, fit.branch)
            .ok()
            .map(|s| [s[0][0], s[1][1]])
            .filter(|d| d.iter().all(|v| v.is_finite() && *v >= 0.0))
            .map(|d| named(family, d.map(|v| (v / n).sqrt())));
        let efficiency = are(&fit.model, &scheme)
            .ok()
            .filter(|a| !a.singular)
            .map(|a| a.value);
        let (lower, upper) = scheme.breakdown_points();
        FitRecord {
            model: family,
            method: "mtm",
            n: data.len(),
            unit_scale: args.unit_scale,
            estimates: named(family, fit.model.pair()),
            sigma_star: sigma_star(&fit.model, args.unit_scale),
            scheme: Some(scheme.proportions()),
            branch: Some(fit.branch),
            candidates: Some([fit.candidates.minus(), fit.candidates.plus()]),
            trimmed_moments: Some(fit.moments),
            standard_errors,
            asymptotic_relative_efficiency: efficiency,
            breakdown_points: Some(Breakdown { lower, upper }),
        }
    };
    let mut json = serde_json::to_vec_pretty(&record)?;
    json.push(b'\n');
    args.output.emit(&json)
}

#[derive(Args, Debug)]
pub struct AreArgs {
    #[command(flatten)]
    model: ModelFlags,
    #[command(flatten)]
    scheme: SchemeFlags,
    /// Decimal places in the output.
    #[arg(long, default_value_t = 3)]
    digits: usize,
    #[command(flatten)]
    output: OutputFlag,
}

/// Asymptotic relative efficiencies over a parameter grid. One varying axis
/// gives a wide table (one row per scheme); two give one row per cell.
pub fn are_grid(args: &AreArgs) -> Result<(), Failure> {
    let family = args.model.model;
    let (first, sigma) = args.model.grids()?;
    let schemes = args.scheme.resolve()?;
    if schemes.is_empty() {
        return Err(Failure::Validation("give at least one --scheme".into()));
    }
    let mut cells: Vec<(usize, f64, f64)> =
        Vec::with_capacity(schemes.len() * first.len() * sigma.len());
    for k in 0..schemes.len() {
        for &p in &first {
            cells.extend(sigma.iter().map(|&s| (k, p, s)));
        }
    }
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(k, p, s)| {
            let model = Model::from_pair(family, [p, s])?;
            Ok(are(&model, &schemes[k])?.value)
        })
        .collect::<Result<_, Failure>>()?;

    let [p_name, s_name] = family.parameter_names();
    let fmt = |v: f64| format!("{v:.*}", args.digits);
    let mut w = csv::Writer::from_writer(Vec::new());
    if first.len() > 1 && sigma.len() > 1 {
        w.write_record(["scheme", p_name, s_name, "are"])?;
        for (&(k, p, s), v) in cells.iter().zip(&values) {
            w.write_record([
                scheme_label(&schemes[k]),
                p.to_string(),
                s.to_string(),
                fmt(*v),
            ])?;
        }
    } else {
        let (name, axis) = if sigma.len() > 1 {
            (s_name, &sigma)
        } else {
            (p_name, &first)
        };
        let header =
            std::iter::once("scheme".to_string()).chain(axis.iter().map(|v| format!("{name}={v}")));
        w.write_record(header)?;
        for (k, row) in values.chunks(axis.len()).enumerate() {
            let record =
                std::iter::once(scheme_label(&schemes[k])).chain(row.iter().map(|v| fmt(*v)));
            w.write_record(record)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    args.output.emit(&bytes)
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    model: ModelFlags,
    #[command(flatten)]
    scheme: SchemeFlags,
    /// Sample sizes.
    #[arg(long = "n", default_value = "100,1000")]
    sizes: String,
    /// Replicates per repetition.
    #[arg(long, default_value_t = 2000)]
    replicates: usize,
    /// Independent repetitions of the whole study.
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Largest tolerated share of failed fits per estimator.
    #[arg(long, default_value_t = 0.01)]
    max_failure_rate: f64,
    /// Decimal places in the output.
    #[arg(long, default_value_t = 4)]
    digits: usize,
    #[command(flatten)]
    output: OutputFlag,
}

pub fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let model = args.model.single()?;
    let schemes = args.scheme.resolve()?;
    let sizes: Vec<usize> = parse_grid(&args.sizes)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Failure::Validation(format!(
                    "sample size must be a positive integer, got {v}"
                )))
            }
        })
        .collect::<Result<_, _>>()?;
    let mut config = StudyConfig::new(model, schemes, sizes);
    config.replicates = args.replicates;
    config.repetitions = args.repetitions;
    config.seed = args.seed;
    config.max_failure_rate = args.max_failure_rate;
    let result = run_study(&config)?;

    let [p, s] = model.family().parameter_names();
    let fmt = |v: f64| format!("{v:.*}", args.digits);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "estimator".to_string(),
        "n".into(),
        format!("{p}_ratio"),
        format!("{s}_ratio"),
        format!("{p}_ratio_sd"),
        format!("{s}_ratio_sd"),
        "re".into(),
        "re_sd".into(),
        "are".into(),
        "failures".into(),
        "attempts".into(),
    ])?;
    for row in &result.rows {
        let label = match row.estimator {
            StudyEstimator::Mle => "MLE".to_string(),
            StudyEstimator::Mtm { scheme } => scheme_label(&scheme),
        };
        w.write_record([
            label,
            row.n.to_string(),
            fmt(row.mean_ratio[0]),
            fmt(row.mean_ratio[1]),
            fmt(row.sd_ratio[0]),
            fmt(row.sd_ratio[1]),
            fmt(row.re),
            fmt(row.sd_re),
            fmt(row.are),
            row.failures.to_string(),
            row.attempts.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    args.output.emit(&bytes)
}

/// The ten goodness-of-fit schemes, with their row labels.
fn default_gof_schemes() -> Vec<(String, Scheme)> {
    let t = |k: f64| k / 30.0;
    [
        [0.0, 0.0, 0.0, 0.0],
        [0.0, t(1.0), 0.0, t(1.0)],
        [t(1.0), t(1.0), t(1.0), t(1.0)],
        [t(7.0), t(7.0), t(7.0), t(7.0)],
        [0.0, 0.0, 0.0, t(1.0)],
        [t(1.0), t(1.0), 0.0, t(2.0)],
        [t(1.0), t(1.0), t(2.0), 0.0],
        [0.0, t(3.0), 0.0, 0.0],
        [t(4.0), t(5.0), t(5.0), t(2.0)],
        [t(7.0), t(15.0), t(15.0), t(7.0)],
    ]
    .iter()
    .enumerate()
    .map(|(k, p)| {
        (
            format!("T{}", k + 1),
            Scheme::new(p[0], p[1], p[2], p[3]).expect("valid scheme"),
        )
    })
    .collect()
}

#[derive(Args, Debug)]
pub struct GofArgs {
    /// One-column CSV of observations (header optional).
    #[arg(long)]
    data: PathBuf,
    /// Schemes to fit; defaults to the ten standard rows T1..T10.
    #[command(flatten)]
    scheme: SchemeFlags,
    /// Multiply the data by this factor before fitting.
    #[arg(long, default_value_t = 1.0)]
    unit_scale: f64,
    /// Also report every row after multiplying the largest observation by this factor.
    #[arg(long)]
    modify_max: Option<f64>,
    /// Emit the reports as JSON instead of CSV.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    output: OutputFlag,
}

type GofRow = (
    String,
    Estimator,
    DatasetTag,
    [Result<GofReport, String>; 2],
);

pub fn gof(args: &GofArgs) -> Result<(), Failure> {
    let data = read_input(&args.data)?;
    if !(args.unit_scale > 0.0 && args.unit_scale.is_finite()) {
        return Err(Failure::Validation(format!(
            "unit scale must be positive, got {}",
            args.unit_scale
        )));
    }
    let given = args.scheme.resolve()?;
    let labelled: Vec<(String, Scheme)> = if given.is_empty() {
        default_gof_schemes()
    } else {
        given.into_iter().map(|s| (scheme_label(&s), s)).collect()
    };
    for (_, s) in &labelled {
        warn_on_floor(s, data.len());
    }
    let mut datasets = vec![(DatasetTag::Original, data.clone())];
    if let Some(f) = args.modify_max {
        if !(f > 0.0 && f.is_finite()) {
            return Err(Failure::Validation(format!(
                "--modify-max must be positive, got {f}"
            )));
        }
        datasets.push((DatasetTag::Modified, modify_dataset(&data, f)));
    }
    let estimators: Vec<(String, Estimator)> = std::iter::once(("MLE".to_string(), Estimator::Mle))
        .chain(
            labelled
                .into_iter()
                .map(|(l, scheme)| (l, Estimator::Mtm { scheme })),
        )
        .collect();

    let families = [Family::Lognormal, Family::Frechet];
    let mut rows: Vec<GofRow> = Vec::new();
    for (tag, d) in &datasets {
        for (label, est) in &estimators {
            let reports = families
                .map(|f| gof_report(d, f, *est, args.unit_scale, *tag).map_err(|e| e.to_string()));
            rows.push((label.clone(), *est, *tag, reports));
        }
    }
    let mut failed = 0;
    for (label, _, tag, reports) in &rows {
        for (family, r) in families.iter().zip(reports) {
            if let Err(e) = r {
                failed += 1;
                eprintln!("warning: {label} {family} ({tag:?}): {e}");
            }
        }
    }

    let bytes = if args.json {
        let ok: Vec<&GofReport> = rows
            .iter()
            .flat_map(|r| r.3.iter().filter_map(|x| x.as_ref().ok()))
            .collect();
        let mut v = serde_json::to_vec_pretty(&ok)?;
        v.push(b'\n');
        v
    } else {
        gof_csv(&rows)?
    };
    args.output.emit(&bytes)?;
    if failed > 0 {
        return Err(Failure::Estimation(format!(
            "{failed} fit(s) failed; their cells are empty"
        )));
    }
    Ok(())
}

fn gof_csv(rows: &[GofRow]) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "dataset",
        "estimator",
        "a1",
        "b1",
        "a2",
        "b2",
        "ln_theta",
        "ln_sigma",
        "ln_fit",
        "ln_aic",
        "ln_bic",
        "fr_beta",
        "fr_sigma_star",
        "fr_fit",
        "fr_aic",
        "fr_bic",
    ])?;
    for (label, est, tag, reports) in rows {
        let mut rec = vec![
            match tag {
                DatasetTag::Original => "original".to_string(),
                DatasetTag::Modified => "modified".to_string(),
            },
            label.clone(),
        ];
        match est {
            Estimator::Mle => rec.extend(std::iter::repeat_n(String::new(), 4)),
            Estimator::Mtm { scheme } => {
                rec.extend(scheme.proportions().map(|p| format!("{p:.6}")))
            }
        }
        for r in reports {
            match r {
                Ok(r) => {
                    let [p0, p1] = r.model.pair();
                    let second = r.sigma_star.unwrap_or(p1);
                    rec.extend([
                        format!("{p0:.2}"),
                        format!("{second:.2}"),
                        format!("{:.4}", r.fit),
                        format!("{:.0}", r.aic),
                        format!("{:.0}", r.bic),
                    ]);
                }
                Err(_) => rec.extend(std::iter::repeat_n(String::new(), 5)),
            }
        }
        w.write_record(rec)?;
    }
    w.into_inner().map_err(|e| Failure::Io(e.to_string()))
}
