//! Property checks shared by the property-based tests and the acceptance
//! runner. Each returns `Err` with a description of the first violation.
#![allow(dead_code)]

use mtm::asymptotics::{are, jacobian, s_t, CovarianceConstants};
use mtm::estimators::{estimate_from_moments, mle_reference_index, params_on_branch};
use mtm::matrix::det;
use mtm::models::Base;
use mtm::moments::{moment_constant, SchemeConstants};
use mtm::{Branch, Family, Model, Scheme, SchemeClass};
use rand::Rng;

/// Builds a valid scheme from four draws in `[0, 0.3]` and a class index.
pub fn arrange_scheme(p: [f64; 4], class: u8) -> Scheme {
    let (lo_a, hi_a) = (p[0].min(p[1]), p[0].max(p[1]));
    let (lo_b, hi_b) = (p[2].min(p[3]), p[2].max(p[3]));
    match class % 3 {
        // window 1 above window 2: a2 <= a1, b1 <= b2
        0 => Scheme::new(hi_a, lo_b, lo_a, hi_b),
        // window 1 below window 2: a1 <= a2, b2 <= b1
        1 => Scheme::new(lo_a, hi_b, hi_a, lo_b),
        _ => Scheme::equal(p[0], p[2]),
    }
    .expect("arranged scheme is valid")
}

pub fn random_scheme<R: Rng>(rng: &mut R) -> Scheme {
    let p = [(); 4].map(|_| rng.gen_range(0.0..0.3));
    arrange_scheme(p, rng.gen_range(0..3))
}

pub fn random_model<R: Rng>(rng: &mut R, family: Family) -> Model {
    match family {
        Family::Normal => Model::normal(rng.gen_range(-20.0..20.0), rng.gen_range(0.5..8.0)),
        Family::Lognormal => Model::lognormal(rng.gen_range(-5.0..5.0), rng.gen_range(0.2..3.0)),
        Family::Frechet => Model::frechet(rng.gen_range(0.1..10.0), rng.gen_range(0.5..5.0)),
    }
    .unwrap()
}

/// Three models of `family` whose affine location is 0, 1 and -1, so the
/// linear solves in [`check_parameter_independence`] stay well conditioned.
pub fn independence_models<R: Rng>(rng: &mut R, family: Family) -> [Model; 3] {
    [0.0, 1.0, -1.0].map(|a: f64| {
        let b = rng.gen_range(0.5..3.0);
        match family {
            Family::Normal => Model::normal(a, b),
            Family::Lognormal => Model::lognormal(a, b),
            Family::Frechet => Model::frechet(b, a.exp()),
        }
        .unwrap()
    })
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

/// Inequalities on the window constants and the discriminant: positivity
/// of the cross eta value, monotonicity of odd-order constants in window
/// position, `0 < ratio <= 1`, `m22 >= ratio · m11²`, and a nonnegative
/// discriminant at the population moments.
pub fn check_window_inequalities(model: &Model, scheme: &Scheme) -> Result<(), String> {
    let base = model.family().base();
    let k = SchemeConstants::new(base, scheme).map_err(|e| e.to_string())?;
    let tag = || format!("{:?} {scheme}", model);
    ensure(k.eta_cross > 0.0, || {
        format!("{}: eta_cross = {}", tag(), k.eta_cross)
    })?;
    ensure(k.ratio > 0.0 && k.ratio <= 1.0 + 1e-12, || {
        format!("{}: ratio = {}", tag(), k.ratio)
    })?;
    ensure(k.m22 >= k.ratio * k.m11 * k.m11 - 1e-12, || {
        format!(
            "{}: m22 = {} < ratio m11² = {}",
            tag(),
            k.m22,
            k.ratio * k.m11 * k.m11
        )
    })?;
    let [t1, t2] = k.population(model.affine());
    ensure(t2 - k.ratio * t1 * t1 >= -1e-10 * t2.abs().max(1.0), || {
        format!("{}: discriminant {}", tag(), t2 - k.ratio * t1 * t1)
    })?;

    // The normal quantile increases and log(-log u) decreases, so moving the
    // window up raises odd-order constants for the former and lowers them
    // for the latter.
    let (w1, w2) = (scheme.first(), scheme.second());
    for order in [1u32, 3] {
        let c1 = moment_constant(base, order, w1.a, w1.upper()).map_err(|e| e.to_string())?;
        let c2 = moment_constant(base, order, w2.a, w2.upper()).map_err(|e| e.to_string())?;
        let up = match scheme.class() {
            SchemeClass::Equal => continue,
            SchemeClass::FirstShiftedUp => c1 - c2,
            SchemeClass::FirstShiftedDown => c2 - c1,
        };
        let signed = match base {
            Base::Normal => up,
            Base::LogNegLog => -up,
        };
        ensure(signed >= -1e-9, || {
            format!(
                "{}: order-{order} constants out of order ({c1}, {c2})",
                tag()
            )
        })?;
    }
    Ok(())
}

/// Population trimmed moments fed through the estimator return the model.
pub fn check_population_recovery(model: &Model, scheme: &Scheme) -> Result<(), String> {
    let family = model.family();
    let k = SchemeConstants::new(family.base(), scheme).map_err(|e| e.to_string())?;
    let t = k.population(model.affine());
    let reference = model.pair()[mle_reference_index(family)];
    let (fit, _, _) = estimate_from_moments(family, scheme, &k, t, || Ok(reference))
        .map_err(|e| e.to_string())?;
    for (got, want) in fit.pair().iter().zip(model.pair()) {
        ensure((got - want).abs() <= 1e-8 * want.abs().max(1.0), || {
            format!("{model:?} {scheme}: recovered {:?}", fit.pair())
        })?;
    }
    Ok(())
}

/// Analytic Jacobian versus central differences of the branch-restricted
/// estimator map, relative to the largest entry.
pub fn check_jacobian(model: &Model, scheme: &Scheme, branch: Branch) -> Result<(), String> {
    let family = model.family();
    let k = SchemeConstants::new(family.base(), scheme).map_err(|e| e.to_string())?;
    let t = k.population(model.affine());
    let mut analytic = jacobian(model, scheme, branch).map_err(|e| e.to_string())?;
    // The Fréchet scale row is proportional to the scale itself; off the
    // recovering branch the map lands on a different scale.
    if let Model::Frechet { sigma, .. } = model {
        let ratio = params_on_branch(family, &k, t, branch)[1] / sigma;
        analytic[1] = analytic[1].map(|v| v * ratio);
    }
    let scale = analytic
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let disc = t[1] - k.ratio * t[0] * t[0];
    // the estimator map has a square-root kink where the discriminant
    // vanishes, so the step must stay small relative to the distance to it
    let slope = [2.0 * k.ratio * t[0].abs(), 1.0];
    for col in 0..2 {
        let h = (1e-5 * t[col].abs().max(1e-3)).min(1e-3 * disc / slope[col].max(1e-300));
        // Richardson extrapolation of two central differences.
        let central = |h: f64| {
            let mut up = t;
            let mut dn = t;
            up[col] += h;
            dn[col] -= h;
            let pu = params_on_branch(family, &k, up, branch);
            let pd = params_on_branch(family, &k, dn, branch);
            [(pu[0] - pd[0]) / (2.0 * h), (pu[1] - pd[1]) / (2.0 * h)]
        };
        let (d1, d2) = (central(h), central(h / 2.0));
        for row in 0..2 {
            let fd = (4.0 * d2[row] - d1[row]) / 3.0;
            let err = (fd - analytic[row][col]).abs() / scale;
            ensure(err <= 1e-6, || {
                format!(
                    "{model:?} {scheme} {branch:?}: d[{row}][{col}] analytic {} vs numeric {fd} (rel {err:e})",
                    analytic[row][col]
                )
            })?;
        }
    }
    Ok(())
}

/// det(D⁻) + det(D⁺) = 0 and det(S_T) equal on both branches, to 1e-10
/// relative.
pub fn check_branch_identities(model: &Model, scheme: &Scheme) -> Result<(), String> {
    let dp = det(&jacobian(model, scheme, Branch::Plus).map_err(|e| e.to_string())?);
    let dm = det(&jacobian(model, scheme, Branch::Minus).map_err(|e| e.to_string())?);
    ensure((dp + dm).abs() <= 1e-10 * dp.abs(), || {
        format!("{model:?} {scheme}: det sum {}", dp + dm)
    })?;
    let sp = det(&s_t(model, scheme, Branch::Plus).map_err(|e| e.to_string())?);
    let sm = det(&s_t(model, scheme, Branch::Minus).map_err(|e| e.to_string())?);
    ensure((sp - sm).abs() <= 1e-10 * sp.abs(), || {
        format!("{model:?} {scheme}: det S_T {sp} vs {sm}")
    })?;
    let a = are(model, scheme).map_err(|e| e.to_string())?;
    let via_minus = (a.det_s_mle / sm).sqrt();
    ensure((a.value - via_minus).abs() <= 1e-10 * a.value, || {
        format!(
            "{model:?} {scheme}: ARE {} vs minus-branch {via_minus}",
            a.value
        )
    })
}

/// Recovers all six covariance constants from Σ_T at three parameter
/// vectors of the same family and compares them with the parameter-free
/// constants, to 1e-12 relative.
pub fn check_parameter_independence(models: [&Model; 3], scheme: &Scheme) -> Result<(), String> {
    let base = models[0].family().base();
    let lam = CovarianceConstants::new(base, scheme).map_err(|e| e.to_string())?;
    let sig: Vec<_> = models
        .iter()
        .map(|m| mtm::asymptotics::sigma_t(m, scheme).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let ab: Vec<(f64, f64)> = models.iter().map(|m| m.affine()).collect();

    let l111: Vec<f64> = (0..3).map(|r| sig[r][0][0] / (ab[r].1 * ab[r].1)).collect();

    // s12 = 2AB² l121 + 2B³ l122 from the first two models.
    let row12 = |r: usize| {
        let (a, b) = ab[r];
        [2.0 * a * b * b, 2.0 * b.powi(3), sig[r][0][1]]
    };
    let (p, q) = (row12(0), row12(1));
    let d = p[0] * q[1] - p[1] * q[0];
    let l121 = (p[2] * q[1] - p[1] * q[2]) / d;
    let l122 = (p[0] * q[2] - p[2] * q[0]) / d;

    // s22 = 4A²B² l221 + 8AB³ l222 + 4B⁴ l223 from all three.
    let m: Vec<[f64; 4]> = (0..3)
        .map(|r| {
            let (a, b) = ab[r];
            [
                4.0 * a * a * b * b,
                8.0 * a * b.powi(3),
                4.0 * b.powi(4),
                sig[r][1][1],
            ]
        })
        .collect();
    let det3 = |c: [usize; 3]| {
        m[0][c[0]] * (m[1][c[1]] * m[2][c[2]] - m[1][c[2]] * m[2][c[1]])
            - m[0][c[1]] * (m[1][c[0]] * m[2][c[2]] - m[1][c[2]] * m[2][c[0]])
            + m[0][c[2]] * (m[1][c[0]] * m[2][c[1]] - m[1][c[1]] * m[2][c[0]])
    };
    let d3 = det3([0, 1, 2]);
    let l221 = det3([3, 1, 2]) / d3;
    let l222 = det3([0, 3, 2]) / d3;
    let l223 = det3([0, 1, 3]) / d3;

    let mut pairs = vec![
        ("l121", l121, lam.l121),
        ("l122", l122, lam.l122),
        ("l221", l221, lam.l221),
        ("l222", l222, lam.l222),
        ("l223", l223, lam.l223),
    ];
    pairs.extend(l111.iter().map(|&v| ("l111", v, lam.l111)));
    for (name, got, want) in pairs {
        ensure((got - want).abs() <= 1e-12 * want.abs().max(1.0), || {
            format!("{scheme}: implied {name} {got} vs {want}")
        })?;
    }
    Ok(())
}
