//! Asymptotic covariance of trimmed moments and of the MTM estimators,
//! delta-method Jacobians, and efficiency relative to maximum likelihood.

use crate::error::{MtmError, Result};
use crate::estimators::Branch;
use crate::matrix::{det, sandwich, Mat2};
use crate::models::{Base, Family, Model};
use crate::moments::{moment_constant, Scheme, SchemeClass, SchemeConstants, Window};
use crate::quadrature::{integrate, Singular};
use serde::Serialize;
use std::f64::consts::PI;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `min(w, v) - w v`.
pub fn kernel(w: f64, v: f64) -> f64 {
    w.min(v) - w * v
}

/// A function `H` on `(0, 1)` together with the window it is averaged over.
#[derive(Clone, Copy)]
pub struct Component<'a> {
    pub h: &'a dyn Fn(f64) -> f64,
    pub window: Window,
}

impl Component<'_> {
    fn lo(&self) -> f64 {
        self.window.a
    }
    fn hi(&self) -> f64 {
        self.window.upper()
    }
    /// `c · H(u)`, zero when `c == 0` even if `H(u)` is infinite.
    fn scaled(&self, c: f64, u: f64) -> f64 {
        if c == 0.0 {
            0.0
        } else {
            c * (self.h)(u)
        }
    }
    fn integral(&self, lo: f64, hi: f64) -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        integrate(
            self.h,
            lo,
            hi,
            Singular {
                lo: lo == 0.0,
                hi: hi == 1.0,
            },
        )
    }
    /// `hi·H(hi) - lo·H(lo) - ∫_lo^hi H`.
    fn i_lower(&self, lo: f64, hi: f64) -> Result<f64> {
        Ok(self.scaled(hi, hi) - self.scaled(lo, lo) - self.integral(lo, hi)?)
    }
    /// `(1-hi)·H(hi) - (1-lo)·H(lo) + ∫_lo^hi H`.
    fn i_upper(&self, lo: f64, hi: f64) -> Result<f64> {
        Ok(self.scaled(1.0 - hi, hi) - self.scaled(1.0 - lo, lo) + self.integral(lo, hi)?)
    }
}

/// Covariance term `V(i, j) = ∫∫ K(w, v) dH_j(v) dH_i(w)` reduced to single
/// integrals. The arguments may be given in either order; they are swapped
/// so that window `i` sits above window `j`.
pub fn v_single_integral(i: Component<'_>, j: Component<'_>) -> Result<f64> {
    let (i, j) = if j.lo() <= i.lo() && j.hi() <= i.hi() {
        (i, j)
    } else if i.lo() <= j.lo() && i.hi() <= j.hi() {
        (j, i)
    } else {
        return Err(MtmError::Validation(
            "windows are nested; covariance term undefined".into(),
        ));
    };
    let (ai, ui, aj, uj) = (i.lo(), i.hi(), j.lo(), j.hi());
    let bi = 1.0 - ui;
    let bj = 1.0 - uj;
    let hij = |u: f64| (i.h)(u) * (j.h)(u);
    let both = Component {
        h: &hij,
        window: j.window,
    };

    let si_mid = i.integral(ai, uj)?;
    let sj_mid = j.integral(ai, uj)?;
    let si_top = if ui > uj { i.integral(uj, ui)? } else { 0.0 };

    let mut v = 0.0;
    if ai > aj {
        v += j.i_lower(aj, ai)? * i.i_upper(ai, ui)?;
    }
    if bi > 0.0 {
        v += i.scaled(bi, ui) * j.i_lower(ai, uj)?;
    }
    if ai > 0.0 {
        v -= i.scaled(ai, ai) * j.i_upper(ai, uj)?;
    }
    v += both.integral(ai, uj)?;
    if ui > uj {
        v += (j.scaled(uj, uj) - j.scaled(ai, ai)) * si_top;
    }
    v -= (j.scaled(ai, ai) + j.scaled(bj, uj)) * si_mid;
    v -= sj_mid * si_mid + sj_mid * si_top;
    Ok(v)
}

/// `Γ(i, j) = 1 / ((1 - a_i - b_i)(1 - a_j - b_j))`.
pub fn gamma(scheme: &Scheme, i: usize, j: usize) -> f64 {
    1.0 / (scheme.window(i).width() * scheme.window(j).width())
}

fn moment_function(model: &Model, j: usize) -> impl Fn(f64) -> f64 {
    let (a, b) = model.affine();
    let base = model.family().base();
    move |u| {
        let y = a + b * base.transform(u);
        if j == 1 {
            y
        } else {
            y * y
        }
    }
}

/// `V(i, j)` for the moment functions `H_1 = h(F^{-1})`, `H_2 = h(F^{-1})²`
/// of `model`.
pub fn v_entry(model: &Model, scheme: &Scheme, i: usize, j: usize) -> Result<f64> {
    let hi = moment_function(model, i);
    let hj = moment_function(model, j);
    v_single_integral(
        Component {
            h: &hi,
            window: scheme.window(i),
        },
        Component {
            h: &hj,
            window: scheme.window(j),
        },
    )
}

/// Reference evaluation of `V(i, j)` as a product trapezoid rule with `grid`
/// nodes per axis. Slow; intended for checking the single-integral forms.
/// Both windows must lie strictly inside `(0, 1)`.
pub fn v_entry_bruteforce(
    model: &Model,
    scheme: &Scheme,
    i: usize,
    j: usize,
    grid: usize,
) -> Result<f64> {
    let (wi, wj) = (scheme.window(i), scheme.window(j));
    for w in [wi, wj] {
        if w.a <= 0.0 || w.b <= 0.0 {
            return Err(MtmError::Validation(
                "trapezoid reference needs windows strictly inside (0, 1)".into(),
            ));
        }
    }
    if grid < 2 {
        return Err(MtmError::Validation("grid needs at least two nodes".into()));
    }
    let (a, b) = model.affine();
    let base = model.family().base();
    let deriv = |k: usize, u: f64| {
        let ds = b * base.transform_deriv(u);
        if k == 1 {
            ds
        } else {
            2.0 * (a + b * base.transform(u)) * ds
        }
    };
    let nodes = |w: Window, k: usize| -> Vec<(f64, f64)> {
        let step = (w.upper() - w.a) / (grid - 1) as f64;
        (0..grid)
            .map(|m| {
                let u = w.a + step * m as f64;
                let wt = if m == 0 || m == grid - 1 {
                    0.5 * step
                } else {
                    step
                };
                (u, wt * deriv(k, u))
            })
            .collect()
    };
    let ni = nodes(wi, i);
    let nj = nodes(wj, j);
    let total: f64 = ni
        .iter()
        .map(|&(w, gw)| gw * nj.iter().map(|&(v, gv)| kernel(w, v) * gv).sum::<f64>())
        .sum();
    Ok(total)
}

/// Σ_T assembled directly from [`v_entry`].
pub fn sigma_t_single_integral(model: &Model, scheme: &Scheme) -> Result<Mat2> {
    let s11 = gamma(scheme, 1, 1) * v_entry(model, scheme, 1, 1)?;
    let s12 = gamma(scheme, 1, 2) * v_entry(model, scheme, 1, 2)?;
    let s22 = gamma(scheme, 2, 2) * v_entry(model, scheme, 2, 2)?;
    Ok([[s11, s12], [s12, s22]])
}

/// Parameter-free covariance constants (`Λ` for the location-scale
/// families, `Ψ` for Fréchet). Named by moment pair and component: e.g.
/// `l122` pairs `s` on window 1 with `s²/2` on window 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CovarianceConstants {
    pub l111: f64,
    pub l121: f64,
    pub l122: f64,
    pub l221: f64,
    pub l222: f64,
    pub l223: f64,
}

impl CovarianceConstants {
    /// Uses the explicit formulas when window 1 sits above window 2 (or the
    /// windows coincide) and the single-integral route otherwise.
    pub fn new(base: Base, scheme: &Scheme) -> Result<Self> {
        match scheme.class() {
            SchemeClass::Equal | SchemeClass::FirstShiftedUp => Self::explicit(base, scheme),
            SchemeClass::FirstShiftedDown => Self::single_integral(base, scheme),
        }
    }

    /// Generic evaluation through [`v_single_integral`].
    pub fn single_integral(base: Base, scheme: &Scheme) -> Result<Self> {
        let s = |u: f64| base.transform(u);
        let s2 = |u: f64| 0.5 * base.transform(u).powi(2);
        let (w1, w2) = (scheme.first(), scheme.second());
        let v = |f: &dyn Fn(f64) -> f64, wf: Window, g: &dyn Fn(f64) -> f64, wg: Window| {
            v_single_integral(
                Component { h: f, window: wf },
                Component { h: g, window: wg },
            )
        };
        let (g11, g12, g22) = (
            gamma(scheme, 1, 1),
            gamma(scheme, 1, 2),
            gamma(scheme, 2, 2),
        );
        Ok(CovarianceConstants {
            l111: g11 * v(&s, w1, &s, w1)?,
            l121: g12 * v(&s, w1, &s, w2)?,
            l122: g12 * v(&s, w1, &s2, w2)?,
            l221: g22 * v(&s, w2, &s, w2)?,
            l222: g22 * v(&s2, w2, &s, w2)?,
            l223: g22 * v(&s2, w2, &s2, w2)?,
        })
    }

    /// Explicit formulas in terms of moment constants and endpoint values of
    /// `s`; valid when `a2 <= a1 <= 1-b2 <= 1-b1`.
    pub fn explicit(base: Base, scheme: &Scheme) -> Result<Self> {
        if scheme.class() == SchemeClass::FirstShiftedDown {
            return Err(MtmError::Validation(
                "explicit covariance formulas need window 1 above window 2".into(),
            ));
        }
        let [a1, b1, a2, b2] = scheme.proportions();
        let (u1, u2) = (1.0 - b1, 1.0 - b2);
        let (ab1, ab2) = (1.0 - a1, 1.0 - a2);
        let c = |k: u32, lo: f64, hi: f64| moment_constant(base, k, lo, hi);
        // Endpoint values only ever appear multiplied by their proportion.
        let end = |p: f64, u: f64| if p > 0.0 { base.transform(u) } else { 0.0 };
        let (fa1, fa2, fb1, fb2) = (end(a1, a1), end(a2, a2), end(b1, u1), end(b2, u2));
        let (w1, w12, w2) = (1.0 - a1 - b1, 1.0 - a1 - b2, 1.0 - a2 - b2);
        let g11 = 1.0 / (w1 * w1);
        let g12 = 1.0 / (w1 * w2);
        let g22 = 1.0 / (w2 * w2);

        let c1_11 = c(1, a1, u1)?;
        let c2_11 = c(2, a1, u1)?;
        let c1_12 = c(1, a1, u2)?;
        let c2_12 = c(2, a1, u2)?;
        let c3_12 = c(3, a1, u2)?;
        let c1_low = c(1, a2, a1)?;
        let c2_low = c(2, a2, a1)?;
        let c1_top = c(1, u2, u1)?;
        let c1_22 = c(1, a2, u2)?;
        let c2_22 = c(2, a2, u2)?;
        let c3_22 = c(3, a2, u2)?;
        let c4_22 = c(4, a2, u2)?;

        let single =
            |a: f64, ab: f64, b: f64, ub: f64, fa: f64, fb: f64, w: f64, m1: f64, m2: f64| {
                a * ab * fa * fa + b * ub * fb * fb
                    - 2.0 * a * b * fa * fb
                    - 2.0 * w * (a * fa + b * fb) * m1
                    - w * w * m1 * m1
                    + w * m2
            };

        let l111 = g11 * single(a1, ab1, b1, u1, fa1, fb1, w1, c1_11, c2_11);
        let l221 = g22 * single(a2, ab2, b2, u2, fa2, fb2, w2, c1_22, c2_22);

        let low = a1 - a2;
        let top = b2 - b1;
        let l121 = g12
            * (a2 * ab1 * fa1 * fa2 + b1 * u2 * fb1 * fb2
                - a1 * b2 * fa1 * fb2
                - a2 * b1 * fa2 * fb1
                - w12 * (2.0 * a1 * fa1 + b1 * fb1 + b2 * fb2) * c1_12
                - w12 * w12 * c1_12 * c1_12
                + w12 * c2_12
                + w1 * (a1 * fa1 - a2 * fa2) * c1_11
                + low * (ab1 * fa1 - b1 * fb1 - w1 * c1_11) * c1_low
                + top * (u2 * fb2 - a1 * fa1 - w12 * c1_12) * c1_top);

        let l122 = 0.5
            * g12
            * (a2 * ab1 * fa1 * fa2 * fa2 + b1 * u2 * fb1 * fb2 * fb2
                - a2 * b1 * fb1 * fa2 * fa2
                - a1 * b2 * fa1 * fb2 * fb2
                - w12 * (a1 * fa1 * fa1 + b2 * fb2 * fb2) * c1_12
                - w12 * (a1 * fa1 + b1 * fb1) * c2_12
                - w12 * w12 * c1_12 * c2_12
                + w12 * c3_12
                + w1 * (a1 * fa1 * fa1 - a2 * fa2 * fa2) * c1_11
                + low * (ab1 * fa1 - b1 * fb1 - w1 * c1_11) * c2_low
                + top * (u2 * fb2 * fb2 - a1 * fa1 * fa1 - w12 * c2_12) * c1_top);

        let l222 = 0.5
            * g22
            * (a2 * ab2 * fa2.powi(3) + b2 * u2 * fb2.powi(3)
                - a2 * b2 * fa2 * fb2 * (fa2 + fb2)
                - w2 * (a2 * fa2 * fa2 + b2 * fb2 * fb2) * c1_22
                - w2 * (a2 * fa2 + b2 * fb2) * c2_22
                - w2 * w2 * c1_22 * c2_22
                + w2 * c3_22);

        let l223 = 0.25
            * g22
            * (a2 * ab2 * fa2.powi(4) + b2 * u2 * fb2.powi(4)
                - 2.0 * a2 * b2 * fa2 * fa2 * fb2 * fb2
                - 2.0 * w2 * (a2 * fa2 * fa2 + b2 * fb2 * fb2) * c2_22
                - w2 * w2 * c2_22 * c2_22
                + w2 * c4_22);

        Ok(CovarianceConstants {
            l111,
            l121,
            l122,
            l221,
            l222,
            l223,
        })
    }

    /// Σ_T for the affine pair `(A, B)` with `h(F^{-1}(u)) = A + B s(u)`.
    pub fn sigma(&self, affine: (f64, f64)) -> Mat2 {
        let (a, b) = affine;
        let s11 = b * b * self.l111;
        let s12 = 2.0 * a * b * b * self.l121 + 2.0 * b.powi(3) * self.l122;
        let s22 = 4.0 * a * a * b * b * self.l221
            + 8.0 * a * b.powi(3) * self.l222
            + 4.0 * b.powi(4) * self.l223;
        [[s11, s12], [s12, s22]]
    }
}

/// Asymptotic covariance Σ_T of `√n (T̂1, T̂2)`.
pub fn sigma_t(model: &Model, scheme: &Scheme) -> Result<Mat2> {
    Ok(CovarianceConstants::new(model.family().base(), scheme)?.sigma(model.affine()))
}

/// `T2 - r T1²` at the population moments, with `r` the ratio constant.
pub fn discriminant(model: &Model, scheme: &Scheme) -> Result<f64> {
    let k = SchemeConstants::new(model.family().base(), scheme)?;
    let [t1, t2] = k.population(model.affine());
    Ok(t2 - k.ratio * t1 * t1)
}

/// `B (m22 - m11 m12) + A (m12 - m11)`; its square over `eta_cross` equals
/// the discriminant.
pub fn omega(model: &Model, scheme: &Scheme) -> Result<f64> {
    let k = SchemeConstants::new(model.family().base(), scheme)?;
    let (a, b) = model.affine();
    Ok(b * (k.m22 - k.m11 * k.m12) + a * (k.m12 - k.m11))
}

/// Delta-method Jacobian of the estimator map `(T1, T2) -> parameters` at
/// the population moments, for the given root. Rows follow
/// [`Model::pair`]: `(theta, sigma)` or `(beta, sigma)`.
pub fn jacobian(model: &Model, scheme: &Scheme, branch: Branch) -> Result<Mat2> {
    let k = SchemeConstants::new(model.family().base(), scheme)?;
    let [t1, t2] = k.population(model.affine());
    let disc = t2 - k.ratio * t1 * t1;
    if disc <= 0.0 {
        return Err(MtmError::Estimation(format!(
            "discriminant {disc:e} is not positive; Jacobian undefined"
        )));
    }
    let root = k.eta_cross.sqrt() * disc.sqrt();
    let sgn = branch.sign();
    let d_t1 = -sgn * k.ratio * t1 / root;
    let d_t2 = sgn / (2.0 * root);
    Ok(match *model {
        Model::Normal { .. } | Model::Lognormal { .. } => {
            let d21 = d_t1 + (k.m11 - k.m12) / k.eta_cross;
            let d22 = d_t2;
            [[1.0 - k.m11 * d21, -k.m11 * d22], [d21, d22]]
        }
        Model::Frechet { sigma, .. } => {
            let d11 = d_t1 + (k.m12 - k.m11) / k.eta_cross;
            let d12 = d_t2;
            [
                [d11, d12],
                [sigma * (1.0 + d11 * k.m11), sigma * d12 * k.m11],
            ]
        }
    })
}

/// Location-scale plus-branch Jacobian written through [`omega`].
pub fn jacobian_omega_form(model: &Model, scheme: &Scheme) -> Result<Mat2> {
    if model.family() == Family::Frechet {
        return Err(MtmError::Validation(
            "omega form applies to location-scale families".into(),
        ));
    }
    let k = SchemeConstants::new(model.family().base(), scheme)?;
    let [t1, _] = k.population(model.affine());
    let om = omega(model, scheme)?.abs();
    let d22 = 1.0 / (2.0 * om);
    let d21 = (k.m11 - k.m12) / k.eta_cross - k.ratio * t1 / om;
    Ok([[1.0 - k.m11 * d21, -k.m11 * d22], [d21, d22]])
}

/// Asymptotic covariance `D Σ_T Dᵀ` of `√n` times the MTM estimates.
pub fn s_t(model: &Model, scheme: &Scheme, branch: Branch) -> Result<Mat2> {
    Ok(sandwich(
        &jacobian(model, scheme, branch)?,
        &sigma_t(model, scheme)?,
    ))
}

/// Asymptotic covariance of `√n` times the MLE, parameters ordered as in
/// [`Model::pair`].
pub fn s_mle(model: &Model) -> Mat2 {
    match *model {
        Model::Normal { sigma, .. } | Model::Lognormal { sigma, .. } => {
            [[sigma * sigma, 0.0], [0.0, sigma * sigma / 2.0]]
        }
        Model::Frechet { beta, sigma } => {
            let c = 6.0 / (PI * PI);
            let g = 1.0 - EULER_GAMMA;
            let off = c * g * sigma * beta * beta;
            [
                [c * beta * beta, off],
                [
                    off,
                    c * (sigma * beta).powi(2) * ((EULER_GAMMA - 1.0).powi(2) + PI * PI / 6.0),
                ],
            ]
        }
    }
}

/// Asymptotic relative efficiency of an MTM scheme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Are {
    /// `(det S_MLE / det S_T)^{1/2}`; 0 when `singular`.
    pub value: f64,
    pub det_s_mle: f64,
    pub det_s_t: f64,
    pub discriminant: f64,
    /// The discriminant vanishes (to `1e-12` relative), so `det S_T` blows up.
    pub singular: bool,
}

/// Asymptotic relative efficiency of the MTM estimator versus the MLE.
pub fn are(model: &Model, scheme: &Scheme) -> Result<Are> {
    let k = SchemeConstants::new(model.family().base(), scheme)?;
    let [t1, _] = k.population(model.affine());
    let disc = discriminant(model, scheme)?;
    let det_s_mle = det(&s_mle(model));
    if disc.abs() < 1e-12 * t1.powi(2).max(1.0) {
        return Ok(Are {
            value: 0.0,
            det_s_mle,
            det_s_t: f64::INFINITY,
            discriminant: disc,
            singular: true,
        });
    }
    let d = jacobian(model, scheme, Branch::Plus)?;
    let det_s_t = det(&d).powi(2) * det(&sigma_t(model, scheme)?);
    Ok(Are {
        value: (det_s_mle / det_s_t).sqrt(),
        det_s_mle,
        det_s_t,
        discriminant: disc,
        singular: false,
    })
}
