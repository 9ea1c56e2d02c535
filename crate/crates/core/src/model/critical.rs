//! Objects attached to the gap between the two groups: the ξ-functions, the
//! reference point `x0*`, the conformal map `f`, and the double-scaling
//! constants `K`, `s`, `c`.

use super::{check_time, classify_separation, ellipse_endpoints, BrownianConfig, ModelError, Regime};
use crate::numerics::quadrature::gauss_legendre;
use crate::numerics::{Cplx, Real};

const QUADRATURE_NODES: usize = 64;
const SCAN_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiMode {
    /// Full complex values; evaluation on a cut is an error.
    Full,
    /// Real parts only, which stay well defined on the cuts.
    RealPart,
}

#[derive(Debug, Clone)]
pub struct XiValues {
    pub xi: [Cplx; 4],
    /// Constants `Ξ1, Ξ2` with `ξ1 + ξ3 = 2Ξ1`, `ξ2 + ξ4 = 2Ξ2`.
    pub big_xi: [Real; 2],
}

#[derive(Debug, Clone)]
pub struct ReferencePoint {
    pub x0: Real,
    /// Residuals of the two product and two sum identities at `x0*`.
    pub residuals: [Real; 4],
}

#[derive(Debug, Clone)]
pub struct XiInequalityReport {
    pub regime: Regime,
    pub x0: Real,
    pub xi: [Real; 4],
    /// `ξ2-ξ3`, `ξ3-ξ4`, `ξ4-ξ1` at `x0`.
    pub gaps: [Real; 3],
}

#[derive(Debug, Clone)]
pub struct ScalingConstants {
    pub k: Real,
    pub s: Real,
    pub c: Real,
    pub x0_star: Real,
    pub t_crit: Real,
    pub temperature_crit: Real,
}

/// `sqrt(z-α)·sqrt(z-β)` with principal roots: cut on `[α, β]`, `~ z` at infinity.
fn branch_sqrt(z: &Cplx, alpha: &Real, beta: &Real) -> Cplx {
    (z - alpha).sqrt() * (z - beta).sqrt()
}

fn one_minus(t: &Real) -> Real {
    Real::one(t.prec()) - t
}

fn big_xi(cfg: &BrownianConfig, t: &Real, j: usize) -> Real {
    let one_t = one_minus(t);
    (-(&one_t * &cfg.a[j]) + t * &cfg.b[j]) / (t * &one_t * 2i64)
}

fn endpoints_pair(cfg: &BrownianConfig, t: &Real, starred: bool) -> Result<[(Real, Real); 2], ModelError> {
    Ok([ellipse_endpoints(cfg, t, 0, starred)?, ellipse_endpoints(cfg, t, 1, starred)?])
}

/// The four ξ-functions at `z`.
pub fn xi_at(cfg: &BrownianConfig, t: &Real, z: &Cplx, starred: bool, mode: XiMode) -> Result<XiValues, ModelError> {
    check_time(t)?;
    let ends = endpoints_pair(cfg, t, starred)?;
    if mode == XiMode::Full && z.im.is_zero() {
        for (alpha, beta) in &ends {
            if z.re > *alpha && z.re < *beta {
                return Err(ModelError::BranchCutEvaluation { alpha: alpha.to_f64(), beta: beta.to_f64() });
            }
        }
    }
    let scale = (t * &one_minus(t) * 2i64).recip();
    let bx = [big_xi(cfg, t, 0), big_xi(cfg, t, 1)];
    let r1 = branch_sqrt(z, &ends[0].0, &ends[0].1).scale(&scale);
    let r2 = branch_sqrt(z, &ends[1].0, &ends[1].1).scale(&scale);
    let mut xi = [&r1 + &bx[0], &r2 + &bx[1], -&r1 + &bx[0], -&r2 + &bx[1]];
    if mode == XiMode::RealPart {
        for v in xi.iter_mut() {
            v.im = Real::zero(v.prec());
        }
    }
    Ok(XiValues { xi, big_xi: bx })
}

fn real_xi(cfg: &BrownianConfig, t: &Real, x: &Real, starred: bool) -> Result<[Real; 4], ModelError> {
    // only called inside the gap, where the imaginary parts vanish
    let v = xi_at(cfg, t, &Cplx::from_real(x.clone()), starred, XiMode::RealPart)?;
    Ok([v.xi[0].re.clone(), v.xi[1].re.clone(), v.xi[2].re.clone(), v.xi[3].re.clone()])
}

fn gaps(xi: &[Real; 4]) -> [Real; 3] {
    [&xi[1] - &xi[2], &xi[2] - &xi[3], &xi[3] - &xi[0]]
}

fn chain_margin(g: &[Real; 3]) -> Real {
    g[0].clone().min(g[1].clone()).min(g[2].clone())
}

fn require_critical(cfg: &BrownianConfig) -> Result<super::Separation, ModelError> {
    let sep = classify_separation(cfg)?;
    if sep.regime != Regime::Critical {
        return Err(ModelError::WrongRegime { expected: "critical", found: sep.regime });
    }
    Ok(sep)
}

fn require_before_crit(t: &Real, t_crit: &Real, inclusive: bool) -> Result<(), ModelError> {
    check_time(t)?;
    let ok = if inclusive { t <= t_crit } else { t < t_crit };
    if !ok {
        return Err(ModelError::InvalidTime(t.to_f64()));
    }
    Ok(())
}

/// Locates (large separation) or verifies at `x0*` (critical separation) the
/// ordering `ξ2 ≥ ξ3 > ξ4 ≥ ξ1` in the gap between the two groups.
pub fn xi_inequality_report(cfg: &BrownianConfig, t: &Real) -> Result<XiInequalityReport, ModelError> {
    let sep = classify_separation(cfg)?;
    match sep.regime {
        Regime::Small => Err(ModelError::WrongRegime { expected: "large or critical", found: Regime::Small }),
        Regime::Critical => {
            require_before_crit(t, &sep.t_crit, true)?;
            let x0 = x0_star(cfg, t)?;
            let xi = real_xi(cfg, t, &x0, true)?;
            Ok(XiInequalityReport { regime: Regime::Critical, gaps: gaps(&xi), x0, xi })
        }
        Regime::Large => {
            require_before_crit(t, &sep.t_crit, true)?;
            let (_, beta2) = ellipse_endpoints(cfg, t, 1, false)?;
            let (alpha1, _) = ellipse_endpoints(cfg, t, 0, false)?;
            let width = &alpha1 - &beta2;
            let at = |i: f64| &beta2 + &width * (i / (SCAN_POINTS as f64 + 1.0));
            let margin_at = |x: &Real| -> Result<(Real, [Real; 4]), ModelError> {
                let xi = real_xi(cfg, t, x, false)?;
                Ok((chain_margin(&gaps(&xi)), xi))
            };
            let mut best: Option<(usize, Real)> = None;
            for i in 1..=SCAN_POINTS {
                let (m, xi) = margin_at(&at(i as f64))?;
                let strict = xi[2] > xi[3];
                if m >= 0.0 && strict && best.as_ref().is_none_or(|(_, b)| m > *b) {
                    best = Some((i, m));
                }
            }
            let (i, _) = best.ok_or(ModelError::InequalityNotFound)?;
            // shrink the bracket around the best grid point, keeping the better half
            let mut lo = at(i as f64 - 1.0);
            let mut hi = at(i as f64 + 1.0);
            let mut x = at(i as f64);
            let (mut mx, _) = margin_at(&x)?;
            for _ in 0..80 {
                let left = (&lo + &x) / 2i64;
                let right = (&x + &hi) / 2i64;
                let (ml, _) = margin_at(&left)?;
                let (mr, _) = margin_at(&right)?;
                if ml > mx && ml >= mr {
                    hi = x;
                    x = left;
                    mx = ml;
                } else if mr > mx {
                    lo = x;
                    x = right;
                    mx = mr;
                } else {
                    lo = left;
                    hi = right;
                }
            }
            let xi = real_xi(cfg, t, &x, false)?;
            if !(xi[2] > xi[3]) || chain_margin(&gaps(&xi)) < 0.0 {
                return Err(ModelError::InequalityNotFound);
            }
            Ok(XiInequalityReport { regime: Regime::Large, gaps: gaps(&xi), x0: x, xi })
        }
    }
}

fn x0_star(cfg: &BrownianConfig, t: &Real) -> Result<Real, ModelError> {
    let [(a1, b1), (a2, b2)] = endpoints_pair(cfg, t, true)?;
    let sp = cfg.sqrt_p_sum();
    let w1 = cfg.p[0].sqrt() / &sp;
    let w2 = cfg.p[1].sqrt() / &sp;
    Ok(w1 * (a2 + b2) / 2i64 + w2 * (a1 + b1) / 2i64)
}

/// `x0*` with the residuals of the identities that characterize it.
pub fn reference_point(cfg: &BrownianConfig, t: &Real) -> Result<ReferencePoint, ModelError> {
    let sep = require_critical(cfg)?;
    require_before_crit(t, &sep.t_crit, false)?;
    let x0 = x0_star(cfg, t)?;
    let [(a1, b1), (a2, b2)] = endpoints_pair(cfg, t, true)?;
    let one_t = one_minus(t);
    let da = &cfg.a[0] - &cfg.a[1];
    let db = &cfg.b[0] - &cfg.b[1];
    let d = &one_t * &da - t * &db;
    let s = &one_t * &da + t * &db;
    let sp = cfg.sqrt_p_sum();
    let w1 = cfg.p[0].sqrt() / &sp;
    let w2 = cfg.p[1].sqrt() / &sp;
    let r = [
        ((&a1 - &x0) * (&b1 - &x0)).sqrt() - &w1 * &d,
        ((&x0 - &a2) * (&x0 - &b2)).sqrt() - &w2 * &d,
        (&a1 + &b1) / 2i64 - &x0 - &w1 * &s,
        &x0 - (&a2 + &b2) / 2i64 - &w2 * &s,
    ];
    Ok(ReferencePoint { x0, residuals: r.map(|v| v.abs()) })
}

/// Integral of `g` along the segment from `x0` to `z`.
fn segment_integral(x0: &Real, z: &Cplx, g: impl Fn(&Cplx) -> Cplx) -> Cplx {
    let prec = z.prec().max(x0.prec());
    let (nodes, weights) = gauss_legendre(QUADRATURE_NODES, prec);
    let half = (z - x0).scale(&Real::ratio(1, 2, prec));
    let mid = z.clone() + x0;
    let mid = mid.scale(&Real::ratio(1, 2, prec));
    let mut acc = Cplx::zero(prec);
    for (u, w) in nodes.iter().zip(&weights) {
        let y = &mid + &half.scale(u);
        acc += g(&y).scale(w);
    }
    acc * half
}

/// `(λ4* - λ3*)(z) = ∫_{x0*}^z (ξ4* - ξ3*)(y) dy`.
pub fn lambda_difference(cfg: &BrownianConfig, t: &Real, z: &Cplx) -> Result<Cplx, ModelError> {
    let sep = require_critical(cfg)?;
    require_before_crit(t, &sep.t_crit, false)?;
    let x0 = x0_star(cfg, t)?;
    let [(a1, b1), (a2, b2)] = endpoints_pair(cfg, t, true)?;
    let scale = (t * &one_minus(t) * 2i64).recip();
    let konst = big_xi(cfg, t, 1) - big_xi(cfg, t, 0);
    Ok(segment_integral(&x0, z, |y| {
        let d = branch_sqrt(y, &a1, &b1) - branch_sqrt(y, &a2, &b2);
        &d.scale(&scale) + &konst.with_prec(y.prec())
    }))
}

fn third_derivative_constant(cfg: &BrownianConfig, t: &Real) -> Real {
    let one_t = one_minus(t);
    let d = &one_t * (&cfg.a[0] - &cfg.a[1]) - t * (&cfg.b[0] - &cfg.b[1]);
    let sp = cfg.sqrt_p_sum();
    sp.powi(4) * 2i64 / (&cfg.p[0] * &cfg.p[1]).sqrt() / d.powi(3)
}

/// Conformal map `f(z) = ((3/8)(λ4*-λ3*)(z))^(1/3)`, real and increasing on the
/// real axis, together with the constant `c = (λ4*-λ3*)'''(x0*)`.
pub fn conformal_map_f(cfg: &BrownianConfig, t: &Real, z: &Cplx) -> Result<(Cplx, Real), ModelError> {
    let lam = lambda_difference(cfg, t, z)?;
    let c = third_derivative_constant(cfg, t);
    let x0 = x0_star(cfg, t)?;
    let dz = z - &x0;
    if dz.is_zero() {
        return Ok((Cplx::zero(z.prec()), c));
    }
    // the ratio below is close to c/16 > 0, so the principal cube root is the
    // analytic branch through x0*
    let ratio = &lam.scale(&Real::ratio(3, 8, z.prec())) / &dz.powi(3);
    Ok((dz * ratio.cbrt(), c))
}

/// Leading term `L/(8 sqrt(t(1-t)) f(z)) [F1(z) - F2(z)]` of `n^(2/3) s_n(z)`.
pub fn sn_leading(cfg: &BrownianConfig, t: &Real, l: &Real, z: &Cplx) -> Result<Cplx, ModelError> {
    let sep = require_critical(cfg)?;
    require_before_crit(t, &sep.t_crit, false)?;
    let x0 = x0_star(cfg, t)?;
    if (z - &x0).is_zero() {
        return Ok(Cplx::from_real(scaling_constants(cfg, t, l)?.s));
    }
    let ends = endpoints_pair(cfg, t, true)?;
    let big_f = |j: usize| {
        let (a, b) = &ends[j];
        let pref = cfg.p[j].sqrt() * (b - a);
        segment_integral(&x0, z, |y| branch_sqrt(y, a, b).recip()).scale(&pref)
    };
    let (f, _) = conformal_map_f(cfg, t, z)?;
    let pref = l / ((t * &one_minus(t)).sqrt() * 8i64);
    Ok((big_f(0) - big_f(1)) / f * pref)
}

/// `K = (p1 p2)^(1/6) / (√p1+√p2)^(4/3)` and the Painlevé argument
/// `s = -(p1 p2)^(1/6) (√p1+√p2)^(2/3) L`; neither depends on `t`.
pub fn painleve_constants(cfg: &BrownianConfig, l: &Real) -> (Real, Real) {
    let prec = cfg.prec();
    let sp = cfg.sqrt_p_sum();
    let pp6 = (&cfg.p[0] * &cfg.p[1]).powf(&Real::ratio(1, 6, prec));
    let k = &pp6 / sp.powf(&Real::ratio(4, 3, prec));
    let s = -(pp6 * sp.powf(&Real::ratio(2, 3, prec)) * l);
    (k, s)
}

/// Constants `K`, `s`, `c`, `x0*` of the double-scaling regime.
pub fn scaling_constants(cfg: &BrownianConfig, t: &Real, l: &Real) -> Result<ScalingConstants, ModelError> {
    let sep = require_critical(cfg)?;
    require_before_crit(t, &sep.t_crit, false)?;
    let (k, s) = painleve_constants(cfg, l);
    Ok(ScalingConstants {
        k,
        s,
        c: third_derivative_constant(cfg, t),
        x0_star: x0_star(cfg, t)?,
        t_crit: sep.t_crit,
        temperature_crit: sep.temperature_crit,
    })
}
