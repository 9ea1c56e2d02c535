//! Finite-n recurrence coefficients confronted with their large-n behaviour:
//! the Painlevé II double-scaling regime, small separation, and exponential
//! decay under large separation.

use rayon::prelude::*;

use crate::model::{classify_separation, painleve_constants, BrownianConfig, ModelError, Regime, Temperature};
use crate::mop::{MopError, MultiIndexPair, WeightSystem};
use crate::numerics::Real;
use crate::painleve::{evaluate_q, solve_hastings_mcleod, PainleveError};
use crate::rh::{assemble_rh_expansion, scalar_product_report, RhError, RhExpansion};

pub const DEFAULT_N_LIST: [usize; 7] = [8, 12, 16, 24, 32, 48, 64];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScalingError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Mop(#[from] MopError),
    #[error(transparent)]
    Rh(#[from] RhError),
    #[error(transparent)]
    Painleve(#[from] PainleveError),
    #[error("deviations vanish to working precision; no rate can be fitted")]
    DegenerateData,
    #[error("invalid request: {0}")]
    InvalidInput(String),
}

/// Bits used at `n` paths: at least `base`, and `256 + 4n` rounded up to a
/// multiple of 64 (moment matrices lose roughly that much to conditioning).
pub fn study_precision(n: usize, base: u32) -> u32 {
    let need = (256 + 4 * n as u32).div_ceil(64) * 64;
    base.max(need)
}

/// One computed quantity, with its predicted leading behaviour when known.
#[derive(Debug, Clone)]
pub struct Observation {
    pub name: &'static str,
    pub value: Real,
    pub predicted: Option<Real>,
}

impl Observation {
    pub fn deviation(&self) -> Option<Real> {
        self.predicted.as_ref().map(|p| (&self.value - p).abs())
    }

    pub fn relative_deviation(&self) -> Option<Real> {
        self.predicted.as_ref().map(|p| (&self.value - p).abs() / p.abs())
    }
}

#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub t_n: Real,
    pub prec: u32,
    pub observations: Vec<Observation>,
    /// Largest residual among the four relations tying the 4×4 coefficients.
    pub relation_residual: Real,
    /// Largest residual over every scalar-product identity.
    pub identity_residual: Real,
}

impl ScalingRow {
    pub fn get(&self, name: &str) -> Option<&Observation> {
        self.observations.iter().find(|o| o.name == name)
    }

    pub fn value(&self, name: &str) -> Option<&Real> {
        self.get(name).map(|o| &o.value)
    }
}

#[derive(Debug, Clone)]
pub struct DoubleScalingStudy {
    pub l: Real,
    pub t: Real,
    pub k: Real,
    pub s: Real,
    /// Hastings–McLeod `q(s)`.
    pub q: Real,
    pub rows: Vec<ScalingRow>,
}

#[derive(Debug, Clone)]
pub struct SmallSeparationStudy {
    pub t: Real,
    pub rows: Vec<ScalingRow>,
    /// Rate fits of `c12c21` and `c14c41` against their limits.
    pub fits: [RateFit; 2],
}

/// Least-squares line through `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Standard error of the slope (zero for two points).
    pub slope_stderr: f64,
}

/// `|v_n − limit| ≈ C n^{-order}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub order: f64,
    pub log_constant: f64,
    pub r_squared: f64,
    /// Standard error of `order`.
    pub stderr: f64,
}

#[derive(Debug, Clone)]
pub struct LargeSeparationDecay {
    pub t: Real,
    pub rows: Vec<ScalingRow>,
    /// `log|c12c21|` against `n`.
    pub c12c21: LinearFit,
    /// `log|c14c41|` against `n`.
    pub c14c41: LinearFit,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_stderr = if x.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    LinearFit { slope, intercept, r_squared, slope_stderr }
}

/// Slope of `log|v − limit|` against `log n`, sign-flipped into an order.
pub fn convergence_rate_fit(values: &[Real], n_list: &[usize], limit: &Real) -> Result<RateFit, ScalingError> {
    if values.len() != n_list.len() {
        return Err(ScalingError::InvalidInput(format!("{} values for {} sizes", values.len(), n_list.len())));
    }
    if values.len() < 4 {
        return Err(ScalingError::InvalidInput("a rate fit needs at least 4 points".into()));
    }
    let prec = values.iter().map(Real::prec).chain([limit.prec()]).max().unwrap();
    let floor = Real::exp2i(16 - prec as i32, prec) * limit.abs().max(Real::one(prec));
    let mut ys = Vec::with_capacity(values.len());
    for v in values {
        let d = (v - limit).abs();
        if d <= floor {
            return Err(ScalingError::DegenerateData);
        }
        ys.push(d.ln().to_f64());
    }
    let xs: Vec<f64> = n_list.iter().map(|&n| (n as f64).ln()).collect();
    let fit = linear_fit(&xs, &ys);
    Ok(RateFit { order: -fit.slope, log_constant: fit.intercept, r_squared: fit.r_squared, stderr: fit.slope_stderr })
}

fn check_n_list(cfg: &BrownianConfig, n_list: &[usize]) -> Result<(), ScalingError> {
    if n_list.is_empty() {
        return Err(ScalingError::InvalidInput("empty n list".into()));
    }
    for &n in n_list {
        let (n1, n2) = cfg.split(n);
        if n1 == 0 || n2 == 0 {
            return Err(ScalingError::InvalidInput(format!("n = {n} leaves a group empty")));
        }
    }
    Ok(())
}

fn require_regime(cfg: &BrownianConfig, regime: Regime, expected: &'static str) -> Result<crate::model::Separation, ScalingError> {
    let sep = classify_separation(cfg)?;
    if sep.regime != regime {
        return Err(ModelError::WrongRegime { expected, found: sep.regime }.into());
    }
    Ok(sep)
}

fn is_half(x: &Real) -> bool {
    (x - 0.5).abs() < Real::exp2i(16 - x.prec() as i32, x.prec())
}

/// Coefficient products and diagonal ratios at `n` paths.
fn compute_row(cfg: &BrownianConfig, t: &Real, n: usize, base_prec: u32) -> Result<(ScalingRow, RhExpansion), ScalingError> {
    let prec = study_precision(n, base_prec);
    let cfg = cfg.with_prec(prec);
    let t = t.with_prec(prec);
    let (n1, n2) = cfg.split(n);
    let ws = WeightSystem::from_config(&cfg, n, &t)?;
    let exp = assemble_rh_expansion(&ws, &MultiIndexPair::new(vec![n1, n2], vec![n1, n2]))?;
    let report = scalar_product_report(&exp);
    let relation_residual = (1..=4)
        .filter_map(|i| report.get(&format!("relation{i}")))
        .fold(Real::zero(prec), |m, r| m.max(r.residual.clone()));
    let identity_residual = report.max_residual();

    // ratios c_ij c_jk / c_ik are invariant under diagonal rescaling and real
    let ratio = |i: usize, j: usize, k: usize| (exp.c(i, j) * exp.c(j, k) / exp.c(i, k)).re;
    let obs = |name, value| Observation { name, value, predicted: None };
    let observations = vec![
        obs("c12c21", exp.product(0, 1)),
        obs("c13c31", exp.product(0, 2)),
        obs("c14c41", exp.product(0, 3)),
        obs("c23c32", exp.product(1, 2)),
        obs("c24c42", exp.product(1, 3)),
        obs("c34c43", exp.product(2, 3)),
        obs("c12c23/c13", ratio(0, 1, 2)),
        obs("c12c24/c14", ratio(0, 1, 3)),
        obs("c21c13/c23", ratio(1, 0, 2)),
        obs("c21c14/c24", ratio(1, 0, 3)),
    ];
    let row = ScalingRow { n, n1, n2, t_n: cfg.temperature_at(n), prec, observations, relation_residual, identity_residual };
    Ok((row, exp))
}

fn set_prediction(row: &mut ScalingRow, name: &str, value: Real) {
    if let Some(o) = row.observations.iter_mut().find(|o| o.name == name) {
        o.predicted = Some(value);
    }
}

fn compute_rows(cfg: &BrownianConfig, t: &Real, n_list: &[usize]) -> Result<Vec<ScalingRow>, ScalingError> {
    let base = cfg.prec().max(t.prec());
    n_list.par_iter().map(|&n| compute_row(cfg, t, n, base).map(|(r, _)| r)).collect()
}

/// Rows at each `n` of `T_n = 1 + L n^{-2/3}` for a critically separated
/// configuration, with the Painlevé II predictions attached.
pub fn double_scaling_study(cfg: &BrownianConfig, l: &Real, t: &Real, n_list: &[usize]) -> Result<DoubleScalingStudy, ScalingError> {
    crate::model::check_time(t)?;
    let cfg = cfg.clone().with_double_scaling(l.clone());
    let sep = require_regime(&cfg, Regime::Critical, "critical")?;
    if (t - &sep.t_crit).abs() < Real::exp2i(16 - t.prec() as i32, t.prec()) {
        return Err(ModelError::InvalidTime(t.to_f64()).into());
    }
    check_n_list(&cfg, n_list)?;
    let prec = cfg.prec().max(t.prec());
    let (k, s) = painleve_constants(&cfg, l);
    let hm = solve_hastings_mcleod(-10.0, 10.0, 1e-12)?;
    let (q, _) = evaluate_q(&hm, &s.with_prec(hm.prec()))?;
    let q = q.with_prec(prec);

    let mut rows = compute_rows(&cfg, t, n_list)?;
    let one_t = Real::one(prec) - t;
    let da = &cfg.a[0] - &cfg.a[1];
    let db = &cfg.b[0] - &cfg.b[1];
    let kq = k.sqr() * q.sqr();
    let (p1, p2) = (&cfg.p[0], &cfg.p[1]);
    for row in &mut rows {
        let n23 = Real::from_int(row.n as i64, prec).powf(&Real::ratio(-2, 3, prec));
        set_prediction(row, "c12c21", -(&kq * t.sqr() * db.sqr() * &n23));
        set_prediction(row, "c14c41", &kq * t * &one_t * &da * &db * &n23);
        let outer = &kq * t * &db * &n23;
        set_prediction(row, "c12c23/c13", -(&outer * (&da * &db / p1).sqrt()));
        set_prediction(row, "c12c24/c14", -(t * (p2 * &db / &da).sqrt()));
        set_prediction(row, "c21c13/c23", t * (p1 * &db / &da).sqrt());
        set_prediction(row, "c21c14/c24", &outer * (&da * &db / p2).sqrt());
    }
    Ok(DoubleScalingStudy { l: l.clone(), t: t.clone(), k, s, q, rows })
}

/// Limits of `c12c21` and `c14c41` under small separation with `p1 = p2 = 1/2`.
/// The closed forms are stated at `T = 1`; other temperatures follow from
/// `x ↦ x/√T`, which multiplies every `c_ij c_ji` by `T`.
pub fn small_separation_limits(cfg: &BrownianConfig, t: &Real) -> (Real, Real) {
    let temp = cfg.limit_temperature();
    let rt = temp.sqrt();
    let da = (&cfg.a[0] - &cfg.a[1]) / &rt;
    let db = (&cfg.b[0] - &cfg.b[1]) / &rt;
    let prec = cfg.prec().max(t.prec());
    let one_t = Real::one(prec) - t;
    let ab = &da * &db;
    let c12 = -(t.sqr() / (da.sqr() * 16i64)) * (Real::from_int(4, prec) - ab.sqr());
    let c14 = t * &one_t / 8i64 * (Real::from_int(2, prec) - &ab);
    (c12 * &temp, c14 * &temp)
}

pub fn small_separation_study(cfg: &BrownianConfig, t: &Real, n_list: &[usize]) -> Result<SmallSeparationStudy, ScalingError> {
    crate::model::check_time(t)?;
    require_regime(cfg, Regime::Small, "small")?;
    if !is_half(&cfg.p[0]) || !is_half(&cfg.p[1]) {
        return Err(ScalingError::InvalidInput("small-separation limits need p1 = p2 = 1/2".into()));
    }
    if matches!(cfg.temperature, Temperature::DoubleScaling { .. }) {
        return Err(ScalingError::InvalidInput("small-separation study needs a fixed temperature".into()));
    }
    check_n_list(cfg, n_list)?;
    let (l12, l14) = small_separation_limits(cfg, t);
    let mut rows = compute_rows(cfg, t, n_list)?;
    for row in &mut rows {
        set_prediction(row, "c12c21", l12.clone());
        set_prediction(row, "c14c41", l14.clone());
    }
    let series = |name: &str| rows.iter().map(|r| r.value(name).unwrap().clone()).collect::<Vec<_>>();
    let fits = [convergence_rate_fit(&series("c12c21"), n_list, &l12)?, convergence_rate_fit(&series("c14c41"), n_list, &l14)?];
    Ok(SmallSeparationStudy { t: t.clone(), rows, fits })
}

pub fn large_separation_decay(cfg: &BrownianConfig, t: &Real, n_list: &[usize]) -> Result<LargeSeparationDecay, ScalingError> {
    crate::model::check_time(t)?;
    require_regime(cfg, Regime::Large, "large")?;
    check_n_list(cfg, n_list)?;
    if n_list.len() < 2 {
        return Err(ScalingError::InvalidInput("a decay fit needs at least 2 sizes".into()));
    }
    let rows = compute_rows(cfg, t, n_list)?;
    let xs: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let fit = |name: &str| -> Result<LinearFit, ScalingError> {
        let mut ys = Vec::with_capacity(rows.len());
        for r in &rows {
            let v = r.value(name).unwrap().abs();
            if v.is_zero() {
                return Err(ScalingError::DegenerateData);
            }
            ys.push(v.ln().to_f64());
        }
        Ok(linear_fit(&xs, &ys))
    };
    Ok(LargeSeparationDecay { t: t.clone(), c12c21: fit("c12c21")?, c14c41: fit("c14c41")?, rows })
}
