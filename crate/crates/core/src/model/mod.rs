//! Brownian-bridge configuration, separation regimes, ellipse geometry and
//! the limiting semicircle densities.

mod critical;

pub use critical::{
    conformal_map_f, lambda_difference, painleve_constants, reference_point, scaling_constants, sn_leading, xi_at,
    xi_inequality_report, ReferencePoint, ScalingConstants, XiInequalityReport, XiMode, XiValues,
};

use crate::numerics::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("time t must lie in (0,1), got {0}")]
    InvalidTime(f64),
    #[error("x = {x} lies outside the support [{alpha}, {beta}]")]
    OutOfSupport { x: f64, alpha: f64, beta: f64 },
    #[error("the phase boundary is only available for p1 = p2 = 1/2")]
    UnsupportedFractions,
    #[error("operation requires {expected} separation, configuration is {found}")]
    WrongRegime { expected: &'static str, found: Regime },
    #[error("z lies on the branch cut [{alpha}, {beta}]; only the real part is defined there")]
    BranchCutEvaluation { alpha: f64, beta: f64 },
    #[error("no point in (beta2, alpha1) satisfies xi2 >= xi3 > xi4 >= xi1")]
    InequalityNotFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Large,
    Small,
    Critical,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Large => "large",
            Regime::Small => "small",
            Regime::Critical => "critical",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the temperature depends on the number of paths.
#[derive(Debug, Clone, PartialEq)]
pub enum Temperature {
    Fixed(Real),
    /// `T_n = 1 + L n^(-2/3)`.
    DoubleScaling { l: Real },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrownianConfig {
    pub a: [Real; 2],
    pub b: [Real; 2],
    /// Limiting fractions `p_j*`.
    pub p: [Real; 2],
    pub temperature: Temperature,
    /// Explicit inverse variance `N`; when absent `N = n / T_n`.
    pub scale: Option<Real>,
}

impl BrownianConfig {
    pub fn new(a: [Real; 2], b: [Real; 2], p: [Real; 2], temperature: Temperature) -> Result<Self, ModelError> {
        let cfg = BrownianConfig { a, b, p, temperature, scale: None };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Convenience constructor from decimal strings at `prec` bits.
    pub fn from_decimals(a: [&str; 2], b: [&str; 2], p: [&str; 2], temperature: &str, prec: u32) -> Result<Self, ModelError> {
        let parse = |s: &str| Real::parse(s, prec).map_err(|e| ModelError::InvalidConfig(e.to_string()));
        BrownianConfig::new(
            [parse(a[0])?, parse(a[1])?],
            [parse(b[0])?, parse(b[1])?],
            [parse(p[0])?, parse(p[1])?],
            Temperature::Fixed(parse(temperature)?),
        )
    }

    pub fn with_scale(mut self, n_scale: Real) -> Result<Self, ModelError> {
        self.scale = Some(n_scale);
        self.validate()?;
        Ok(self)
    }

    pub fn with_double_scaling(mut self, l: Real) -> Self {
        self.temperature = Temperature::DoubleScaling { l };
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidConfig(m.to_string()));
        if self.a[0] <= self.a[1] {
            return bad("a1 > a2 is required");
        }
        if self.b[0] <= self.b[1] {
            return bad("b1 > b2 is required");
        }
        for p in &self.p {
            if *p <= 0.0 || *p >= 1.0 {
                return bad("fractions must lie in (0,1)");
            }
        }
        let tol = Real::exp2i(-(self.prec() as i32) + 16, self.prec());
        if (&self.p[0] + &self.p[1] - 1.0).abs() > tol {
            return bad("p1 + p2 must equal 1");
        }
        if let Temperature::Fixed(t) = &self.temperature {
            if *t <= 0.0 {
                return bad("temperature must be positive");
            }
        }
        if let Some(s) = &self.scale {
            if *s <= 0.0 {
                return bad("N must be positive");
            }
        }
        Ok(())
    }

    pub fn prec(&self) -> u32 {
        self.a.iter().chain(&self.b).chain(&self.p).map(|x| x.prec()).max().unwrap_or(256)
    }

    /// Copy with every field rounded or widened to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        let w = |x: &Real| x.with_prec(prec);
        BrownianConfig {
            a: [w(&self.a[0]), w(&self.a[1])],
            b: [w(&self.b[0]), w(&self.b[1])],
            p: [w(&self.p[0]), w(&self.p[1])],
            temperature: match &self.temperature {
                Temperature::Fixed(t) => Temperature::Fixed(w(t)),
                Temperature::DoubleScaling { l } => Temperature::DoubleScaling { l: w(l) },
            },
            scale: self.scale.as_ref().map(w),
        }
    }

    /// Temperature seen in the `n → ∞` limit.
    pub fn limit_temperature(&self) -> Real {
        match &self.temperature {
            Temperature::Fixed(t) => t.clone(),
            Temperature::DoubleScaling { .. } => Real::one(self.prec()),
        }
    }

    /// `T_n` for `n` paths.
    pub fn temperature_at(&self, n: usize) -> Real {
        match &self.temperature {
            Temperature::Fixed(t) => t.clone(),
            Temperature::DoubleScaling { l } => {
                let prec = self.prec();
                let nn = Real::from_int(n as i64, prec);
                Real::one(prec) + l * nn.powf(&Real::ratio(-2, 3, prec))
            }
        }
    }

    /// `(n1, n2)` with `n1 = round(p1 n)`.
    pub fn split(&self, n: usize) -> (usize, usize) {
        let n1 = (&self.p[0] * n as i64).round_to_i64().unwrap_or(0).clamp(0, n as i64) as usize;
        (n1, n - n1)
    }

    /// Inverse variance `N` used at `n` paths.
    pub fn inverse_variance(&self, n: usize) -> Real {
        match &self.scale {
            Some(s) => s.clone(),
            None => Real::from_int(n as i64, self.prec()) / self.temperature_at(n),
        }
    }

    /// Mirror image under `x ↦ -x` (group labels exchanged so orderings hold).
    pub fn reflected(&self) -> Self {
        BrownianConfig {
            a: [-&self.a[1], -&self.a[0]],
            b: [-&self.b[1], -&self.b[0]],
            p: [self.p[1].clone(), self.p[0].clone()],
            temperature: self.temperature.clone(),
            scale: self.scale.clone(),
        }
    }

    /// Starting and ending positions exchanged (time reversal `t ↦ 1-t`).
    pub fn time_reversed(&self) -> Self {
        BrownianConfig {
            a: self.b.clone(),
            b: self.a.clone(),
            p: self.p.clone(),
            temperature: self.temperature.clone(),
            scale: self.scale.clone(),
        }
    }

    pub(crate) fn sqrt_p_sum(&self) -> Real {
        self.p[0].sqrt() + self.p[1].sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Separation {
    pub regime: Regime,
    pub t_crit: Real,
    pub temperature_crit: Real,
}

/// Regime of the configuration at its limiting temperature.
pub fn classify_separation(cfg: &BrownianConfig) -> Result<Separation, ModelError> {
    cfg.validate()?;
    let da = &cfg.a[0] - &cfg.a[1];
    let db = &cfg.b[0] - &cfg.b[1];
    let sp2 = cfg.sqrt_p_sum().sqr();
    let temp = cfg.limit_temperature();
    let lhs = &da * &db;
    let rhs = &temp * &sp2;
    let tol = &temp * 1e-12;
    let regime = if (&lhs - &rhs).abs() <= tol {
        Regime::Critical
    } else if lhs > rhs {
        Regime::Large
    } else {
        Regime::Small
    };
    Ok(Separation { regime, t_crit: &da / (&da + &db), temperature_crit: &lhs / &sp2 })
}

pub(crate) fn check_time(t: &Real) -> Result<(), ModelError> {
    if *t <= 0.0 || *t >= 1.0 {
        return Err(ModelError::InvalidTime(t.to_f64()));
    }
    Ok(())
}

fn endpoints(cfg: &BrownianConfig, t: &Real, j: usize, p: &Real, temp: &Real) -> (Real, Real) {
    let one_t = Real::one(t.prec()) - t;
    let centre = &one_t * &cfg.a[j] + t * &cfg.b[j];
    let half = (p * temp * t * &one_t * 4i64).sqrt();
    (&centre - &half, centre + half)
}

/// `(α_j, β_j)` at time `t` for group `j ∈ {0, 1}`. Starred values use `p_j*`
/// and `T = 1`; unstarred values use `p_j*` and the limiting temperature.
pub fn ellipse_endpoints(cfg: &BrownianConfig, t: &Real, j: usize, starred: bool) -> Result<(Real, Real), ModelError> {
    check_time(t)?;
    let temp = if starred { Real::one(cfg.prec()) } else { cfg.limit_temperature() };
    Ok(endpoints(cfg, t, j, &cfg.p[j], &temp))
}

/// Endpoints at finite `n`: `p_j = n_j / n` and `T = T_n`.
pub fn ellipse_endpoints_at(cfg: &BrownianConfig, t: &Real, j: usize, n: usize) -> Result<(Real, Real), ModelError> {
    check_time(t)?;
    let (n1, _) = cfg.split(n);
    let nj = if j == 0 { n1 } else { n - n1 };
    let p = Real::ratio(nj as i64, n as i64, cfg.prec());
    Ok(endpoints(cfg, t, j, &p, &cfg.temperature_at(n)))
}

/// Limiting density of group `j` at `x`, of total mass `p_j`.
pub fn semicircle_density(cfg: &BrownianConfig, t: &Real, j: usize, x: &Real) -> Result<Real, ModelError> {
    let (alpha, beta) = ellipse_endpoints(cfg, t, j, false)?;
    if *x < alpha || *x > beta {
        return Err(ModelError::OutOfSupport { x: x.to_f64(), alpha: alpha.to_f64(), beta: beta.to_f64() });
    }
    let temp = cfg.limit_temperature();
    let one_t = Real::one(t.prec()) - t;
    let denom = Real::pi(cfg.prec()) * 2i64 * &temp * t * &one_t;
    Ok(((&beta - x) * (x - &alpha)).sqrt() / denom)
}

/// Temperature on the boundary curve in the `(t, T)` plane (`p1 = p2 = 1/2`).
pub fn phase_boundary(cfg: &BrownianConfig, t: &Real) -> Result<Real, ModelError> {
    check_time(t)?;
    let tol = Real::exp2i(-(cfg.prec() as i32) + 16, cfg.prec());
    if (&cfg.p[0] - &cfg.p[1]).abs() > tol {
        return Err(ModelError::UnsupportedFractions);
    }
    let one_t = Real::one(t.prec()) - t;
    let da = &cfg.a[0] - &cfg.a[1];
    let db = &cfg.b[0] - &cfg.b[1];
    Ok((da.sqr() * one_t.sqr() + db.sqr() * t.sqr()) / (t * &one_t * 4i64))
}
