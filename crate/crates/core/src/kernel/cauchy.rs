//! Cauchy transforms of polynomial-times-Gaussian densities through the
//! Faddeeva function.

use crate::numerics::{faddeeva, faddeeva_derivative, Cplx, Real};

/// `P(x) exp(-γ(x-μ)² + c)` with `P(x) = Σ coeffs[j] x^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyGaussian {
    pub coeffs: Vec<Real>,
    pub gamma: Real,
    pub mu: Real,
    pub c: Real,
}

impl PolyGaussian {
    pub fn new(coeffs: Vec<Real>, gamma: Real, mu: Real, c: Real) -> Self {
        assert!(gamma > 0.0, "gamma must be positive");
        PolyGaussian { coeffs, gamma, mu, c }
    }

    pub fn prec(&self) -> u32 {
        self.coeffs.iter().map(Real::prec).chain([self.gamma.prec(), self.mu.prec(), self.c.prec()]).max().unwrap()
    }

    pub fn eval(&self, x: &Real) -> Real {
        let p = self.coeffs.iter().rev().fold(Real::zero(x.prec()), |acc, a| acc * x + a);
        p * (-(&self.gamma * (x - &self.mu).sqr()) + &self.c).exp()
    }

    /// `∫ x^j exp(-γ(x-μ)² + c) dx` for `j < count`, at `prec` bits.
    pub fn gaussian_moments(&self, count: usize, prec: u32) -> Vec<Real> {
        let g = self.gamma.with_prec(prec);
        let mu = self.mu.with_prec(prec);
        let half_inv = (&g * 2i64).recip();
        let mut out: Vec<Real> = Vec::with_capacity(count);
        for j in 0..count {
            let v = match j {
                0 => (Real::pi(prec) / &g).sqrt() * self.c.with_prec(prec).exp(),
                1 => &mu * &out[0],
                _ => &mu * &out[j - 1] + &out[j - 2] * &half_inv * (j as i64 - 1),
            };
            out.push(v);
        }
        out
    }

    /// Total mass `∫ P(x) exp(-γ(x-μ)²+c) dx`.
    pub fn mass(&self) -> Real {
        let m = self.gaussian_moments(self.coeffs.len(), self.prec());
        self.coeffs.iter().zip(&m).fold(Real::zero(self.prec()), |acc, (a, v)| acc + a * v)
    }

    /// Length scale `max(|μ|, γ^(-1/2))` used to size guard bits.
    fn scale(&self) -> f64 {
        self.mu.to_f64().abs().max(1.0 / self.gamma.to_f64().sqrt())
    }
}

/// Guard bits for the upward recursion and for cancellation between terms
/// whose sum decays faster than each term.
fn guard_bits(pgs: &[PolyGaussian], z: &Cplx) -> u32 {
    let deg = pgs.iter().map(|p| p.coeffs.len()).max().unwrap_or(0) as f64;
    let s = pgs.iter().map(PolyGaussian::scale).fold(f64::INFINITY, f64::min);
    let (re, im) = z.to_f64_pair();
    let ratio = re.hypot(im) / s;
    ((2.0 * deg + 8.0) * (2.0 + ratio).log2()).ceil() as u32 + 32
}

/// `Σ ∫ pg(x)/(x-z) dx` for `Im z ≥ 0` (boundary value from above on the axis),
/// with its `z`-derivative when asked.
fn upper_sum(pgs: &[PolyGaussian], z: &Cplx, derivative: bool, out_prec: u32) -> (Cplx, Option<Cplx>) {
    let wp = out_prec + guard_bits(pgs, z);
    let z = z.with_prec(wp);
    let i_pi = Cplx::new(Real::zero(wp), Real::pi(wp));
    let mut total = Cplx::zero(wp);
    let mut total_d = Cplx::zero(wp);
    for pg in pgs {
        if pg.coeffs.is_empty() {
            continue;
        }
        let sg = pg.gamma.with_prec(wp).sqrt();
        let zeta = (&z - &pg.mu.with_prec(wp)).scale(&sg);
        let w = faddeeva(&zeta);
        let ec = pg.c.with_prec(wp).exp();
        // J_0 = ∫ e^{-γ(x-μ)²+c}/(x-z) dx = iπ e^c w(ζ)
        let mut j = (&i_pi * &w).scale(&ec);
        let mut jd = if derivative { (&i_pi * &faddeeva_derivative(&zeta, &w)).scale(&(&ec * &sg)) } else { Cplx::zero(wp) };
        let m = pg.gaussian_moments(pg.coeffs.len(), wp);
        for (idx, a) in pg.coeffs.iter().enumerate() {
            if idx > 0 {
                // x^j/(x-z) = x^{j-1} + z x^{j-1}/(x-z)
                if derivative {
                    jd = &j + &(&z * &jd);
                }
                j = &(&z * &j) + &m[idx - 1];
            }
            let a = a.with_prec(wp);
            total += j.scale(&a);
            if derivative {
                total_d += jd.scale(&a);
            }
        }
    }
    (total.with_prec(out_prec), derivative.then(|| total_d.with_prec(out_prec)))
}

/// Raw integral `Σ ∫ pg(x)/(x-z) dx` and optionally its derivative. The lower
/// half plane is reached by conjugation, valid for real data.
pub fn cauchy_integral_sum(pgs: &[PolyGaussian], z: &Cplx, derivative: bool) -> (Cplx, Option<Cplx>) {
    let prec = pgs.iter().map(PolyGaussian::prec).chain([z.prec()]).max().unwrap();
    if z.im.is_sign_negative() && !z.im.is_zero() {
        let (v, d) = upper_sum(pgs, &z.conj(), derivative, prec);
        return (v.conj(), d.map(|d| d.conj()));
    }
    upper_sum(pgs, z, derivative, prec)
}

/// `(1/(2πi)) ∫ pg(x)/(x-z) dx`, boundary value from above for real `z`.
pub fn cauchy_transform(pg: &PolyGaussian, z: &Cplx) -> Cplx {
    let (v, _) = cauchy_integral_sum(std::slice::from_ref(pg), z, false);
    divide_by_two_pi_i(&v)
}

/// Derivative in `z` of [`cauchy_transform`].
pub fn cauchy_transform_derivative(pg: &PolyGaussian, z: &Cplx) -> Cplx {
    let (_, d) = cauchy_integral_sum(std::slice::from_ref(pg), z, true);
    divide_by_two_pi_i(&d.unwrap())
}

pub(crate) fn divide_by_two_pi_i(v: &Cplx) -> Cplx {
    // v/(2πi) = -i v/(2π)
    let two_pi = Real::pi(v.prec()) * 2i64;
    Cplx::new(&v.im / &two_pi, -(&v.re / &two_pi))
}
