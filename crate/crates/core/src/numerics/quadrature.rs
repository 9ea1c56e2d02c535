//! Gauss–Legendre rules at arbitrary precision.

use super::real::Real;

/// Nodes and weights of the `n`-point rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize, prec: u32) -> (Vec<Real>, Vec<Real>) {
    assert!(n >= 1);
    let wp = prec + 32;
    let eps = Real::exp2i(-(prec as i32) - 8, wp);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = Real::from_f64(guess, wp);
        let mut dp;
        loop {
            let (p, d) = legendre(n, &x);
            dp = d;
            let dx = &p / &dp;
            x -= &dx;
            if dx.abs() <= eps {
                let (_, d) = legendre(n, &x);
                dp = d;
                break;
            }
        }
        let w = Real::from_int(2, wp) / ((Real::one(wp) - x.sqr()) * dp.sqr());
        nodes.push(x.with_prec(prec));
        weights.push(w.with_prec(prec));
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: &Real) -> (Real, Real) {
    let prec = x.prec();
    let mut p0 = Real::one(prec);
    let mut p1 = x.clone();
    for k in 2..=n {
        let k = k as i64;
        let p2 = (x * &p1 * (2 * k - 1) - &p0 * (k - 1)) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (Real::one(prec), Real::zero(prec));
    }
    let d = (&p0 - x * &p1) * (n as i64) / (Real::one(prec) - x.sqr());
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(12, 256);
        let total: Real = w.iter().fold(Real::zero(256), |a, b| a + b);
        assert!((total - 2.0).abs() < 1e-70);
        // ∫ x^22 = 2/23
        let m = x.iter().zip(&w).fold(Real::zero(256), |a, (xi, wi)| a + xi.powi(22) * wi);
        assert!((m - Real::ratio(2, 23, 256)).abs() < 1e-70);
    }
}
