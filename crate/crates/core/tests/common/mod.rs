//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use hbl_core::kernel::PolyGaussian;
use hbl_core::mop::{MultiIndexPair, Norm};
use hbl_core::numerics::{Cplx, Real};
use rug::{Float, Rational};

pub fn to_rational(x: &Real) -> Rational {
    x.as_float().to_rational().expect("finite")
}

pub fn from_rational(q: &Rational, prec: u32) -> Real {
    Real::from_float(Float::with_val(prec, q))
}

/// Exact Gauss-Jordan elimination.
pub fn rational_solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Vec<Rational> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).find(|&r| a[r][c] != 0).expect("singular");
        a.swap(c, p);
        b.swap(c, p);
        let piv = a[c][c].clone();
        for r in 0..n {
            if r == c || a[r][c] == 0 {
                continue;
            }
            let f = Rational::from(&a[r][c] / &piv);
            for k in c..n {
                let v = Rational::from(&f * &a[c][k]);
                a[r][k] -= v;
            }
            let v = Rational::from(&f * &b[c]);
            b[r] -= v;
        }
    }
    (0..n).map(|i| Rational::from(&b[i] / &a[i][i])).collect()
}

/// Multiple orthogonal polynomial coefficients solved exactly from the
/// rounded moment tables `[k][l][j]`.
pub fn rational_mop(tables: &[Vec<Vec<Real>>], idx: &MultiIndexPair, norm: Norm) -> Vec<Vec<Rational>> {
    let size = idx.total_n();
    let mut offsets = vec![0];
    for nk in &idx.n {
        offsets.push(offsets.last().unwrap() + nk);
    }
    let row = |l: usize, j: usize| {
        let mut r = vec![Rational::new(); size];
        for (k, &nk) in idx.n.iter().enumerate() {
            for i in 0..nk {
                r[offsets[k] + i] = to_rational(&tables[k][l][i + j]);
            }
        }
        r
    };
    let mut a = Vec::new();
    for (l, &ml) in idx.m.iter().enumerate() {
        for j in 0..ml {
            a.push(row(l, j));
        }
    }
    match norm {
        Norm::TypeII(k) => {
            let mut r = vec![Rational::new(); size];
            r[offsets[k] + idx.n[k] - 1] = Rational::from(1);
            a.push(r);
        }
        Norm::TypeI(l) => a.push(row(l, idx.m[l])),
    }
    let mut b = vec![Rational::new(); size];
    b[size - 1] = Rational::from(1);
    let x = rational_solve(a, b);
    idx.n.iter().enumerate().map(|(k, &nk)| x[offsets[k]..offsets[k] + nk].to_vec()).collect()
}

/// Composite trapezoid rule; spectrally accurate for smooth integrands that
/// decay to zero at both ends.
pub fn trapezoid(f: impl Fn(&Real) -> Real, lo: &Real, hi: &Real, steps: usize) -> Real {
    let h = (hi - lo) / steps as i64;
    let mut acc = (f(lo) + f(hi)) / 2i64;
    for i in 1..steps {
        acc += f(&(lo + &h * i as i64));
    }
    acc * h
}

pub fn rel_err(a: &Real, b: &Real) -> f64 {
    let s = a.abs().max(b.abs());
    if s.is_zero() {
        0.0
    } else {
        ((a - b).abs() / s).to_f64()
    }
}

/// `(Ai(s), Ai'(s))` from MPFR's `ai` at 256 bits; the derivative by a central
/// difference with step 1e-30.
pub fn mpfr_airy(s: f64) -> (f64, f64) {
    let p = 256;
    let ai = |x: &Float| Float::with_val(p, x.ai_ref());
    let x = Float::with_val(p, s);
    let h = Float::with_val(p, 1e-30);
    let d = Float::with_val(p, ai(&Float::with_val(p, &x + &h)) - ai(&Float::with_val(p, &x - &h))) / Float::with_val(p, &h * 2);
    (ai(&x).to_f64(), d.to_f64())
}

/// Integrates `q'' = s q + 2q³` leftward from `s0` with Airy data, using
/// classical RK4 with step-doubling error control. Returns `(q, q')` at
/// every point of `stops` (descending).
pub fn hastings_mcleod_shooting(s0: f64, stops: &[f64], tol: f64) -> Vec<(f64, f64)> {
    fn f(s: f64, y: [f64; 2]) -> [f64; 2] {
        [y[1], s * y[0] + 2.0 * y[0].powi(3)]
    }
    fn rk4(s: f64, y: [f64; 2], h: f64) -> [f64; 2] {
        let k1 = f(s, y);
        let k2 = f(s + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = f(s + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
        let k4 = f(s + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        [y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]), y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])]
    }
    let (a, ap) = mpfr_airy(s0);
    let mut y = [a, ap];
    let mut s = s0;
    let mut h = -1e-3;
    let mut out = Vec::with_capacity(stops.len());
    for &stop in stops {
        while s > stop {
            let last = stop - s >= h;
            let step = if last { stop - s } else { h };
            let full = rk4(s, y, step);
            let half = rk4(s + step / 2.0, rk4(s, y, step / 2.0), step / 2.0);
            let scale = y[0].abs().max(y[1].abs()).max(1e-300);
            let err = ((full[0] - half[0]).abs().max((full[1] - half[1]).abs())) / scale / 15.0;
            if err > tol && step.abs() > 1e-7 {
                h = step / 2.0;
                continue;
            }
            // Richardson-corrected half-step result
            y = [half[0] + (half[0] - full[0]) / 15.0, half[1] + (half[1] - full[1]) / 15.0];
            s = if last { stop } else { s + step };
            if err < tol / 64.0 {
                h = (h * 1.5).max(-0.02);
            }
        }
        out.push((y[0], y[1]));
    }
    out
}

/// `∫ pg(x)/(x-z) dx` by the trapezoid rule; on the real axis the pole is
/// removed by subtracting `pg(x0) e^{-(x-x0)²}` (odd about `x0`, so its
/// principal value vanishes) and adding `iπ pg(x0)`.
pub fn quadrature_cauchy(pg: &PolyGaussian, z: &Cplx) -> Cplx {
    let prec = pg.prec();
    let g = pg.gamma.to_f64();
    let mu = pg.mu.to_f64();
    let half = (200.0 / g).sqrt() + (pg.coeffs.len() as f64 / g).sqrt() * 3.0 + (z.re.to_f64() - mu).abs();
    if z.im.is_zero() {
        let x0 = z.re.clone();
        let f0 = pg.eval(&x0);
        let h = 0.01f64.min(0.2 / g.sqrt());
        let steps = (half / h).ceil() as i64;
        let hh = Real::from_f64(h, prec);
        let mut acc = Real::zero(prec);
        for k in 0..steps {
            for sgn in [1i64, -1] {
                let u = &hh * (2 * k + 1) / 2i64 * sgn;
                let x = &x0 + &u;
                acc += (pg.eval(&x) - &f0 * (-u.sqr()).exp()) / &u;
            }
        }
        return Cplx::new(acc * hh, Real::pi(prec) * f0);
    }
    let steps = 6000;
    let lo = Real::from_f64(mu - half, prec);
    let h = Real::from_f64(2.0 * half / steps as f64, prec);
    let mut acc = Cplx::zero(prec);
    for i in 0..=steps {
        let x = &lo + &h * i as i64;
        let wgt = if i == 0 || i == steps { Real::ratio(1, 2, prec) } else { Real::one(prec) };
        acc += (Cplx::from_real(pg.eval(&x) * wgt)) / (&Cplx::from_real(x) - z);
    }
    acc * &Cplx::from_real(h)
}
