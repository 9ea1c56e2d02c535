//! The spectral curve `det(ξI + V(z)/n) = 0` and the large-z expansions of its
//! branches.

use super::{LaxMatrix, RhError, RhExpansion};
use crate::mop::MopError;
use crate::numerics::{solve_linear, Cplx, Matrix, Real};

/// Radii at which the branches are sampled; the last one only estimates the
/// fit error.
pub const PROBE_RADII: [i32; 4] = [12, 13, 14, 15];

/// `Σ coeffs[i][j] ξ^i z^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariatePoly {
    pub coeffs: Vec<Vec<Cplx>>,
}

impl BivariatePoly {
    fn constant(c: Cplx) -> Self {
        BivariatePoly { coeffs: vec![vec![c]] }
    }

    /// `c0 + cz z + cxi ξ`.
    fn affine(c0: Cplx, cz: Cplx, cxi: Cplx) -> Self {
        let zero = Cplx::zero(c0.prec());
        BivariatePoly { coeffs: vec![vec![c0, cz], vec![cxi, zero]] }
    }

    pub fn degree_xi(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Highest power of `z` with a nonzero coefficient.
    pub fn degree_z(&self) -> usize {
        self.coeffs.iter().filter_map(|row| row.iter().rposition(|c| !c.is_zero())).max().unwrap_or(0)
    }

    fn width(&self) -> usize {
        self.coeffs.iter().map(Vec::len).max().unwrap_or(1)
    }

    fn prec(&self) -> u32 {
        self.coeffs[0][0].prec()
    }

    fn get(&self, i: usize, j: usize) -> Option<&Cplx> {
        self.coeffs.get(i).and_then(|r| r.get(j))
    }

    fn zip(&self, o: &Self, f: impl Fn(Option<&Cplx>, Option<&Cplx>) -> Cplx) -> Self {
        let di = self.coeffs.len().max(o.coeffs.len());
        let dj = self.width().max(o.width());
        BivariatePoly { coeffs: (0..di).map(|i| (0..dj).map(|j| f(self.get(i, j), o.get(i, j))).collect()).collect() }
    }

    fn add(&self, o: &Self) -> Self {
        let zero = Cplx::zero(self.prec());
        self.zip(o, |a, b| a.unwrap_or(&zero) + b.unwrap_or(&zero))
    }

    fn sub(&self, o: &Self) -> Self {
        let zero = Cplx::zero(self.prec());
        self.zip(o, |a, b| a.unwrap_or(&zero) - b.unwrap_or(&zero))
    }

    fn mul(&self, o: &Self) -> Self {
        let prec = self.prec();
        let di = self.coeffs.len() + o.coeffs.len() - 1;
        let dj = self.width() + o.width() - 1;
        let mut out = vec![vec![Cplx::zero(prec); dj]; di];
        for (i, ri) in self.coeffs.iter().enumerate() {
            for (j, a) in ri.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (k, rk) in o.coeffs.iter().enumerate() {
                    for (l, b) in rk.iter().enumerate() {
                        out[i + k][j + l] += &(a * b);
                    }
                }
            }
        }
        BivariatePoly { coeffs: out }
    }

    pub fn eval(&self, xi: &Cplx, z: &Cplx) -> Cplx {
        self.coeffs_in_xi(z).iter().rev().fold(Cplx::zero(xi.prec()), |acc, c| &(acc * xi) + c)
    }

    /// Coefficients of the univariate polynomial in `ξ` at fixed `z`.
    pub fn coeffs_in_xi(&self, z: &Cplx) -> Vec<Cplx> {
        self.coeffs.iter().map(|row| row.iter().rev().fold(Cplx::zero(z.prec()), |acc, c| &(acc * z) + c)).collect()
    }
}

fn det(m: &[Vec<BivariatePoly>]) -> BivariatePoly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let prec = m[0][0].prec();
    let mut acc = BivariatePoly::constant(Cplx::zero(prec));
    for c in 0..n {
        let minor: Vec<Vec<BivariatePoly>> = m[1..].iter().map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect()).collect();
        let term = m[0][c].mul(&det(&minor));
        acc = if c % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// Fitted `ξ(z) ≈ c1 z + c0 + c_{-1}/z` of one branch.
#[derive(Debug, Clone)]
pub struct SpectralBranch {
    /// `k` for branches `1..p`, `p + l` for the rest (0-based).
    pub label: usize,
    pub c1: Real,
    pub c0: Real,
    pub c_minus1: Real,
    /// `(c1, c0, c_{-1})` predicted from the multi-index and the weights.
    pub expected: [Real; 3],
    /// Misfit at the extra radius, in units of the `1/z` coefficient.
    pub fit_error: Real,
}

impl SpectralBranch {
    pub fn max_deviation(&self) -> Real {
        let got = [&self.c1, &self.c0, &self.c_minus1];
        got.iter().zip(&self.expected).map(|(g, e)| (*g - e).abs()).fold(Real::zero(self.c1.prec()), Real::max)
    }
}

#[derive(Debug, Clone)]
pub struct SpectralCurve {
    pub poly: BivariatePoly,
    pub branches: Vec<SpectralBranch>,
    /// `n = |n| = |m|`.
    pub n: usize,
}

fn roots(coeffs: &[Cplx], seeds: Vec<Cplx>) -> Vec<Cplx> {
    // Weierstrass iteration on a monic polynomial from nearby seeds
    let prec = coeffs[0].prec();
    let lead = coeffs.last().unwrap().clone();
    let mut x = seeds;
    let tol = Real::exp2i(16 - prec as i32, prec);
    for _ in 0..400 {
        let mut done = true;
        let old = x.clone();
        for i in 0..x.len() {
            let p = coeffs.iter().rev().fold(Cplx::zero(prec), |acc, c| &(acc * &old[i]) + c);
            let mut den = lead.clone();
            for (j, xj) in old.iter().enumerate() {
                if j != i {
                    den = &den * &(&old[i] - xj);
                }
            }
            let step = &p / &den;
            if step.abs() > &tol * old[i].abs().max(Real::one(prec)) {
                done = false;
            }
            x[i] = &old[i] - &step;
        }
        if done {
            break;
        }
    }
    x
}

/// `P(ξ, z) = det(ξI + V(z)/n)` with the branch expansions at infinity.
pub fn spectral_curve(exp: &RhExpansion) -> Result<SpectralCurve, RhError> {
    let n = exp.idx.total_n();
    if n == 0 {
        return Err(MopError::InvalidIndex("the spectral curve needs |n| > 0".into()).into());
    }
    let (p, q) = (exp.p(), exp.q());
    let size = p + q;
    let prec = exp.prec().max(256) + 64;
    let lax = LaxMatrix::new(exp);
    let (v0, v1) = lax.coefficients();
    let inv_n = Real::one(prec) / n as i64;
    let zero = Cplx::zero(prec);
    let m: Vec<Vec<BivariatePoly>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| {
                    let xi = if i == j { Cplx::one(prec) } else { zero.clone() };
                    BivariatePoly::affine(v0[(i, j)].with_prec(prec).scale(&inv_n), v1[(i, j)].with_prec(prec).scale(&inv_n), xi)
                })
                .collect()
        })
        .collect();
    let poly = det(&m);

    let radii: Vec<Real> = PROBE_RADII.iter().map(|&e| Real::from_int(10, prec).powi(e)).collect();
    let mut samples: Vec<Vec<Cplx>> = Vec::new();
    for r in &radii {
        let z = Cplx::from_real(r.clone());
        let vz = lax.eval(&z.with_prec(exp.prec()));
        // the diagonal of -V/n is within O(1/z) of the eigenvalues
        let seeds = (0..size).map(|i| (-vz[(i, i)].with_prec(prec)).scale(&inv_n) + Cplx::from_f64(1e-3 * (i as f64 + 1.0), 0.0, prec)).collect();
        let ev = roots(&poly.coeffs_in_xi(&z), seeds);
        for i in 0..size {
            for j in i + 1..size {
                if (&ev[i] - &ev[j]).abs() < 1e-15 {
                    return Err(RhError::BranchCollision(i + 1, j + 1));
                }
            }
        }
        samples.push(ev);
    }

    let mut fits = Vec::with_capacity(size);
    for b in 0..size {
        let a = Matrix::from_fn(3, 3, |i, j| match j {
            0 => radii[i].clone(),
            1 => Real::one(prec),
            _ => radii[i].recip(),
        });
        let rhs: Vec<Real> = (0..3).map(|i| samples[i][b].re.clone()).collect();
        let c = solve_linear(&a, &rhs).map_err(MopError::from)?;
        let r4 = &radii[3];
        let model = &c[0] * r4 + &c[1] + &c[2] / r4;
        let fit_error = (&samples[3][b].re - model).abs() * r4;
        fits.push((c, fit_error));
    }

    // label: the p branches with nonzero slope follow a in decreasing order
    // (their constants increase), the others follow b in decreasing order
    let mut by_slope: Vec<usize> = (0..size).collect();
    by_slope.sort_by(|&i, &j| fits[j].0[0].abs().partial_cmp(&fits[i].0[0].abs()).unwrap());
    let (mut top, mut bottom) = (by_slope[..p].to_vec(), by_slope[p..].to_vec());
    top.sort_by(|&i, &j| fits[i].0[1].partial_cmp(&fits[j].0[1]).unwrap());
    bottom.sort_by(|&i, &j| fits[j].0[1].partial_cmp(&fits[i].0[1]).unwrap());
    let order = |v: &[Real]| {
        let mut o: Vec<usize> = (0..v.len()).collect();
        o.sort_by(|&i, &j| v[j].partial_cmp(&v[i]).unwrap());
        o
    };
    let ws = &exp.ws;
    let nn = Real::from_int(n as i64, prec);
    let big_n = ws.n_scale.with_prec(prec);
    let t = ws.t.with_prec(prec);
    let omt = Real::one(prec) - &t;
    let mut branches: Vec<Option<SpectralBranch>> = vec![None; size];
    for (slot, k) in top.iter().zip(order(&ws.a)) {
        let expected = [
            &big_n / (&nn * &t * &omt),
            -(&big_n * &ws.a[k] / (&nn * &t)),
            -(Real::from_int(exp.idx.n[k] as i64, prec) / &nn),
        ];
        let (c, e) = &fits[*slot];
        branches[k] = Some(SpectralBranch { label: k, c1: c[0].clone(), c0: c[1].clone(), c_minus1: c[2].clone(), expected, fit_error: e.clone() });
    }
    for (slot, l) in bottom.iter().zip(order(&ws.b)) {
        let expected = [Real::zero(prec), &big_n * &ws.b[l] / (&nn * &omt), Real::from_int(exp.idx.m[l] as i64, prec) / &nn];
        let (c, e) = &fits[*slot];
        branches[p + l] = Some(SpectralBranch { label: p + l, c1: c[0].clone(), c0: c[1].clone(), c_minus1: c[2].clone(), expected, fit_error: e.clone() });
    }
    Ok(SpectralCurve { poly, branches: branches.into_iter().map(Option::unwrap).collect(), n })
}

impl SpectralCurve {
    /// The constant `N b_l / (n t)` as printed for the lower branches; it
    /// coincides with the fitted `N b_l / (n (1-t))` only at `t = 1/2`.
    pub fn printed_c0(exp: &RhExpansion, l: usize) -> Real {
        let n = exp.idx.total_n() as i64;
        &exp.ws.n_scale * &exp.ws.b[l] / (&exp.ws.t * n)
    }

    pub fn max_deviation(&self) -> Real {
        self.branches.iter().map(SpectralBranch::max_deviation).fold(Real::zero(64), Real::max)
    }
}
