//! The Hastings–McLeod solution of Painlevé II, `q'' = s q + 2 q³` with
//! `q(s) ~ Ai(s)` as `s → +∞`, and its Hamiltonian `u = q'² − s q² − q⁴`.
//!
//! The boundary-value problem is discretized by Chebyshev collocation on
//! `[s_lo, s_hi]`. Dirichlet data come from `Ai` on the right and from the
//! algebraic expansion `sqrt(−s/2)(1 + 1/(8s³) − …)` on the left; both
//! boundary errors decay exponentially into the interior because the
//! linearized equation is hyperbolic on either side.

use crate::numerics::{airy_ai_pair, Matrix, Real};

/// Bits carried by the collocation solve.
pub const PAINLEVE_PRECISION: u32 = 160;

/// Node counts tried in turn until the off-grid residual meets the tolerance.
const NODE_LADDER: [usize; 6] = [64, 96, 128, 192, 256, 320];

/// Coefficients of `s^{-3k}` in `q(s)/sqrt(−s/2)` as `s → −∞`.
const LEFT_SERIES: [(i64, i64); 5] = [(1, 1), (1, 8), (-73, 128), (10657, 1024), (-13912277, 32768)];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PainleveError {
    #[error("collocation did not converge (residual {residual:.3e} with {nodes} nodes)")]
    NoConvergence { residual: f64, nodes: usize },
    #[error("domain [{s_lo}, {s_hi}] too narrow: need s_lo <= -8 and s_hi >= 6")]
    DomainTooNarrow { s_lo: f64, s_hi: f64 },
    #[error("s = {s} outside [{s_lo}, {s_hi}]")]
    OutOfDomain { s: f64, s_lo: f64, s_hi: f64 },
    #[error("invalid request: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone)]
pub struct HmlOptions {
    pub s_lo: f64,
    pub s_hi: f64,
    pub tol: f64,
    /// Fixed node count; `None` walks the default ladder.
    pub nodes: Option<usize>,
    pub prec: u32,
}

impl Default for HmlOptions {
    fn default() -> Self {
        HmlOptions { s_lo: -10.0, s_hi: 10.0, tol: 1e-12, nodes: None, prec: PAINLEVE_PRECISION }
    }
}

/// Collocated Hastings–McLeod solution on a Chebyshev grid.
#[derive(Debug, Clone)]
pub struct HmlSolution {
    pub s_lo: Real,
    pub s_hi: Real,
    /// Chebyshev points, decreasing from `s_hi` to `s_lo`.
    pub s: Vec<Real>,
    pub q: Vec<Real>,
    pub q_prime: Vec<Real>,
    /// Degree of the interpolating polynomial.
    pub order: usize,
    /// Largest ODE residual over the nodes and the midpoints between them.
    pub residual: Real,
    coeffs: [Vec<Real>; 3],
}

impl HmlSolution {
    pub fn prec(&self) -> u32 {
        self.s_lo.prec()
    }

    fn to_unit(&self, s: &Real) -> Real {
        let mid = (&self.s_lo + &self.s_hi) / 2i64;
        let half = (&self.s_hi - &self.s_lo) / 2i64;
        (s - mid) / half
    }

    /// `(q, q', q'')` at any `s` in the domain.
    pub fn eval_all(&self, s: &Real) -> Result<[Real; 3], PainleveError> {
        if s < &self.s_lo || s > &self.s_hi {
            return Err(PainleveError::OutOfDomain { s: s.to_f64(), s_lo: self.s_lo.to_f64(), s_hi: self.s_hi.to_f64() });
        }
        let x = self.to_unit(&s.with_prec(self.prec()));
        Ok([clenshaw(&self.coeffs[0], &x), clenshaw(&self.coeffs[1], &x), clenshaw(&self.coeffs[2], &x)])
    }

    /// `|q'' − s q − 2q³|` at `s`.
    pub fn residual_at(&self, s: &Real) -> Result<Real, PainleveError> {
        let [q, _, q2] = self.eval_all(s)?;
        Ok(ode_residual(s, &q, &q2).abs())
    }

    /// Stored `(s, q, q', u)` rows, left to right.
    pub fn table(&self) -> Vec<[Real; 4]> {
        (0..self.s.len())
            .rev()
            .map(|j| {
                let u = hamiltonian(&self.s[j], &self.q[j], &self.q_prime[j]);
                [self.s[j].clone(), self.q[j].clone(), self.q_prime[j].clone(), u]
            })
            .collect()
    }
}

fn ode_residual(s: &Real, q: &Real, q2: &Real) -> Real {
    q2 - s * q - q.powi(3) * 2i64
}

fn hamiltonian(s: &Real, q: &Real, qp: &Real) -> Real {
    qp.sqr() - s * q.sqr() - q.powi(4)
}

/// `sqrt(−s/2)` times the truncated expansion, for `s ≤ −8`.
pub fn left_asymptote(s: &Real) -> Real {
    let prec = s.prec();
    let inv = s.powi(3).recip();
    let mut term = Real::one(prec);
    let mut sum = Real::zero(prec);
    for &(num, den) in &LEFT_SERIES {
        sum += &term * &Real::ratio(num, den, prec);
        term *= &inv;
    }
    (-s / 2i64).sqrt() * sum
}

/// `sum' a_k T_k(x)` (first term unhalved; the caller stores `a_0` halved).
fn clenshaw(a: &[Real], x: &Real) -> Real {
    let prec = x.prec();
    let (mut b1, mut b2) = (Real::zero(prec), Real::zero(prec));
    let two_x = x * 2i64;
    for ak in a.iter().skip(1).rev() {
        let b0 = &two_x * &b1 - &b2 + ak;
        b2 = b1;
        b1 = b0;
    }
    x * &b1 - b2 + &a[0]
}

/// Chebyshev coefficients of the interpolant through `v_j = f(cos(πj/N))`.
fn chebyshev_coeffs(v: &[Real], cos_table: &[Real]) -> Vec<Real> {
    let n = v.len() - 1;
    let prec = v[0].prec();
    let mut a = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut acc = Real::zero(prec);
        for (j, vj) in v.iter().enumerate() {
            let c = &cos_table[(j * k) % (2 * n)];
            let term = vj * c;
            if j == 0 || j == n {
                acc += term / 2i64;
            } else {
                acc += term;
            }
        }
        acc = acc * 2i64 / n as i64;
        if k == 0 || k == n {
            acc = acc / 2i64;
        }
        a.push(acc);
    }
    a
}

/// Coefficients of the derivative series (in the unit variable).
fn derivative_coeffs(a: &[Real]) -> Vec<Real> {
    let n = a.len() - 1;
    let prec = a[0].prec();
    let mut d = vec![Real::zero(prec); n + 1];
    if n == 0 {
        return d;
    }
    for k in (1..=n).rev() {
        let next = if k < n { d[k + 1].clone() } else { Real::zero(prec) };
        d[k - 1] = next + &a[k] * (2 * k) as i64;
    }
    d[0] = &d[0] / 2i64;
    d
}

struct Grid {
    x: Vec<Real>,
    s: Vec<Real>,
    cos_table: Vec<Real>,
    /// Second-derivative matrix in `s`.
    d2: Matrix<Real>,
    half: Real,
}

impl Grid {
    fn new(n: usize, s_lo: &Real, s_hi: &Real) -> Grid {
        let prec = s_lo.prec();
        let pi = Real::pi(prec);
        let cos_table: Vec<Real> = (0..2 * n).map(|m| (&pi * m as i64 / n as i64).cos()).collect();
        let x: Vec<Real> = (0..=n).map(|j| cos_table[j].clone()).collect();
        let mid = (s_lo + s_hi) / 2i64;
        let half = (s_hi - s_lo) / 2i64;
        let s = x.iter().map(|xj| &mid + &half * xj).collect();
        let c = |j: usize| if j == 0 || j == n { 2i64 } else { 1i64 };
        // first-derivative matrix, diagonal by negative row sums
        let mut d1 = Matrix::filled(n + 1, n + 1, Real::zero(prec));
        for i in 0..=n {
            let mut diag = Real::zero(prec);
            for j in 0..=n {
                if i != j {
                    let sign = if (i + j) % 2 == 0 { 1i64 } else { -1i64 };
                    let v = Real::from_int(c(i) * sign, prec) / c(j) / (&x[i] - &x[j]);
                    diag -= &v;
                    d1[(i, j)] = v;
                }
            }
            d1[(i, i)] = diag;
        }
        let mut d2 = Matrix::filled(n + 1, n + 1, Real::zero(prec));
        for i in 0..=n {
            let mut diag = Real::zero(prec);
            for j in 0..=n {
                if i != j {
                    let v = &d1[(i, j)] * (&d1[(i, i)] - (&x[i] - &x[j]).recip()) * 2i64;
                    diag -= &v;
                    d2[(i, j)] = v;
                }
            }
            d2[(i, i)] = diag;
        }
        let h2 = half.sqr();
        let d2 = d2.map(|v| v / &h2);
        Grid { x, s, cos_table, d2, half }
    }

    fn n(&self) -> usize {
        self.x.len() - 1
    }

    fn interior_residual(&self, q: &[Real]) -> Vec<Real> {
        let d2q = self.d2.mul_vec(q);
        (1..self.n()).map(|i| ode_residual(&self.s[i], &q[i], &d2q[i])).collect()
    }
}

fn max_abs(v: &[Real], prec: u32) -> Real {
    v.iter().fold(Real::zero(prec), |m, x| m.max(x.abs()))
}

/// `Ai` for `s ≥ 1`, `sqrt(max(−s, ε)/2)` for `s ≤ −1`, with a C¹ blend between.
fn initial_iterate(s: &Real) -> Real {
    let prec = s.prec();
    let ai = airy_ai_pair(s).0;
    let left = (-s).max(Real::from_f64(1e-3, prec)).sqrt() / Real::from_int(2, prec).sqrt();
    if s >= &Real::one(prec) {
        return ai;
    }
    if s <= &Real::from_int(-1, prec) {
        return left;
    }
    // smoothstep weight on [−1, 1]
    let u = (s + 1i64) / 2i64;
    let w = u.sqr() * (Real::from_int(3, prec) - &u * 2i64);
    &w * &ai + (Real::one(prec) - &w) * &left
}

/// Damped Newton on the interior unknowns. The correction is solved with the
/// Jacobian rounded to `f64`; every step is still contracting by roughly
/// `cond(J)·2^-53`, so the extended-precision residual keeps falling.
fn newton(grid: &Grid, q: &mut [Real], tol_nodes: &Real) -> Real {
    let n = grid.n();
    let prec = q[0].prec();
    let d2f = grid.d2.map(|v| v.to_f64());
    let mut res = grid.interior_residual(q);
    let mut norm = max_abs(&res, prec);
    for _ in 0..60 {
        if norm <= *tol_nodes {
            break;
        }
        let m = n - 1;
        let jac = Matrix::from_fn(m, m, |i, j| {
            let mut v = d2f[(i + 1, j + 1)];
            if i == j {
                let qi = q[i + 1].to_f64();
                v -= grid.s[i + 1].to_f64() + 6.0 * qi * qi;
            }
            v
        });
        let rhs: Vec<f64> = res.iter().map(|r| -r.to_f64()).collect();
        let Ok(delta) = jac.solve(&rhs) else { break };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<Real> = q
                .iter()
                .enumerate()
                .map(|(i, qi)| if i == 0 || i == n { qi.clone() } else { qi + delta[i - 1] * lambda })
                .collect();
            let r = grid.interior_residual(&trial);
            let nr = max_abs(&r, prec);
            if nr < norm {
                q.clone_from_slice(&trial);
                res = r;
                norm = nr;
                accepted = true;
                break;
            }
            lambda /= 2.0;
        }
        if !accepted {
            break;
        }
    }
    norm
}

/// Solves on `[s_lo, s_hi]` to ODE residual `tol`, refining the grid as needed.
pub fn solve_hastings_mcleod(s_lo: f64, s_hi: f64, tol: f64) -> Result<HmlSolution, PainleveError> {
    solve_hastings_mcleod_with(&HmlOptions { s_lo, s_hi, tol, ..HmlOptions::default() })
}

pub fn solve_hastings_mcleod_with(opts: &HmlOptions) -> Result<HmlSolution, PainleveError> {
    if !(opts.s_lo < opts.s_hi) || !opts.s_lo.is_finite() || !opts.s_hi.is_finite() {
        return Err(PainleveError::InvalidInput(format!("need s_lo < s_hi, got [{}, {}]", opts.s_lo, opts.s_hi)));
    }
    if opts.s_hi < 6.0 || opts.s_lo > -8.0 {
        return Err(PainleveError::DomainTooNarrow { s_lo: opts.s_lo, s_hi: opts.s_hi });
    }
    if !(opts.tol >= 1e-14) {
        return Err(PainleveError::InvalidInput(format!("tolerance {} below 1e-14", opts.tol)));
    }
    let prec = opts.prec.max(128);
    let s_lo = Real::from_f64(opts.s_lo, prec);
    let s_hi = Real::from_f64(opts.s_hi, prec);
    let tol = Real::from_f64(opts.tol, prec);
    let ladder: Vec<usize> = match opts.nodes {
        Some(n) if n >= 8 => vec![n],
        Some(n) => return Err(PainleveError::InvalidInput(format!("{n} nodes are too few"))),
        None => NODE_LADDER.to_vec(),
    };

    let mut prev: Option<HmlSolution> = None;
    let mut last = (f64::INFINITY, 0);
    for &n in &ladder {
        let grid = Grid::new(n, &s_lo, &s_hi);
        let mut q: Vec<Real> = match &prev {
            Some(p) => grid.s.iter().map(|s| p.eval_all(s).map(|v| v[0].clone())).collect::<Result<_, _>>()?,
            None => grid.s.iter().map(initial_iterate).collect(),
        };
        q[0] = airy_ai_pair(&s_hi).0;
        q[n] = left_asymptote(&s_lo);
        // node residuals are driven well below the target; the off-grid
        // residual then measures the discretization error
        let node_res = newton(&grid, &mut q, &(&tol / 1000i64));
        let sol = finish(&grid, &s_lo, &s_hi, q, node_res);
        last = (sol.residual.to_f64(), n);
        if sol.residual <= tol {
            return Ok(sol);
        }
        prev = Some(sol);
    }
    Err(PainleveError::NoConvergence { residual: last.0, nodes: last.1 })
}

fn finish(grid: &Grid, s_lo: &Real, s_hi: &Real, q: Vec<Real>, node_res: Real) -> HmlSolution {
    let n = grid.n();
    let a0 = chebyshev_coeffs(&q, &grid.cos_table);
    let scale = grid.half.recip();
    let a1: Vec<Real> = derivative_coeffs(&a0).into_iter().map(|c| c * &scale).collect();
    let a2: Vec<Real> = derivative_coeffs(&a1).into_iter().map(|c| c * &scale).collect();
    let mut sol = HmlSolution {
        s_lo: s_lo.clone(),
        s_hi: s_hi.clone(),
        s: grid.s.clone(),
        q,
        q_prime: Vec::new(),
        order: n,
        residual: node_res,
        coeffs: [a0, a1, a2],
    };
    sol.q_prime = grid.x.iter().map(|x| clenshaw(&sol.coeffs[1], x)).collect();
    // midpoints of the Chebyshev angles
    let pi = Real::pi(s_lo.prec());
    let mut worst = sol.residual.clone();
    for j in 0..n {
        let x = (&pi * (2 * j + 1) as i64 / (2 * n) as i64).cos();
        let s = (s_lo + s_hi) / 2i64 + &grid.half * &x;
        let q = clenshaw(&sol.coeffs[0], &x);
        let q2 = clenshaw(&sol.coeffs[2], &x);
        worst = worst.max(ode_residual(&s, &q, &q2).abs());
    }
    sol.residual = worst;
    sol
}

/// `(q(s), q'(s))`; stored nodes are returned verbatim.
pub fn evaluate_q(sol: &HmlSolution, s: &Real) -> Result<(Real, Real), PainleveError> {
    if let Some(j) = sol.s.iter().position(|sj| sj == s) {
        return Ok((sol.q[j].clone(), sol.q_prime[j].clone()));
    }
    let [q, qp, _] = sol.eval_all(s)?;
    Ok((q, qp))
}

/// `u(s) = q'(s)² − s q(s)² − q(s)⁴`.
pub fn hamiltonian_u(sol: &HmlSolution, s: &Real) -> Result<Real, PainleveError> {
    let (q, qp) = evaluate_q(sol, s)?;
    Ok(hamiltonian(&s.with_prec(sol.prec()), &q, &qp))
}
