//! Multiple Hermite polynomials of mixed type: Gaussian moment tables, the
//! linear systems for the coefficient polynomials `A_k` in either
//! normalization, and transition numbers between normalizations.

use crate::model::BrownianConfig;
use crate::numerics::{Cplx, DenseMatrix, LinearAlgebraError, Real};

/// Largest precision the solver escalates to before giving up.
pub const MAX_ESCALATION_BITS: u32 = 1024;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MopError {
    #[error("normalization {norm} is impossible for this multi-index (singular moment system)")]
    NormalizationImpossible { norm: Norm },
    #[error("invalid multi-index: {0}")]
    InvalidIndex(String),
    #[error("solutions in normalizations {from} and {to} are not proportional (residual {residual:e})")]
    NotProportional { from: Norm, to: Norm, residual: f64 },
    #[error(transparent)]
    Linear(#[from] LinearAlgebraError),
}

/// Products `w_{1,k} w_{2,l} = exp(-γ(x-μ_kl)² + c_kl)` of Gaussian weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSystem {
    pub a: Vec<Real>,
    pub b: Vec<Real>,
    pub t: Real,
    /// Inverse variance `N`.
    pub n_scale: Real,
}

impl WeightSystem {
    pub fn new(a: Vec<Real>, b: Vec<Real>, t: Real, n_scale: Real) -> Result<Self, MopError> {
        if a.is_empty() || b.is_empty() {
            return Err(MopError::InvalidIndex("need at least one weight of each kind".into()));
        }
        if t <= 0.0 || t >= 1.0 || n_scale <= 0.0 {
            return Err(MopError::InvalidIndex("need 0 < t < 1 and N > 0".into()));
        }
        Ok(WeightSystem { a, b, t, n_scale })
    }

    /// Weights of a two-group configuration with `n` paths.
    pub fn from_config(cfg: &BrownianConfig, n: usize, t: &Real) -> Result<Self, MopError> {
        let prec = cfg.prec().max(t.prec());
        let cfg = cfg.with_prec(prec);
        WeightSystem::new(cfg.a.to_vec(), cfg.b.to_vec(), t.with_prec(prec), cfg.inverse_variance(n))
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn q(&self) -> usize {
        self.b.len()
    }

    pub fn prec(&self) -> u32 {
        self.a.iter().chain(&self.b).map(Real::prec).chain([self.t.prec(), self.n_scale.prec()]).max().unwrap()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        let w = |v: &Real| v.with_prec(prec);
        WeightSystem {
            a: self.a.iter().map(w).collect(),
            b: self.b.iter().map(w).collect(),
            t: w(&self.t),
            n_scale: w(&self.n_scale),
        }
    }

    /// The system with starting and ending points exchanged and `t ↦ 1-t`.
    pub fn swapped(&self) -> Self {
        WeightSystem {
            a: self.b.clone(),
            b: self.a.clone(),
            t: Real::one(self.t.prec()) - &self.t,
            n_scale: self.n_scale.clone(),
        }
    }

    pub fn one_minus_t(&self) -> Real {
        Real::one(self.prec()) - &self.t
    }

    /// `γ = N / (2t(1-t))`.
    pub fn gamma(&self) -> Real {
        &self.n_scale / (&self.t * self.one_minus_t() * 2i64)
    }

    /// `μ_kl = (1-t)a_k + t b_l`.
    pub fn mu(&self, k: usize, l: usize) -> Real {
        self.one_minus_t() * &self.a[k] + &self.t * &self.b[l]
    }

    /// `c_kl = γ μ_kl²`.
    pub fn c(&self, k: usize, l: usize) -> Real {
        self.gamma() * self.mu(k, l).sqr()
    }

    pub fn w1(&self, k: usize, x: &Real) -> Real {
        let e = -(&self.n_scale / (&self.t * 2i64)) * (x.sqr() - x * &self.a[k] * 2i64);
        e.exp()
    }

    pub fn w2(&self, l: usize, x: &Real) -> Real {
        let e = -(&self.n_scale / (self.one_minus_t() * 2i64)) * (x.sqr() - x * &self.b[l] * 2i64);
        e.exp()
    }

    pub fn w1_c(&self, k: usize, z: &Cplx) -> Cplx {
        let e = (&(z * z) - &(z.scale(&self.a[k]) * 2i64)).scale(&-(&self.n_scale / (&self.t * 2i64)));
        e.exp()
    }

    pub fn w2_c(&self, l: usize, z: &Cplx) -> Cplx {
        let e = (&(z * z) - &(z.scale(&self.b[l]) * 2i64)).scale(&-(&self.n_scale / (self.one_minus_t() * 2i64)));
        e.exp()
    }

    /// `M_0 .. M_{count-1}` of `w_{1,k} w_{2,l}`.
    pub fn moments(&self, k: usize, l: usize, count: usize) -> Vec<Real> {
        let gamma = self.gamma();
        let mu = self.mu(k, l);
        let half_inv_gamma = (&gamma * 2i64).recip();
        let m0 = (Real::pi(self.prec()) / &gamma).sqrt() * (&gamma * mu.sqr()).exp();
        let mut out: Vec<Real> = Vec::with_capacity(count);
        for j in 0..count {
            let v = match j {
                0 => m0.clone(),
                1 => &mu * &out[0],
                _ => &mu * &out[j - 1] + &out[j - 2] * &half_inv_gamma * (j as i64 - 1),
            };
            out.push(v);
        }
        out
    }
}

/// `∫ x^j w_{1,k}(x) w_{2,l}(x) dx`.
pub fn gaussian_moment(ws: &WeightSystem, k: usize, l: usize, j: usize) -> Real {
    ws.moments(k, l, j + 1).pop().unwrap()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndexPair {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
}

impl MultiIndexPair {
    pub fn new(n: Vec<usize>, m: Vec<usize>) -> Self {
        MultiIndexPair { n, m }
    }

    pub fn total_n(&self) -> usize {
        self.n.iter().sum()
    }

    pub fn total_m(&self) -> usize {
        self.m.iter().sum()
    }

    /// `n + e_k`.
    pub fn inc_n(&self, k: usize) -> Self {
        let mut s = self.clone();
        s.n[k] += 1;
        s
    }

    /// `m + e_l`.
    pub fn inc_m(&self, l: usize) -> Self {
        let mut s = self.clone();
        s.m[l] += 1;
        s
    }

    /// `n - e_k`, if nonnegative.
    pub fn dec_n(&self, k: usize) -> Option<Self> {
        let mut s = self.clone();
        s.n[k] = s.n[k].checked_sub(1)?;
        Some(s)
    }

    /// `m - e_l`, if nonnegative.
    pub fn dec_m(&self, l: usize) -> Option<Self> {
        let mut s = self.clone();
        s.m[l] = s.m[l].checked_sub(1)?;
        Some(s)
    }

    /// Index pair of the time-reversed problem (`n` and `m` exchanged).
    pub fn swapped(&self) -> Self {
        MultiIndexPair { n: self.m.clone(), m: self.n.clone() }
    }

    fn check(&self, ws: &WeightSystem) -> Result<(), MopError> {
        if self.n.len() != ws.p() || self.m.len() != ws.q() {
            return Err(MopError::InvalidIndex(format!(
                "index lengths ({}, {}) do not match weights ({}, {})",
                self.n.len(),
                self.m.len(),
                ws.p(),
                ws.q()
            )));
        }
        if self.total_n() != self.total_m() + 1 {
            return Err(MopError::InvalidIndex(format!("|n| = {} must equal |m| + 1 = {}", self.total_n(), self.total_m() + 1)));
        }
        Ok(())
    }
}

/// Normalization of a multiple orthogonal polynomial; indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    /// `A_k` monic of degree `n_k - 1`.
    TypeII(usize),
    /// `∫ Q(x) x^{m_l} w_{2,l}(x) dx = 1`.
    TypeI(usize),
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Norm::TypeII(k) => write!(f, "(II,{})", k + 1),
            Norm::TypeI(l) => write!(f, "(I,{})", l + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MopSolution {
    /// `coeffs[k][i]` multiplies `x^i` in `A_k`; `coeffs[k].len() == n_k`.
    pub coeffs: Vec<Vec<Real>>,
    pub norm: Norm,
}

impl MopSolution {
    pub fn prec(&self) -> u32 {
        self.coeffs.iter().flatten().map(Real::prec).max().unwrap_or(crate::numerics::default_precision())
    }

    pub fn eval_poly(&self, k: usize, x: &Real) -> Real {
        self.coeffs[k].iter().rev().fold(Real::zero(x.prec()), |acc, c| acc * x + c)
    }

    pub fn eval_poly_c(&self, k: usize, z: &Cplx) -> Cplx {
        self.coeffs[k].iter().rev().fold(Cplx::zero(z.prec()), |acc, c| &(acc * z) + c)
    }

    /// Derivative `A_k'(z)`.
    pub fn eval_poly_derivative_c(&self, k: usize, z: &Cplx) -> Cplx {
        self.coeffs[k]
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Cplx::zero(z.prec()), |acc, (i, c)| &(acc * z) + &(c * i as i64))
    }

    /// Coefficient of `x^i` in `A_k` (zero beyond the stored degree).
    pub fn coeff(&self, k: usize, i: usize) -> Real {
        self.coeffs[k].get(i).cloned().unwrap_or_else(|| Real::zero(self.prec()))
    }

    pub fn scaled(&self, s: &Real) -> Self {
        MopSolution { coeffs: self.coeffs.iter().map(|c| c.iter().map(|v| v * s).collect()).collect(), norm: self.norm }
    }
}

/// Moment tables `M_kl(0..count)` for all pairs, indexed `[k][l][j]`.
pub fn moment_tables(ws: &WeightSystem, count: usize) -> Vec<Vec<Vec<Real>>> {
    (0..ws.p()).map(|k| (0..ws.q()).map(|l| ws.moments(k, l, count)).collect()).collect()
}

/// Terms `a_{k,i} M_kl(i+j)` of `∫ Q x^j w_{2,l}`.
fn q_moment_terms<'a>(sol: &'a MopSolution, tables: &'a [Vec<Vec<Real>>], l: usize, j: usize) -> impl Iterator<Item = Real> + 'a {
    sol.coeffs.iter().enumerate().flat_map(move |(k, ck)| ck.iter().enumerate().map(move |(i, a)| a * &tables[k][l][i + j]))
}

/// `∫ Q(x) x^j w_{2,l}(x) dx` in closed form.
pub fn q_moment(sol: &MopSolution, ws: &WeightSystem, l: usize, j: usize) -> Real {
    let max_deg = sol.coeffs.iter().map(Vec::len).max().unwrap_or(0);
    let tables = moment_tables(ws, max_deg + j + 1);
    q_moment_terms(sol, &tables, l, j).fold(Real::zero(ws.prec()), |acc, v| acc + v)
}

fn solve_at(ws: &WeightSystem, idx: &MultiIndexPair, norm: Norm) -> Result<MopSolution, MopError> {
    let max_m = idx.m.iter().copied().max().unwrap_or(0);
    let max_n = idx.n.iter().copied().max().unwrap_or(0);
    solve_moment_system(&moment_tables(ws, max_n + max_m + 1), idx, norm)
}

/// Solves the orthogonality system for given moment tables `[k][l][j]`
/// (at least `max n_k + max m_l` moments per pair), at their precision.
pub fn solve_moment_system(tables: &[Vec<Vec<Real>>], idx: &MultiIndexPair, norm: Norm) -> Result<MopSolution, MopError> {
    let prec = tables.iter().flatten().flatten().map(Real::prec).max().unwrap_or(crate::numerics::default_precision());
    let (p, q) = (tables.len(), tables.first().map_or(0, Vec::len));
    let size = idx.total_n();
    // column offset of each A_k block
    let offsets: Vec<usize> = idx.n.iter().scan(0, |acc, &nk| {
        let o = *acc;
        *acc += nk;
        Some(o)
    }).collect();

    let mut rows: Vec<Vec<Real>> = Vec::with_capacity(size);
    let mut rhs = vec![Real::zero(prec); size];
    let moment_row = |l: usize, j: usize| {
        let mut row = vec![Real::zero(prec); size];
        for (k, &nk) in idx.n.iter().enumerate() {
            for i in 0..nk {
                row[offsets[k] + i] = tables[k][l][i + j].clone();
            }
        }
        row
    };
    for (l, &ml) in idx.m.iter().enumerate() {
        for j in 0..ml {
            rows.push(moment_row(l, j));
        }
    }
    match norm {
        Norm::TypeII(k) => {
            if k >= p || idx.n[k] == 0 {
                return Err(MopError::NormalizationImpossible { norm });
            }
            let mut row = vec![Real::zero(prec); size];
            row[offsets[k] + idx.n[k] - 1] = Real::one(prec);
            rows.push(row);
        }
        Norm::TypeI(l) => {
            if l >= q {
                return Err(MopError::NormalizationImpossible { norm });
            }
            rows.push(moment_row(l, idx.m[l]));
        }
    }
    rhs[size - 1] = Real::one(prec);

    // equilibrate rows: the moment blocks differ by factors e^{c_kl}
    for (row, r) in rows.iter_mut().zip(rhs.iter_mut()) {
        let s = row.iter().map(Real::abs).fold(Real::zero(prec), Real::max);
        if s.is_zero() {
            return Err(MopError::NormalizationImpossible { norm });
        }
        for v in row.iter_mut() {
            *v /= &s;
        }
        *r /= &s;
    }
    let a = DenseMatrix::from_rows(rows);
    let x = match a.solve(&rhs) {
        Ok(x) => x,
        Err(LinearAlgebraError::SingularMatrix { .. }) => return Err(MopError::NormalizationImpossible { norm }),
        Err(e) => return Err(e.into()),
    };
    let coeffs = idx.n.iter().enumerate().map(|(k, &nk)| x[offsets[k]..offsets[k] + nk].to_vec()).collect();
    Ok(MopSolution { coeffs, norm })
}

/// Solves for `A_1..A_p` with `|n| = |m| + 1` in the requested normalization.
/// A numerically singular system is retried at doubled precision up to
/// [`MAX_ESCALATION_BITS`].
pub fn solve_mop(ws: &WeightSystem, idx: &MultiIndexPair, norm: Norm) -> Result<MopSolution, MopError> {
    idx.check(ws)?;
    if let Norm::TypeII(k) = norm {
        // structurally impossible, no precision helps
        if idx.n.get(k).is_none_or(|&nk| nk == 0) {
            return Err(MopError::NormalizationImpossible { norm });
        }
    }
    let mut prec = ws.prec();
    loop {
        let attempt = if prec == ws.prec() { solve_at(ws, idx, norm) } else { solve_at(&ws.with_prec(prec), idx, norm) };
        match attempt {
            Err(MopError::NormalizationImpossible { .. }) if prec < MAX_ESCALATION_BITS => {
                prec = (prec * 2).min(MAX_ESCALATION_BITS);
            }
            other => return other,
        }
    }
}

/// `Q(x) = Σ_k A_k(x) w_{1,k}(x)`.
pub fn evaluate_q(sol: &MopSolution, ws: &WeightSystem, x: &Real) -> Real {
    (0..sol.coeffs.len()).fold(Real::zero(x.prec().max(ws.prec())), |acc, k| acc + sol.eval_poly(k, x) * ws.w1(k, x))
}

pub fn evaluate_q_c(sol: &MopSolution, ws: &WeightSystem, z: &Cplx) -> Cplx {
    (0..sol.coeffs.len()).fold(Cplx::zero(z.prec().max(ws.prec())), |acc, k| acc + sol.eval_poly_c(k, z) * ws.w1_c(k, z))
}

/// Largest relative orthogonality defect `|∫Q x^j w_{2,l}| / Σ|terms|` over
/// `l` and `j < m_l`; zero when there are no conditions.
pub fn check_orthogonality(sol: &MopSolution, ws: &WeightSystem, idx: &MultiIndexPair) -> Real {
    let prec = sol.prec().max(ws.prec());
    let max_m = idx.m.iter().copied().max().unwrap_or(0);
    let max_deg = sol.coeffs.iter().map(Vec::len).max().unwrap_or(0);
    let tables = moment_tables(&ws.with_prec(prec), max_deg + max_m + 1);
    let mut worst = Real::zero(prec);
    for (l, &ml) in idx.m.iter().enumerate() {
        for j in 0..ml {
            let (sum, scale) = q_moment_terms(sol, &tables, l, j)
                .fold((Real::zero(prec), Real::zero(prec)), |(s, a), v| (s + &v, a + v.abs()));
            if !scale.is_zero() {
                worst = worst.max(sum.abs() / scale);
            }
        }
    }
    worst
}

/// `τ` with `A^{from} = τ A^{to}`.
pub fn transition_number(ws: &WeightSystem, idx: &MultiIndexPair, from: Norm, to: Norm) -> Result<Real, MopError> {
    let a = solve_mop(ws, idx, from)?;
    if from == to {
        return Ok(Real::one(a.prec()));
    }
    let b = solve_mop(ws, idx, to)?;
    transition_between(&a, &b)
}

/// Ratio of two solutions of the same system, checked for proportionality at
/// three points.
pub fn transition_between(from: &MopSolution, to: &MopSolution) -> Result<Real, MopError> {
    let prec = from.prec().max(to.prec());
    let (mut best, mut pivot) = (Real::zero(prec), (0, 0));
    for (k, ck) in to.coeffs.iter().enumerate() {
        for (i, v) in ck.iter().enumerate() {
            if v.abs() > best {
                best = v.abs();
                pivot = (k, i);
            }
        }
    }
    if best.is_zero() {
        return Err(MopError::NormalizationImpossible { norm: to.norm });
    }
    let tau = &from.coeffs[pivot.0][pivot.1] / &to.coeffs[pivot.0][pivot.1];
    let mut residual = Real::zero(prec);
    for x in [-0.7, 0.3, 1.1] {
        let x = Real::from_f64(x, prec);
        for k in 0..from.coeffs.len() {
            let lhs = from.eval_poly(k, &x);
            let rhs = &tau * to.eval_poly(k, &x);
            let scale = lhs.abs().max(rhs.abs());
            if !scale.is_zero() {
                residual = residual.max((lhs - rhs).abs() / scale);
            }
        }
    }
    let tol = Real::exp2i(-(prec as i32) / 4, prec);
    if residual > tol {
        return Err(MopError::NotProportional { from: from.norm, to: to.norm, residual: residual.to_f64() });
    }
    Ok(tau)
}

/// The `p+q` solutions that fill the rows of the Riemann–Hilbert matrix at a
/// pair with `|n| = |m|`: row `k` is `A^{(II,k)}` at `(n+e_k, m)`, row `p+l` is
/// `A^{(I,l)}` at `(n, m-e_l)`, absent when `m_l = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedFamily {
    pub idx: MultiIndexPair,
    pub rows: Vec<Option<MopSolution>>,
}

impl ShiftedFamily {
    pub fn solve(ws: &WeightSystem, idx: &MultiIndexPair) -> Result<Self, MopError> {
        use rayon::prelude::*;
        if idx.n.len() != ws.p() || idx.m.len() != ws.q() || idx.total_n() != idx.total_m() {
            return Err(MopError::InvalidIndex(format!("need |n| = |m| with lengths ({}, {})", ws.p(), ws.q())));
        }
        let (p, q) = (ws.p(), ws.q());
        let rows = (0..p + q)
            .into_par_iter()
            .map(|r| {
                if r < p {
                    solve_mop(ws, &idx.inc_n(r), Norm::TypeII(r)).map(Some)
                } else {
                    match idx.dec_m(r - p) {
                        Some(shifted) => solve_mop(ws, &shifted, Norm::TypeI(r - p)).map(Some),
                        None => Ok(None),
                    }
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ShiftedFamily { idx: idx.clone(), rows })
    }

    pub fn prec(&self) -> u32 {
        self.rows.iter().flatten().map(MopSolution::prec).max().unwrap_or(crate::numerics::default_precision())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws() -> WeightSystem {
        let r = |v: f64| Real::from_f64(v, 256);
        WeightSystem::new(vec![r(1.0), r(-1.0)], vec![r(0.5), r(-0.5)], Real::ratio(1, 3, 256), r(4.0)).unwrap()
    }

    #[test]
    fn first_moments() {
        let w = ws();
        let m = w.moments(0, 1, 2);
        assert!((&m[1] - w.mu(0, 1) * &m[0]).abs() < 1e-60);
        let centred = WeightSystem::new(vec![Real::zero(256)], vec![Real::zero(256)], Real::ratio(1, 2, 256), Real::one(256)).unwrap();
        let m0 = gaussian_moment(&centred, 0, 0, 0);
        assert!((m0 - (Real::pi(256) / centred.gamma()).sqrt()).abs() < 1e-70);
    }

    #[test]
    fn trivial_system() {
        let w = ws();
        let idx = MultiIndexPair::new(vec![1, 0], vec![0, 0]);
        let sol = solve_mop(&w, &idx, Norm::TypeII(0)).unwrap();
        assert_eq!(sol.coeffs[0], vec![Real::one(256)]);
        assert!(sol.coeffs[1].is_empty());
        assert!(check_orthogonality(&sol, &w, &idx).is_zero());
        let x = Real::from_f64(0.4, 256);
        assert_eq!(evaluate_q(&sol, &w, &x), w.w1(0, &x));
    }

    #[test]
    fn impossible_type_two_normalization() {
        let idx = MultiIndexPair::new(vec![1, 0], vec![0, 0]);
        assert!(matches!(solve_mop(&ws(), &idx, Norm::TypeII(1)), Err(MopError::NormalizationImpossible { .. })));
        let bad = MultiIndexPair::new(vec![1, 1], vec![0, 0]);
        assert!(matches!(solve_mop(&ws(), &bad, Norm::TypeII(0)), Err(MopError::InvalidIndex(_))));
    }

    #[test]
    fn type_one_normalization_holds() {
        let w = ws();
        let idx = MultiIndexPair::new(vec![2, 2], vec![2, 1]);
        let sol = solve_mop(&w, &idx, Norm::TypeI(1)).unwrap();
        assert!((q_moment(&sol, &w, 1, 1) - 1.0).abs() < 1e-50);
        assert!(check_orthogonality(&sol, &w, &idx) < 1e-50);
    }
}
