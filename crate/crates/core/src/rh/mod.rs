//! Large-z coefficients `Y_1`, `Y_2` of the Riemann–Hilbert matrix and what is
//! built from them: recurrence coefficients, transfer matrices between
//! neighbouring multi-indices, the Lax matrix of the differential equation,
//! and residuals of the identities tying them together.

mod spectral;

pub use spectral::{spectral_curve, BivariatePoly, SpectralBranch, SpectralCurve, PROBE_RADII};

use crate::kernel::{KernelError, RhMatrix};
use crate::mop::{moment_tables, solve_mop, MopError, MopSolution, MultiIndexPair, Norm, ShiftedFamily, WeightSystem};
use crate::numerics::{CMatrix, Cplx, Matrix, Real};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RhError {
    #[error(transparent)]
    Mop(#[from] MopError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("c[{row},{col}] vanishes numerically; the diagonal coefficient is undefined")]
    ZeroDenominator { row: usize, col: usize },
    #[error("z lies on the jump contour (Im z = 0)")]
    OnContour,
    #[error("spectral branches {0} and {1} collide at the probe radii")]
    BranchCollision(usize, usize),
}

/// `Y(z) = (I + Y_1/z + Y_2/z² + ...) diag(z^{n_k}, z^{-m_l})`.
#[derive(Debug, Clone)]
pub struct RhExpansion {
    pub ws: WeightSystem,
    pub idx: MultiIndexPair,
    pub y1: CMatrix,
    pub y2: CMatrix,
}

impl RhExpansion {
    /// Reads `Y_1`, `Y_2` off the rows of a solved shifted family.
    pub fn from_family(ws: &WeightSystem, family: &ShiftedFamily) -> Self {
        let (p, q) = (ws.p(), ws.q());
        let idx = &family.idx;
        let prec = ws.prec().max(family.prec());
        let ws = ws.with_prec(prec);
        let max_n = idx.n.iter().max().copied().unwrap_or(0);
        let max_m = idx.m.iter().max().copied().unwrap_or(0);
        let tables = moment_tables(&ws, max_n + max_m + 4);
        let two_pi = Real::pi(prec) * 2i64;
        let zero = Cplx::zero(prec);
        let mut y1 = Matrix::filled(p + q, p + q, zero.clone());
        let mut y2 = y1.clone();
        let sub = |sol: &MopSolution, j: usize, back: usize| match idx.n[j].checked_sub(back) {
            Some(i) => sol.coeff(j, i),
            None => Real::zero(prec),
        };
        for (r, row) in family.rows.iter().enumerate() {
            let Some(sol) = row else { continue };
            for j in 0..p {
                let (c1, c2) = (sub(sol, j, 1), sub(sol, j, 2));
                if r < p {
                    y1[(r, j)] = Cplx::from_real(c1);
                    y2[(r, j)] = Cplx::from_real(c2);
                } else {
                    // the lower rows carry the factor -2πi
                    y1[(r, j)] = Cplx::new(Real::zero(prec), -(c1 * &two_pi));
                    y2[(r, j)] = Cplx::new(Real::zero(prec), -(c2 * &two_pi));
                }
            }
            for l in 0..q {
                let m1 = q_moment_from(sol, &tables, l, idx.m[l]);
                let m2 = q_moment_from(sol, &tables, l, idx.m[l] + 1);
                if r < p {
                    // -(1/2πi) M = i M / 2π
                    y1[(r, p + l)] = Cplx::new(Real::zero(prec), m1 / &two_pi);
                    y2[(r, p + l)] = Cplx::new(Real::zero(prec), m2 / &two_pi);
                } else {
                    y1[(r, p + l)] = Cplx::from_real(m1);
                    y2[(r, p + l)] = Cplx::from_real(m2);
                }
            }
        }
        RhExpansion { ws, idx: idx.clone(), y1, y2 }
    }

    pub fn from_rh(rh: &RhMatrix) -> Self {
        Self::from_family(&rh.ws, &rh.family)
    }

    pub fn p(&self) -> usize {
        self.ws.p()
    }

    pub fn q(&self) -> usize {
        self.ws.q()
    }

    pub fn size(&self) -> usize {
        self.p() + self.q()
    }

    pub fn prec(&self) -> u32 {
        self.ws.prec()
    }

    /// Entry `c_{i,j}` of `Y_1` (0-based).
    pub fn c(&self, i: usize, j: usize) -> &Cplx {
        &self.y1[(i, j)]
    }

    fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix {
        Matrix::from_fn(rows, cols, |i, j| self.y1[(r0 + i, c0 + j)].clone())
    }

    pub fn c11(&self) -> CMatrix {
        self.block(0, 0, self.p(), self.p())
    }

    pub fn c12(&self) -> CMatrix {
        self.block(0, self.p(), self.p(), self.q())
    }

    pub fn c21(&self) -> CMatrix {
        self.block(self.p(), 0, self.q(), self.p())
    }

    pub fn c22(&self) -> CMatrix {
        self.block(self.p(), self.p(), self.q(), self.q())
    }

    /// `c_{i,j} c_{j,i}`, which is real.
    pub fn product(&self, i: usize, j: usize) -> Real {
        (self.c(i, j) * self.c(j, i)).re
    }
}

fn q_moment_from(sol: &MopSolution, tables: &[Vec<Vec<Real>>], l: usize, j: usize) -> Real {
    let mut acc = Real::zero(tables[0][0][0].prec());
    for (k, ck) in sol.coeffs.iter().enumerate() {
        for (i, a) in ck.iter().enumerate() {
            acc += a * &tables[k][l][i + j];
        }
    }
    acc
}

/// Solves the shifted family at `idx` (`|n| = |m|`) and extracts `Y_1`, `Y_2`.
pub fn assemble_rh_expansion(ws: &WeightSystem, idx: &MultiIndexPair) -> Result<RhExpansion, RhError> {
    Ok(RhExpansion::from_family(ws, &ShiftedFamily::solve(ws, idx)?))
}

/// Strictly upper triangular table of `c_{i,j} c_{j,i}`.
#[derive(Debug, Clone)]
pub struct HMatrix {
    pub p: usize,
    pub q: usize,
    pub h: Matrix<Real>,
}

impl HMatrix {
    /// Top right `p × q` block.
    pub fn h12(&self) -> Matrix<Real> {
        Matrix::from_fn(self.p, self.q, |k, l| self.h[(k, self.p + l)].clone())
    }

    pub fn row_sums(&self) -> Vec<Real> {
        let b = self.h12();
        (0..self.p).map(|k| (1..self.q).fold(b[(k, 0)].clone(), |acc, l| acc + &b[(k, l)])).collect()
    }

    pub fn column_sums(&self) -> Vec<Real> {
        let b = self.h12();
        (0..self.q).map(|l| (1..self.p).fold(b[(0, l)].clone(), |acc, k| acc + &b[(k, l)])).collect()
    }
}

pub fn recurrence_matrix_h(exp: &RhExpansion) -> HMatrix {
    let n = exp.size();
    let h = Matrix::from_fn(n, n, |i, j| if i < j { exp.product(i, j) } else { Real::zero(exp.prec()) });
    HMatrix { p: exp.p(), q: exp.q(), h }
}

/// For `p = q = 2`, the `H_12` block from its `(1,2)` entry, the two row sums
/// and the first column sum.
pub fn reconstruct_h12(corner: &Real, rows: [&Real; 2], first_col: &Real) -> [[Real; 2]; 2] {
    let h11 = rows[0] - corner;
    let h21 = first_col - &h11;
    let h22 = rows[1] - &h21;
    [[h11, corner.clone()], [h21, h22]]
}

fn check_shift(exp: &RhExpansion, shifted: &RhExpansion, k: usize, l: usize) -> Result<(), RhError> {
    if shifted.idx != exp.idx.inc_n(k).inc_m(l) {
        return Err(MopError::InvalidIndex(format!("expansion at {:?} is not the (e_{}, e_{}) shift of {:?}", shifted.idx, k + 1, l + 1, exp.idx)).into());
    }
    Ok(())
}

/// `U(z)` with `Y_{n+e_k, m+e_l}(z) = U(z) Y_{n,m}(z)`.
pub fn forward_transfer(exp: &RhExpansion, shifted: &RhExpansion, k: usize, l: usize, z: &Cplx) -> Result<CMatrix, RhError> {
    check_shift(exp, shifted, k, l)?;
    let pl = exp.p() + l;
    let prec = exp.prec().max(z.prec());
    Ok(Matrix::from_fn(exp.size(), exp.size(), |i, j| {
        let mut v = Cplx::zero(prec);
        if i == j && i != k && i != pl {
            v = Cplx::one(prec);
        }
        if i == k && j == k {
            v += z;
        }
        if j == k {
            v += shifted.c(i, k);
        }
        if i == k {
            v -= exp.c(k, j);
        }
        v
    }))
}

/// `Ũ(z)` with `Y_{n,m}(z) = Ũ(z) Y_{n+e_k, m+e_l}(z)`.
pub fn backward_transfer(exp: &RhExpansion, shifted: &RhExpansion, k: usize, l: usize, z: &Cplx) -> Result<CMatrix, RhError> {
    check_shift(exp, shifted, k, l)?;
    let pl = exp.p() + l;
    let prec = exp.prec().max(z.prec());
    Ok(Matrix::from_fn(exp.size(), exp.size(), |i, j| {
        let mut v = Cplx::zero(prec);
        if i == j && i != k && i != pl {
            v = Cplx::one(prec);
        }
        if i == pl && j == pl {
            v += z;
        }
        if j == pl {
            v += exp.c(i, pl);
        }
        if i == pl {
            v -= shifted.c(pl, j);
        }
        v
    }))
}

/// The diagonal recurrence coefficient `c_{k,k} - c̃_{k,k}` two ways.
#[derive(Debug, Clone)]
pub struct DiagonalCoefficient {
    /// From `Y_1` alone, valid for Gaussian weights.
    pub lax: Real,
    /// From `Y_1` and the `(k, p+l)` entry of `Y_2`, valid for any weights.
    pub via_y2: Real,
}

impl DiagonalCoefficient {
    pub fn discrepancy(&self) -> Real {
        (&self.lax - &self.via_y2).abs()
    }
}

pub fn diagonal_recurrence(exp: &RhExpansion, k: usize, l: usize) -> Result<DiagonalCoefficient, RhError> {
    let p = exp.p();
    let pl = p + l;
    let den = exp.c(k, pl);
    let tiny = exp.y1.max_abs() * Real::exp2i(-(exp.prec() as i32) / 2, exp.prec());
    if den.abs() <= tiny {
        return Err(RhError::ZeroDenominator { row: k + 1, col: pl + 1 });
    }
    let prec = exp.prec();
    let mut lax_sum = Cplx::zero(prec);
    let mut y2_sum = exp.y2[(k, pl)].clone();
    for j in 0..exp.size() {
        if j == k {
            continue;
        }
        let t = exp.c(k, j) * exp.c(j, pl);
        if j < p {
            lax_sum += &t;
        }
        y2_sum -= &t;
    }
    let ws = &exp.ws;
    let lax = ws.one_minus_t() * &ws.a[k] + &ws.t * &ws.b[l] - (&lax_sum / den).re;
    let via_y2 = (&y2_sum / den).re;
    Ok(DiagonalCoefficient { lax, via_y2 })
}

/// `c_{k,k} - c̃_{k,k}` read directly off the two expansions.
pub fn shifted_diagonal_difference(exp: &RhExpansion, shifted: &RhExpansion, k: usize) -> Real {
    (exp.c(k, k) - shifted.c(k, k)).re
}

/// Residuals of the forward and backward `p+q+1` term recurrences.
#[derive(Debug, Clone)]
pub struct RecurrenceResidual {
    pub forward: Real,
    pub backward: Real,
    pub diagonal: DiagonalCoefficient,
}

fn max_rel(terms: &[Cplx], lhs: &Cplx) -> Real {
    let mut rhs = Cplx::zero(lhs.prec());
    let mut scale = lhs.abs();
    for t in terms {
        rhs += t;
        scale = scale.max(t.abs());
    }
    if scale.is_zero() {
        return scale;
    }
    (lhs - &rhs).abs() / scale
}

fn vector_residual(lhs: &MopSolution, terms: &[(Cplx, &MopSolution)], p: usize, zs: &[Cplx]) -> Real {
    let mut worst = Real::zero(lhs.prec());
    for z in zs {
        for j in 0..p {
            let parts: Vec<Cplx> = terms.iter().map(|(c, s)| c * &s.eval_poly_c(j, z)).collect();
            worst = worst.max(max_rel(&parts, &lhs.eval_poly_c(j, z)));
        }
    }
    worst
}

/// Evaluates the forward recurrence for `A^{(II,k)}` and the backward one for
/// `A^{(I,l)}` at every `z` in `zs`, componentwise, relative to the largest
/// term. Every component of `n` and `m` must be positive.
pub fn verify_five_term_recurrence(ws: &WeightSystem, idx: &MultiIndexPair, k: usize, l: usize, zs: &[Cplx]) -> Result<RecurrenceResidual, RhError> {
    if idx.n.iter().chain(&idx.m).any(|&v| v == 0) {
        return Err(MopError::InvalidIndex(format!("recurrences need positive components, got {:?}", idx)).into());
    }
    let (p, q) = (ws.p(), ws.q());
    let base = ShiftedFamily::solve(ws, idx)?;
    let exp = RhExpansion::from_family(ws, &base);
    let up = idx.inc_n(k).inc_m(l);
    let shifted = assemble_rh_expansion(ws, &up)?;
    let diagonal = diagonal_recurrence(&exp, k, l)?;
    let prec = exp.prec();
    let re = |v: Real| Cplx::from_real(v);
    let prod = |e: &RhExpansion, i: usize, j: usize| re(-e.product(i, j));

    // forward: A^{(II,k)}_{n+2e_k, m+e_l}
    let lhs = solve_mop(ws, &up.inc_n(k), Norm::TypeII(k))?;
    let mut owned = Vec::new();
    for kt in (0..p).filter(|&kt| kt != k) {
        owned.push((prod(&exp, k, kt), solve_mop(ws, &idx.inc_n(kt), Norm::TypeII(k))?));
    }
    for lt in 0..q {
        owned.push((prod(&exp, k, p + lt), solve_mop(ws, &idx.dec_m(lt).unwrap(), Norm::TypeII(k))?));
    }
    let a_k = base.rows[k].as_ref().unwrap();
    let mut forward = Real::zero(prec);
    for z in zs {
        let lead = z - &re(diagonal.lax.clone());
        let mut terms: Vec<(Cplx, &MopSolution)> = vec![(lead, a_k)];
        terms.extend(owned.iter().map(|(c, s)| (c.clone(), s)));
        forward = forward.max(vector_residual(&lhs, &terms, p, std::slice::from_ref(z)));
    }

    // backward: A^{(I,l)}_{n, m-e_l}
    let lhs = base.rows[p + l].as_ref().unwrap();
    let mid = solve_mop(ws, &idx.inc_n(k), Norm::TypeI(l))?;
    let mut owned = Vec::new();
    for kt in 0..p {
        owned.push((prod(&shifted, p + l, kt), solve_mop(ws, &up.inc_n(kt), Norm::TypeI(l))?));
    }
    for lt in (0..q).filter(|&lt| lt != l) {
        owned.push((prod(&shifted, p + l, p + lt), solve_mop(ws, &up.dec_m(lt).unwrap(), Norm::TypeI(l))?));
    }
    let diag_back = (exp.c(p + l, p + l) - shifted.c(p + l, p + l)).re;
    let mut backward = Real::zero(prec);
    for z in zs {
        let lead = z + &re(diag_back.clone());
        let mut terms: Vec<(Cplx, &MopSolution)> = vec![(lead, &mid)];
        terms.extend(owned.iter().map(|(c, s)| (c.clone(), s)));
        backward = backward.max(vector_residual(lhs, &terms, p, std::slice::from_ref(z)));
    }
    Ok(RecurrenceResidual { forward, backward, diagonal })
}

/// `V(z) = -(N/(t(1-t))) [[zI - D_a, -C_12], [C_21, D_b]]`, affine in `z`.
#[derive(Debug, Clone)]
pub struct LaxMatrix {
    /// `N / (t(1-t))`.
    pub scale: Real,
    /// Diagonal of `D_a = (1-t) diag(a)`.
    pub d_a: Vec<Real>,
    /// Diagonal of `D_b = t diag(b)`.
    pub d_b: Vec<Real>,
    pub c12: CMatrix,
    pub c21: CMatrix,
}

impl LaxMatrix {
    pub fn new(exp: &RhExpansion) -> Self {
        let ws = &exp.ws;
        let omt = ws.one_minus_t();
        LaxMatrix {
            scale: &ws.n_scale / (&ws.t * &omt),
            d_a: ws.a.iter().map(|a| a * &omt).collect(),
            d_b: ws.b.iter().map(|b| b * &ws.t).collect(),
            c12: exp.c12(),
            c21: exp.c21(),
        }
    }

    pub fn p(&self) -> usize {
        self.d_a.len()
    }

    pub fn q(&self) -> usize {
        self.d_b.len()
    }

    /// `V = V_0 + z V_1`, returned as `(V_0, V_1)`.
    pub fn coefficients(&self) -> (CMatrix, CMatrix) {
        let (p, q) = (self.p(), self.q());
        let prec = self.scale.prec();
        let s = &self.scale;
        let v0 = Matrix::from_fn(p + q, p + q, |i, j| match (i < p, j < p) {
            (true, true) if i == j => Cplx::from_real(&self.d_a[i] * s),
            (true, false) => self.c12[(i, j - p)].scale(s),
            (false, true) => -self.c21[(i - p, j)].scale(s),
            (false, false) if i == j => Cplx::from_real(-(&self.d_b[i - p] * s)),
            _ => Cplx::zero(prec),
        });
        let v1 = Matrix::from_fn(p + q, p + q, |i, j| if i == j && i < p { Cplx::from_real(-s.clone()) } else { Cplx::zero(prec) });
        (v0, v1)
    }

    pub fn eval(&self, z: &Cplx) -> CMatrix {
        let (v0, v1) = self.coefficients();
        v0.add(&v1.scale(z))
    }
}

pub fn lax_matrix(exp: &RhExpansion, z: &Cplx) -> CMatrix {
    LaxMatrix::new(exp).eval(z)
}

/// `f_j(z)` and `f_j'(z)` of `Ψ = Y diag(f_1, ..., f_{p+q})`.
pub fn psi_factors(ws: &WeightSystem, z: &Cplx) -> (Vec<Cplx>, Vec<Cplx>) {
    let omt = ws.one_minus_t();
    let s = &ws.n_scale / (&ws.t * &omt);
    let mut f = Vec::new();
    let mut fd = Vec::new();
    for a in &ws.a {
        let shift = a * &omt;
        // -(N/(2t(1-t)))(z² - 2(1-t)a z)
        let e = (&(z * z) - &(z.scale(&shift) * 2i64)).scale(&-(&s / 2i64));
        let v = e.exp();
        let d = &v * &(z - &shift).scale(&-s.clone());
        f.push(v);
        fd.push(d);
    }
    for b in &ws.b {
        let rate = -(&ws.n_scale * b / &omt);
        let v = z.scale(&rate).exp();
        fd.push(v.scale(&rate));
        f.push(v);
    }
    (f, fd)
}

#[derive(Debug, Clone)]
pub struct LaxResidual {
    /// `‖Ψ' - VΨ‖∞ / ‖VΨ‖∞`.
    pub relative: Real,
    /// The same restricted to the polynomial columns `1..p`.
    pub polynomial_columns: Real,
}

fn column_residual(a: &CMatrix, b: &CMatrix, cols: std::ops::Range<usize>) -> Real {
    let mut diff = Real::zero(a[(0, 0)].prec());
    let mut scale = diff.clone();
    for i in 0..a.rows() {
        let mut d = Real::zero(diff.prec());
        let mut s = d.clone();
        for j in cols.clone() {
            d += (&a[(i, j)] - &b[(i, j)]).abs();
            s += b[(i, j)].abs();
        }
        diff = diff.max(d);
        scale = scale.max(s);
    }
    if scale.is_zero() {
        scale
    } else {
        diff / scale
    }
}

/// Checks `Ψ'(z) = V(z) Ψ(z)` off the real axis.
pub fn verify_lax_ode(ws: &WeightSystem, idx: &MultiIndexPair, z: &Cplx) -> Result<LaxResidual, RhError> {
    if z.im.is_zero() {
        return Err(RhError::OnContour);
    }
    let rh = RhMatrix::new(ws, idx)?;
    let exp = RhExpansion::from_rh(&rh);
    let prec = rh.prec();
    let z = z.with_prec(prec);
    let (y, yd) = rh.eval_with_derivative(&z);
    let (f, fd) = psi_factors(&exp.ws, &z);
    let n = exp.size();
    let psi = Matrix::from_fn(n, n, |i, j| &y[(i, j)] * &f[j]);
    let psi_d = Matrix::from_fn(n, n, |i, j| &(&yd[(i, j)] * &f[j]) + &(&y[(i, j)] * &fd[j]));
    let v_psi = lax_matrix(&exp, &z).mul(&psi);
    Ok(LaxResidual { relative: column_residual(&psi_d, &v_psi, 0..n), polynomial_columns: column_residual(&psi_d, &v_psi, 0..exp.p()) })
}

/// One identity `lhs = rhs` with its residual relative to the largest
/// participating magnitude.
#[derive(Debug, Clone)]
pub struct IdentityResidual {
    pub name: String,
    pub lhs: Real,
    pub rhs: Real,
    pub residual: Real,
}

#[derive(Debug, Clone)]
pub struct ScalarProductReport {
    pub identities: Vec<IdentityResidual>,
}

impl ScalarProductReport {
    pub fn max_residual(&self) -> Real {
        self.identities.iter().map(|r| r.residual.clone()).fold(Real::zero(64), Real::max)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityResidual> {
        self.identities.iter().find(|r| r.name == name)
    }
}

struct Collector {
    prec: u32,
    out: Vec<IdentityResidual>,
}

impl Collector {
    /// `Σ lhs_terms = rhs`; `scale` adds magnitudes not visible in the sums.
    fn push(&mut self, name: String, lhs_terms: &[Real], rhs_terms: &[Real]) {
        let sum = |v: &[Real]| v.iter().fold(Real::zero(self.prec), |a, b| a + b);
        let mag = |v: &[Real]| v.iter().fold(Real::zero(self.prec), |a, b| a.max(b.abs()));
        let (lhs, rhs) = (sum(lhs_terms), sum(rhs_terms));
        let scale = mag(lhs_terms).max(mag(rhs_terms));
        let residual = if scale.is_zero() { scale } else { (&lhs - &rhs).abs() / scale };
        self.out.push(IdentityResidual { name, lhs, rhs, residual });
    }
}

/// Residuals of the scalar product relations among the blocks of `Y_1`, and
/// for `p = q = 2` the row/column sum consequences and the determinant
/// identity.
pub fn scalar_product_report(exp: &RhExpansion) -> ScalarProductReport {
    let (p, q) = (exp.p(), exp.q());
    let ws = &exp.ws;
    let prec = exp.prec();
    let omt = ws.one_minus_t();
    let tt = &ws.t * &omt;
    let n_over = |v: usize| &tt * v as i64 / &ws.n_scale;
    let mut col = Collector { prec, out: Vec::new() };
    for k in 0..p {
        for kt in 0..p {
            let terms: Vec<Real> = (0..q).map(|l| (exp.c(k, p + l) * exp.c(p + l, kt)).re).collect();
            if k == kt {
                col.push(format!("row_sum[{}]", k + 1), &terms, &[n_over(exp.idx.n[k])]);
            } else {
                let rhs = -(&omt * (&ws.a[k] - &ws.a[kt]) * &exp.c(k, kt).re);
                col.push(format!("skew_top[{},{}]", k + 1, kt + 1), &terms, &[rhs]);
            }
        }
    }
    for l in 0..q {
        for lt in 0..q {
            let terms: Vec<Real> = (0..p).map(|k| (exp.c(p + l, k) * exp.c(k, p + lt)).re).collect();
            if l == lt {
                col.push(format!("column_sum[{}]", l + 1), &terms, &[n_over(exp.idx.m[l])]);
            } else {
                let rhs = -(&ws.t * (&ws.b[l] - &ws.b[lt]) * &exp.c(p + l, p + lt).re);
                col.push(format!("skew_bottom[{},{}]", l + 1, lt + 1), &terms, &[rhs]);
            }
        }
    }
    if p == 2 && q == 2 {
        let h = |i: usize, j: usize| exp.product(i, j);
        let (n1, n2) = (exp.idx.n[0] as i64, exp.idx.n[1] as i64);
        let (m1, m2) = (exp.idx.m[0] as i64, exp.idx.m[1] as i64);
        let tt2n2 = tt.sqr() / ws.n_scale.sqr();
        let da2 = (&omt * (&ws.a[0] - &ws.a[1])).sqr();
        let db2 = (&ws.t * (&ws.b[0] - &ws.b[1])).sqr();
        let det_prod = (exp.c12().det() * exp.c21().det()).re;
        col.push("determinant_top".into(), std::slice::from_ref(&det_prod), &[&tt2n2 * (n1 * n2), &da2 * h(0, 1)]);
        col.push("determinant_bottom".into(), &[det_prod], &[&tt2n2 * (m1 * m2), &db2 * h(2, 3)]);
        col.push("determinant_difference".into(), &[&da2 * h(0, 1), -(&db2 * h(2, 3))], &[&tt2n2 * (m1 * m2 - n1 * n2)]);
        if exp.idx.n == exp.idx.m {
            col.push("relation1".into(), &[h(1, 2)], &[h(0, 3)]);
            col.push("relation2".into(), &[h(0, 2)], &[n_over(exp.idx.n[0]), -h(0, 3)]);
            col.push("relation3".into(), &[h(1, 3)], &[n_over(exp.idx.n[1]), -h(0, 3)]);
            col.push("relation4".into(), &[&db2 * h(2, 3)], &[&da2 * h(0, 1)]);
        }
    }
    ScalarProductReport { identities: col.out }
}

/// `J = [[0, I_q], [-I_p, 0]]`, mapping the ordering `(p, q)` to `(q, p)`.
pub fn involution_j(p: usize, q: usize, prec: u32) -> CMatrix {
    Matrix::from_fn(p + q, p + q, |i, j| {
        if i < q && j == p + i {
            Cplx::one(prec)
        } else if i >= q && j == i - q {
            -Cplx::one(prec)
        } else {
            Cplx::zero(prec)
        }
    })
}

/// `-J Y_1ᵀ J^{-1}`, the `Y_1` that the time-reversed problem must have.
pub fn involution_image(y1: &CMatrix, p: usize, q: usize) -> CMatrix {
    let prec = y1[(0, 0)].prec();
    let j = involution_j(p, q, prec);
    // J is a signed permutation, so J^{-1} = Jᵀ
    let out = j.mul(&y1.transpose()).mul(&j.transpose());
    out.map(|v| -v)
}

/// `‖Y_1^{swapped} + J Y_1ᵀ J^{-1}‖∞`.
pub fn involution_check(exp: &RhExpansion, swapped: &RhExpansion) -> Real {
    swapped.y1.sub(&involution_image(&exp.y1, exp.p(), exp.q())).norm_inf()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws() -> WeightSystem {
        let r = |v: f64| Real::from_f64(v, 256);
        WeightSystem::new(vec![r(1.0), r(-0.5)], vec![r(0.6), r(-0.8)], r(0.4), r(3.0)).unwrap()
    }

    #[test]
    fn zero_index_is_upper_triangular() {
        let exp = assemble_rh_expansion(&ws(), &MultiIndexPair::new(vec![0, 0], vec![0, 0])).unwrap();
        assert!(exp.c21().max_abs().is_zero());
        assert!(exp.c11().max_abs().is_zero());
        assert!(scalar_product_report(&exp).max_residual().is_zero());
    }

    #[test]
    fn j_is_orthogonal() {
        let j = involution_j(2, 3, 128);
        let id = j.mul(&j.transpose());
        assert_eq!(id, Matrix::identity(5, &Cplx::one(128)));
    }

    #[test]
    fn involution_image_is_an_involution() {
        let exp = assemble_rh_expansion(&ws(), &MultiIndexPair::new(vec![1, 2], vec![2, 1])).unwrap();
        let twice = involution_image(&involution_image(&exp.y1, 2, 2), 2, 2);
        assert!(twice.sub(&exp.y1).max_abs().is_zero());
    }
}
