//! The Riemann–Hilbert matrix `Y(z)` with its Cauchy-transform columns, the
//! correlation kernel of the non-intersecting paths, and density profiles.

mod cauchy;

pub use cauchy::{cauchy_integral_sum, cauchy_transform, cauchy_transform_derivative, PolyGaussian};

use crate::model::{classify_separation, semicircle_density, ellipse_endpoints, BrownianConfig, ModelError, Regime};
use crate::mop::{MopError, MultiIndexPair, ShiftedFamily, WeightSystem};
use crate::numerics::{CMatrix, Cplx, Matrix, Real};
use cauchy::divide_by_two_pi_i;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error(transparent)]
    Mop(#[from] MopError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("Y(z) is numerically singular at z = {0}")]
    Singular(String),
}

/// `Y(z)` for a fixed pair `(n, m)` with `|n| = |m|`.
#[derive(Debug, Clone)]
pub struct RhMatrix {
    pub ws: WeightSystem,
    pub family: ShiftedFamily,
}

impl RhMatrix {
    pub fn new(ws: &WeightSystem, idx: &MultiIndexPair) -> Result<Self, KernelError> {
        Ok(RhMatrix { ws: ws.clone(), family: ShiftedFamily::solve(ws, idx)? })
    }

    pub fn size(&self) -> usize {
        self.ws.p() + self.ws.q()
    }

    pub fn prec(&self) -> u32 {
        self.ws.prec().max(self.family.prec())
    }

    /// Densities `A_j w_{1,j} w_{2,l}` of row `r` against column `p+l`.
    fn row_densities(&self, r: usize, l: usize) -> Vec<PolyGaussian> {
        let sol = self.family.rows[r].as_ref().expect("row present");
        let gamma = self.ws.gamma();
        sol.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| PolyGaussian::new(c.clone(), gamma.clone(), self.ws.mu(j, l), self.ws.c(j, l)))
            .collect()
    }

    fn build(&self, z: &Cplx, derivative: bool) -> (CMatrix, Option<CMatrix>) {
        let (p, q) = (self.ws.p(), self.ws.q());
        let size = p + q;
        let prec = self.prec().max(z.prec());
        let z = z.with_prec(prec);
        let zero = Cplx::zero(prec);
        let mut y = Matrix::filled(size, size, zero.clone());
        let mut yd = Matrix::filled(size, size, zero.clone());
        let minus_two_pi_i = Cplx::new(Real::zero(prec), -(Real::pi(prec) * 2i64));
        for r in 0..size {
            let Some(sol) = &self.family.rows[r] else {
                // m_l = 0: the row is the unit vector
                y[(r, r)] = Cplx::one(prec);
                continue;
            };
            for j in 0..p {
                let mut v = sol.eval_poly_c(j, &z);
                let mut d = if derivative { sol.eval_poly_derivative_c(j, &z) } else { zero.clone() };
                if r >= p {
                    v = &v * &minus_two_pi_i;
                    d = &d * &minus_two_pi_i;
                }
                y[(r, j)] = v;
                yd[(r, j)] = d;
            }
            for l in 0..q {
                let (v, d) = cauchy_integral_sum(&self.row_densities(r, l), &z, derivative);
                // rows k carry (1/2πi)∫, rows p+l' carry -2πi·(1/2πi)∫ = -∫
                let scale = |x: Cplx| if r < p { divide_by_two_pi_i(&x) } else { -x };
                y[(r, p + l)] = scale(v);
                if let Some(d) = d {
                    yd[(r, p + l)] = scale(d);
                }
            }
        }
        (y, derivative.then_some(yd))
    }

    /// `Y(z)`; on the real axis the boundary value from the upper half plane.
    pub fn eval(&self, z: &Cplx) -> CMatrix {
        self.build(z, false).0
    }

    /// `(Y(z), Y'(z))`.
    pub fn eval_with_derivative(&self, z: &Cplx) -> (CMatrix, CMatrix) {
        let (y, d) = self.build(z, true);
        (y, d.unwrap())
    }

    /// `Y(z)^{-1}` from the adjugate; `det Y = 1` up to rounding.
    pub fn inverse(&self, y: &CMatrix) -> Result<CMatrix, KernelError> {
        let det = y.det();
        if det.is_zero() {
            return Err(KernelError::Singular("det Y = 0".into()));
        }
        let inv = det.recip();
        Ok(y.adjugate().map(|v| v * &inv))
    }

    fn weight_vectors(&self, x: &Real, y: &Real) -> (Vec<Cplx>, Vec<Cplx>) {
        let (p, q) = (self.ws.p(), self.ws.q());
        let prec = self.prec();
        let mut f = vec![Cplx::zero(prec); p + q];
        let mut g = vec![Cplx::zero(prec); p + q];
        for k in 0..p {
            f[k] = Cplx::from_real(self.ws.w1(k, x));
        }
        for l in 0..q {
            g[p + l] = Cplx::from_real(self.ws.w2(l, y));
        }
        (f, g)
    }
}

fn bilinear(g: &[Cplx], m: &CMatrix, f: &[Cplx]) -> Cplx {
    let mf = m.mul_vec(f);
    g.iter().zip(&mf).fold(Cplx::zero(mf[0].prec()), |acc, (a, b)| acc + a * b)
}

/// `Y` at `z` for the pair `idx` (solves the shifted family each call).
pub fn assemble_y(ws: &WeightSystem, idx: &MultiIndexPair, z: &Cplx) -> Result<CMatrix, KernelError> {
    Ok(RhMatrix::new(ws, idx)?.eval(z))
}

/// `K(x, y)` for `x ≠ y`; falls back to the confluent form when `x = y`.
pub fn correlation_kernel(rh: &RhMatrix, x: &Real, y: &Real) -> Result<Real, KernelError> {
    if x == y {
        return kernel_diagonal(rh, x);
    }
    let prec = rh.prec();
    let yx = rh.eval(&Cplx::from_real(x.with_prec(prec)));
    let yy = rh.eval(&Cplx::from_real(y.with_prec(prec)));
    let m = rh.inverse(&yy)?.mul(&yx);
    let (f, g) = rh.weight_vectors(x, y);
    let v = divide_by_two_pi_i(&bilinear(&g, &m, &f));
    Ok(v.re / (x - y))
}

/// `K(x, x) = (1/2πi) gᵀ Y⁻¹(x) Y'(x) f`.
pub fn kernel_diagonal(rh: &RhMatrix, x: &Real) -> Result<Real, KernelError> {
    let (y, yd) = rh.eval_with_derivative(&Cplx::from_real(x.with_prec(rh.prec())));
    let m = rh.inverse(&y)?.mul(&yd);
    let (f, g) = rh.weight_vectors(x, x);
    Ok(divide_by_two_pi_i(&bilinear(&g, &m, &f)).re)
}

/// Sampled `(1/n) K(x, x)` with the limiting semicircle laws for comparison.
#[derive(Debug, Clone)]
pub struct KernelGrid {
    pub t: Real,
    pub n: usize,
    pub x: Vec<Real>,
    pub density: Vec<Real>,
    /// Index of the support interval containing `x`, if any.
    pub membership: Vec<Option<usize>>,
    pub semicircle: Vec<[Real; 2]>,
    /// Sup distance to each semicircle over the inner 80% of its support.
    pub sup_distance: [Real; 2],
}

/// `points` equally spaced abscissae on `[α_2 - 0.5, β_1 + 0.5]`.
pub fn default_grid(cfg: &BrownianConfig, t: &Real, points: usize) -> Result<Vec<Real>, KernelError> {
    let (a2, _) = ellipse_endpoints(cfg, t, 1, false)?;
    let (_, b1) = ellipse_endpoints(cfg, t, 0, false)?;
    let lo = a2 - 0.5;
    let h = (b1 + 0.5 - &lo) / (points.max(2) as i64 - 1);
    Ok((0..points).map(|i| &lo + &h * i as i64).collect())
}

/// Normalized one-point density at `n` paths on `grid`.
pub fn density_profile(cfg: &BrownianConfig, n: usize, t: &Real, grid: &[Real]) -> Result<KernelGrid, KernelError> {
    use rayon::prelude::*;
    let sep = classify_separation(cfg)?;
    match sep.regime {
        Regime::Small => return Err(ModelError::WrongRegime { expected: "large or critical", found: Regime::Small }.into()),
        Regime::Critical if *t == sep.t_crit => return Err(ModelError::InvalidTime(t.to_f64()).into()),
        _ => {}
    }
    let (n1, n2) = cfg.split(n);
    let ws = WeightSystem::from_config(cfg, n, t)?;
    let rh = RhMatrix::new(&ws, &MultiIndexPair::new(vec![n1, n2], vec![n1, n2]))?;
    let density = grid
        .par_iter()
        .map(|x| kernel_diagonal(&rh, x).map(|k| k / n as i64))
        .collect::<Result<Vec<_>, _>>()?;
    let ends = [ellipse_endpoints(cfg, t, 0, false)?, ellipse_endpoints(cfg, t, 1, false)?];
    let prec = rh.prec();
    let mut membership = Vec::with_capacity(grid.len());
    let mut semicircle = Vec::with_capacity(grid.len());
    let mut sup = [Real::zero(prec), Real::zero(prec)];
    for (x, d) in grid.iter().zip(&density) {
        let mut inside = None;
        let mut sc = [Real::zero(prec), Real::zero(prec)];
        for j in 0..2 {
            let (a, b) = &ends[j];
            if x >= a && x <= b {
                inside = Some(j);
                sc[j] = semicircle_density(cfg, t, j, x)?;
                let band = (b - a) / 10i64;
                if *x >= a + &band && *x <= b - &band {
                    sup[j] = sup[j].clone().max((d - &sc[j]).abs());
                }
            }
        }
        membership.push(inside);
        semicircle.push(sc);
    }
    Ok(KernelGrid { t: t.clone(), n, x: grid.to_vec(), density, membership, semicircle, sup_distance: sup })
}
