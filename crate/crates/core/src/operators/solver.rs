//! Largest singular value of a sparse operator.
//!
//! Both solvers work on the Hermitian operator `AᴴA` and stop on the
//! residual `‖AᴴAu − θu‖ ≤ tol·θ`. The value they report is `‖Au‖/‖u‖` for
//! the final vector `u`, which is a lower bound for `‖A‖` whether or not the
//! iteration converged.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::compress::LinearOperator;
use crate::cocycles::DEFAULT_SEED;

/// Memory allowed for the Lanczos basis.
const KRYLOV_BUDGET_BYTES: usize = 1 << 30;
const MAX_KRYLOV_DIM: usize = 64;
const MIN_KRYLOV_DIM: usize = 8;
/// A reorthogonalization pass that keeps more than this fraction of the
/// norm is not repeated.
const REORTH_RATIO: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Restarted Lanczos with full reorthogonalization.
    #[default]
    Lanczos,
    PowerIteration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Relative residual tolerance.
    pub tol: f64,
    pub seed: u64,
    /// Cap on applications of `AᴴA`.
    pub max_matvecs: usize,
    pub method: SolverKind,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-6,
            seed: DEFAULT_SEED,
            max_matvecs: 10_000,
            method: SolverKind::Lanczos,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    /// `‖Au‖/‖u‖` for the returned vector.
    pub value: f64,
    /// Final relative residual.
    pub residual: f64,
    pub matvecs: usize,
    pub converged: bool,
    pub method: SolverKind,
    pub seed: u64,
}

/// Unit right vector `u` and `v = Au/‖Au‖` (zero when `Au = 0`).
#[derive(Clone, Debug)]
pub struct SingularPair {
    pub right: Vec<Complex64>,
    pub left: Vec<Complex64>,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    // independent lanes so the sum vectorizes
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let (ac, bc) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: Complex64 = ac.remainder().iter().zip(bc.remainder()).map(|(x, y)| x.conj() * y).sum();
    for (x, y) in ac.zip(bc) {
        for l in 0..4 {
            re[l] += x[l].re * y[l].re + x[l].im * y[l].im;
            im[l] += x[l].re * y[l].im - x[l].im * y[l].re;
        }
    }
    Complex64::new(re.iter().sum::<f64>(), im.iter().sum::<f64>()) + tail
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(a: &mut [Complex64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

fn axpy(y: &mut [Complex64], alpha: Complex64, x: &[Complex64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

/// Rows per block in [`project_out`]; a block of `w` stays in cache while
/// the basis streams past it.
const BLOCK: usize = 4096;

/// One classical Gram-Schmidt pass `w -= V Vᴴ w`, blocked so that `w` is
/// read from memory once per pass instead of once per basis vector.
fn project_out(basis: &[Vec<Complex64>], w: &mut [Complex64]) {
    let mut h = vec![Complex64::default(); basis.len()];
    for start in (0..w.len()).step_by(BLOCK) {
        let end = (start + BLOCK).min(w.len());
        for (hi, v) in h.iter_mut().zip(basis) {
            *hi += dot(&v[start..end], &w[start..end]);
        }
    }
    for start in (0..w.len()).step_by(BLOCK) {
        let end = (start + BLOCK).min(w.len());
        for (hi, v) in h.iter().zip(basis) {
            axpy(&mut w[start..end], -hi, &v[start..end]);
        }
    }
}

fn random_unit(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let s = norm(&v);
    scale(&mut v, 1.0 / s);
    v
}

struct Gram<'a, A: LinearOperator + ?Sized> {
    op: &'a A,
    tmp: Vec<Complex64>,
    matvecs: usize,
}

impl<A: LinearOperator + ?Sized> Gram<'_, A> {
    fn apply(&mut self, x: &[Complex64], out: &mut [Complex64]) {
        self.op.apply(x, &mut self.tmp);
        self.op.apply_adjoint(&self.tmp, out);
        self.matvecs += 1;
    }
}

/// Top singular value of `op`, optionally warm-started from `start`.
pub fn top_singular<A: LinearOperator + ?Sized>(
    op: &A,
    opts: &SolverOptions,
    start: Option<&[Complex64]>,
) -> (SolverReport, SingularPair) {
    let n = op.ncols();
    let mut u = match start {
        Some(s) if s.len() == n && norm(s) > 0.0 => {
            let mut v = s.to_vec();
            let s = norm(&v);
            scale(&mut v, 1.0 / s);
            v
        }
        _ => random_unit(n, opts.seed),
    };
    let mut gram = Gram {
        op,
        tmp: vec![Complex64::default(); op.nrows()],
        matvecs: 0,
    };
    let (residual, converged) = if n == 0 {
        (0.0, true)
    } else {
        match opts.method {
            SolverKind::Lanczos => lanczos(&mut gram, &mut u, opts),
            SolverKind::PowerIteration => power(&mut gram, &mut u, opts),
        }
    };
    let matvecs = gram.matvecs;
    let mut left = vec![Complex64::default(); op.nrows()];
    op.apply(&u, &mut left);
    let value = norm(&left) / norm(&u).max(f64::MIN_POSITIVE);
    if value > 0.0 {
        let s = norm(&left);
        scale(&mut left, 1.0 / s);
    }
    (
        SolverReport {
            value,
            residual,
            matvecs,
            converged,
            method: opts.method,
            seed: opts.seed,
        },
        SingularPair { right: u, left },
    )
}

fn power<A: LinearOperator + ?Sized>(
    gram: &mut Gram<'_, A>,
    u: &mut Vec<Complex64>,
    opts: &SolverOptions,
) -> (f64, bool) {
    let mut w = vec![Complex64::default(); u.len()];
    let mut residual = f64::INFINITY;
    while gram.matvecs < opts.max_matvecs {
        gram.apply(u, &mut w);
        let theta = dot(u, &w).re;
        let wn = norm(&w);
        if wn == 0.0 {
            return (0.0, true);
        }
        let r: f64 = w
            .iter()
            .zip(u.iter())
            .map(|(a, b)| (a - b * theta).norm_sqr())
            .sum::<f64>()
            .sqrt();
        residual = r / theta.max(f64::MIN_POSITIVE);
        std::mem::swap(u, &mut w);
        scale(u, 1.0 / wn);
        if residual <= opts.tol {
            return (residual, true);
        }
    }
    (residual, false)
}

fn krylov_dim(n: usize) -> usize {
    let budget = KRYLOV_BUDGET_BYTES / (16 * n.max(1));
    budget.clamp(MIN_KRYLOV_DIM, MAX_KRYLOV_DIM).min(n)
}

/// Top eigenpair of the symmetric tridiagonal matrix with diagonal `alpha`
/// and off-diagonal `beta`.
fn ritz(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (k, theta) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    (theta, eig.eigenvectors.column(k).iter().copied().collect())
}

fn lanczos<A: LinearOperator + ?Sized>(
    gram: &mut Gram<'_, A>,
    u: &mut Vec<Complex64>,
    opts: &SolverOptions,
) -> (f64, bool) {
    let n = u.len();
    let m_max = krylov_dim(n);
    let mut scale_est: f64 = 0.0;
    loop {
        let mut basis: Vec<Vec<Complex64>> = vec![u.clone()];
        let mut alpha: Vec<f64> = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        let mut w = vec![Complex64::default(); n];
        let mut y = vec![1.0];
        let mut residual = f64::INFINITY;
        let mut converged = false;
        for j in 0..m_max {
            gram.apply(&basis[j], &mut w);
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            axpy(&mut w, Complex64::new(-a, 0.0), &basis[j]);
            if j > 0 {
                axpy(&mut w, Complex64::new(-beta[j - 1], 0.0), &basis[j - 1]);
            }
            // full reorthogonalization; a second pass only when the first
            // one cancelled most of w
            let mut b = norm(&w);
            for _ in 0..2 {
                let before = b;
                project_out(&basis, &mut w);
                b = norm(&w);
                if b > REORTH_RATIO * before {
                    break;
                }
            }
            scale_est = scale_est.max(a.abs() + b);
            let (theta, yv) = ritz(&alpha, &beta);
            y = yv;
            let invariant = b <= 64.0 * f64::EPSILON * scale_est || j + 1 == n;
            residual = if theta > 0.0 {
                b * y[j].abs() / theta
            } else if invariant {
                0.0
            } else {
                f64::INFINITY
            };
            if residual <= opts.tol || invariant {
                converged = true;
                break;
            }
            if gram.matvecs >= opts.max_matvecs || j + 1 == m_max {
                break;
            }
            scale(&mut w, 1.0 / b);
            beta.push(b);
            basis.push(w.clone());
        }
        let mut next = vec![Complex64::default(); n];
        for (v, &c) in basis.iter().zip(&y) {
            axpy(&mut next, Complex64::new(c, 0.0), v);
        }
        let s = norm(&next);
        if s > 0.0 {
            scale(&mut next, 1.0 / s);
            *u = next;
        }
        if converged || gram.matvecs >= opts.max_matvecs {
            return (residual, converged);
        }
    }
}
