//! Eigenvalues of transfer-matrix blocks and scaled level sets.
//!
//! Small blocks are diagonalized densely through a real Schur form; large
//! blocks use matrix-free subspace iteration with Rayleigh-Ritz extraction,
//! which only needs the factorized block action.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Dense;
use crate::transfer::SectorBlock;

/// Lattice rows covered by one application of the transfer matrix (the odd
/// and the even row of faces); levels are quoted per row.
pub const ROWS_PER_STEP: usize = 2;

/// Merge tolerance on `f` used throughout.
pub const MERGE_TOL: f64 = 1e-9;

/// Relative imaginary part above which an eigenvalue is reported as complex.
pub const COMPLEX_FLAG: f64 = 1e-10;

/// Blocks up to this dimension are diagonalized densely.
pub const DENSE_LIMIT: usize = 600;

fn sort_by_modulus(v: &mut [Complex64]) {
    v.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
}

/// All eigenvalues of a dense real matrix, by decreasing modulus.
pub fn dense_eigenvalues(m: &Dense<f64>) -> Result<Vec<Complex64>> {
    let d = m.len();
    if d == 0 {
        return Ok(Vec::new());
    }
    let mat = DMatrix::from_fn(d, d, |i, j| m[i][j]);
    let schur = Schur::try_new(mat, 1e-15, 100_000).ok_or(Error::NoConvergence(100_000))?;
    let mut ev: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    sort_by_modulus(&mut ev);
    Ok(ev)
}

fn orthonormalize(vs: &mut [Vec<f64>]) {
    for i in 0..vs.len() {
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for j in 0..i {
                let (head, tail) = vs.split_at_mut(i);
                let q = &head[j];
                let v = &mut tail[0];
                let dot: f64 = q.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= dot * y;
                }
            }
        }
        let norm = vs[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in vs[i].iter_mut() {
                *x /= norm;
            }
        }
    }
}

/// The `k` eigenvalues of largest modulus of a linear map given by its
/// action, by subspace iteration on a block of `k + guard` vectors.
pub fn leading_eigenvalues<F>(apply: F, dim: usize, k: usize, tol: f64, max_iter: usize) -> Result<Vec<Complex64>>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    use rayon::prelude::*;

    let k = k.min(dim);
    if k == 0 {
        return Ok(Vec::new());
    }
    let width = (k + k.max(4)).min(dim);
    // deterministic, generic start vectors
    let mut basis: Vec<Vec<f64>> = (0..width)
        .map(|c| {
            (0..dim)
                .map(|i| {
                    let t = (i as f64 + 1.0) * (c as f64 + 1.0) * 0.618_033_988_749_895;
                    (t.fract() - 0.5) + if c == 0 { 1.0 } else { 0.0 }
                })
                .collect()
        })
        .collect();
    orthonormalize(&mut basis);
    let mut prev: Vec<Complex64> = Vec::new();
    for it in 0..max_iter {
        let images: Vec<Vec<f64>> = basis.par_iter().map(|v| apply(v)).collect();
        // Rayleigh-Ritz: H = Q^T A Q
        let mut h = vec![vec![0.0; width]; width];
        for (i, q) in basis.iter().enumerate() {
            for (j, aq) in images.iter().enumerate() {
                h[i][j] = q.iter().zip(aq).map(|(a, b)| a * b).sum();
            }
        }
        let mut ritz = dense_eigenvalues(&h)?;
        ritz.truncate(k);
        let converged = prev.len() == ritz.len()
            && prev
                .iter()
                .zip(&ritz)
                .all(|(a, b)| (a - b).norm() <= tol * b.norm().max(1e-300));
        if converged && it > 2 {
            return Ok(ritz);
        }
        prev = ritz;
        basis = images;
        orthonormalize(&mut basis);
    }
    Err(Error::NoConvergence(max_iter))
}

/// Eigenvalues of a block: all of them for small blocks, otherwise the
/// `k` of largest modulus.
pub fn block_eigenvalues(block: &SectorBlock<f64>, k: usize) -> Result<Vec<Complex64>> {
    if block.dim() <= DENSE_LIMIT {
        let mut ev = dense_eigenvalues(&block.matrix())?;
        if k < ev.len() {
            ev.truncate(k);
        }
        Ok(ev)
    } else {
        leading_eigenvalues(|v| block.apply(v), block.dim(), k, 1e-13, 20_000)
    }
}

/// Scaled level of an eigenvalue of modulus `a` on `n` points.
pub fn level(n: usize, a: f64) -> f64 {
    -a.ln() / (ROWS_PER_STEP * n) as f64
}

/// One distinct level with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub f: f64,
    pub multiplicity: usize,
}

/// Scaled levels `f = -log|lambda| / (2N)` (per lattice row), ascending,
/// equal values merged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSet {
    pub levels: Vec<Level>,
    /// Eigenvalues with a non-negligible imaginary part.
    pub complex: usize,
    /// Eigenvalues that vanish (no finite level).
    pub zeros: usize,
}

impl LevelSet {
    pub fn from_eigenvalues(n: usize, eigenvalues: &[Complex64]) -> Self {
        let mut fs = Vec::new();
        let mut complex = 0;
        let mut zeros = 0;
        let scale = eigenvalues.iter().map(|e| e.norm()).fold(0.0, f64::max);
        for e in eigenvalues {
            let a = e.norm();
            if a <= 1e-12 * scale.max(1.0) {
                zeros += 1;
                continue;
            }
            if e.im.abs() > COMPLEX_FLAG * a {
                complex += 1;
            }
            fs.push(level(n, a));
        }
        LevelSet::from_values(fs, complex, zeros)
    }

    pub fn from_values(mut fs: Vec<f64>, complex: usize, zeros: usize) -> Self {
        fs.sort_by(f64::total_cmp);
        let mut levels: Vec<Level> = Vec::new();
        for f in fs {
            match levels.last_mut() {
                Some(last) if (f - last.f).abs() <= MERGE_TOL => last.multiplicity += 1,
                _ => levels.push(Level { f, multiplicity: 1 }),
            }
        }
        LevelSet { levels, complex, zeros }
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(|l| l.multiplicity).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Multiplicity of the level nearest to `f` within `tol`, else 0.
    pub fn multiplicity_of(&self, f: f64, tol: f64) -> usize {
        self.levels
            .iter()
            .filter(|l| (l.f - f).abs() <= tol)
            .min_by(|a, b| (a.f - f).abs().total_cmp(&(b.f - f).abs()))
            .map_or(0, |l| l.multiplicity)
    }

    pub fn lowest(&self) -> Option<f64> {
        self.levels.first().map(|l| l.f)
    }

    /// Levels of `self` (with multiplicity) not accounted for in `other`.
    pub fn orphans_in(&self, other: &LevelSet, tol: f64) -> Vec<f64> {
        let mut budget: Vec<usize> = other.levels.iter().map(|l| l.multiplicity).collect();
        let mut out = Vec::new();
        for l in &self.levels {
            let mut need = l.multiplicity;
            let mut cands: Vec<usize> = (0..other.levels.len())
                .filter(|&i| (other.levels[i].f - l.f).abs() <= tol)
                .collect();
            cands.sort_by(|&a, &b| (other.levels[a].f - l.f).abs().total_cmp(&(other.levels[b].f - l.f).abs()));
            for i in cands {
                let take = need.min(budget[i]);
                budget[i] -= take;
                need -= take;
            }
            out.extend(std::iter::repeat_n(l.f, need));
        }
        out
    }

    /// Multiset inclusion up to `tol`.
    pub fn is_subset_of(&self, other: &LevelSet, tol: f64) -> bool {
        self.orphans_in(other, tol).is_empty()
    }
}
