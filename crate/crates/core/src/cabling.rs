//! Boundary generator built from ghost strands.
//!
//! `r - 1` ghost strands are added on the left and symmetrized together
//! with the first physical strand by the Jones-Wenzl element `S_r`. The
//! result `b_r` and the ghost projector `P_{r-1}` generate, together with
//! `P_{r-1} e_i`, a representation of the blob algebra with boundary weight
//! `y(r) = U_r(x/2) / U_{r-1}(x/2)`.
//!
//! Everything acts on the Temperley-Lieb link module on `N + r - 1`
//! strands, all string numbers at once, with `e_i` on two strings acting
//! as zero. Ghosts occupy strands `1..r-1`; physical `e_i` is `e_{i+r-1}`.

use std::ops::Div;

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{self, Dense};
use crate::ring::Scalar;
use crate::spectrum::dense_eigenvalues;
use crate::transfer::{build_block, LoopWeights};
use crate::linkstate::SectorLabel;

/// A scalar ring with division.
pub trait Field: Scalar + Div<Output = Self> {}
impl<S: Scalar + Div<Output = S>> Field for S {}

/// `U_k(x/2)`: `U_0 = 1`, `U_1 = x`, `U_{k+1} = x U_k - U_{k-1}`.
pub fn q_number<S: Scalar>(k: usize, x: &S) -> S {
    let mut prev = S::zero();
    let mut cur = S::one();
    for _ in 0..k {
        let next = x.mul_ref(&cur) - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Boundary weight `U_r / U_{r-1}` produced by `b_r`.
pub fn ghost_weight<S: Field>(r: usize, x: &S) -> Result<S> {
    let den = q_number(r - 1, x);
    if den.is_zero() {
        return Err(Error::DegenerateQNumber(r));
    }
    Ok(q_number(r, x) / den)
}

/// Link states on `m` strands: `partner[i] = i` marks a string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Link(Vec<usize>);

fn link_states(m: usize) -> Vec<Link> {
    fn go(pos: usize, m: usize, open: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Link>) {
        if pos == m {
            if open.is_empty() {
                out.push(Link(cur.clone()));
            }
            return;
        }
        // string: allowed only outside every arc
        if open.is_empty() {
            cur[pos] = pos;
            go(pos + 1, m, open, cur, out);
        }
        // close the innermost open arc
        if let Some(&o) = open.last() {
            open.pop();
            cur[pos] = o;
            cur[o] = pos;
            go(pos + 1, m, open, cur, out);
            open.push(o);
        }
        // open a new arc
        if m - pos > open.len() {
            open.push(pos);
            go(pos + 1, m, open, cur, out);
            open.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, &mut Vec::new(), &mut vec![0; m], &mut out);
    out.sort();
    out
}

/// `e_i` (1-based, joining strands `i` and `i+1`) on a link state.
fn act(state: &Link, i: usize) -> Option<(Link, bool)> {
    let (a, b) = (i - 1, i);
    let p = &state.0;
    if p[a] == b {
        return Some((state.clone(), true));
    }
    let (sa, sb) = (p[a] == a, p[b] == b);
    if sa && sb {
        return None;
    }
    let mut q = p.clone();
    let (pa, pb) = (p[a], p[b]);
    q[a] = b;
    q[b] = a;
    match (sa, sb) {
        (false, false) => {
            q[pa] = pb;
            q[pb] = pa;
        }
        (true, false) => q[pb] = pb,
        (false, true) => q[pa] = pa,
        (true, true) => unreachable!(),
    }
    Some((Link(q), false))
}

/// Matrices of `e_1..e_{m-1}` on the link module of `m` strands.
#[derive(Debug, Clone)]
pub struct LinkModule<S> {
    pub strands: usize,
    pub x: S,
    generators: Vec<Dense<S>>,
}

impl<S: Field> LinkModule<S> {
    pub fn new(strands: usize, x: S) -> Self {
        let states = link_states(strands);
        let index: std::collections::HashMap<&Link, usize> = states.iter().enumerate().map(|(k, s)| (s, k)).collect();
        let d = states.len();
        let generators = (1..strands)
            .map(|i| {
                let mut m = vec![vec![S::zero(); d]; d];
                for (col, s) in states.iter().enumerate() {
                    if let Some((t, closed)) = act(s, i) {
                        let w = if closed { x.clone() } else { S::one() };
                        m[index[&t]][col].add_ref(&w);
                    }
                }
                m
            })
            .collect();
        LinkModule { strands, x, generators }
    }

    pub fn dim(&self) -> usize {
        self.generators.first().map_or(1, |g| g.len())
    }

    pub fn identity(&self) -> Dense<S> {
        matrix::identity(self.dim())
    }

    /// `e_i`, 1-based.
    pub fn e(&self, i: usize) -> &Dense<S> {
        &self.generators[i - 1]
    }

    /// Jones-Wenzl element on strands `offset+1..=offset+k`, from
    /// `S_{j+1} = S_j - t_j S_j e_j S_j` with `t_j = U_{j-1} / U_j`.
    pub fn symmetrizer(&self, k: usize, offset: usize) -> Result<Dense<S>> {
        if offset + k > self.strands {
            return Err(Error::InvalidArgument(format!(
                "{k} strands from offset {offset} exceed {}",
                self.strands
            )));
        }
        let mut s = self.identity();
        for j in 1..k {
            let u = q_number(j, &self.x);
            if u.is_zero() {
                return Err(Error::DegenerateQNumber(j));
            }
            let t = q_number(j - 1, &self.x) / u;
            let ses = matrix::mul(&matrix::mul(&s, self.e(offset + j)), &s);
            s = matrix::sub(&s, &matrix::scale(&ses, &t));
        }
        Ok(s)
    }
}

/// Boundary generator and ghost projector for `N` physical strands.
#[derive(Debug, Clone)]
pub struct GhostBlob<S> {
    pub r: usize,
    pub n: usize,
    pub module: LinkModule<S>,
    pub blob: Dense<S>,
    pub projector: Dense<S>,
}

impl<S: Field> GhostBlob<S> {
    pub fn new(r: usize, n: usize, x: S) -> Result<Self> {
        if r == 0 || n == 0 {
            return Err(Error::InvalidArgument("need r >= 1 and N >= 1".into()));
        }
        let module = LinkModule::new(n + r - 1, x);
        let blob = module.symmetrizer(r, 0)?;
        let projector = module.symmetrizer(r - 1, 0)?;
        Ok(GhostBlob {
            r,
            n,
            module,
            blob,
            projector,
        })
    }

    /// Physical `e_i` (1-based) in the enlarged system.
    pub fn e(&self, i: usize) -> &Dense<S> {
        self.module.e(i + self.r - 1)
    }

    /// `P_{r-1} e_i`.
    pub fn e_tilde(&self, i: usize) -> Dense<S> {
        matrix::mul(&self.projector, self.e(i))
    }

    /// `b_r prod_{even i}(1 + P e_i) prod_{odd i}(1 + P e_i)`.
    pub fn transfer(&self) -> Dense<S> {
        let one = self.module.identity();
        let mut t = one.clone();
        for parity in [1, 0] {
            for i in (1..self.n).filter(|i| i % 2 == parity) {
                t = matrix::mul(&matrix::add(&one, &self.e_tilde(i)), &t);
            }
        }
        matrix::mul(&self.blob, &t)
    }
}

/// One checked identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationCheck {
    pub name: String,
    pub holds: bool,
    /// First differing matrix entry.
    pub witness: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlobRelationReport {
    pub r: usize,
    pub n: usize,
    pub x: String,
    pub checks: Vec<RelationCheck>,
    pub ok: bool,
}

/// Exact check of the blob-algebra relations satisfied by `b_r` and
/// `P_{r-1} e_i` in the ghost link module.
pub fn verify_blob_relations(r: usize, n: usize, x: &BigRational) -> Result<BlobRelationReport> {
    let g = GhostBlob::new(r, n, x.clone())?;
    let y = ghost_weight(r, x)?;
    let mut checks = Vec::new();
    let mut check = |name: String, a: Dense<BigRational>, b: Dense<BigRational>| {
        let witness = matrix::first_difference(&a, &b);
        checks.push(RelationCheck {
            name,
            holds: witness.is_none(),
            witness,
        });
    };
    let (b, p) = (&g.blob, &g.projector);
    check("b^2 = b".into(), matrix::mul(b, b), b.clone());
    check("P b = b".into(), matrix::mul(p, b), b.clone());
    check("b P = b".into(), matrix::mul(b, p), b.clone());
    if n >= 2 {
        let e1 = g.e(1);
        check(
            "e_1 b e_1 = y e_1 P".into(),
            matrix::mul(&matrix::mul(e1, b), e1),
            matrix::scale(&matrix::mul(e1, p), &y),
        );
        let et1 = g.e_tilde(1);
        check(
            "E_1 b E_1 = y E_1".into(),
            matrix::mul(&matrix::mul(&et1, b), &et1),
            matrix::scale(&et1, &y),
        );
    }
    for i in 1..n {
        let ei = g.e_tilde(i);
        check(format!("E_{i}^2 = x E_{i}"), matrix::mul(&ei, &ei), matrix::scale(&ei, x));
        if i >= 2 {
            check(format!("E_{i} b = b E_{i}"), matrix::mul(&ei, b), matrix::mul(b, &ei));
        }
        for j in 1..n {
            let ej = g.e_tilde(j);
            if j == i + 1 || j + 1 == i {
                check(
                    format!("E_{i} E_{j} E_{i} = E_{i}"),
                    matrix::mul(&matrix::mul(&ei, &ej), &ei),
                    ei.clone(),
                );
            } else if j > i + 1 {
                check(format!("E_{i} E_{j} = E_{j} E_{i}"), matrix::mul(&ei, &ej), matrix::mul(&ej, &ei));
            }
        }
    }
    let ok = checks.iter().all(|c| c.holds);
    Ok(BlobRelationReport {
        r,
        n,
        x: x.to_string(),
        checks,
        ok,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhostSpectrumReport {
    pub r: usize,
    pub n: usize,
    pub p: usize,
    /// Distinct nonzero moduli of the ghost transfer matrix.
    pub ghost: Vec<f64>,
    /// Distinct nonzero moduli of the realized blocks at `y = y(r)`.
    pub blob: Vec<f64>,
    /// Unblobbed blocks with `L >= r`, left out of the comparison.
    pub excluded: Vec<SectorLabel>,
    /// Whether every ghost level occurs in some block, excluded or not.
    pub ghost_subset: bool,
    pub max_deviation: f64,
    pub ok: bool,
}

fn distinct_nonzero(ev: &[num_complex::Complex64], tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for e in ev {
        let a = e.norm();
        if a > tol && !out.iter().any(|&b| (a - b).abs() <= tol * a.max(1.0)) {
            out.push(a);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Whether the ghost module realizes a block: every blobbed block, and the
/// unblobbed ones with fewer than `r` strings (only those leave ghosts to
/// contract with the leftmost physical string).
pub fn ghost_realizes(sector: SectorLabel, r: usize) -> bool {
    sector.blobbed || sector.n_strings < r
}

/// Compares the nonzero spectrum of the ghost transfer matrix with that of
/// the realized blocks at `x = 2 cos(pi/(p+1))`, `y = y(r)`.
pub fn compare_ghost_spectrum(r: usize, n: usize, p: usize, tol: f64) -> Result<GhostSpectrumReport> {
    let x = 2.0 * (std::f64::consts::PI / (p + 1) as f64).cos();
    let g = GhostBlob::new(r, n, x)?;
    let ghost = distinct_nonzero(&dense_eigenvalues(&g.transfer())?, tol);
    let y = ghost_weight(r, &x)?;
    let w = LoopWeights::new(x, y, 0.0, 0.0);
    let mut all = Vec::new();
    let mut rest = Vec::new();
    let mut excluded = Vec::new();
    for s in SectorLabel::all(n) {
        let ev = dense_eigenvalues(&build_block(n, s, &w)?.matrix())?;
        if ghost_realizes(s, r) {
            all.extend(ev);
        } else {
            rest.extend(ev);
            excluded.push(s);
        }
    }
    let blob = distinct_nonzero(&all, tol);
    let nearest = |v: f64, set: &[f64]| set.iter().map(|w| (v - w).abs()).fold(f64::INFINITY, f64::min);
    let max_deviation = ghost
        .iter()
        .map(|&v| nearest(v, &blob))
        .chain(blob.iter().map(|&v| nearest(v, &ghost)))
        .fold(0.0, f64::max);
    let everything = distinct_nonzero(&[all, rest].concat(), tol);
    let ghost_subset = ghost.iter().all(|&v| nearest(v, &everything) <= tol);
    Ok(GhostSpectrumReport {
        r,
        n,
        p,
        excluded,
        ghost_subset,
        ok: max_deviation <= tol,
        ghost,
        blob,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rat;
    use num_traits::Zero;

    fn x() -> BigRational {
        rat(3, 2)
    }

    #[test]
    fn link_module_sizes() {
        let sizes: Vec<usize> = (1..=6).map(|m| link_states(m).len()).collect();
        assert_eq!(sizes, vec![1, 2, 3, 6, 10, 20]);
    }

    #[test]
    fn small_symmetrizers() {
        let m = LinkModule::new(3, x());
        assert_eq!(m.symmetrizer(1, 0).unwrap(), m.identity());
        let s2 = matrix::sub(&m.identity(), &matrix::scale(m.e(1), &(rat(1, 1) / x())));
        assert_eq!(m.symmetrizer(2, 0).unwrap(), s2);
        let (t1, t2) = (rat(1, 1) / x(), x() / (x() * x() - rat(1, 1)));
        let e12 = matrix::mul(m.e(1), m.e(2));
        let e21 = matrix::mul(m.e(2), m.e(1));
        let s3 = matrix::add(
            &matrix::sub(&m.identity(), &matrix::scale(&matrix::add(m.e(1), m.e(2)), &t2)),
            &matrix::scale(&matrix::add(&e12, &e21), &(t1 * t2)),
        );
        assert_eq!(m.symmetrizer(3, 0).unwrap(), s3);
    }

    #[test]
    fn symmetrizer_is_killed_by_its_generators() {
        for k in 2..=5 {
            let m = LinkModule::new(k + 1, x());
            let s = m.symmetrizer(k, 0).unwrap();
            assert_eq!(matrix::mul(&s, &s), s);
            for i in 1..k {
                assert!(matrix::mul(&s, m.e(i)).iter().flatten().all(Zero::is_zero));
                assert!(matrix::mul(m.e(i), &s).iter().flatten().all(Zero::is_zero));
            }
        }
    }

    #[test]
    fn second_blob_weight() {
        let y = ghost_weight(2, &x()).unwrap();
        assert_eq!(y, (x() * x() - rat(1, 1)) / x());
        let p = crate::cft::kac::p_of_x(1.5).unwrap();
        assert!((crate::cft::kac::y_of_r(p, 2.0) - 1.25 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn relations_small() {
        for r in 1..=3 {
            for n in 1..=3 {
                let rep = verify_blob_relations(r, n, &x()).unwrap();
                assert!(rep.ok, "{:?}", rep.checks.iter().filter(|c| !c.holds).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn ghost_spectrum_small() {
        for r in 1..=3 {
            for n in 1..=4 {
                let g = compare_ghost_spectrum(r, n, 6, 1e-10).unwrap();
                assert!(g.ok, "r={r} n={n} {g:?}");
            }
        }
        assert_eq!(compare_ghost_spectrum(2, 4, 6, 1e-10).unwrap().excluded, vec![SectorLabel::unblobbed(2)]);
    }

    #[test]
    fn degenerate_q_number() {
        assert!(matches!(GhostBlob::new(3, 2, 0.0f64), Err(Error::DegenerateQNumber(1))));
    }
}
