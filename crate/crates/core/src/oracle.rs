//! Brute-force annulus partition function: every face configuration is drawn
//! on the lattice and its loops are traced geometrically.
//!
//! Lattice nodes sit on strand `i` at level `rho`, with `2M` levels around the
//! periodic direction. Row `rho` joins level `rho` to level `rho + 1`; even
//! rows carry the faces on strand pairs `(1,2), (3,4), ...`, odd rows the pairs
//! `(2,3), (4,5), ...`. A face is either the identity (two vertical edges) or
//! a cap on its lower level plus a cup on its upper level. The boundary acts on
//! the first strand at every even level; a loop through a marked node touches
//! the left rim. The right rim simply reflects strands.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ring::{Monomial, Poly, Var};

/// Largest number of enumerated bits (`M*(N-1)`, plus `M` for finite coupling).
pub const BUDGET_BITS: usize = 24;

/// How the boundary generator enters each time slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LambdaMode {
    /// Blob applied on every slice.
    Saturated,
    /// Each slice independently applies `b` with weight `lambda` or not.
    Finite,
}

/// One face configuration: bit `k` of `faces` is face `k` in slice-major
/// order (odd faces of a slice before its even faces); bit `t` of `boundary`
/// says whether slice `t` applies the blob (finite mode only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceAssignment {
    pub faces: u64,
    pub boundary: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TracedLoop {
    /// `(strand, level)` nodes in traversal order, 0-based.
    pub path: Vec<(usize, usize)>,
    /// Net number of turns around the periodic direction.
    pub winding: i64,
    pub touches_left: bool,
}

/// Weight symbol of a loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LoopKind {
    X,
    Y,
    L,
    M,
}

pub fn classify(lp: &TracedLoop) -> LoopKind {
    match (lp.winding != 0, lp.touches_left) {
        (false, false) => LoopKind::X,
        (false, true) => LoopKind::Y,
        (true, false) => LoopKind::L,
        (true, true) => LoopKind::M,
    }
}

const UP: u8 = 0;
const DOWN: u8 = 1;

#[derive(Clone, Copy, Default)]
struct Edge {
    to: u32,
    side: u8,
    dv: i8,
}

struct Lattice {
    n: usize,
    levels: usize,
    // links[node * 2 + side]
    links: Vec<Edge>,
    marked: Vec<bool>,
}

impl Lattice {
    fn new(n: usize, m: usize) -> Self {
        let levels = 2 * m;
        Lattice {
            n,
            levels,
            links: vec![Edge::default(); 2 * n * levels],
            marked: vec![false; n * levels],
        }
    }

    fn node(&self, i: usize, rho: usize) -> usize {
        (rho % self.levels) * self.n + i
    }

    fn set(&mut self, a: usize, sa: u8, b: usize, sb: u8, dv: i8) {
        self.links[a * 2 + sa as usize] = Edge { to: b as u32, side: sb, dv };
        self.links[b * 2 + sb as usize] = Edge { to: a as u32, side: sa, dv: -dv };
    }

    fn fill(&mut self, cfg: FaceAssignment, mode: LambdaMode) {
        let n = self.n;
        let mut bit = 0;
        for rho in 0..self.levels {
            let first = if rho % 2 == 0 { 0 } else { 1 };
            let mut covered = vec![false; n];
            let mut a = first;
            while a + 1 < n {
                covered[a] = true;
                covered[a + 1] = true;
                let lo_a = self.node(a, rho);
                let lo_b = self.node(a + 1, rho);
                let hi_a = self.node(a, rho + 1);
                let hi_b = self.node(a + 1, rho + 1);
                if cfg.faces >> bit & 1 == 1 {
                    self.set(lo_a, UP, lo_b, UP, 0);
                    self.set(hi_a, DOWN, hi_b, DOWN, 0);
                } else {
                    self.set(lo_a, UP, hi_a, DOWN, 1);
                    self.set(lo_b, UP, hi_b, DOWN, 1);
                }
                bit += 1;
                a += 2;
            }
            for (i, c) in covered.iter().enumerate() {
                if !c {
                    let lo = self.node(i, rho);
                    let hi = self.node(i, rho + 1);
                    self.set(lo, UP, hi, DOWN, 1);
                }
            }
        }
        for t in 0..self.levels / 2 {
            let on = match mode {
                LambdaMode::Saturated => true,
                LambdaMode::Finite => cfg.boundary >> t & 1 == 1,
            };
            let v = self.node(0, 2 * t + 2);
            self.marked[v] = on;
        }
    }

    /// Calls `visit(winding, touches, path)` for each loop.
    fn trace<F: FnMut(i64, bool, &[usize])>(&self, keep_path: bool, mut visit: F) {
        let total = self.n * self.levels;
        let mut seen = vec![false; total];
        let mut path = Vec::new();
        for start in 0..total {
            if seen[start] {
                continue;
            }
            path.clear();
            let mut cur = start;
            let mut out_side = UP;
            let mut dv: i64 = 0;
            let mut touch = self.marked[start];
            seen[start] = true;
            loop {
                if keep_path {
                    path.push(cur);
                }
                let e = self.links[cur * 2 + out_side as usize];
                dv += e.dv as i64;
                cur = e.to as usize;
                if cur == start {
                    break;
                }
                seen[cur] = true;
                touch |= self.marked[cur];
                out_side = 1 - e.side;
            }
            visit(dv / self.levels as i64, touch, &path);
        }
    }
}

fn face_bits(n: usize, m: usize) -> usize {
    m * (n.saturating_sub(1))
}

/// Traces all loops of one configuration.
pub fn trace_loops(n: usize, m: usize, cfg: FaceAssignment, mode: LambdaMode) -> Vec<TracedLoop> {
    let mut lat = Lattice::new(n, m);
    lat.fill(cfg, mode);
    let mut out = Vec::new();
    lat.trace(true, |w, t, p| {
        out.push(TracedLoop {
            path: p.iter().map(|&v| (v % n, v / n)).collect(),
            winding: w,
            touches_left: t,
        })
    });
    out
}

type Key = [u16; 5];

/// Exact partition function as a polynomial in `x, y, l, m` (and `lambda` in
/// finite mode) by enumerating all configurations.
pub fn enumerate_z(n: usize, m: usize, mode: LambdaMode) -> Result<Poly> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("need N >= 1 and M >= 1".into()));
    }
    let fb = face_bits(n, m);
    let bb = if mode == LambdaMode::Finite { m } else { 0 };
    let bits = fb + bb;
    if bits > BUDGET_BITS {
        return Err(Error::Budget {
            bits,
            limit: BUDGET_BITS,
        });
    }
    let total: u64 = 1 << bits;
    let chunk_bits = bits.min(10);
    let chunks: u64 = total >> chunk_bits;
    let merged = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut lat = Lattice::new(n, m);
            let mut acc: HashMap<Key, u64> = HashMap::new();
            for k in 0..(1u64 << chunk_bits) {
                let cfg_bits = (c << chunk_bits) | k;
                let cfg = FaceAssignment {
                    faces: cfg_bits & ((1u64 << fb) - 1),
                    boundary: cfg_bits >> fb,
                };
                lat.fill(cfg, mode);
                let mut key: Key = [0; 5];
                lat.trace(false, |w, t, _| {
                    let idx = match (w != 0, t) {
                        (false, false) => 0,
                        (false, true) => 1,
                        (true, false) => 2,
                        (true, true) => 3,
                    };
                    key[idx] += 1;
                });
                key[4] = cfg.boundary.count_ones() as u16;
                *acc.entry(key).or_insert(0) += 1;
            }
            acc.into_iter().collect::<BTreeMap<Key, u64>>()
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let mut z = Poly::zero();
    for (k, count) in merged {
        let mut mono = Monomial::one();
        for (v, d) in [Var::X, Var::Y, Var::L, Var::M, Var::Lambda].into_iter().zip(k) {
            mono = mono.with_degree(v, d);
        }
        z = z + Poly::monomial(mono, BigRational::from_integer(BigInt::from(count)));
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly {
        s.parse().unwrap()
    }

    #[test]
    fn small_cases() {
        assert_eq!(enumerate_z(2, 1, LambdaMode::Saturated).unwrap(), p("y^1: 1, l^1*m^1: 1"));
        assert_eq!(
            enumerate_z(2, 2, LambdaMode::Saturated).unwrap(),
            p("y^1: 2, y^2: 1, l^1*m^1: 1")
        );
    }

    #[test]
    fn all_winding_term_at_n4() {
        let z = enumerate_z(4, 1, LambdaMode::Saturated).unwrap();
        let all = Monomial::one().with_degree(Var::L, 3).with_degree(Var::M, 1);
        assert_eq!(z.coeff(&all), BigRational::from_integer(1.into()));
    }

    #[test]
    fn classification_and_covering() {
        let loops = trace_loops(3, 2, FaceAssignment { faces: 0b0110, boundary: 0 }, LambdaMode::Saturated);
        let covered: usize = loops.iter().map(|l| l.path.len()).sum();
        assert_eq!(covered, 3 * 4);
        assert!(loops.iter().filter(|l| classify(l) == LoopKind::M).count() <= 1);
        let ident = trace_loops(2, 1, FaceAssignment { faces: 0, boundary: 0 }, LambdaMode::Saturated);
        let kinds: Vec<LoopKind> = ident.iter().map(classify).collect();
        assert_eq!(kinds, vec![LoopKind::M, LoopKind::L]);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            enumerate_z(9, 4, LambdaMode::Saturated),
            Err(Error::Budget { .. })
        ));
    }
}
