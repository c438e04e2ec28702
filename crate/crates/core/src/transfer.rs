//! Loop-model transfer matrices: sector blocks over a pluggable scalar ring,
//! full states with bottom tracking, and annulus partition functions.
//!
//! One time step is `T = B * E_even * E_odd` where `E_odd` is the product of
//! `(1 + e_i)` over odd `i`, `E_even` over even `i`, and `B` is either the
//! blob `b` (saturated coupling) or `1 + lambda * b`. Applied to a state the
//! odd row acts first.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::linkstate::{enumerate_basis, BasisKind, LinkState, LoopFactor, SectorLabel, STRING};
use crate::ring::{Poly, Scalar, Var};

/// Boundary coupling.
#[derive(Debug, Clone, PartialEq)]
pub enum Boundary<S> {
    /// `lambda = infinity`, i.e. `T = b T_0`.
    Saturated,
    /// Finite `lambda`, `T = (1 + lambda b) T_0`.
    Coupling(S),
}

/// Loop fugacities and boundary coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopWeights<S> {
    /// contractible, away from the boundary
    pub x: S,
    /// contractible, touching the boundary
    pub y: S,
    /// winding, away from the boundary
    pub l: S,
    /// winding, touching the boundary
    pub m: S,
    pub boundary: Boundary<S>,
}

impl<S: Scalar> LoopWeights<S> {
    pub fn new(x: S, y: S, l: S, m: S) -> Self {
        LoopWeights {
            x,
            y,
            l,
            m,
            boundary: Boundary::Saturated,
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary<S>) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn factor(&self, f: LoopFactor) -> S {
        match f {
            LoopFactor::One => S::one(),
            LoopFactor::X => self.x.clone(),
            LoopFactor::Y => self.y.clone(),
        }
    }

    fn loops(&self, c: &LoopCounts) -> S {
        let mut w = S::one();
        for (base, k) in [(&self.x, c.x), (&self.y, c.y), (&self.l, c.l), (&self.m, c.m)] {
            for _ in 0..k {
                w = w.mul_ref(base);
            }
        }
        w
    }
}

impl LoopWeights<Poly> {
    /// All four fugacities symbolic, saturated coupling.
    pub fn symbolic() -> Self {
        LoopWeights::new(Poly::var(Var::X), Poly::var(Var::Y), Poly::var(Var::L), Poly::var(Var::M))
    }

    /// All four fugacities and `lambda` symbolic.
    pub fn symbolic_coupling() -> Self {
        LoopWeights::symbolic().with_boundary(Boundary::Coupling(Poly::var(Var::Lambda)))
    }
}

const NONE: usize = usize::MAX;

/// One factor `(identity ? 1 : 0) + weight * g` acting on basis indices.
#[derive(Debug, Clone)]
struct Factor<S> {
    identity: bool,
    target: Vec<usize>,
    weight: Vec<S>,
    out_dim: usize,
}

impl<S: Scalar> Factor<S> {
    fn apply(&self, v: &[S]) -> Vec<S> {
        let mut out = if self.identity { v.to_vec() } else { vec![S::zero(); self.out_dim] };
        for (j, c) in v.iter().enumerate() {
            let t = self.target[j];
            if t != NONE && !c.is_zero() {
                out[t].add_mul(&self.weight[j], c);
            }
        }
        out
    }

    fn apply_sparse(&self, v: &BTreeMap<usize, S>) -> BTreeMap<usize, S> {
        let mut out = if self.identity { v.clone() } else { BTreeMap::new() };
        for (&j, c) in v {
            let t = self.target[j];
            if t != NONE {
                out.entry(t).or_insert_with(S::zero).add_mul(&self.weight[j], c);
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }
}

/// Transfer-matrix block restricted to one sector.
///
/// The matrix is kept in factorized form; [`SectorBlock::matrix`] assembles
/// it densely. Intermediate products run on the general basis of the sector
/// (all blob patterns), the result is expressed on [`SectorBlock::basis`].
#[derive(Debug, Clone)]
pub struct SectorBlock<S> {
    pub n: usize,
    pub sector: SectorLabel,
    basis: Vec<LinkState>,
    work_dim: usize,
    embed: Vec<usize>,
    bulk: Vec<Factor<S>>,
    boundary: Factor<S>,
}

impl<S: Scalar> SectorBlock<S> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[LinkState] {
        &self.basis
    }

    /// `T v`, in-sector part.
    pub fn apply(&self, v: &[S]) -> Vec<S> {
        let mut w = vec![S::zero(); self.work_dim];
        for (k, &e) in self.embed.iter().enumerate() {
            w[e] = v[k].clone();
        }
        for f in &self.bulk {
            w = f.apply(&w);
        }
        self.boundary.apply(&w)
    }

    /// Column `j` of the block as a sparse map.
    pub fn column(&self, j: usize) -> BTreeMap<usize, S> {
        let mut w = BTreeMap::new();
        w.insert(self.embed[j], S::one());
        for f in &self.bulk {
            w = f.apply_sparse(&w);
        }
        self.boundary.apply_sparse(&w)
    }

    /// Dense matrix, `m[row][col]`, indexed in basis order.
    pub fn matrix(&self) -> Vec<Vec<S>> {
        let d = self.dim();
        let mut m = vec![vec![S::zero(); d]; d];
        for j in 0..d {
            for (i, c) in self.column(j) {
                m[i][j] = c;
            }
        }
        m
    }

    /// Line-oriented JSON record of the nonzero entries.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = (0..self.dim())
            .flat_map(|j| {
                self.column(j)
                    .into_iter()
                    .map(move |(i, c)| json!([i, j, c.render()]))
            })
            .collect::<Vec<_>>();
        let mut sorted = entries;
        sorted.sort_by_key(|e| (e[0].as_u64(), e[1].as_u64()));
        json!({
            "N": self.n,
            "sector": self.sector.to_string(),
            "ring": S::RING.to_string(),
            "entries": sorted,
        })
    }
}

/// Builds the block of `T` on one sector.
pub fn build_block<S: Scalar>(n: usize, sector: SectorLabel, weights: &LoopWeights<S>) -> Result<SectorBlock<S>> {
    let work = enumerate_basis(n, sector, BasisKind::General)?;
    let index: HashMap<&LinkState, usize> = work.iter().enumerate().map(|(k, s)| (s, k)).collect();
    let work_dim = work.len();

    let order = (1..n).step_by(2).chain((2..n).step_by(2));
    let mut bulk = Vec::new();
    for i in order {
        let mut target = Vec::with_capacity(work_dim);
        let mut weight = Vec::with_capacity(work_dim);
        for s in &work {
            let a = s.apply_e_unchecked(i);
            if a.sector_change {
                target.push(NONE);
                weight.push(S::zero());
            } else {
                target.push(index[&a.result_state]);
                weight.push(weights.factor(a.weight));
            }
        }
        bulk.push(Factor {
            identity: true,
            target,
            weight,
            out_dim: work_dim,
        });
    }

    let (basis, embed, boundary) = match &weights.boundary {
        Boundary::Saturated => {
            let basis = enumerate_basis(n, sector, BasisKind::Saturated)?;
            let bindex: HashMap<&LinkState, usize> = basis.iter().enumerate().map(|(k, s)| (s, k)).collect();
            let mut target = Vec::with_capacity(work_dim);
            for s in &work {
                let a = s.apply_b();
                target.push(if a.sector_change { NONE } else { bindex[&a.result_state] });
            }
            let embed = basis.iter().map(|s| index[s]).collect();
            let boundary = Factor {
                identity: false,
                weight: vec![S::one(); work_dim],
                target,
                out_dim: basis.len(),
            };
            (basis, embed, boundary)
        }
        Boundary::Coupling(lambda) => {
            let mut target = Vec::with_capacity(work_dim);
            for s in &work {
                let a = s.apply_b();
                target.push(if a.sector_change { NONE } else { index[&a.result_state] });
            }
            let boundary = Factor {
                identity: true,
                weight: vec![lambda.clone(); work_dim],
                target,
                out_dim: work_dim,
            };
            (work.clone(), (0..work_dim).collect(), boundary)
        }
    };
    Ok(SectorBlock {
        n,
        sector,
        basis,
        work_dim,
        embed,
        bulk,
        boundary,
    })
}

/// Matrix of a single generator on the general basis of a sector, with
/// out-of-sector images dropped. `None` selects `b`.
pub fn generator_matrix<S: Scalar>(
    n: usize,
    sector: SectorLabel,
    generator: Option<usize>,
    weights: &LoopWeights<S>,
) -> Result<Vec<Vec<S>>> {
    let work = enumerate_basis(n, sector, BasisKind::General)?;
    let index: HashMap<&LinkState, usize> = work.iter().enumerate().map(|(k, s)| (s, k)).collect();
    let d = work.len();
    let mut m = vec![vec![S::zero(); d]; d];
    for (j, s) in work.iter().enumerate() {
        let a = match generator {
            Some(i) => s.apply_e(i)?,
            None => s.apply_b(),
        };
        if !a.sector_change {
            m[index[&a.result_state]][j] = weights.factor(a.weight);
        }
    }
    Ok(m)
}

/// `H = (gamma / (pi sin gamma)) (-a b - sum e_i)` on the general basis of a
/// sector, `m[row][col]`.
pub fn build_hamiltonian(n: usize, sector: SectorLabel, a: f64, gamma: f64, weights: &LoopWeights<f64>) -> Result<Vec<Vec<f64>>> {
    if a <= 0.0 {
        return Err(Error::InvalidArgument("boundary coupling a must be positive".into()));
    }
    let pref = gamma / (std::f64::consts::PI * gamma.sin());
    let b = generator_matrix(n, sector, None, weights)?;
    let d = b.len();
    let mut h = vec![vec![0.0; d]; d];
    for (hr, br) in h.iter_mut().zip(&b) {
        for (hc, bc) in hr.iter_mut().zip(br) {
            *hc -= pref * a * bc;
        }
    }
    for i in 1..n {
        let e = generator_matrix(n, sector, Some(i), weights)?;
        for (hr, er) in h.iter_mut().zip(&e) {
            for (hc, ec) in hr.iter_mut().zip(er) {
                *hc -= pref * ec;
            }
        }
    }
    Ok(h)
}

/// Numbers of loops of each type in a closed configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LoopCounts {
    pub x: u32,
    pub y: u32,
    pub l: u32,
    pub m: u32,
}

/// Top reduced state together with the bottom connectivity left behind by
/// annihilated string pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FullState {
    top: LinkState,
    bottom: Vec<u8>,
    bottom_blobs: u64,
}

impl FullState {
    /// All strings on top, identity bottom.
    pub fn initial(n: usize) -> Self {
        FullState {
            top: LinkState::all_strings(n),
            bottom: vec![STRING; n],
            bottom_blobs: 0,
        }
    }

    pub fn top(&self) -> &LinkState {
        &self.top
    }

    pub fn bottom(&self) -> &[u8] {
        &self.bottom
    }

    pub fn n_points(&self) -> usize {
        self.bottom.len()
    }

    pub fn apply_e(&self, i: usize) -> Result<(FullState, LoopFactor)> {
        if i == 0 || i >= self.n_points() {
            return Err(Error::GeneratorIndex {
                index: i,
                points: self.n_points(),
            });
        }
        Ok(self.apply_e_unchecked(i))
    }

    fn apply_e_unchecked(&self, i: usize) -> (FullState, LoopFactor) {
        let a = i - 1;
        let act = self.top.apply_e_unchecked(i);
        let mut bottom = self.bottom.clone();
        let mut bottom_blobs = self.bottom_blobs;
        if self.top.is_string(a) && self.top.is_string(i) {
            let k = self.top.strings().position(|p| p == a).expect("string rank");
            let mut through = self.bottom.iter().enumerate().filter(|(_, &p)| p == STRING).map(|(q, _)| q);
            let u = through.nth(k).expect("bottom string");
            let v = through.next().expect("bottom string");
            bottom[u] = v as u8;
            bottom[v] = u as u8;
            if k == 0 && self.top.is_blobbed_at(a) {
                bottom_blobs |= (1 << u) | (1 << v);
            }
        }
        (
            FullState {
                top: act.result_state,
                bottom,
                bottom_blobs,
            },
            act.weight,
        )
    }

    pub fn apply_b(&self) -> FullState {
        FullState {
            top: self.top.apply_b().result_state,
            bottom: self.bottom.clone(),
            bottom_blobs: self.bottom_blobs,
        }
    }

    /// Glues top and bottom rows and classifies the resulting loops.
    pub fn closure(&self) -> LoopCounts {
        let n = self.n_points();
        let top_strings: Vec<usize> = self.top.strings().collect();
        let bottom_strings: Vec<usize> = (0..n).filter(|&q| self.bottom[q] == STRING).collect();
        let mut rank_top = vec![usize::MAX; n];
        for (k, &p) in top_strings.iter().enumerate() {
            rank_top[p] = k;
        }
        let mut rank_bottom = vec![usize::MAX; n];
        for (k, &q) in bottom_strings.iter().enumerate() {
            rank_bottom[q] = k;
        }
        let partner = self.top.partner();
        let mut seen_top = vec![false; n];
        let mut counts = LoopCounts::default();
        for start in 0..n {
            if seen_top[start] {
                continue;
            }
            let mut cur = start;
            let mut via_top = true;
            let mut winding: i64 = 0;
            let mut blob = false;
            loop {
                if via_top {
                    seen_top[cur] = true;
                    blob |= self.top.is_blobbed_at(cur);
                    let p = partner[cur];
                    if p == STRING {
                        cur = bottom_strings[rank_top[cur]];
                        winding += 1;
                    } else {
                        cur = p as usize;
                        seen_top[cur] = true;
                        via_top = false;
                    }
                } else {
                    blob |= self.bottom_blobs >> cur & 1 == 1;
                    let p = self.bottom[cur];
                    if p == STRING {
                        cur = top_strings[rank_bottom[cur]];
                        seen_top[cur] = true;
                        winding -= 1;
                    } else {
                        cur = p as usize;
                        via_top = true;
                    }
                }
                if via_top && cur == start {
                    break;
                }
            }
            match (winding != 0, blob) {
                (false, false) => counts.x += 1,
                (false, true) => counts.y += 1,
                (true, false) => counts.l += 1,
                (true, true) => counts.m += 1,
            }
        }
        counts
    }
}

/// All-strings state; with saturated coupling the blob is applied once, which
/// leaves `Z` unchanged since `b` is idempotent and the time direction is
/// periodic.
fn initial_state<S>(n: usize, boundary: &Boundary<S>) -> FullState {
    match boundary {
        Boundary::Saturated => FullState::initial(n).apply_b(),
        Boundary::Coupling(_) => FullState::initial(n),
    }
}

/// Applies one time step of `T` to a linear combination of full states.
pub fn step_full<S: Scalar>(v: &BTreeMap<FullState, S>, weights: &LoopWeights<S>) -> BTreeMap<FullState, S> {
    let n = match v.keys().next() {
        Some(s) => s.n_points(),
        None => return BTreeMap::new(),
    };
    let mut cur = v.clone();
    for i in (1..n).step_by(2).chain((2..n).step_by(2)) {
        let mut next = cur.clone();
        for (s, c) in &cur {
            let (t, f) = s.apply_e_unchecked(i);
            let w = weights.factor(f);
            next.entry(t).or_insert_with(S::zero).add_mul(&w, c);
        }
        next.retain(|_, c| !c.is_zero());
        cur = next;
    }
    let mut next = match weights.boundary {
        Boundary::Saturated => BTreeMap::new(),
        Boundary::Coupling(_) => cur.clone(),
    };
    let lambda = match &weights.boundary {
        Boundary::Saturated => S::one(),
        Boundary::Coupling(l) => l.clone(),
    };
    for (s, c) in &cur {
        next.entry(s.apply_b()).or_insert_with(S::zero).add_mul(&lambda, c);
    }
    next.retain(|_, c| !c.is_zero());
    next
}

/// State vector after `m` time steps from the all-strings state.
pub fn evolve<S: Scalar>(n: usize, m: usize, weights: &LoopWeights<S>) -> BTreeMap<FullState, S> {
    let mut v = BTreeMap::new();
    v.insert(initial_state(n, &weights.boundary), S::one());
    for _ in 0..m {
        v = step_full(&v, weights);
    }
    v
}

/// Annulus partition function: closure functional applied to `T^M` acting on
/// the all-strings state.
pub fn partition_function_direct<S: Scalar>(n: usize, m: usize, weights: &LoopWeights<S>) -> Result<S> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("need N >= 1 and M >= 1".into()));
    }
    let v = evolve(n, m, weights);
    let mut z = S::zero();
    for (s, c) in &v {
        z.add_mul(&weights.loops(&s.closure()), c);
    }
    Ok(z)
}

/// `Z` split by winding content: `plain[j]` multiplies `l^{2j}`,
/// `starred[j]` multiplies `l^{2j-1} m` (odd `N`: `l^{2j+1}` and `l^{2j} m`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WindingSplit {
    pub plain: BTreeMap<usize, Poly>,
    pub starred: BTreeMap<usize, Poly>,
}

impl WindingSplit {
    /// Reassembles the polynomial.
    pub fn total(&self, odd: bool) -> Poly {
        let l = Poly::var(Var::L);
        let m = Poly::var(Var::M);
        let mut z = Poly::zero();
        for (&j, p) in &self.plain {
            let e = if odd { 2 * j as u32 + 1 } else { 2 * j as u32 };
            z.add_ref(&p.mul_ref(&l.pow(e)));
        }
        for (&j, p) in &self.starred {
            let e = if odd { 2 * j as u32 } else { 2 * j as u32 - 1 };
            z.add_ref(&p.mul_ref(&l.pow(e)).mul_ref(&m));
        }
        z
    }
}

/// Splits a polynomial partition function by its `(l, m)` monomials.
pub fn partition_by_winding(z: &Poly, n: usize) -> Result<WindingSplit> {
    let odd = n % 2 == 1;
    let mut out = WindingSplit::default();
    for ((dl, dm), p) in z.split_lm() {
        let bad = || Error::UnexpectedMonomial(format!("l^{dl}*m^{dm}"));
        match dm {
            0 => {
                if (dl % 2 == 1) != odd {
                    return Err(bad());
                }
                out.plain.insert((dl / 2) as usize, p);
            }
            1 => {
                if (dl % 2 == 0) != odd {
                    return Err(bad());
                }
                let j = if odd { dl / 2 } else { (dl + 1) / 2 };
                out.starred.insert(j as usize, p);
            }
            _ => return Err(bad()),
        }
    }
    Ok(out)
}

/// Full states reachable from the all-strings state after at least one step.
pub fn reachable_full_states(n: usize, boundary_saturated: bool) -> Vec<FullState> {
    let mut seen: std::collections::BTreeSet<FullState> = std::collections::BTreeSet::new();
    let mut frontier = vec![if boundary_saturated {
        FullState::initial(n).apply_b()
    } else {
        FullState::initial(n)
    }];
    while let Some(s) = frontier.pop() {
        let mut layer = vec![s];
        for i in (1..n).step_by(2).chain((2..n).step_by(2)) {
            let mut next = Vec::new();
            for t in &layer {
                next.push(t.clone());
                next.push(t.apply_e_unchecked(i).0);
            }
            layer = next;
        }
        for t in layer {
            let mut outs = vec![t.apply_b()];
            if !boundary_saturated {
                outs.push(t);
            }
            for o in outs {
                if seen.insert(o.clone()) {
                    frontier.push(o);
                }
            }
        }
    }
    seen.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rat;
    use num_traits::One;
    use num_rational::BigRational;

    fn sym() -> LoopWeights<Poly> {
        LoopWeights::symbolic()
    }

    fn p(s: &str) -> Poly {
        s.parse().unwrap()
    }

    #[test]
    fn n2_blocks() {
        let w = sym();
        let b0 = build_block(2, SectorLabel::unblobbed(0), &w).unwrap();
        assert_eq!(b0.matrix(), vec![vec![p("1: 1, y^1: 1")]]);
        let b2 = build_block(2, SectorLabel::blobbed(2), &w).unwrap();
        assert_eq!(b2.matrix(), vec![vec![Poly::one()]]);
    }

    #[test]
    fn n2_partition_functions() {
        let w = sym();
        assert_eq!(partition_function_direct(2, 1, &w).unwrap(), p("y^1: 1, l^1*m^1: 1"));
        assert_eq!(
            partition_function_direct(2, 2, &w).unwrap(),
            p("y^1: 2, y^2: 1, l^1*m^1: 1")
        );
    }

    #[test]
    fn n4_single_step_has_all_winding_term() {
        let z = partition_function_direct(4, 1, &sym()).unwrap();
        let split = partition_by_winding(&z, 4).unwrap();
        assert_eq!(split.starred[&2], Poly::one());
        assert_eq!(split.total(false), z);
    }

    #[test]
    fn full_state_count_n4() {
        assert_eq!(reachable_full_states(4, true).len(), 20);
    }

    #[test]
    fn apply_matches_dense_matrix() {
        let w: LoopWeights<BigRational> = LoopWeights::new(rat(3, 2), rat(2, 3), rat(5, 4), rat(1, 7));
        let b = build_block(6, SectorLabel::blobbed(2), &w).unwrap();
        let m = b.matrix();
        let v: Vec<BigRational> = (0..b.dim()).map(|k| rat(k as i64 + 1, 3)).collect();
        let direct = b.apply(&v);
        for (i, row) in m.iter().enumerate() {
            let s = row.iter().zip(&v).fold(rat(0, 1), |acc, (a, c)| acc + a * c);
            assert_eq!(s, direct[i]);
        }
    }

    #[test]
    fn json_export_lists_entries() {
        let b = build_block(2, SectorLabel::unblobbed(0), &sym()).unwrap();
        let j = b.to_json();
        assert_eq!(j["N"], 2);
        assert_eq!(j["sector"], "T0");
        assert_eq!(j["ring"], "poly");
        assert_eq!(j["entries"][0][2], "1: 1, y^1: 1");
    }

    #[test]
    fn winding_split_rejects_double_boundary_loops() {
        assert!(partition_by_winding(&p("m^2: 1"), 2).is_err());
    }
}
