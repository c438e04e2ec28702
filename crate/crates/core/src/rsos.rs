//! A_p RSOS transfer matrices with fixed boundary columns, and their
//! correspondence with blocks of the boundary loop model.
//!
//! Heights `l_1..l_{N+1}` take values in `1..=p` with neighbours differing
//! by one. The two left heights are frozen to `(b, c)` and the right one to
//! `a`. The generator `e_i` acts on `l_{i+1}`; `e_1` keeps `l_2 = c` and so
//! reduces to the diagonal boundary weight `S_c / S_b` when `l_3 = b`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::amplitudes::{characters, closed_form_amplitudes, WindingParams};
use crate::cft::kac::y_of_r;
use crate::error::{Error, Result};
use crate::linkstate::SectorLabel;
use crate::matrix::{self, Dense};
use crate::spectrum::{dense_eigenvalues, LevelSet};
use crate::transfer::{build_block, LoopWeights};

/// Boundary data of one RSOS sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RsosSector {
    pub d: usize,
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl RsosSector {
    /// Sector `(d, a)` on `n` points; `(b, c)` is fixed by the parity of
    /// `d - a` relative to `n`, since `c` and `a` are `n - 1` steps apart.
    pub fn new(n: usize, p: usize, d: usize, a: usize) -> Result<Self> {
        if p < 2 || d == 0 || d >= p || a == 0 || a > p || n < 2 {
            return Err(Error::InvalidArgument(format!(
                "sector (d={d}, a={a}) is not admissible for N={n}, p={p}"
            )));
        }
        let (b, c) = if same_parity(d, a, n) { (d, d + 1) } else { (d + 1, d) };
        Ok(RsosSector { d, a, b, c })
    }
}

fn same_parity(d: usize, a: usize, n: usize) -> bool {
    (d as i64 - a as i64 - n as i64).rem_euclid(2) == 0
}

/// Every admissible `(d, a)` for width `n`.
pub fn all_sectors(n: usize, p: usize) -> Vec<RsosSector> {
    let mut out = Vec::new();
    for d in 1..p {
        for a in 1..=p {
            if let Ok(s) = RsosSector::new(n, p, d, a) {
                out.push(s);
            }
        }
    }
    out
}

/// Height sequence `l_1..l_{N+1}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HeightState {
    pub heights: Vec<usize>,
}

/// All height configurations of a sector, in lexicographic order. A
/// parity-impossible sector gives an empty list.
pub fn enumerate_heights(n: usize, p: usize, sector: &RsosSector) -> Vec<HeightState> {
    fn walk(cur: &mut Vec<usize>, n: usize, p: usize, a: usize, out: &mut Vec<HeightState>) {
        let pos = cur.len();
        let last = cur[pos - 1];
        if pos == n + 1 {
            if last == a {
                out.push(HeightState { heights: cur.clone() });
            }
            return;
        }
        let remaining = n + 1 - pos;
        for next in [last.wrapping_sub(1), last + 1] {
            if next >= 1 && next <= p && next.abs_diff(a) <= remaining - 1 {
                cur.push(next);
                walk(cur, n, p, a, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![sector.b, sector.c];
    walk(&mut cur, n, p, sector.a, &mut out);
    out
}

/// `[l]_q` at `q = e^{i pi/(p+1)}`, the Perron-Frobenius weights of A_p.
pub fn perron_frobenius(p: usize, l: usize) -> f64 {
    let g = PI / (p + 1) as f64;
    (l as f64 * g).sin() / g.sin()
}

/// Walk count from `c` to `a` in `n - 1` steps on the A_p path graph, by
/// powers of the adjacency matrix.
pub fn walk_count(n: usize, p: usize, sector: &RsosSector) -> u64 {
    let mut v = vec![0u64; p + 2];
    v[sector.c] = 1;
    for _ in 0..n - 1 {
        let mut w = vec![0u64; p + 2];
        for h in 1..=p {
            w[h] = v[h - 1] + v[h + 1];
        }
        w[0] = 0;
        w[p + 1] = 0;
        v = w;
    }
    v[sector.a]
}

/// Dense action of `e_i` (acting on `l_{i+1}`) on a sector basis; with
/// `frozen` the new height must equal the old one.
fn generator(p: usize, basis: &[HeightState], index: &HashMap<&HeightState, usize>, i: usize, frozen: bool) -> Dense<f64> {
    let d = basis.len();
    let mut m = vec![vec![0.0; d]; d];
    for (col, s) in basis.iter().enumerate() {
        let h = &s.heights;
        let (lo, mid, hi) = (h[i - 1], h[i], h[i + 1]);
        if lo != hi {
            continue;
        }
        for new in [lo.wrapping_sub(1), lo + 1] {
            if new < 1 || new > p || (frozen && new != mid) {
                continue;
            }
            let mut t = h.clone();
            t[i] = new;
            let row = index[&HeightState { heights: t }];
            m[row][col] += (perron_frobenius(p, mid) * perron_frobenius(p, new)).sqrt() / perron_frobenius(p, lo);
        }
    }
    m
}

/// `T = prod_{even i}(1 + e_i) prod_{odd i}(1 + e_i)`, the odd row acting
/// first.
pub fn build_rsos_transfer(n: usize, p: usize, sector: &RsosSector) -> Result<Dense<f64>> {
    let basis = enumerate_heights(n, p, sector);
    if basis.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "sector (d={}, a={}) is empty for N={n}, p={p}",
            sector.d, sector.a
        )));
    }
    let index: HashMap<&HeightState, usize> = basis.iter().enumerate().map(|(k, s)| (s, k)).collect();
    let d = basis.len();
    let one = matrix::identity::<f64>(d);
    let mut t = one.clone();
    let row = |parity: usize, t: &mut Dense<f64>| {
        for i in (1..n).filter(|i| i % 2 == parity) {
            let f = matrix::add(&one, &generator(p, &basis, &index, i, i == 1));
            *t = matrix::mul(&f, t);
        }
    };
    row(1, &mut t);
    row(0, &mut t);
    Ok(t)
}

/// Loop block assigned to an RSOS sector, with boundary label `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LoopBlock {
    pub sector: SectorLabel,
    pub r: usize,
}

impl std::fmt::Display for LoopBlock {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}(r={})", self.sector, self.r)
    }
}

/// The four-case rule assigning `(L, r, blobbed)` to `(d, a)`.
pub fn correspondence(d: usize, a: usize, n: usize, p: usize) -> Result<LoopBlock> {
    RsosSector::new(n, p, d, a)?;
    let diff = d as i64 - a as i64;
    let (strings, r, blobbed) = if same_parity(d, a, n) {
        (diff.unsigned_abs() as usize, d, diff <= 0)
    } else {
        ((diff + 1).unsigned_abs() as usize, p - d, diff >= -1)
    };
    if strings > n {
        return Err(Error::InvalidSector { points: n, strings });
    }
    Ok(LoopBlock {
        sector: SectorLabel::new(strings, blobbed),
        r,
    })
}

/// Full level set of a loop block at `y = y(r)`.
pub fn loop_block_levels(n: usize, p: usize, block: LoopBlock) -> Result<LevelSet> {
    let x = 2.0 * (PI / (p + 1) as f64).cos();
    let w = LoopWeights::new(x, y_of_r(p as f64, block.r as f64), 0.0, 0.0);
    let b = build_block(n, block.sector, &w)?;
    Ok(LevelSet::from_eigenvalues(n, &dense_eigenvalues(&b.matrix())?))
}

/// Level set of one RSOS sector.
pub fn rsos_levels(n: usize, p: usize, sector: &RsosSector) -> Result<LevelSet> {
    let t = build_rsos_transfer(n, p, sector)?;
    Ok(LevelSet::from_eigenvalues(n, &dense_eigenvalues(&t)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorInclusion {
    pub sector: RsosSector,
    pub block: LoopBlock,
    pub levels: LevelSet,
    pub orphans: Vec<f64>,
    pub dominant_rsos: f64,
    pub dominant_loop: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RsosReport {
    pub n: usize,
    pub p: usize,
    pub sectors: Vec<SectorInclusion>,
    /// Level sets of every loop block at the `r` values that occur.
    #[serde(skip)]
    pub blocks: BTreeMap<LoopBlock, LevelSet>,
    pub ok: bool,
}

/// Checks that every RSOS level lies in its assigned loop block and that
/// the two dominant levels agree.
pub fn verify_rsos_inclusion(n: usize, p: usize, tol: f64) -> Result<RsosReport> {
    let sectors: Vec<RsosSector> = all_sectors(n, p)
        .into_iter()
        .filter(|s| !enumerate_heights(n, p, s).is_empty())
        .collect();
    let rs: BTreeSet<usize> = sectors
        .iter()
        .map(|s| correspondence(s.d, s.a, n, p).map(|b| b.r))
        .collect::<Result<_>>()?;
    let labels: Vec<LoopBlock> = rs
        .iter()
        .flat_map(|&r| SectorLabel::all(n).into_iter().map(move |sector| LoopBlock { sector, r }))
        .collect();
    let blocks: BTreeMap<LoopBlock, LevelSet> = labels
        .par_iter()
        .map(|&b| Ok((b, loop_block_levels(n, p, b)?)))
        .collect::<Result<_>>()?;
    let checks: Vec<SectorInclusion> = sectors
        .par_iter()
        .map(|s| {
            let block = correspondence(s.d, s.a, n, p)?;
            let levels = rsos_levels(n, p, s)?;
            let target = &blocks[&block];
            let orphans = levels.orphans_in(target, tol);
            let dominant_rsos = levels.lowest().unwrap_or(f64::NAN);
            let dominant_loop = target.lowest().unwrap_or(f64::NAN);
            let ok = orphans.is_empty() && (dominant_rsos - dominant_loop).abs() <= tol;
            Ok(SectorInclusion {
                sector: *s,
                block,
                levels,
                orphans,
                dominant_rsos,
                dominant_loop,
                ok,
            })
        })
        .collect::<Result<_>>()?;
    let ok = checks.iter().all(|c| c.ok);
    Ok(RsosReport {
        n,
        p,
        sectors: checks,
        blocks,
        ok,
    })
}

/// One printed row: an RSOS level and its multiplicity in every loop block
/// sharing the sector's boundary label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRow {
    pub f: f64,
    pub d: usize,
    pub a: usize,
    pub multiplicities: BTreeMap<LoopBlock, usize>,
}

/// Whether `(d, a)` is the smaller member of its pair under the Kac-table
/// symmetry `(d, a) -> (p - d, p + 1 - a)`.
pub fn is_representative(p: usize, d: usize, a: usize) -> bool {
    (d, a) <= (p - d, p + 1 - a)
}

impl RsosReport {
    /// Rows sorted by level, each RSOS eigenvalue once; with `reduced` only
    /// one sector of each symmetric pair is listed.
    pub fn level_rows(&self, tol: f64, reduced: bool) -> Vec<LevelRow> {
        let mut rows = Vec::new();
        for s in &self.sectors {
            if reduced && !is_representative(self.p, s.sector.d, s.sector.a) {
                continue;
            }
            for l in &s.levels.levels {
                let multiplicities: BTreeMap<LoopBlock, usize> = self
                    .blocks
                    .iter()
                    .filter(|(b, _)| b.r == s.block.r)
                    .map(|(b, set)| (*b, set.multiplicity_of(l.f, tol)))
                    .filter(|&(_, m)| m > 0)
                    .collect();
                for _ in 0..l.multiplicity {
                    rows.push(LevelRow {
                        f: l.f,
                        d: s.sector.d,
                        a: s.sector.a,
                        multiplicities: multiplicities.clone(),
                    });
                }
            }
        }
        rows.sort_by(|x, y| x.f.total_cmp(&y.f).then((x.d, x.a).cmp(&(y.d, y.a))));
        rows
    }

    /// Loop blocks with a nonzero entry, blobbed first, then by `L` and `r`.
    pub fn columns(rows: &[LevelRow]) -> Vec<LoopBlock> {
        let set: BTreeSet<LoopBlock> = rows.iter().flat_map(|r| r.multiplicities.keys().copied()).collect();
        let mut cols: Vec<LoopBlock> = set.into_iter().collect();
        cols.sort_by_key(|b| (!b.sector.blobbed, b.sector.n_strings, b.r));
        cols
    }

    /// Plain-text table: level to 12 digits, sector, block multiplicities.
    pub fn render_table(&self, tol: f64, reduced: bool) -> String {
        let rows = self.level_rows(tol, reduced);
        let cols = Self::columns(&rows);
        let mut out = String::new();
        let _ = write!(out, "{:>16} {:>7}", "f", "(d,a)");
        for c in &cols {
            let _ = write!(out, " {:>9}", c.to_string());
        }
        out.push('\n');
        for r in &rows {
            let _ = write!(out, "{:>16.12} {:>7}", r.f, format!("({},{})", r.d, r.a));
            for c in &cols {
                match r.multiplicities.get(c) {
                    Some(m) => {
                        let _ = write!(out, " {m:>9}");
                    }
                    None => out.push_str(&" ".repeat(10)),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Outcome of the sector-sum identity at one `(N, M, p, d, a)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorSumReport {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub d: usize,
    pub a: usize,
    pub loop_side: Complex64,
    pub rsos_side: f64,
    /// Terms dropped because `sin(pi p' d / H)` vanishes.
    pub skipped: Vec<usize>,
    pub deviation: f64,
    pub agrees: bool,
}

/// Compares `(2/H) sum_{p'} sin(pi p' d/H) sin(pi p' a/H) Z(alpha = i pi p'/H,
/// beta = d alpha)` with `Tr T_RSOS^M` for sector `(d, a)`.
pub fn sector_sum_check(n: usize, m: usize, p: usize, d: usize, a: usize, tol: f64) -> Result<SectorSumReport> {
    if n % 2 != 0 {
        return Err(Error::InvalidArgument("the sector sum is defined for even N".into()));
    }
    let sector = RsosSector::new(n, p, d, a)?;
    let h = (p + 1) as f64;
    let x = 2.0 * (PI / h).cos();
    let w = LoopWeights::new(x, y_of_r(p as f64, d as f64), 0.0, 0.0);
    let chars = characters(n, m, &w)?;
    let mut total = Complex64::new(0.0, 0.0);
    let mut skipped = Vec::new();
    for pp in 1..=p {
        let sd = (PI * (pp * d) as f64 / h).sin();
        if sd.abs() < 1e-12 {
            skipped.push(pp);
            continue;
        }
        let sa = (PI * (pp * a) as f64 / h).sin();
        let alpha = Complex64::new(0.0, PI * pp as f64 / h);
        let params = WindingParams::new(alpha, alpha * d as f64)?;
        let mut z = Complex64::new(0.0, 0.0);
        for (label, k) in &chars {
            let (starred, plain) = closed_form_amplitudes(label.n_strings, &params)?;
            let amp = if label.blobbed { starred } else { plain };
            z += amp * k;
        }
        total += z * (2.0 / h * sd * sa);
    }
    let rsos_side = match build_rsos_transfer(n, p, &sector) {
        Ok(t) => {
            let mut pow = matrix::identity::<f64>(t.len());
            for _ in 0..m {
                pow = matrix::mul(&pow, &t);
            }
            matrix::trace(&pow)
        }
        Err(_) => 0.0,
    };
    let deviation = (total - rsos_side).norm();
    Ok(SectorSumReport {
        n,
        m,
        p,
        d,
        a,
        loop_side: total,
        rsos_side,
        skipped,
        deviation,
        agrees: deviation <= tol * rsos_side.abs().max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn height_counts() {
        let s = RsosSector::new(6, 6, 1, 1).unwrap();
        assert_eq!((s.b, s.c), (1, 2));
        assert_eq!(enumerate_heights(6, 6, &s).len(), 5);
        let s = RsosSector::new(2, 3, 1, 1).unwrap();
        let h = enumerate_heights(2, 3, &s);
        assert_eq!(h, vec![HeightState { heights: vec![1, 2, 1] }]);
        for n in 2..=8 {
            for p in 3..=6 {
                for s in all_sectors(n, p) {
                    assert_eq!(enumerate_heights(n, p, &s).len() as u64, walk_count(n, p, &s));
                }
            }
        }
    }

    #[test]
    fn perron_frobenius_weights() {
        assert!((perron_frobenius(6, 1) - 1.0).abs() < 1e-15);
        assert!((perron_frobenius(6, 2) - 2.0 * (PI / 7.0).cos()).abs() < 1e-14);
    }

    #[test]
    fn rules() {
        let b = correspondence(3, 1, 6, 6).unwrap();
        assert_eq!((b.sector, b.r), (SectorLabel::unblobbed(2), 3));
        let b = correspondence(1, 1, 6, 6).unwrap();
        assert_eq!((b.sector, b.r), (SectorLabel::unblobbed(0), 1));
        let b = correspondence(1, 4, 6, 6).unwrap();
        assert_eq!((b.sector, b.r), (SectorLabel::unblobbed(2), 5));
        let b = correspondence(2, 6, 6, 6).unwrap();
        assert_eq!((b.sector, b.r), (SectorLabel::blobbed(4), 2));
    }

    #[test]
    fn leading_levels_of_two_sectors() {
        let f = |d, a| rsos_levels(6, 6, &RsosSector::new(6, 6, d, a).unwrap()).unwrap().lowest().unwrap();
        assert!((f(1, 1) + 0.338946565198).abs() < 1e-9);
        assert!((f(3, 1) + 0.220405235066).abs() < 1e-9);
    }

    #[test]
    fn symmetric_sectors_share_levels() {
        for (d, a) in [(1, 1), (2, 3), (1, 4), (3, 1)] {
            let x = rsos_levels(6, 6, &RsosSector::new(6, 6, d, a).unwrap()).unwrap();
            let y = rsos_levels(6, 6, &RsosSector::new(6, 6, 6 - d, 7 - a).unwrap()).unwrap();
            assert!(x.is_subset_of(&y, 1e-10) && y.is_subset_of(&x, 1e-10));
            let (bx, by) = (correspondence(d, a, 6, 6).unwrap(), correspondence(6 - d, 7 - a, 6, 6).unwrap());
            assert_eq!(bx.sector, by.sector);
            assert_eq!(bx.r, by.r);
        }
    }

    #[test]
    fn small_inclusion() {
        let rep = verify_rsos_inclusion(4, 4, 1e-8).unwrap();
        assert!(rep.ok, "{:?}", rep.sectors.iter().filter(|s| !s.ok).collect::<Vec<_>>());
    }
}
