//! Reduced link states of the blob algebra and the diagrammatic action of the
//! generators `e_i` and `b` on them.
//!
//! Points are numbered `0..n` internally; generator indices are 1-based, so
//! `e_i` acts on points `i - 1` and `i`. A state is a non-crossing partial
//! matching with no string nested under an arc. Only links up to and including
//! the leftmost string may carry a blob, and among arcs only exterior ones.
//!
//! Text form: `(` `)` unblobbed arc, `[` `]` blobbed arc, `|` string, `!`
//! blobbed string. For example `[]()!|` has a blobbed arc on points 1-2, an
//! unblobbed arc on 3-4 and two strings of which the leftmost is blobbed.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::binomial;

/// Partner marker for a string.
pub const STRING: u8 = u8::MAX;

/// Largest supported number of points (blobs are kept in a `u64` mask).
pub const MAX_POINTS: usize = 63;

/// Transfer-matrix sector: number of strings and blob status of the leftmost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SectorLabel {
    pub n_strings: usize,
    pub blobbed: bool,
}

impl SectorLabel {
    /// The `L = 0` sector is unique; its blob flag is normalized to `false`.
    pub fn new(n_strings: usize, blobbed: bool) -> Self {
        SectorLabel {
            n_strings,
            blobbed: blobbed && n_strings > 0,
        }
    }

    pub fn blobbed(n_strings: usize) -> Self {
        SectorLabel::new(n_strings, true)
    }

    pub fn unblobbed(n_strings: usize) -> Self {
        SectorLabel::new(n_strings, false)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 || n > MAX_POINTS || self.n_strings > n || (n - self.n_strings) % 2 != 0 {
            return Err(Error::InvalidSector {
                points: n,
                strings: self.n_strings,
            });
        }
        Ok(())
    }

    /// All sectors for `n` points in canonical order: decreasing `L`,
    /// unblobbed before blobbed. Empty sectors are skipped.
    pub fn all(n: usize) -> Vec<SectorLabel> {
        let mut out = Vec::new();
        let mut l = n as i64;
        while l >= 0 {
            let lu = l as usize;
            if lu == 0 {
                out.push(SectorLabel::new(0, false));
            } else {
                for blobbed in [false, true] {
                    let s = SectorLabel::new(lu, blobbed);
                    if sector_dimension(n, s).unwrap_or(0) > 0 {
                        out.push(s);
                    }
                }
            }
            l -= 2;
        }
        out
    }
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.n_strings)?;
        if self.blobbed {
            f.write_str("*")?;
        }
        Ok(())
    }
}

impl FromStr for SectorLabel {
    type Err = Error;

    /// Accepts `T2`, `T2*`, `2`, `2*`; `T0*` is read as `T0`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches(['T', 't']);
        let (num, blobbed) = match t.strip_suffix('*') {
            Some(rest) => (rest, true),
            None => (t, false),
        };
        let l: usize = num
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad sector label `{s}`")))?;
        Ok(SectorLabel::new(l, blobbed))
    }
}

/// Which blob patterns a basis admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisKind {
    /// Image of `b`: the link at the first point is always blobbed.
    Saturated,
    /// Every admissible link may or may not carry a blob.
    General,
}

/// Weight picked up when a generator closes a loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LoopFactor {
    One,
    X,
    Y,
}

/// Result of applying one generator to a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorAction {
    pub result_state: LinkState,
    pub weight: LoopFactor,
    /// `L` dropped by two, or the leftmost string acquired a blob.
    pub sector_change: bool,
}

/// A reduced state.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkState {
    partner: Vec<u8>,
    blobs: u64,
}

impl LinkState {
    /// Builds a state from a partner array (`STRING` for strings) and a blob
    /// mask over points (both ends of a blobbed arc must be set).
    pub fn new(partner: Vec<u8>, blobs: u64) -> Result<Self> {
        let s = LinkState { partner, blobs };
        s.validate()?;
        Ok(s)
    }

    pub fn all_strings(n: usize) -> Self {
        LinkState {
            partner: vec![STRING; n],
            blobs: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.partner.len();
        if n == 0 || n > MAX_POINTS {
            return Err(Error::InvalidState(format!("unsupported size {n}")));
        }
        if self.blobs >> n != 0 {
            return Err(Error::InvalidState("blob mask exceeds point count".into()));
        }
        let mut stack: Vec<usize> = Vec::new();
        for i in 0..n {
            let p = self.partner[i];
            if p == STRING {
                if !stack.is_empty() {
                    return Err(Error::InvalidState(format!("string at {} lies under an arc", i + 1)));
                }
                continue;
            }
            let p = p as usize;
            if p >= n || p == i || self.partner[p] as usize != i {
                return Err(Error::InvalidState(format!("inconsistent partner at {}", i + 1)));
            }
            if p > i {
                stack.push(i);
            } else if stack.pop() != Some(p) {
                return Err(Error::InvalidState(format!("crossing arcs at {}", i + 1)));
            }
            if self.blob_bit(i) != self.blob_bit(p) {
                return Err(Error::InvalidState(format!("half-blobbed arc at {}", i + 1)));
            }
        }
        let admissible = self.admissible_mask();
        if self.blobs & !admissible != 0 {
            return Err(Error::InvalidState(
                "blob on a link right of the leftmost string or on a nested arc".into(),
            ));
        }
        Ok(())
    }

    /// Mask of points whose link may carry a blob.
    fn admissible_mask(&self) -> u64 {
        let n = self.partner.len();
        let mut mask = 0u64;
        let mut i = 0;
        while i < n {
            let p = self.partner[i];
            if p == STRING {
                mask |= 1 << i;
                break;
            }
            let p = p as usize;
            mask |= (1 << i) | (1 << p);
            i = p + 1;
        }
        mask
    }

    fn blob_bit(&self, i: usize) -> bool {
        self.blobs >> i & 1 == 1
    }

    pub fn n_points(&self) -> usize {
        self.partner.len()
    }

    pub fn partner(&self) -> &[u8] {
        &self.partner
    }

    pub fn blob_mask(&self) -> u64 {
        self.blobs
    }

    /// Point `i` (0-based) is on a blobbed link.
    pub fn is_blobbed_at(&self, i: usize) -> bool {
        self.blob_bit(i)
    }

    pub fn is_string(&self, i: usize) -> bool {
        self.partner[i] == STRING
    }

    pub fn n_strings(&self) -> usize {
        self.partner.iter().filter(|&&p| p == STRING).count()
    }

    pub fn leftmost_string(&self) -> Option<usize> {
        self.partner.iter().position(|&p| p == STRING)
    }

    pub fn sector(&self) -> SectorLabel {
        let blobbed = self.leftmost_string().is_some_and(|i| self.blob_bit(i));
        SectorLabel::new(self.n_strings(), blobbed)
    }

    /// Strings in left-to-right order.
    pub fn strings(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.partner.len()).filter(|&i| self.partner[i] == STRING)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i >= self.partner.len() {
            return Err(Error::GeneratorIndex {
                index: i,
                points: self.partner.len(),
            });
        }
        Ok(())
    }

    /// Action of `e_i`, 1-based.
    pub fn apply_e(&self, i: usize) -> Result<GeneratorAction> {
        self.check_index(i)?;
        Ok(self.apply_e_unchecked(i))
    }

    pub(crate) fn apply_e_unchecked(&self, i: usize) -> GeneratorAction {
        let a = i - 1;
        let c = i;
        let pa = self.partner[a];
        let pc = self.partner[c];
        let old_sector = self.sector();
        let mut partner = self.partner.clone();
        let mut blobs = self.blobs;

        if pa as usize == c {
            let weight = if self.blob_bit(a) { LoopFactor::Y } else { LoopFactor::X };
            blobs &= !((1 << a) | (1 << c));
            return GeneratorAction {
                result_state: LinkState { partner, blobs },
                weight,
                sector_change: false,
            };
        }

        if pa == STRING && pc == STRING {
            // strings annihilate; the leftmost blob, if any, leaves with them
            partner[a] = c as u8;
            partner[c] = a as u8;
            blobs &= !((1 << a) | (1 << c));
            return GeneratorAction {
                result_state: LinkState { partner, blobs },
                weight: LoopFactor::One,
                sector_change: true,
            };
        }

        let blobbed = self.blob_bit(a) || self.blob_bit(c);
        blobs &= !((1 << a) | (1 << c));
        partner[a] = c as u8;
        partner[c] = a as u8;
        let u = pa;
        let v = pc;
        if u == STRING || v == STRING {
            let other = if u == STRING { v as usize } else { u as usize };
            partner[other] = STRING;
            blobs &= !(1 << other);
            if blobbed {
                blobs |= 1 << other;
            }
        } else {
            let (u, v) = (u as usize, v as usize);
            partner[u] = v as u8;
            partner[v] = u as u8;
            blobs &= !((1 << u) | (1 << v));
            if blobbed {
                blobs |= (1 << u) | (1 << v);
            }
        }
        let result_state = LinkState { partner, blobs };
        let sector_change = result_state.sector() != old_sector;
        GeneratorAction {
            result_state,
            weight: LoopFactor::One,
            sector_change,
        }
    }

    /// Action of `b`: blobs the link at the first point.
    pub fn apply_b(&self) -> GeneratorAction {
        let old_sector = self.sector();
        let mut blobs = self.blobs | 1;
        let p = self.partner[0];
        if p != STRING {
            blobs |= 1 << p;
        }
        let result_state = LinkState {
            partner: self.partner.clone(),
            blobs,
        };
        let sector_change = result_state.sector() != old_sector;
        GeneratorAction {
            result_state,
            weight: LoopFactor::One,
            sector_change,
        }
    }

    /// ASCII cap diagram: points on the bottom row, outer arcs on top,
    /// `*` marks a blob.
    pub fn diagram(&self) -> String {
        let n = self.partner.len();
        let mut depth = vec![0usize; n];
        let mut d = 0usize;
        let mut height = 1;
        for i in 0..n {
            let p = self.partner[i];
            if p != STRING && (p as usize) < i {
                d -= 1;
            }
            depth[i] = d;
            if p != STRING && (p as usize) > i {
                d += 1;
                height = height.max(d + 1);
            }
        }
        let width = 2 * n - 1;
        let mut rows = vec![vec![' '; width]; height];
        for i in 0..n {
            let p = self.partner[i];
            if p == STRING {
                for row in rows.iter_mut() {
                    row[2 * i] = '|';
                }
                if self.blob_bit(i) {
                    rows[0][2 * i] = '*';
                }
                continue;
            }
            let p = p as usize;
            if p < i {
                continue;
            }
            let level = depth[i];
            for c in rows[level].iter_mut().take(2 * p).skip(2 * i + 1) {
                *c = '_';
            }
            for row in rows.iter_mut().skip(level + 1) {
                row[2 * i] = '|';
                row[2 * p] = '|';
            }
            if self.blob_bit(i) {
                rows[level][i + p] = '*';
            }
        }
        rows.into_iter()
            .map(|r| r.into_iter().collect::<String>().trim_end().to_string())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl fmt::Display for LinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.partner.len() {
            let p = self.partner[i];
            let blob = self.blob_bit(i);
            let c = if p == STRING {
                if blob {
                    '!'
                } else {
                    '|'
                }
            } else if (p as usize) > i {
                if blob {
                    '['
                } else {
                    '('
                }
            } else if blob {
                ']'
            } else {
                ')'
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for LinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinkState({self})")
    }
}

impl FromStr for LinkState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        let n = chars.len();
        if n == 0 || n > MAX_POINTS {
            return Err(Error::InvalidState(format!("unsupported size {n}")));
        }
        let mut partner = vec![STRING; n];
        let mut blobs = 0u64;
        let mut stack: Vec<(usize, bool)> = Vec::new();
        for (i, ch) in chars.iter().enumerate() {
            match ch {
                '(' | '[' => stack.push((i, *ch == '[')),
                ')' | ']' => {
                    let (j, open_blob) = stack
                        .pop()
                        .ok_or_else(|| Error::InvalidState(format!("unmatched `{ch}` in `{s}`")))?;
                    if open_blob != (*ch == ']') {
                        return Err(Error::InvalidState(format!("mismatched bracket kinds in `{s}`")));
                    }
                    partner[i] = j as u8;
                    partner[j] = i as u8;
                    if open_blob {
                        blobs |= (1 << i) | (1 << j);
                    }
                }
                '|' => {}
                '!' => blobs |= 1 << i,
                other => return Err(Error::InvalidState(format!("bad character `{other}`"))),
            }
        }
        if !stack.is_empty() {
            return Err(Error::InvalidState(format!("unclosed arc in `{s}`")));
        }
        LinkState::new(partner, blobs)
    }
}

/// Non-crossing partial matchings on `n` points with `l` strings, none nested.
fn matchings(n: usize, l: usize) -> Vec<Vec<u8>> {
    fn perfect(lo: usize, hi: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>, k: &mut dyn FnMut(&mut Vec<u8>, &mut Vec<Vec<u8>>)) {
        // fills [lo, hi) with a perfect non-crossing matching, then calls k
        if lo == hi {
            k(cur, out);
            return;
        }
        let mut j = lo + 1;
        while j < hi {
            cur[lo] = j as u8;
            cur[j] = lo as u8;
            perfect(lo + 1, j, cur, out, &mut |cur, out| perfect(j + 1, hi, cur, out, k));
            j += 2;
        }
    }

    fn top(pos: usize, n: usize, strings_left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if pos == n {
            if strings_left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let remaining = n - pos;
        if strings_left > remaining || (remaining - strings_left) % 2 != 0 {
            return;
        }
        if strings_left > 0 {
            cur[pos] = STRING;
            top(pos + 1, n, strings_left - 1, cur, out);
        }
        let mut j = pos + 1;
        while j < n {
            cur[pos] = j as u8;
            cur[j] = pos as u8;
            perfect(pos + 1, j, cur, out, &mut |cur, out| top(j + 1, n, strings_left, cur, out));
            j += 2;
        }
    }

    let mut out = Vec::new();
    if l > n || (n - l) % 2 != 0 {
        return out;
    }
    let mut cur = vec![STRING; n];
    top(0, n, l, &mut cur, &mut out);
    out
}

/// Exterior arcs strictly left of the leftmost string, as left endpoints.
fn exterior_arcs_left(partner: &[u8]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < partner.len() {
        if partner[i] == STRING {
            break;
        }
        out.push(i);
        i = partner[i] as usize + 1;
    }
    out
}

/// States of a sector in canonical order, for the given basis kind.
pub fn enumerate_basis(n: usize, sector: SectorLabel, kind: BasisKind) -> Result<Vec<LinkState>> {
    sector.validate(n)?;
    let mut out = Vec::new();
    for partner in matchings(n, sector.n_strings) {
        let arcs = exterior_arcs_left(&partner);
        let first = partner.iter().position(|&p| p == STRING);
        let string_mask = match first {
            Some(f) if sector.blobbed => 1u64 << f,
            _ => 0,
        };
        // in the saturated basis the link at point 0 is forced
        let (forced, free): (u64, &[usize]) = match kind {
            BasisKind::General => (0, &arcs[..]),
            BasisKind::Saturated => {
                if partner[0] == STRING {
                    if !sector.blobbed {
                        continue;
                    }
                    (0, &arcs[..])
                } else {
                    let p = partner[0] as u64;
                    (1 | (1 << p), &arcs[1..])
                }
            }
        };
        for bits in 0u64..(1 << free.len()) {
            let mut blobs = forced | string_mask;
            for (k, &a) in free.iter().enumerate() {
                if bits >> k & 1 == 1 {
                    blobs |= (1 << a) | (1 << partner[a]);
                }
            }
            out.push(LinkState {
                partner: partner.clone(),
                blobs,
            });
        }
    }
    out.sort();
    Ok(out)
}

/// Reduced states of a sector (image of `b`) in canonical order.
pub fn enumerate_states(n: usize, sector: SectorLabel) -> Result<Vec<LinkState>> {
    enumerate_basis(n, sector, BasisKind::Saturated)
}

/// All reduced states over all sectors, in canonical order.
pub fn enumerate_all(n: usize) -> Result<Vec<LinkState>> {
    let mut out = Vec::new();
    for s in SectorLabel::all(n) {
        out.extend(enumerate_states(n, s)?);
    }
    Ok(out)
}

/// Closed-form dimension of a sector in the saturated basis.
pub fn sector_dimension(n: usize, sector: SectorLabel) -> Result<usize> {
    sector.validate(n)?;
    let n1 = n as i64 - 1;
    let l = sector.n_strings as i64;
    let k = if sector.blobbed { (n as i64 - l) / 2 } else { (n as i64 - l - 2) / 2 };
    let v = binomial(n1, k);
    usize::try_from(&v).map_err(|_| Error::InvalidArgument("dimension overflows usize".into()))
}
