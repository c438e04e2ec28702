//! Eigenvalue amplitudes of the annulus partition function.
//!
//! With `K_k = Tr (T_{2k})^M` and `K_k* = Tr (T_{2k}*)^M` (traces over
//! reduced states), the even-`N` partition function decomposes as
//! `Z = sum_L [D_L K_L + D_L* K_L*]`. The amplitudes are obtained here by
//! exactly inverting the combinatorial system that expresses each character
//! through the winding-resolved pieces `Z_j / l^{2j}` and
//! `Z_j* / (l^{2j-1} m)`, and compared with the hyperbolic closed forms
//! `D_L* = sinh(L a + b) / sinh b`, `D_L = sinh(L a - b) / sinh(-b)` where
//! `l = 2 cosh a` and `m = sinh(a + b) / sinh b`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linkstate::{enumerate_basis, BasisKind, SectorLabel};
use crate::matrix::{invert_rational, Dense};
use crate::ring::{binomial, Monomial, Poly, Scalar, Var};
use crate::transfer::{build_block, partition_by_winding, partition_function_direct, LoopWeights, SectorBlock};

/// Hyperbolic parametrization of the winding fugacities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingParams {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl WindingParams {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        if beta.sinh().norm() < 1e-14 {
            return Err(Error::Singular(format!("sinh(beta) vanishes at beta = {beta}")));
        }
        Ok(WindingParams { alpha, beta })
    }

    /// Solves `l = 2 cosh a`, `m = sinh(a + b) / sinh b` for `(a, b)`.
    pub fn from_weights(l: Complex64, m: Complex64) -> Result<Self> {
        let alpha = (l / 2.0).acosh();
        let sa = alpha.sinh();
        if sa.norm() < 1e-14 {
            return Err(Error::Singular("l = +-2 leaves beta undetermined".into()));
        }
        // m = cosh a + sinh a * coth b
        let coth = (m - alpha.cosh()) / sa;
        if coth.norm() < 1e-300 {
            return Err(Error::Singular("coth(beta) = 0 has no finite solution".into()));
        }
        let beta = (Complex64::new(1.0, 0.0) / coth).atanh();
        WindingParams::new(alpha, beta)
    }

    pub fn l(&self) -> Complex64 {
        2.0 * self.alpha.cosh()
    }

    pub fn m(&self) -> Complex64 {
        (self.alpha + self.beta).sinh() / self.beta.sinh()
    }
}

/// `Tr(block^M)` over the reduced states of the block.
pub fn character_trace<S: Scalar>(block: &SectorBlock<S>, m: usize) -> S {
    let d = block.dim();
    let mut tr = S::zero();
    for j in 0..d {
        let mut v = vec![S::zero(); d];
        v[j] = S::one();
        for _ in 0..m {
            v = block.apply(&v);
        }
        tr.add_ref(&v[j]);
    }
    tr
}

/// Characters of every sector of `n` points.
pub fn characters<S: Scalar>(n: usize, m: usize, weights: &LoopWeights<S>) -> Result<BTreeMap<SectorLabel, S>> {
    let mut out = BTreeMap::new();
    for s in SectorLabel::all(n) {
        let block = build_block(n, s, weights)?;
        out.insert(s, character_trace(&block, m));
    }
    Ok(out)
}

/// Amplitude `U_L(l/2)` of the model without boundary generator.
pub fn chebyshev_amplitude<S: Scalar>(big_l: usize, l: &S) -> S {
    let mut prev = S::zero();
    let mut cur = S::one();
    for _ in 0..big_l {
        let next = l.mul_ref(&cur) - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `(D_L*, D_L)` from the hyperbolic closed forms.
pub fn closed_form_amplitudes(big_l: usize, params: &WindingParams) -> Result<(Complex64, Complex64)> {
    let sb = params.beta.sinh();
    if sb.norm() < 1e-14 {
        return Err(Error::Singular(format!("sinh(beta) vanishes at beta = {}", params.beta)));
    }
    let la = params.alpha * big_l as f64;
    let starred = (la + params.beta).sinh() / sb;
    let plain = (la - params.beta).sinh() / (-sb);
    Ok((starred, plain))
}

/// Which restricted-state count `count_e` evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EVariant {
    /// unblobbed strings; exterior arcs left of the first string may be blobbed
    Plain,
    /// as `Plain` but the leftmost string is blobbed
    PlainStar,
    /// unblobbed strings, leftmost object a blobbed arc
    Star,
    /// leftmost object blobbed and leftmost string blobbed
    StarStar,
}

/// Number of restricted states on `2j` points with `2k` strings and `j - k`
/// arcs of the given kind (closed form).
pub fn count_e(k: usize, j: usize, variant: EVariant) -> BigInt {
    let (k, j) = (k as i64, j as i64);
    match variant {
        EVariant::Plain | EVariant::PlainStar => binomial(2 * j, j - k),
        EVariant::Star => binomial(2 * j - 1, j - k - 1),
        EVariant::StarStar => binomial(2 * j - 1, j - k),
    }
}

/// The same count by explicit enumeration of decorated link states.
pub fn enumerate_e(k: usize, j: usize, variant: EVariant) -> Result<usize> {
    if k > j {
        return Ok(0);
    }
    if j == 0 {
        // the empty state; it has no leftmost object to blob
        return Ok(matches!(variant, EVariant::Plain | EVariant::PlainStar) as usize);
    }
    let blobbed = matches!(variant, EVariant::PlainStar | EVariant::StarStar);
    let sector = SectorLabel::new(2 * k, blobbed);
    let states = enumerate_basis(2 * j, sector, BasisKind::General)?;
    let need_first = matches!(variant, EVariant::Star | EVariant::StarStar);
    Ok(states
        .iter()
        .filter(|s| {
            if !need_first {
                return true;
            }
            let first_blobbed = s.is_blobbed_at(0);
            match variant {
                EVariant::Star => first_blobbed && !s.is_string(0),
                _ => first_blobbed,
            }
        })
        .count())
}

/// Character or winding-piece index: `Plain(j)` for `K_j` / `Z_j`,
/// `Starred(j)` for `K_j*` / `Z_j*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Char {
    Plain(usize),
    Starred(usize),
}

/// Exact inverse of the character system for `N = 2 * size`.
#[derive(Debug, Clone)]
pub struct InversionTable {
    pub size: usize,
    inverse: Dense<BigRational>,
}

impl InversionTable {
    fn index(size: usize, c: Char) -> Option<usize> {
        match c {
            Char::Plain(j) if j < size => Some(j),
            Char::Starred(j) if (1..=size).contains(&j) => Some(size + j - 1),
            _ => None,
        }
    }

    /// Coefficient of the character `k` in the winding piece `z`
    /// (`z_j = Z_j / l^{2j}`, `z_j* = Z_j* / (l^{2j-1} m)`).
    pub fn coeff(&self, z: Char, k: Char) -> BigRational {
        match (Self::index(self.size, z), Self::index(self.size, k)) {
            (Some(a), Some(b)) => self.inverse[a][b].clone(),
            _ => BigRational::zero(),
        }
    }

    /// The signed-binomial closed form of [`InversionTable::coeff`].
    pub fn closed_form(z: Char, k: Char) -> BigInt {
        let sign = |e: i64| if e.rem_euclid(2) == 0 { BigInt::one() } else { -BigInt::one() };
        match (k, z) {
            (Char::Plain(jj), Char::Plain(kk)) => {
                let (jj, kk) = (jj as i64, kk as i64);
                sign(jj + kk) * binomial(jj + kk, 2 * kk)
            }
            (Char::Plain(jj), Char::Starred(kk)) => {
                let (jj, kk) = (jj as i64, kk as i64);
                sign(jj + kk - 1) * binomial(jj + kk - 1, 2 * kk - 1)
            }
            (Char::Starred(jj), Char::Plain(kk)) => {
                let (jj, kk) = (jj as i64, kk as i64);
                sign(jj + kk) * binomial(jj + kk - 1, 2 * kk)
            }
            (Char::Starred(jj), Char::Starred(kk)) => {
                let (jj, kk) = (jj as i64, kk as i64);
                sign(jj + kk) * binomial(jj + kk - 1, 2 * kk - 1)
            }
        }
    }

    /// All winding-piece and character labels of the system.
    pub fn labels(&self) -> Vec<Char> {
        (0..self.size)
            .map(Char::Plain)
            .chain((1..=self.size).map(Char::Starred))
            .collect()
    }

    /// Amplitude of character `k` as a polynomial in `l, m`:
    /// `D_{2J}` for `Plain(J)`, `D_{2J}*` for `Starred(J)`.
    pub fn amplitude(&self, k: Char) -> Poly {
        if k == Char::Starred(0) {
            return Poly::one();
        }
        let l = Poly::var(Var::L);
        let m = Poly::var(Var::M);
        let mut d = Poly::zero();
        for z in self.labels() {
            let c = self.coeff(z, k);
            if c.is_zero() {
                continue;
            }
            let factor = match z {
                Char::Plain(j) => l.pow(2 * j as u32),
                Char::Starred(j) => l.pow(2 * j as u32 - 1).mul_ref(&m),
            };
            d.add_ref(&factor.mul_ref(&Poly::constant(c)));
        }
        d
    }

    /// Largest deviation (as a label pair) between the inverse and the
    /// printed closed form, if any.
    pub fn closed_form_mismatch(&self) -> Option<(Char, Char)> {
        for z in self.labels() {
            for k in self.labels() {
                if self.coeff(z, k) != BigRational::from_integer(Self::closed_form(z, k)) {
                    return Some((z, k));
                }
            }
        }
        None
    }
}

/// Builds the character system for `N = 2 * size` from [`count_e`] and
/// inverts it exactly.
pub fn invert_to_d(size: usize) -> Result<InversionTable> {
    if size == 0 {
        return Err(Error::InvalidArgument("need size >= 1".into()));
    }
    let dim = 2 * size;
    let mut e = vec![vec![BigRational::zero(); dim]; dim];
    let labels: Vec<Char> = (0..size).map(Char::Plain).chain((1..=size).map(Char::Starred)).collect();
    for (row, &k) in labels.iter().enumerate() {
        for (col, &z) in labels.iter().enumerate() {
            let v = match (k, z) {
                (Char::Plain(k), Char::Plain(j)) => count_e(k, j, EVariant::Plain),
                (Char::Plain(k), Char::Starred(j)) => count_e(k, j, EVariant::Star),
                (Char::Starred(k), Char::Plain(j)) => count_e(k, j, EVariant::PlainStar),
                (Char::Starred(k), Char::Starred(j)) => count_e(k, j, EVariant::StarStar),
            };
            e[row][col] = BigRational::from_integer(v);
        }
    }
    let inverse = invert_rational(&e)?;
    Ok(InversionTable { size, inverse })
}

/// First even `L <= max_l` at which the amplitude recursion
/// `D_L (l^2 - 1) = D_L + D_{L+2} + D_{L-2}` (plain or starred) fails; a
/// table too small to reach `D_{L+2}` counts as a failure.
pub fn recursion_failure(table: &InversionTable, max_l: usize) -> Option<usize> {
    let l = Poly::var(Var::L);
    let d20 = chebyshev_amplitude(2, &l);
    for big in (2..=max_l).step_by(2) {
        let j = big / 2;
        if j + 1 >= table.size {
            return Some(big);
        }
        for make in [Char::Plain as fn(usize) -> Char, Char::Starred] {
            let lhs = table.amplitude(make(j)).mul_ref(&d20);
            let mut rhs = table.amplitude(make(j));
            rhs.add_ref(&table.amplitude(make(j + 1)));
            let below = if j == 1 { Poly::one() } else { table.amplitude(make(j - 1)) };
            rhs.add_ref(&below);
            if lhs != rhs {
                return Some(big);
            }
        }
    }
    None
}

/// Outcome of one comparison inside [`verify_decomposition`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieceCheck {
    pub piece: String,
    pub equal: bool,
    /// First monomial on which the two sides differ.
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub pieces: Vec<PieceCheck>,
    pub equal: bool,
}

fn compare(piece: String, lhs: &Poly, rhs: &Poly) -> PieceCheck {
    let diff = lhs.clone() - rhs.clone();
    let counterexample = diff.terms().next().map(|(mono, c)| format!("{mono}: {c}"));
    PieceCheck {
        piece,
        equal: counterexample.is_none(),
        counterexample,
    }
}

fn monomial_l(e: u32) -> Poly {
    Poly::monomial(Monomial::one().with_degree(Var::L, e as u16), BigRational::one())
}

/// `sum_L [D_L K_L + D_L* K_L*]` with symbolic `x, y, l, m`.
pub fn assemble_partition(n: usize, m: usize, table: &InversionTable) -> Result<Poly> {
    let ks = characters(n, m, &LoopWeights::symbolic())?;
    let mut z = Poly::zero();
    for (s, k) in ks {
        let c = if s.blobbed { Char::Starred(s.n_strings / 2) } else { Char::Plain(s.n_strings / 2) };
        z.add_ref(&table.amplitude(c).mul_ref(&k));
    }
    Ok(z)
}

/// Checks the amplitude decomposition of the symbolic partition function
/// for even `n`: every winding piece against its character combination,
/// and the full `Z` against the amplitude sum.
pub fn verify_decomposition(n: usize, m: usize) -> Result<DecompositionReport> {
    if n % 2 != 0 || n == 0 {
        return Err(Error::InvalidArgument("the decomposition is stated for even N".into()));
    }
    let size = n / 2;
    let table = invert_to_d(size)?;
    let weights = LoopWeights::symbolic();
    let z = partition_function_direct(n, m, &weights)?;
    let split = partition_by_winding(&z, n)?;
    let ks = characters(n, m, &weights)?;
    let kval = |c: Char| -> Poly {
        let s = match c {
            Char::Plain(j) => SectorLabel::unblobbed(2 * j),
            Char::Starred(j) => SectorLabel::blobbed(2 * j),
        };
        ks.get(&s).cloned().unwrap_or_else(Poly::zero)
    };

    let mut pieces = Vec::new();
    for zc in table.labels() {
        let mut rhs = Poly::zero();
        for kc in table.labels() {
            let c = table.coeff(zc, kc);
            if !c.is_zero() {
                rhs.add_ref(&kval(kc).mul_ref(&Poly::constant(c)));
            }
        }
        let (lhs, name, scale) = match zc {
            Char::Plain(j) => (split.plain.get(&j), format!("Z_{j}"), monomial_l(2 * j as u32)),
            Char::Starred(j) => (
                split.starred.get(&j),
                format!("Z_{j}*"),
                monomial_l(2 * j as u32 - 1).mul_ref(&Poly::var(Var::M)),
            ),
        };
        let lhs = lhs.cloned().unwrap_or_else(Poly::zero).mul_ref(&scale);
        pieces.push(compare(name, &lhs, &rhs.mul_ref(&scale)));
    }
    let assembled = assemble_partition(n, m, &table)?;
    pieces.push(compare("Z".into(), &z, &assembled));
    let equal = pieces.iter().all(|p| p.equal);
    Ok(DecompositionReport { n, m, pieces, equal })
}
