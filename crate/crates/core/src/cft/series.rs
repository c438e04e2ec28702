//! Truncated q-series: Virasoro characters, Rocha-Caridi characters and the
//! annulus partition-function identities for integer Kac labels.
//!
//! Exponents are exact rationals; a series is truncated at a level cutoff
//! measured from `-c/24`, i.e. a term `q^{h - c/24 + n}` is kept when
//! `h + n <= cutoff`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::amplitudes::WindingParams;
use crate::error::{Error, Result};

/// Coefficients of `1/P(q) = prod_n (1 - q^n)^{-1}` through `q^cutoff`.
pub fn inverse_euler(cutoff: usize) -> Vec<i64> {
    let mut a = vec![0i64; cutoff + 1];
    a[0] = 1;
    for part in 1..=cutoff {
        for n in part..=cutoff {
            a[n] += a[n - part];
        }
    }
    a
}

/// Exact Kac weight for integer `p` and rational labels.
pub fn kac(p: i64, r: Rational64, s: Rational64) -> Rational64 {
    let t = Rational64::from_integer(p + 1) * r - Rational64::from_integer(p) * s;
    (t * t - 1) / Rational64::from_integer(4 * p * (p + 1))
}

pub fn central(p: i64) -> Rational64 {
    Rational64::from_integer(1) - Rational64::new(6, p * (p + 1))
}

fn int(v: i64) -> Rational64 {
    Rational64::from_integer(v)
}

/// A series `q^leading * sum_n coeffs[n] q^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CharacterSeries {
    #[serde(serialize_with = "ser_ratio")]
    pub leading: Rational64,
    pub coeffs: Vec<i64>,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl CharacterSeries {
    /// `q^leading / P(q)` through `len` terms.
    pub fn verma(leading: Rational64, len: usize) -> Self {
        CharacterSeries {
            leading,
            coeffs: inverse_euler(len.saturating_sub(1)),
        }
    }

    /// Adds `sign * other`; the leading exponents must differ by an integer.
    pub fn add_scaled(&mut self, other: &CharacterSeries, sign: i64) -> Result<()> {
        let shift = other.leading - self.leading;
        if !shift.is_integer() {
            return Err(Error::InvalidArgument(format!(
                "exponents {} and {} are not commensurate",
                self.leading, other.leading
            )));
        }
        let mut shift = shift.to_integer();
        if shift < 0 {
            let pad = (-shift) as usize;
            let mut c = vec![0; pad];
            c.extend_from_slice(&self.coeffs);
            c.truncate(self.coeffs.len());
            self.coeffs = c;
            self.leading = other.leading;
            shift = 0;
        }
        for (n, v) in other.coeffs.iter().enumerate() {
            let k = n + shift as usize;
            if k < self.coeffs.len() {
                self.coeffs[k] += sign * v;
            }
        }
        Ok(())
    }

    /// Drops leading zero coefficients, moving the exponent accordingly.
    pub fn normalized(mut self) -> Self {
        let lead = self.coeffs.iter().position(|&c| c != 0).unwrap_or(0);
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.leading += int(lead as i64);
        }
        self
    }
}

impl fmt::Display for CharacterSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q^({}) * [", self.leading)?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

/// Number of terms needed to reach `cutoff` from a weight `h`.
fn terms_from(h: Rational64, cutoff: usize) -> usize {
    let room = int(cutoff as i64) - h;
    if room < Rational64::zero() {
        0
    } else {
        room.floor().to_integer() as usize + 1
    }
}

/// `K_{r,s} = (q^{h_{r,s}} - q^{h_{r,-s}}) / (q^{c/24} P(q))` for integer
/// labels, through level `cutoff` above `h_{r,s}`.
pub fn character_k(p: i64, r: i64, s: i64, cutoff: usize) -> CharacterSeries {
    let c24 = central(p) / 24;
    let h_plus = kac(p, int(r), int(s));
    let h_minus = kac(p, int(r), int(-s));
    let len = cutoff + 1;
    let mut out = CharacterSeries::verma(h_plus - c24, len);
    let _ = out.add_scaled(&CharacterSeries::verma(h_minus - c24, len), -1);
    out
}

/// Irreducible character `chi_{d,a}` as the alternating sum of `K`'s.
pub fn rocha_caridi(p: i64, d: i64, a: i64, cutoff: usize) -> CharacterSeries {
    let h = p + 1;
    let c24 = central(p) / 24;
    let base = kac(p, int(d), int(a));
    let mut out = CharacterSeries {
        leading: base - c24,
        coeffs: vec![0; cutoff + 1],
    };
    let within = |s: i64| kac(p, int(d), int(s)) - base <= int(cutoff as i64);
    let mut n = 0;
    while within(a + 2 * h * n) || n == 0 {
        let _ = out.add_scaled(&character_k(p, d, a + 2 * h * n, cutoff), 1);
        n += 1;
    }
    let mut n = 1;
    while within(2 * n * h - a) {
        let _ = out.add_scaled(&character_k(p, d, 2 * n * h - a, cutoff), -1);
        n += 1;
    }
    out
}

/// `chi_{d,a}` from the double-sum form
/// `q^{-c/24}/P(q) * sum_k (q^{h_{d,a+2kH}} - q^{h_{d,-a+2kH}})`.
pub fn rocha_caridi_double_sum(p: i64, d: i64, a: i64, cutoff: usize) -> CharacterSeries {
    let hh = p + 1;
    let c24 = central(p) / 24;
    let base = kac(p, int(d), int(a));
    let mut out = CharacterSeries {
        leading: base - c24,
        coeffs: vec![0; cutoff + 1],
    };
    let reach = (cutoff as i64 + 4) / (2 * hh).max(1) + 2;
    for k in -reach..=reach {
        for (s, sign) in [(a + 2 * k * hh, 1), (-a + 2 * k * hh, -1)] {
            let w = kac(p, int(d), int(s));
            if w - base > int(cutoff as i64) {
                continue;
            }
            let _ = out.add_scaled(&CharacterSeries::verma(w - c24, cutoff + 1), sign);
        }
    }
    out
}

/// A q-series whose coefficients are integer combinations of independent
/// amplitude symbols `A_j = sinh((2j+r) a) / sinh(r a)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolicSeries {
    /// exponent -> (j -> coefficient)
    pub terms: BTreeMap<Rational64, BTreeMap<i64, i64>>,
}

impl SymbolicSeries {
    /// Adds `coeff * A_j * q^exponent`, reducing with `A_{-j-r} = -A_j`
    /// (and `A_{-r/2} = 0` for even `r`).
    fn add(&mut self, r: i64, exponent: Rational64, j: i64, coeff: i64) {
        let (j, coeff) = if 2 * j < -r { (-j - r, -coeff) } else { (j, coeff) };
        if 2 * j == -r || coeff == 0 {
            return;
        }
        let slot = self.terms.entry(exponent).or_default();
        *slot.entry(j).or_insert(0) += coeff;
        if slot[&j] == 0 {
            slot.remove(&j);
        }
        if slot.is_empty() {
            self.terms.remove(&exponent);
        }
    }

    fn add_verma(&mut self, r: i64, h: Rational64, c24: Rational64, j: i64, sign: i64, cutoff: usize) {
        let n = terms_from(h, cutoff);
        if n == 0 {
            return;
        }
        for (k, v) in inverse_euler(n - 1).into_iter().enumerate() {
            self.add(r, h - c24 + int(k as i64), j, sign * v);
        }
    }

    /// Amplitude symbols that occur.
    pub fn symbols(&self) -> Vec<i64> {
        let mut s: Vec<i64> = self.terms.values().flat_map(|m| m.keys().copied()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// Largest `|j|` with `h_{r,r+2j} <= cutoff`.
fn j_reach(p: i64, r: i64, cutoff: usize) -> i64 {
    let mut j = 0;
    while kac(p, int(r), int(r + 2 * j)).min(kac(p, int(r), int(r - 2 * j))) <= int(cutoff as i64) {
        j += 1;
    }
    j
}

/// Both sums of the `beta = r alpha` partition function, Verma form:
/// `sum_{j >= 0} A_j q^{h_{r,r+2j}}/P - sum_{j >= 1} (-A_{-j}) q^{h_{r,r-2j}}/P`.
pub fn partition_verma_form(p: i64, r: i64, cutoff: usize) -> SymbolicSeries {
    let c24 = central(p) / 24;
    let reach = j_reach(p, r, cutoff);
    let mut z = SymbolicSeries::default();
    for j in 0..=reach {
        z.add_verma(r, kac(p, int(r), int(r + 2 * j)), c24, j, 1, cutoff);
    }
    for j in 1..=reach {
        // sinh((2j - r) a) / sinh(r a) = -A_{-j}
        z.add_verma(r, kac(p, int(r), int(r - 2 * j)), c24, -j, 1, cutoff);
    }
    z
}

/// The same partition function regrouped into `sum_{j >= -[r/2]} A_j K_{r,r+2j}`.
pub fn partition_character_form(p: i64, r: i64, cutoff: usize) -> SymbolicSeries {
    let c24 = central(p) / 24;
    let reach = j_reach(p, r, cutoff);
    let mut z = SymbolicSeries::default();
    for j in -(r / 2)..=reach {
        let s = r + 2 * j;
        z.add_verma(r, kac(p, int(r), int(s)), c24, j, 1, cutoff);
        z.add_verma(r, kac(p, int(r), int(-s)), c24, j, -1, cutoff);
    }
    z
}

/// Which partition function `assemble_partition_series` builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parity {
    /// even width, `L = 2j`
    Even,
    /// odd width, `L = 2j + 1`
    Odd,
}

/// Numerical partition function for real `p, r` and arbitrary winding
/// parameters, as `(exponent, coefficient)` pairs sorted by exponent.
pub fn assemble_partition_series(
    p: f64,
    r: f64,
    params: &WindingParams,
    parity: Parity,
    cutoff: usize,
) -> Result<Vec<(f64, Complex64)>> {
    let sb = params.beta.sinh();
    if sb.norm() < 1e-14 {
        return Err(Error::Singular(format!("sinh(beta) vanishes at beta = {}", params.beta)));
    }
    let c24 = super::kac::central_charge(p) / 24.0;
    let pinv = inverse_euler(cutoff);
    let mut raw: Vec<(f64, Complex64)> = Vec::new();
    let off = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let mut push = |h: f64, amp: Complex64| {
        for (k, &v) in pinv.iter().enumerate() {
            if h + k as f64 > cutoff as f64 + 1e-12 {
                break;
            }
            raw.push((h - c24 + k as f64, amp * v as f64));
        }
    };
    let mut l = off;
    loop {
        let hp = super::kac::kac_weight(p, r, r + l as f64);
        let hm = super::kac::kac_weight(p, r, r - l as f64);
        if hp.min(hm) > cutoff as f64 + 1.0 && l > 2 * cutoff + 4 {
            break;
        }
        let la = params.alpha * l as f64;
        push(hp, (la + params.beta).sinh() / sb);
        if l > 0 {
            push(hm, -(la - params.beta).sinh() / sb);
        }
        l += 2;
        if l > 4 * (cutoff + 4) + 8 {
            break;
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, Complex64)> = Vec::new();
    for (e, c) in raw {
        match out.last_mut() {
            Some(last) if (last.0 - e).abs() < 1e-12 => last.1 += c,
            _ => out.push((e, c)),
        }
    }
    Ok(out)
}

/// Evaluates a symbolic series at concrete amplitudes, for comparison with
/// [`assemble_partition_series`].
pub fn evaluate_symbolic(series: &SymbolicSeries, r: i64, alpha: Complex64) -> Vec<(f64, Complex64)> {
    let sr = (alpha * r as f64).sinh();
    series
        .terms
        .iter()
        .map(|(e, m)| {
            let v: Complex64 = m
                .iter()
                .map(|(&j, &c)| (alpha * (2 * j + r) as f64).sinh() / sr * c as f64)
                .sum();
            (e.to_f64().unwrap_or(f64::NAN), v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_prefix() {
        assert_eq!(inverse_euler(6), vec![1, 1, 2, 3, 5, 7, 11]);
    }

    #[test]
    fn identity_character() {
        let k = character_k(3, 1, 1, 8);
        assert_eq!(k.leading, -central(3) / 24);
    }

    #[test]
    fn ising_characters() {
        let chi11 = rocha_caridi(3, 1, 1, 8);
        assert_eq!(chi11.coeffs, vec![1, 0, 1, 1, 2, 2, 3, 3, 5]);
        let chi12 = rocha_caridi(3, 1, 2, 8);
        assert_eq!(chi12.coeffs, vec![1, 1, 1, 2, 2, 3, 4, 5, 6]);
        let chi13 = rocha_caridi(3, 1, 3, 8);
        assert_eq!(chi13.coeffs, vec![1, 1, 1, 1, 2, 2, 3, 4, 5]);
        for (d, a) in [(1, 1), (1, 2), (1, 3), (2, 2)] {
            assert_eq!(rocha_caridi(3, d, a, 8), rocha_caridi_double_sum(3, d, a, 8));
        }
    }

    #[test]
    fn partition_identity_integer_r() {
        for p in [3, 4, 6] {
            for r in 1..=4 {
                let a = partition_verma_form(p, r, 8);
                let b = partition_character_form(p, r, 8);
                assert_eq!(a, b, "p={p} r={r}");
                if r % 2 == 0 {
                    assert!(!b.symbols().contains(&(-r / 2)));
                }
                assert!(b.symbols().iter().all(|&j| j >= -(r / 2)));
            }
        }
    }

    #[test]
    fn numeric_series_matches_symbolic() {
        let alpha = Complex64::new(0.0, 0.4);
        let params = WindingParams::new(alpha, alpha * 2.0).unwrap();
        let num = assemble_partition_series(4.0, 2.0, &params, Parity::Even, 6).unwrap();
        let sym = evaluate_symbolic(&partition_verma_form(4, 2, 6), 2, alpha);
        let nz: Vec<_> = num.into_iter().filter(|(_, c)| c.norm() > 1e-10).collect();
        assert_eq!(nz.len(), sym.len());
        for ((e1, c1), (e2, c2)) in nz.iter().zip(&sym) {
            assert!((e1 - e2).abs() < 1e-12);
            assert!((c1 - c2).norm() < 1e-9);
        }
    }

    #[test]
    fn odd_parity_starts_at_one() {
        let params = WindingParams::new(Complex64::new(0.2, 0.0), Complex64::new(0.5, 0.0)).unwrap();
        let s = assemble_partition_series(3.0, 1.0, &params, Parity::Odd, 4).unwrap();
        let c24 = super::super::kac::central_charge(3.0) / 24.0;
        let lowest = super::super::kac::kac_weight(3.0, 1.0, 2.0).min(super::super::kac::kac_weight(3.0, 1.0, 0.0));
        assert!((s[0].0 - (lowest - c24)).abs() < 1e-12);
    }
}
