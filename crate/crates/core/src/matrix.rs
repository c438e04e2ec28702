//! Small dense matrix helpers over [`Scalar`] rings, row-major `m[row][col]`.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ring::Scalar;

pub type Dense<S> = Vec<Vec<S>>;

pub fn identity<S: Scalar>(d: usize) -> Dense<S> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { S::one() } else { S::zero() }).collect())
        .collect()
}

pub fn mul<S: Scalar>(a: &Dense<S>, b: &Dense<S>) -> Dense<S> {
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            let mut out = vec![S::zero(); cols];
            for (k, aik) in row.iter().enumerate() {
                if aik.is_zero() {
                    continue;
                }
                for (o, bkj) in out.iter_mut().zip(&b[k]) {
                    if !bkj.is_zero() {
                        o.add_mul(aik, bkj);
                    }
                }
            }
            out
        })
        .collect()
}

pub fn scale<S: Scalar>(a: &Dense<S>, c: &S) -> Dense<S> {
    a.iter().map(|r| r.iter().map(|v| v.mul_ref(c)).collect()).collect()
}

pub fn add<S: Scalar>(a: &Dense<S>, b: &Dense<S>) -> Dense<S> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .map(|(x, y)| {
                    let mut s = x.clone();
                    s.add_ref(y);
                    s
                })
                .collect()
        })
        .collect()
}

pub fn sub<S: Scalar>(a: &Dense<S>, b: &Dense<S>) -> Dense<S> {
    add(a, &scale(b, &(-S::one())))
}

pub fn trace<S: Scalar>(a: &Dense<S>) -> S {
    let mut t = S::zero();
    for (i, r) in a.iter().enumerate() {
        t.add_ref(&r[i]);
    }
    t
}

/// First entry where two matrices differ, as `(row, col)`.
pub fn first_difference<S: Scalar>(a: &Dense<S>, b: &Dense<S>) -> Option<(usize, usize)> {
    for (i, (ra, rb)) in a.iter().zip(b).enumerate() {
        for (j, (x, y)) in ra.iter().zip(rb).enumerate() {
            if x != y {
                return Some((i, j));
            }
        }
    }
    None
}

/// Exact inverse by Gauss-Jordan elimination.
pub fn invert_rational(a: &Dense<BigRational>) -> Result<Dense<BigRational>> {
    let d = a.len();
    let mut m: Dense<BigRational> = a.clone();
    let mut inv = identity::<BigRational>(d);
    for col in 0..d {
        let piv = (col..d)
            .find(|&r| !m[r][col].is_zero())
            .ok_or_else(|| Error::Singular(format!("matrix has no pivot in column {col}")))?;
        m.swap(col, piv);
        inv.swap(col, piv);
        let p = m[col][col].clone();
        let pinv = BigRational::one() / p;
        for v in m[col].iter_mut() {
            *v = &*v * &pinv;
        }
        for v in inv[col].iter_mut() {
            *v = &*v * &pinv;
        }
        for r in 0..d {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in 0..d {
                let dm = &f * &m[col][c];
                m[r][c] -= dm;
                let di = &f * &inv[col][c];
                inv[r][c] -= di;
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rat;

    #[test]
    fn inverse_roundtrip() {
        let a = vec![
            vec![rat(2, 1), rat(1, 1), rat(0, 1)],
            vec![rat(1, 3), rat(0, 1), rat(1, 1)],
            vec![rat(0, 1), rat(5, 2), rat(1, 1)],
        ];
        let inv = invert_rational(&a).unwrap();
        assert_eq!(mul(&a, &inv), identity(3));
        let sing = vec![vec![rat(1, 1), rat(2, 1)], vec![rat(2, 1), rat(4, 1)]];
        assert!(invert_rational(&sing).is_err());
    }
}
