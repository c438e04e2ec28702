//! Kac-table weights, central charge and the boundary-weight parametrization
//! `y(r) = sin((r+1) g) / sin(r g)` with `g = pi / (p+1)`.

use std::f64::consts::PI;

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};

/// Minimal-model data for a real `p > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KacParams {
    pub p: f64,
    pub gamma: f64,
    pub c: f64,
}

impl KacParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidArgument(format!("p must be a real number > 1, got {p}")));
        }
        Ok(KacParams {
            p,
            gamma: PI / (p + 1.0),
            c: central_charge(p),
        })
    }

    /// Bulk loop weight `x = 2 cos g`.
    pub fn x(&self) -> f64 {
        2.0 * self.gamma.cos()
    }

    pub fn weight(&self, r: f64, s: f64) -> f64 {
        kac_weight(self.p, r, s)
    }

    pub fn y_of_r(&self, r: f64) -> f64 {
        y_of_r(self.p, r)
    }
}

pub fn central_charge(p: f64) -> f64 {
    1.0 - 6.0 / (p * (p + 1.0))
}

/// `h_{r,s} = (((p+1) r - p s)^2 - 1) / (4 p (p+1))`.
pub fn kac_weight(p: f64, r: f64, s: f64) -> f64 {
    let t = (p + 1.0) * r - p * s;
    (t * t - 1.0) / (4.0 * p * (p + 1.0))
}

/// Exact Kac weight for rational arguments.
pub fn kac_weight_exact(p: &BigRational, r: &BigRational, s: &BigRational) -> BigRational {
    let one = BigRational::one();
    let p1 = p + &one;
    let t = &p1 * r - p * s;
    let four = BigRational::from_integer(4.into());
    (&t * &t - &one) / (four * p * &p1)
}

/// Exact central charge `1 - 6 / (p (p+1))`.
pub fn central_charge_exact(p: &BigRational) -> BigRational {
    let one = BigRational::one();
    let six = BigRational::from_integer(6.into());
    &one - six / (p * (p + &one))
}

/// Boundary loop weight attached to the Kac label `r`.
pub fn y_of_r(p: f64, r: f64) -> f64 {
    let g = PI / (p + 1.0);
    ((r + 1.0) * g).sin() / (r * g).sin()
}

/// Inverse of [`y_of_r`] on the principal branch `r in (0, p+1)`.
pub fn r_of_y(p: f64, y: f64) -> Result<f64> {
    if !(p > 1.0) || !y.is_finite() {
        return Err(Error::NoSolution(format!("no r in (0, p+1) gives y = {y} at p = {p}")));
    }
    let g = PI / (p + 1.0);
    // y = cos g + sin g * cot(r g)
    let rg = g.sin().atan2(y - g.cos());
    Ok(rg / g)
}

/// Weight of the boundary twist field, `h_{p/2,p/2}`.
pub fn twist_weight(p: f64) -> f64 {
    (p * p - 4.0) / (16.0 * p * (p + 1.0))
}

/// Loop weights `(x, y)` of a `Q`-state Potts model whose boundary spins
/// on an interval are restricted to `Q_s` values.
pub fn potts_map(q: f64, q_s: f64) -> Result<(f64, f64)> {
    if !(q > 0.0 && q <= 4.0) {
        return Err(Error::InvalidArgument(format!("Q must lie in (0, 4], got {q}")));
    }
    if q_s > q {
        return Err(Error::InvalidArgument(format!("Q_s = {q_s} exceeds Q = {q}")));
    }
    let x = q.sqrt();
    Ok((x, q_s / x))
}

/// `p` with `x = 2 cos(pi / (p+1))`, for `x in (-2, 2)`.
pub fn p_of_x(x: f64) -> Result<f64> {
    if !(x > -2.0 && x < 2.0) {
        return Err(Error::NoSolution(format!("x = {x} is outside (-2, 2)")));
    }
    Ok(PI / (x / 2.0).acos() - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rat;

    #[test]
    fn known_weights() {
        assert_eq!(kac_weight(3.0, 1.0, 1.0), 0.0);
        assert!((kac_weight(5.0, 2.0, 2.0) - 1.0 / 40.0).abs() < 1e-15);
        assert!((kac_weight(3.0, 1.0, 3.0) - 0.5).abs() < 1e-15);
        assert_eq!(kac_weight_exact(&rat(5, 1), &rat(2, 1), &rat(2, 1)), rat(1, 40));
        assert_eq!(central_charge_exact(&rat(3, 1)), rat(1, 2));
    }

    #[test]
    fn boundary_weights() {
        for p in [2.5, 3.0, 6.0] {
            let k = KacParams::new(p).unwrap();
            assert!((y_of_r(p, 1.0) - k.x()).abs() < 1e-14);
            assert!((y_of_r(p, p / 2.0) - 1.0).abs() < 1e-14);
            let x = k.x();
            assert!((y_of_r(p, 2.0) - (x * x - 1.0) / x).abs() < 1e-14);
            for r in [0.3, 1.0, 2.0, p - 0.2] {
                assert!((r_of_y(p, y_of_r(p, r)).unwrap() - r).abs() < 1e-12);
            }
        }
        assert!(r_of_y(3.0, f64::NAN).is_err());
    }

    #[test]
    fn twist() {
        assert_eq!(twist_weight(2.0), 0.0);
        assert!((twist_weight(4.0) - 3.0 / 80.0).abs() < 1e-15);
        assert!((twist_weight(4.0) - kac_weight(4.0, 2.0, 2.0)).abs() < 1e-15);
        assert!((twist_weight(1e9) - 1.0 / 16.0).abs() < 1e-8);
    }

    #[test]
    fn potts() {
        let (x, y) = potts_map(4.0, 4.0).unwrap();
        assert_eq!((x, y), (2.0, 2.0));
        let (x, y) = potts_map(3.0, 2.0).unwrap();
        let p = p_of_x(x).unwrap();
        assert!((p - 5.0).abs() < 1e-12);
        let r = r_of_y(p, y).unwrap();
        assert!((kac_weight(p, r, r) - 1.0 / 40.0).abs() < 1e-12);
        // Q_s = 1 gives r = p - 1 and h_{p-1,p-1} = h_{1,2}
        let (x, y) = potts_map(2.0, 1.0).unwrap();
        let p = p_of_x(x).unwrap();
        let r = r_of_y(p, y).unwrap();
        assert!((r - (p - 1.0)).abs() < 1e-12);
        assert!((kac_weight(p, r, r) - kac_weight(p, 1.0, 2.0)).abs() < 1e-12);
    }
}
