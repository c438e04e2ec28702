//! Finite-size extrapolation of scaled levels.
//!
//! A sector's lowest level behaves as
//! `f(N) = f_inf + a1/N + a2/N^2 + a3/N^3` with `a2 = pi v (h - c/24)`.
//! Two sectors sharing a boundary condition share `f_inf` and `a1`, so the
//! scaled gap `N^2 (f_s - f_ref) / pi` tends to `v (h_s - h_ref)` with much
//! smaller corrections; the lattice velocity `v` is calibrated that way.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linkstate::SectorLabel;
use crate::spectrum::{block_eigenvalues, leading_eigenvalues, level, DENSE_LIMIT};
use crate::transfer::{build_block, Boundary, LoopWeights};

use super::kac::{kac_weight, KacParams};

/// Condition number above which a fit is rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeFit {
    pub f_inf: f64,
    /// `[a1, a2, ...]`, one per fitted correction term.
    pub corrections: Vec<f64>,
    pub residual: f64,
    pub condition: f64,
}

/// Least-squares fit of `f(N) = f_inf + sum_{k=1}^{terms} a_k / N^k`.
pub fn fit_finite_size(data: &[(usize, f64)], terms: usize) -> Result<SizeFit> {
    let cols = terms + 1;
    if data.len() < cols {
        return Err(Error::IllConditioned(format!(
            "{} sizes cannot determine {} parameters",
            data.len(),
            cols
        )));
    }
    let a = DMatrix::from_fn(data.len(), cols, |i, k| (data[i].0 as f64).powi(-(k as i32)));
    let b = DVector::from_iterator(data.len(), data.iter().map(|d| d.1));
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition < MAX_CONDITION) {
        return Err(Error::IllConditioned(format!("condition number {condition:.3e}")));
    }
    let x = svd
        .solve(&b, 1e-14 * smax)
        .map_err(|e| Error::IllConditioned(e.to_string()))?;
    let residual = (&a * &x - &b).norm();
    Ok(SizeFit {
        f_inf: x[0],
        corrections: x.iter().skip(1).copied().collect(),
        residual,
        condition,
    })
}

/// The `k` lowest levels of one sector on `n` points.
pub fn leading_levels(n: usize, x: f64, y: f64, sector: SectorLabel, boundary: Boundary<f64>, k: usize) -> Result<Vec<f64>> {
    let w = LoopWeights::new(x, y, 0.0, 0.0).with_boundary(boundary);
    let block = build_block(n, sector, &w)?;
    let ev = if block.dim() <= DENSE_LIMIT {
        block_eigenvalues(&block, k)?
    } else {
        leading_eigenvalues(|v| block.apply(v), block.dim(), k, 1e-14, 50_000)?
    };
    if ev.is_empty() {
        return Err(Error::InvalidArgument(format!("empty sector {sector} at N={n}")));
    }
    Ok(ev.iter().map(|e| level(n, e.norm())).collect())
}

/// Lowest level of one sector for each width.
pub fn lowest_levels(
    sizes: &[usize],
    x: f64,
    y: f64,
    sector: SectorLabel,
    boundary: Boundary<f64>,
) -> Result<Vec<(usize, f64)>> {
    sizes
        .iter()
        .map(|&n| Ok((n, leading_levels(n, x, y, sector, boundary.clone(), 1)?[0])))
        .collect()
}

/// `N^2 (f_s - f_ref) / pi` for matching widths.
pub fn scaled_gaps(levels: &[(usize, f64)], reference: &[(usize, f64)]) -> Result<Vec<(usize, f64)>> {
    levels
        .iter()
        .map(|&(n, f)| {
            let r = reference
                .iter()
                .find(|d| d.0 == n)
                .ok_or_else(|| Error::InvalidArgument(format!("no reference level at N={n}")))?;
            Ok((n, (n * n) as f64 * (f - r.1) / PI))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentEstimate {
    pub h: f64,
    /// Spread over sub-fits (dropping the smallest width, changing the
    /// number of correction terms).
    pub error: f64,
    pub velocity: f64,
}

fn check_sizes(data: &[(usize, f64)]) -> Result<()> {
    if data.len() < 4 {
        return Err(Error::IllConditioned("need at least 4 widths".into()));
    }
    let parity = data[0].0 % 2;
    if data.iter().any(|d| d.0 % 2 != parity) {
        return Err(Error::InvalidArgument("widths must share a parity".into()));
    }
    Ok(())
}

fn with_spread(values: &[f64], velocity: f64) -> ExponentEstimate {
    let h = values[0];
    let error = values.iter().map(|v| (v - h).abs()).fold(0.0, f64::max);
    ExponentEstimate { h, error, velocity }
}

/// Weight from the `1/N^2` coefficient of a single sector's levels. The
/// error bar also covers a fourth correction term when there are enough
/// widths to fit one.
pub fn estimate_exponent(data: &[(usize, f64)], c: f64, velocity: f64) -> Result<ExponentEstimate> {
    check_sizes(data)?;
    let h_of = |fit: SizeFit| fit.corrections[1] / (PI * velocity) + c / 24.0;
    let mut values = vec![h_of(fit_finite_size(data, 3)?)];
    if data.len() > 4 {
        values.push(h_of(fit_finite_size(&data[1..], 3)?));
    }
    if data.len() > 5 {
        values.push(h_of(fit_finite_size(data, 4)?));
    }
    Ok(with_spread(&values, velocity))
}

/// Weight from scaled gaps to a same-boundary reference of weight `h_ref`.
pub fn estimate_gap_exponent(gaps: &[(usize, f64)], h_ref: f64, velocity: f64) -> Result<ExponentEstimate> {
    check_sizes(gaps)?;
    let h_of = |fit: SizeFit| h_ref + fit.f_inf / velocity;
    let mut values = vec![h_of(fit_finite_size(gaps, 2)?)];
    values.push(h_of(fit_finite_size(&gaps[1..], 2)?));
    values.push(h_of(fit_finite_size(gaps, 3)?));
    Ok(with_spread(&values, velocity))
}

/// Velocity from the `1/N^2` coefficient of a sector of known weight.
pub fn calibrate_velocity(data: &[(usize, f64)], c: f64, h_known: f64) -> Result<f64> {
    check_sizes(data)?;
    let fit = fit_finite_size(data, 3)?;
    let denom = PI * (h_known - c / 24.0);
    if denom.abs() < 1e-12 {
        return Err(Error::IllConditioned("known weight equals c/24".into()));
    }
    Ok(fit.corrections[1] / denom)
}

/// Velocity from scaled gaps whose limit is `v * weight_gap`.
pub fn calibrate_velocity_gap(gaps: &[(usize, f64)], weight_gap: f64) -> Result<f64> {
    check_sizes(gaps)?;
    if weight_gap.abs() < 1e-12 {
        return Err(Error::IllConditioned("zero weight gap".into()));
    }
    Ok(fit_finite_size(gaps, 2)?.f_inf / weight_gap)
}

/// Sector and Kac label of a calibration reference, measured against the
/// `L = 0` ground state at the same boundary weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reference {
    pub sector: SectorLabel,
    pub r: f64,
}

impl Reference {
    /// Blobbed `L = 2` at `r = 1`, weight `h_{1,3}`.
    pub fn standard() -> Self {
        Reference {
            sector: SectorLabel::blobbed(2),
            r: 1.0,
        }
    }

    /// Unblobbed `L = 2` at `r = 1`, weight `h_{1,-1}`.
    pub fn unblobbed() -> Self {
        Reference {
            sector: SectorLabel::unblobbed(2),
            r: 1.0,
        }
    }

    /// Conjectured weight: `h_{r,r+L}` blobbed, `h_{r,r-L}` unblobbed.
    pub fn weight(&self, p: f64) -> f64 {
        sector_weight(p, self.r, self.sector)
    }
}

/// Conjectured weight of a sector at boundary label `r`.
pub fn sector_weight(p: f64, r: f64, sector: SectorLabel) -> f64 {
    let l = sector.n_strings as f64;
    let s = if sector.blobbed { r + l } else { r - l };
    kac_weight(p, r, s)
}

/// Velocity calibrated on `reference` over the given widths.
pub fn velocity_for(p: f64, sizes: &[usize], reference: Reference) -> Result<f64> {
    let k = KacParams::new(p)?;
    let y = k.y_of_r(reference.r);
    let ground = lowest_levels(sizes, k.x(), y, SectorLabel::unblobbed(0), Boundary::Saturated)?;
    let levels = lowest_levels(sizes, k.x(), y, reference.sector, Boundary::Saturated)?;
    let gaps = scaled_gaps(&levels, &ground)?;
    calibrate_velocity_gap(&gaps, reference.weight(p) - kac_weight(p, reference.r, reference.r))
}

/// One group of nearly integer-spaced gaps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapCluster {
    pub integer: usize,
    pub center: f64,
    pub multiplicity: usize,
}

/// Scaled gaps `N^2 (f_i - f_0) / (pi v)` within one sector, grouped
/// around the nearest integer.
pub fn gap_clusters(n: usize, levels: &[f64], velocity: f64) -> Vec<GapCluster> {
    let Some(&f0) = levels.first() else {
        return Vec::new();
    };
    let nn = (n * n) as f64;
    let mut out: Vec<GapCluster> = Vec::new();
    for &f in levels {
        let g = nn * (f - f0) / (PI * velocity);
        let k = g.round().max(0.0) as usize;
        match out.iter_mut().find(|c| c.integer == k) {
            Some(c) => {
                c.center = (c.center * c.multiplicity as f64 + g) / (c.multiplicity + 1) as f64;
                c.multiplicity += 1;
            }
            None => out.push(GapCluster {
                integer: k,
                center: g,
                multiplicity: 1,
            }),
        }
    }
    out.sort_by_key(|c| c.integer);
    out
}

/// Effective velocity at one width that puts the first gap of a sector at
/// 1, its level-1 descendant.
pub fn first_gap_velocity(n: usize, levels: &[f64]) -> Result<f64> {
    match levels {
        [f0, f1, ..] if f1 > f0 => Ok((n * n) as f64 * (f1 - f0) / PI),
        _ => Err(Error::InvalidArgument("need two distinct levels".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f_inf: f64, a: [f64; 3]) -> Vec<(usize, f64)> {
        [8usize, 10, 12, 14, 16]
            .iter()
            .map(|&n| {
                let x = 1.0 / n as f64;
                (n, f_inf + a[0] * x + a[1] * x * x + a[2] * x * x * x)
            })
            .collect()
    }

    #[test]
    fn exact_polynomial_is_recovered() {
        let data = synthetic(0.3, [0.1, -0.25, 0.05]);
        let fit = fit_finite_size(&data, 3).unwrap();
        assert!((fit.f_inf - 0.3).abs() < 1e-10);
        assert!((fit.corrections[1] + 0.25).abs() < 1e-7);
        let est = estimate_exponent(&data, 0.5, 1.0).unwrap();
        assert!((est.h - (-0.25 / PI + 0.5 / 24.0)).abs() < 1e-7);
        assert!((calibrate_velocity(&data, 0.5, est.h).unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn gap_form() {
        let gaps = synthetic(0.75, [0.2, -0.1, 0.0]);
        let est = estimate_gap_exponent(&gaps, 0.25, 1.5).unwrap();
        assert!((est.h - 0.75).abs() < 1e-9);
        assert!((calibrate_velocity_gap(&gaps, 0.5).unwrap() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn too_few_sizes() {
        assert!(estimate_exponent(&[(4, 0.1), (6, 0.2), (8, 0.3)], 0.5, 1.0).is_err());
        assert!(fit_finite_size(&[(4, 0.1), (4, 0.1), (4, 0.1), (4, 0.1)], 3).is_err());
        assert!(estimate_exponent(&[(4, 0.1), (5, 0.2), (6, 0.3), (8, 0.3)], 0.5, 1.0).is_err());
    }

    #[test]
    fn clusters_group_by_integer() {
        let n = 10;
        let v = 1.0;
        let lv: Vec<f64> = [0.0, 1.02, 1.97, 2.05].iter().map(|g| g * PI * v / (n * n) as f64).collect();
        let c = gap_clusters(n, &lv, v);
        assert_eq!(c.iter().map(|c| c.multiplicity).collect::<Vec<_>>(), vec![1, 1, 2]);
    }

    #[test]
    fn ising_velocity_is_close_to_one() {
        let v = velocity_for(3.0, &[4, 6, 8, 10], Reference::standard()).unwrap();
        assert!((v - 1.0).abs() < 0.02, "{v}");
    }
}
