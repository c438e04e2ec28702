//! Finite-size level coincidences between blobbed and unblobbed sectors at
//! integer Kac label `r`: the spectrum of `T_{2j+2r}` is contained in that of
//! `T_{2j}*`.

use serde::Serialize;

use crate::error::Result;
use crate::linkstate::SectorLabel;
use crate::spectrum::{block_eigenvalues, LevelSet};
use crate::transfer::{build_block, LoopWeights};

use super::kac::{y_of_r, KacParams};

/// Level set of every sector of `n` points at `(x, y)`, saturated coupling.
pub fn sector_levels(n: usize, x: f64, y: f64) -> Result<Vec<(SectorLabel, LevelSet)>> {
    let w = LoopWeights::new(x, y, 0.0, 0.0);
    let mut out = Vec::new();
    for s in SectorLabel::all(n) {
        let block = build_block(n, s, &w)?;
        let ev = block_eigenvalues(&block, block.dim())?;
        out.push((s, LevelSet::from_eigenvalues(n, &ev)));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionCheck {
    pub j: usize,
    pub subset: String,
    pub superset: String,
    pub matched: Vec<f64>,
    pub orphans: Vec<f64>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub p: f64,
    pub r: usize,
    pub y: f64,
    pub checks: Vec<InclusionCheck>,
    pub ok: bool,
}

/// Checks `T_{2j+2r} ⊆ T_{2j}*` (as level multisets) for every `j` with a
/// non-empty `T_{2j+2r}`.
pub fn verify_level_coincidences(n: usize, p: f64, r: usize, tol: f64) -> Result<CoincidenceReport> {
    let k = KacParams::new(p)?;
    let y = y_of_r(p, r as f64);
    let levels = sector_levels(n, k.x(), y)?;
    let find = |s: SectorLabel| levels.iter().find(|(t, _)| *t == s).map(|(_, l)| l);
    let mut checks = Vec::new();
    let mut j = 0;
    while 2 * j + 2 * r <= n {
        let sub_label = SectorLabel::unblobbed(2 * j + 2 * r);
        let sup_label = SectorLabel::new(2 * j, true);
        if let (Some(sub), Some(sup)) = (find(sub_label), find(sup_label)) {
            let orphans = sub.orphans_in(sup, tol);
            let matched = sub
                .levels
                .iter()
                .filter(|l| sup.multiplicity_of(l.f, tol) > 0)
                .map(|l| l.f)
                .collect();
            checks.push(InclusionCheck {
                j,
                subset: sub_label.to_string(),
                superset: if j == 0 { "T0*".into() } else { sup_label.to_string() },
                matched,
                ok: orphans.is_empty(),
                orphans,
            });
        }
        j += 1;
    }
    let ok = checks.iter().all(|c| c.ok);
    Ok(CoincidenceReport { n, p, r, y, checks, ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_case() {
        let rep = verify_level_coincidences(6, 6.0, 1, 1e-9).unwrap();
        assert!(rep.ok, "{rep:?}");
        assert_eq!(rep.checks.len(), 2);
        assert_eq!(rep.checks[0].matched.len(), 5);
        assert!(rep.checks[0].matched.iter().any(|f| (f + 0.247750936031).abs() < 1e-9));
    }
}
