//! Shared inputs for the benchmarks in `benches/`.

use blobloop::cft::{y_of_r, KacParams};
use blobloop::transfer::LoopWeights;

/// Critical weights at minimal-model `p`, boundary label `r`, unit
/// winding weights.
pub fn critical_weights(p: f64, r: f64) -> LoopWeights<f64> {
    let x = KacParams::new(p).expect("p > 1").x();
    LoopWeights::new(x, y_of_r(p, r), 1.0, 1.0)
}
