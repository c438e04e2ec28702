use blobloop::oracle::{enumerate_z, LambdaMode};
use blobloop::transfer::{partition_function_direct, LoopWeights};

#[test]
fn transfer_matches_oracle_saturated() {
    for n in 2..=4 {
        for m in 1..=3 {
            let direct = partition_function_direct(n, m, &LoopWeights::symbolic()).unwrap();
            let brute = enumerate_z(n, m, LambdaMode::Saturated).unwrap();
            assert_eq!(direct, brute, "N={n} M={m}");
        }
    }
}

#[test]
fn transfer_matches_oracle_finite_coupling() {
    for n in 1..=4 {
        for m in 1..=3 {
            let direct = partition_function_direct(n, m, &LoopWeights::symbolic_coupling()).unwrap();
            let brute = enumerate_z(n, m, LambdaMode::Finite).unwrap();
            assert_eq!(direct, brute, "N={n} M={m}");
        }
    }
}

#[test]
fn odd_widths_and_longer_cylinders() {
    for (n, m) in [(5, 2), (5, 3), (6, 2), (3, 5)] {
        let direct = partition_function_direct(n, m, &LoopWeights::symbolic()).unwrap();
        let brute = enumerate_z(n, m, LambdaMode::Saturated).unwrap();
        assert_eq!(direct, brute, "N={n} M={m}");
    }
}
