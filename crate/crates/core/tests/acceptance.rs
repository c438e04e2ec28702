//! Acceptance suite: one PASS/FAIL line per criterion, with every tolerance
//! and time budget pinned below. Runs without the libtest harness so the
//! lines are always printed; exits nonzero on any unexpected failure.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use blobloop::amplitudes::{closed_form_amplitudes, invert_to_d, recursion_failure, verify_decomposition, Char, WindingParams};
use blobloop::cabling::{compare_ghost_spectrum, verify_blob_relations};
use blobloop::cft::coincidence::sector_levels;
use blobloop::cft::fit::{
    calibrate_velocity, first_gap_velocity, gap_clusters, leading_levels, lowest_levels, scaled_gaps,
};
use blobloop::cft::series::{partition_character_form, partition_verma_form, rocha_caridi, rocha_caridi_double_sum};
use blobloop::cft::{
    central_charge, estimate_exponent, estimate_gap_exponent, kac_weight, r_of_y, velocity_for, verify_level_coincidences,
    y_of_r, ExponentEstimate, KacParams, Reference,
};
use blobloop::linkstate::{enumerate_states, sector_dimension};
use blobloop::oracle::{enumerate_z, LambdaMode};
use blobloop::ring::{binomial, rat, N_VARS};
use blobloop::rsos::{all_sectors, enumerate_heights, sector_sum_check, verify_rsos_inclusion, walk_count, LoopBlock};
use blobloop::transfer::{partition_function_direct, reachable_full_states, Boundary, LoopWeights};
use blobloop::{SectorLabel, Var};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const AMPLITUDE_BUDGET: Duration = Duration::from_secs(300);
const TABLE1_BUDGET: Duration = Duration::from_secs(10);
const TABLE2_BUDGET: Duration = Duration::from_secs(120);

const CLOSED_FORM_TOL: f64 = 1e-12;
const TABLE_TOL: f64 = 1e-9;
const COINCIDENCE_TOL: f64 = 1e-8;
const DOMINANT_TOL: f64 = 1e-10;
const EXPONENT_REL_TOL: f64 = 0.05;
const EXPONENT_ABS_TOL: f64 = 0.01;
const STRING_EXPONENT_REL_TOL: f64 = 0.10;
const CLUSTER_TOL: f64 = 0.08;
const GHOST_TOL: f64 = 1e-10;
const SECTOR_SUM_TOL: f64 = 1e-8;

/// Width ladder for the extrapolations.
const SIZES: [usize; 6] = [6, 8, 10, 12, 14, 16];

/// Sub-checks that fail for documented reasons. The suite still reports
/// them as FAIL; it only refuses to treat them as regressions.
const KNOWN_FAILURES: [&str; 1] = ["lambda-independence at y=1"];

/// Criteria whose failure is reported but never fails the suite.
const REPORT_ONLY: [usize; 1] = [11];

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

fn within_budget(checks: &mut Vec<Check>, start: Instant, budget: Duration) {
    let took = start.elapsed();
    checks.push(Check::new(
        "runtime",
        took <= budget,
        format!("{:.2}s of {}s", took.as_secs_f64(), budget.as_secs()),
    ));
}

fn oracle_equivalence() -> Vec<Check> {
    let start = Instant::now();
    let mut checks = Vec::new();
    let mut mismatches = Vec::new();
    for n in 2..=4 {
        for m in 1..=3 {
            let direct = partition_function_direct(n, m, &LoopWeights::symbolic()).expect("direct Z");
            let brute = enumerate_z(n, m, LambdaMode::Saturated).expect("enumerated Z");
            if direct != brute || !direct.is_integral() {
                mismatches.push(format!("N={n} M={m}"));
            }
        }
    }
    checks.push(Check::new("exact polynomial equality", mismatches.is_empty(), mismatches.join(", ")));
    within_budget(&mut checks, start, ORACLE_BUDGET);
    checks
}

fn random_params(rng: &mut ChaCha8Rng) -> WindingParams {
    loop {
        let alpha = if rng.gen_bool(0.5) {
            Complex64::new(0.0, rng.gen_range(0.05..3.1))
        } else {
            Complex64::new(rng.gen_range(-1.0..1.0), 0.0)
        };
        let beta = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.5..1.5));
        if beta.sinh().norm() > 0.1 {
            return WindingParams::new(alpha, beta).expect("admissible beta");
        }
    }
}

fn amplitude_theorem() -> Vec<Check> {
    let start = Instant::now();
    let mut checks = Vec::new();
    let mut failed = Vec::new();
    for n in [2, 4, 6, 8] {
        for m in [1, 2, 4] {
            let report = verify_decomposition(n, m).expect("decomposition");
            if !report.equal {
                failed.push(format!("N={n} M={m}"));
            }
        }
    }
    checks.push(Check::new("Z = sum D K, exact", failed.is_empty(), failed.join(", ")));

    let table = invert_to_d(6).expect("inversion");
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let params = random_params(&mut rng);
        let mut vals = [Complex64::new(0.0, 0.0); N_VARS];
        vals[Var::L.index()] = params.l();
        vals[Var::M.index()] = params.m();
        for j in 0..=5 {
            let (starred, plain) = closed_form_amplitudes(2 * j, &params).expect("closed form");
            let p = table.amplitude(Char::Plain(j)).eval_complex(&vals);
            let s = table.amplitude(Char::Starred(j)).eval_complex(&vals);
            worst = worst
                .max((p - plain).norm() / plain.norm().max(1.0))
                .max((s - starred).norm() / starred.norm().max(1.0));
        }
    }
    checks.push(Check::new(
        "closed form = inverted, 20 points, L <= 10",
        worst <= CLOSED_FORM_TOL,
        format!("max rel dev {worst:.2e}"),
    ));
    within_budget(&mut checks, start, AMPLITUDE_BUDGET);
    checks
}

struct FixtureRow {
    f: f64,
    sector: SectorLabel,
    multiplicity: usize,
}

fn table1_fixture() -> Vec<FixtureRow> {
    include_str!("fixtures/loop_levels_n6_p6_r1.csv")
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            FixtureRow {
                f: c[0].parse().expect("level"),
                sector: c[1].parse().expect("sector"),
                multiplicity: c[2].parse().expect("multiplicity"),
            }
        })
        .collect()
}

fn table1() -> Vec<Check> {
    let start = Instant::now();
    let mut checks = Vec::new();
    let k = KacParams::new(6.0).expect("p");
    let levels: BTreeMap<SectorLabel, _> = sector_levels(6, k.x(), y_of_r(6.0, 1.0))
        .expect("levels")
        .into_iter()
        .collect();
    let fixture = table1_fixture();

    let mut bad = Vec::new();
    for row in &fixture {
        let got = levels[&row.sector].multiplicity_of(row.f, TABLE_TOL);
        if got != row.multiplicity {
            bad.push(format!("{} {}: {got} vs {}", row.f, row.sector, row.multiplicity));
        }
    }
    let printed: usize = fixture.iter().map(|r| r.multiplicity).sum();
    let computed: usize = levels.values().map(|l| l.len()).sum();
    let rows = {
        let mut fs: Vec<f64> = fixture.iter().map(|r| r.f).collect();
        fs.dedup();
        fs.len()
    };
    checks.push(Check::new(
        "25 levels with multiplicities",
        bad.is_empty() && printed == computed && rows == 25,
        if bad.is_empty() {
            format!("{rows} rows, {computed} eigenvalues")
        } else {
            bad.join("; ")
        },
    ));

    let sub = |a: SectorLabel, b: SectorLabel| levels[&a].is_subset_of(&levels[&b], TABLE_TOL);
    let strict = |a: SectorLabel, b: SectorLabel| sub(a, b) && levels[&a].len() < levels[&b].len();
    checks.push(Check::new(
        "T2 < T0*, T4 < T2*",
        strict(SectorLabel::unblobbed(2), SectorLabel::unblobbed(0))
            && strict(SectorLabel::unblobbed(4), SectorLabel::blobbed(2)),
        "",
    ));
    let extra = -0.085859268861;
    checks.push(Check::new(
        "extra coincidence T2*/T4*",
        levels[&SectorLabel::blobbed(2)].multiplicity_of(extra, TABLE_TOL) == 1
            && levels[&SectorLabel::blobbed(4)].multiplicity_of(extra, TABLE_TOL) == 1,
        format!("{extra}"),
    ));
    within_budget(&mut checks, start, TABLE1_BUDGET);
    checks
}

fn coincidences() -> Vec<Check> {
    let mut failed = Vec::new();
    let mut count = 0;
    for p in [3.0, 4.0, 5.0, 6.0] {
        for r in [1, 2] {
            for n in [4, 6, 8] {
                let report = verify_level_coincidences(n, p, r, COINCIDENCE_TOL).expect("coincidences");
                count += report.checks.len();
                if !report.ok {
                    failed.push(format!("p={p} r={r} N={n}"));
                }
            }
        }
    }
    vec![Check::new(
        "T_{2j+2r} in T_{2j}*",
        failed.is_empty() && count > 0,
        if failed.is_empty() {
            format!("{count} inclusions")
        } else {
            failed.join(", ")
        },
    )]
}

struct Table2Row {
    f: f64,
    d: usize,
    a: usize,
    block: LoopBlock,
    multiplicity: usize,
}

fn table2_fixture() -> Vec<Table2Row> {
    include_str!("fixtures/rsos_levels_n6_p6.csv")
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            Table2Row {
                f: c[0].parse().expect("level"),
                d: c[1].parse().expect("d"),
                a: c[2].parse().expect("a"),
                block: LoopBlock {
                    sector: c[3].parse().expect("sector"),
                    r: c[4].parse().expect("r"),
                },
                multiplicity: c[5].parse().expect("multiplicity"),
            }
        })
        .collect()
}

fn table2() -> Vec<Check> {
    let start = Instant::now();
    let mut checks = Vec::new();
    let report = verify_rsos_inclusion(6, 6, TABLE_TOL).expect("rsos report");
    let rows = report.level_rows(TABLE_TOL, true);
    let fixture = table2_fixture();

    // group printed entries per (f, d, a) row
    let mut printed: Vec<(f64, usize, usize, BTreeMap<LoopBlock, usize>)> = Vec::new();
    for e in &fixture {
        match printed
            .iter_mut()
            .find(|p| p.1 == e.d && p.2 == e.a && (p.0 - e.f).abs() <= TABLE_TOL)
        {
            Some(p) => {
                p.3.insert(e.block, e.multiplicity);
            }
            None => printed.push((e.f, e.d, e.a, BTreeMap::from([(e.block, e.multiplicity)]))),
        }
    }
    let mut used = vec![false; rows.len()];
    let mut bad = Vec::new();
    for (f, d, a, mult) in &printed {
        let hit = rows
            .iter()
            .enumerate()
            .find(|(i, r)| !used[*i] && r.d == *d && r.a == *a && (r.f - f).abs() <= TABLE_TOL);
        match hit {
            Some((i, r)) => {
                used[i] = true;
                if &r.multiplicities != mult {
                    bad.push(format!("{f} ({d},{a}): multiplicities {:?}", r.multiplicities));
                }
            }
            None => bad.push(format!("{f} ({d},{a}) missing")),
        }
    }
    let extra = used.iter().filter(|u| !**u).count();
    checks.push(Check::new(
        "rows and block multiplicities",
        bad.is_empty() && extra == 0,
        if bad.is_empty() && extra == 0 {
            format!("{} rows", printed.len())
        } else {
            format!("{}; {extra} unprinted rows", bad.join("; "))
        },
    ));

    let worst = report
        .sectors
        .iter()
        .map(|s| (s.dominant_rsos - s.dominant_loop).abs())
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "dominant levels equal",
        worst <= DOMINANT_TOL && report.ok,
        format!("max dev {worst:.1e}"),
    ));
    within_budget(&mut checks, start, TABLE2_BUDGET);
    checks
}

fn kac_check(name: &str, est: &ExponentEstimate, target: f64, rel: f64, abs: f64) -> Check {
    let tol = (rel * target.abs()).max(abs);
    Check::new(
        name,
        (est.h - target).abs() <= tol,
        format!("{:.5} +- {:.5} vs {target:.5}", est.h, est.error),
    )
}

fn exponents() -> Vec<Check> {
    let p = 3.0;
    let k = KacParams::new(p).expect("p");
    let c = central_charge(p);
    let x = k.x();
    let mut checks = Vec::new();
    let velocity = velocity_for(p, &SIZES, Reference::standard()).expect("velocity");
    let ground = SectorLabel::unblobbed(0);

    let mut at_twist = Vec::new();
    for (label, y) in [("y(1)", y_of_r(p, 1.0)), ("y=1", 1.0), ("y(2)", y_of_r(p, 2.0))] {
        let r = r_of_y(p, y).expect("r");
        let target = kac_weight(p, r, r);
        for (mode, boundary) in [("inf", Boundary::Saturated), ("1", Boundary::Coupling(1.0))] {
            let data = lowest_levels(&SIZES, x, y, ground, boundary).expect("levels");
            let est = estimate_exponent(&data, c, velocity).expect("fit");
            if label == "y=1" {
                at_twist.push(est.clone());
            }
            if mode == "inf" {
                checks.push(kac_check(
                    &format!("L=0 at {label}"),
                    &est,
                    target,
                    EXPONENT_REL_TOL,
                    EXPONENT_ABS_TOL,
                ));
            } else {
                println!("    note: L=0 at {label}, lambda=1: {:.5} +- {:.5}", est.h, est.error);
            }
        }
    }

    let y1 = y_of_r(p, 1.0);
    let ground_levels = lowest_levels(&SIZES, x, y1, ground, Boundary::Saturated).expect("levels");
    let own_velocity = calibrate_velocity(&ground_levels, c, kac_weight(p, 1.0, 1.0)).expect("velocity");
    let blobbed = lowest_levels(&SIZES, x, y1, SectorLabel::blobbed(2), Boundary::Saturated).expect("levels");
    let est = estimate_exponent(&blobbed, c, own_velocity).expect("fit");
    checks.push(kac_check("blobbed L=2 r=1", &est, 0.5, STRING_EXPONENT_REL_TOL, 0.0));

    let unblobbed = lowest_levels(&SIZES, x, y1, SectorLabel::unblobbed(2), Boundary::Saturated).expect("levels");
    let gaps = scaled_gaps(&unblobbed, &ground_levels).expect("gaps");
    let est = estimate_gap_exponent(&gaps, kac_weight(p, 1.0, 1.0), velocity).expect("fit");
    checks.push(kac_check("unblobbed L=2 r=1", &est, 1.0, STRING_EXPONENT_REL_TOL, 0.0));

    let (sat, one) = (&at_twist[0], &at_twist[1]);
    checks.push(Check::new(
        KNOWN_FAILURES[0],
        (sat.h - one.h).abs() <= sat.error + one.error,
        format!(
            "inf {:.5} +- {:.5}, 1 {:.5} +- {:.5}",
            sat.h, sat.error, one.h, one.error
        ),
    ));
    checks
}

fn degeneracies() -> Vec<Check> {
    let p = 3.0;
    let n = 16;
    let k = KacParams::new(p).expect("p");
    let levels = leading_levels(n, k.x(), y_of_r(p, 1.0), SectorLabel::blobbed(2), Boundary::Saturated, 8)
        .expect("levels");
    let v = first_gap_velocity(n, &levels).expect("velocity");
    let clusters = gap_clusters(n, &levels, v);
    let first: Vec<_> = clusters.iter().take(3).collect();
    let pass = first.len() == 3
        && first.iter().zip(0..).all(|(c, i)| c.integer == i)
        && first.iter().map(|c| c.multiplicity).eq([1, 1, 2])
        && first.iter().all(|c| (c.center - c.integer as f64).abs() <= CLUSTER_TOL);
    let detail = first
        .iter()
        .map(|c| format!("{}x{:.3}", c.multiplicity, c.center))
        .collect::<Vec<_>>()
        .join(" ");
    vec![Check::new("clusters 1,1,2", pass, format!("{detail} (v={v:.4})"))]
}

fn cabling() -> Vec<Check> {
    let x = rat(3, 2);
    let mut failed = Vec::new();
    for r in 1..=4 {
        for n in 1..=4 {
            let report = verify_blob_relations(r, n, &x).expect("relations");
            if !report.ok {
                failed.push(format!("r={r} N={n}"));
            }
        }
    }
    let relations = Check::new("exact relations at x=3/2", failed.is_empty(), failed.join(", "));

    let mut failed = Vec::new();
    let mut worst: f64 = 0.0;
    for p in 3..=6 {
        for r in 1..=3 {
            for n in 1..=4 {
                let report = compare_ghost_spectrum(r, n, p, GHOST_TOL).expect("ghost spectrum");
                worst = worst.max(report.max_deviation);
                if !report.ok || !report.ghost_subset {
                    failed.push(format!("p={p} r={r} N={n}"));
                }
            }
        }
    }
    let spectra = Check::new(
        "ghost spectrum = scalar y",
        failed.is_empty(),
        if failed.is_empty() {
            format!("max dev {worst:.1e}")
        } else {
            failed.join(", ")
        },
    );
    vec![relations, spectra]
}

fn structural_counts() -> Vec<Check> {
    let mut bad = Vec::new();
    for n in 1..=12usize {
        for s in SectorLabel::all(n) {
            let strings = s.n_strings as i64;
            let k = if s.blobbed { (n as i64 - strings) / 2 } else { (n as i64 - strings - 2) / 2 };
            let expected = usize::try_from(&binomial(n as i64 - 1, k)).expect("fits");
            let got = enumerate_states(n, s).expect("states").len();
            if got != expected || sector_dimension(n, s).expect("dim") != expected {
                bad.push(format!("N={n} {s}"));
            }
        }
    }
    let dims = Check::new("dimensions = binomials, N <= 12", bad.is_empty(), bad.join(", "));

    let full = reachable_full_states(4, true).len();
    let squares: usize = SectorLabel::all(4)
        .into_iter()
        .map(|s| sector_dimension(4, s).expect("dim").pow(2))
        .sum();
    let full_check = Check::new("full states at N=4", full == 20 && squares == 20, format!("{full}"));

    let mut bad = Vec::new();
    for n in 2..=10 {
        for p in 3..=8 {
            for s in all_sectors(n, p) {
                if enumerate_heights(n, p, &s).len() as u64 != walk_count(n, p, &s) {
                    bad.push(format!("N={n} p={p} ({},{})", s.d, s.a));
                }
            }
        }
    }
    let walks = Check::new("RSOS dimensions = walk counts", bad.is_empty(), bad.join(", "));
    vec![dims, full_check, walks]
}

fn identities() -> Vec<Check> {
    let table = invert_to_d(7).expect("inversion");
    let recursion = recursion_failure(&table, 10);
    let rec = Check::new(
        "amplitude recursion, L <= 10",
        recursion.is_none(),
        recursion.map_or(String::new(), |l| format!("fails at L={l}")),
    );

    let mut bad = Vec::new();
    for p in [3, 4, 5, 6] {
        for r in 1..=4 {
            if partition_verma_form(p, r, 8) != partition_character_form(p, r, 8) {
                bad.push(format!("p={p} r={r}"));
            }
        }
    }
    let series = Check::new("partition series regrouping, cutoff 8", bad.is_empty(), bad.join(", "));

    let mut bad = Vec::new();
    for p in [3i64, 4, 5, 6] {
        for d in 1..p {
            for a in 1..=p {
                if rocha_caridi(p, d, a, 8) != rocha_caridi_double_sum(p, d, a, 8) {
                    bad.push(format!("p={p} ({d},{a})"));
                }
            }
        }
    }
    let chars = Check::new("irreducible characters consistent, cutoff 8", bad.is_empty(), bad.join(", "));
    vec![rec, series, chars]
}

fn sector_sums() -> Vec<Check> {
    [(2, 3, 1, 1, 1), (4, 3, 1, 1, 2), (6, 6, 1, 3, 1)]
        .into_iter()
        .map(|(n, p, d, a, m)| {
            let name = format!("(N,p,d,a,M)=({n},{p},{d},{a},{m})");
            match sector_sum_check(n, m, p, d, a, SECTOR_SUM_TOL) {
                Ok(r) => Check::new(name, r.agrees, format!("dev {:.1e}", r.deviation)),
                Err(e) => Check::new(name, false, e.to_string()),
            }
        })
        .collect()
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, fn() -> Vec<Check>); 11] = [
        (1, "oracle equivalence", oracle_equivalence),
        (2, "amplitude theorem", amplitude_theorem),
        (3, "loop levels N=6 p=6 r=1", table1),
        (4, "level coincidences", coincidences),
        (5, "RSOS levels N=6 p=6", table2),
        (6, "exponent extrapolation", exponents),
        (7, "degeneracy counting", degeneracies),
        (8, "cabling", cabling),
        (9, "structural counts", structural_counts),
        (10, "recursion and series identities", identities),
        (11, "sector sums (exploratory)", sector_sums),
    ];
    let mut regressions = Vec::new();
    for (id, title, run) in criteria {
        let start = Instant::now();
        let checks = run();
        let pass = checks.iter().all(|c| c.pass);
        println!(
            "{} [{id:>2}] {title} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        for c in &checks {
            let known = KNOWN_FAILURES.contains(&c.name.as_str());
            let tag = match (c.pass, known) {
                (true, false) => "ok",
                (true, true) => "ok (listed as known failure)",
                (false, true) => "FAIL (known)",
                (false, false) if REPORT_ONLY.contains(&id) => "FAIL (report only)",
                (false, false) => "FAIL",
            };
            println!("    {tag}: {} {}", c.name, c.detail);
            if !c.pass && !known && !REPORT_ONLY.contains(&id) {
                regressions.push(format!("[{id}] {}", c.name));
            }
        }
    }
    if regressions.is_empty() {
        println!("acceptance: no unexpected failures");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures: {}", regressions.join(", "));
        ExitCode::FAILURE
    }
}
