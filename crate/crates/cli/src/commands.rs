//! Subcommand bodies. Each returns whether every check it ran passed.

use anyhow::{bail, Context, Result};
use blobloop::amplitudes::{assemble_partition, closed_form_amplitudes, invert_to_d, verify_decomposition, Char, WindingParams};
use blobloop::cabling::{compare_ghost_spectrum, verify_blob_relations};
use blobloop::cft::coincidence::sector_levels;
use blobloop::cft::fit::{lowest_levels, sector_weight};
use blobloop::cft::series::{partition_character_form, partition_verma_form, rocha_caridi, rocha_caridi_double_sum};
use blobloop::cft::{estimate_exponent, r_of_y, velocity_for, verify_level_coincidences, KacParams, Reference};
use blobloop::oracle::{enumerate_z, LambdaMode, BUDGET_BITS};
use blobloop::ring::{rat, N_VARS};
use blobloop::rsos::{sector_sum_check, verify_rsos_inclusion, RsosReport};
use blobloop::spectrum::{block_eigenvalues, LevelSet, DENSE_LIMIT};
use blobloop::transfer::{build_block, partition_function_direct, Boundary, LoopWeights};
use blobloop::{Poly, RingMode, SectorLabel, Var};
use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{parse_complex, Lambda, RunConfig, Value};
use crate::output::Sink;
use crate::Format;

fn anchor(out: &mut Sink, text: &str) -> Result<()> {
    out.json(&json!({ "anchor": text }))
}

fn lambda_text(l: &Lambda) -> String {
    match l {
        Lambda::Infinite => "inf".into(),
        Lambda::Finite(v) => v.text.clone(),
    }
}

fn require_f64(c: &RunConfig, command: &str) -> Result<()> {
    match c.ring {
        None | Some(RingMode::F64) => Ok(()),
        Some(r) => bail!("{command} works in f64 only, not {r}"),
    }
}

fn integer_r(c: &RunConfig, default: usize) -> Result<usize> {
    match c.r {
        None => Ok(default),
        Some(r) if r.fract() == 0.0 && r >= 1.0 => Ok(r as usize),
        Some(r) => bail!("this command needs an integer r >= 1, got {r}"),
    }
}

pub fn spectra(c: &RunConfig, levels: Option<usize>, out: &mut Sink) -> Result<bool> {
    require_f64(c, "spectra")?;
    let x = c.x_float(6.0)?;
    let y = c.y_float(6.0);
    let lambda = c.lambda();
    let w = LoopWeights::new(x, y, 0.0, 0.0).with_boundary(lambda.boundary());
    for n in c.widths(&[6]) {
        let sectors = if c.sector.is_empty() { SectorLabel::all(n) } else { c.sector.clone() };
        for s in sectors {
            let block = build_block(n, s, &w)?;
            let dim = block.dim();
            let k = levels
                .unwrap_or(if dim <= DENSE_LIMIT { dim } else { 10 })
                .min(dim);
            let set = LevelSet::from_eigenvalues(n, &block_eigenvalues(&block, k)?);
            out.json(&json!({
                "N": n,
                "sector": s.to_string(),
                "x": x,
                "y": y,
                "lambda": lambda_text(&lambda),
                "dim": dim,
                "levels": set,
            }))?;
        }
    }
    Ok(true)
}

/// Symbolic partition function and its two independent cross-checks.
struct SymbolicZ {
    direct: Poly,
    oracle: Option<Poly>,
    assembled: Option<Poly>,
}

fn symbolic_z(n: usize, m: usize, lambda: &Lambda) -> Result<SymbolicZ> {
    let (weights, mode, extra) = match lambda {
        Lambda::Infinite => (LoopWeights::symbolic(), LambdaMode::Saturated, 0),
        Lambda::Finite(_) => (LoopWeights::symbolic_coupling(), LambdaMode::Finite, m),
    };
    let direct = partition_function_direct(n, m, &weights)?;
    let oracle = if m * (n - 1) + extra <= BUDGET_BITS {
        Some(enumerate_z(n, m, mode)?)
    } else {
        None
    };
    let assembled = if n % 2 == 0 && *lambda == Lambda::Infinite {
        Some(assemble_partition(n, m, &invert_to_d(n / 2)?)?)
    } else {
        None
    };
    Ok(SymbolicZ {
        direct,
        oracle,
        assembled,
    })
}

fn exact(v: &Option<Value>, name: &str, default: Option<BigRational>) -> Result<BigRational> {
    match (v, default) {
        (Some(v), _) => v
            .exact
            .clone()
            .with_context(|| format!("--{name} must be an exact rational in rational mode")),
        (None, Some(d)) => Ok(d),
        (None, None) => bail!("rational mode needs an exact --{name}"),
    }
}

pub fn partition(c: &RunConfig, out: &mut Sink) -> Result<bool> {
    let n = c.single_width(4)?;
    let m = c.m.unwrap_or(2);
    if n == 0 || m == 0 {
        bail!("need N >= 1 and M >= 1");
    }
    let lambda = c.lambda();
    let ring = c.ring.unwrap_or(RingMode::Poly);
    let tol = c.tol.unwrap_or(1e-9);
    let sym = if ring == RingMode::Poly || n * m <= 4 * BUDGET_BITS {
        Some(symbolic_z(n, m, &lambda)?)
    } else {
        None
    };
    let (value, oracle, amplitudes) = match ring {
        RingMode::Poly => {
            let s = sym.context("symbolic partition function")?;
            let fix = |p: &Poly| -> Result<Poly> {
                match &lambda {
                    Lambda::Finite(v) => {
                        let q = v.exact.clone().context("--lambda must be exact in poly mode")?;
                        Ok(p.substitute(Var::Lambda, &Poly::constant(q)))
                    }
                    Lambda::Infinite => Ok(p.clone()),
                }
            };
            let z = fix(&s.direct)?;
            let oracle = s.oracle.as_ref().map(|o| fix(o).map(|o| o == z)).transpose()?;
            let amplitudes = s.assembled.as_ref().map(|a| *a == z);
            (z.to_string(), oracle, amplitudes)
        }
        RingMode::Rational => {
            if c.r.is_some() || c.alpha.is_some() {
                bail!("rational mode takes --y and --l/--m, not --r or --alpha/--beta");
            }
            let x = match (&c.x, c.p) {
                (Some(_), _) | (None, None) => exact(&c.x, "x", None)?,
                (None, Some(p)) if p == 2.0 => rat(1, 1),
                (None, Some(_)) => bail!("x(p) is irrational; pass an exact --x"),
            };
            let y = exact(&c.y, "y", None)?;
            let l = exact(&c.l, "l", Some(rat(1, 1)))?;
            let mw = exact(&c.m_weight, "m", Some(rat(1, 1)))?;
            let lam = match &lambda {
                Lambda::Infinite => None,
                Lambda::Finite(v) => Some(v.exact.clone().context("--lambda must be exact in rational mode")?),
            };
            let mut w = LoopWeights::new(x.clone(), y.clone(), l.clone(), mw.clone());
            if let Some(q) = &lam {
                w = w.with_boundary(Boundary::Coupling(q.clone()));
            }
            let z = partition_function_direct(n, m, &w)?;
            let mut vals: [BigRational; N_VARS] = std::array::from_fn(|_| rat(0, 1));
            vals[Var::X.index()] = x;
            vals[Var::Y.index()] = y;
            vals[Var::L.index()] = l;
            vals[Var::M.index()] = mw;
            vals[Var::Lambda.index()] = lam.unwrap_or_else(|| rat(0, 1));
            let (oracle, amplitudes) = match &sym {
                Some(s) => (
                    s.oracle.as_ref().map(|o| o.eval_rational(&vals) == z),
                    s.assembled.as_ref().map(|a| a.eval_rational(&vals) == z),
                ),
                None => (None, None),
            };
            (z.to_string(), oracle, amplitudes)
        }
        RingMode::F64 => {
            let x = c.x_float(6.0)?;
            let y = c.y_float(6.0);
            let (l, mw) = c.winding()?;
            if l.im.abs() > 1e-12 || mw.im.abs() > 1e-12 {
                bail!("complex winding weights (l={l}, m={mw}) need the poly ring");
            }
            let boundary = lambda.boundary();
            let lam = match &boundary {
                Boundary::Coupling(v) => *v,
                Boundary::Saturated => 0.0,
            };
            let w = LoopWeights::new(x, y, l.re, mw.re).with_boundary(boundary);
            let z = partition_function_direct(n, m, &w)?;
            let mut vals = [0.0; N_VARS];
            vals[Var::X.index()] = x;
            vals[Var::Y.index()] = y;
            vals[Var::L.index()] = l.re;
            vals[Var::M.index()] = mw.re;
            vals[Var::Lambda.index()] = lam;
            let close = |v: f64| (v - z).abs() <= tol * z.abs().max(1.0);
            let (oracle, amplitudes) = match &sym {
                Some(s) => (
                    s.oracle.as_ref().map(|o| close(o.eval_f64(&vals))),
                    s.assembled.as_ref().map(|a| close(a.eval_f64(&vals))),
                ),
                None => (None, None),
            };
            (format!("{z:e}"), oracle, amplitudes)
        }
    };
    out.json(&json!({
        "N": n,
        "M": m,
        "ring": ring.to_string(),
        "lambda": lambda_text(&lambda),
        "Z": value,
        "oracle_agrees": oracle,
        "amplitudes_agree": amplitudes,
    }))?;
    Ok(oracle != Some(false) && amplitudes != Some(false))
}

pub fn amplitudes(c: &RunConfig, out: &mut Sink) -> Result<bool> {
    let n = c.single_width(4)?;
    let m = c.m.unwrap_or(2);
    if n == 0 || n % 2 != 0 {
        bail!("amplitudes are tabulated for even N >= 2");
    }
    let tol = c.tol.unwrap_or(1e-12);
    anchor(out, "Z = sum over L of D_L K_L + D_L* K_L*, with D from the inverted character system")?;
    let table = invert_to_d(n / 2)?;
    let params = match (&c.alpha, &c.beta) {
        (Some(a), Some(b)) => Some(WindingParams::new(parse_complex(a)?, parse_complex(b)?)?),
        _ => None,
    };
    let mut ok = true;
    for k in table.labels() {
        let (big_l, starred) = match k {
            Char::Plain(j) => (2 * j, false),
            Char::Starred(j) => (2 * j, true),
        };
        let poly = table.amplitude(k);
        let mut line = json!({
            "L": big_l,
            "sector": SectorLabel::new(big_l, starred).to_string(),
            "amplitude": poly.to_string(),
        });
        if let Some(params) = &params {
            let mut vals = [Complex64::new(0.0, 0.0); N_VARS];
            vals[Var::L.index()] = params.l();
            vals[Var::M.index()] = params.m();
            let value = poly.eval_complex(&vals);
            let (cs, cp) = closed_form_amplitudes(big_l, params)?;
            let closed = if starred { cs } else { cp };
            let agrees = (value - closed).norm() <= tol * closed.norm().max(1.0);
            ok &= agrees;
            line["value"] = json!([value.re, value.im]);
            line["closed_form"] = json!([closed.re, closed.im]);
            line["agrees"] = json!(agrees);
        }
        out.json(&line)?;
    }
    let report = verify_decomposition(n, m)?;
    ok &= report.equal;
    out.json(&report)?;
    Ok(ok)
}

pub fn verify_levels(c: &RunConfig, out: &mut Sink) -> Result<bool> {
    require_f64(c, "verify levels")?;
    anchor(out, "levels of the unblobbed T_{2j+2r} lie among those of the blobbed T_{2j} at integer r")?;
    let p = c.p.unwrap_or(6.0);
    let r = integer_r(c, 1)?;
    let tol = c.tol.unwrap_or(1e-8);
    let mut ok = true;
    for n in c.widths(&[4, 6, 8]) {
        let report = verify_level_coincidences(n, p, r, tol)?;
        ok &= report.ok;
        out.json(&report)?;
    }
    Ok(ok)
}

pub fn verify_rsos(c: &RunConfig, out: &mut Sink) -> Result<bool> {
    anchor(out, "each RSOS sector spectrum lies in its loop block, with the same dominant level")?;
    let n = c.single_width(6)?;
    let p = c.integer_p(6)?;
    let tol = c.tol.unwrap_or(1e-9);
    let report = verify_rsos_inclusion(n, p, tol)?;
    for s in &report.sectors {
        out.json(s)?;
    }
    out.json(&json!({ "N": n, "p": p, "ok": report.ok }))?;
    Ok(report.ok)
}

pub fn verify_cabling(c: &RunConfig, out: &mut Sink) -> Result<bool> {
    anchor(out, "b_r from r-1 ghost strings obeys the blob relations with y = [r+1]/[r], and reproduces the scalar-y spectrum")?;
    let x = exact(&c.x, "x", Some(rat(3, 2)))?;
    let p = c.integer_p(6)?;
    let tol = c.tol.unwrap_or(1e-10);
    let rs: Vec<usize> = match c.r {
        Some(_) => vec![integer_r(c, 1)?],
        None => (1..=3).collect(),
    };
    let mut ok = true;
    for &r in &rs {
        for n in c.widths(&[1, 2, 3, 4]) {
            let relations = verify_blob_relations(r, n, &x)?;
            ok &= relations.ok;
            out.json(&relations)?;
            let spectrum = compare_ghost_spectrum(r, n, p, tol)?;
            ok &= spectrum.ok;
            out.json(&spectrum)?;
        }
    }
    Ok(ok)
}

pub fn verify_oracle(c: &RunConfig, out: &mut Sink) -> Result<bool> {
    anchor(out, "transfer-matrix partition function equals brute-force loop enumeration, exactly")?;
    let lambda = c.lambda();
    let (weights, mode) = match lambda {
        Lambda::Infinite => (LoopWeights::symbolic(), LambdaMode::Saturated),
        Lambda::Finite(_) => (LoopWeights::symbolic_coupling(), LambdaMode::Finite),
    };
    let ms: Vec<usize> = match c.m {
        Some(m) => vec![m],
        None => vec![1, 2, 3],
    };
    let mut ok = true;
    for n in c.widths(&[2, 3, 4]) {
        for &m in &ms {
            let direct = partition_function_direct(n, m, &weights)?;
            let brute = enumerate_z(n, m, mode)?;
            let equal = direct == brute;
            ok &= equal;
            out.json(&json!({
                "N": n,
                "M": m,
                "lambda": if mode == LambdaMode::Saturated { "inf" } else { "symbolic" },
                "equal": equal,
                "terms": direct.n_terms(),
            }))?;
        }
    }
    Ok(ok)
}

pub fn verify_sumda(c: &RunConfig, out: &mut Sink) -> Result<bool> {
    anchor(out, "RSOS trace in sector (d,a) as a sine-weighted sum of loop partition functions")?;
    let tol = c.tol.unwrap_or(1e-8);
    let cases: Vec<(usize, usize, usize, usize, usize)> = match (c.n.as_slice(), c.m, c.p, c.d, c.a) {
        ([], None, None, None, None) => vec![(2, 3, 1, 1, 1), (4, 3, 1, 1, 2), (6, 6, 1, 3, 1)],
        ([n], m, _, d, a) => vec![(*n, c.integer_p(3)?, d.unwrap_or(1), a.unwrap_or(1), m.unwrap_or(1))],
        _ => bail!("give a single --N with --p, --d, --a, --M, or none of them"),
    };
    let mut ok = true;
    for (n, p, d, a, m) in cases {
        let report = sector_sum_check(n, m, p, d, a, tol)?;
        ok &= report.agrees;
        out.json(&report)?;
    }
    Ok(ok)
}

pub fn verify_series(c: &RunConfig, out: &mut Sink) -> Result<bool> {
    anchor(out, "partition function at integer r regrouped into K characters; irreducible characters as alternating K sums")?;
    let p = c.integer_p(6)? as i64;
    let cutoff = c.cutoff.unwrap_or(8);
    let rs: Vec<i64> = match c.r {
        Some(_) => vec![integer_r(c, 1)? as i64],
        None => (1..=4).collect(),
    };
    let mut ok = true;
    for r in rs {
        let equal = partition_verma_form(p, r, cutoff) == partition_character_form(p, r, cutoff);
        ok &= equal;
        out.json(&json!({ "identity": "regrouping", "p": p, "r": r, "cutoff": cutoff, "equal": equal }))?;
    }
    for d in 1..p {
        for a in 1..=p {
            let chi = rocha_caridi(p, d, a, cutoff);
            let equal = chi == rocha_caridi_double_sum(p, d, a, cutoff);
            ok &= equal;
            out.json(&json!({
                "identity": "irreducible character",
                "p": p,
                "d": d,
                "a": a,
                "cutoff": cutoff,
                "series": chi.to_string(),
                "equal": equal,
            }))?;
        }
    }
    Ok(ok)
}

pub fn scan_y(c: &RunConfig, y_min: f64, y_max: f64, steps: usize, out: &mut Sink) -> Result<bool> {
    require_f64(c, "scan-y")?;
    if steps == 0 {
        bail!("need at least one grid point");
    }
    let p = c.p.unwrap_or(3.0);
    let k = KacParams::new(p)?;
    let sizes = c.widths(&[6, 8, 10, 12, 14, 16]);
    let sector = match c.sector.as_slice() {
        [] => SectorLabel::unblobbed(0),
        [s] => *s,
        _ => bail!("scan-y takes a single --sector"),
    };
    let boundary = c.lambda().boundary();
    let velocity = velocity_for(p, &sizes, Reference::standard())?;
    let grid: Vec<f64> = (0..steps)
        .map(|i| if steps == 1 { y_min } else { y_min + (y_max - y_min) * i as f64 / (steps - 1) as f64 })
        .collect();
    let rows: Vec<Vec<String>> = grid
        .par_iter()
        .map(|&y| -> Result<Vec<String>> {
            let r = r_of_y(p, y)?;
            let data = lowest_levels(&sizes, k.x(), y, sector, boundary.clone())?;
            let est = estimate_exponent(&data, k.c, velocity)?;
            let h_kac = sector_weight(p, r, sector);
            let mut row = vec![y.to_string(), r.to_string()];
            row.extend(data.iter().map(|d| d.1.to_string()));
            row.extend([est.h, h_kac, est.h - h_kac, est.error].map(|v| v.to_string()));
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut w = out.csv();
    let mut header = vec!["y".to_string(), "r".to_string()];
    header.extend(sizes.iter().map(|n| format!("f_{n}")));
    header.extend(["h_extrapolated", "h_kac", "deviation", "h_error"].map(String::from));
    w.write_record(&header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(true)
}

fn column_order(s: &SectorLabel) -> (bool, bool, usize) {
    (s.n_strings != 0, !s.blobbed, s.n_strings)
}

pub fn table1(c: &RunConfig, format: Format, out: &mut Sink) -> Result<bool> {
    require_f64(c, "table1")?;
    let n = c.single_width(6)?;
    let tol = c.tol.unwrap_or(1e-9);
    let x = c.x_float(6.0)?;
    let y = c.y_float(6.0);
    let levels = sector_levels(n, x, y)?;
    let mut entries: Vec<(f64, SectorLabel, usize)> = levels
        .iter()
        .flat_map(|(s, set)| set.levels.iter().map(move |l| (l.f, *s, l.multiplicity)))
        .collect();
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(column_order(&a.1).cmp(&column_order(&b.1))));
    // rows of coinciding levels
    let mut rows: Vec<(f64, Vec<(SectorLabel, usize)>)> = Vec::new();
    for (f, s, m) in entries {
        match rows.last_mut() {
            Some(row) if (f - row.0).abs() <= tol => row.1.push((s, m)),
            _ => rows.push((f, vec![(s, m)])),
        }
    }
    match format {
        Format::Csv => {
            let mut w = out.csv();
            w.write_record(["f", "sector", "multiplicity"])?;
            for (f, cells) in &rows {
                for (s, m) in cells {
                    w.write_record([format!("{f:.12}"), s.to_string(), m.to_string()])?;
                }
            }
            w.flush()?;
        }
        Format::Text => {
            let mut cols: Vec<SectorLabel> = levels.iter().filter(|(_, l)| !l.is_empty()).map(|(s, _)| *s).collect();
            cols.sort_by_key(column_order);
            let mut text = format!("{:>16}", "f");
            for s in &cols {
                text.push_str(&format!(" {:>4}", s.to_string()));
            }
            text.push('\n');
            for (f, cells) in &rows {
                text.push_str(&format!("{f:>16.12}"));
                for s in &cols {
                    match cells.iter().find(|(t, _)| t == s) {
                        Some((_, m)) => text.push_str(&format!(" {m:>4}")),
                        None => text.push_str("     "),
                    }
                }
                text.push('\n');
            }
            out.text(&text)?;
        }
    }
    Ok(true)
}

pub fn table2(c: &RunConfig, format: Format, all: bool, out: &mut Sink) -> Result<bool> {
    let n = c.single_width(6)?;
    let p = c.integer_p(6)?;
    let tol = c.tol.unwrap_or(1e-9);
    let report = verify_rsos_inclusion(n, p, tol)?;
    match format {
        Format::Text => out.text(&report.render_table(tol, !all))?,
        Format::Csv => {
            let rows = report.level_rows(tol, !all);
            let cols = RsosReport::columns(&rows);
            let mut w = out.csv();
            w.write_record(["f", "d", "a", "sector", "r", "multiplicity"])?;
            for row in &rows {
                for b in cols.iter().filter(|b| row.multiplicities.contains_key(b)) {
                    w.write_record([
                        format!("{:.12}", row.f),
                        row.d.to_string(),
                        row.a.to_string(),
                        b.sector.to_string(),
                        b.r.to_string(),
                        row.multiplicities[b].to_string(),
                    ])?;
                }
            }
            w.flush()?;
        }
    }
    Ok(true)
}
