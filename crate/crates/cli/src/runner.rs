//! Subcommand drivers: job orchestration over level ranges with bounded
//! parallelism and deterministic, order-independent result assembly.

use crate::output;
use rayon::prelude::*;
use std::collections::BTreeSet;
use weight1_core::cyclotomic::{factor_prime, ResidueField};
use weight1_core::dirichlet::{all_characters, conjugacy_classes, DirichletChar};
use weight1_core::weightone::{
    self, modp_scan_level, run_job, scan_unit, trivial_vanishing, GeometryFacts, JobStatus,
    ModpFinding, WeightOneReport,
};

/// Resolve a character argument: either a p_a label ("2_2 13_3") or a
/// canonical key ("N52_1_2"); returns the odd characters matching.
fn resolve_character(n: u64, arg: &str) -> Result<Vec<DirichletChar>, String> {
    if let Some(rest) = arg.strip_prefix('N') {
        let mut parts = rest.split('_');
        let modulus: u64 = parts
            .next()
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| format!("bad canonical key {:?}", arg))?;
        if modulus != n {
            return Err(format!("canonical key modulus {} does not match level {}", modulus, n));
        }
        let exps: Result<Vec<u64>, _> = parts.map(|x| x.parse()).collect();
        let exps = exps.map_err(|_| format!("bad canonical key {:?}", arg))?;
        let chi = DirichletChar { modulus: n, exps };
        if chi.canonical_key() != arg {
            return Err(format!("malformed canonical key {:?}", arg));
        }
        return Ok(vec![chi]);
    }
    let all = weight1_core::dirichlet::from_local_label(arg, n)?;
    Ok(all)
}

fn validate_precision(prec: &str, max_n: u64) -> Result<Option<i64>, String> {
    if prec == "auto" {
        return Ok(None);
    }
    let p: i64 = prec.parse().map_err(|_| format!("bad precision {:?}", prec))?;
    let bound = GeometryFacts::new(max_n).certification_precision();
    if p < bound {
        return Err(format!(
            "explicit precision {} is below the certification bound {} for N = {}",
            p, bound, max_n
        ));
    }
    Ok(Some(p))
}

pub fn cmd_dims(
    (lo, hi): (u64, u64),
    character: Option<&str>,
    prec: &str,
    modp: bool,
    suspects: &[u64],
    json: bool,
    jobs: usize,
) -> Result<u8, String> {
    validate_precision(prec, hi)?;
    // collect the per-class work items
    let mut items: Vec<(u64, DirichletChar, usize)> = Vec::new();
    for n in lo..=hi {
        if trivial_vanishing(n).is_some() {
            continue;
        }
        let chars = match character {
            Some(arg) => resolve_character(n, arg).unwrap_or_default(),
            None => all_characters(n),
        };
        for class in conjugacy_classes(&chars) {
            if !class.representative.is_odd() {
                continue;
            }
            items.push((n, class.representative.clone(), class.members.len()));
        }
    }
    let reports: Vec<WeightOneReport> = if jobs > 1 {
        let mut r: Vec<(usize, WeightOneReport)> = items
            .par_iter()
            .enumerate()
            .map(|(i, (n, chi, size))| {
                let job = run_job(*n, chi);
                (i, WeightOneReport::from_job(&job, *size, 30))
            })
            .collect();
        r.sort_by_key(|&(i, _)| i);
        r.into_iter().map(|(_, x)| x).collect()
    } else {
        items
            .iter()
            .map(|(n, chi, size)| WeightOneReport::from_job(&run_job(*n, chi), *size, 30))
            .collect()
    };
    let unresolved = reports.iter().filter(|r| r.status == JobStatus::Unresolved).count();
    let mut findings: Vec<ModpFinding> = Vec::new();
    if modp {
        for n in lo..=hi {
            let (mut f, _) = modp_scan_level(n, 97);
            findings.append(&mut f);
        }
        for &p in suspects {
            for n in lo..=hi {
                if n % p == 0 || p <= 2 {
                    continue;
                }
                findings.extend(scan_extra_prime(n, p));
            }
        }
    }
    if json {
        output::print_dims_json(&reports, &findings);
    } else {
        output::print_dims_tsv(&reports);
        if modp {
            output::print_scan_tsv(&findings, &[]);
        }
    }
    Ok(if unresolved > 0 { 2 } else { 0 })
}

fn scan_extra_prime(n: u64, p: u64) -> Vec<ModpFinding> {
    let mut out = Vec::new();
    let chars = all_characters(n);
    let mut seen = BTreeSet::new();
    for class in conjugacy_classes(&chars) {
        let rep = &class.representative;
        if !rep.is_odd() {
            continue;
        }
        let chi0 = rep.prime_to_p_part(p);
        if !seen.insert(chi0.canonical_key()) {
            continue;
        }
        let ids = factor_prime(p, chi0.order().max(1) as u32).expect("p coprime to order");
        if let Some(f) = scan_unit(n, &chi0, p, &ids[0].factor) {
            out.push(f);
        }
    }
    out
}

pub fn cmd_qexp(
    n: u64,
    character: &str,
    prec: &str,
    modp: Option<u64>,
    lambda_index: usize,
    json: bool,
) -> Result<u8, String> {
    let display_prec: i64 = if prec == "auto" {
        20
    } else {
        prec.parse().map_err(|_| format!("bad precision {:?}", prec))?
    };
    let chis = resolve_character(n, character)?;
    let odd: Vec<DirichletChar> = chis.into_iter().filter(|c| c.is_odd()).collect();
    if odd.is_empty() {
        return Err("no odd character matches; the weight-one space is zero by parity".into());
    }
    let chi = odd[0].clone();
    match modp {
        None => {
            let job = run_job(n, &chi);
            if job.certified_dim == Some(0) {
                println!("S_1({}, {}) = 0", n, chi.label());
                return Ok(0);
            }
            let report = WeightOneReport::from_job(&job, 1, display_prec);
            if json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                output::print_eigenforms_tsv(&report, display_prec);
            }
            Ok(if job.status == JobStatus::Unresolved { 2 } else { 0 })
        }
        Some(p) => {
            if p <= 2 || n % p == 0 {
                return Err(format!("mod-p requires odd p not dividing N, got p = {}", p));
            }
            let chi0 = chi.prime_to_p_part(p);
            let ids = factor_prime(p, chi0.order().max(1) as u32)
                .map_err(|e| format!("factoring p: {}", e))?;
            let lam = ids
                .get(lambda_index)
                .ok_or_else(|| format!("lambda index {} out of range (0..{})", lambda_index, ids.len()))?;
            let finding = scan_unit(n, &chi0, p, &lam.factor)
                .ok_or_else(|| "no extra mod-p form at this unit".to_string())?;
            let qexp = finding
                .qexp
                .clone()
                .ok_or_else(|| "extra space is not one-dimensional".to_string())?;
            // extend to the requested precision through the weight-two detour
            let big = weightone::scan_residue_field(n, &chi0, p, &lam.factor);
            let rf = &big;
            let known = qexp.len() as i64 - 1;
            let series = weight1_core::qseries::QSeries::from_coeffs(rf, 0, known, qexp);
            let extended = if display_prec > known {
                weightone::extend_precision_modp(n, &chi0, rf, &series, display_prec)?
            } else {
                series
            };
            if json {
                output::print_modp_qexp_json(&finding, rf, &extended, display_prec);
            } else {
                output::print_modp_qexp_tsv(&finding, rf, &extended, display_prec);
            }
            Ok(0)
        }
    }
}

pub fn cmd_modp_scan(
    (lo, hi): (u64, u64),
    sweep: u64,
    suspects: &[u64],
    json: bool,
    jobs: usize,
) -> Result<u8, String> {
    let levels: Vec<u64> = (lo..=hi).collect();
    let run = |&n: &u64| -> (Vec<ModpFinding>, Option<(u64, String)>) {
        let (findings, residual) = modp_scan_level(n, sweep);
        let mut all = findings;
        for &p in suspects {
            if p > 2 && n % p != 0 && p > sweep {
                all.extend(scan_extra_prime(n, p));
            }
        }
        (all, residual.map(|r| (n, r.to_string())))
    };
    let results: Vec<(Vec<ModpFinding>, Option<(u64, String)>)> = if jobs > 1 {
        levels.par_iter().map(run).collect()
    } else {
        levels.iter().map(run).collect()
    };
    let mut findings = Vec::new();
    let mut residuals = Vec::new();
    for (f, r) in results {
        findings.extend(f);
        if let Some(r) = r {
            residuals.push(r);
        }
    }
    let unresolved = findings
        .iter()
        .any(|f| f.classification == weightone::ModpClass::UnresolvedModp);
    if json {
        output::print_scan_json(&findings, &residuals);
    } else {
        output::print_scan_tsv(&findings, &residuals);
    }
    Ok(if unresolved { 2 } else { 0 })
}

pub fn cmd_dihedral(
    (lo, hi): (u64, u64),
    character: Option<&str>,
    json: bool,
) -> Result<u8, String> {
    let mut rows = Vec::new();
    for n in lo..=hi {
        let chars = match character {
            Some(arg) => resolve_character(n, arg).unwrap_or_default(),
            None => all_characters(n),
        };
        for class in conjugacy_classes(&chars) {
            let chi = &class.representative;
            if !chi.is_odd() {
                continue;
            }
            let (count, reps) = weight1_core::dihedral::count_dihedral(n, chi);
            if count > 0 {
                rows.push((n, chi.label(), chi.canonical_key(), count, reps));
            }
        }
    }
    output::print_dihedral(&rows, json);
    Ok(0)
}
