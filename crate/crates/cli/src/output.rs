//! Output formatting: TSV tables diffable against the reference layout, and
//! JSON mirroring the documented schema.

use weight1_core::cyclotomic::ResidueField;
use weight1_core::field::Field;
use weight1_core::qseries::QSeries;
use weight1_core::weightone::{ModpFinding, WeightOneReport};

/// One row per (N, character class) with a nonzero newform dimension, in the
/// fixed column order (N, character label, dimension).
pub fn print_dims_tsv(reports: &[WeightOneReport]) {
    println!("N\tcharacter\tdimension");
    for r in reports {
        if r.dim_new.unwrap_or(0) > 0 {
            println!("{}\t{}\t{}", r.level, r.character_label, r.dim_new.unwrap());
        }
    }
    for r in reports {
        if r.status == weight1_core::weightone::JobStatus::Unresolved {
            println!("# UNRESOLVED\t{}\t{}", r.level, r.character_label);
        }
    }
}

pub fn print_dims_json(reports: &[WeightOneReport], findings: &[ModpFinding]) {
    let doc = serde_json::json!({
        "engine_version": weight1_core::ENGINE_VERSION,
        "reports": reports,
        "modp_findings": findings,
    });
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
}

fn fmt_cyc(c: &weight1_core::cyclotomic::CycNumber) -> String {
    if let Some(q) = c.as_rational() {
        return q.to_string();
    }
    let mut parts = Vec::new();
    for (k, coeff) in c.coeffs.iter().enumerate() {
        if num_traits::Zero::is_zero(coeff) {
            continue;
        }
        if k == 0 {
            parts.push(coeff.to_string());
        } else if k == 1 {
            parts.push(format!("{}*z{}", coeff, c.n));
        } else {
            parts.push(format!("{}*z{}^{}", coeff, c.n, k));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join("+")
    }
}

pub fn print_eigenforms_tsv(report: &WeightOneReport, prec: i64) {
    println!(
        "# S_1({}, {}): dim {} (status {:?})",
        report.level,
        report.character_label,
        report.certified_dim.map(|d| d.to_string()).unwrap_or_else(|| "?".into()),
        report.status
    );
    for (l, poly) in &report.hecke_charpolys {
        let coeffs: Vec<String> = poly.iter().map(fmt_cyc).collect();
        println!("# charpoly T_{}: [{}]", l, coeffs.join(", "));
    }
    for (i, e) in report.eigenforms.iter().enumerate() {
        match &e.extension_minpoly {
            None => println!("eigenform {} over the base field:", i + 1),
            Some([a0, a1]) => println!(
                "eigenform {} over K[t]/(t^2 + ({}) t + ({})):",
                i + 1,
                fmt_cyc(a1),
                fmt_cyc(a0)
            ),
        }
        let upto = (prec as usize + 1).min(e.coefficients.len());
        let mut terms = Vec::new();
        for (m, (c0, c1)) in e.coefficients.iter().take(upto).enumerate() {
            let is0 = c0.is_zero() && c1.is_zero();
            if is0 {
                continue;
            }
            let coeff = if c1.is_zero() {
                fmt_cyc(c0)
            } else if c0.is_zero() {
                format!("({})t", fmt_cyc(c1))
            } else {
                format!("({} + ({})t)", fmt_cyc(c0), fmt_cyc(c1))
            };
            terms.push(format!("{} q^{}", coeff, m));
        }
        println!("  {} + O(q^{})", terms.join(" + "), upto);
    }
}

fn fmt_res(rf: &ResidueField, e: &[u64]) -> String {
    let d = rf.degree();
    if d == 1 || e.iter().skip(1).all(|&x| x == 0) {
        return e[0].to_string();
    }
    let mut parts = Vec::new();
    for (k, &c) in e.iter().enumerate() {
        if c == 0 {
            continue;
        }
        if k == 0 {
            parts.push(c.to_string());
        } else if k == 1 {
            parts.push(format!("{}*t", c));
        } else {
            parts.push(format!("{}*t^{}", c, k));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join("+")
    }
}

pub fn print_modp_qexp_tsv(
    finding: &ModpFinding,
    rf: &ResidueField,
    series: &QSeries<ResidueField>,
    prec: i64,
) {
    println!(
        "# mod-{} form at level {}, character {} ({}), lambda factor {:?} (t is the canonical root)",
        finding.p, finding.level, finding.chi0_label, finding.chi0_key, finding.lambda_factor
    );
    println!(
        "# classification: {:?}, extra dimension {}",
        finding.classification, finding.extra_dim
    );
    let mut terms = Vec::new();
    for m in 0..=prec.min(series.prec) {
        let c = series.coeff(m);
        if rf.is_zero(&c) {
            continue;
        }
        terms.push(format!("({}) q^{}", fmt_res(rf, &c), m));
    }
    println!("{} + O(q^{})", terms.join(" + "), prec.min(series.prec) + 1);
}

pub fn print_modp_qexp_json(
    finding: &ModpFinding,
    rf: &ResidueField,
    series: &QSeries<ResidueField>,
    prec: i64,
) {
    let coeffs: Vec<Vec<u64>> =
        (0..=prec.min(series.prec)).map(|m| series.coeff(m)).collect();
    let doc = serde_json::json!({
        "finding": finding,
        "residue_field": {
            "p": rf.p(),
            "degree": rf.degree(),
            "factor": finding.lambda_factor,
        },
        "coefficients": coeffs,
    });
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
}

pub fn print_scan_tsv(findings: &[ModpFinding], residuals: &[(u64, String)]) {
    println!("N\tp\tlambda\tcharacter\textra\tlifted\tclassification\tconductor_raise");
    for f in findings {
        println!(
            "{}\t{}\t{:?}\t{}\t{}\t{}\t{:?}\t{}",
            f.level,
            f.p,
            f.lambda_factor,
            f.chi0_label,
            f.extra_dim,
            f.lifted_dim,
            f.classification,
            f.conductor_raise_advisory
        );
    }
    for (n, r) in residuals {
        println!("# N={}: unfactored torsion residual {}", n, r);
    }
}

pub fn print_scan_json(findings: &[ModpFinding], residuals: &[(u64, String)]) {
    let doc = serde_json::json!({
        "engine_version": weight1_core::ENGINE_VERSION,
        "findings": findings,
        "unfactored_residuals": residuals,
    });
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
}

pub fn print_dihedral(
    rows: &[(u64, String, String, usize, Vec<weight1_core::dihedral::DihedralRep>)],
    json: bool,
) {
    if json {
        let docs: Vec<serde_json::Value> = rows
            .iter()
            .map(|(n, label, key, count, reps)| {
                serde_json::json!({
                    "level": n,
                    "character_label": label,
                    "character_key": key,
                    "count": count,
                    "representations": reps.iter().map(|r| serde_json::json!({
                        "disc": r.disc,
                        "conductor_norm": r.conductor_norm,
                        "value_order": r.value_order,
                        "fingerprint": r.fingerprint.iter().take(10).collect::<Vec<_>>(),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&docs).unwrap());
    } else {
        println!("N\tcharacter\tcount\tdiscs");
        for (n, label, _, count, reps) in rows {
            let discs: Vec<String> = reps.iter().map(|r| r.disc.to_string()).collect();
            println!("{}\t{}\t{}\t{}", n, label, count, discs.join(","));
        }
    }
}
