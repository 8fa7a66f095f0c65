//! Rendering: aligned text tables, CSV and JSON lines.

use serde::Serialize;

use crate::commands::{HeightsReport, ScanItem, SelmerReport, Table1Row, TorsionReport};
use crate::record::AnalysisRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Human,
    Csv,
    Json,
}

/// Left-aligned columns separated by two spaces.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(&width).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            s.push_str(cell);
            if i + 1 < cells.len() {
                s.extend(std::iter::repeat(' ').take(w - cell.chars().count()));
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(header.to_vec());
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|c| csv_cell(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub fn json_line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("reports serialize");
    s.push('\n');
    s
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".into(), |x| x.to_string())
}

fn tabular(format: Format, header: &[&str], rows: &[Vec<String>]) -> String {
    match format {
        Format::Csv => csv(header, rows),
        _ => table(header, rows),
    }
}

const SUMMARY_HEADER: [&str; 9] = ["m", "torsion", "det", "indep", "s2", "w", "corollary", "rank<=", "selmer_log2"];

fn summary_row(r: &AnalysisRecord) -> Vec<String> {
    vec![
        r.m.to_string(),
        r.torsion.structure.clone(),
        format!("{:.4}", r.heights.determinant),
        r.heights.independence_rank.to_string(),
        r.s2.to_string(),
        r.theorem_w.to_string(),
        opt(r.corollary_value),
        r.rank_upper_bound.to_string(),
        r.selmer_size_log2.to_string(),
    ]
}

pub fn analysis(format: Format, r: &AnalysisRecord) -> String {
    match format {
        Format::Json => json_line(r),
        Format::Csv => csv(&SUMMARY_HEADER, &[summary_row(r)]),
        Format::Human => {
            let mut s = String::new();
            s.push_str(&format!("m = {}  ({})\n", r.m, r.admissibility.reason));
            s.push_str(&format!("A = {} = {}\n", r.a, r.p_primes.join("*")));
            s.push_str(&format!("q = {} = {}\n", r.q, r.q_primes.join("*")));
            s.push_str(&format!("r = {} = {}\n", r.r, r.r_primes.join("*")));
            s.push_str(&format!("torsion: {}  {{{}}}\n", r.torsion.structure, r.torsion.points.join(", ")));
            let h = &r.heights;
            s.push_str(&format!(
                "heights: h(P1) = {:.6}  h(P2) = {:.6}  det = {:.6}  independent: {}\n",
                h.canonical_heights[0], h.canonical_heights[1], h.determinant, h.independence_rank
            ));
            s.push_str(&format!(
                "selmer: |Sel| = 2^{}  s2 = {}  w = {}  corollary = {}  rank <= {}\n",
                r.selmer_size_log2,
                r.s2,
                r.theorem_w,
                opt(r.corollary_value),
                r.rank_upper_bound
            ));
            s.push_str(&format!(
                "members: {}\n",
                r.members.iter().map(|[a, b]| format!("({a},{b})")).collect::<Vec<_>>().join(" ")
            ));
            if let Some(t) = &r.timings {
                s.push_str(&format!(
                    "time: curve {:.3}s  torsion {:.3}s  heights {:.3}s  selmer {:.3}s\n",
                    t.curve_s, t.torsion_s, t.heights_s, t.selmer_s
                ));
            }
            s
        }
    }
}

pub fn scan(format: Format, items: &[ScanItem]) -> String {
    match format {
        Format::Json => items
            .iter()
            .map(|it| match (&it.record, &it.error) {
                (Some(r), _) => json_line(r),
                (None, Some(e)) => json_line(&serde_json::json!({ "m": it.m, "error": e.message, "code": e.code })),
                (None, None) => json_line(&serde_json::json!({ "m": it.m })),
            })
            .collect(),
        _ => {
            let rows: Vec<Vec<String>> = items
                .iter()
                .map(|it| match &it.record {
                    Some(r) => summary_row(r),
                    None => {
                        let mut row = vec![it.m.to_string()];
                        row.push(format!("error: {}", it.error.as_ref().map_or("", |e| e.message.as_str())));
                        row.resize(SUMMARY_HEADER.len(), String::new());
                        row
                    }
                })
                .collect();
            tabular(format, &SUMMARY_HEADER, &rows)
        }
    }
}

pub fn admissible_list(format: Format, ms: &[u64]) -> String {
    match format {
        Format::Json => ms.iter().map(|m| json_line(&serde_json::json!({ "m": m }))).collect(),
        _ => {
            let rows: Vec<Vec<String>> = ms.iter().map(|m| vec![m.to_string()]).collect();
            tabular(format, &["m"], &rows)
        }
    }
}

const TABLE1_HEADER: [&str; 11] =
    ["m", "A", "q", "r", "torsion", "det", "r (printed)", "s2 (printed)", "s2", "match", "rank ok"];

pub fn table1(format: Format, rows: &[Table1Row]) -> String {
    match format {
        Format::Json => rows.iter().map(json_line).collect(),
        _ => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.m.to_string(),
                        r.a_factors.clone(),
                        r.q_factors.clone(),
                        r.r_factors.clone(),
                        opt(r.torsion.clone()),
                        r.determinant.map_or_else(|| "-".into(), |d| format!("{d:.4}")),
                        r.r_printed.clone(),
                        r.s2_printed.clone(),
                        match (&r.s2, &r.error) {
                            (Some(s), _) => s.to_string(),
                            (None, Some(e)) => format!("error: {e}"),
                            (None, None) => "-".into(),
                        },
                        if r.s2_match { "yes" } else { "NO" }.into(),
                        if r.rank_consistent { "yes" } else { "NO" }.into(),
                    ]
                })
                .collect();
            tabular(format, &TABLE1_HEADER, &cells)
        }
    }
}

pub fn selmer(format: Format, r: &SelmerReport) -> String {
    match format {
        Format::Json => json_line(r),
        _ => {
            let pairs = r.all.as_ref().unwrap_or(&r.members);
            let rows: Vec<Vec<String>> = pairs
                .iter()
                .map(|p| {
                    let ev = p.verdicts.iter().map(|(pl, v)| format!("{pl}: {v}")).collect::<Vec<_>>().join("; ");
                    vec![p.b1.clone(), p.b2.clone(), p.status.clone(), ev]
                })
                .collect();
            let body = tabular(format, &["b1", "b2", "status", "evidence"], &rows);
            if format == Format::Csv {
                return body;
            }
            format!(
                "m = {}  cosets = {}  |Sel| = 2^{}  s2 = {}  w = {}  corollary = {}\n{}",
                r.m,
                r.coset_count,
                r.size_log2,
                r.s2,
                r.theorem_w,
                opt(r.corollary_value),
                body
            )
        }
    }
}

pub fn heights(format: Format, r: &HeightsReport) -> String {
    match format {
        Format::Json => json_line(r),
        _ => {
            let rows: Vec<Vec<String>> = r
                .points
                .iter()
                .zip(&r.canonical_heights)
                .enumerate()
                .map(|(i, (p, h))| vec![format!("P{}", i + 1), p.clone(), format!("{h:.6}")])
                .collect();
            let body = tabular(format, &["point", "coordinates", "height"], &rows);
            if format == Format::Csv {
                return body;
            }
            let g = &r.pairing;
            format!(
                "{body}pairing(P1,P2) = [[{:.6}, {:.6}], [{:.6}, {:.6}]]\ndet = {:.6}\nindependent: P1,P2 -> {}  P1,P2,P3 -> {}\n",
                g[0][0], g[0][1], g[1][0], g[1][1], r.determinant, r.rank_p1_p2, r.rank_p1_p2_p3
            )
        }
    }
}

pub fn torsion(format: Format, r: &TorsionReport) -> String {
    match format {
        Format::Json => json_line(r),
        Format::Csv => csv(
            &["m", "structure", "order", "count_gcd"],
            &[vec![r.m.to_string(), r.structure.clone(), r.order.to_string(), r.count_gcd.to_string()]],
        ),
        Format::Human => format!(
            "m = {}\nE(Q)_tors = {} (order {})\npoints: {}\ngcd of #E(F_p) over p in {:?}: {}\n",
            r.m,
            r.structure,
            r.order,
            r.points.join(", "),
            r.primes_used,
            r.count_gcd
        ),
    }
}
