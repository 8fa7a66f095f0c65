//! The work behind each subcommand, returning serializable reports.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use emrank::curve::{p1, p2, p3, torsion_group, CurveError};
use emrank::descent::{selmer_group_with, DescentError, DescentPair, LocalVerdict, PairStatus, SelmerOptions};
use emrank::family::{admissible_iter, build_curve_with, CurveParams, FamilyError};
use emrank::heights::{independence_rank, pairing_matrix, rank_of, HeightError, DEFAULT_TOL};
use emrank::numtheory::{Factorizer, NumTheoryError};

use crate::cache::{analysis_key, Cache};
use crate::record::{Admissibility, AnalysisRecord, HeightsRecord, Timings, TorsionRecord};

pub const EXIT_OK: u8 = 0;
pub const EXIT_MISMATCH: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INVALID, message: message.into() }
    }

    pub fn resource(message: impl Into<String>) -> Self {
        CliError { code: EXIT_RESOURCE, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

fn numtheory_code(e: &NumTheoryError) -> u8 {
    match e {
        NumTheoryError::FactorizationTimeout(_) => EXIT_RESOURCE,
        _ => EXIT_INVALID,
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        let code = match &e {
            FamilyError::NumTheory(n) => numtheory_code(n),
            _ => EXIT_INVALID,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<DescentError> for CliError {
    fn from(e: DescentError) -> Self {
        let code = match &e {
            DescentError::NotSquarefree { .. }
            | DescentError::ZeroClass
            | DescentError::OutsideSupport(_)
            | DescentError::UnsupportedPlace(_) => EXIT_INVALID,
            DescentError::NumTheory(n) => numtheory_code(n),
            _ => EXIT_RESOURCE,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<HeightError> for CliError {
    fn from(e: HeightError) -> Self {
        let code = if matches!(e, HeightError::BadTolerance(_)) { EXIT_INVALID } else { EXIT_RESOURCE };
        CliError { code, message: e.to_string() }
    }
}

impl From<CurveError> for CliError {
    fn from(e: CurveError) -> Self {
        CliError::resource(e.to_string())
    }
}

/// Settings shared by all subcommands.
#[derive(Debug)]
pub struct Context {
    pub seed: u64,
    pub tol: f64,
    pub timings: bool,
    pub cache: Cache,
}

impl Context {
    pub fn new(seed: u64, cache: Cache) -> Self {
        Context { seed, tol: DEFAULT_TOL, timings: false, cache }
    }

    pub fn factorizer(&self) -> Factorizer {
        Factorizer::new().with_seed(self.seed).with_cache(self.cache.factor_cache())
    }

    pub fn curve(&self, m: u64) -> Result<CurveParams, CliError> {
        let c = build_curve_with(m, &self.factorizer())?;
        self.persist();
        Ok(c)
    }

    fn persist(&self) {
        if let Err(e) = self.cache.flush() {
            eprintln!("warning: cache write failed: {e}");
        }
    }
}

fn strings<T: ToString>(xs: impl IntoIterator<Item = T>) -> Vec<String> {
    xs.into_iter().map(|x| x.to_string()).collect()
}

/// Full pipeline for one m.
pub fn analyze(ctx: &Context, m: u64) -> Result<AnalysisRecord, CliError> {
    let key = analysis_key(m, ctx.seed);
    if let Some(hit) = ctx.cache.analysis(&key) {
        return Ok(hit);
    }
    let t = Instant::now();
    let c = ctx.curve(m)?;
    let curve_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let tors = torsion_group(&c)?;
    let torsion_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let pm = pairing_matrix(&c, &[p1(&c), p2(&c)], ctx.tol)?;
    let heights = HeightsRecord {
        tolerance: ctx.tol,
        canonical_heights: pm.entries.iter().enumerate().map(|(i, row)| row[i] / 2.0).collect(),
        independence_rank: rank_of(&pm.entries, ctx.tol),
        pairing: pm.entries,
        determinant: pm.determinant,
    };
    let heights_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let sel = selmer_group_with(&c, &SelmerOptions { seed: ctx.seed, ..Default::default() })?;
    let selmer_s = t.elapsed().as_secs_f64();

    let mut rec = AnalysisRecord {
        m,
        engine_version: emrank::VERSION.to_string(),
        admissibility: Admissibility::from(&c.report),
        a: c.a.to_string(),
        q: c.q.to_string(),
        r: c.r.to_string(),
        p_primes: strings(c.p_primes()),
        q_primes: strings(c.q_primes()),
        r_primes: strings(c.r_primes()),
        torsion: TorsionRecord { structure: tors.structure(), points: strings(&tors.points) },
        heights,
        s2: sel.s2,
        selmer_size_log2: sel.size_log2,
        theorem_w: sel.theorem_w,
        corollary_value: sel.corollary_value,
        rank_upper_bound: sel.rank_upper_bound,
        members: sel.members.iter().map(|d| [d.b1.to_string(), d.b2.to_string()]).collect(),
        timings: None,
    };
    if let Err(e) = ctx.cache.store_analysis(&key, &rec) {
        eprintln!("warning: cache write failed: {e}");
    }
    if ctx.timings {
        rec.timings = Some(Timings { curve_s, torsion_s, heights_s, selmer_s });
    }
    Ok(rec)
}

/// Admissible m in [lo, hi]; a failed admissibility check is reported in place.
pub fn scan_admissible(ctx: &Context, lo: u64, hi: u64) -> Vec<Result<u64, CliError>> {
    let out = admissible_iter(lo, hi, ctx.factorizer()).map(|r| r.map_err(CliError::from)).collect();
    ctx.persist();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanItem {
    pub m: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record: Option<AnalysisRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<CliError>,
}

/// Analyzes every admissible m in [lo, hi], in ascending order.
pub fn scan(ctx: &Context, lo: u64, hi: u64) -> Result<Vec<ScanItem>, CliError> {
    if lo > hi {
        return Err(CliError::invalid(format!("empty range {lo}..{hi}")));
    }
    let ms = scan_admissible(ctx, lo, hi);
    Ok(ms
        .into_par_iter()
        .map(|m| match m {
            Ok(m) => match analyze(ctx, m) {
                Ok(r) => ScanItem { m, record: Some(r), error: None },
                Err(e) => ScanItem { m, record: None, error: Some(e) },
            },
            Err(e) => ScanItem { m: 0, record: None, error: Some(e) },
        })
        .collect())
}

/// Printed rows: m, r, s₂ as printed, and the s₂ a full run must give.
pub const TABLE1: [(u64, &str, &str, u32); 6] = [
    (6, "2", "4", 4),
    (12, "3", "3", 3),
    (30, "3", "3", 3),
    (42, ">=2", "4", 4),
    (60, "4", "4", 4),
    (462, ">=3", ">=5", 5),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub m: u64,
    pub a_factors: String,
    pub q_factors: String,
    pub r_factors: String,
    pub torsion: Option<String>,
    pub determinant: Option<f64>,
    pub independence_rank: Option<usize>,
    pub r_printed: String,
    pub s2_printed: String,
    pub s2_expected: u32,
    pub s2: Option<u32>,
    pub theorem_w: Option<u32>,
    pub corollary_value: Option<u32>,
    pub s2_match: bool,
    /// Lower bound 2 ≤ printed r, and printed exact r ≤ s₂.
    pub rank_consistent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn product(primes: &[String]) -> String {
    primes.join("*")
}

pub fn table1(ctx: &Context) -> Vec<Table1Row> {
    TABLE1
        .par_iter()
        .map(|&(m, r_printed, s2_printed, want)| {
            let res = analyze(ctx, m);
            let rec = res.as_ref().ok();
            let s2 = rec.map(|r| r.s2);
            let lower = rec.map(|r| r.heights.independence_rank);
            let exact_r: Option<u32> = r_printed.parse().ok();
            let rank_consistent = match (lower, s2) {
                (Some(l), Some(s2)) => {
                    let printed_lower = exact_r.unwrap_or_else(|| r_printed.trim_start_matches(">=").parse().unwrap_or(0));
                    l >= 2 && (l as u32) <= printed_lower.max(l as u32) && exact_r.map_or(true, |r| r <= s2)
                }
                _ => false,
            };
            Table1Row {
                m,
                a_factors: rec.map_or_else(String::new, |r| product(&r.p_primes)),
                q_factors: rec.map_or_else(String::new, |r| product(&r.q_primes)),
                r_factors: rec.map_or_else(String::new, |r| product(&r.r_primes)),
                torsion: rec.map(|r| r.torsion.structure.clone()),
                determinant: rec.map(|r| r.heights.determinant),
                independence_rank: lower,
                r_printed: r_printed.into(),
                s2_printed: s2_printed.into(),
                s2_expected: want,
                s2,
                theorem_w: rec.map(|r| r.theorem_w),
                corollary_value: rec.and_then(|r| r.corollary_value),
                s2_match: s2 == Some(want),
                rank_consistent,
                error: res.err().map(|e| e.message),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    pub b1: String,
    pub b2: String,
    pub status: String,
    /// (place, verdict) in the order tested.
    pub verdicts: Vec<(String, String)>,
}

const COORDS: [&str; 4] = ["Z1", "Z2", "Z3", "W"];

fn verdict_text(v: &LocalVerdict) -> String {
    match v {
        LocalVerdict::RealSolvable => "solvable".into(),
        LocalVerdict::RealUnsolvable => "unsolvable".into(),
        LocalVerdict::Unsolvable { depth } => format!("unsolvable (exhausted after {depth} levels)"),
        LocalVerdict::Solvable(w) => {
            let [z1, z2, z3, w0] = &w.coords;
            format!(
                "solvable (Z1,Z2,Z3,W) = ({z1},{z2},{z3},{w0}) mod {}^{}, chart {}, minor ({},{}) v <= {}",
                w.place,
                w.precision,
                COORDS[w.chart],
                COORDS[w.minor.0],
                COORDS[w.minor.1],
                w.tau
            )
        }
    }
}

fn status_text(s: &PairStatus) -> String {
    match s {
        PairStatus::Excluded(r) => format!("excluded: {r}"),
        PairStatus::NecessaryFail(r) => format!("necessary condition failed: {r}"),
        PairStatus::LocallyUnsolvable(p) => format!("no local point at {p}"),
        PairStatus::Member => "member".into(),
        PairStatus::Undecided => "undecided".into(),
    }
}

impl From<&DescentPair> for PairReport {
    fn from(d: &DescentPair) -> Self {
        PairReport {
            b1: d.b1.to_string(),
            b2: d.b2.to_string(),
            status: status_text(&d.status),
            verdicts: d.evidence.iter().map(|(p, v)| (p.to_string(), verdict_text(v))).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelmerReport {
    pub m: u64,
    pub coset_count: u64,
    pub s2: u32,
    pub size_log2: u32,
    pub theorem_w: u32,
    pub corollary_value: Option<u32>,
    pub members: Vec<PairReport>,
    /// Every coset with its verdicts (verbose runs only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub all: Option<Vec<PairReport>>,
}

pub fn selmer(ctx: &Context, m: u64, verbose: bool, use_filters: bool) -> Result<SelmerReport, CliError> {
    let c = ctx.curve(m)?;
    let opts = SelmerOptions { seed: ctx.seed, keep_all: verbose, use_lemma_filters: use_filters, ..Default::default() };
    let s = selmer_group_with(&c, &opts)?;
    Ok(SelmerReport {
        m,
        coset_count: s.coset_count,
        s2: s.s2,
        size_log2: s.size_log2,
        theorem_w: s.theorem_w,
        corollary_value: s.corollary_value,
        members: s.members.iter().map(PairReport::from).collect(),
        all: s.all_pairs.as_ref().map(|v| v.iter().map(PairReport::from).collect()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightsReport {
    pub m: u64,
    pub tolerance: f64,
    pub points: Vec<String>,
    /// ĥ(P1), ĥ(P2), ĥ(P3).
    pub canonical_heights: Vec<f64>,
    pub pairing: Vec<Vec<f64>>,
    pub determinant: f64,
    pub rank_p1_p2: usize,
    pub rank_p1_p2_p3: usize,
}

pub fn heights(ctx: &Context, m: u64) -> Result<HeightsReport, CliError> {
    let c = ctx.curve(m)?;
    let pts = [p1(&c), p2(&c), p3(&c)];
    let pm = pairing_matrix(&c, &pts[..2], ctx.tol)?;
    let three = pairing_matrix(&c, &pts, ctx.tol)?;
    Ok(HeightsReport {
        m,
        tolerance: ctx.tol,
        points: strings(&pts),
        canonical_heights: (0..3).map(|i| three.entries[i][i] / 2.0).collect(),
        determinant: pm.determinant,
        rank_p1_p2: independence_rank(&c, &pts[..2], ctx.tol)?,
        rank_p1_p2_p3: rank_of(&three.entries, ctx.tol),
        pairing: pm.entries,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionReport {
    pub m: u64,
    pub structure: String,
    pub order: u64,
    pub points: Vec<String>,
    pub primes_used: Vec<u64>,
    pub count_gcd: u64,
}

pub fn torsion(ctx: &Context, m: u64) -> Result<TorsionReport, CliError> {
    let c = ctx.curve(m)?;
    let t = torsion_group(&c)?;
    Ok(TorsionReport {
        m,
        structure: t.structure(),
        order: t.order(),
        points: strings(&t.points),
        primes_used: t.primes_used.clone(),
        count_gcd: t.count_gcd,
    })
}
