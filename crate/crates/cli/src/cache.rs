//! Append-only JSON-lines cache of factorizations and finished analyses.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use emrank::numtheory::{FactorCache, Factorization};

use crate::record::AnalysisRecord;

pub const DEFAULT_CACHE_PATH: &str = "./.emcache.jsonl";

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Entry {
    Factorization { n: String, factors: Vec<(String, u32)> },
    Analysis { key: String, record: AnalysisRecord },
}

/// Key of an analysis: everything that can change its result.
pub fn analysis_key(m: u64, seed: u64) -> String {
    format!("m={m};engine={};seed={seed}", emrank::VERSION)
}

#[derive(Debug)]
pub struct Cache {
    path: Option<PathBuf>,
    factors: Arc<FactorCache>,
    analyses: Mutex<HashMap<String, AnalysisRecord>>,
    writer: Mutex<()>,
}

impl Cache {
    /// A cache that never reads or writes a file.
    pub fn disabled() -> Self {
        Cache { path: None, factors: Arc::new(FactorCache::new()), analyses: Mutex::default(), writer: Mutex::default() }
    }

    /// Loads `path` if it exists. Unreadable lines are skipped.
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let factors = Arc::new(FactorCache::new());
        let mut analyses = HashMap::new();
        match File::open(&path) {
            Ok(f) => {
                for line in BufReader::new(f).lines() {
                    let line = line?;
                    match serde_json::from_str::<Entry>(&line) {
                        Ok(Entry::Factorization { n, factors: fs }) => {
                            if let Some(f) = parse_factorization(&n, &fs) {
                                factors.preload(f);
                            }
                        }
                        Ok(Entry::Analysis { key, record }) => {
                            analyses.insert(key, record);
                        }
                        Err(_) => {}
                    }
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e),
        }
        Ok(Cache { path: Some(path), factors, analyses: Mutex::new(analyses), writer: Mutex::default() })
    }

    pub fn is_enabled(&self) -> bool {
        self.path.is_some()
    }

    pub fn factor_cache(&self) -> Arc<FactorCache> {
        Arc::clone(&self.factors)
    }

    pub fn analysis(&self, key: &str) -> Option<AnalysisRecord> {
        if !self.is_enabled() {
            return None;
        }
        self.analyses.lock().unwrap().get(key).cloned()
    }

    /// Records an analysis (without timings) and any factorizations computed
    /// since the last write.
    pub fn store_analysis(&self, key: &str, record: &AnalysisRecord) -> io::Result<()> {
        if !self.is_enabled() {
            return Ok(());
        }
        let mut record = record.clone();
        record.timings = None;
        self.analyses.lock().unwrap().insert(key.to_string(), record.clone());
        self.append(vec![Entry::Analysis { key: key.to_string(), record }])
    }

    /// Appends factorizations computed since the last write.
    pub fn flush(&self) -> io::Result<()> {
        self.append(Vec::new())
    }

    fn append(&self, mut entries: Vec<Entry>) -> io::Result<()> {
        let Some(path) = &self.path else { return Ok(()) };
        let _guard = self.writer.lock().unwrap();
        let fresh = self.factors.drain_fresh().into_iter().map(|f| Entry::Factorization {
            n: f.value().to_string(),
            factors: f.factors().iter().map(|(p, e)| (p.to_string(), *e)).collect(),
        });
        let mut all: Vec<Entry> = fresh.collect();
        all.append(&mut entries);
        if all.is_empty() {
            return Ok(());
        }
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        let mut buf = String::new();
        for e in &all {
            buf.push_str(&serde_json::to_string(e).map_err(io::Error::other)?);
            buf.push('\n');
        }
        file.write_all(buf.as_bytes())
    }
}

fn parse_factorization(n: &str, fs: &[(String, u32)]) -> Option<Factorization> {
    let n: BigUint = n.parse().ok()?;
    let pairs: Vec<(BigUint, u32)> = fs.iter().map(|(p, e)| Some((p.parse().ok()?, *e))).collect::<Option<_>>()?;
    let f = Factorization::from_prime_powers(pairs);
    // A corrupted line must not poison later runs.
    (f.recompose() == n && f.primes().all(emrank::numtheory::is_prime)).then_some(f)
}
