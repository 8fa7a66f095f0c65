//! Serializable analysis records. Big integers travel as decimal strings.

use serde::{Deserialize, Serialize};

use emrank::family::AdmissibilityReport;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    pub is_even: bool,
    pub twin_primes: bool,
    pub squarefree_check: bool,
    pub admissible: bool,
    pub reason: String,
}

impl From<&AdmissibilityReport> for Admissibility {
    fn from(r: &AdmissibilityReport) -> Self {
        Admissibility {
            is_even: r.is_even,
            twin_primes: r.twin_primes,
            squarefree_check: r.squarefree_check,
            admissible: r.admissible,
            reason: r.reason(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionRecord {
    pub structure: String,
    pub points: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightsRecord {
    pub tolerance: f64,
    /// ĥ(P1), ĥ(P2).
    pub canonical_heights: Vec<f64>,
    /// Pairing matrix of P1, P2; the diagonal is 2ĥ.
    pub pairing: Vec<Vec<f64>>,
    pub determinant: f64,
    pub independence_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub curve_s: f64,
    pub torsion_s: f64,
    pub heights_s: f64,
    pub selmer_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub m: u64,
    pub engine_version: String,
    pub admissibility: Admissibility,
    /// m⁴ − 1, m⁴ − 1 − 4m², m⁴ − 1 + 4m².
    pub a: String,
    pub q: String,
    pub r: String,
    pub p_primes: Vec<String>,
    pub q_primes: Vec<String>,
    pub r_primes: Vec<String>,
    pub torsion: TorsionRecord,
    pub heights: HeightsRecord,
    pub s2: u32,
    pub selmer_size_log2: u32,
    pub theorem_w: u32,
    pub corollary_value: Option<u32>,
    pub rank_upper_bound: u32,
    /// Coset representatives ([b1], [b2]) as signed squarefree integers.
    pub members: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl AnalysisRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample() -> AnalysisRecord {
        AnalysisRecord {
            m: 6,
            engine_version: "0.1.0".into(),
            admissibility: Admissibility {
                is_even: true,
                twin_primes: true,
                squarefree_check: true,
                admissible: true,
                reason: "admissible".into(),
            },
            a: "1295".into(),
            q: "1151".into(),
            r: "1439".into(),
            p_primes: vec!["5".into(), "7".into(), "37".into()],
            q_primes: vec!["1151".into()],
            r_primes: vec!["1439".into()],
            torsion: TorsionRecord { structure: "Z/2 x Z/2".into(), points: vec!["O".into()] },
            heights: HeightsRecord {
                tolerance: 1e-3,
                canonical_heights: vec![1.8154123456789, 2.6727],
                pairing: vec![vec![3.6308246913578, -0.1], vec![-0.1, 5.3454]],
                determinant: 16.26,
                independence_rank: 2,
            },
            s2: 4,
            selmer_size_log2: 6,
            theorem_w: 3,
            corollary_value: Some(4),
            rank_upper_bound: 4,
            members: vec![["1".into(), "1".into()], ["-1151".into(), "1".into()]],
            timings: Some(Timings { curve_s: 0.1, torsion_s: 0.2, heights_s: 0.3, selmer_s: 0.4 }),
        }
    }

    #[test]
    fn round_trip() {
        let r = sample();
        assert_eq!(AnalysisRecord::from_json(&r.to_json()).unwrap(), r);
        let mut r = r;
        r.timings = None;
        r.corollary_value = None;
        let s = r.to_json();
        assert!(!s.contains("timings"));
        assert_eq!(AnalysisRecord::from_json(&s).unwrap(), r);
    }
}
