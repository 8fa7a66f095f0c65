//! Full 2-descent on E_m: the Kummer map, torsion cosets in Q(S,2)²,
//! exclusion filters, exact local solvability and the 2-Selmer group.

mod candidates;
mod filters;
mod local;
mod phi;
mod selmer;
mod square_class;

use std::fmt;

use num_bigint::{BigInt, BigUint};
use thiserror::Error;

use crate::curve::CurveError;
use crate::numtheory::NumTheoryError;

pub use candidates::{candidate_pairs, canonical_pair, coset_count, torsion_masks, CosetEnumerator, MaskPair};
pub use filters::{lemma_exclusion_filter, necessary_conditions, real_solvable, ExclusionReason, NecessaryFailure};
pub use local::{local_solvable, required_depth, LocalSolver, LocalVerdict, LocalWitness, DEFAULT_ENUM_LIMIT, DEFAULT_WIDTH_CAP, MIN_ENUM_LIMIT};
pub use phi::{phi_image, phi_torsion_images};
pub use selmer::{corollary_rank, selmer_group, selmer_group_with, theorem_lower_bound, SelmerOptions, SelmerResult};
pub use square_class::{q_s_2, square_class, square_class_in, square_class_of_rational_in, Basis, SquareClass, MAX_GENERATORS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DescentError {
    #[error("zero has no square class")]
    ZeroClass,
    #[error("{0} is not supported on the bad primes")]
    OutsideSupport(BigInt),
    #[error("{which} = {value} is not squarefree; the descent filters require it")]
    NotSquarefree { which: &'static str, value: BigInt },
    #[error("search depth {given} at {place} is below the required {required}")]
    DepthExceeded { place: u64, required: u32, given: u32 },
    #[error("local search at {place} unresolved after {depth} levels")]
    Unresolved { place: u64, depth: u32 },
    #[error("could not certify a local point at {place}: {detail}")]
    WitnessFailure { place: u64, detail: String },
    #[error("place {0} is not supported (must be 2 or an odd prime below 2^62)")]
    UnsupportedPlace(BigUint),
    #[error("{0} generators exceed the supported maximum")]
    TooManyGenerators(usize),
    #[error("Selmer group structure check failed: {0}")]
    GroupStructure(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    NumTheory(#[from] NumTheoryError),
}

/// A completion of Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Prime(u64),
    Real,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Prime(p) => write!(f, "{p}"),
            Place::Real => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairStatus {
    Excluded(ExclusionReason),
    NecessaryFail(NecessaryFailure),
    /// Not locally solvable at the given place.
    LocallyUnsolvable(Place),
    Member,
    Undecided,
}

/// A candidate ([b1], [b2]) with its classification and per-place evidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentPair {
    pub b1: SquareClass,
    pub b2: SquareClass,
    pub status: PairStatus,
    pub evidence: Vec<(Place, LocalVerdict)>,
}

impl DescentPair {
    pub fn new(b1: SquareClass, b2: SquareClass) -> Self {
        DescentPair { b1, b2, status: PairStatus::Undecided, evidence: Vec::new() }
    }

    pub fn values(&self) -> (BigInt, BigInt) {
        (self.b1.value(), self.b2.value())
    }

    pub fn is_member(&self) -> bool {
        self.status == PairStatus::Member
    }
}

impl fmt::Display for DescentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "([{}], [{}])", self.b1, self.b2)
    }
}
