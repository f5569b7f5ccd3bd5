//! Exact variance of generalized divisor sums over arithmetic progressions
//! in `F_q[t]`, together with the unitary-group matrix integrals `I_k(n; R)`
//! that describe their large-`q` limit.

pub mod characters;
pub mod cli;
pub mod error;
pub mod field;
pub mod lfunc;
pub mod poly;
pub mod rmt;
pub mod variance;

pub use characters::{
    classify_character, diagnose_character, twist_scan, variance_via_characters, CharacterClass,
    CharacterDiagnostics, CharacterGroup, TwistTable, TwistedCoeffs,
};
pub use error::{Error, Result};
pub use field::{FieldCtx, FieldElement, FieldOp};
pub use poly::{Factorization, MonicPoly, Poly, PolyRing, PrimeSieve, ResidueSystem};
pub use lfunc::{CoeffTable, DivisorTable, LFunctionModel, LocalFactor, ModelKind, ModelSource, ModelSpec,
    PrimePowerRule,
};
pub use variance::{
    bucket_sums, field_reports, run_experiment, variance_by_definition, variance_by_second_moment,
    convergence_sweep, progression_sums, progression_sums_from_table, variance_report, ModulusTemplate, ProgressionSums,
    ReportFlag, VarianceReport,
};
