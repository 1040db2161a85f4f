//! Finite complete rewriting systems for the one-relator monoids
//! `Mon⟨a,b : a^α b^β a^γ b^δ = b⟩`, together with the machinery needed to
//! check them: critical pairs and completion, weighted shortlex termination
//! orders, a certificate-producing word-problem oracle, Dehn function
//! sampling, and endomorphism checks.

pub mod analysis;
pub mod confluence;
pub mod endo;
pub mod error;
pub mod family;
pub mod presentation;
pub mod rewrite;
pub mod words;

pub use analysis::{
    dehn_sample, dehn_table, enumerate_elements, equal_deepening, equal_in_monoid, space_minimal,
    DehnConfig, DehnSample, EqualityCertificate, OracleConfig, OracleOutcome, SampleMode,
};
pub use confluence::{
    certify_complete, certify_local_confluence, check_local_confluence, critical_pairs,
    knuth_bendix, CompletionLimits, CompletionOutcome, CompletionReport, ConfluenceReport,
    CriticalPair,
};
pub use endo::{hopf_demo, EndomorphismSpec, HopfReport, InjectivityWitness};
pub use error::{Error, Result};
pub use family::{
    build_system, certify_family_system, classify, grid, CaseTag, CertifyBudgets,
    FamilyCertificate, FamilyParams, OverlapParams, TerminationEvidence,
};
pub use presentation::Presentation;
pub use rewrite::{
    empirical_termination, find_termination_order, verify_termination, Certification,
    ReductionOrder, ReductionTrace, RewritingSystem, Rule, DEFAULT_FUEL,
};
pub use words::{parse_word, print_word, Alphabet, Word};
