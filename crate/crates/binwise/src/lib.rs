//! Structural analysis of password spaces partitioned into character-class
//! bins, and of guessing attacks that exploit how unevenly real users fill
//! those bins.
//!
//! The crate is organized around a small number of exact-arithmetic types:
//! partitions of a finite candidate space ([`partition`]), the concrete
//! character-class bin space over printable ASCII ([`bins`], [`pattern`]),
//! attack models and guess curves built from password corpora ([`attack`],
//! [`corpus`]), bin-assignment strategies that flatten the distribution
//! defenders can control ([`explorer`]), and a guess-ordering comparison for
//! template grammars ([`grammar`]).
//!
//! All counting is exact: capacities and counts are unbounded integers,
//! densities are compared by cross-multiplication, and expected values are
//! rationals. Floats appear only in reports (log2 summaries) and never in a
//! decision path.
//!
//! With the default `parallel` feature the hot loops (corpus classification,
//! enumeration sweeps, Monte Carlo trials) run on rayon; without it the same
//! code runs sequentially.

pub mod attack;
pub mod bins;
pub mod corpus;
pub mod exact;
pub mod explorer;
pub mod grammar;
pub mod partition;
pub mod pattern;
pub mod synth;

mod par;

pub use partition::{
    compare_density, expected_success, exploration_order, max_expected_success,
    oracle_all_budgets, oracle_optimal_allocation, plan_density_order, plan_probability_order,
    uniform_expected_success, AttackPlan, ExpectedSuccess, ModelError, Partition,
    PartitionModel, PlanEntry, PlanOrder, COMPLEMENT_ID,
};

pub use bins::{
    capacity, capacity_sum_check, classify, sample_bin, search_space_size, BinSignature,
    CharClass, ClassifyError, SpaceSize, ALPHABET_SIZE,
};

pub use pattern::{
    enumerate_constrained_bins, BinConstraint, BinPattern, PatternError, PatternTerm,
};

pub use corpus::{Corpus, CorpusFormat, IngestError, SkipReason, SkipStats};

pub use attack::{
    budget_from_rate, build_bin_model, build_hybrid_model, build_mangling_model,
    effective_budget_after_salting, long_password_substring_share, simulate_attack,
    utilization_report, AttackError, BinModel, CurvePoint, GuessCurve, HybridModel,
    LongPasswordShare, MangleRule, RateBudget, RuleKind, UtilizationReport, UtilizationRow,
};

pub use explorer::{
    min_length, parse_universe_spec, strategy_comparison, stretch_report, AssignmentState,
    ComparisonRow, ExplorerError, MinLength, PolicyParams, StrategyKind, StretchReport,
    Universe, UniverseBin,
};

pub use grammar::{
    equivalence_check, order_by_preterminal_density, order_by_preterminal_probability,
    GrammarError, GrammarInstance, GuessBlock, LengthDictionaries, PreTerminal,
};

/// Cap the data-parallel worker count. Must run before any parallel work;
/// returns false when the pool already exists or parallelism is compiled
/// out, in which case the setting has no effect.
#[cfg(feature = "parallel")]
pub fn limit_threads(threads: usize) -> bool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .is_ok()
}

#[cfg(not(feature = "parallel"))]
pub fn limit_threads(_threads: usize) -> bool {
    false
}
