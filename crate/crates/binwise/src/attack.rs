//! Attack models built from corpora, and guess-curve simulation.
//!
//! A model is always a [`PartitionModel`]: slices of a candidate space with
//! exact capacities and observed counts. Three constructions are provided:
//!
//! - bin models: class-signature bins over all printable passwords up to a
//!   maximum length, with the never-observed remainder as the complement
//! - mangling models: wordlist × rule families, one partition per rule
//! - hybrid models: the top-k passwords as singleton partitions layered over
//!   a bin model of the residue
//!
//! [`simulate_attack`] replays an exploration order against a held-out test
//! corpus. Expected cracked mass is exact (rational) at every checkpoint;
//! floats appear only in the log2 budget labels.
//!
//! The partition abstraction treats rule families as disjoint; rules that
//! can emit the same candidate (capitalizing an already-capitalized word)
//! overlap slightly, which overstates capacity by the overlap. This is the
//! standard modelling simplification and is documented per construction.

use std::collections::HashMap;

use aho_corasick::AhoCorasick;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::bins::{capacity, classify, search_space_size, CharClass};
use crate::corpus::Corpus;
use crate::exact::log2_biguint;
use crate::exact::pow2_exact;
use crate::par::fold_slice;
use crate::partition::{
    exploration_order, ModelError, Partition, PartitionModel, PlanOrder,
};

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("maximum length must be at least 1")]
    BadLmax,
    #[error("checkpoint {0} is not finite")]
    BadCheckpoint(f64),
    #[error("checkpoints must be sorted in ascending order")]
    CheckpointsUnsorted,
    #[error("mangling dictionary is empty")]
    EmptyDictionary,
    #[error("dictionary word {0:?} is empty or not printable ASCII")]
    BadDictionaryWord(String),
    #[error("rule '{id}' has a negative weight")]
    NegativeWeight { id: String },
    #[error("rule '{id}': literal {literal:?} is empty or not printable ASCII")]
    BadLiteral { id: String, literal: String },
    #[error("rule '{id}': appended run length must be at least 1")]
    BadRepeat { id: String },
    #[error("salt space must be non-zero")]
    ZeroSaltSpace,
    #[error("popular-word list contains an empty string")]
    EmptyPattern,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Class-signature bins over passwords of length 1..=l_max. The partition
/// ids are the signature strings; the total capacity is the full printable
/// space of those lengths, so unobserved bins live in the complement.
#[derive(Debug, Clone)]
pub struct BinModel {
    model: PartitionModel,
    l_max: u32,
    over_length_mass: u64,
    over_length_distinct: usize,
}

impl BinModel {
    pub fn model(&self) -> &PartitionModel {
        &self.model
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    /// Corpus mass longer than l_max, excluded from the model.
    pub fn over_length_mass(&self) -> u64 {
        self.over_length_mass
    }

    pub fn over_length_distinct(&self) -> usize {
        self.over_length_distinct
    }
}

/// Classify every corpus password of length ≤ l_max into its bin.
/// Longer passwords are excluded and reported, not modelled.
pub fn build_bin_model(corpus: &Corpus, l_max: u32) -> Result<BinModel, AttackError> {
    if l_max == 0 {
        return Err(AttackError::BadLmax);
    }
    let entries = corpus.entries();
    let (bins, over_mass, over_distinct) = fold_slice(
        &entries,
        || (HashMap::<String, u64>::new(), 0u64, 0usize),
        |(mut bins, mut over_mass, mut over_distinct), &(password, count)| {
            if password.len() > l_max as usize {
                over_mass += count;
                over_distinct += 1;
            } else {
                let signature = classify(password).expect("corpus passwords are printable");
                *bins.entry(signature.to_string()).or_insert(0) += count;
            }
            (bins, over_mass, over_distinct)
        },
        |(mut a, am, ad), (b, bm, bd)| {
            for (signature, count) in b {
                *a.entry(signature).or_insert(0) += count;
            }
            (a, am + bm, ad + bd)
        },
    );

    let mut ids: Vec<(String, u64)> = bins.into_iter().collect();
    ids.sort_by(|a, b| a.0.cmp(&b.0));
    let partitions = ids
        .into_iter()
        .map(|(id, count)| {
            let signature = id.parse().expect("bin ids are valid signatures");
            Partition::new(id, capacity(&signature), count)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let model =
        PartitionModel::with_total_capacity(partitions, search_space_size(l_max).exact)?;
    Ok(BinModel {
        model,
        l_max,
        over_length_mass: over_mass,
        over_length_distinct: over_distinct,
    })
}

/// Candidate transformations applied to every dictionary word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleKind {
    /// the word itself
    Identity,
    /// word + fixed suffix: one candidate per word
    AppendLiteral(String),
    /// word + any n digits: 10^n candidates per word
    AppendDigits(u32),
    /// word + any n printable symbols: 33^n candidates per word
    AppendSymbols(u32),
    /// first character uppercased
    CapitalizeFirst,
    /// a fixed leetspeak substitution map
    LeetMap,
}

impl RuleKind {
    /// Candidates generated per dictionary word.
    pub fn multiplicity(&self) -> BigUint {
        match self {
            RuleKind::Identity
            | RuleKind::AppendLiteral(_)
            | RuleKind::CapitalizeFirst
            | RuleKind::LeetMap => BigUint::from(1u8),
            RuleKind::AppendDigits(n) => BigUint::from(10u8).pow(*n),
            RuleKind::AppendSymbols(n) => {
                BigUint::from(CharClass::Symbol.size()).pow(*n)
            }
        }
    }
}

/// One mangling rule with the fraction of users whose password it explains.
/// Weights are exact rationals and need not sum to one.
#[derive(Debug, Clone)]
pub struct MangleRule {
    pub id: String,
    pub kind: RuleKind,
    pub weight: BigRational,
}

impl MangleRule {
    pub fn new(id: impl Into<String>, kind: RuleKind, weight: BigRational) -> Self {
        MangleRule {
            id: id.into(),
            kind,
            weight,
        }
    }
}

fn printable_ascii(s: &str) -> bool {
    s.bytes().all(|b| (0x20..=0x7E).contains(&b))
}

/// Model a dictionary attack: one partition per rule, capacity
/// |dictionary| × multiplicity, counts the rule weights scaled by the least
/// common denominator so all arithmetic stays integral.
pub fn build_mangling_model(
    dictionary: &[String],
    rules: &[MangleRule],
) -> Result<PartitionModel, AttackError> {
    if dictionary.is_empty() {
        return Err(AttackError::EmptyDictionary);
    }
    for word in dictionary {
        if word.is_empty() || !printable_ascii(word) {
            return Err(AttackError::BadDictionaryWord(word.clone()));
        }
    }
    for rule in rules {
        if rule.weight.is_negative() {
            return Err(AttackError::NegativeWeight {
                id: rule.id.clone(),
            });
        }
        match &rule.kind {
            RuleKind::AppendLiteral(literal) => {
                if literal.is_empty() || !printable_ascii(literal) {
                    return Err(AttackError::BadLiteral {
                        id: rule.id.clone(),
                        literal: literal.clone(),
                    });
                }
            }
            RuleKind::AppendDigits(n) | RuleKind::AppendSymbols(n) => {
                if *n == 0 {
                    return Err(AttackError::BadRepeat {
                        id: rule.id.clone(),
                    });
                }
            }
            _ => {}
        }
    }

    let scale = rules
        .iter()
        .fold(BigInt::from(1u8), |acc, r| acc.lcm(r.weight.denom()));
    let dict_size = BigUint::from(dictionary.len());
    let partitions = rules
        .iter()
        .map(|rule| {
            let count = (rule.weight.clone() * BigRational::from_integer(scale.clone()))
                .to_integer()
                .to_biguint()
                .expect("weights validated non-negative");
            Partition::new(rule.id.clone(), &dict_size * rule.kind.multiplicity(), count)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PartitionModel::new(partitions)?)
}

/// Top-k singleton password partitions layered over a bin model of the
/// remaining corpus.
#[derive(Debug, Clone)]
pub struct HybridModel {
    units: Vec<(String, u64)>,
    bins: BinModel,
}

/// Prefix that keeps singleton partition ids disjoint from signature ids,
/// which contain only L/U/D/S.
const UNIT_PREFIX: &str = "pw:";

impl HybridModel {
    pub fn units(&self) -> &[(String, u64)] {
        &self.units
    }

    pub fn bins(&self) -> &BinModel {
        &self.bins
    }

    /// One flat model: each unit password as a capacity-1 partition (id
    /// "pw:<password>"), the residual bins, and a complement. The total is
    /// the full space plus one slot per unit; units also occupy a cell of
    /// their bin, so without the extra slots the complement could go
    /// negative on corpora that tile the space.
    pub fn combined_model(&self) -> PartitionModel {
        let mut partitions = Vec::with_capacity(self.units.len() + self.bins.model.len());
        for (password, count) in &self.units {
            partitions.push(
                Partition::new(format!("{UNIT_PREFIX}{password}"), 1u8, *count)
                    .expect("unit partitions are well-formed"),
            );
        }
        partitions.extend(self.bins.model.partitions().iter().cloned());
        let total = search_space_size(self.bins.l_max).exact + self.units.len();
        PartitionModel::with_total_capacity(partitions, total)
            .expect("hybrid components are disjoint by construction")
    }
}

/// Split a corpus into its `top_k` most frequent passwords (ties broken
/// lexicographically) and a bin model over everything else.
pub fn build_hybrid_model(
    corpus: &Corpus,
    top_k: usize,
    l_max: u32,
) -> Result<HybridModel, AttackError> {
    let units = corpus.top_k(top_k);
    let unit_set: HashMap<&str, ()> = units.iter().map(|(p, _)| (p.as_str(), ())).collect();
    let residual = Corpus::from_counts(
        corpus
            .iter()
            .filter(|(password, _)| !unit_set.contains_key(password))
            .map(|(password, count)| (password.to_string(), count)),
    );
    let bins = build_bin_model(&residual, l_max)?;
    Ok(HybridModel { units, bins })
}

/// Expected cracked mass at one budget checkpoint.
#[derive(Debug, Clone)]
pub struct CurvePoint {
    /// the requested log2 budget label
    pub log2_budget: f64,
    /// evaluated budget, clamped to the model's total capacity
    pub budget: BigUint,
    /// expected cracked test mass (exact)
    pub cracked: BigRational,
    /// cracked / covered test mass; zero when nothing is covered
    pub fraction: BigRational,
}

/// A guess-number curve over a held-out corpus.
#[derive(Debug, Clone)]
pub struct GuessCurve {
    pub points: Vec<CurvePoint>,
    /// total test mass
    pub test_total: u64,
    /// test mass the model can ever crack (within length bound)
    pub test_covered: u64,
    /// test mass beyond the model's length bound
    pub test_over_length: u64,
}

/// Replay the model's exploration order against a test corpus.
///
/// Test mass is projected onto the train model: exact unit match first, then
/// the password's own bin, then the complement. Passwords longer than the
/// model's length bound are uncoverable and excluded from the fraction's
/// denominator. Within a partition the expectation is uniform: exploring e
/// of capacity c cracks mass·e/c.
pub fn simulate_attack(
    train: &HybridModel,
    test: &Corpus,
    order: PlanOrder,
    checkpoints_log2: &[f64],
) -> Result<GuessCurve, AttackError> {
    for window in checkpoints_log2.windows(2) {
        if window[0] > window[1] {
            return Err(AttackError::CheckpointsUnsorted);
        }
    }
    if let Some(&bad) = checkpoints_log2.iter().find(|x| !x.is_finite()) {
        return Err(AttackError::BadCheckpoint(bad));
    }

    let combined = train.combined_model();
    let complement_slot = combined.len();
    let mut unit_slots: HashMap<&str, usize> = HashMap::new();
    let mut bin_slots: HashMap<&str, usize> = HashMap::new();
    for (i, p) in combined.partitions().iter().enumerate() {
        match p.id().strip_prefix(UNIT_PREFIX) {
            Some(password) => unit_slots.insert(password, i),
            None => bin_slots.insert(p.id(), i),
        };
    }

    let l_max = train.bins.l_max() as usize;
    let entries = test.entries();
    let (mass, over_length) = fold_slice(
        &entries,
        || (vec![0u64; complement_slot + 1], 0u64),
        |(mut mass, mut over), &(password, count)| {
            if let Some(&slot) = unit_slots.get(password) {
                mass[slot] += count;
            } else if password.len() > l_max {
                over += count;
            } else {
                let signature = classify(password)
                    .expect("corpus passwords are printable")
                    .to_string();
                let slot = bin_slots
                    .get(signature.as_str())
                    .copied()
                    .unwrap_or(complement_slot);
                mass[slot] += count;
            }
            (mass, over)
        },
        |(mut a, ao), (b, bo)| {
            for (slot, m) in b.into_iter().enumerate() {
                a[slot] += m;
            }
            (a, ao + bo)
        },
    );

    let test_total = test.total();
    let test_covered = test_total - over_length;

    // prefix sums over the exploration order; checkpoint lookups then
    // binary-search the capacity prefix
    let order_ix = exploration_order(&combined, order);
    let slot_capacity = |slot: usize| -> &BigUint {
        if slot == complement_slot {
            combined.complement_capacity()
        } else {
            combined.partitions()[slot].capacity()
        }
    };
    let mut cap_prefix = vec![BigUint::zero()];
    let mut mass_prefix = vec![0u64];
    for &slot in &order_ix {
        cap_prefix.push(cap_prefix.last().unwrap() + slot_capacity(slot));
        mass_prefix.push(mass_prefix.last().unwrap() + mass[slot]);
    }

    let covered_ratio = BigRational::from_integer(BigInt::from(test_covered));
    let points = checkpoints_log2
        .iter()
        .map(|&log2_budget| {
            let mut budget = pow2_exact(log2_budget);
            if budget > *combined.total_capacity() {
                budget = combined.total_capacity().clone();
            }
            let full = cap_prefix.partition_point(|c| c <= &budget) - 1;
            let mut cracked =
                BigRational::from_integer(BigInt::from(mass_prefix[full]));
            if full < order_ix.len() {
                let slot = order_ix[full];
                let spent = &budget - &cap_prefix[full];
                cracked += BigRational::new(
                    BigInt::from(spent * mass[slot]),
                    BigInt::from(slot_capacity(slot).clone()),
                );
            }
            let fraction = if test_covered == 0 {
                BigRational::zero()
            } else {
                &cracked / &covered_ratio
            };
            CurvePoint {
                log2_budget,
                budget,
                cracked,
                fraction,
            }
        })
        .collect();

    Ok(GuessCurve {
        points,
        test_total,
        test_covered,
        test_over_length: over_length,
    })
}

/// Per-account salting divides an attacker's budget across salt values:
/// floor(budget / salt_values) guesses reach any one account.
pub fn effective_budget_after_salting(
    budget: &BigUint,
    salt_values: &BigUint,
) -> Result<BigUint, AttackError> {
    if salt_values.is_zero() {
        return Err(AttackError::ZeroSaltSpace);
    }
    Ok(budget / salt_values)
}

/// A guessing budget derived from hardware throughput and time.
#[derive(Debug, Clone)]
pub struct RateBudget {
    pub budget: BigUint,
    pub log2: f64,
}

pub fn budget_from_rate(guesses_per_second: &BigUint, seconds: &BigUint) -> RateBudget {
    let budget = guesses_per_second * seconds;
    let log2 = log2_biguint(&budget);
    RateBudget { budget, log2 }
}

/// How much long-lowercase password mass contains a popular word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LongPasswordShare {
    /// mass of passwords that are all lowercase and at least min_len long
    pub qualifying_mass: u64,
    /// the subset whose text contains a popular word as a substring
    pub matching_mass: u64,
}

impl LongPasswordShare {
    pub fn share(&self) -> f64 {
        if self.qualifying_mass == 0 {
            0.0
        } else {
            self.matching_mass as f64 / self.qualifying_mass as f64
        }
    }
}

/// Scan all-lowercase passwords of at least `min_len` characters for popular
/// words as substrings (case-sensitive, multi-pattern scan).
pub fn long_password_substring_share(
    corpus: &Corpus,
    popular: &[String],
    min_len: usize,
) -> Result<LongPasswordShare, AttackError> {
    if popular.iter().any(|w| w.is_empty()) {
        return Err(AttackError::EmptyPattern);
    }
    let scanner = AhoCorasick::new(popular).expect("non-empty literal patterns");
    let entries = corpus.entries();
    let (qualifying, matching) = fold_slice(
        &entries,
        || (0u64, 0u64),
        |(mut qualifying, mut matching), &(password, count)| {
            if password.len() >= min_len && password.bytes().all(|b| b.is_ascii_lowercase()) {
                qualifying += count;
                if scanner.is_match(password) {
                    matching += count;
                }
            }
            (qualifying, matching)
        },
        |(aq, am), (bq, bm)| (aq + bq, am + bm),
    );
    Ok(LongPasswordShare {
        qualifying_mass: qualifying,
        matching_mass: matching,
    })
}

/// Occupancy of one signature length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilizationRow {
    pub length: u32,
    /// 4^length signatures exist at this length
    pub available: BigUint,
    /// signatures actually observed
    pub utilized: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilizationReport {
    pub rows: Vec<UtilizationRow>,
    pub total_utilized: u64,
}

/// How many of the possible signatures per length the corpus actually
/// touches. Real corpora concentrate in a vanishing share of them.
pub fn utilization_report(model: &BinModel) -> UtilizationReport {
    let mut per_length: HashMap<usize, u64> = HashMap::new();
    for p in model.model.partitions() {
        if !p.count().is_zero() {
            *per_length.entry(p.id().len()).or_insert(0) += 1;
        }
    }
    let rows: Vec<UtilizationRow> = (1..=model.l_max)
        .map(|length| UtilizationRow {
            length,
            available: BigUint::from(4u8).pow(length),
            utilized: per_length.get(&(length as usize)).copied().unwrap_or(0),
        })
        .collect();
    let total_utilized = rows.iter().map(|r| r.utilized).sum();
    UtilizationReport {
        rows,
        total_utilized,
    }
}
