//! Partitioned candidate spaces and budgeted exploration plans.
//!
//! A [`Partition`] is a disjoint slice of some finite candidate space: it has
//! a capacity (how many candidates live there) and a count (how much observed
//! mass landed there). A [`PartitionModel`] is a set of partitions plus an
//! optional unobserved complement, so the model's total capacity can equal a
//! full search space even when only a sliver of it was ever seen.
//!
//! Planning is fractional-knapsack greedy: explore partitions in density
//! order (count per unit capacity), filling each completely before moving on,
//! with at most one partially explored frontier partition. That plan is
//! provably optimal among all budget-respecting allocations; the brute-force
//! [`oracle_optimal_allocation`] exists so tests can re-derive optimality
//! from nothing but enumeration.
//!
//! Densities are compared by cross-multiplication and expected values are
//! exact rationals. No floats participate in any ordering or allocation.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{log2_ratio, ratio_display, ratio_to_f64};

/// Reserved id for the unobserved remainder of a model's space.
pub const COMPLEMENT_ID: &str = "*";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("duplicate partition id '{0}'")]
    DuplicateId(String),
    #[error("partition id '{0}' is reserved")]
    ReservedId(String),
    #[error("partition '{0}' has zero capacity")]
    ZeroCapacity(String),
    #[error("unknown partition id '{0}' in plan")]
    UnknownPartition(String),
    #[error("total capacity {total} is smaller than the partition capacity sum {sum}")]
    TotalCapacityTooSmall { total: String, sum: String },
    #[error("total count {total} does not match the partition count sum {sum}")]
    TotalCountMismatch { total: String, sum: String },
    #[error("number '{0}' is not a decimal integer")]
    BadNumber(String),
    #[error(
        "oracle instance too large: {partitions} partitions / total capacity {capacity} \
         (limits: {max_partitions} partitions, capacity {max_capacity})"
    )]
    OracleGuard {
        partitions: usize,
        capacity: String,
        max_partitions: usize,
        max_capacity: u64,
    },
    #[error("model json: {0}")]
    Json(#[from] serde_json::Error),
}

/// One slice of the candidate space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    id: String,
    capacity: BigUint,
    count: BigUint,
}

impl Partition {
    pub fn new(
        id: impl Into<String>,
        capacity: impl Into<BigUint>,
        count: impl Into<BigUint>,
    ) -> Result<Self, ModelError> {
        let id = id.into();
        let capacity = capacity.into();
        if id == COMPLEMENT_ID {
            return Err(ModelError::ReservedId(id));
        }
        if capacity.is_zero() {
            return Err(ModelError::ZeroCapacity(id));
        }
        Ok(Partition {
            id,
            capacity,
            count: count.into(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn capacity(&self) -> &BigUint {
        &self.capacity
    }

    pub fn count(&self) -> &BigUint {
        &self.count
    }

    /// count/capacity as an exact rational.
    pub fn density(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.count.clone()),
            BigInt::from(self.capacity.clone()),
        )
    }
}

/// Compare densities count/capacity without forming quotients:
/// count_a·cap_b vs count_b·cap_a.
pub fn compare_density(a: &Partition, b: &Partition) -> Ordering {
    (&a.count * &b.capacity).cmp(&(&b.count * &a.capacity))
}

/// A partitioned space with observed mass, plus an optional unobserved
/// complement (capacity only, count zero) so the total capacity can cover a
/// full search space.
#[derive(Debug, Clone)]
pub struct PartitionModel {
    partitions: Vec<Partition>,
    complement: BigUint,
    index: HashMap<String, usize>,
    total_count: BigUint,
    total_capacity: BigUint,
}

impl PartitionModel {
    /// Model whose total capacity is exactly the sum over partitions.
    pub fn new(partitions: Vec<Partition>) -> Result<Self, ModelError> {
        Self::build(partitions, None)
    }

    /// Model embedded in a larger space: `total_capacity` may exceed the
    /// partition capacity sum, and the difference becomes the complement.
    pub fn with_total_capacity(
        partitions: Vec<Partition>,
        total_capacity: BigUint,
    ) -> Result<Self, ModelError> {
        Self::build(partitions, Some(total_capacity))
    }

    fn build(
        partitions: Vec<Partition>,
        total_capacity: Option<BigUint>,
    ) -> Result<Self, ModelError> {
        let mut index = HashMap::with_capacity(partitions.len());
        let mut total_count = BigUint::zero();
        let mut capacity_sum = BigUint::zero();
        for (i, p) in partitions.iter().enumerate() {
            if index.insert(p.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateId(p.id.clone()));
            }
            total_count += &p.count;
            capacity_sum += &p.capacity;
        }
        let (total_capacity, complement) = match total_capacity {
            Some(total) => {
                if total < capacity_sum {
                    return Err(ModelError::TotalCapacityTooSmall {
                        total: total.to_string(),
                        sum: capacity_sum.to_string(),
                    });
                }
                let complement = &total - &capacity_sum;
                (total, complement)
            }
            None => (capacity_sum, BigUint::zero()),
        };
        Ok(PartitionModel {
            partitions,
            complement,
            index,
            total_count,
            total_capacity,
        })
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    /// Capacity of the unobserved remainder (zero when the model covers
    /// exactly its partitions).
    pub fn complement_capacity(&self) -> &BigUint {
        &self.complement
    }

    pub fn total_count(&self) -> &BigUint {
        &self.total_count
    }

    pub fn total_capacity(&self) -> &BigUint {
        &self.total_capacity
    }

    pub fn get(&self, id: &str) -> Option<&Partition> {
        self.index.get(id).map(|&i| &self.partitions[i])
    }

    /// (capacity, count) for any plannable id, including the complement.
    fn lookup(&self, id: &str) -> Option<(BigUint, BigUint)> {
        if id == COMPLEMENT_ID {
            if self.complement.is_zero() {
                return None;
            }
            return Some((self.complement.clone(), BigUint::zero()));
        }
        self.get(id)
            .map(|p| (p.capacity.clone(), p.count.clone()))
    }

    /// Serialize as JSON with all integers as decimal strings.
    pub fn to_json(&self) -> String {
        let dump = ModelDump {
            partitions: self
                .partitions
                .iter()
                .map(|p| PartitionDump {
                    id: p.id.clone(),
                    capacity: p.capacity.to_string(),
                    count: p.count.to_string(),
                })
                .collect(),
            total_count: self.total_count.to_string(),
            total_capacity: self.total_capacity.to_string(),
        };
        serde_json::to_string_pretty(&dump).expect("dump is serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let dump: ModelDump = serde_json::from_str(text)?;
        let parse = |s: &str| -> Result<BigUint, ModelError> {
            s.parse()
                .map_err(|_| ModelError::BadNumber(s.to_string()))
        };
        let mut partitions = Vec::with_capacity(dump.partitions.len());
        for p in &dump.partitions {
            partitions.push(Partition::new(
                p.id.clone(),
                parse(&p.capacity)?,
                parse(&p.count)?,
            )?);
        }
        let total_count = parse(&dump.total_count)?;
        let total_capacity = parse(&dump.total_capacity)?;
        let model = Self::with_total_capacity(partitions, total_capacity)?;
        if model.total_count != total_count {
            return Err(ModelError::TotalCountMismatch {
                total: total_count.to_string(),
                sum: model.total_count.to_string(),
            });
        }
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
struct PartitionDump {
    id: String,
    capacity: String,
    count: String,
}

#[derive(Serialize, Deserialize)]
struct ModelDump {
    partitions: Vec<PartitionDump>,
    total_count: String,
    total_capacity: String,
}

/// Effort assigned to one partition by a plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanEntry {
    pub id: String,
    pub effort: BigUint,
}

/// A budgeted exploration plan: partitions in exploration order, a full
/// prefix, at most one partial frontier, zeros after.
#[derive(Debug, Clone)]
pub struct AttackPlan {
    entries: Vec<PlanEntry>,
    budget: BigUint,
    spent: BigUint,
    clamped: bool,
    frontier: Option<usize>,
    fully_explored: usize,
}

impl AttackPlan {
    /// All plannable partitions in exploration order (complement last when
    /// present), including zero-effort tail entries.
    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    /// Requested budget before any clamping.
    pub fn budget(&self) -> &BigUint {
        &self.budget
    }

    /// Total effort actually allocated: min(budget, total capacity).
    pub fn spent(&self) -> &BigUint {
        &self.spent
    }

    /// True when the requested budget exceeded the space and was clamped.
    pub fn clamped(&self) -> bool {
        self.clamped
    }

    /// Number of fully explored partitions (the prefix length).
    pub fn fully_explored(&self) -> usize {
        self.fully_explored
    }

    /// Index of the partially explored partition, if any.
    pub fn frontier(&self) -> Option<usize> {
        self.frontier
    }

    pub fn effort_for(&self, id: &str) -> Option<&BigUint> {
        self.entries.iter().find(|e| e.id == id).map(|e| &e.effort)
    }
}

/// Exact expected number of successes, with float views for reporting.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExpectedSuccess {
    value: BigRational,
}

impl ExpectedSuccess {
    pub fn from_ratio(value: BigRational) -> Self {
        debug_assert!(value >= BigRational::zero());
        ExpectedSuccess { value }
    }

    pub fn zero() -> Self {
        ExpectedSuccess {
            value: BigRational::zero(),
        }
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.value)
    }

    pub fn log2(&self) -> f64 {
        log2_ratio(&self.value)
    }
}

impl fmt::Display for ExpectedSuccess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", ratio_display(&self.value))
    }
}

/// The two exploration orders a planner can use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanOrder {
    /// count per unit capacity, descending (optimal)
    Density,
    /// observed count, descending
    Probability,
}

fn order_comparator(order: PlanOrder) -> impl Fn(&Partition, &Partition) -> Ordering {
    move |a, b| match order {
        PlanOrder::Density => compare_density(b, a)
            .then_with(|| b.count.cmp(&a.count))
            .then_with(|| a.id.cmp(&b.id)),
        PlanOrder::Probability => b.count.cmp(&a.count).then_with(|| a.id.cmp(&b.id)),
    }
}

/// Exploration order over a model: indices into an extended partition list
/// where `model.len()` denotes the complement.
fn sorted_order<F>(model: &PartitionModel, mut before: F) -> Vec<usize>
where
    F: FnMut(&Partition, &Partition) -> Ordering,
{
    let mut order: Vec<usize> = (0..model.partitions.len()).collect();
    order.sort_by(|&i, &j| before(&model.partitions[i], &model.partitions[j]));
    if !model.complement.is_zero() {
        order.push(model.partitions.len());
    }
    order
}

/// Partition indices in exploration order; `model.len()` stands for the
/// complement and is always last when the complement is non-empty.
pub fn exploration_order(model: &PartitionModel, order: PlanOrder) -> Vec<usize> {
    sorted_order(model, order_comparator(order))
}

fn fill_plan(model: &PartitionModel, order: Vec<usize>, budget: BigUint) -> AttackPlan {
    let clamped = budget > model.total_capacity;
    let mut remaining = if clamped {
        model.total_capacity.clone()
    } else {
        budget.clone()
    };
    let spent = remaining.clone();
    let mut entries = Vec::with_capacity(order.len());
    let mut frontier = None;
    let mut fully_explored = 0;
    for idx in order {
        let (id, capacity) = if idx == model.partitions.len() {
            (COMPLEMENT_ID.to_string(), &model.complement)
        } else {
            let p = &model.partitions[idx];
            (p.id.clone(), &p.capacity)
        };
        let effort = if remaining >= *capacity {
            remaining -= capacity;
            fully_explored += 1;
            capacity.clone()
        } else if remaining.is_zero() {
            BigUint::zero()
        } else {
            let effort = std::mem::take(&mut remaining);
            frontier = Some(entries.len());
            effort
        };
        entries.push(PlanEntry { id, effort });
    }
    AttackPlan {
        entries,
        budget,
        spent,
        clamped,
        frontier,
        fully_explored,
    }
}

/// Greedy plan in density order (count per unit capacity, descending).
/// Ties break toward the larger count, then lexicographic id. Zero-count
/// partitions have density zero and therefore trail every observed one;
/// the complement, when present, is always explored last.
pub fn plan_density_order(model: &PartitionModel, budget: BigUint) -> AttackPlan {
    fill_plan(model, exploration_order(model, PlanOrder::Density), budget)
}

/// Plan in observed-count order (descending), same residual tie-break chain
/// as the density planner (count first — vacuous here — then id).
pub fn plan_probability_order(model: &PartitionModel, budget: BigUint) -> AttackPlan {
    fill_plan(model, exploration_order(model, PlanOrder::Probability), budget)
}

/// Expected successes of a plan against a model: Σ effort_i · count_i / capacity_i.
///
/// Errors when the plan references an id the model does not know.
pub fn expected_success(
    model: &PartitionModel,
    plan: &AttackPlan,
) -> Result<ExpectedSuccess, ModelError> {
    let mut total = BigRational::zero();
    for entry in &plan.entries {
        let (capacity, count) = model
            .lookup(&entry.id)
            .ok_or_else(|| ModelError::UnknownPartition(entry.id.clone()))?;
        if entry.effort.is_zero() || count.is_zero() {
            continue;
        }
        total += BigRational::new(
            BigInt::from(&entry.effort * &count),
            BigInt::from(capacity),
        );
    }
    Ok(ExpectedSuccess::from_ratio(total))
}

/// Expected successes when mass is spread uniformly: count · min(budget, capacity) / capacity.
pub fn uniform_expected_success(
    count: &BigUint,
    capacity: &BigUint,
    budget: &BigUint,
) -> ExpectedSuccess {
    assert!(!capacity.is_zero(), "capacity must be positive");
    let effective = budget.min(capacity);
    ExpectedSuccess::from_ratio(BigRational::new(
        BigInt::from(count * effective),
        BigInt::from(capacity.clone()),
    ))
}

/// Closed-form optimum: walk partitions in density order, take full
/// partitions while budget lasts, credit the frontier fractionally.
///
/// Algebraically independent of [`expected_success`] applied to
/// [`plan_density_order`]; tests assert the two routes agree.
pub fn max_expected_success(model: &PartitionModel, budget: &BigUint) -> ExpectedSuccess {
    let order = exploration_order(model, PlanOrder::Density);
    let mut remaining = budget.min(&model.total_capacity).clone();
    let mut total = BigRational::zero();
    for idx in order {
        if remaining.is_zero() {
            break;
        }
        let (capacity, count) = if idx == model.partitions.len() {
            (model.complement.clone(), BigUint::zero())
        } else {
            let p = &model.partitions[idx];
            (p.capacity.clone(), p.count.clone())
        };
        if remaining >= capacity {
            remaining -= &capacity;
            total += BigRational::from_integer(BigInt::from(count));
        } else {
            total += BigRational::new(
                BigInt::from(&remaining * &count),
                BigInt::from(capacity),
            );
            remaining = BigUint::zero();
        }
    }
    ExpectedSuccess::from_ratio(total)
}

const ORACLE_MAX_PARTITIONS: usize = 5;
const ORACLE_MAX_CAPACITY: u64 = 64;

fn oracle_guard(model: &PartitionModel) -> Result<(Vec<u64>, Vec<BigUint>, u64), ModelError> {
    let capacity_fits = model.total_capacity.to_u64();
    let ok = model.partitions.len() <= ORACLE_MAX_PARTITIONS
        && model.complement.is_zero()
        && capacity_fits.is_some_and(|c| c <= ORACLE_MAX_CAPACITY);
    if !ok {
        return Err(ModelError::OracleGuard {
            partitions: model.partitions.len(),
            capacity: model.total_capacity.to_string(),
            max_partitions: ORACLE_MAX_PARTITIONS,
            max_capacity: ORACLE_MAX_CAPACITY,
        });
    }
    let caps: Vec<u64> = model
        .partitions
        .iter()
        .map(|p| p.capacity.to_u64().expect("bounded by total"))
        .collect();
    // Scale every per-candidate value to the common denominator ∏ capacities
    // so allocation values are integers and comparisons never touch floats.
    let denom: BigUint = model
        .partitions
        .iter()
        .fold(BigUint::one(), |acc, p| acc * &p.capacity);
    let weights: Vec<BigUint> = model
        .partitions
        .iter()
        .map(|p| &p.count * (&denom / &p.capacity))
        .collect();
    Ok((caps, weights, capacity_fits.expect("checked")))
}

/// Exhaustive optimum for one budget: enumerate every integer allocation
/// with Σ effort = min(budget, capacity), return the best expected success
/// and a witness allocation (efforts in partition order).
///
/// Guarded to at most 5 partitions and total capacity 64; use it as a test
/// oracle, not a planner.
pub fn oracle_optimal_allocation(
    model: &PartitionModel,
    budget: &BigUint,
) -> Result<(ExpectedSuccess, Vec<BigUint>), ModelError> {
    let (caps, weights, total) = oracle_guard(model)?;
    let budget = budget.to_u64().map_or(total, |b| b.min(total));
    let denom: BigUint = caps.iter().map(|&c| BigUint::from(c)).product();

    let n = caps.len();
    let mut best: Option<(BigUint, Vec<u64>)> = None;
    let mut alloc = vec![0u64; n];
    // Depth-first over feasible allocations only: at each level the effort is
    // bounded below by what later capacities cannot absorb.
    fn recurse(
        level: usize,
        left: u64,
        caps: &[u64],
        tail_capacity: &[u64],
        weights: &[BigUint],
        value: BigUint,
        alloc: &mut Vec<u64>,
        best: &mut Option<(BigUint, Vec<u64>)>,
    ) {
        if level == caps.len() {
            debug_assert_eq!(left, 0);
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                *best = Some((value, alloc.clone()));
            }
            return;
        }
        let tail = tail_capacity[level + 1];
        let lo = left.saturating_sub(tail);
        let hi = left.min(caps[level]);
        for effort in lo..=hi {
            alloc[level] = effort;
            recurse(
                level + 1,
                left - effort,
                caps,
                tail_capacity,
                weights,
                &value + &weights[level] * effort,
                alloc,
                best,
            );
        }
        alloc[level] = 0;
    }
    // tail_capacity[i] = Σ caps[i..]
    let mut tail_capacity = vec![0u64; n + 1];
    for i in (0..n).rev() {
        tail_capacity[i] = tail_capacity[i + 1] + caps[i];
    }
    recurse(
        0,
        budget,
        &caps,
        &tail_capacity,
        &weights,
        BigUint::zero(),
        &mut alloc,
        &mut best,
    );
    let (value, witness) = best.expect("budget ≤ capacity admits an allocation");
    Ok((
        ExpectedSuccess::from_ratio(BigRational::new(
            BigInt::from(value),
            BigInt::from(denom),
        )),
        witness.into_iter().map(BigUint::from).collect(),
    ))
}

/// Exhaustive optima for every budget 0..=total capacity in one sweep over
/// all allocations. Entry `b` is the best expected success with budget `b`.
/// Same guards as [`oracle_optimal_allocation`].
pub fn oracle_all_budgets(model: &PartitionModel) -> Result<Vec<ExpectedSuccess>, ModelError> {
    let (caps, weights, total) = oracle_guard(model)?;
    let denom: BigUint = caps.iter().map(|&c| BigUint::from(c)).product();
    // weights fit u128 for any instance the guard admits in practice; fall
    // back to exact big integers if a pathological count overflows. The
    // check bounds the largest reachable value, Σ capacity_i · weight_i.
    let small: Option<Vec<u128>> = weights.iter().map(|w| w.to_u128()).collect();
    let small = small.filter(|ws| {
        let mut acc: u128 = 0;
        ws.iter().zip(&caps).all(|(w, &c)| {
            match w.checked_mul(c as u128).and_then(|t| acc.checked_add(t)) {
                Some(v) => {
                    acc = v;
                    true
                }
                None => false,
            }
        })
    });
    let best_scaled: Vec<BigUint> = match small {
        Some(w128) => {
            let mut best = vec![0u128; total as usize + 1];
            sweep_u128(0, 0, 0, &caps, &w128, &mut best);
            best.into_iter().map(BigUint::from).collect()
        }
        None => {
            let mut best = vec![BigUint::zero(); total as usize + 1];
            sweep_big(0, 0, BigUint::zero(), &caps, &weights, &mut best);
            best
        }
    };
    Ok(best_scaled
        .into_iter()
        .map(|v| {
            ExpectedSuccess::from_ratio(BigRational::new(
                BigInt::from(v),
                BigInt::from(denom.clone()),
            ))
        })
        .collect())
}

fn sweep_u128(level: usize, used: u64, value: u128, caps: &[u64], weights: &[u128], best: &mut [u128]) {
    if level == caps.len() {
        if value > best[used as usize] {
            best[used as usize] = value;
        }
        return;
    }
    for effort in 0..=caps[level] {
        sweep_u128(
            level + 1,
            used + effort,
            value + weights[level] * effort as u128,
            caps,
            weights,
            best,
        );
    }
}

fn sweep_big(
    level: usize,
    used: u64,
    value: BigUint,
    caps: &[u64],
    weights: &[BigUint],
    best: &mut [BigUint],
) {
    if level == caps.len() {
        if value > best[used as usize] {
            best[used as usize] = value;
        }
        return;
    }
    for effort in 0..=caps[level] {
        sweep_big(
            level + 1,
            used + effort,
            &value + &weights[level] * effort,
            caps,
            weights,
            best,
        );
    }
}
