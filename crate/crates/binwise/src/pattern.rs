//! Quantified class patterns over bin signatures.
//!
//! A pattern is a sequence of class terms, each with a repeat range:
//! `U1L+D+` (exactly one uppercase, then lowercase, then digits),
//! `U?L*S1U?L*`, `L{2,4}`. Bare digits after a class mean an exact repeat
//! count; `+`, `*`, `?`, and `{i,j}` carry their usual meanings. Matching is
//! anchored: the whole signature must be consumed.
//!
//! Patterns aggregate bins, so matching and enumeration stay in signature
//! space; they never touch concrete passwords.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bins::{BinSignature, CharClass, ClassifyError};

const ENUMERATION_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("pattern syntax error at byte {pos}: {what}")]
    Syntax { pos: usize, what: &'static str },
    #[error("bad repeat bounds {{{min},{max}}} at byte {pos}: min exceeds max")]
    ReversedBounds { pos: usize, min: u32, max: u32 },
    #[error("enumeration exceeds {limit} signatures")]
    TooLarge { limit: usize },
    #[error("bad constraint: {0}")]
    BadConstraint(&'static str),
    #[error(transparent)]
    Class(#[from] ClassifyError),
}

/// One quantified class: between `min` and `max` (None = unbounded)
/// consecutive positions of `class`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternTerm {
    pub class: CharClass,
    pub min: u32,
    pub max: Option<u32>,
}

/// An anchored sequence of quantified class terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinPattern {
    terms: Vec<PatternTerm>,
}

impl BinPattern {
    pub fn new(terms: Vec<PatternTerm>) -> Self {
        BinPattern { terms }
    }

    pub fn terms(&self) -> &[PatternTerm] {
        &self.terms
    }

    /// Anchored match: the signature must be exactly a concatenation of runs
    /// admitted by the terms, in order.
    pub fn matches(&self, signature: &BinSignature) -> bool {
        let classes = signature.classes();
        let n_terms = self.terms.len();
        let n = classes.len();
        // Memoized backtracking over (term index, position). Each cell is
        // visited once, so the cost is O(terms · length · max run).
        let mut memo = vec![None::<bool>; (n_terms + 1) * (n + 1)];
        self.match_at(0, 0, classes, &mut memo, n + 1)
    }

    fn match_at(
        &self,
        term: usize,
        pos: usize,
        classes: &[CharClass],
        memo: &mut [Option<bool>],
        stride: usize,
    ) -> bool {
        if let Some(hit) = memo[term * stride + pos] {
            return hit;
        }
        let result = if term == self.terms.len() {
            pos == classes.len()
        } else {
            let t = self.terms[term];
            let run = classes[pos..]
                .iter()
                .take_while(|&&c| c == t.class)
                .count();
            let hi = t.max.map_or(run, |m| (m as usize).min(run));
            let lo = t.min as usize;
            (lo..=hi).any(|k| self.match_at(term + 1, pos + k, classes, memo, stride))
        };
        memo[term * stride + pos] = Some(result);
        result
    }

    /// All signatures of exactly `len` positions matched by this pattern, in
    /// textual order. Errors beyond the enumeration guard.
    pub fn enumerate(&self, len: usize) -> Result<Vec<BinSignature>, PatternError> {
        let mut out = BTreeSet::new();
        let mut prefix = Vec::with_capacity(len);
        self.expand(0, len, &mut prefix, &mut out)?;
        Ok(out.into_iter().collect())
    }

    fn expand(
        &self,
        term: usize,
        len: usize,
        prefix: &mut Vec<CharClass>,
        out: &mut BTreeSet<BinSignature>,
    ) -> Result<(), PatternError> {
        if term == self.terms.len() {
            if prefix.len() == len && !prefix.is_empty() {
                if out.len() >= ENUMERATION_LIMIT {
                    return Err(PatternError::TooLarge {
                        limit: ENUMERATION_LIMIT,
                    });
                }
                out.insert(BinSignature::new(prefix.clone()).expect("non-empty"));
            }
            return Ok(());
        }
        let t = self.terms[term];
        let remaining = len - prefix.len();
        let min_rest: usize = self.terms[term + 1..]
            .iter()
            .map(|t| t.min as usize)
            .sum();
        let hi = t
            .max
            .map_or(remaining, |m| (m as usize).min(remaining))
            .min(remaining.saturating_sub(min_rest));
        let lo = t.min as usize;
        for k in lo..=hi {
            // hi < lo leaves the range empty, pruning infeasible branches
            prefix.extend(std::iter::repeat(t.class).take(k));
            self.expand(term + 1, len, prefix, out)?;
            prefix.truncate(prefix.len() - k);
        }
        Ok(())
    }
}

impl fmt::Display for BinPattern {
    /// Canonical text form: shorthand where one exists, braces otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            write!(f, "{}", t.class.symbol())?;
            match (t.min, t.max) {
                (1, Some(1)) => {}
                (1, None) => write!(f, "+")?,
                (0, None) => write!(f, "*")?,
                (0, Some(1)) => write!(f, "?")?,
                (a, Some(b)) if a == b => write!(f, "{a}")?,
                (a, Some(b)) => write!(f, "{{{a},{b}}}")?,
                (a, None) => write!(f, "{{{a},}}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for BinPattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.as_bytes();
        let mut terms = Vec::new();
        let mut i = 0;
        if bytes.is_empty() {
            return Err(PatternError::Syntax {
                pos: 0,
                what: "empty pattern",
            });
        }
        while i < bytes.len() {
            let class = CharClass::from_symbol(bytes[i] as char).map_err(|_| {
                PatternError::Syntax {
                    pos: i,
                    what: "expected a class symbol (L, U, D, S)",
                }
            })?;
            i += 1;
            let (min, max) = match bytes.get(i) {
                Some(b'+') => {
                    i += 1;
                    (1, None)
                }
                Some(b'*') => {
                    i += 1;
                    (0, None)
                }
                Some(b'?') => {
                    i += 1;
                    (0, Some(1))
                }
                Some(b'{') => {
                    let open = i;
                    i += 1;
                    let min = take_number(bytes, &mut i).ok_or(PatternError::Syntax {
                        pos: i,
                        what: "expected a repeat count",
                    })?;
                    let max = match bytes.get(i) {
                        Some(b',') => {
                            i += 1;
                            if bytes.get(i) == Some(&b'}') {
                                None // {i,} means i or more
                            } else {
                                Some(take_number(bytes, &mut i).ok_or(PatternError::Syntax {
                                    pos: i,
                                    what: "expected an upper repeat bound",
                                })?)
                            }
                        }
                        Some(b'}') => Some(min),
                        _ => {
                            return Err(PatternError::Syntax {
                                pos: i,
                                what: "expected ',' or '}'",
                            })
                        }
                    };
                    if bytes.get(i) != Some(&b'}') {
                        return Err(PatternError::Syntax {
                            pos: i,
                            what: "unterminated repeat bounds",
                        });
                    }
                    i += 1;
                    if let Some(max) = max {
                        if min > max {
                            return Err(PatternError::ReversedBounds {
                                pos: open,
                                min,
                                max,
                            });
                        }
                    }
                    (min, max)
                }
                Some(b) if b.is_ascii_digit() => {
                    // subscript form: exact repeat count
                    let n = take_number(bytes, &mut i).expect("digit present");
                    (n, Some(n))
                }
                _ => (1, Some(1)),
            };
            terms.push(PatternTerm { class, min, max });
        }
        Ok(BinPattern { terms })
    }
}

fn take_number(bytes: &[u8], i: &mut usize) -> Option<u32> {
    let start = *i;
    while *i < bytes.len() && bytes[*i].is_ascii_digit() {
        *i += 1;
    }
    if *i == start {
        return None;
    }
    std::str::from_utf8(&bytes[start..*i])
        .ok()?
        .parse()
        .ok()
}

/// Constraint language for bin enumeration. Sequential patterns cannot
/// express position-free counting constraints ("exactly six lowercase
/// positions, anywhere"), so those get their own arm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BinConstraint {
    /// Every signature of the requested length.
    Any,
    /// Signatures matched by an anchored pattern.
    Pattern(BinPattern),
    /// Exactly `count` positions of `class`; every other position drawn from
    /// `rest` (which must not contain `class`).
    ExactClassCount {
        class: CharClass,
        count: usize,
        rest: Vec<CharClass>,
    },
}

/// All signatures of length `l` satisfying the constraint, in textual order.
/// Guarded to 10^6 results.
pub fn enumerate_constrained_bins(
    l: usize,
    constraint: &BinConstraint,
) -> Result<Vec<BinSignature>, PatternError> {
    if l == 0 {
        return Err(PatternError::BadConstraint("length must be at least 1"));
    }
    match constraint {
        BinConstraint::Any => {
            let total = 4usize.checked_pow(l as u32).filter(|&t| t <= ENUMERATION_LIMIT);
            let Some(total) = total else {
                return Err(PatternError::TooLarge {
                    limit: ENUMERATION_LIMIT,
                });
            };
            let mut out = Vec::with_capacity(total);
            let mut prefix = Vec::with_capacity(l);
            enumerate_all(l, &mut prefix, &mut out);
            Ok(out)
        }
        BinConstraint::Pattern(p) => p.enumerate(l),
        BinConstraint::ExactClassCount { class, count, rest } => {
            if *count > l {
                return Err(PatternError::BadConstraint(
                    "class count exceeds the signature length",
                ));
            }
            if rest.contains(class) {
                return Err(PatternError::BadConstraint(
                    "rest classes must exclude the counted class",
                ));
            }
            if rest.is_empty() && *count < l {
                return Err(PatternError::BadConstraint(
                    "rest classes must be non-empty when count < length",
                ));
            }
            let expected = binomial(l, *count)
                .and_then(|c| c.checked_mul((rest.len().max(1)).checked_pow((l - count) as u32)?));
            match expected {
                Some(n) if n <= ENUMERATION_LIMIT => {}
                _ => {
                    return Err(PatternError::TooLarge {
                        limit: ENUMERATION_LIMIT,
                    })
                }
            }
            let mut rest = rest.clone();
            rest.sort_by_key(|c| c.symbol());
            rest.dedup();
            let mut out = Vec::new();
            let mut prefix = Vec::with_capacity(l);
            enumerate_exact_count(l, *class, *count, &rest, &mut prefix, &mut out);
            out.sort();
            Ok(out)
        }
    }
}

fn enumerate_all(l: usize, prefix: &mut Vec<CharClass>, out: &mut Vec<BinSignature>) {
    if prefix.len() == l {
        out.push(BinSignature::new(prefix.clone()).expect("non-empty"));
        return;
    }
    // textual order: D < L < S < U
    for class in [
        CharClass::Digit,
        CharClass::Lower,
        CharClass::Symbol,
        CharClass::Upper,
    ] {
        prefix.push(class);
        enumerate_all(l, prefix, out);
        prefix.pop();
    }
}

fn enumerate_exact_count(
    l: usize,
    class: CharClass,
    count: usize,
    rest: &[CharClass],
    prefix: &mut Vec<CharClass>,
    out: &mut Vec<BinSignature>,
) {
    let used: usize = prefix.iter().filter(|&&c| c == class).count();
    let remaining = l - prefix.len();
    if used > count || count - used > remaining {
        return;
    }
    if prefix.len() == l {
        out.push(BinSignature::new(prefix.clone()).expect("non-empty"));
        return;
    }
    prefix.push(class);
    enumerate_exact_count(l, class, count, rest, prefix, out);
    prefix.pop();
    for &r in rest {
        prefix.push(r);
        enumerate_exact_count(l, class, count, rest, prefix, out);
        prefix.pop();
    }
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}
