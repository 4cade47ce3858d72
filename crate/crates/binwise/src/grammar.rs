//! Guess ordering for single-slot template grammars.
//!
//! A pre-terminal is a literal template with exactly one alpha slot to be
//! filled from a dictionary of fixed-length words, e.g. `"$L412"`: literal
//! `$`, a four-letter word, literal `12`. Two orderings are compared:
//!
//! - probability order: pre-terminals by observed count, descending
//! - density order: pre-terminals by count per dictionary word, descending
//!
//! Sorting every expanded guess by its individual probability reproduces
//! the density order's blocks — the equivalence [`equivalence_check`]
//! verifies on any instance.
//!
//! Slot syntax: `${L<m>}` anywhere, or the bare form `L<digit>` where the
//! slot length is a single digit (every conventional template uses lengths
//! 1–9; use braces for longer words or to keep a digit literal after the
//! slot).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("template {0:?} has no alpha slot")]
    MissingSlot(String),
    #[error("template {0:?} has more than one alpha slot")]
    MultipleSlots(String),
    #[error("template {template:?}: {reason}")]
    BadTemplate {
        template: String,
        reason: &'static str,
    },
    #[error("template {template:?} needs a length-{length} dictionary")]
    MissingDictionary { template: String, length: u32 },
    #[error("duplicate template {0:?}")]
    DuplicateTemplate(String),
    #[error("dictionary for length {0} is empty")]
    EmptyDictionary(u32),
    #[error("word {word:?} does not have length {length}")]
    WordLengthMismatch { word: String, length: u32 },
    #[error("word {0:?} is empty or not printable ASCII")]
    BadWord(String),
    #[error("bad dictionary length key {0:?}")]
    BadLengthKey(String),
    #[error("instance json: {0}")]
    Json(#[from] serde_json::Error),
}

fn printable(s: &str) -> bool {
    s.bytes().all(|b| (0x20..=0x7E).contains(&b))
}

fn validate_slot(already: bool, template: &str, length: u32) -> Result<u32, GrammarError> {
    if already {
        return Err(GrammarError::MultipleSlots(template.to_string()));
    }
    if length == 0 {
        return Err(GrammarError::BadTemplate {
            template: template.to_string(),
            reason: "slot length must be at least 1",
        });
    }
    Ok(length)
}

/// One template with its observed count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreTerminal {
    template: String,
    prefix: String,
    suffix: String,
    word_length: u32,
    count: u64,
}

impl PreTerminal {
    pub fn parse(template: &str, count: u64) -> Result<Self, GrammarError> {
        if !printable(template) {
            return Err(GrammarError::BadTemplate {
                template: template.to_string(),
                reason: "not printable ASCII",
            });
        }
        let bytes = template.as_bytes();
        let mut slot: Option<u32> = None;
        let mut prefix = String::new();
        let mut suffix = String::new();
        let mut literal = &mut prefix;
        let mut i = 0;
        while i < bytes.len() {
            if bytes[i..].starts_with(b"${") {
                let close = bytes[i..]
                    .iter()
                    .position(|&b| b == b'}')
                    .ok_or(GrammarError::BadTemplate {
                        template: template.to_string(),
                        reason: "unclosed ${...}",
                    })?;
                let inner = &template[i + 2..i + close];
                let length = inner
                    .strip_prefix('L')
                    .and_then(|d| d.parse::<u32>().ok())
                    .ok_or(GrammarError::BadTemplate {
                        template: template.to_string(),
                        reason: "braced slot must be ${L<m>}",
                    })?;
                slot = Some(validate_slot(slot.is_some(), template, length)?);
                literal = &mut suffix;
                i += close + 1;
            } else if bytes[i] == b'L'
                && i + 1 < bytes.len()
                && bytes[i + 1].is_ascii_digit()
            {
                let length = (bytes[i + 1] - b'0') as u32;
                slot = Some(validate_slot(slot.is_some(), template, length)?);
                literal = &mut suffix;
                i += 2;
            } else {
                literal.push(bytes[i] as char);
                i += 1;
            }
        }
        let word_length = slot.ok_or_else(|| GrammarError::MissingSlot(template.to_string()))?;
        Ok(PreTerminal {
            template: template.to_string(),
            prefix,
            suffix,
            word_length,
            count,
        })
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn word_length(&self) -> u32 {
        self.word_length
    }

    /// Fill the slot.
    pub fn instantiate(&self, word: &str) -> String {
        format!("{}{}{}", self.prefix, word, self.suffix)
    }
}

/// Word lists keyed by word length.
#[derive(Debug, Clone, Default)]
pub struct LengthDictionaries(BTreeMap<u32, Vec<String>>);

impl LengthDictionaries {
    pub fn new(dicts: BTreeMap<u32, Vec<String>>) -> Result<Self, GrammarError> {
        for (&length, words) in &dicts {
            if words.is_empty() {
                return Err(GrammarError::EmptyDictionary(length));
            }
            for word in words {
                if word.is_empty() || !printable(word) {
                    return Err(GrammarError::BadWord(word.clone()));
                }
                if word.len() != length as usize {
                    return Err(GrammarError::WordLengthMismatch {
                        word: word.clone(),
                        length,
                    });
                }
            }
        }
        Ok(LengthDictionaries(dicts))
    }

    pub fn get(&self, length: u32) -> Option<&[String]> {
        self.0.get(&length).map(|w| w.as_slice())
    }
}

/// A validated grammar: templates plus every dictionary they reference.
#[derive(Debug, Clone)]
pub struct GrammarInstance {
    preterminals: Vec<PreTerminal>,
    dictionaries: LengthDictionaries,
}

#[derive(Deserialize)]
struct InstanceDump {
    preterminals: Vec<PreTerminalDump>,
    dictionaries: BTreeMap<String, Vec<String>>,
}

#[derive(Deserialize)]
struct PreTerminalDump {
    template: String,
    count: u64,
}

impl GrammarInstance {
    pub fn new(
        preterminals: Vec<PreTerminal>,
        dictionaries: LengthDictionaries,
    ) -> Result<Self, GrammarError> {
        let mut seen = std::collections::BTreeSet::new();
        for pre in &preterminals {
            if !seen.insert(pre.template.clone()) {
                return Err(GrammarError::DuplicateTemplate(pre.template.clone()));
            }
            if dictionaries.get(pre.word_length).is_none() {
                return Err(GrammarError::MissingDictionary {
                    template: pre.template.clone(),
                    length: pre.word_length,
                });
            }
        }
        Ok(GrammarInstance {
            preterminals,
            dictionaries,
        })
    }

    /// Instance file form: `{"preterminals": [{"template": "...", "count":
    /// n}, ...], "dictionaries": {"4": ["lion", ...], ...}}`.
    pub fn from_json(text: &str) -> Result<Self, GrammarError> {
        let dump: InstanceDump = serde_json::from_str(text)?;
        let mut dicts = BTreeMap::new();
        for (key, words) in dump.dictionaries {
            let length: u32 = key
                .parse()
                .map_err(|_| GrammarError::BadLengthKey(key.clone()))?;
            dicts.insert(length, words);
        }
        let preterminals = dump
            .preterminals
            .into_iter()
            .map(|p| PreTerminal::parse(&p.template, p.count))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(preterminals, LengthDictionaries::new(dicts)?)
    }

    pub fn preterminals(&self) -> &[PreTerminal] {
        &self.preterminals
    }

    pub fn dictionaries(&self) -> &LengthDictionaries {
        &self.dictionaries
    }

    fn words(&self, pre: &PreTerminal) -> &[String] {
        self.dictionaries
            .get(pre.word_length)
            .expect("validated at construction")
    }

    fn density(&self, pre: &PreTerminal) -> BigRational {
        BigRational::new(
            BigInt::from(pre.count),
            BigInt::from(self.words(pre).len()),
        )
    }

    /// density(a) vs density(b) without forming quotients.
    fn compare_density(&self, a: &PreTerminal, b: &PreTerminal) -> std::cmp::Ordering {
        let lhs = a.count as u128 * self.words(b).len() as u128;
        let rhs = b.count as u128 * self.words(a).len() as u128;
        lhs.cmp(&rhs)
    }

    fn expand(&self, order: Vec<&PreTerminal>) -> Vec<GuessBlock> {
        order
            .into_iter()
            .map(|pre| {
                let words = self.words(pre);
                GuessBlock {
                    template: pre.template.clone(),
                    count: pre.count,
                    dictionary_size: words.len(),
                    density: self.density(pre),
                    guesses: words.iter().map(|w| pre.instantiate(w)).collect(),
                }
            })
            .collect()
    }
}

/// One pre-terminal fully expanded, in emission order.
#[derive(Debug, Clone, PartialEq)]
pub struct GuessBlock {
    pub template: String,
    pub count: u64,
    pub dictionary_size: usize,
    /// count per dictionary word
    pub density: BigRational,
    pub guesses: Vec<String>,
}

/// Blocks by count descending, ties by template.
pub fn order_by_preterminal_probability(instance: &GrammarInstance) -> Vec<GuessBlock> {
    let mut order: Vec<&PreTerminal> = instance.preterminals().iter().collect();
    order.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.template.cmp(&b.template)));
    instance.expand(order)
}

/// Blocks by count-per-word descending, ties by template.
pub fn order_by_preterminal_density(instance: &GrammarInstance) -> Vec<GuessBlock> {
    let mut order: Vec<&PreTerminal> = instance.preterminals().iter().collect();
    order.sort_by(|a, b| {
        instance
            .compare_density(b, a)
            .then_with(|| a.template.cmp(&b.template))
    });
    instance.expand(order)
}

/// Sort every individual guess by its own probability — count/(φ·|W_m|),
/// where the φ factor is shared and drops out — with the same deterministic
/// tie rule the block orders use. True iff the guesses come out
/// block-contiguous in exactly the density order's block sequence: ordering
/// whole pre-terminals by density is the same attack as ordering terminals
/// by probability.
pub fn equivalence_check(instance: &GrammarInstance) -> bool {
    let mut terminals: Vec<(usize, &PreTerminal)> = Vec::new();
    for (block, pre) in instance.preterminals().iter().enumerate() {
        for _ in instance.words(pre) {
            terminals.push((block, pre));
        }
    }
    terminals.sort_by(|(_, a), (_, b)| {
        instance
            .compare_density(b, a)
            .then_with(|| a.template.cmp(&b.template))
    });

    // block-contiguity: once a block's run ends it must not reappear
    let mut block_sequence = Vec::new();
    for (block, _) in &terminals {
        if block_sequence.last() != Some(block) {
            if block_sequence.contains(block) {
                return false;
            }
            block_sequence.push(*block);
        }
    }

    let by_density = order_by_preterminal_density(instance);
    let density_sequence: Vec<&str> = by_density.iter().map(|b| b.template.as_str()).collect();
    let terminal_sequence: Vec<&str> = block_sequence
        .iter()
        .map(|&i| instance.preterminals()[i].template())
        .collect();
    density_sequence == terminal_sequence
}
