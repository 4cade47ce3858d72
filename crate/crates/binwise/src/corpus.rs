//! Password corpora: multisets of printable-ASCII passwords with counts.
//!
//! Two line formats are ingested:
//!
//! - raw: one password per line, repeated lines accumulate multiplicity
//! - freq: `count<TAB>password`, counts ≥ 1
//!
//! Lines that cannot become valid passwords (bytes outside printable ASCII,
//! empty passwords, malformed freq records) are skipped and tallied, never
//! fatal: real corpora are dirty. CRLF endings are tolerated. Ingestion
//! reads in batches and classifies batches in parallel shards whose counts
//! merge associatively, so the result is independent of shard boundaries.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use thiserror::Error;

use crate::par::fold_slice;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Raw,
    Freq,
}

impl CorpusFormat {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "raw" => Some(CorpusFormat::Raw),
            "freq" => Some(CorpusFormat::Freq),
            _ => None,
        }
    }
}

/// Why a line was skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    /// a byte outside printable ASCII (0x20..=0x7E)
    NonPrintable,
    /// empty password
    Empty,
    /// freq line without a tab, or with a count that is not a positive integer
    Malformed,
}

/// Per-reason tallies of skipped lines.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SkipStats {
    pub non_printable: u64,
    pub empty: u64,
    pub malformed: u64,
}

impl SkipStats {
    pub fn total(&self) -> u64 {
        self.non_printable + self.empty + self.malformed
    }

    fn bump(&mut self, reason: SkipReason) {
        match reason {
            SkipReason::NonPrintable => self.non_printable += 1,
            SkipReason::Empty => self.empty += 1,
            SkipReason::Malformed => self.malformed += 1,
        }
    }

    fn merge(&mut self, other: SkipStats) {
        self.non_printable += other.non_printable;
        self.empty += other.empty;
        self.malformed += other.malformed;
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("corpus total exceeds u64")]
    TotalOverflow,
}

/// A validated password multiset. Every stored password is non-empty
/// printable ASCII; every count is at least 1.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    counts: HashMap<String, u64>,
    total: u64,
    skipped: SkipStats,
}

fn printable(bytes: &[u8]) -> bool {
    bytes.iter().all(|b| (0x20..=0x7E).contains(b))
}

fn accept(line: &[u8], format: CorpusFormat) -> Result<(&[u8], u64), SkipReason> {
    let (password, count) = match format {
        CorpusFormat::Raw => (line, 1),
        CorpusFormat::Freq => {
            let tab = line
                .iter()
                .position(|&b| b == b'\t')
                .ok_or(SkipReason::Malformed)?;
            let count: u64 = std::str::from_utf8(&line[..tab])
                .ok()
                .and_then(|s| s.parse().ok())
                .filter(|&c| c > 0)
                .ok_or(SkipReason::Malformed)?;
            (&line[tab + 1..], count)
        }
    };
    if password.is_empty() {
        return Err(SkipReason::Empty);
    }
    if !printable(password) {
        return Err(SkipReason::NonPrintable);
    }
    Ok((password, count))
}

impl Corpus {
    /// Ingest a line stream. Invalid lines are tallied in skip counters.
    pub fn ingest<R: Read>(reader: R, format: CorpusFormat) -> Result<Self, IngestError> {
        // Batches bound memory while giving the parallel fold enough work
        // per shard to amortize the merge.
        const BATCH_LINES: usize = 1 << 16;
        let mut reader = BufReader::new(reader);
        let mut corpus = Corpus::default();
        let mut batch: Vec<Vec<u8>> = Vec::with_capacity(BATCH_LINES);
        loop {
            let mut line = Vec::new();
            let read = reader.read_until(b'\n', &mut line)?;
            let eof = read == 0;
            if !eof {
                if line.last() == Some(&b'\n') {
                    line.pop();
                }
                if line.last() == Some(&b'\r') {
                    line.pop();
                }
                batch.push(line);
            }
            if batch.len() == BATCH_LINES || (eof && !batch.is_empty()) {
                let (counts, skipped) = process_batch(&batch, format);
                corpus.absorb(counts, skipped)?;
                batch.clear();
            }
            if eof {
                break;
            }
        }
        Ok(corpus)
    }

    pub fn ingest_path(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Self, IngestError> {
        Self::ingest(File::open(path)?, format)
    }

    /// Build from already-counted records (synthetic corpora, tests).
    /// Entries that would not survive ingestion are skipped and tallied.
    pub fn from_counts<I, S>(records: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut corpus = Corpus::default();
        for (password, count) in records {
            let password = password.into();
            if count == 0 {
                corpus.skipped.bump(SkipReason::Malformed);
                continue;
            }
            if password.is_empty() {
                corpus.skipped.bump(SkipReason::Empty);
                continue;
            }
            if !printable(password.as_bytes()) {
                corpus.skipped.bump(SkipReason::NonPrintable);
                continue;
            }
            *corpus.counts.entry(password).or_insert(0) += count;
            corpus.total += count;
        }
        corpus
    }

    fn absorb(
        &mut self,
        counts: HashMap<String, u64>,
        skipped: SkipStats,
    ) -> Result<(), IngestError> {
        for (password, count) in counts {
            *self.counts.entry(password).or_insert(0) += count;
            self.total = self
                .total
                .checked_add(count)
                .ok_or(IngestError::TotalOverflow)?;
        }
        self.skipped.merge(skipped);
        Ok(())
    }

    /// Total password mass (sum of all multiplicities).
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct passwords.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn skipped(&self) -> &SkipStats {
        &self.skipped
    }

    pub fn count_of(&self, password: &str) -> u64 {
        self.counts.get(password).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(p, &c)| (p.as_str(), c))
    }

    /// Entries as a slice-able vector in unspecified order; parallel
    /// consumers fold over this.
    pub(crate) fn entries(&self) -> Vec<(&str, u64)> {
        self.iter().collect()
    }

    /// The k most frequent passwords, ties broken lexicographically.
    /// Returns fewer than k when the corpus has fewer distinct passwords.
    pub fn top_k(&self, k: usize) -> Vec<(String, u64)> {
        let mut entries: Vec<(&str, u64)> = self.entries();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        entries
            .into_iter()
            .take(k)
            .map(|(p, c)| (p.to_string(), c))
            .collect()
    }
}

fn process_batch(batch: &[Vec<u8>], format: CorpusFormat) -> (HashMap<String, u64>, SkipStats) {
    fold_slice(
        batch,
        || (HashMap::new(), SkipStats::default()),
        |(mut counts, mut skipped): (HashMap<String, u64>, SkipStats), line| {
            match accept(line, format) {
                Ok((password, count)) => {
                    let password =
                        String::from_utf8(password.to_vec()).expect("printable ASCII is UTF-8");
                    *counts.entry(password).or_insert(0) += count;
                }
                Err(reason) => skipped.bump(reason),
            }
            (counts, skipped)
        },
        |(mut a_counts, mut a_skip), (b_counts, b_skip)| {
            for (password, count) in b_counts {
                *a_counts.entry(password).or_insert(0) += count;
            }
            a_skip.merge(b_skip);
            (a_counts, a_skip)
        },
    )
}
