//! Synthetic corpora for tests and benchmarks: Zipf-weighted samples of
//! passwords drawn uniformly inside chosen class bins.

use std::collections::{BTreeSet, HashSet};

use rand::Rng;

use crate::bins::{sample_bin, BinSignature};
use crate::corpus::Corpus;

/// Uniform random password whose class signature is exactly `signature`.
pub fn sample_password_in_bin<R: Rng + ?Sized>(signature: &BinSignature, rng: &mut R) -> String {
    let bytes: Vec<u8> = signature
        .classes()
        .iter()
        .map(|&class| class.member_at(rng.gen_range(0..class.size())))
        .collect();
    String::from_utf8(bytes).expect("class members are printable ASCII")
}

/// `count` distinct signatures, lengths uniform in 1..=lmax, classes
/// capacity-weighted. Callers must ask for far fewer signatures than the
/// space holds; sampling retries until distinct.
pub fn random_signatures<R: Rng + ?Sized>(
    count: usize,
    lmax: usize,
    rng: &mut R,
) -> Vec<BinSignature> {
    assert!(lmax >= 1);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let len = rng.gen_range(1..=lmax);
        let signature = sample_bin(len, rng);
        if seen.insert(signature.to_string()) {
            out.push(signature);
        }
    }
    out
}

/// A corpus of `draws` occurrences over `ranks` distinct passwords whose
/// frequencies follow a Zipf law with the given exponent: rank r carries
/// weight 1/r^exponent. Each rank's password is drawn from a random one of
/// `bins` (uniformly), sampled uniformly inside that bin, with re-draws to
/// keep ranks distinct.
pub fn zipf_corpus<R: Rng + ?Sized>(
    bins: &[BinSignature],
    exponent: f64,
    ranks: usize,
    draws: u64,
    rng: &mut R,
) -> Corpus {
    assert!(!bins.is_empty());
    assert!(ranks >= 1);
    assert!(exponent >= 0.0);

    let mut vocabulary: Vec<String> = Vec::with_capacity(ranks);
    let mut seen: HashSet<String> = HashSet::with_capacity(ranks);
    while vocabulary.len() < ranks {
        let bin = &bins[rng.gen_range(0..bins.len())];
        let password = sample_password_in_bin(bin, rng);
        if seen.insert(password.clone()) {
            vocabulary.push(password);
        }
    }

    // cumulative weight table; draws binary-search it
    let mut cumulative = Vec::with_capacity(ranks);
    let mut acc = 0.0f64;
    for r in 1..=ranks {
        acc += (r as f64).powf(-exponent);
        cumulative.push(acc);
    }
    let total = acc;

    let mut counts = vec![0u64; ranks];
    for _ in 0..draws {
        let x = rng.gen_range(0.0..total);
        let idx = cumulative.partition_point(|&c| c <= x);
        counts[idx.min(ranks - 1)] += 1;
    }

    Corpus::from_counts(
        vocabulary
            .into_iter()
            .zip(counts)
            .filter(|&(_, c)| c > 0)
            .map(|(p, c)| (p, c)),
    )
}
