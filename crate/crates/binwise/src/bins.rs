//! The character-class bin space over printable ASCII.
//!
//! Every printable ASCII character (0x20..=0x7E, 95 in all) belongs to
//! exactly one class: lowercase (26), uppercase (26), digit (10), or symbol
//! (33, space included). A password maps position-wise to a signature over
//! {L, U, D, S}; all passwords sharing a signature form one bin, whose
//! capacity is the product of the class sizes. There are 4^l bins of length
//! l and their capacities sum to exactly 95^l.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;
use thiserror::Error;

use crate::par::map_reduce_range;

/// Number of printable ASCII characters.
pub const ALPHABET_SIZE: u32 = 95;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("character at byte {index} is outside printable ASCII")]
    NonPrintable { index: usize },
    #[error("empty password")]
    Empty,
    #[error("'{0}' is not a class symbol (expected L, U, D, or S)")]
    BadClassSymbol(char),
}

/// One of the four character classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CharClass {
    Lower,
    Upper,
    Digit,
    Symbol,
}

impl CharClass {
    pub const ALL: [CharClass; 4] = [
        CharClass::Lower,
        CharClass::Upper,
        CharClass::Digit,
        CharClass::Symbol,
    ];

    /// Number of printable ASCII characters in the class.
    pub fn size(self) -> u32 {
        match self {
            CharClass::Lower | CharClass::Upper => 26,
            CharClass::Digit => 10,
            CharClass::Symbol => 33,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            CharClass::Lower => 'L',
            CharClass::Upper => 'U',
            CharClass::Digit => 'D',
            CharClass::Symbol => 'S',
        }
    }

    pub fn from_symbol(c: char) -> Result<Self, ClassifyError> {
        match c {
            'L' => Ok(CharClass::Lower),
            'U' => Ok(CharClass::Upper),
            'D' => Ok(CharClass::Digit),
            'S' => Ok(CharClass::Symbol),
            other => Err(ClassifyError::BadClassSymbol(other)),
        }
    }

    /// Class of one byte, if printable ASCII.
    pub fn of_byte(b: u8) -> Option<Self> {
        match b {
            b'a'..=b'z' => Some(CharClass::Lower),
            b'A'..=b'Z' => Some(CharClass::Upper),
            b'0'..=b'9' => Some(CharClass::Digit),
            0x20..=0x7E => Some(CharClass::Symbol),
            _ => None,
        }
    }

    /// All printable ASCII bytes in this class, in code-point order.
    pub fn members(self) -> impl Iterator<Item = u8> {
        (0x20u8..=0x7E).filter(move |&b| CharClass::of_byte(b) == Some(self))
    }

    /// The i-th byte of this class in code-point order, without scanning.
    /// Symbols occupy four runs: 0x20..0x30, 0x3A..0x41, 0x5B..0x61,
    /// 0x7B..0x7F.
    pub fn member_at(self, i: u32) -> u8 {
        debug_assert!(i < self.size());
        let i = i as u8;
        match self {
            CharClass::Lower => b'a' + i,
            CharClass::Upper => b'A' + i,
            CharClass::Digit => b'0' + i,
            CharClass::Symbol => match i {
                0..=15 => 0x20 + i,
                16..=22 => 0x3A + (i - 16),
                23..=28 => 0x5B + (i - 23),
                _ => 0x7B + (i - 29),
            },
        }
    }
}

/// Position-wise class signature of a password, e.g. "USLDDSULL".
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinSignature(Vec<CharClass>);

impl BinSignature {
    pub fn new(classes: Vec<CharClass>) -> Result<Self, ClassifyError> {
        if classes.is_empty() {
            return Err(ClassifyError::Empty);
        }
        Ok(BinSignature(classes))
    }

    pub fn classes(&self) -> &[CharClass] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length ≥ 1 by construction
    }
}

impl fmt::Display for BinSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            write!(f, "{}", c.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for BinSignature {
    type Err = ClassifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let classes = s
            .chars()
            .map(CharClass::from_symbol)
            .collect::<Result<Vec<_>, _>>()?;
        BinSignature::new(classes)
    }
}

impl PartialOrd for BinSignature {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BinSignature {
    /// Lexicographic on the text form (so "DD" < "DL" < "LD" < "SS" < "UU").
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let a = self.0.iter().map(|c| c.symbol());
        let b = other.0.iter().map(|c| c.symbol());
        a.cmp(b)
    }
}

/// Signature of a password. Errors carry the byte index of the first
/// character outside printable ASCII.
pub fn classify(password: &str) -> Result<BinSignature, ClassifyError> {
    if password.is_empty() {
        return Err(ClassifyError::Empty);
    }
    let mut classes = Vec::with_capacity(password.len());
    for (index, b) in password.bytes().enumerate() {
        match CharClass::of_byte(b) {
            Some(c) => classes.push(c),
            None => return Err(ClassifyError::NonPrintable { index }),
        }
    }
    Ok(BinSignature(classes))
}

/// Number of passwords in a bin: the product of its class sizes.
pub fn capacity(signature: &BinSignature) -> BigUint {
    signature
        .classes()
        .iter()
        .fold(BigUint::from(1u8), |acc, c| acc * c.size())
}

/// Full search space up to a maximum length, exactly and as the dominant
/// top-length term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceSize {
    /// Σ_{l=1..lmax} 95^l
    pub exact: BigUint,
    /// 95^lmax, the usual back-of-envelope stand-in.
    pub dominant: BigUint,
}

/// Total number of printable-ASCII passwords of length 1..=lmax.
pub fn search_space_size(lmax: u32) -> SpaceSize {
    let mut exact = BigUint::zero();
    let mut power = BigUint::from(1u8);
    for _ in 0..lmax {
        power *= ALPHABET_SIZE;
        exact += &power;
    }
    SpaceSize {
        exact,
        dominant: power,
    }
}

const CAPACITY_SUM_MAX_LEN: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("capacity sum enumeration limited to length {max} (requested {requested})")]
pub struct CapacitySumTooLong {
    pub requested: u32,
    pub max: u32,
}

/// Enumerate all 4^l signatures of length l and sum their capacities.
///
/// This is the long way around — the answer is provably 95^l — which is the
/// point: it lets tests confirm the bins tile the space with no gap and no
/// overlap. Guarded to l ≤ 12 (4^12 ≈ 16.8M signatures).
pub fn capacity_sum_check(l: u32) -> Result<BigUint, CapacitySumTooLong> {
    if l > CAPACITY_SUM_MAX_LEN {
        return Err(CapacitySumTooLong {
            requested: l,
            max: CAPACITY_SUM_MAX_LEN,
        });
    }
    if l == 0 {
        return Ok(BigUint::from(1u8)); // the empty product
    }
    // Per-signature capacity ≤ 33^12 < 2^61 and the total ≤ 95^12 < 2^79, so
    // u128 accumulation is exact. Signatures are integers 0..4^l in base 4.
    let total = 1usize << (2 * l);
    let sum = map_reduce_range(
        total,
        || 0u128,
        |sig| {
            let mut cap = 1u128;
            let mut code = sig;
            for _ in 0..l {
                cap *= CharClass::ALL[code & 3].size() as u128;
                code >>= 2;
            }
            cap
        },
        |a, b| a + b,
    );
    Ok(BigUint::from(sum))
}

/// Draw a signature of length l with each position's class chosen in
/// proportion to its share of printable ASCII (26/95, 26/95, 10/95, 33/95).
///
/// Sampling a bin this way and then a password uniformly inside it is the
/// same as sampling a printable-ASCII password uniformly at random.
pub fn sample_bin<R: Rng + ?Sized>(l: usize, rng: &mut R) -> BinSignature {
    assert!(l >= 1, "signatures have length >= 1");
    let classes = (0..l)
        .map(|_| {
            let x = rng.gen_range(0..ALPHABET_SIZE);
            match x {
                0..=25 => CharClass::Lower,
                26..=51 => CharClass::Upper,
                52..=61 => CharClass::Digit,
                _ => CharClass::Symbol,
            }
        })
        .collect();
    BinSignature(classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn class_sizes_tile_printable_ascii() {
        let total: u32 = CharClass::ALL.iter().map(|c| c.size()).sum();
        assert_eq!(total, ALPHABET_SIZE);
        for class in CharClass::ALL {
            assert_eq!(class.members().count() as u32, class.size());
        }
        // space is a symbol
        assert_eq!(CharClass::of_byte(b' '), Some(CharClass::Symbol));
        assert_eq!(CharClass::of_byte(0x07), None);
        assert_eq!(CharClass::of_byte(0x7F), None);
    }

    #[test]
    fn member_at_agrees_with_members() {
        for class in CharClass::ALL {
            let by_scan: Vec<u8> = class.members().collect();
            let by_index: Vec<u8> = (0..class.size()).map(|i| class.member_at(i)).collect();
            assert_eq!(by_scan, by_index);
        }
    }

    #[test]
    fn classify_mixed_passwords() {
        assert_eq!(classify("D@c45&Mac").unwrap().to_string(), "USLDDSULL");
        assert_eq!(classify("I'm Sam42").unwrap().to_string(), "USLSULLDD");
        assert_eq!(classify("password").unwrap().to_string(), "LLLLLLLL");
        assert_eq!(classify("pass word").unwrap().to_string(), "LLLLSLLLL");
    }

    #[test]
    fn classify_errors_carry_position() {
        assert_eq!(
            classify("abc\u{7}def"),
            Err(ClassifyError::NonPrintable { index: 3 })
        );
        assert_eq!(classify("héllo"), Err(ClassifyError::NonPrintable { index: 1 }));
        assert_eq!(classify(""), Err(ClassifyError::Empty));
    }

    #[test]
    fn signature_text_round_trips() {
        let sig: BinSignature = "USLDDSULL".parse().unwrap();
        assert_eq!(sig.to_string(), "USLDDSULL");
        assert_eq!(sig.len(), 9);
        assert!("USLX".parse::<BinSignature>().is_err());
        assert!("".parse::<BinSignature>().is_err());
    }

    #[test]
    fn capacity_is_class_size_product() {
        let all_lower: BinSignature = "LLLLLLLL".parse().unwrap();
        assert_eq!(capacity(&all_lower), BigUint::from(208_827_064_576u64));
        let mixed: BinSignature = "ULLLLLDD".parse().unwrap();
        assert_eq!(
            capacity(&mixed),
            BigUint::from(26u64 * 26u64.pow(5) * 100)
        );
        let d: BinSignature = "D".parse().unwrap();
        assert_eq!(capacity(&d), BigUint::from(10u8));
    }

    #[test]
    fn search_space_sums_alphabet_powers() {
        assert_eq!(search_space_size(1).exact, BigUint::from(95u8));
        assert_eq!(search_space_size(2).exact, BigUint::from(95u32 + 9025));
        let s = search_space_size(10);
        assert_eq!(s.dominant, BigUint::from(95u32).pow(10));
        assert_eq!(
            s.exact,
            (0..10).fold(BigUint::zero(), |acc, i| acc
                + BigUint::from(95u32).pow(i + 1))
        );
        // geometric closed form: (95^(l+1) - 95) / 94
        let closed = (BigUint::from(95u32).pow(11) - BigUint::from(95u32))
            / BigUint::from(94u32);
        assert_eq!(s.exact, closed);
    }

    #[test]
    fn bins_tile_the_space_exactly() {
        for l in 1..=3u32 {
            assert_eq!(
                capacity_sum_check(l).unwrap(),
                BigUint::from(95u32).pow(l),
                "length {l}"
            );
        }
        assert!(capacity_sum_check(13).is_err());
    }

    #[test]
    fn sixteen_bins_of_length_two() {
        // 4^2 signatures; the sum re-derives 95^2 and the per-signature
        // capacities match the class-size products.
        assert_eq!(capacity_sum_check(2).unwrap(), BigUint::from(9025u32));
        let dd: BinSignature = "DD".parse().unwrap();
        assert_eq!(capacity(&dd), BigUint::from(100u32));
    }

    #[test]
    fn sampling_is_deterministic_under_a_seed() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            assert_eq!(sample_bin(9, &mut a), sample_bin(9, &mut b));
        }
    }

    #[test]
    fn sampling_matches_class_shares() {
        // chi-square over the four classes at 10^5 single-position draws;
        // 3 degrees of freedom, p = 0.001 critical value 16.266.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000usize;
        let mut observed = [0f64; 4];
        for _ in 0..n {
            let sig = sample_bin(1, &mut rng);
            let k = match sig.classes()[0] {
                CharClass::Lower => 0,
                CharClass::Upper => 1,
                CharClass::Digit => 2,
                CharClass::Symbol => 3,
            };
            observed[k] += 1.0;
        }
        let mut chi2 = 0.0;
        for (k, class) in CharClass::ALL.iter().enumerate() {
            let expected = n as f64 * class.size() as f64 / ALPHABET_SIZE as f64;
            chi2 += (observed[k] - expected).powi(2) / expected;
        }
        assert!(chi2 < 16.266, "chi-square statistic {chi2}");
    }

    #[test]
    fn signature_order_is_textual() {
        let mut sigs: Vec<BinSignature> = ["UU", "DD", "LD", "DL", "SS"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        sigs.sort();
        let text: Vec<String> = sigs.iter().map(|s| s.to_string()).collect();
        assert_eq!(text, vec!["DD", "DL", "LD", "SS", "UU"]);
    }
}
