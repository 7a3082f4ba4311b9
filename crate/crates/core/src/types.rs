//! Types `τ = (τ⁰, τ¹, ◁)`: the labels of the minimal record-equivalence
//! classes of infinite sets.
//!
//! A type is stored as its `◁`-increasing token list. The ASCII notation is a
//! bracketed list of tokens `l<d>` (lower row, `τ⁰`) and `u<d>` (upper row,
//! `τ¹`), e.g. `[u2 u3 l1 u4 l2]`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::node::Node;
use crate::nodeset::{ClosureKind, NodeSet, Signature};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Row {
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token {
    pub row: Row,
    pub letter: u8,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.row {
            Row::Lower => 'l',
            Row::Upper => 'u',
        };
        write!(f, "{tag}{}", self.letter)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypeDescriptor {
    alphabet: u8,
    tokens: Vec<Token>,
}

impl TypeDescriptor {
    pub fn new(alphabet: u8, tokens: Vec<Token>) -> Result<Self> {
        let tau = TypeDescriptor { alphabet, tokens };
        tau.validate()?;
        Ok(tau)
    }

    /// The single-letter type `[i]`, whose sets are the `[i]`-chains.
    pub fn chain(alphabet: u8, letter: u8) -> Result<Self> {
        Self::new(alphabet, vec![Token { row: Row::Lower, letter }])
    }

    pub fn parse(text: &str, alphabet: u8) -> Result<Self> {
        let bad = |msg: &str| Error::Malformed(text.into(), msg.into());
        let inner = text
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| bad("expected `[...]`"))?;
        let mut tokens = Vec::new();
        for tok in inner.split_whitespace() {
            let row = match tok.as_bytes()[0] {
                b'l' => Row::Lower,
                b'u' => Row::Upper,
                _ => return Err(bad("tokens are `l<d>` or `u<d>`")),
            };
            let letter: u8 = tok[1..].parse().map_err(|_| bad("token letter must be a number"))?;
            tokens.push(Token { row, letter });
        }
        Self::new(alphabet, tokens)
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn row(&self, row: Row) -> Vec<u8> {
        self.tokens.iter().filter(|t| t.row == row).map(|t| t.letter).collect()
    }

    pub fn tau0(&self) -> Vec<u8> {
        self.row(Row::Lower)
    }

    pub fn tau1(&self) -> Vec<u8> {
        self.row(Row::Upper)
    }

    pub fn is_chain_type(&self) -> bool {
        self.tokens.iter().all(|t| t.row == Row::Lower)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidType(format!("{self}: {msg}")));
        if let Some(t) = self.tokens.iter().find(|t| t.letter >= self.alphabet) {
            return bad(format!("letter {} outside alphabet {}", t.letter, self.alphabet));
        }
        let (tau0, tau1) = (self.tau0(), self.tau1());
        if tau0.is_empty() {
            return bad("τ⁰ is empty".into());
        }
        if !tau1.is_empty() && tau0[0] == tau1[0] {
            return bad("min τ⁰ = min τ¹".into());
        }
        for (name, row) in [("τ⁰", &tau0), ("τ¹", &tau1)] {
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("{name} is not listed in increasing order"));
            }
        }
        let top = *tau0.last().unwrap();
        if *self.tokens.last().unwrap() != (Token { row: Row::Lower, letter: top }) {
            return bad(format!("order maximum is {}, not l{top}", self.tokens.last().unwrap()));
        }
        Ok(())
    }

    /// `max(τ⁰ ∪ τ¹)`.
    pub fn max_letter(&self) -> u8 {
        self.tokens.iter().map(|t| t.letter).max().unwrap()
    }

    /// The second token from the right lives in the upper row.
    pub fn is_top_comb(&self) -> bool {
        self.tokens.len() >= 2 && self.tokens[self.tokens.len() - 2].row == Row::Upper
    }

    /// `self` is a top-comb and `max(other) ≤ max(τ¹)`.
    pub fn dominates(&self, other: &TypeDescriptor) -> Result<bool> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch(self.alphabet, other.alphabet));
        }
        Ok(self.is_top_comb() && self.tau1().last().is_some_and(|&m| other.max_letter() <= m))
    }

    /// Letters mapped through the strictly increasing `iota` into `m^{<ω}`.
    pub fn relabel(&self, iota: &[u8], alphabet: u8) -> Result<Self> {
        if iota.len() < self.alphabet as usize {
            return Err(Error::Validation(format!("relabel needs {} images", self.alphabet)));
        }
        if iota.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("relabel map is not increasing".into()));
        }
        let tokens = self.tokens.iter().map(|t| Token { row: t.row, letter: iota[t.letter as usize] }).collect();
        Self::new(alphabet, tokens)
    }

    /// Two-row rendering with superscripts for `τ¹` and subscripts for `τ⁰`.
    pub fn pretty(&self) -> String {
        const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
        const SUB: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
        let mut out = String::from("[");
        if self.is_chain_type() {
            for t in &self.tokens {
                out.push_str(&t.letter.to_string());
            }
        } else {
            for t in &self.tokens {
                let table = if t.row == Row::Upper { &SUP } else { &SUB };
                for digit in t.letter.to_string().bytes() {
                    out.push(table[(digit - b'0') as usize]);
                }
            }
        }
        out.push(']');
        out
    }

    fn sort_key(&self) -> (usize, String) {
        (self.tokens.len(), self.to_string())
    }
}

impl fmt::Display for TypeDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.tokens.iter().map(Token::to_string).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

impl PartialOrd for TypeDescriptor {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: token count, then printed text.
impl Ord for TypeDescriptor {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.alphabet, self.sort_key()).cmp(&(other.alphabet, other.sort_key()))
    }
}

impl Serialize for TypeDescriptor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Deserializes the ASCII notation; the alphabet is `max + 1` and must be
/// widened by the caller when it matters.
impl<'de> Deserialize<'de> for TypeDescriptor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for TypeDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let max = s
            .split(|c: char| !c.is_ascii_digit())
            .filter_map(|d| d.parse::<u8>().ok())
            .max()
            .ok_or_else(|| Error::Malformed(s.into(), "no tokens".into()))?;
        Self::parse(s, max.saturating_add(1))
    }
}

pub const MAX_TYPE_ALPHABET: u8 = 4;

fn subsets(n: u8) -> impl Iterator<Item = Vec<u8>> {
    (0u32..1 << n).map(move |mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect())
}

/// Interleavings of `a` and `b` that keep each sequence in order.
fn shuffles(a: &[Token], b: &[Token]) -> Vec<Vec<Token>> {
    match (a.split_first(), b.split_first()) {
        (None, _) => vec![b.to_vec()],
        (_, None) => vec![a.to_vec()],
        (Some((x, ra)), Some((y, rb))) => {
            let mut out = Vec::new();
            for mut rest in shuffles(ra, b) {
                rest.insert(0, *x);
                out.push(rest);
            }
            for mut rest in shuffles(a, rb) {
                rest.insert(0, *y);
                out.push(rest);
            }
            out
        }
    }
}

/// All types of `n^{<ω}` in canonical order; `J(n)` is the length.
pub fn enumerate_types(n: u8) -> Result<Vec<TypeDescriptor>> {
    if n == 0 || n > MAX_TYPE_ALPHABET {
        return Err(Error::ScaleLimit(format!("types need 1 ≤ n ≤ {MAX_TYPE_ALPHABET}")));
    }
    let mut out = Vec::new();
    for tau0 in subsets(n).filter(|s| !s.is_empty()) {
        for tau1 in subsets(n).filter(|s| s.first().is_none_or(|&m| m != tau0[0])) {
            let (top, lower) = tau0.split_last().unwrap();
            let lower: Vec<Token> = lower.iter().map(|&letter| Token { row: Row::Lower, letter }).collect();
            let upper: Vec<Token> = tau1.iter().map(|&letter| Token { row: Row::Upper, letter }).collect();
            for mut tokens in shuffles(&lower, &upper) {
                tokens.push(Token { row: Row::Lower, letter: *top });
                out.push(TypeDescriptor::new(n, tokens).expect("enumeration respects the invariants"));
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn j_function(n: u8) -> Result<usize> {
    Ok(enumerate_types(n)?.len())
}

/// `{id, text, max, top_comb}` rows for listing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeRecord {
    pub id: usize,
    pub text: String,
    pub max: u8,
    pub top_comb: bool,
}

pub fn type_records(n: u8) -> Result<Vec<TypeRecord>> {
    Ok(enumerate_types(n)?
        .into_iter()
        .enumerate()
        .map(|(id, t)| TypeRecord { id, text: t.to_string(), max: t.max_letter(), top_comb: t.is_top_comb() })
        .collect())
}

/// How many times each token's letter is repeated, by `◁`-position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RepetitionSchedule {
    /// `r = 2^position`: each count exceeds the sum of all earlier ones.
    #[default]
    Superincreasing,
    /// `r = 1` at the `◁`-least token, then `r_next = 2^{r_prev} + 1`.
    /// Exceeds desk scale beyond four tokens.
    Exponential,
}

const MAX_REPETITION: u64 = 1 << 12;

impl RepetitionSchedule {
    pub fn counts(self, tokens: usize) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(tokens);
        let mut r: u64 = 1;
        for _ in 0..tokens {
            if r > MAX_REPETITION {
                return Err(Error::ScaleLimit(format!("repetition count {r} for {tokens} tokens")));
            }
            out.push(r as usize);
            r = match self {
                RepetitionSchedule::Superincreasing => 2 * r,
                RepetitionSchedule::Exponential => 1u64.checked_shl(r as u32).map_or(u64::MAX, |p| p + 1),
            };
        }
        Ok(out)
    }
}

/// The blocks `u^τ`, `v^τ`. With `τ¹ = ∅`, `v = u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeWitnessSpec {
    pub u: Node,
    pub v: Node,
    pub repetitions: Vec<usize>,
}

impl TypeWitnessSpec {
    pub fn new(tau: &TypeDescriptor, schedule: RepetitionSchedule) -> Result<Self> {
        Ok(Self::with_repetitions(tau, schedule.counts(tau.tokens.len())?))
    }

    /// `repetitions[p]` copies of the letter of the `p`-th token along `◁`.
    pub fn with_repetitions(tau: &TypeDescriptor, repetitions: Vec<usize>) -> Self {
        assert_eq!(repetitions.len(), tau.tokens.len());
        let block = |row: Row| {
            let mut letters = Vec::new();
            for (t, &r) in tau.tokens.iter().zip(&repetitions) {
                if t.row == row {
                    letters.extend(std::iter::repeat_n(t.letter, r));
                }
            }
            Node::from_vec_unchecked(tau.alphabet, letters)
        };
        let u = block(Row::Lower);
        let v = if tau.is_chain_type() { u.clone() } else { block(Row::Upper) };
        TypeWitnessSpec { u, v, repetitions }
    }

    /// `{u^k ⌢ v : k < blocks}`.
    pub fn witness(&self, blocks: usize) -> NodeSet {
        let mut nodes = Vec::with_capacity(blocks);
        let mut prefix = Node::root(self.u.alphabet());
        for _ in 0..blocks {
            nodes.push(prefix.concat(&self.v));
            prefix = prefix.concat(&self.u);
        }
        NodeSet::new(self.u.alphabet(), nodes).expect("blocks share the alphabet")
    }
}

pub fn type_witness(tau: &TypeDescriptor, blocks: usize) -> NodeSet {
    TypeWitnessSpec::new(tau, RepetitionSchedule::default())
        .expect("the default schedule fits every desk-scale type")
        .witness(blocks)
}

/// A second set of type `tau`, with every repetition count tripled. A normal
/// embedding sends it to the same type as `type_witness`; a map that is not
/// normal can tell the two apart.
pub fn varied_witness(tau: &TypeDescriptor, blocks: usize) -> NodeSet {
    let counts = RepetitionSchedule::default()
        .counts(tau.tokens.len())
        .expect("the default schedule fits every desk-scale type");
    TypeWitnessSpec::with_repetitions(tau, counts.into_iter().map(|r| 3 * r).collect()).witness(blocks)
}

/// The smallest repetition counts (by total, then lexicographically, each at
/// most 4) whose witnesses classify as `tau` at every size 3..=6. Used for
/// probing embeddings, where image length grows with input length.
pub fn compact_spec(tau: &TypeDescriptor) -> TypeWitnessSpec {
    static CACHE: OnceLock<RwLock<HashMap<TypeDescriptor, TypeWitnessSpec>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(spec) = cache.read().unwrap().get(tau) {
        return spec.clone();
    }
    let k = tau.tokens.len();
    let mut candidates: Vec<Vec<usize>> = (0..4usize.pow(k as u32))
        .map(|code| (0..k).map(|p| code / 4usize.pow(p as u32) % 4 + 1).collect())
        .collect();
    candidates.sort_by_key(|r: &Vec<usize>| (r.iter().sum::<usize>(), r.clone()));
    let spec = candidates
        .into_iter()
        .map(|r| TypeWitnessSpec::with_repetitions(tau, r))
        .find(|spec| (3..=6).all(|b| classify_type(&spec.witness(b)).is_ok_and(|t| t == *tau)))
        .unwrap_or_else(|| TypeWitnessSpec::new(tau, RepetitionSchedule::default()).unwrap());
    cache.write().unwrap().insert(tau.clone(), spec.clone());
    spec
}

/// A set of type `tau` built from `compact_spec`.
pub fn probe_witness(tau: &TypeDescriptor, blocks: usize) -> NodeSet {
    compact_spec(tau).witness(blocks)
}

type TypeTable = HashMap<Signature, TypeDescriptor>;

fn type_table(alphabet: u8, count: usize) -> Result<Arc<TypeTable>> {
    static CACHE: OnceLock<RwLock<HashMap<(u8, usize), Arc<TypeTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.read().unwrap().get(&(alphabet, count)) {
        return Ok(t.clone());
    }
    let mut table = TypeTable::new();
    for tau in enumerate_types(alphabet)? {
        let sig = type_witness(&tau, count).signature(ClosureKind::Record);
        if let Some(prev) = table.insert(sig, tau.clone()) {
            return Err(Error::Validation(format!("witnesses of {prev} and {tau} are record-equivalent")));
        }
    }
    let table = Arc::new(table);
    cache.write().unwrap().insert((alphabet, count), table.clone());
    Ok(table)
}

/// The type of `A`: `A` itself, or `A` without its `≺`-last element, must be
/// record-equivalent to a witness prefix of the same size. Three elements
/// separate all types at desk scale, two do not.
pub fn classify_type(set: &NodeSet) -> Result<TypeDescriptor> {
    if set.len() < 3 {
        return Err(Error::NotHomogeneous(format!("need at least 3 elements, got {}", set.len())));
    }
    let lookup = |x: &NodeSet| -> Result<Option<TypeDescriptor>> {
        Ok(type_table(x.alphabet(), x.len())?.get(&x.signature(ClosureKind::Record)).cloned())
    };
    if let Some(t) = lookup(set)? {
        return Ok(t);
    }
    if set.len() >= 4 {
        if let Some(t) = lookup(&set.without_last())? {
            return Ok(t);
        }
    }
    Err(Error::NotHomogeneous(format!("{set} matches no type")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodeset::record_equivalent;

    fn ty(text: &str, n: u8) -> TypeDescriptor {
        TypeDescriptor::parse(text, n).unwrap()
    }

    #[test]
    fn parse_examples() {
        let t = ty("[u2 u3 l1 u4 l2]", 5);
        assert_eq!(t.tau0(), vec![1, 2]);
        assert_eq!(t.tau1(), vec![2, 3, 4]);
        assert_eq!(t.max_letter(), 4);
        assert_eq!(t.to_string(), "[u2 u3 l1 u4 l2]");
        assert_eq!(t.pretty(), "[²³₁⁴₂]");
        assert!(ty("[l0]", 2).tau1().is_empty());
        assert!(matches!(TypeDescriptor::parse("[l0 l1 u1]", 2), Err(Error::InvalidType(_))));
        assert!(matches!(TypeDescriptor::parse("[u0 l0]", 2), Err(Error::InvalidType(_))));
        assert!(matches!(TypeDescriptor::parse("[l1 l0]", 2), Err(Error::InvalidType(_))));
        assert!(matches!(TypeDescriptor::parse("[x0]", 2), Err(Error::Malformed(..))));
        assert!(TypeDescriptor::parse("[]", 2).is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(j_function(1).unwrap(), 1);
        assert_eq!(j_function(2).unwrap(), 8);
        assert_eq!(j_function(3).unwrap(), 61);
        assert!(enumerate_types(5).is_err());
    }

    #[test]
    fn dyadic_list() {
        let texts: Vec<String> = enumerate_types(2).unwrap().iter().map(|t| t.pretty()).collect();
        assert_eq!(texts, ["[0]", "[1]", "[01]", "[⁰₁]", "[¹₀]", "[₀¹₁]", "[⁰¹₁]", "[¹₀₁]"]);
    }

    #[test]
    fn round_trip_all() {
        for n in 1..=3 {
            for t in enumerate_types(n).unwrap() {
                assert_eq!(TypeDescriptor::parse(&t.to_string(), n).unwrap(), t);
            }
        }
    }

    #[test]
    fn top_comb_and_domination() {
        assert!(ty("[u1 l0]", 2).is_top_comb());
        assert!(!ty("[l0 l1]", 2).is_top_comb());
        let all = enumerate_types(2).unwrap();
        for d in ["[u1 l0]", "[u0 u1 l1]"] {
            assert!(all.iter().all(|s| ty(d, 2).dominates(s).unwrap()));
        }
        // The literal definition also lets [₀¹₁] dominate everything.
        assert!(all.iter().all(|s| ty("[l0 u1 l1]", 2).dominates(s).unwrap()));
        assert!(!ty("[u1 l0 l1]", 2).is_top_comb());
    }

    #[test]
    fn relabel_examples() {
        assert_eq!(ty("[l0]", 1).relabel(&[1], 2).unwrap(), ty("[l1]", 2));
        assert_eq!(ty("[l0 l1]", 2).relabel(&[0, 2], 3).unwrap(), ty("[l0 l2]", 3));
        assert!(ty("[l0 l1]", 2).relabel(&[1, 0], 3).is_err());
        let t = ty("[u1 l0 l1]", 2);
        let once = t.relabel(&[0, 2], 3).unwrap().relabel(&[0, 1, 3], 4).unwrap();
        assert_eq!(once, t.relabel(&[0, 3], 4).unwrap());
    }

    #[test]
    fn witness_examples() {
        assert_eq!(type_witness(&ty("[l0]", 2), 3), NodeSet::parse("{0,00,000}", 2).unwrap());
        let spec = TypeWitnessSpec::new(&ty("[u1 l0]", 2), RepetitionSchedule::Exponential).unwrap();
        assert_eq!((spec.u.to_string(), spec.v.to_string()), ("000".into(), "1".into()));
        assert!(RepetitionSchedule::Exponential.counts(5).is_err());
        assert_eq!(RepetitionSchedule::Superincreasing.counts(5).unwrap(), vec![1, 2, 4, 8, 16]);
    }

    #[test]
    fn schedules_agree_up_to_record_equivalence() {
        for n in 1..=3 {
            for t in enumerate_types(n).unwrap().into_iter().filter(|t| t.tokens().len() <= 4) {
                let a = type_witness(&t, 4);
                let b = TypeWitnessSpec::new(&t, RepetitionSchedule::Exponential).unwrap().witness(4);
                assert!(record_equivalent(&a, &b).is_some(), "{t}");
            }
        }
    }

    #[test]
    fn classify_chain() {
        assert_eq!(classify_type(&NodeSet::parse("{1,11,111,1111}", 2).unwrap()).unwrap(), ty("[l1]", 2));
        assert!(classify_type(&NodeSet::parse("{1,11}", 2).unwrap()).is_err());
    }

    #[test]
    fn classify_inverts_witness_dyadic() {
        for t in enumerate_types(2).unwrap() {
            for blocks in 3..=5 {
                assert_eq!(classify_type(&type_witness(&t, blocks)).unwrap(), t);
            }
        }
    }

    #[test]
    fn classify_inverts_witness_triadic() {
        for t in enumerate_types(3).unwrap() {
            for blocks in 3..=5 {
                assert_eq!(classify_type(&type_witness(&t, blocks)).unwrap(), t);
            }
        }
    }

    #[test]
    fn varied_witnesses_keep_their_type() {
        for n in 1..=3 {
            for t in enumerate_types(n).unwrap() {
                for blocks in 3..=4 {
                    assert_eq!(classify_type(&varied_witness(&t, blocks)).unwrap(), t);
                }
            }
        }
    }

    #[test]
    fn classify_ignores_a_stray_last_element() {
        let t = ty("[u1 l0 l1]", 2);
        let mut nodes = type_witness(&t, 4).to_vec();
        nodes.push(Node::repeat(2, 1, 60).unwrap());
        assert_eq!(classify_type(&NodeSet::new(2, nodes).unwrap()).unwrap(), t);
    }

    #[test]
    fn interior_deletion_keeps_type() {
        for t in enumerate_types(2).unwrap() {
            let w = type_witness(&t, 7).to_vec();
            let sub: Vec<Node> = w.into_iter().enumerate().filter(|(k, _)| k % 2 == 0).map(|(_, x)| x).collect();
            assert_eq!(classify_type(&NodeSet::new(2, sub).unwrap()).unwrap(), t);
        }
    }

    #[test]
    fn compact_specs_are_small_and_correct() {
        for t in enumerate_types(2).unwrap() {
            let spec = compact_spec(&t);
            assert!(spec.repetitions.iter().all(|&r| r <= 4), "{t}");
            for blocks in 3..=6 {
                assert!(record_equivalent(&probe_witness(&t, blocks), &type_witness(&t, blocks)).is_some(), "{t}");
            }
        }
    }
}
