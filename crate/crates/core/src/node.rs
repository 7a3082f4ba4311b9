//! Nodes of the n-adic tree `n^{<ω}` and their elementary structure.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A finite sequence over `{0..alphabet-1}`. The empty sequence is the root.
///
/// `Ord` is the level-then-weight well order `≺`: shorter nodes come first,
/// nodes on the same level compare lexicographically (which is the same as
/// comparing the weighted sums `n^p s_0 + n^{p-1} s_1 + …`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Node {
    alphabet: u8,
    letters: Vec<u8>,
}

impl Node {
    pub fn root(alphabet: u8) -> Self {
        assert!(alphabet > 0, "alphabet must be positive");
        Node { alphabet, letters: Vec::new() }
    }

    pub fn new(alphabet: u8, letters: Vec<u8>) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::Malformed(String::new(), "alphabet must be positive".into()));
        }
        if let Some(&letter) = letters.iter().find(|&&l| l >= alphabet) {
            return Err(Error::LetterOutOfRange { letter, alphabet });
        }
        Ok(Node { alphabet, letters })
    }

    /// Builds a node whose letters are already known to be in range.
    pub(crate) fn from_vec_unchecked(alphabet: u8, letters: Vec<u8>) -> Self {
        debug_assert!(letters.iter().all(|&l| l < alphabet));
        Node { alphabet, letters }
    }

    /// `a^count`.
    pub fn repeat(alphabet: u8, letter: u8, count: usize) -> Result<Self> {
        Node::new(alphabet, vec![letter; count])
    }

    /// Parses the digit literal: `"102"` is `(1,0,2)`, `""` or `"e"` is the root.
    pub fn parse(text: &str, alphabet: u8) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() || text == "e" {
            return Ok(Node::root(alphabet));
        }
        let mut letters = Vec::with_capacity(text.len());
        for c in text.chars() {
            let d = c
                .to_digit(10)
                .ok_or_else(|| Error::Malformed(text.into(), format!("unexpected character {c:?}")))?;
            letters.push(d as u8);
        }
        Node::new(alphabet, letters)
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_root(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn child(&self, letter: u8) -> Self {
        assert!(letter < self.alphabet);
        let mut letters = Vec::with_capacity(self.letters.len() + 1);
        letters.extend_from_slice(&self.letters);
        letters.push(letter);
        Node { alphabet: self.alphabet, letters }
    }

    /// `self ⌢ other`.
    pub fn concat(&self, other: &Node) -> Self {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Node { alphabet: self.alphabet.max(other.alphabet), letters }
    }

    pub fn extend_from(&mut self, letters: &[u8]) {
        debug_assert!(letters.iter().all(|&l| l < self.alphabet));
        self.letters.extend_from_slice(letters);
    }

    /// The first `len` letters.
    pub fn truncate(&self, len: usize) -> Self {
        Node { alphabet: self.alphabet, letters: self.letters[..len.min(self.len())].to_vec() }
    }

    /// Tree order `self ≤ other` (prefix).
    pub fn is_prefix_of(&self, other: &Node) -> bool {
        other.letters.starts_with(&self.letters)
    }

    pub fn is_strictly_below(&self, other: &Node) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }

    pub fn common_prefix_len(&self, other: &Node) -> usize {
        self.letters.iter().zip(&other.letters).take_while(|(a, b)| a == b).count()
    }

    /// The meet `s ∧ t`: the longest common prefix.
    pub fn meet(&self, other: &Node) -> Result<Node> {
        self.check_alphabet(other)?;
        Ok(self.meet_unchecked(other))
    }

    pub(crate) fn meet_unchecked(&self, other: &Node) -> Node {
        self.truncate(self.common_prefix_len(other))
    }

    /// `s ∖ t` for `t ≤ s`.
    pub fn suffix_after(&self, prefix: &Node) -> Option<&[u8]> {
        prefix.is_prefix_of(self).then(|| &self.letters[prefix.len()..])
    }

    /// The letter `i` with `self ⌢ i ≤ other`, when `self < other`.
    pub fn first_move_to(&self, other: &Node) -> Option<u8> {
        if self.is_strictly_below(other) {
            Some(other.letters[self.len()])
        } else {
            None
        }
    }

    pub fn max_letter(&self) -> Option<u8> {
        self.letters.iter().copied().max()
    }

    /// Position of the node in the well order `≺` (0 for the root).
    ///
    /// Saturates at `u128::MAX` for nodes too deep to index.
    pub fn rank(&self) -> u128 {
        let n = self.alphabet as u128;
        let mut below_level: u128 = 0;
        let mut power: u128 = 1;
        for _ in 0..self.len() {
            below_level = below_level.saturating_add(power);
            power = power.saturating_mul(n);
        }
        let mut value: u128 = 0;
        for &l in &self.letters {
            value = value.saturating_mul(n).saturating_add(l as u128);
        }
        below_level.saturating_add(value)
    }

    /// Compares in `≺`, rejecting nodes from different trees.
    pub fn prec_compare(&self, other: &Node) -> Result<Ordering> {
        self.check_alphabet(other)?;
        Ok(self.cmp(other))
    }

    /// Maps every letter through `f`, landing in the tree of `alphabet`.
    pub fn map_letters(&self, alphabet: u8, f: impl Fn(u8) -> u8) -> Result<Node> {
        Node::new(alphabet, self.letters.iter().map(|&l| f(l)).collect())
    }

    pub(crate) fn check_alphabet(&self, other: &Node) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch(self.alphabet, other.alphabet));
        }
        Ok(())
    }

    /// All nodes of length at most `depth`, in `≺` order.
    pub fn all_up_to(alphabet: u8, depth: usize) -> Vec<Node> {
        let mut out = vec![Node::root(alphabet)];
        let mut level = vec![Node::root(alphabet)];
        for _ in 0..depth {
            let next: Vec<Node> =
                level.iter().flat_map(|s| (0..alphabet).map(move |i| s.child(i))).collect();
            out.extend(next.iter().cloned());
            level = next;
        }
        out
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        if self.alphabet <= 10 {
            for l in &self.letters {
                write!(f, "{l}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
            write!(f, "({})", parts.join(","))
        }
    }
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() > 64 {
            write!(f, "Node[{}; len {}]", self.alphabet, self.len())
        } else {
            write!(f, "Node[{}]({})", self.alphabet, self)
        }
    }
}

/// The record history from `t` to `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordHistory {
    /// `t = t_0 < t_1 < … < t_{k+1} = s`.
    pub nodes: Vec<Node>,
    /// `m_0 < m_1 < … < m_k`.
    pub records: Vec<u8>,
}

/// Climbs from `t` to `s` and notes every node from which a letter strictly
/// larger than all letters seen so far (counted from `t`) is emitted.
pub fn record_history(t: &Node, s: &Node) -> Result<RecordHistory> {
    t.check_alphabet(s)?;
    if !t.is_strictly_below(s) {
        return Err(Error::NotStrictlyBelow(t.to_string(), s.to_string()));
    }
    let mut nodes = Vec::new();
    let mut records = Vec::new();
    for (pos, &letter) in s.letters().iter().enumerate().skip(t.len()) {
        if records.last().is_none_or(|&m| letter > m) {
            nodes.push(s.truncate(pos));
            records.push(letter);
        }
    }
    nodes.push(s.clone());
    Ok(RecordHistory { nodes, records })
}

/// Positions (lengths) of the intermediate record nodes strictly between `t` and `s`.
pub(crate) fn record_positions(t_len: usize, s: &[u8]) -> impl Iterator<Item = usize> + '_ {
    let mut best: Option<u8> = None;
    s.iter().enumerate().skip(t_len).filter_map(move |(pos, &letter)| {
        if best.is_none_or(|m| letter > m) {
            best = Some(letter);
            (pos > t_len).then_some(pos)
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(text: &str, alphabet: u8) -> Node {
        Node::parse(text, alphabet).unwrap()
    }

    #[test]
    fn prec_examples() {
        assert_eq!(n("01", 2).prec_compare(&n("10", 2)).unwrap(), Ordering::Less);
        assert_eq!(n("", 2).prec_compare(&n("0", 2)).unwrap(), Ordering::Less);
        assert_eq!(n("21", 3).prec_compare(&n("21", 3)).unwrap(), Ordering::Equal);
        assert!(n("0", 2).prec_compare(&n("0", 3)).is_err());
    }

    #[test]
    fn prec_matches_weighted_sum() {
        let nodes = Node::all_up_to(3, 3);
        let weight = |s: &Node| {
            let p = s.len() as u32;
            s.letters().iter().enumerate().map(|(k, &l)| 3u64.pow(p - k as u32) * l as u64).sum::<u64>()
        };
        for a in &nodes {
            for b in &nodes {
                let expected = a.len().cmp(&b.len()).then(weight(a).cmp(&weight(b)));
                assert_eq!(a.cmp(b), expected, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn rank_is_position_in_prec() {
        for (i, s) in Node::all_up_to(3, 4).iter().enumerate() {
            assert_eq!(s.rank(), i as u128);
        }
    }

    #[test]
    fn meet_examples() {
        assert_eq!(n("011", 2).meet(&n("010", 2)).unwrap(), n("01", 2));
        assert_eq!(n("1", 2).meet(&n("01", 2)).unwrap(), n("", 2));
        assert_eq!(n("0110", 2).meet(&n("0110", 2)).unwrap(), n("0110", 2));
    }

    #[test]
    fn literal_round_trip_and_errors() {
        assert_eq!(n("e", 3), Node::root(3));
        assert_eq!(n("102", 3).to_string(), "102");
        assert_eq!(Node::root(2).to_string(), "e");
        assert!(Node::parse("12", 2).is_err());
        assert!(Node::parse("1x", 3).is_err());
    }

    #[test]
    fn record_history_examples() {
        let h = record_history(&n("", 3), &n("1020", 3)).unwrap();
        assert_eq!(h.nodes, vec![n("", 3), n("10", 3), n("1020", 3)]);
        assert_eq!(h.records, vec![1, 2]);

        let h = record_history(&n("", 2), &n("000", 2)).unwrap();
        assert_eq!(h.nodes, vec![n("", 2), n("000", 2)]);
        assert_eq!(h.records, vec![0]);

        // Running maxima restart at t.
        let h = record_history(&n("1", 2), &n("101", 2)).unwrap();
        assert_eq!(h.nodes, vec![n("1", 2), n("10", 2), n("101", 2)]);
        assert_eq!(h.records, vec![0, 1]);

        assert!(record_history(&n("1", 2), &n("1", 2)).is_err());
        assert!(record_history(&n("0", 2), &n("11", 2)).is_err());
    }

    #[test]
    fn record_history_invariants() {
        for s in Node::all_up_to(3, 5) {
            for k in 0..s.len() {
                let t = s.truncate(k);
                let h = record_history(&t, &s).unwrap();
                assert!(h.records.windows(2).all(|w| w[0] < w[1]));
                assert_eq!(h.nodes.len(), h.records.len() + 1);
                for i in 0..h.records.len() {
                    let (lo, hi) = (&h.nodes[i], &h.nodes[i + 1]);
                    assert!(lo.child(h.records[i]).is_prefix_of(&s));
                    assert_eq!(hi.suffix_after(lo).unwrap().iter().max(), Some(&h.records[i]));
                }
                let positions: Vec<usize> = record_positions(t.len(), s.letters()).collect();
                let inner: Vec<usize> = h.nodes[1..h.nodes.len() - 1].iter().map(|x| x.len()).collect();
                assert_eq!(positions, inner);
            }
        }
    }
}
