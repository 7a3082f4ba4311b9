//! Finite node sets, their meet and record closures, and the two equivalence
//! deciders `≈` (first-move) and `∼` (record).
//!
//! Both deciders sort the relevant closure by `≺` and compare a structure
//! table (meet partner of every pair, first move of every comparable pair,
//! membership in the original set). A bijection preserving `≺` between two
//! finite well-ordered sets is unique, so equal tables are equivalent to the
//! existence of a witness.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::node::{record_positions, Node};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClosureKind {
    Meet,
    Record,
}

pub struct NodeSet {
    alphabet: u8,
    elements: BTreeSet<Node>,
    meet_closure: OnceLock<Vec<Node>>,
    record_closure: OnceLock<Vec<Node>>,
}

impl Clone for NodeSet {
    fn clone(&self) -> Self {
        NodeSet {
            alphabet: self.alphabet,
            elements: self.elements.clone(),
            meet_closure: self.meet_closure.clone(),
            record_closure: self.record_closure.clone(),
        }
    }
}

impl PartialEq for NodeSet {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet && self.elements == other.elements
    }
}

impl Eq for NodeSet {}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodeSet[{}]{}", self.alphabet, self)
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elements.iter().map(|n| n.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl NodeSet {
    pub fn new(alphabet: u8, nodes: impl IntoIterator<Item = Node>) -> Result<Self> {
        let mut elements = BTreeSet::new();
        for node in nodes {
            if node.alphabet() != alphabet {
                return Err(Error::AlphabetMismatch(alphabet, node.alphabet()));
            }
            elements.insert(node);
        }
        Ok(Self::from_set(alphabet, elements))
    }

    fn from_set(alphabet: u8, elements: BTreeSet<Node>) -> Self {
        NodeSet { alphabet, elements, meet_closure: OnceLock::new(), record_closure: OnceLock::new() }
    }

    pub fn empty(alphabet: u8) -> Self {
        Self::from_set(alphabet, BTreeSet::new())
    }

    /// Parses `{0,01,e}`; braces are optional.
    pub fn parse(text: &str, alphabet: u8) -> Result<Self> {
        let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
        if inner.trim().is_empty() {
            return Ok(Self::empty(alphabet));
        }
        let nodes = inner.split(',').map(|t| Node::parse(t, alphabet)).collect::<Result<Vec<_>>>()?;
        Self::new(alphabet, nodes)
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, node: &Node) -> bool {
        self.elements.contains(node)
    }

    /// Elements in `≺` order.
    pub fn iter(&self) -> impl Iterator<Item = &Node> {
        self.elements.iter()
    }

    pub fn to_vec(&self) -> Vec<Node> {
        self.elements.iter().cloned().collect()
    }

    /// The set without its `≺`-last element.
    pub fn without_last(&self) -> NodeSet {
        let mut elements = self.elements.clone();
        elements.pop_last();
        Self::from_set(self.alphabet, elements)
    }

    /// The first `count` elements in `≺` order.
    pub fn prefix(&self, count: usize) -> NodeSet {
        Self::from_set(self.alphabet, self.elements.iter().take(count).cloned().collect())
    }

    pub fn closure_nodes(&self, kind: ClosureKind) -> &[Node] {
        match kind {
            ClosureKind::Meet => self.meet_closure.get_or_init(|| close(&self.elements, false)),
            ClosureKind::Record => self.record_closure.get_or_init(|| close(&self.elements, true)),
        }
    }

    /// `⟨⟨A⟩⟩`, the smallest meet-closed superset.
    pub fn meet_closure(&self) -> NodeSet {
        let nodes = self.closure_nodes(ClosureKind::Meet);
        Self::from_set(self.alphabet, nodes.iter().cloned().collect())
    }

    /// `⟨A⟩`, the smallest superset closed under meets and record histories.
    pub fn record_closure(&self) -> NodeSet {
        let nodes = self.closure_nodes(ClosureKind::Record);
        Self::from_set(self.alphabet, nodes.iter().cloned().collect())
    }

    pub fn is_meet_closed(&self) -> bool {
        self.closure_nodes(ClosureKind::Meet).len() == self.len()
    }

    pub fn is_record_closed(&self) -> bool {
        self.closure_nodes(ClosureKind::Record).len() == self.len()
    }

    pub fn signature(&self, kind: ClosureKind) -> Signature {
        Signature::build(self.closure_nodes(kind), &self.elements)
    }
}

/// Fixpoint closure. Every pair is combined exactly once: a node popped from
/// the queue is combined with all nodes already processed.
fn close(elements: &BTreeSet<Node>, record: bool) -> Vec<Node> {
    let mut set: BTreeSet<Node> = elements.clone();
    let mut queue: Vec<Node> = set.iter().cloned().collect();
    let mut done: Vec<Node> = Vec::with_capacity(queue.len());
    while let Some(x) = queue.pop() {
        let mut fresh = Vec::new();
        for y in &done {
            let cpl = x.common_prefix_len(y);
            let meet = x.truncate(cpl);
            if !set.contains(&meet) {
                fresh.push(meet);
            }
            if record && (cpl == x.len() || cpl == y.len()) && x.len() != y.len() {
                let (lo, hi) = if x.len() < y.len() { (&x, y) } else { (y, &x) };
                for pos in record_positions(lo.len(), hi.letters()) {
                    let node = hi.truncate(pos);
                    if !set.contains(&node) {
                        fresh.push(node);
                    }
                }
            }
        }
        done.push(x);
        for node in fresh {
            if set.insert(node.clone()) {
                queue.push(node);
            }
        }
    }
    set.into_iter().collect()
}

/// Canonical structure table of a closed set listed in `≺` order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature(Vec<u32>);

impl Signature {
    /// `closure` must be meet-closed and sorted by `≺`.
    fn build(closure: &[Node], elements: &BTreeSet<Node>) -> Signature {
        let n = closure.len();
        let mut table = Vec::with_capacity(1 + n + n * n);
        table.push(n as u32);
        table.extend(closure.iter().map(|c| elements.contains(c) as u32));
        // prefix_at[i]: length -> index of the closure node of that length below closure[i].
        let mut prefix_at: Vec<HashMap<usize, usize>> = vec![HashMap::new(); n];
        for i in 0..n {
            for k in 0..=i {
                if closure[k].is_prefix_of(&closure[i]) {
                    prefix_at[i].insert(closure[k].len(), k);
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let cpl = closure[i].common_prefix_len(&closure[j]);
                let meet = prefix_at[i][&cpl];
                table.push(meet as u32);
                let first_move = if meet == i { closure[j].letters()[cpl] as u32 + 1 } else { 0 };
                table.push(first_move);
            }
        }
        Signature(table)
    }
}

/// A witness bijection between two closures, restricted to the original sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equivalence {
    pub closure_pairs: Vec<(Node, Node)>,
    pub pairs: Vec<(Node, Node)>,
}

fn decide(a: &NodeSet, b: &NodeSet, kind: ClosureKind) -> Option<Equivalence> {
    if a.alphabet != b.alphabet || a.len() != b.len() {
        return None;
    }
    let (ca, cb) = (a.closure_nodes(kind), b.closure_nodes(kind));
    if ca.len() != cb.len() || a.signature(kind) != b.signature(kind) {
        return None;
    }
    let closure_pairs: Vec<(Node, Node)> = ca.iter().cloned().zip(cb.iter().cloned()).collect();
    let pairs = closure_pairs.iter().filter(|(x, _)| a.contains(x)).cloned().collect();
    Some(Equivalence { closure_pairs, pairs })
}

/// `A ≈ B`, with the witness when it exists.
pub fn first_move_equivalent(a: &NodeSet, b: &NodeSet) -> Option<Equivalence> {
    decide(a, b, ClosureKind::Meet)
}

/// `A ∼ B`, with the witness when it exists.
pub fn record_equivalent(a: &NodeSet, b: &NodeSet) -> Option<Equivalence> {
    decide(a, b, ClosureKind::Record)
}

/// Replays the three equivalence conditions on every pair of the map's domain:
/// meets go to meets, `≺` is preserved both ways, first moves are preserved.
/// Also checks that the domain is closed and that the restriction maps `a` onto `b`.
pub fn replay_equivalence(a: &NodeSet, b: &NodeSet, kind: ClosureKind, witness: &Equivalence) -> bool {
    let map: HashMap<&Node, &Node> = witness.closure_pairs.iter().map(|(x, y)| (x, y)).collect();
    if map.len() != witness.closure_pairs.len() {
        return false;
    }
    let image: BTreeSet<&Node> = map.values().copied().collect();
    if image.len() != map.len() {
        return false;
    }
    let domain: BTreeSet<Node> = map.keys().map(|&x| x.clone()).collect();
    let codomain: BTreeSet<Node> = image.iter().map(|&x| x.clone()).collect();
    if domain.iter().cloned().collect::<Vec<_>>() != a.closure_nodes(kind)
        || codomain.iter().cloned().collect::<Vec<_>>() != b.closure_nodes(kind)
    {
        return false;
    }
    for (x, y) in &witness.pairs {
        if !a.contains(x) || !b.contains(y) || map.get(x) != Some(&y) {
            return false;
        }
    }
    if witness.pairs.len() != a.len() || a.len() != b.len() {
        return false;
    }
    for (&t, &ft) in &map {
        for (&s, &fs) in &map {
            let meet = t.meet_unchecked(s);
            match map.get(&meet) {
                Some(&fm) if *fm == ft.meet_unchecked(fs) => {}
                _ => return false,
            }
            if (t < s) != (ft < fs) {
                return false;
            }
            if let Some(i) = t.first_move_to(s) {
                if ft.first_move_to(fs) != Some(i) {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(text: &str, alphabet: u8) -> NodeSet {
        NodeSet::parse(text, alphabet).unwrap()
    }

    #[test]
    fn meet_closure_examples() {
        assert_eq!(set("{01,10}", 2).meet_closure(), set("{e,01,10}", 2));
        let chain = set("{0,01,0110}", 2);
        assert_eq!(chain.meet_closure(), chain);
    }

    #[test]
    fn record_closure_example() {
        assert_eq!(set("{e,1020}", 3).record_closure(), set("{e,10,1020}", 3));
    }

    #[test]
    fn closures_are_idempotent_and_nested() {
        let a = set("{0110,1021,2,0012}", 3);
        let mc = a.meet_closure();
        let rc = a.record_closure();
        assert!(mc.is_meet_closed());
        assert!(rc.is_record_closed());
        assert_eq!(mc.meet_closure(), mc);
        assert_eq!(rc.record_closure(), rc);
        assert!(mc.iter().all(|x| rc.contains(x)));
        assert!(a.iter().all(|x| mc.contains(x)));
    }

    #[test]
    fn first_move_examples() {
        let a = set("{0,00}", 2);
        let w = first_move_equivalent(&a, &a).unwrap();
        assert!(w.pairs.iter().all(|(x, y)| x == y));
        assert!(first_move_equivalent(&a, &set("{1,11}", 2)).is_none());
        let w = first_move_equivalent(&set("{1,001}", 2), &set("{1,00001}", 2)).unwrap();
        assert!(replay_equivalence(&set("{1,001}", 2), &set("{1,00001}", 2), ClosureKind::Meet, &w));
    }

    #[test]
    fn record_examples() {
        let a = set("{0,00}", 2);
        assert!(record_equivalent(&a, &a).is_some());
        assert!(record_equivalent(&a, &set("{0,010}", 2)).is_none());
        // First-move equivalent but the record closure separates them.
        assert!(first_move_equivalent(&set("{e,000}", 2), &set("{e,010}", 2)).is_some());
        assert!(record_equivalent(&set("{e,000}", 2), &set("{e,010}", 2)).is_none());
    }

    #[test]
    fn replay_rejects_tampered_witness() {
        let a = set("{1,001}", 2);
        let b = set("{1,00001}", 2);
        let mut w = first_move_equivalent(&a, &b).unwrap();
        let (first, second) = (w.closure_pairs[0].1.clone(), w.closure_pairs[1].1.clone());
        w.closure_pairs[0].1 = second;
        w.closure_pairs[1].1 = first;
        assert!(!replay_equivalence(&a, &b, ClosureKind::Meet, &w));
    }
}
