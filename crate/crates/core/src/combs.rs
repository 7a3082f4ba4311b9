//! The first-move layer: `(i,j)`-combs, their canonical witnesses and
//! classifier, e-families and the comb maps they induce.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::node::Node;
use crate::nodeset::{ClosureKind, NodeSet, Signature};

/// An `(i,j)`-comb: the spine climbs with `i`, teeth leave with `j`.
/// `(i,i)` is an `i`-chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CombKind {
    pub spine: u8,
    pub teeth: u8,
}

impl CombKind {
    pub fn new(spine: u8, teeth: u8) -> Self {
        CombKind { spine, teeth }
    }

    pub fn chain(i: u8) -> Self {
        CombKind { spine: i, teeth: i }
    }

    pub fn is_chain(self) -> bool {
        self.spine == self.teeth
    }

    pub fn index(self, alphabet: u8) -> usize {
        self.spine as usize * alphabet as usize + self.teeth as usize
    }

    pub fn from_index(index: usize, alphabet: u8) -> Self {
        let m = alphabet as usize;
        CombKind { spine: (index / m) as u8, teeth: (index % m) as u8 }
    }

    /// All `m²` kinds in index order.
    pub fn all(alphabet: u8) -> Vec<CombKind> {
        (0..alphabet as usize * alphabet as usize).map(|k| Self::from_index(k, alphabet)).collect()
    }

    pub fn relabel(self, f: impl Fn(u8) -> u8) -> Self {
        CombKind { spine: f(self.spine), teeth: f(self.teeth) }
    }
}

impl fmt::Display for CombKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}>{}", self.spine, self.teeth)
    }
}

impl FromStr for CombKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Malformed(s.into(), "expected `i>j`".into());
        let (a, b) = s.trim().split_once('>').ok_or_else(bad)?;
        Ok(CombKind { spine: a.trim().parse().map_err(|_| bad())?, teeth: b.trim().parse().map_err(|_| bad())? })
    }
}

impl Serialize for CombKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CombKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// `{ (j), (iij), (iiiij), … }`, the first `count` elements: `i^{2k} ⌢ j`.
pub fn comb_witness(kind: CombKind, count: usize, alphabet: u8) -> Result<NodeSet> {
    if kind.spine >= alphabet || kind.teeth >= alphabet {
        return Err(Error::LetterOutOfRange { letter: kind.spine.max(kind.teeth), alphabet });
    }
    let nodes = (0..count).map(|k| {
        let mut letters = vec![kind.spine; 2 * k];
        letters.push(kind.teeth);
        Node::from_vec_unchecked(alphabet, letters)
    });
    NodeSet::new(alphabet, nodes)
}

type SignatureTable<K> = HashMap<Signature, K>;

fn comb_table(alphabet: u8, count: usize) -> Arc<SignatureTable<CombKind>> {
    static CACHE: OnceLock<RwLock<HashMap<(u8, usize), Arc<SignatureTable<CombKind>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.read().unwrap().get(&(alphabet, count)) {
        return t.clone();
    }
    let table: SignatureTable<CombKind> = CombKind::all(alphabet)
        .into_iter()
        .map(|k| (comb_witness(k, count, alphabet).unwrap().signature(ClosureKind::Meet), k))
        .collect();
    let table = Arc::new(table);
    cache.write().unwrap().insert((alphabet, count), table.clone());
    table
}

/// The comb kind of `A`: `A` itself, or `A` without its `≺`-last element, must
/// be first-move-equivalent to a witness prefix of the same size.
pub fn classify_comb(set: &NodeSet) -> Result<CombKind> {
    if set.len() < 3 {
        return Err(Error::NotHomogeneous(format!("need at least 3 elements, got {}", set.len())));
    }
    let lookup = |x: &NodeSet| comb_table(x.alphabet(), x.len()).get(&x.signature(ClosureKind::Meet)).copied();
    lookup(set)
        .or_else(|| (set.len() >= 4).then(|| lookup(&set.without_last())).flatten())
        .ok_or_else(|| Error::NotHomogeneous(format!("{set} matches no comb kind")))
}

/// `{e(∞), e(0), …, e(n-1)}` in `m^{<ω}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EFamily {
    pub alphabet_out: u8,
    pub e_inf: Node,
    pub e: Vec<Node>,
}

impl EFamily {
    pub fn new(alphabet_out: u8, e_inf: Node, e: Vec<Node>) -> Result<Self> {
        let family = EFamily { alphabet_out, e_inf, e };
        family.validate()?;
        Ok(family)
    }

    pub fn parse(alphabet_out: u8, e_inf: &str, e: &[&str]) -> Result<Self> {
        let nodes = e.iter().map(|t| Node::parse(t, alphabet_out)).collect::<Result<Vec<_>>>()?;
        Self::new(alphabet_out, Node::parse(e_inf, alphabet_out)?, nodes)
    }

    /// Number of letters of the domain tree.
    pub fn arity(&self) -> u8 {
        self.e.len() as u8
    }

    pub fn level(&self) -> usize {
        self.e.first().map_or(0, Node::len)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidEFamily(msg));
        if self.e.is_empty() {
            return bad("no e(i)".into());
        }
        if std::iter::once(&self.e_inf).chain(&self.e).any(|x| x.alphabet() != self.alphabet_out) {
            return bad("nodes from the wrong tree".into());
        }
        let level = self.level();
        if self.e.iter().any(|x| x.len() != level) {
            return bad("e(0..n-1) must share one level".into());
        }
        if self.e_inf.len() >= level {
            return bad(format!("|e(∞)| = {} must be below the level {level}", self.e_inf.len()));
        }
        let distinct: BTreeSet<&Node> = self.e.iter().collect();
        if distinct.len() != self.e.len() {
            return bad("e(i) must be pairwise distinct".into());
        }
        Ok(())
    }

    /// The comb map read off the family. For `i ≠ j` the two first moves out of
    /// `e(i) ∧ e(j)`; for `i = j` the moves out of `e(∞) ∧ e(i)` toward `e(i)`
    /// and `e(∞)`, or `(u,u)` when `e(∞) ≤ e(i)` and `u` is the move toward `e(i)`.
    pub fn induced_map(&self) -> InducedCombMap {
        let n = self.arity();
        let mut table = Vec::with_capacity(n as usize * n as usize);
        for i in 0..n as usize {
            for j in 0..n as usize {
                let kind = if i != j {
                    let t = self.e[i].common_prefix_len(&self.e[j]);
                    CombKind::new(self.e[i].letters()[t], self.e[j].letters()[t])
                } else if self.e_inf.is_prefix_of(&self.e[i]) {
                    CombKind::chain(self.e[i].letters()[self.e_inf.len()])
                } else {
                    let t = self.e_inf.common_prefix_len(&self.e[i]);
                    CombKind::new(self.e[i].letters()[t], self.e_inf.letters()[t])
                };
                table.push(kind);
            }
        }
        InducedCombMap { domain: n, codomain: self.alphabet_out, table }
    }
}

impl fmt::Display for EFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.e.iter().map(|x| x.to_string()).collect();
        write!(f, "e(∞)={} e=[{}]", self.e_inf, parts.join(","))
    }
}

/// ε: `n² → m²`, indexed by `CombKind::index(n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InducedCombMap {
    pub domain: u8,
    pub codomain: u8,
    pub table: Vec<CombKind>,
}

impl InducedCombMap {
    pub fn identity(n: u8) -> Self {
        InducedCombMap { domain: n, codomain: n, table: CombKind::all(n) }
    }

    pub fn apply(&self, kind: CombKind) -> CombKind {
        self.table[kind.index(self.domain)]
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &InducedCombMap) -> InducedCombMap {
        assert_eq!(self.codomain, other.domain);
        InducedCombMap {
            domain: self.domain,
            codomain: other.codomain,
            table: self.table.iter().map(|&k| other.apply(k)).collect(),
        }
    }

    pub fn to_json_map(&self) -> BTreeMap<String, String> {
        CombKind::all(self.domain).into_iter().map(|k| (k.to_string(), self.apply(k).to_string())).collect()
    }

    pub fn from_json_map(domain: u8, codomain: u8, map: &BTreeMap<String, String>) -> Result<Self> {
        let mut table = Vec::new();
        for k in CombKind::all(domain) {
            let v = map.get(&k.to_string()).ok_or_else(|| Error::Malformed(k.to_string(), "missing".into()))?;
            let v: CombKind = v.parse()?;
            if v.spine >= codomain || v.teeth >= codomain {
                return Err(Error::LetterOutOfRange { letter: v.spine.max(v.teeth), alphabet: codomain });
            }
            table.push(v);
        }
        Ok(InducedCombMap { domain, codomain, table })
    }
}

impl Serialize for InducedCombMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_map().serialize(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Label {
    Inf,
    Leaf(u8),
}

/// All ordered set partitions of `items` into `k ≥ min_blocks` blocks, each
/// block tagged with a distinct letter below `alphabet`.
fn lettered_partitions(items: &[Label], alphabet: u8, min_blocks: usize) -> Vec<Vec<(u8, Vec<Label>)>> {
    // Assign each item a letter; the blocks are the nonempty fibres.
    let mut out = Vec::new();
    let mut choice = vec![0u8; items.len()];
    loop {
        let mut blocks: BTreeMap<u8, Vec<Label>> = BTreeMap::new();
        for (item, &letter) in items.iter().zip(&choice) {
            blocks.entry(letter).or_default().push(*item);
        }
        if blocks.len() >= min_blocks {
            out.push(blocks.into_iter().collect());
        }
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return out;
            }
            choice[pos] += 1;
            if choice[pos] < alphabet {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

type Placement = Vec<(Label, Vec<u8>)>;

/// Every way of placing `labels` below `prefix` that differs in some first
/// move. Unary steps never change a first move and are skipped.
fn place(prefix: &[u8], labels: &[Label], alphabet: u8) -> Vec<Placement> {
    if labels.len() == 1 {
        return vec![vec![(labels[0], prefix.to_vec())]];
    }
    let mut out = Vec::new();
    let has_inf = labels.contains(&Label::Inf);
    let expand = |blocks: &[(u8, Vec<Label>)], seed: Placement, out: &mut Vec<Placement>| {
        let mut acc: Vec<Placement> = vec![seed];
        for (letter, group) in blocks {
            let mut next_prefix = prefix.to_vec();
            next_prefix.push(*letter);
            let subs = place(&next_prefix, group, alphabet);
            acc = acc
                .into_iter()
                .flat_map(|a| {
                    subs.iter().map(move |s| {
                        let mut a = a.clone();
                        a.extend(s.iter().cloned());
                        a
                    })
                })
                .collect();
        }
        out.extend(acc);
    };
    if has_inf {
        let rest: Vec<Label> = labels.iter().copied().filter(|l| *l != Label::Inf).collect();
        for blocks in lettered_partitions(&rest, alphabet, 1) {
            expand(&blocks, vec![(Label::Inf, prefix.to_vec())], &mut out);
        }
    }
    for blocks in lettered_partitions(labels, alphabet, 2) {
        expand(&blocks, Vec::new(), &mut out);
    }
    out
}

pub const MAX_DESK_ALPHABET: u8 = 4;

/// One e-family per arrangement of first moves of `{e(∞), e(0..n-1)}` in `m^{<ω}`.
pub fn enumerate_configurations(n: u8, m: u8) -> Result<Vec<EFamily>> {
    if n == 0 || m == 0 || n > MAX_DESK_ALPHABET || m > MAX_DESK_ALPHABET {
        return Err(Error::ScaleLimit(format!("configurations need 1 ≤ n,m ≤ {MAX_DESK_ALPHABET}")));
    }
    let mut labels = vec![Label::Inf];
    labels.extend((0..n).map(Label::Leaf));
    let mut families = BTreeSet::new();
    for placement in place(&[], &labels, m) {
        let mut e_inf = Vec::new();
        let mut leaves = vec![Vec::new(); n as usize];
        for (label, word) in placement {
            match label {
                Label::Inf => e_inf = word,
                Label::Leaf(i) => leaves[i as usize] = word,
            }
        }
        let level = leaves.iter().map(Vec::len).max().unwrap().max(e_inf.len() + 1);
        let e = leaves
            .into_iter()
            .map(|mut w| {
                w.resize(level, 0);
                Node::from_vec_unchecked(m, w)
            })
            .collect();
        let family = EFamily::new(m, Node::from_vec_unchecked(m, e_inf), e)
            .expect("placements separate every leaf");
        families.insert(family);
    }
    Ok(families.into_iter().collect())
}

/// Each comb map `n² → m²` induced by an injective map `n^{<ω} → m^{<ω}`,
/// sorted, with the first configuration inducing it.
pub fn realizable_maps_with_witnesses(n: u8, m: u8) -> Result<Arc<Vec<(InducedCombMap, EFamily)>>> {
    type Cache = HashMap<(u8, u8), Arc<Vec<(InducedCombMap, EFamily)>>>;
    static CACHE: OnceLock<RwLock<Cache>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(maps) = cache.read().unwrap().get(&(n, m)) {
        return Ok(maps.clone());
    }
    let mut maps: BTreeMap<InducedCombMap, EFamily> = BTreeMap::new();
    for family in enumerate_configurations(n, m)? {
        maps.entry(family.induced_map()).or_insert(family);
    }
    let maps = Arc::new(maps.into_iter().collect::<Vec<_>>());
    cache.write().unwrap().insert((n, m), maps.clone());
    Ok(maps)
}

/// The comb maps `n² → m²` induced by injective maps `n^{<ω} → m^{<ω}`, sorted.
pub fn enumerate_realizable_maps(n: u8, m: u8) -> Result<Vec<InducedCombMap>> {
    Ok(realizable_maps_with_witnesses(n, m)?.iter().map(|(map, _)| map.clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodeset::first_move_equivalent;

    /// Independent oracle: every e-family with leaves on one level `≤ max_level`.
    pub(crate) fn brute_force_maps(n: u8, m: u8, max_level: usize) -> BTreeSet<InducedCombMap> {
        let mut out = BTreeSet::new();
        for level in 1..=max_level {
            let words: Vec<Node> = Node::all_up_to(m, level).into_iter().filter(|x| x.len() == level).collect();
            let shorter: Vec<Node> = Node::all_up_to(m, level - 1);
            let mut idx = vec![0usize; n as usize];
            'outer: loop {
                let e: Vec<Node> = idx.iter().map(|&k| words[k].clone()).collect();
                let distinct: BTreeSet<&Node> = e.iter().collect();
                if distinct.len() == e.len() {
                    for inf in &shorter {
                        out.insert(EFamily::new(m, inf.clone(), e.clone()).unwrap().induced_map());
                    }
                }
                for pos in 0..idx.len() {
                    idx[pos] += 1;
                    if idx[pos] < words.len() {
                        continue 'outer;
                    }
                    idx[pos] = 0;
                }
                break;
            }
        }
        out
    }

    #[test]
    fn comb_witness_examples() {
        let w = comb_witness(CombKind::new(0, 1), 3, 2).unwrap();
        assert_eq!(w, NodeSet::parse("{1,001,00001}", 2).unwrap());
        let w = comb_witness(CombKind::chain(1), 2, 2).unwrap();
        assert_eq!(w, NodeSet::parse("{1,111}", 2).unwrap());
    }

    #[test]
    fn classify_examples() {
        let w = NodeSet::parse("{1,001,00001}", 2).unwrap();
        assert_eq!(classify_comb(&w).unwrap(), CombKind::new(0, 1));
        let chain = NodeSet::parse("{0,00,000}", 2).unwrap();
        assert_eq!(classify_comb(&chain).unwrap(), CombKind::chain(0));
        assert!(classify_comb(&NodeSet::parse("{0,1}", 2).unwrap()).is_err());
    }

    #[test]
    fn classify_inverts_witness() {
        for m in 1..=3 {
            for kind in CombKind::all(m) {
                for count in 3..=6 {
                    let w = comb_witness(kind, count, m).unwrap();
                    assert_eq!(classify_comb(&w).unwrap(), kind);
                }
            }
        }
    }

    #[test]
    fn witnesses_of_one_kind_are_equivalent() {
        // Same kind, different spine spacing.
        let a = comb_witness(CombKind::new(1, 0), 3, 2).unwrap();
        let b = NodeSet::parse("{0,1110,1111110}", 2).unwrap();
        assert!(first_move_equivalent(&a, &b).is_some());
    }

    #[test]
    fn removing_interior_elements_keeps_kind() {
        for kind in CombKind::all(3) {
            let w = comb_witness(kind, 7, 3).unwrap().to_vec();
            let sub: Vec<Node> = w.iter().enumerate().filter(|(k, _)| k % 2 == 0).map(|(_, x)| x.clone()).collect();
            assert_eq!(classify_comb(&NodeSet::new(3, sub).unwrap()).unwrap(), kind);
        }
    }

    #[test]
    fn worked_family() {
        let e = EFamily::parse(2, "0", &["11", "01"]).unwrap();
        let eps = e.induced_map();
        assert_eq!(eps.apply(CombKind::chain(0)), CombKind::new(1, 0));
        assert_eq!(eps.apply(CombKind::chain(1)), CombKind::chain(1));
        assert_eq!(eps.apply(CombKind::new(1, 0)), CombKind::new(0, 1));
        assert_eq!(eps.apply(CombKind::new(0, 1)), CombKind::new(1, 0));
    }

    #[test]
    fn identity_family() {
        for n in 1..=4 {
            let e: Vec<Node> = (0..n).map(|i| Node::new(n, vec![i]).unwrap()).collect();
            let family = EFamily::new(n, Node::root(n), e).unwrap();
            assert_eq!(family.induced_map(), InducedCombMap::identity(n));
        }
    }

    #[test]
    fn efamily_validation() {
        assert!(EFamily::parse(2, "01", &["11", "01"]).is_err());
        assert!(EFamily::parse(2, "0", &["11", "11"]).is_err());
        assert!(EFamily::parse(2, "0", &["11", "011"]).is_err());
    }

    #[test]
    fn configurations_match_brute_force() {
        for (n, m) in [(1, 1), (1, 2), (2, 1), (2, 2), (2, 3), (3, 2)] {
            let fast: BTreeSet<InducedCombMap> = enumerate_realizable_maps(n, m).unwrap().into_iter().collect();
            let slow = brute_force_maps(n, m, n as usize + 1);
            assert_eq!(fast, slow, "n={n} m={m}");
        }
    }

    #[test]
    fn realizable_maps_contain_identity_and_worked_map() {
        for n in 1..=3 {
            assert!(enumerate_realizable_maps(n, n).unwrap().contains(&InducedCombMap::identity(n)));
        }
        let worked = EFamily::parse(2, "0", &["11", "01"]).unwrap().induced_map();
        assert!(enumerate_realizable_maps(2, 2).unwrap().contains(&worked));
    }

    #[test]
    fn realizable_maps_compose() {
        let maps = enumerate_realizable_maps(2, 2).unwrap();
        let set: BTreeSet<&InducedCombMap> = maps.iter().collect();
        for a in &maps {
            for b in &maps {
                assert!(set.contains(&a.then(b)), "{:?} then {:?}", a.table, b.table);
            }
        }
    }

    #[test]
    fn json_map_round_trip() {
        let eps = EFamily::parse(2, "0", &["11", "01"]).unwrap().induced_map();
        let json = serde_json::to_string(&eps).unwrap();
        assert_eq!(json, r#"{"0>0":"1>0","0>1":"1>0","1>0":"0>1","1>1":"1>1"}"#);
        let back: BTreeMap<String, String> = serde_json::from_str(&json).unwrap();
        assert_eq!(InducedCombMap::from_json_map(2, 2, &back).unwrap(), eps);
    }
}
