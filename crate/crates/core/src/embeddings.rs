//! Computable injective tree maps `n^{<ω} → m^{<ω}` and their actions on
//! combs and types, read off by classifying images of witnesses.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use serde::{Deserialize, Serialize};

use crate::combs::{classify_comb, comb_witness, CombKind, EFamily, InducedCombMap};
use crate::error::{Error, Result};
use crate::node::Node;
use crate::nodeset::NodeSet;
use crate::types::{classify_type, enumerate_types, probe_witness, type_witness, varied_witness, TypeDescriptor};

/// Images longer than this are refused.
pub const MAX_IMAGE_LEN: usize = 1 << 22;

/// `φ(∅) = root`, `φ(s⌢i) = φ(s)⌢wᵢ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Substitution {
    domain: u8,
    root: Node,
    blocks: Vec<Node>,
}

/// Sardinas–Patterson: every concatenation of codewords factors uniquely.
fn uniquely_decodable(code: &[&[u8]]) -> bool {
    let words: BTreeSet<&[u8]> = code.iter().copied().collect();
    if words.len() != code.len() || words.contains(&[][..]) {
        return false;
    }
    let dangling = |a: &BTreeSet<Vec<u8>>, b: &BTreeSet<Vec<u8>>| -> BTreeSet<Vec<u8>> {
        let mut out = BTreeSet::new();
        for x in a {
            for y in b {
                if y.len() > x.len() && y.starts_with(x) {
                    out.insert(y[x.len()..].to_vec());
                }
            }
        }
        out
    };
    let c: BTreeSet<Vec<u8>> = words.iter().map(|w| w.to_vec()).collect();
    let mut current = dangling(&c, &c);
    let mut seen: BTreeSet<BTreeSet<Vec<u8>>> = BTreeSet::new();
    loop {
        if current.iter().any(|w| c.contains(w)) {
            return false;
        }
        if current.is_empty() || !seen.insert(current.clone()) {
            return true;
        }
        let mut next = dangling(&c, &current);
        next.extend(dangling(&current, &c));
        current = next;
    }
}

impl Substitution {
    pub fn new(domain: u8, root: Node, blocks: Vec<Node>) -> Result<Self> {
        if blocks.len() != domain as usize || domain == 0 {
            return Err(Error::Validation(format!("{} blocks for alphabet {domain}", blocks.len())));
        }
        if let Some(b) = blocks.iter().find(|b| b.alphabet() != root.alphabet()) {
            return Err(Error::AlphabetMismatch(b.alphabet(), root.alphabet()));
        }
        let code: Vec<&[u8]> = blocks.iter().map(Node::letters).collect();
        if !uniquely_decodable(&code) {
            return Err(Error::Validation("blocks do not form a uniquely decodable code".into()));
        }
        Ok(Substitution { domain, root, blocks })
    }

    pub fn parse(domain: u8, codomain: u8, root: &str, blocks: &[&str]) -> Result<Self> {
        let blocks = blocks.iter().map(|b| Node::parse(b, codomain)).collect::<Result<Vec<_>>>()?;
        Self::new(domain, Node::parse(root, codomain)?, blocks)
    }

    /// `w_i = (i)` in the same tree.
    pub fn identity(n: u8) -> Self {
        Self::subalphabet(&(0..n).collect::<Vec<_>>(), n).unwrap()
    }

    /// `ψ(s₀,…,s_k) = (s₀,n−1,…,s_k,n−1)`.
    pub fn psi(n: u8) -> Self {
        let blocks = (0..n).map(|i| Node::from_vec_unchecked(n, vec![i, n - 1])).collect();
        Self::new(n, Node::root(n), blocks).unwrap()
    }

    /// `w_i = i⌢0⌢1⌢…⌢(i−1)⌢0…0`, all of length `n`. Preserves meets, `≺`,
    /// first moves and record histories, and every path between images
    /// passes through all letters below its records.
    pub fn spread(n: u8) -> Self {
        let blocks = (0..n)
            .map(|i| {
                let mut w = vec![i];
                w.extend(0..i);
                w.resize(n as usize, 0);
                Node::from_vec_unchecked(n, w)
            })
            .collect();
        Self::new(n, Node::root(n), blocks).unwrap()
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &Substitution) -> Result<Self> {
        if inner.root.alphabet() != self.domain {
            return Err(Error::AlphabetMismatch(inner.root.alphabet(), self.domain));
        }
        let image = |w: &Node| {
            let mut out = Vec::new();
            for &i in w.letters() {
                out.extend_from_slice(self.blocks[i as usize].letters());
            }
            out
        };
        let mut root = self.root.letters().to_vec();
        root.extend(image(&inner.root));
        let m = self.root.alphabet();
        let blocks = inner.blocks.iter().map(|w| Node::from_vec_unchecked(m, image(w))).collect();
        Self::new(inner.domain, Node::from_vec_unchecked(m, root), blocks)
    }

    /// The letter-wise inclusion `i ↦ iota[i]` of `n^{<ω}` into `m^{<ω}`.
    pub fn subalphabet(iota: &[u8], m: u8) -> Result<Self> {
        let blocks = iota.iter().map(|&l| Node::new(m, vec![l])).collect::<Result<Vec<_>>>()?;
        Self::new(iota.len() as u8, Node::root(m), blocks)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn blocks(&self) -> &[Node] {
        &self.blocks
    }
}

/// `φ(s) = e(s₀)⌢…⌢e(s_k)⌢e(∞)`: the e-family read as a substitution whose
/// output is closed off by `e(∞)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EFamilyEmbedding {
    family: EFamily,
}

impl EFamilyEmbedding {
    pub fn family(&self) -> &EFamily {
        &self.family
    }
}

/// Every dyadic node is `P⌢0^j` with `P = ∅` or `P` ending in 1. With
/// `x_k = u₁^k⌢v₁` the witness of `τ₁` and `u₀` the block of the chain type `τ₀`,
/// `φ(P⌢0^j) = x_{|u₀|(rank P + 1)} ⌢ u₀^{|u₁|(rank s − rank P)}`, so
/// `|φ(s)| = |u₀||u₁|(rank s + 1) + |v₁|` and `φ` is `≺`-monotone.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DominationEmbedding {
    tau0: TypeDescriptor,
    tau1: TypeDescriptor,
    u1: Node,
    v1: Node,
    u0: Node,
}

impl DominationEmbedding {
    pub fn tau0(&self) -> &TypeDescriptor {
        &self.tau0
    }

    pub fn tau1(&self) -> &TypeDescriptor {
        &self.tau1
    }
}

/// `φ(s) = u^{rank s + 1}`: every set goes to a subset of one chain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChainCollapse {
    domain: u8,
    block: Node,
}

/// A finite injective map on all nodes of length `≤ depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tabulated {
    domain: u8,
    codomain: u8,
    depth: usize,
    map: BTreeMap<Node, Node>,
}

impl Tabulated {
    pub fn new(domain: u8, codomain: u8, depth: usize, map: BTreeMap<Node, Node>) -> Result<Self> {
        let expected = Node::all_up_to(domain, depth);
        if map.len() != expected.len() || expected.iter().any(|s| !map.contains_key(s)) {
            return Err(Error::Validation(format!("table must cover every node of length ≤ {depth}")));
        }
        if map.values().any(|t| t.alphabet() != codomain) {
            return Err(Error::Validation("image outside the codomain".into()));
        }
        Ok(Tabulated { domain, codomain, depth, map })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Node, &Node)> {
        self.map.iter()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Embedding {
    Substitution(Substitution),
    EFamily(EFamilyEmbedding),
    Domination(DominationEmbedding),
    ChainCollapse(ChainCollapse),
    Tabulated(Tabulated),
}

fn repeat_into(out: &mut Vec<u8>, block: &Node, times: u128) -> Result<()> {
    let total = (block.len() as u128).saturating_mul(times);
    if total + out.len() as u128 > MAX_IMAGE_LEN as u128 {
        return Err(Error::ScaleLimit(format!("image longer than {MAX_IMAGE_LEN} letters")));
    }
    for _ in 0..times {
        out.extend_from_slice(block.letters());
    }
    Ok(())
}

impl Embedding {
    pub fn domain_alphabet(&self) -> u8 {
        match self {
            Embedding::Substitution(s) => s.domain,
            Embedding::EFamily(e) => e.family.arity(),
            Embedding::Domination(_) => 2,
            Embedding::ChainCollapse(c) => c.domain,
            Embedding::Tabulated(t) => t.domain,
        }
    }

    pub fn codomain_alphabet(&self) -> u8 {
        match self {
            Embedding::Substitution(s) => s.root.alphabet(),
            Embedding::EFamily(e) => e.family.alphabet_out,
            Embedding::Domination(d) => d.tau1.alphabet(),
            Embedding::ChainCollapse(c) => c.block.alphabet(),
            Embedding::Tabulated(t) => t.codomain,
        }
    }

    /// Nodes beyond this length are outside the domain.
    pub fn max_depth(&self) -> Option<usize> {
        match self {
            Embedding::Tabulated(t) => Some(t.depth),
            _ => None,
        }
    }

    pub fn apply(&self, s: &Node) -> Result<Node> {
        if s.alphabet() != self.domain_alphabet() {
            return Err(Error::AlphabetMismatch(s.alphabet(), self.domain_alphabet()));
        }
        let m = self.codomain_alphabet();
        let mut out: Vec<u8> = Vec::new();
        match self {
            Embedding::Substitution(sub) => {
                out.extend_from_slice(sub.root.letters());
                for &i in s.letters() {
                    repeat_into(&mut out, &sub.blocks[i as usize], 1)?;
                }
            }
            Embedding::EFamily(e) => {
                for &i in s.letters() {
                    repeat_into(&mut out, &e.family.e[i as usize], 1)?;
                }
                out.extend_from_slice(e.family.e_inf.letters());
            }
            Embedding::Domination(d) => {
                let p_len = s.letters().iter().rposition(|&l| l != 0).map_or(0, |k| k + 1);
                let (rank_p, rank_s) = (s.truncate(p_len).rank(), s.rank());
                if rank_s == u128::MAX {
                    return Err(Error::ScaleLimit(format!("rank of {s} overflows")));
                }
                repeat_into(&mut out, &d.u1, (d.u0.len() as u128).saturating_mul(rank_p + 1))?;
                out.extend_from_slice(d.v1.letters());
                repeat_into(&mut out, &d.u0, (d.u1.len() as u128).saturating_mul(rank_s - rank_p))?;
            }
            Embedding::ChainCollapse(c) => {
                let rank = s.rank();
                if rank == u128::MAX {
                    return Err(Error::ScaleLimit(format!("rank of {s} overflows")));
                }
                repeat_into(&mut out, &c.block, rank + 1)?;
            }
            Embedding::Tabulated(t) => {
                return t.map.get(s).cloned().ok_or_else(|| Error::OutOfDomain(s.to_string()));
            }
        }
        Ok(Node::from_vec_unchecked(m, out))
    }

    pub fn apply_set(&self, set: &NodeSet) -> Result<NodeSet> {
        let image = set.iter().map(|s| self.apply(s)).collect::<Result<Vec<_>>>()?;
        NodeSet::new(self.codomain_alphabet(), image)
    }

    /// The restriction to nodes of length `≤ depth`.
    pub fn tabulate(&self, depth: usize) -> Result<Tabulated> {
        let map = Node::all_up_to(self.domain_alphabet(), depth)
            .into_iter()
            .map(|s| self.apply(&s).map(|t| (s, t)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Tabulated::new(self.domain_alphabet(), self.codomain_alphabet(), depth, map)
    }

    /// `self ∘ Substitution::spread(n)` for substitutions and e-families.
    pub fn spread(&self) -> Option<Embedding> {
        let nu = Substitution::spread(self.domain_alphabet());
        match self {
            Embedding::Substitution(s) => s.after(&nu).ok().map(Embedding::Substitution),
            Embedding::EFamily(e) => {
                let f = &e.family;
                let e2 = nu
                    .blocks
                    .iter()
                    .map(|w| {
                        let mut out = Vec::new();
                        for &i in w.letters() {
                            out.extend_from_slice(f.e[i as usize].letters());
                        }
                        Node::from_vec_unchecked(f.alphabet_out, out)
                    })
                    .collect();
                let family = EFamily::new(f.alphabet_out, f.e_inf.clone(), e2).ok()?;
                Some(Embedding::EFamily(EFamilyEmbedding { family }))
            }
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Embedding::Substitution(s) => {
                let blocks: Vec<String> = s.blocks.iter().map(Node::to_string).collect();
                format!("substitution root={} blocks=[{}]", s.root, blocks.join(","))
            }
            Embedding::EFamily(e) => format!("efamily {}", e.family),
            Embedding::Domination(d) => format!("domination tau0={} tau1={}", d.tau0, d.tau1),
            Embedding::ChainCollapse(c) => format!("chain-collapse block={}", c.block),
            Embedding::Tabulated(t) => format!("tabulated depth={}", t.depth),
        }
    }

    /// Injectivity on all nodes of length `≤ depth`, plus the monotonicity
    /// the construction guarantees: `≤` for substitutions, level for
    /// e-families, `≺` for domination and chain collapse.
    pub fn validate(&self, depth: usize) -> Result<()> {
        let depth = self.max_depth().map_or(depth, |d| d.min(depth));
        let nodes = Node::all_up_to(self.domain_alphabet(), depth);
        let images = nodes.iter().map(|s| self.apply(s)).collect::<Result<Vec<_>>>()?;
        let mut seen: BTreeMap<&Node, &Node> = BTreeMap::new();
        for (s, t) in nodes.iter().zip(&images) {
            if let Some(prev) = seen.insert(t, s) {
                return Err(Error::Validation(format!("{prev} and {s} both map to {t}")));
            }
        }
        let fail = |a: &Node, b: &Node, what: &str| Err(Error::Validation(format!("{what} fails at {a}, {b}")));
        match self {
            Embedding::Substitution(_) => {
                for (k, s) in nodes.iter().enumerate() {
                    if !s.is_root() {
                        let parent = nodes.iter().position(|x| *x == s.truncate(s.len() - 1)).unwrap();
                        if !images[parent].is_prefix_of(&images[k]) {
                            return fail(&nodes[parent], s, "≤-monotonicity");
                        }
                    }
                }
            }
            Embedding::EFamily(_) => {
                for w in nodes.windows(2).zip(images.windows(2)) {
                    if w.0[0].len() < w.0[1].len() && w.1[0].len() >= w.1[1].len() {
                        return fail(&w.0[0], &w.0[1], "level monotonicity");
                    }
                }
            }
            Embedding::Domination(_) | Embedding::ChainCollapse(_) => {
                // `nodes` is ≺-sorted.
                for (w, s) in images.windows(2).zip(nodes.windows(2)) {
                    if w[0] >= w[1] {
                        return fail(&s[0], &s[1], "≺-monotonicity");
                    }
                }
            }
            Embedding::Tabulated(_) => {}
        }
        Ok(())
    }
}

impl From<Substitution> for Embedding {
    fn from(s: Substitution) -> Self {
        Embedding::Substitution(s)
    }
}

/// The e-family realized as an embedding; validated to `depth` and checked to
/// induce `E.induced_map()`.
pub fn realize_efamily(family: &EFamily, depth: usize) -> Result<Embedding> {
    family.validate()?;
    let phi = Embedding::EFamily(EFamilyEmbedding { family: family.clone() });
    phi.validate(depth)?;
    let action = comb_action(&phi)?;
    let expected = family.induced_map();
    if action != expected {
        let k = CombKind::all(family.arity()).into_iter().find(|&k| action.apply(k) != expected.apply(k)).unwrap();
        return Err(Error::Validation(format!(
            "{family}: comb {k} goes to {}, rule says {}",
            action.apply(k),
            expected.apply(k)
        )));
    }
    Ok(phi)
}

/// The construction behind domination, for any chain type `tau0` and any
/// `tau1` over one alphabet; `tau0 = tau1` a chain type gives the chain collapse.
pub fn domination_construction(tau0: &TypeDescriptor, tau1: &TypeDescriptor) -> Result<Embedding> {
    if tau0.alphabet() != tau1.alphabet() {
        return Err(Error::AlphabetMismatch(tau0.alphabet(), tau1.alphabet()));
    }
    if !tau0.is_chain_type() {
        return Err(Error::Unsupported(format!("domination construction needs a chain type for tau0, got {tau0}")));
    }
    let w0 = crate::types::TypeWitnessSpec::new(tau0, Default::default())?;
    if tau0 == tau1 {
        return Ok(Embedding::ChainCollapse(ChainCollapse { domain: 2, block: w0.u }));
    }
    let w1 = crate::types::TypeWitnessSpec::new(tau1, Default::default())?;
    Ok(Embedding::Domination(DominationEmbedding {
        tau0: tau0.clone(),
        tau1: tau1.clone(),
        u1: w1.u,
        v1: w1.v,
        u0: w0.u,
    }))
}

/// An embedding `2^{<ω} → m^{<ω}` with `φ̄[0] = tau0` and `φ̄σ = tau1` for
/// every probed `σ ≠ [0]`. Requires `tau1` to dominate `tau0`.
pub fn domination_embedding(tau0: &TypeDescriptor, tau1: &TypeDescriptor, depth: usize) -> Result<Embedding> {
    if tau0 != tau1 && !tau1.dominates(tau0)? {
        return Err(Error::Validation(format!("{tau1} does not dominate {tau0}")));
    }
    let phi = domination_construction(tau0, tau1)?;
    phi.validate(depth)?;
    let action = type_action(&phi, DEFAULT_PROBE_BLOCKS)?;
    let zero = TypeDescriptor::chain(2, 0)?;
    for (sigma, image) in action.entries() {
        let want = if *sigma == zero { tau0 } else { tau1 };
        match image {
            Ok(t) if t == want => {}
            Ok(t) => return Err(Error::Validation(format!("{sigma} goes to {t}, expected {want}"))),
            Err(e) => return Err(Error::Validation(format!("{sigma}: {e}"))),
        }
    }
    Ok(phi)
}

pub const DEFAULT_COMB_PROBE: usize = 4;
pub const DEFAULT_PROBE_BLOCKS: usize = 3;

/// The comb kind of `φ(witness)`, read at sizes `count` and `count + 1`.
pub fn comb_image(phi: &Embedding, kind: CombKind, count: usize) -> Result<CombKind> {
    let n = phi.domain_alphabet();
    let a = classify_comb(&phi.apply_set(&comb_witness(kind, count, n)?)?)?;
    let b = classify_comb(&phi.apply_set(&comb_witness(kind, count + 1, n)?)?)?;
    if a != b {
        return Err(Error::Unstable(format!("{kind} goes to {a} at size {count} but {b} at size {}", count + 1)));
    }
    Ok(a)
}

pub fn comb_action(phi: &Embedding) -> Result<InducedCombMap> {
    let n = phi.domain_alphabet();
    let table = CombKind::all(n)
        .into_iter()
        .map(|k| comb_image(phi, k, DEFAULT_COMB_PROBE))
        .collect::<Result<Vec<_>>>()?;
    Ok(InducedCombMap { domain: n, codomain: phi.codomain_alphabet(), table })
}

/// The set of type `tau` probed through `φ`. Rank-driven constructions get the
/// compact witness, since their image length grows with the rank of the input;
/// everything else gets the canonical one, whose slack survives block maps.
pub fn probe_set(phi: &Embedding, tau: &TypeDescriptor, blocks: usize) -> NodeSet {
    match phi {
        Embedding::Domination(_) | Embedding::ChainCollapse(_) => probe_witness(tau, blocks),
        _ => type_witness(tau, blocks),
    }
}

/// The type of `φ(X)` for a probe `X` of type `tau`, read at `blocks` and
/// `blocks + 1`. Block maps are also read on `varied_witness`: a map whose
/// image type depends on the repetition counts is not normal on `tau`.
pub fn type_image(phi: &Embedding, tau: &TypeDescriptor, blocks: usize) -> Result<TypeDescriptor> {
    let a = classify_type(&phi.apply_set(&probe_set(phi, tau, blocks))?)?;
    let b = classify_type(&phi.apply_set(&probe_set(phi, tau, blocks + 1))?)?;
    if a != b {
        return Err(Error::Unstable(format!("{tau} goes to {a} at {blocks} blocks but {b} at {}", blocks + 1)));
    }
    if !matches!(phi, Embedding::Domination(_) | Embedding::ChainCollapse(_)) {
        let c = classify_type(&phi.apply_set(&varied_witness(tau, blocks))?)?;
        if a != c {
            return Err(Error::Unstable(format!("{tau} goes to {a} or {c} depending on repetitions")));
        }
    }
    Ok(a)
}

/// `φ̄` on the probed types, with the failures kept per type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeAction {
    pub domain: u8,
    pub codomain: u8,
    entries: Vec<(TypeDescriptor, std::result::Result<TypeDescriptor, Error>)>,
}

impl TypeAction {
    pub fn entries(&self) -> impl Iterator<Item = (&TypeDescriptor, std::result::Result<&TypeDescriptor, &Error>)> {
        self.entries.iter().map(|(t, r)| (t, r.as_ref()))
    }

    pub fn get(&self, tau: &TypeDescriptor) -> Option<&TypeDescriptor> {
        self.entries.iter().find(|(t, _)| t == tau).and_then(|(_, r)| r.as_ref().ok())
    }

    pub fn is_total(&self) -> bool {
        self.entries.iter().all(|(_, r)| r.is_ok())
    }

    /// The map when every probed type has a stable image.
    pub fn total(&self) -> Option<BTreeMap<TypeDescriptor, TypeDescriptor>> {
        self.entries.iter().map(|(t, r)| r.as_ref().ok().map(|v| (t.clone(), v.clone()))).collect()
    }

    pub fn range(&self) -> BTreeSet<TypeDescriptor> {
        self.entries.iter().filter_map(|(_, r)| r.as_ref().ok().cloned()).collect()
    }
}

pub fn type_action(phi: &Embedding, blocks: usize) -> Result<TypeAction> {
    let entries = enumerate_types(phi.domain_alphabet())?
        .into_iter()
        .map(|t| {
            let image = type_image(phi, &t, blocks);
            (t, image)
        })
        .collect();
    Ok(TypeAction { domain: phi.domain_alphabet(), codomain: phi.codomain_alphabet(), entries })
}

/// Pairs `(τ, σ)` with `max τ ≤ max σ` but `max φ̄τ > max φ̄σ`.
pub fn max_monotonicity_check(action: &TypeAction) -> Vec<(TypeDescriptor, TypeDescriptor)> {
    max_violations(action.entries.iter().filter_map(|(t, r)| r.as_ref().ok().map(|v| (t, v))).collect())
}

/// `max_monotonicity_check` on a total action.
pub fn max_monotonicity_violations(action: &BTreeMap<TypeDescriptor, TypeDescriptor>) -> Vec<(TypeDescriptor, TypeDescriptor)> {
    max_violations(action.iter().collect())
}

fn max_violations(mapped: Vec<(&TypeDescriptor, &TypeDescriptor)>) -> Vec<(TypeDescriptor, TypeDescriptor)> {
    let mut violations = Vec::new();
    for &(tau, ftau) in &mapped {
        for &(sigma, fsigma) in &mapped {
            if tau.max_letter() <= sigma.max_letter() && ftau.max_letter() > fsigma.max_letter() {
                violations.push((tau.clone(), sigma.clone()));
            }
        }
    }
    violations
}

/// Limits of the embedding generator families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Longest substitution block for domain alphabets `≤ 2`.
    pub block_len: usize,
    /// Longest substitution block for domain alphabets `≥ 3`.
    pub block_len_wide: usize,
    /// Highest level of the e-family leaves.
    pub efamily_level: usize,
    pub domination: bool,
    pub probe_blocks: usize,
    pub validate_depth: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            block_len: 3,
            block_len_wide: 2,
            efamily_level: 2,
            domination: true,
            probe_blocks: DEFAULT_PROBE_BLOCKS,
            validate_depth: 5,
        }
    }
}

fn is_increasing(v: &[u8]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

fn injections(n: u8, m: u8) -> Vec<Vec<u8>> {
    fn rec(n: u8, m: u8, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == n as usize {
            out.push(cur.clone());
            return;
        }
        for l in 0..m {
            if !cur.contains(&l) {
                cur.push(l);
                rec(n, m, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, m, &mut Vec::new(), &mut out);
    out
}

/// The candidate embeddings `n^{<ω} → m^{<ω}` in search order: increasing
/// letter inclusions, then other inclusions, substitutions by block length
/// and e-families, each precomposed with `Substitution::spread`, then (for
/// `n = 2`) domination constructions for dominating pairs and chain collapses.
///
/// Probing a map on literal witnesses can report a non-normal action (a
/// letter swap sends `1^k` to `0^k`); the spread moves probes onto sets whose
/// paths carry every smaller letter.
pub fn generate_embeddings(n: u8, m: u8, budget: &SearchBudget) -> Result<Vec<Embedding>> {
    let mut out: Vec<Embedding> = Vec::new();
    let mut seen: BTreeSet<Vec<Node>> = BTreeSet::new();
    let mut push_sub = |out: &mut Vec<Embedding>, sub: Substitution| {
        if seen.insert(sub.blocks.clone()) {
            out.push(sub.into());
        }
    };
    let nu = Substitution::spread(n);
    if n <= m {
        let (up, other): (Vec<_>, Vec<_>) = injections(n, m).into_iter().partition(|v| is_increasing(v));
        for iota in up {
            push_sub(&mut out, Substitution::subalphabet(&iota, m)?);
        }
        for iota in other {
            push_sub(&mut out, Substitution::subalphabet(&iota, m)?.after(&nu)?);
        }
    }
    let max_len = if n <= 2 { budget.block_len } else { budget.block_len_wide };
    let words: Vec<Node> = Node::all_up_to(m, max_len).into_iter().filter(|w| !w.is_root()).collect();
    let mut tuples: Vec<Vec<Node>> = vec![Vec::new()];
    for _ in 0..n {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                words.iter().map(move |w| {
                    let mut t = t.clone();
                    t.push(w.clone());
                    t
                })
            })
            .collect();
    }
    tuples.sort_by_key(|t| (t.iter().map(Node::len).max(), t.iter().map(Node::len).sum::<usize>(), t.clone()));
    for blocks in tuples {
        if let Ok(sub) = Substitution::new(n, Node::root(m), blocks) {
            push_sub(&mut out, sub.after(&nu)?);
        }
    }
    for family in crate::combs::enumerate_configurations(n, m)? {
        if family.level() <= budget.efamily_level {
            out.extend(Embedding::EFamily(EFamilyEmbedding { family }).spread());
        }
    }
    if n == 2 && budget.domination {
        let types = enumerate_types(m)?;
        for tau0 in types.iter().filter(|t| t.is_chain_type()) {
            for tau1 in &types {
                if tau1 == tau0 || tau1.dominates(tau0)? {
                    out.push(domination_construction(tau0, tau1)?);
                }
            }
        }
    }
    Ok(out)
}

/// A validated embedding whose type action is total.
#[derive(Clone, Debug, Serialize)]
pub struct PoolEntry {
    pub embedding: Embedding,
    pub action: BTreeMap<TypeDescriptor, TypeDescriptor>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ActionPool {
    pub domain: u8,
    pub codomain: u8,
    pub budget: SearchBudget,
    /// In generator order.
    pub entries: Vec<PoolEntry>,
    /// Generated embeddings that failed validation or had a partial action.
    pub rejected: usize,
}

impl ActionPool {
    /// The first entry for each distinct action.
    pub fn distinct(&self) -> Vec<&PoolEntry> {
        let mut seen = BTreeSet::new();
        self.entries.iter().filter(|e| seen.insert(e.action.clone())).collect()
    }
}

/// The memoized pool of `generate_embeddings(n, m, budget)`.
pub fn action_pool(n: u8, m: u8, budget: &SearchBudget) -> Result<Arc<ActionPool>> {
    type Cache = HashMap<(u8, u8, SearchBudget), Arc<ActionPool>>;
    static CACHE: OnceLock<Mutex<Cache>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(pool) = cache.lock().unwrap().get(&(n, m, *budget)) {
        return Ok(pool.clone());
    }
    let pool = Arc::new(build_action_pool(n, m, budget)?);
    cache.lock().unwrap().insert((n, m, *budget), pool.clone());
    Ok(pool)
}

/// `action_pool` without the memo. Entry order is generator order whatever
/// the thread count.
pub fn build_action_pool(n: u8, m: u8, budget: &SearchBudget) -> Result<ActionPool> {
    let generated = generate_embeddings(n, m, budget)?;
    let total = generated.len();
    let entries: Vec<PoolEntry> = generated
        .into_par_iter()
        .filter_map(|embedding| {
            embedding.validate(budget.validate_depth).ok()?;
            let action = type_action(&embedding, budget.probe_blocks).ok()?.total()?;
            Some(PoolEntry { embedding, action })
        })
        .collect();
    Ok(ActionPool { domain: n, codomain: m, budget: *budget, rejected: total - entries.len(), entries })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmbeddingJson {
    Substitution { n: u8, m: u8, root: String, blocks: Vec<String> },
    Tabulated { n: u8, m: u8, depth: usize, pairs: Vec<(String, String)> },
    Efamily { n: u8, m: u8, e_inf: String, e: Vec<String> },
    Domination { m: u8, tau0: String, tau1: String },
    ChainCollapse { n: u8, m: u8, block: String },
}

impl From<&Embedding> for EmbeddingJson {
    fn from(phi: &Embedding) -> Self {
        let (n, m) = (phi.domain_alphabet(), phi.codomain_alphabet());
        match phi {
            Embedding::Substitution(s) => EmbeddingJson::Substitution {
                n,
                m,
                root: s.root.to_string(),
                blocks: s.blocks.iter().map(Node::to_string).collect(),
            },
            Embedding::Tabulated(t) => EmbeddingJson::Tabulated {
                n,
                m,
                depth: t.depth,
                pairs: t.map.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            },
            Embedding::EFamily(e) => EmbeddingJson::Efamily {
                n,
                m,
                e_inf: e.family.e_inf.to_string(),
                e: e.family.e.iter().map(Node::to_string).collect(),
            },
            Embedding::Domination(d) => EmbeddingJson::Domination { m, tau0: d.tau0.to_string(), tau1: d.tau1.to_string() },
            Embedding::ChainCollapse(c) => EmbeddingJson::ChainCollapse { n, m, block: c.block.to_string() },
        }
    }
}

impl TryFrom<&EmbeddingJson> for Embedding {
    type Error = Error;

    fn try_from(json: &EmbeddingJson) -> Result<Self> {
        Ok(match json {
            EmbeddingJson::Substitution { n, m, root, blocks } => {
                let blocks: Vec<&str> = blocks.iter().map(String::as_str).collect();
                Substitution::parse(*n, *m, root, &blocks)?.into()
            }
            EmbeddingJson::Tabulated { n, m, depth, pairs } => {
                let map = pairs
                    .iter()
                    .map(|(a, b)| Ok((Node::parse(a, *n)?, Node::parse(b, *m)?)))
                    .collect::<Result<BTreeMap<_, _>>>()?;
                Embedding::Tabulated(Tabulated::new(*n, *m, *depth, map)?)
            }
            EmbeddingJson::Efamily { n, m, e_inf, e } => {
                let e: Vec<&str> = e.iter().map(String::as_str).collect();
                let family = EFamily::parse(*m, e_inf, &e)?;
                if family.arity() != *n {
                    return Err(Error::InvalidEFamily(format!("{} leaves for alphabet {n}", family.arity())));
                }
                Embedding::EFamily(EFamilyEmbedding { family })
            }
            EmbeddingJson::Domination { m, tau0, tau1 } => {
                domination_construction(&TypeDescriptor::parse(tau0, *m)?, &TypeDescriptor::parse(tau1, *m)?)?
            }
            EmbeddingJson::ChainCollapse { n, m, block } => {
                Embedding::ChainCollapse(ChainCollapse { domain: *n, block: Node::parse(block, *m)? })
            }
        })
    }
}

impl Serialize for Embedding {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EmbeddingJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Embedding {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = EmbeddingJson::deserialize(d)?;
        Embedding::try_from(&json).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(text: &str, m: u8) -> Node {
        Node::parse(text, m).unwrap()
    }

    fn ty(text: &str) -> TypeDescriptor {
        TypeDescriptor::parse(text, 2).unwrap()
    }

    #[test]
    fn sardinas_patterson() {
        assert!(uniquely_decodable(&[&[0], &[1, 0]]));
        assert!(uniquely_decodable(&[&[0], &[0, 1]]));
        assert!(!uniquely_decodable(&[&[0], &[0, 0]]));
        assert!(!uniquely_decodable(&[&[0], &[0, 1], &[1, 0]]));
        assert!(!uniquely_decodable(&[&[0, 1], &[0, 1]]));
    }

    #[test]
    fn apply_examples() {
        let id: Embedding = Substitution::identity(2).into();
        let a = NodeSet::parse("{0,01,110}", 2).unwrap();
        assert_eq!(id.apply_set(&a).unwrap(), a);

        let psi: Embedding = Substitution::psi(2).into();
        let chain = NodeSet::parse("{0,00}", 2).unwrap();
        assert_eq!(psi.apply_set(&chain).unwrap(), NodeSet::parse("{01,0101}", 2).unwrap());

        let flip: Embedding = Substitution::parse(2, 2, "", &["01", "00"]).unwrap().into();
        assert_eq!(flip.apply(&n("0", 2)).unwrap(), n("01", 2));
    }

    #[test]
    fn efamily_embedding_formula() {
        let e = EFamily::parse(2, "0", &["11", "01"]).unwrap();
        let phi = realize_efamily(&e, 5).unwrap();
        assert_eq!(phi.apply(&n("01", 2)).unwrap(), n("11010", 2));
        assert_eq!(phi.apply(&n("", 2)).unwrap(), n("0", 2));
    }

    #[test]
    fn printed_substitution_maps_chains_to_chains() {
        let phi: Embedding = Substitution::parse(2, 2, "", &["01", "00"]).unwrap().into();
        let eps = comb_action(&phi).unwrap();
        assert_eq!(eps.apply(CombKind::chain(1)), CombKind::chain(0));
        assert_eq!(eps.apply(CombKind::chain(0)), CombKind::chain(0));
    }

    #[test]
    fn identity_actions() {
        for m in 1..=3 {
            let id: Embedding = Substitution::identity(m).into();
            assert_eq!(comb_action(&id).unwrap(), InducedCombMap::identity(m));
            let action = type_action(&id, DEFAULT_PROBE_BLOCKS).unwrap();
            for (t, img) in action.entries() {
                assert_eq!(img.unwrap(), t);
            }
            assert!(max_monotonicity_check(&action).is_empty());
        }
    }

    #[test]
    fn psi_action() {
        let psi: Embedding = Substitution::psi(2).into();
        let action = type_action(&psi, DEFAULT_PROBE_BLOCKS).unwrap();
        assert!(action.is_total());
        // [i] goes to the type of {(i,1), (i,1,i,1), …}.
        for i in 0..2 {
            let chain = Node::from_vec_unchecked(2, vec![i, 1]);
            let target: Vec<Node> = (1..=4).map(|k| rep(&chain, k)).collect();
            let expected = classify_type(&NodeSet::new(2, target).unwrap()).unwrap();
            assert_eq!(action.get(&TypeDescriptor::chain(2, i).unwrap()), Some(&expected));
        }
        assert_eq!(action.get(&ty("[l0]")), Some(&ty("[l0 l1]")));
        assert_eq!(action.get(&ty("[l1]")), Some(&ty("[l1]")));
        assert!(max_monotonicity_check(&action).is_empty());
    }

    fn rep(x: &Node, k: usize) -> Node {
        (0..k).fold(Node::root(x.alphabet()), |acc, _| acc.concat(x))
    }

    #[test]
    fn domination_for_the_top_comb() {
        let phi = domination_embedding(&ty("[l0]"), &ty("[l0 u1 l1]"), 6).unwrap();
        let action = type_action(&phi, DEFAULT_PROBE_BLOCKS).unwrap();
        assert!(action.is_total());
        assert!(max_monotonicity_check(&action).is_empty());
    }

    #[test]
    fn domination_construction_for_a_non_top_comb_is_mixed() {
        let phi = domination_construction(&ty("[l0]"), &ty("[u1 l0 l1]")).unwrap();
        phi.validate(6).unwrap();
        let action = type_action(&phi, DEFAULT_PROBE_BLOCKS).unwrap();
        let range: BTreeSet<TypeDescriptor> = action
            .entries()
            .filter(|(t, _)| **t != ty("[l0]"))
            .filter_map(|(_, r)| r.ok().cloned())
            .collect();
        assert!(range.contains(&ty("[u1 l0 l1]")), "{range:?}");
        assert!(range.contains(&ty("[l0 u1 l1]")), "{range:?}");
        assert!(domination_embedding(&ty("[l0]"), &ty("[u1 l0 l1]"), 6).is_err());
    }

    #[test]
    fn chain_collapse() {
        let zero = TypeDescriptor::chain(1, 0).unwrap();
        let phi = domination_construction(&zero, &zero).unwrap();
        assert!(matches!(phi, Embedding::ChainCollapse(_)));
        phi.validate(8).unwrap();
        let action = type_action(&phi, DEFAULT_PROBE_BLOCKS).unwrap();
        assert!(action.is_total());
        assert_eq!(action.range(), BTreeSet::from([zero]));
    }

    #[test]
    fn validation_catches_collisions() {
        let map: BTreeMap<Node, Node> =
            Node::all_up_to(2, 1).into_iter().map(|s| (s, n("0", 2))).collect();
        let t = Tabulated::new(2, 2, 1, map).unwrap();
        assert!(Embedding::Tabulated(t).validate(1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let phis: Vec<Embedding> = vec![
            Substitution::psi(3).into(),
            realize_efamily(&EFamily::parse(2, "0", &["11", "01"]).unwrap(), 4).unwrap(),
            domination_construction(&ty("[l0]"), &ty("[l0 u1 l1]")).unwrap(),
            Embedding::Tabulated(Embedding::from(Substitution::psi(2)).tabulate(2).unwrap()),
        ];
        for phi in phis {
            let text = serde_json::to_string(&phi).unwrap();
            let back: Embedding = serde_json::from_str(&text).unwrap();
            assert_eq!(back, phi, "{text}");
        }
        let text = serde_json::to_string(&Embedding::from(Substitution::psi(2))).unwrap();
        assert_eq!(text, r#"{"kind":"substitution","n":2,"m":2,"root":"e","blocks":["01","11"]}"#);
    }

    #[test]
    fn spread_is_type_neutral() {
        for n in 1..=3 {
            let nu: Embedding = Substitution::spread(n).into();
            nu.validate(4).unwrap();
            let action = type_action(&nu, DEFAULT_PROBE_BLOCKS).unwrap();
            for (t, img) in action.entries() {
                assert_eq!(img.unwrap(), t);
            }
        }
        assert_eq!(Substitution::spread(3).blocks()[2], n("201", 3));
    }

    #[test]
    fn spread_letter_swap_respects_max() {
        let swap: Embedding = Substitution::parse(2, 2, "", &["1", "0"]).unwrap().after(&Substitution::spread(2)).unwrap().into();
        let action = type_action(&swap, DEFAULT_PROBE_BLOCKS).unwrap();
        assert!(action.is_total());
        assert_eq!(action.get(&ty("[l0]")), Some(&ty("[l1]")));
        assert_eq!(action.get(&ty("[l1]")), Some(&ty("[l0 l1]")));
        assert!(max_monotonicity_check(&action).is_empty());
    }

    #[test]
    fn composition() {
        let a = Substitution::parse(2, 2, "1", &["01", "1"]).unwrap();
        let b = Substitution::parse(2, 2, "0", &["10", "0"]).unwrap();
        let ab: Embedding = a.after(&b).unwrap().into();
        let (ea, eb): (Embedding, Embedding) = (a.into(), b.into());
        for s in Node::all_up_to(2, 4) {
            assert_eq!(ab.apply(&s).unwrap(), ea.apply(&eb.apply(&s).unwrap()).unwrap());
        }
    }
}
