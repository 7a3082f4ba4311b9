//! Symbolic gaps `{Γ_{S_i} : i < n}` and the order `≤` between them.
//!
//! A gap is stored as its side sets of symbols: comb kinds (first-move
//! layer, symbol = `CombKind::index`) or types (record layer, symbol =
//! position in `enumerate_types`).
//!
//! Two sets of different kinds (types) meet in a bounded number of points, so
//! an injection `φ` reduces `G` to `H` exactly when its induced symbol map `f`
//! satisfies `f(c) ∈ H_i ⟺ c ∈ G_i` for every symbol `c` and side `i`. The
//! forward direction keeps each side inside its image side; the backward
//! direction keeps everything orthogonal to `G_i` orthogonal to `H_i`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combs::{realizable_maps_with_witnesses, CombKind, EFamily, InducedCombMap};
use crate::embeddings::{action_pool, comb_action, realize_efamily, type_action, Embedding, SearchBudget};
use crate::error::{Error, Result};
use crate::types::{enumerate_types, TypeDescriptor, MAX_TYPE_ALPHABET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    FirstMove,
    Record,
}

struct TypeIndex {
    types: Vec<TypeDescriptor>,
    ids: HashMap<TypeDescriptor, usize>,
}

fn type_index(m: u8) -> Result<Arc<TypeIndex>> {
    static CACHE: OnceLock<Vec<Arc<TypeIndex>>> = OnceLock::new();
    if m == 0 || m > MAX_TYPE_ALPHABET {
        return Err(Error::ScaleLimit(format!("types need 1 ≤ m ≤ {MAX_TYPE_ALPHABET}")));
    }
    let all = CACHE.get_or_init(|| {
        (1..=MAX_TYPE_ALPHABET)
            .map(|m| {
                let types = enumerate_types(m).expect("in range");
                let ids = types.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
                Arc::new(TypeIndex { types, ids })
            })
            .collect()
    });
    Ok(all[m as usize - 1].clone())
}

/// The type with id `id` over `m` letters.
pub fn type_of_id(m: u8, id: usize) -> Result<TypeDescriptor> {
    type_index(m)?.types.get(id).cloned().ok_or_else(|| Error::InvalidGap(format!("no type {id} over {m} letters")))
}

pub fn type_id(tau: &TypeDescriptor) -> Result<usize> {
    let index = type_index(tau.alphabet())?;
    index.ids.get(tau).copied().ok_or_else(|| Error::InvalidType(tau.to_string()))
}

/// A symbolic gap. Sides are nonempty and pairwise disjoint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GapSpec {
    layer: Layer,
    alphabet: u8,
    sides: Vec<BTreeSet<usize>>,
}

impl GapSpec {
    pub fn new(layer: Layer, alphabet: u8, sides: Vec<BTreeSet<usize>>) -> Result<Self> {
        let gap = GapSpec { layer, alphabet, sides };
        gap.validate()?;
        Ok(gap)
    }

    pub fn first_move(alphabet: u8, sides: &[&[CombKind]]) -> Result<Self> {
        for k in sides.iter().flat_map(|s| s.iter()) {
            if k.spine.max(k.teeth) >= alphabet {
                return Err(Error::LetterOutOfRange { letter: k.spine.max(k.teeth), alphabet });
            }
        }
        let sides = sides.iter().map(|s| s.iter().map(|k| k.index(alphabet)).collect()).collect();
        Self::new(Layer::FirstMove, alphabet, sides)
    }

    /// Sides given by ASCII type texts, e.g. `&[&["[l0]"], &["[l1]", "[u1 l0]"]]`.
    pub fn record(alphabet: u8, sides: &[&[&str]]) -> Result<Self> {
        let mut out = Vec::new();
        for side in sides {
            let mut set = BTreeSet::new();
            for text in side.iter() {
                set.insert(type_id(&TypeDescriptor::parse(text, alphabet)?)?);
            }
            out.push(set);
        }
        Self::new(Layer::Record, alphabet, out)
    }

    /// `S_i = {(i,i)}`.
    pub fn critical_strong(n: u8) -> Result<Self> {
        let sides: Vec<Vec<CombKind>> = (0..n).map(|i| vec![CombKind::chain(i)]).collect();
        let refs: Vec<&[CombKind]> = sides.iter().map(Vec::as_slice).collect();
        Self::first_move(n, &refs)
    }

    /// `S_i = {[i]}`.
    pub fn critical_record(n: u8) -> Result<Self> {
        let sides = (0..n)
            .map(|i| Ok(BTreeSet::from([type_id(&TypeDescriptor::chain(n, i)?)?])))
            .collect::<Result<Vec<_>>>()?;
        Self::new(Layer::Record, n, sides)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGap(msg));
        if self.sides.is_empty() {
            return bad("no sides".into());
        }
        let universe = universe_size(self.layer, self.alphabet)?;
        let mut seen = BTreeSet::new();
        for (i, side) in self.sides.iter().enumerate() {
            if side.is_empty() {
                return bad(format!("side {i} is empty"));
            }
            for &c in side {
                if c >= universe {
                    return bad(format!("symbol {c} outside a universe of {universe}"));
                }
                if !seen.insert(c) {
                    return bad(format!("symbol {} lies on two sides", self.symbol_name(c)));
                }
            }
        }
        Ok(())
    }

    pub fn layer(&self) -> Layer {
        self.layer
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn arity(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[BTreeSet<usize>] {
        &self.sides
    }

    pub fn universe_size(&self) -> usize {
        universe_size(self.layer, self.alphabet).expect("validated")
    }

    pub fn side_of(&self, symbol: usize) -> Option<usize> {
        self.sides.iter().position(|s| s.contains(&symbol))
    }

    /// Side per symbol, `arity()` for symbols on no side.
    pub fn assignment(&self) -> Vec<u8> {
        let mut out = vec![self.arity() as u8; self.universe_size()];
        for (i, side) in self.sides.iter().enumerate() {
            for &c in side {
                out[c] = i as u8;
            }
        }
        out
    }

    pub fn symbol_name(&self, symbol: usize) -> String {
        symbol_name(self.layer, self.alphabet, symbol)
    }

    /// `(i,i) ∈ S_i`, resp. `[i] ∈ S_i`, for every side `i`.
    pub fn is_candidate(&self) -> bool {
        if self.arity() != self.alphabet as usize {
            return false;
        }
        (0..self.alphabet).all(|i| {
            let pinned = match self.layer {
                Layer::FirstMove => CombKind::chain(i).index(self.alphabet),
                Layer::Record => type_id(&TypeDescriptor::chain(self.alphabet, i).expect("in range")).expect("in range"),
            };
            self.side_of(pinned) == Some(i as usize)
        })
    }

    /// Side `perm[i]` of the result is side `i` of `self`.
    pub fn permute_sides(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.arity())?;
        let mut sides = vec![BTreeSet::new(); self.arity()];
        for (i, side) in self.sides.iter().enumerate() {
            sides[perm[i]] = side.clone();
        }
        Ok(GapSpec { layer: self.layer, alphabet: self.alphabet, sides })
    }

    /// Relabels letters and side indices by the same permutation. First-move
    /// layer with `arity = alphabet` only: a letter permutation does not act
    /// on types, since it breaks the increasing order inside each row.
    pub fn permute_letters(&self, perm: &[u8]) -> Result<Self> {
        if self.layer != Layer::FirstMove || self.arity() != self.alphabet as usize {
            return Err(Error::Unsupported("letter permutations act on first-move n-gaps over n letters".into()));
        }
        let sides_perm: Vec<usize> = perm.iter().map(|&p| p as usize).collect();
        check_permutation(&sides_perm, self.arity())?;
        let m = self.alphabet;
        let mut sides = vec![BTreeSet::new(); self.arity()];
        for (i, side) in self.sides.iter().enumerate() {
            sides[perm[i] as usize] = side
                .iter()
                .map(|&c| CombKind::from_index(c, m).relabel(|l| perm[l as usize]).index(m))
                .collect();
        }
        Ok(GapSpec { layer: self.layer, alphabet: m, sides })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GapJson::from(self)).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: GapJson = serde_json::from_str(text).map_err(|e| Error::Malformed(text.into(), e.to_string()))?;
        GapSpec::try_from(json)
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let set: BTreeSet<usize> = perm.iter().copied().collect();
    if perm.len() != n || set.len() != n || set.iter().any(|&p| p >= n) {
        return Err(Error::InvalidGap(format!("{perm:?} is not a permutation of {n}")));
    }
    Ok(())
}

fn universe_size(layer: Layer, m: u8) -> Result<usize> {
    match layer {
        Layer::FirstMove if (1..=crate::combs::MAX_DESK_ALPHABET).contains(&m) => Ok(m as usize * m as usize),
        Layer::FirstMove => Err(Error::ScaleLimit(format!("first-move gaps need 1 ≤ m ≤ {}", crate::combs::MAX_DESK_ALPHABET))),
        Layer::Record => Ok(type_index(m)?.types.len()),
    }
}

fn symbol_name(layer: Layer, m: u8, symbol: usize) -> String {
    match layer {
        Layer::FirstMove => CombKind::from_index(symbol, m).to_string(),
        Layer::Record => type_of_id(m, symbol).map_or_else(|_| format!("#{symbol}"), |t| t.to_string()),
    }
}

fn pretty_symbol(layer: Layer, m: u8, symbol: usize) -> String {
    match layer {
        Layer::FirstMove => {
            let k = CombKind::from_index(symbol, m);
            format!("({},{})", k.spine, k.teeth)
        }
        Layer::Record => type_of_id(m, symbol).map_or_else(|_| format!("#{symbol}"), |t| t.pretty()),
    }
}

impl fmt::Display for GapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sides: Vec<String> = self
            .sides
            .iter()
            .map(|s| {
                let names: Vec<String> = s.iter().map(|&c| pretty_symbol(self.layer, self.alphabet, c)).collect();
                format!("{{{}}}", names.join(", "))
            })
            .collect();
        write!(f, "({})", sides.join(" | "))
    }
}

/// `{"layer":"first_move","n":2,"m":2,"sides":[["0>0","0>1"],["1>1"]]}`;
/// record sides hold ASCII type texts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapJson {
    pub layer: Layer,
    pub n: usize,
    pub m: u8,
    pub sides: Vec<Vec<String>>,
}

impl From<&GapSpec> for GapJson {
    fn from(g: &GapSpec) -> Self {
        GapJson {
            layer: g.layer,
            n: g.arity(),
            m: g.alphabet,
            sides: g.sides.iter().map(|s| s.iter().map(|&c| g.symbol_name(c)).collect()).collect(),
        }
    }
}

impl TryFrom<GapJson> for GapSpec {
    type Error = Error;

    fn try_from(json: GapJson) -> Result<Self> {
        if json.n != json.sides.len() {
            return Err(Error::InvalidGap(format!("n = {} but {} sides", json.n, json.sides.len())));
        }
        let mut sides = Vec::new();
        for side in &json.sides {
            let mut set = BTreeSet::new();
            for text in side {
                let id = match json.layer {
                    Layer::FirstMove => {
                        let k: CombKind = text.parse()?;
                        if k.spine.max(k.teeth) >= json.m {
                            return Err(Error::LetterOutOfRange { letter: k.spine.max(k.teeth), alphabet: json.m });
                        }
                        k.index(json.m)
                    }
                    Layer::Record => type_id(&TypeDescriptor::parse(text, json.m)?)?,
                };
                set.insert(id);
            }
            sides.push(set);
        }
        GapSpec::new(json.layer, json.m, sides)
    }
}

impl Serialize for GapSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GapJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GapSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        GapSpec::try_from(GapJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// `f(c) ∈ H_i ⟺ c ∈ G_i` for every symbol `c` of `G` and every side `i`.
pub fn membership_rule(g: &GapSpec, h: &GapSpec, f: impl Fn(usize) -> usize) -> bool {
    let (ga, ha) = (g.assignment(), h.assignment());
    let none = g.arity() as u8;
    ga.iter().enumerate().all(|(c, &side)| {
        let image = ha[f(c)];
        image == side || (side == none && image == h.arity() as u8)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "LE_witnessed")]
    LeWitnessed,
    #[serde(rename = "NOT_LE_refuted_exact")]
    NotLeRefutedExact,
    #[serde(rename = "UNKNOWN_bounded")]
    UnknownBounded,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::LeWitnessed => "LE_witnessed",
            Verdict::NotLeRefutedExact => "NOT_LE_refuted_exact",
            Verdict::UnknownBounded => "UNKNOWN_bounded",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderWitness {
    Efamily {
        #[serde(serialize_with = "ser_family")]
        family: EFamily,
        map: InducedCombMap,
    },
    Embedding {
        embedding: Embedding,
        action: BTreeMap<TypeDescriptor, TypeDescriptor>,
    },
}

pub(crate) fn ser_family<S: serde::Serializer>(e: &EFamily, s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Repr {
        m: u8,
        e_inf: String,
        e: Vec<String>,
    }
    Repr { m: e.alphabet_out, e_inf: e.e_inf.to_string(), e: e.e.iter().map(|x| x.to_string()).collect() }.serialize(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderResult {
    pub verdict: Verdict,
    pub witness: Option<OrderWitness>,
    /// Candidate maps examined.
    pub searched: usize,
    /// `None` on the first-move layer, where the search is exhaustive.
    pub budget: Option<SearchBudget>,
}

fn check_comparable(g: &GapSpec, h: &GapSpec) -> Result<()> {
    if g.layer != h.layer {
        return Err(Error::LayerMismatch);
    }
    if g.arity() != h.arity() {
        return Err(Error::InvalidGap(format!("arities {} and {} differ", g.arity(), h.arity())));
    }
    Ok(())
}

fn comb_symbol_map(map: &InducedCombMap) -> impl Fn(usize) -> usize + '_ {
    move |c| map.apply(CombKind::from_index(c, map.domain)).index(map.codomain)
}

fn type_symbol_map<'a>(
    g: &GapSpec,
    h: &GapSpec,
    action: &'a BTreeMap<TypeDescriptor, TypeDescriptor>,
) -> Result<impl Fn(usize) -> usize + 'a> {
    let (gi, hi) = (type_index(g.alphabet)?, type_index(h.alphabet)?);
    let table = gi
        .types
        .iter()
        .map(|t| {
            let image = action.get(t).ok_or_else(|| Error::Validation(format!("action misses {t}")))?;
            hi.ids.get(image).copied().ok_or_else(|| Error::InvalidType(image.to_string()))
        })
        .collect::<Result<Vec<usize>>>()?;
    Ok(move |c: usize| table[c])
}

/// Decides `G ≤ H`. First-move layer: exact, over every realizable comb map.
/// Record layer: bounded, over the distinct actions of the embedding pool.
pub fn order_le(g: &GapSpec, h: &GapSpec, budget: &SearchBudget) -> Result<OrderResult> {
    check_comparable(g, h)?;
    match g.layer {
        Layer::FirstMove => {
            let maps = realizable_maps_with_witnesses(g.alphabet, h.alphabet)?;
            let hit = maps.iter().find(|(map, _)| membership_rule(g, h, comb_symbol_map(map)));
            Ok(match hit {
                Some((map, family)) => OrderResult {
                    verdict: Verdict::LeWitnessed,
                    witness: Some(OrderWitness::Efamily { family: family.clone(), map: map.clone() }),
                    searched: maps.len(),
                    budget: None,
                },
                None => OrderResult { verdict: Verdict::NotLeRefutedExact, witness: None, searched: maps.len(), budget: None },
            })
        }
        Layer::Record => {
            let pool = action_pool(g.alphabet, h.alphabet, budget)?;
            let distinct = pool.distinct();
            for entry in &distinct {
                if membership_rule(g, h, type_symbol_map(g, h, &entry.action)?) {
                    return Ok(OrderResult {
                        verdict: Verdict::LeWitnessed,
                        witness: Some(OrderWitness::Embedding {
                            embedding: entry.embedding.clone(),
                            action: entry.action.clone(),
                        }),
                        searched: distinct.len(),
                        budget: Some(*budget),
                    });
                }
            }
            Ok(OrderResult { verdict: Verdict::UnknownBounded, witness: None, searched: distinct.len(), budget: Some(*budget) })
        }
    }
}

/// Recomputes a witness from scratch and re-checks the membership rule.
/// E-families are realized as embeddings and probed, so the comb map is read
/// off the embedding rather than the rule.
pub fn revalidate_order(g: &GapSpec, h: &GapSpec, result: &OrderResult) -> Result<()> {
    check_comparable(g, h)?;
    let fail = |msg: &str| Err(Error::Validation(msg.into()));
    match (&result.verdict, &result.witness) {
        (Verdict::LeWitnessed, Some(OrderWitness::Efamily { family, map })) => {
            family.validate()?;
            if family.induced_map() != *map {
                return fail("the e-family induces another map");
            }
            let phi = realize_efamily(family, 6)?;
            phi.validate(5)?;
            if comb_action(&phi)? != *map {
                return fail("the realized embedding does not act by the map");
            }
            if !membership_rule(g, h, comb_symbol_map(map)) {
                return fail("membership rule fails");
            }
            Ok(())
        }
        (Verdict::LeWitnessed, Some(OrderWitness::Embedding { embedding, action })) => {
            let depth = result.budget.map_or(5, |b| b.validate_depth);
            let blocks = result.budget.map_or(crate::embeddings::DEFAULT_PROBE_BLOCKS, |b| b.probe_blocks);
            embedding.validate(depth)?;
            let fresh = type_action(embedding, blocks)?.total().ok_or_else(|| Error::Unstable("partial action".into()))?;
            if fresh != *action {
                return fail("recomputed action differs");
            }
            if !membership_rule(g, h, type_symbol_map(g, h, &fresh)?) {
                return fail("membership rule fails");
            }
            Ok(())
        }
        (Verdict::LeWitnessed, None) => fail("LE verdict without witness"),
        (Verdict::NotLeRefutedExact, _) if g.layer == Layer::Record => fail("record-layer refutations are never exact"),
        _ => Ok(()),
    }
}

fn candidates_from_free(layer: Layer, n: u8, pinned: &[(usize, u8)], free: &[usize]) -> Result<Vec<GapSpec>> {
    let values = n as usize + 1;
    let total = values.checked_pow(free.len() as u32).ok_or_else(|| Error::ScaleLimit("too many candidates".into()))?;
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut sides = vec![BTreeSet::new(); n as usize];
        for &(c, i) in pinned {
            sides[i as usize].insert(c);
        }
        let mut rest = code;
        for &c in free.iter().rev() {
            let v = rest % values;
            rest /= values;
            if v < n as usize {
                sides[v].insert(c);
            }
        }
        out.push(GapSpec::new(layer, n, sides)?);
    }
    Ok(out)
}

/// `(i,i) ∈ S_i`; every other comb kind on one side or on none: `(n+1)^{n²-n}`.
pub fn enumerate_candidates_strong(n: u8) -> Result<Vec<GapSpec>> {
    if n == 0 || n > 3 {
        return Err(Error::ScaleLimit("strong candidates need 1 ≤ n ≤ 3".into()));
    }
    let pinned: Vec<(usize, u8)> = (0..n).map(|i| (CombKind::chain(i).index(n), i)).collect();
    let free: Vec<usize> = CombKind::all(n).into_iter().filter(|k| !k.is_chain()).map(|k| k.index(n)).collect();
    candidates_from_free(Layer::FirstMove, n, &pinned, &free)
}

/// `[0] ∈ S_0`, `[1] ∈ S_1`, the other six types on one side or on none, then
/// the same list with the two sides swapped: `2·3⁶`.
pub fn enumerate_candidates_record(n: u8) -> Result<Vec<GapSpec>> {
    if n != 2 {
        return Err(Error::ScaleLimit("record candidates are enumerated for n = 2 only".into()));
    }
    let pinned = vec![(type_id(&TypeDescriptor::chain(2, 0)?)?, 0), (type_id(&TypeDescriptor::chain(2, 1)?)?, 1)];
    let free: Vec<usize> = (0..universe_size(Layer::Record, 2)?).filter(|c| pinned.iter().all(|p| p.0 != *c)).collect();
    let straight = candidates_from_free(Layer::Record, 2, &pinned, &free)?;
    let flipped = straight.iter().map(|g| g.permute_sides(&[1, 0])).collect::<Result<Vec<_>>>()?;
    Ok(straight.into_iter().chain(flipped).collect())
}

/// `S_i = {τ : max(τ) = i}`.
pub fn max_partition_gap(n: u8) -> Result<GapSpec> {
    if n == 0 || n > 3 {
        return Err(Error::ScaleLimit("max_partition_gap needs 1 ≤ n ≤ 3".into()));
    }
    let index = type_index(n)?;
    let mut sides = vec![BTreeSet::new(); n as usize];
    for (id, t) in index.types.iter().enumerate() {
        sides[t.max_letter() as usize].insert(id);
    }
    GapSpec::new(Layer::Record, n, sides)
}

/// A square boolean relation stored as bit rows; `le(i, j)` is `G_i ≤ G_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderMatrix {
    size: usize,
    rows: Vec<Vec<u64>>,
}

impl OrderMatrix {
    pub fn new(size: usize) -> Self {
        OrderMatrix { size, rows: vec![vec![0; size.div_ceil(64)]; size] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn le(&self, i: usize, j: usize) -> bool {
        self.rows[i][j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize) {
        self.rows[i][j / 64] |= 1 << (j % 64);
    }

    pub fn relations(&self) -> usize {
        self.rows.iter().flatten().map(|w| w.count_ones() as usize).sum()
    }

    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.rows[i]
    }

    pub fn from_rows(size: usize, rows: Vec<Vec<u64>>) -> Result<Self> {
        if rows.len() != size || rows.iter().any(|r| r.len() != size.div_ceil(64)) {
            return Err(Error::Validation("matrix shape".into()));
        }
        Ok(OrderMatrix { size, rows })
    }
}

/// The first-move `≤` relation among `candidates`, which must share one
/// alphabet and arity.
///
/// For each `G` and each realizable `ε`, the rule fixes `H` on the image of
/// `ε` and leaves it free elsewhere; the candidates `H` matching one of these
/// partial assignments are exactly those above `G`.
pub fn strong_order_matrix(candidates: &[GapSpec]) -> Result<OrderMatrix> {
    let Some(first) = candidates.first() else {
        return Ok(OrderMatrix::new(0));
    };
    let (m, arity) = (first.alphabet, first.arity());
    if candidates.iter().any(|g| g.layer != Layer::FirstMove || g.alphabet != m || g.arity() != arity) {
        return Err(Error::InvalidGap("candidates must be first-move gaps over one alphabet and arity".into()));
    }
    let maps = realizable_maps_with_witnesses(m, m)?;
    let symbols = m as usize * m as usize;
    let assignments: Vec<Vec<u8>> = candidates.iter().map(GapSpec::assignment).collect();
    let lookup: HashMap<&[u8], usize> = assignments.iter().enumerate().map(|(i, a)| (a.as_slice(), i)).collect();
    let mut observed: Vec<Vec<u8>> = vec![Vec::new(); symbols];
    for a in &assignments {
        for (t, &v) in a.iter().enumerate() {
            if !observed[t].contains(&v) {
                observed[t].push(v);
            }
        }
    }
    let images: Vec<Vec<usize>> =
        maps.iter().map(|(map, _)| (0..symbols).map(comb_symbol_map(map)).collect()).collect();
    const FREE: u8 = u8::MAX;
    let rows: Vec<Vec<u64>> = assignments
        .par_iter()
        .map(|ga| {
            let mut partials: HashSet<Vec<u8>> = HashSet::new();
            'maps: for image in &images {
                let mut p = vec![FREE; symbols];
                for (c, &t) in image.iter().enumerate() {
                    if p[t] != FREE && p[t] != ga[c] {
                        continue 'maps;
                    }
                    p[t] = ga[c];
                }
                partials.insert(p);
            }
            let mut row = vec![0u64; candidates.len().div_ceil(64)];
            for p in partials {
                complete(&p, 0, &mut p.clone(), &observed, &lookup, &mut row);
            }
            row
        })
        .collect();
    Ok(OrderMatrix { size: candidates.len(), rows })
}

fn complete(
    p: &[u8],
    at: usize,
    cur: &mut Vec<u8>,
    observed: &[Vec<u8>],
    lookup: &HashMap<&[u8], usize>,
    row: &mut [u64],
) {
    if at == p.len() {
        if let Some(&j) = lookup.get(cur.as_slice()) {
            row[j / 64] |= 1 << (j % 64);
        }
        return;
    }
    if p[at] != u8::MAX {
        if observed[at].contains(&p[at]) {
            complete(p, at + 1, cur, observed, lookup, row);
        }
        return;
    }
    for &v in &observed[at] {
        cur[at] = v;
        complete(p, at + 1, cur, observed, lookup, row);
    }
    cur[at] = u8::MAX;
}

/// Minimal elements of a preorder and their classes under mutual `≤`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinimalClasses {
    pub minimal: Vec<usize>,
    /// Sorted by first member; members ascending.
    pub classes: Vec<Vec<usize>>,
}

/// `G` is minimal when every `H ≤ G` also satisfies `G ≤ H`.
pub fn minimal_classes(matrix: &OrderMatrix) -> MinimalClasses {
    let n = matrix.size();
    let minimal: Vec<usize> =
        (0..n).filter(|&g| (0..n).all(|h| !matrix.le(h, g) || matrix.le(g, h))).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &g in &minimal {
        match classes.iter_mut().find(|c| matrix.le(c[0], g) && matrix.le(g, c[0])) {
            Some(class) => class.push(g),
            None => classes.push(vec![g]),
        }
    }
    MinimalClasses { minimal, classes }
}

fn union_find_groups(n: usize, mut joined: impl FnMut(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..n {
        for b in a + 1..n {
            if root(&mut parent, a) != root(&mut parent, b) && joined(a, b) {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for x in 0..n {
        groups.entry(root(&mut parent, x)).or_default().push(x);
    }
    groups.into_values().collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for at in 0..=p.len() {
            let mut q = p.clone();
            q.insert(at, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Minimal classes grouped up to coordinate permutations, under two
/// conventions. `letters_and_sides` relabels letters and side indices by the
/// same permutation, which keeps the pinned diagonal in place;
/// `sides_only` permutes sides and compares by the exact order.
/// Groups hold class indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermutationQuotient {
    pub letters_and_sides: Vec<Vec<usize>>,
    pub sides_only: Vec<Vec<usize>>,
}

pub fn permutation_quotient(candidates: &[GapSpec], classes: &MinimalClasses) -> Result<PermutationQuotient> {
    let Some(first) = candidates.first() else {
        return Ok(PermutationQuotient { letters_and_sides: Vec::new(), sides_only: Vec::new() });
    };
    let arity = first.arity();
    let perms = permutations(arity);
    let index: HashMap<&GapSpec, usize> = candidates.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let mut class_of: HashMap<usize, usize> = HashMap::new();
    for (k, class) in classes.classes.iter().enumerate() {
        for &g in class {
            class_of.insert(g, k);
        }
    }
    let mut letter_images: Vec<BTreeSet<usize>> = Vec::new();
    for class in &classes.classes {
        let rep = &candidates[class[0]];
        let mut hit = BTreeSet::new();
        for p in &perms {
            let p8: Vec<u8> = p.iter().map(|&x| x as u8).collect();
            let image = rep.permute_letters(&p8)?;
            if let Some(k) = index.get(&image).and_then(|i| class_of.get(i)) {
                hit.insert(*k);
            }
        }
        letter_images.push(hit);
    }
    let letters_and_sides = union_find_groups(classes.classes.len(), |a, b| letter_images[a].contains(&b));

    let reps: Vec<&GapSpec> = classes.classes.iter().map(|c| &candidates[c[0]]).collect();
    let budget = SearchBudget::default();
    let pairs: Vec<(usize, usize)> =
        (0..reps.len()).flat_map(|a| (a + 1..reps.len()).map(move |b| (a, b))).collect();
    let joined: Vec<bool> = pairs
        .par_iter()
        .map(|&(a, b)| -> Result<bool> {
            for p in &perms {
                let pa = reps[a].permute_sides(p)?;
                if order_le(&pa, reps[b], &budget)?.verdict == Verdict::LeWitnessed
                    && order_le(reps[b], &pa, &budget)?.verdict == Verdict::LeWitnessed
                {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect::<Result<Vec<_>>>()?;
    let table: HashSet<(usize, usize)> = pairs.into_iter().zip(joined).filter(|(_, j)| *j).map(|(p, _)| p).collect();
    let sides_only = union_find_groups(reps.len(), |a, b| table.contains(&(a, b)));
    Ok(PermutationQuotient { letters_and_sides, sides_only })
}

/// The full first-move pipeline at alphabet `n`.
#[derive(Clone, Debug, Serialize)]
pub struct StrongAnalysis {
    pub n: u8,
    pub candidates: Vec<GapSpec>,
    pub relations: usize,
    pub classes: MinimalClasses,
    pub quotient: PermutationQuotient,
}

pub fn strong_minimal_analysis(n: u8) -> Result<StrongAnalysis> {
    let candidates = enumerate_candidates_strong(n)?;
    let matrix = strong_order_matrix(&candidates)?;
    strong_analysis_from_matrix(n, candidates, &matrix)
}

pub fn strong_analysis_from_matrix(n: u8, candidates: Vec<GapSpec>, matrix: &OrderMatrix) -> Result<StrongAnalysis> {
    let classes = minimal_classes(matrix);
    let quotient = permutation_quotient(&candidates, &classes)?;
    Ok(StrongAnalysis { n, relations: matrix.relations(), candidates, classes, quotient })
}

/// Outcome of removing record candidates that use a type dominating all
/// dyadic types.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PruneReport {
    pub input: usize,
    pub retained: usize,
    /// The types whose presence removes a candidate.
    pub pruned_types: Vec<String>,
    /// Every top-comb type dominating all dyadic types.
    pub dominators: Vec<String>,
    /// Candidates left if every dominator were pruned.
    pub retained_if_all_dominators: usize,
    /// Removed candidates above gap 1 or gap 1*, by a found witness.
    pub reductions_witnessed: usize,
}

pub const PRUNED_TYPES: [&str; 2] = ["[u0 u1 l1]", "[u1 l0]"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PruneOutcome {
    pub retained: Vec<GapSpec>,
    /// Inputs equal to gap 1 or gap 1*, which every removed candidate reduces to.
    pub targets: Vec<GapSpec>,
    pub report: PruneReport,
}

/// Removes dyadic record candidates that place `[⁰¹₁]` or `[¹₀]` on a side.
/// Each removed candidate is checked to lie above gap 1 or gap 1* within
/// `budget`.
pub fn domination_prune(candidates: &[GapSpec], budget: &SearchBudget) -> Result<PruneOutcome> {
    let types = type_index(2)?;
    let pruned: BTreeSet<usize> =
        PRUNED_TYPES.iter().map(|t| type_id(&TypeDescriptor::parse(t, 2)?)).collect::<Result<_>>()?;
    let mut dominators = BTreeSet::new();
    for (id, t) in types.types.iter().enumerate() {
        if types.types.iter().map(|s| t.dominates(s)).collect::<Result<Vec<_>>>()?.iter().all(|&d| d) {
            dominators.insert(id);
        }
    }
    for g in candidates {
        if g.layer != Layer::Record || g.alphabet != 2 {
            return Err(Error::InvalidGap("domination_prune takes dyadic record gaps".into()));
        }
    }
    let uses = |g: &GapSpec, set: &BTreeSet<usize>| set.iter().any(|&c| g.side_of(c).is_some());
    let (kept, removed): (Vec<&GapSpec>, Vec<&GapSpec>) = candidates.iter().partition(|g| !uses(g, &pruned));
    let gap1 = record_row("1")?;
    let gap1s = record_row("1*")?;
    let reductions_witnessed = removed
        .par_iter()
        .map(|h| -> Result<bool> {
            if h.arity() != 2 {
                return Ok(false);
            }
            Ok(order_le(&gap1, h, budget)?.verdict == Verdict::LeWitnessed
                || order_le(&gap1s, h, budget)?.verdict == Verdict::LeWitnessed)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&b| b)
        .count();
    let targets = removed.iter().filter(|g| ***g == gap1 || ***g == gap1s).map(|g| (*g).clone()).collect();
    let report = PruneReport {
        input: candidates.len(),
        retained: kept.len(),
        pruned_types: PRUNED_TYPES.iter().map(|t| t.to_string()).collect(),
        dominators: dominators.iter().map(|&c| types.types[c].to_string()).collect(),
        retained_if_all_dominators: candidates.iter().filter(|g| !uses(g, &dominators)).count(),
        reductions_witnessed,
    };
    Ok(PruneOutcome { retained: kept.into_iter().cloned().collect(), targets, report })
}

const DYADIC_OTHERS: [&str; 7] = ["[l1]", "[l0 l1]", "[u0 l1]", "[u1 l0]", "[l0 u1 l1]", "[u0 u1 l1]", "[u1 l0 l1]"];
const GAP5: [&str; 3] = ["[l1]", "[l0 l1]", "[u1 l0 l1]"];

/// Representatives of the six classes of minimal strong 2-gaps.
pub fn strong_2gap_table() -> Vec<(&'static str, GapSpec)> {
    let k = CombKind::new;
    let rows: [(&str, Vec<CombKind>, Vec<CombKind>); 6] = [
        ("1", vec![k(0, 0), k(0, 1)], vec![k(1, 1), k(1, 0)]),
        ("2", vec![k(0, 0)], vec![k(1, 1)]),
        ("3", vec![k(0, 0)], vec![k(1, 1), k(0, 1), k(1, 0)]),
        ("3*", vec![k(0, 0), k(0, 1), k(1, 0)], vec![k(1, 1)]),
        ("4", vec![k(0, 0)], vec![k(1, 1), k(1, 0)]),
        ("4*", vec![k(0, 0), k(0, 1)], vec![k(1, 1)]),
    ];
    rows.into_iter().map(|(name, a, b)| (name, GapSpec::first_move(2, &[&a, &b]).expect("valid rows"))).collect()
}

/// Representatives of the nine classes of minimal record 2-gaps.
pub fn record_2gap_table() -> Vec<(&'static str, GapSpec)> {
    let zero: &[&str] = &["[l0]"];
    let one: &[&str] = &["[l1]"];
    let three: &[&str] = &["[l1]", "[l0 l1]"];
    let four: &[&str] = &["[l0]", "[l0 l1]"];
    let rows: [(&str, &[&str], &[&str]); 9] = [
        ("1", zero, &DYADIC_OTHERS),
        ("1*", &DYADIC_OTHERS, zero),
        ("2", zero, one),
        ("2*", one, zero),
        ("3", zero, three),
        ("3*", three, zero),
        ("4", four, one),
        ("5", zero, &GAP5),
        ("5*", &GAP5, zero),
    ];
    rows.into_iter().map(|(name, a, b)| (name, GapSpec::record(2, &[a, b]).expect("valid rows"))).collect()
}

fn record_row(name: &str) -> Result<GapSpec> {
    record_2gap_table()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, g)| g)
        .ok_or_else(|| Error::InvalidGap(name.into()))
}

/// A witnessed `row_a ≤ row_b` between two listed, pairwise inequivalent
/// minimal gaps contradicts the listing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRelation {
    pub below: String,
    pub above: String,
    pub witness: OrderWitness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecordTableAudit {
    pub budget: SearchBudget,
    pub pairs_checked: usize,
    pub witnessed: Vec<TableRelation>,
    pub unknown: usize,
}

/// Searches witnesses between every ordered pair of distinct rows of the
/// record table. Unfound relations stay unknown.
pub fn record_table_audit(budget: &SearchBudget) -> Result<RecordTableAudit> {
    let rows = record_2gap_table();
    let mut witnessed = Vec::new();
    let mut unknown = 0;
    let mut pairs_checked = 0;
    for (a, ga) in &rows {
        for (b, gb) in &rows {
            if a == b {
                continue;
            }
            pairs_checked += 1;
            let r = order_le(ga, gb, budget)?;
            match r.witness {
                Some(w) => witnessed.push(TableRelation { below: a.to_string(), above: b.to_string(), witness: w }),
                None => unknown += 1,
            }
        }
    }
    Ok(RecordTableAudit { budget: *budget, pairs_checked, witnessed, unknown })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let g = GapSpec::first_move(2, &[&[CombKind::new(0, 0), CombKind::new(0, 1)], &[CombKind::chain(1)]]).unwrap();
        assert_eq!(g.to_json(), r#"{"layer":"first_move","n":2,"m":2,"sides":[["0>0","0>1"],["1>1"]]}"#);
        assert_eq!(GapSpec::from_json(&g.to_json()).unwrap(), g);
        let r = record_row("5").unwrap();
        assert_eq!(GapSpec::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn invariants() {
        let k = CombKind::new;
        assert!(GapSpec::first_move(2, &[&[k(0, 0)], &[]]).is_err());
        assert!(GapSpec::first_move(2, &[&[k(0, 0)], &[k(0, 0)]]).is_err());
        assert!(GapSpec::first_move(2, &[&[k(0, 2)], &[k(1, 1)]]).is_err());
        assert!(GapSpec::record(2, &[&["[l0]"], &["[l2]"]]).is_err());
        assert!(GapSpec::critical_strong(3).unwrap().is_candidate());
        assert!(GapSpec::critical_record(3).unwrap().is_candidate());
        assert!(!GapSpec::critical_record(2).unwrap().permute_sides(&[1, 0]).unwrap().is_candidate());
    }

    #[test]
    fn membership_rule_both_ways() {
        let g = GapSpec::critical_strong(2).unwrap();
        let h = strong_2gap_table()[4].1.clone();
        // identity sends (1,0) into H_1 although it lies on no side of G.
        assert!(!membership_rule(&g, &h, |c| c));
        assert!(membership_rule(&g, &g, |c| c));
    }

    #[test]
    fn letter_permutation_keeps_pinning() {
        for g in enumerate_candidates_strong(3).unwrap().iter().step_by(97) {
            let p = g.permute_letters(&[2, 0, 1]).unwrap();
            assert!(p.is_candidate());
            assert_eq!(p.permute_letters(&[1, 2, 0]).unwrap(), *g);
        }
    }

    #[test]
    fn starred_rows_are_letter_permutations() {
        let t: BTreeMap<&str, GapSpec> = strong_2gap_table().into_iter().collect();
        assert_eq!(t["3"].permute_letters(&[1, 0]).unwrap(), t["3*"]);
        assert_eq!(t["4"].permute_letters(&[1, 0]).unwrap(), t["4*"]);
        assert_eq!(t["1"].permute_letters(&[1, 0]).unwrap(), t["1"]);
    }

    #[test]
    fn matrix_agrees_with_pairwise_order() {
        let cands = enumerate_candidates_strong(2).unwrap();
        let m = strong_order_matrix(&cands).unwrap();
        let budget = SearchBudget::default();
        for (i, g) in cands.iter().enumerate() {
            for (j, h) in cands.iter().enumerate() {
                let r = order_le(g, h, &budget).unwrap();
                assert_eq!(m.le(i, j), r.verdict == Verdict::LeWitnessed, "{g} vs {h}");
                revalidate_order(g, h, &r).unwrap();
            }
        }
    }

    #[test]
    fn minimal_classes_trivial_inputs() {
        let mut one = OrderMatrix::new(1);
        one.set(0, 0);
        assert_eq!(minimal_classes(&one).classes, vec![vec![0]]);
        let mut chain = OrderMatrix::new(3);
        for (a, b) in [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2), (1, 0)] {
            chain.set(a, b);
        }
        assert_eq!(minimal_classes(&chain).classes, vec![vec![0, 1]]);
    }

    #[test]
    fn max_partition_small() {
        let g = max_partition_gap(1).unwrap();
        assert_eq!(g.arity(), 1);
        assert_eq!(max_partition_gap(2).unwrap(), record_row("1").unwrap());
        let g3 = max_partition_gap(3).unwrap();
        assert_eq!(g3.sides().iter().map(BTreeSet::len).sum::<usize>(), 61);
    }

    #[test]
    fn record_candidates_include_table_pinned_rows() {
        let cands: HashSet<GapSpec> = enumerate_candidates_record(2).unwrap().into_iter().collect();
        assert_eq!(cands.len(), 1458);
        for name in ["2", "2*", "3", "4", "5*"] {
            assert!(cands.contains(&record_row(name).unwrap()), "{name}");
        }
    }

    #[test]
    fn prune_keeps_gap1_and_handles_empty() {
        let budget = SearchBudget::default();
        let out = domination_prune(&[], &budget).unwrap();
        assert!(out.retained.is_empty() && out.targets.is_empty());
        assert_eq!(out.report.input, 0);
        let g1 = record_row("1").unwrap();
        let out = domination_prune(std::slice::from_ref(&g1), &budget).unwrap();
        assert_eq!(out.targets, vec![g1]);
        assert_eq!(out.report.reductions_witnessed, 1);
    }
}
