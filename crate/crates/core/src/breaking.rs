//! `B`-breaking of record gaps.
//!
//! A witness is an embedding `φ: m'^{<ω} → m^{<ω}` whose range `M` restricts
//! the gap. A set of type `τ` meets a set of another type in at most three
//! points, so `M ⊥ Γ_{S_i}` exactly when no type of `φ̄`'s range lies in
//! `S_i`, and a nonempty `S_i ∩ range` keeps `{Γ_i|_M : i ∈ B}` a gap.
//! Search is bounded and a miss is never read as a proof.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::embeddings::{action_pool, type_action, Embedding, SearchBudget, Substitution};
use crate::error::{Error, Result};
use crate::gaps::{type_id, type_of_id, GapSpec, Layer};
use crate::types::{enumerate_types, TypeDescriptor};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BreakQuery {
    pub gap: GapSpec,
    pub set: BTreeSet<usize>,
    pub budget: SearchBudget,
}

impl BreakQuery {
    pub fn new(gap: GapSpec, set: BTreeSet<usize>, budget: SearchBudget) -> Result<Self> {
        if gap.layer() != Layer::Record {
            return Err(Error::LayerMismatch);
        }
        if set.is_empty() || set.iter().any(|&i| i >= gap.arity()) {
            return Err(Error::InvalidGap(format!("B = {set:?} must be a nonempty subset of {}", gap.arity())));
        }
        Ok(BreakQuery { gap, set, budget })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BreakVerdict {
    #[serde(rename = "BROKEN_witnessed")]
    BrokenWitnessed,
    #[serde(rename = "NOT_BROKEN_bounded")]
    NotBrokenBounded,
}

impl fmt::Display for BreakVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BreakVerdict::BrokenWitnessed => "BROKEN_witnessed",
            BreakVerdict::NotBrokenBounded => "NOT_BROKEN_bounded",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BreakWitness {
    pub embedding: Embedding,
    pub action: BTreeMap<TypeDescriptor, TypeDescriptor>,
    pub range: BTreeSet<TypeDescriptor>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BreakReport {
    pub set: BTreeSet<usize>,
    pub verdict: BreakVerdict,
    pub witness: Option<BreakWitness>,
    /// Distinct actions examined.
    pub searched: usize,
    pub budget: SearchBudget,
}

/// The range rule: the range meets `S_i` for `i ∈ B` and avoids it otherwise.
pub fn range_breaks(gap: &GapSpec, set: &BTreeSet<usize>, range: &BTreeSet<TypeDescriptor>) -> Result<bool> {
    let mut hit = BTreeSet::new();
    for t in range {
        if let Some(i) = gap.side_of(type_id(t)?) {
            hit.insert(i);
        }
    }
    Ok(hit == *set)
}

/// Searches domain alphabets `1..=m` in order, each pool in generator order.
pub fn break_check(q: &BreakQuery) -> Result<BreakReport> {
    let m = q.gap.alphabet();
    let mut searched = 0;
    for domain in 1..=m {
        let pool = action_pool(domain, m, &q.budget)?;
        for entry in pool.distinct() {
            searched += 1;
            let range: BTreeSet<TypeDescriptor> = entry.action.values().cloned().collect();
            if range_breaks(&q.gap, &q.set, &range)? {
                return Ok(BreakReport {
                    set: q.set.clone(),
                    verdict: BreakVerdict::BrokenWitnessed,
                    witness: Some(BreakWitness { embedding: entry.embedding.clone(), action: entry.action.clone(), range }),
                    searched,
                    budget: q.budget,
                });
            }
        }
    }
    Ok(BreakReport { set: q.set.clone(), verdict: BreakVerdict::NotBrokenBounded, witness: None, searched, budget: q.budget })
}

/// Re-validates the witness embedding, recomputes its action and re-checks
/// the range rule.
pub fn revalidate_break(q: &BreakQuery, report: &BreakReport) -> Result<()> {
    let Some(w) = &report.witness else {
        return match report.verdict {
            BreakVerdict::BrokenWitnessed => Err(Error::Validation("BROKEN verdict without witness".into())),
            BreakVerdict::NotBrokenBounded => Ok(()),
        };
    };
    w.embedding.validate(q.budget.validate_depth)?;
    let fresh = type_action(&w.embedding, q.budget.probe_blocks)?
        .total()
        .ok_or_else(|| Error::Unstable("partial action".into()))?;
    if fresh != w.action {
        return Err(Error::Validation("recomputed action differs".into()));
    }
    let range: BTreeSet<TypeDescriptor> = fresh.into_values().collect();
    if range != w.range || !range_breaks(&q.gap, &q.set, &range)? {
        return Err(Error::Validation("range rule fails".into()));
    }
    Ok(())
}

fn nonempty_subsets(n: usize) -> Vec<BTreeSet<usize>> {
    let mut out: Vec<BTreeSet<usize>> =
        (1u32..1 << n).map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect()).collect();
    out.sort_by_key(|s| (s.len(), s.iter().copied().collect::<Vec<_>>()));
    out
}

/// Per-`B` verdicts for every nonempty `B`, with `A` the full side set and
/// `M` ranging over embedding ranges only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JigsawAudit {
    pub gap: GapSpec,
    pub scope: &'static str,
    pub rows: Vec<BreakReport>,
}

impl JigsawAudit {
    pub fn all_broken(&self) -> bool {
        self.rows.iter().all(|r| r.verdict == BreakVerdict::BrokenWitnessed)
    }

    pub fn broken_sets(&self) -> Vec<&BTreeSet<usize>> {
        self.rows.iter().filter(|r| r.verdict == BreakVerdict::BrokenWitnessed).map(|r| &r.set).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("set,verdict,witness\n");
        for r in &self.rows {
            let set: Vec<String> = r.set.iter().map(|i| i.to_string()).collect();
            let witness = r.witness.as_ref().map_or(String::new(), |w| w.embedding.describe());
            out.push_str(&format!("\"{}\",{},\"{}\"\n", set.join(","), r.verdict, witness.replace('"', "'")));
        }
        out
    }
}

pub const JIGSAW_SCOPE: &str = "A = all sides; M ranges over embedding ranges in budget";

pub fn jigsaw_audit(gap: &GapSpec, budget: &SearchBudget) -> Result<JigsawAudit> {
    let queries = nonempty_subsets(gap.arity())
        .into_iter()
        .map(|set| BreakQuery::new(gap.clone(), set, *budget))
        .collect::<Result<Vec<_>>>()?;
    let rows = queries.par_iter().map(break_check).collect::<Result<Vec<_>>>()?;
    Ok(JigsawAudit { gap: gap.clone(), scope: JIGSAW_SCOPE, rows })
}

/// `Δ = ({[0]}, {[1]}, {[01]})` in the dyadic tree.
pub fn delta_gap() -> GapSpec {
    GapSpec::record(2, &[&["[l0]"], &["[l1]"], &["[l0 l1]"]]).expect("valid gap")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PreservationReport {
    pub checked: usize,
    /// Embeddings with `φ̄[0] = [0]` and `φ̄[1] = [1]`.
    pub premise: usize,
    pub violations: Vec<String>,
    pub identity_consistent: bool,
    pub psi_premise: bool,
    pub psi_conclusion: bool,
}

/// `φ̄[0] = [0]` and `φ̄[1] = [1]` force `φ̄[01] = [01]`, over the `2 → 2` pool.
pub fn preservation_lemma_check(budget: &SearchBudget) -> Result<PreservationReport> {
    let t = |s: &str| TypeDescriptor::parse(s, 2);
    let (zero, one, both) = (t("[l0]")?, t("[l1]")?, t("[l0 l1]")?);
    let holds = |a: &BTreeMap<TypeDescriptor, TypeDescriptor>| (a[&zero] == zero && a[&one] == one, a[&both] == both);
    let pool = action_pool(2, 2, budget)?;
    let mut premise = 0;
    let mut violations = Vec::new();
    for e in &pool.entries {
        let (p, c) = holds(&e.action);
        if p {
            premise += 1;
            if !c {
                violations.push(e.embedding.describe());
            }
        }
    }
    let action_of = |phi: &Embedding| -> Result<BTreeMap<TypeDescriptor, TypeDescriptor>> {
        type_action(phi, budget.probe_blocks)?.total().ok_or_else(|| Error::Unstable("partial action".into()))
    };
    let (ip, ic) = holds(&action_of(&Substitution::identity(2).into())?);
    let (pp, pc) = holds(&action_of(&Substitution::psi(2).into())?);
    Ok(PreservationReport {
        checked: pool.entries.len(),
        premise,
        violations,
        identity_consistent: !ip || ic,
        psi_premise: pp,
        psi_conclusion: pc,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OptimalityReport {
    pub checked: usize,
    /// Embeddings whose range contains the types on sides 0 and 1.
    pub premise: usize,
    pub counterexamples: Vec<String>,
}

/// The 8-gap with `S_i = {τ_i}` over the dyadic types: no embedding in the
/// budget has a range containing `τ_0, τ_1` but missing another type, so the
/// gap is `C`-broken for no `{0,1} ⊆ C ⊊ 8` within the budget.
pub fn jbreak_optimality_check(budget: &SearchBudget) -> Result<OptimalityReport> {
    let types = enumerate_types(2)?;
    let pool = action_pool(2, 2, budget)?;
    let mut premise = 0;
    let mut counterexamples = Vec::new();
    for e in &pool.entries {
        let range: BTreeSet<&TypeDescriptor> = e.action.values().collect();
        if range.contains(&types[0]) && range.contains(&types[1]) {
            premise += 1;
            if range.len() != types.len() {
                counterexamples.push(e.embedding.describe());
            }
        }
    }
    Ok(OptimalityReport { checked: pool.entries.len(), premise, counterexamples })
}

/// The singleton-side 8-gap of the optimality check.
pub fn all_types_gap(m: u8) -> Result<GapSpec> {
    let n = enumerate_types(m)?.len();
    GapSpec::new(Layer::Record, m, (0..n).map(|i| BTreeSet::from([i])).collect())
}

/// Random record `n`-gap over `n` letters with `[i] ∈ S_i` and every other
/// type on a uniformly chosen side or on none.
pub fn random_record_candidate(n: u8, rng: &mut impl Rng) -> Result<GapSpec> {
    let types = enumerate_types(n)?;
    let mut sides = vec![BTreeSet::new(); n as usize];
    for (id, t) in types.iter().enumerate() {
        if t.is_chain_type() && t.tau0().len() == 1 {
            sides[t.tau0()[0] as usize].insert(id);
        } else {
            let v = rng.gen_range(0..=n as usize);
            if v < n as usize {
                sides[v].insert(id);
            }
        }
    }
    GapSpec::new(Layer::Record, n, sides)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoBreakReport {
    pub seed: u64,
    pub gaps: usize,
    /// Gaps with no broken two-element `B` in budget.
    pub failures: Vec<GapSpec>,
    /// Number of broken two-element `B`, per gap.
    pub pair_counts: Vec<usize>,
}

/// Every record 2-gap candidate and `samples` random 3-gap candidates:
/// some two-element `B` is broken.
pub fn two_break_instance(samples: usize, seed: u64, budget: &SearchBudget) -> Result<TwoBreakReport> {
    let mut gaps = crate::gaps::enumerate_candidates_record(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let mut g = random_record_candidate(3, &mut rng)?;
        let mut perm: Vec<usize> = (0..3).collect();
        perm.shuffle(&mut rng);
        g = g.permute_sides(&perm)?;
        gaps.push(g);
    }
    let counts = gaps
        .par_iter()
        .map(|g| -> Result<usize> {
            let mut broken = 0;
            for a in 0..g.arity() {
                for b in a + 1..g.arity() {
                    let q = BreakQuery::new(g.clone(), BTreeSet::from([a, b]), *budget)?;
                    if break_check(&q)?.verdict == BreakVerdict::BrokenWitnessed {
                        broken += 1;
                    }
                }
            }
            Ok(broken)
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = gaps.iter().zip(&counts).filter(|(_, &c)| c == 0).map(|(g, _)| g.clone()).collect();
    Ok(TwoBreakReport { seed, gaps: gaps.len(), failures, pair_counts: counts })
}

/// Type names of a side, for listings.
pub fn side_names(gap: &GapSpec, side: usize) -> Vec<String> {
    gap.sides()[side]
        .iter()
        .map(|&c| type_of_id(gap.alphabet(), c).map_or_else(|_| format!("#{c}"), |t| t.pretty()))
        .collect()
}
