//! Seeded randomized checks of the equivalence deciders and of `ψ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::embeddings::{Embedding, Substitution};
use crate::error::Result;
use crate::node::Node;
use crate::nodeset::{first_move_equivalent, record_equivalent, replay_equivalence, ClosureKind, NodeSet};

/// `size` distinct random nodes of length `≤ depth` over `n` letters.
pub fn random_nodeset(rng: &mut impl Rng, n: u8, size: usize, depth: usize) -> NodeSet {
    let mut nodes = std::collections::BTreeSet::new();
    while nodes.len() < size {
        let len = rng.gen_range(0..=depth);
        nodes.insert((0..len).map(|_| rng.gen_range(0..n)).collect::<Vec<u8>>());
    }
    NodeSet::new(n, nodes.into_iter().map(|l| Node::new(n, l).expect("letters in range"))).expect("one alphabet")
}

/// Blocks `w_i = i⌢p_i` of one common length, with pad letters `≤ i`. Such a
/// substitution keeps first moves, `≺` and every running maximum, so it
/// preserves both `≈` and `∼`.
pub fn random_padded_substitution(rng: &mut impl Rng, n: u8, max_len: usize) -> Substitution {
    let len = rng.gen_range(1..=max_len);
    let blocks = (0..n)
        .map(|i| {
            let mut letters = vec![i];
            letters.extend((1..len).map(|_| rng.gen_range(0..=i)));
            Node::new(n, letters).expect("letters in range")
        })
        .collect();
    Substitution::new(n, Node::root(n), blocks).expect("blocks of equal length with distinct heads")
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub samples: usize,
    pub reflexive_failures: usize,
    pub symmetric_failures: usize,
    pub transitive_failures: usize,
    pub replay_failures: usize,
    pub closure_idempotence_failures: usize,
    /// Pairs `A, f(A)` that the deciders did not relate.
    pub transfer_failures: usize,
}

impl EquivalenceReport {
    pub fn is_clean(&self) -> bool {
        self.reflexive_failures
            + self.symmetric_failures
            + self.transitive_failures
            + self.replay_failures
            + self.closure_idempotence_failures
            + self.transfer_failures
            == 0
    }
}

/// For each sample `A`, with `B = f(A)`, `C = g(B)` and an unrelated `D`:
/// both deciders must be reflexive, symmetric and transitive on these, every
/// returned bijection must replay, and closures must be idempotent.
pub fn equivalence_laws(samples: usize, seed: u64) -> EquivalenceReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = EquivalenceReport { samples, ..Default::default() };
    for _ in 0..samples {
        let n = rng.gen_range(2..=3);
        let size = rng.gen_range(1..=6);
        let a = random_nodeset(&mut rng, n, size, 4);
        let f: Embedding = random_padded_substitution(&mut rng, n, 3).into();
        let g: Embedding = random_padded_substitution(&mut rng, n, 3).into();
        let b = f.apply_set(&a).expect("substitutions are total");
        let c = g.apply_set(&b).expect("substitutions are total");
        let d = random_nodeset(&mut rng, n, size, 4);
        for kind in [ClosureKind::Meet, ClosureKind::Record] {
            let eq = |x: &NodeSet, y: &NodeSet| match kind {
                ClosureKind::Meet => first_move_equivalent(x, y),
                ClosureKind::Record => record_equivalent(x, y),
            };
            let sets = [&a, &b, &c, &d];
            for x in sets {
                if eq(x, x).is_none() {
                    r.reflexive_failures += 1;
                }
                let closed = NodeSet::new(n, x.closure_nodes(kind).iter().cloned()).expect("one alphabet");
                if closed.closure_nodes(kind) != closed.to_vec().as_slice() {
                    r.closure_idempotence_failures += 1;
                }
                for y in sets {
                    let xy = eq(x, y);
                    if xy.is_some() != eq(y, x).is_some() {
                        r.symmetric_failures += 1;
                    }
                    if let Some(w) = &xy {
                        if !replay_equivalence(x, y, kind, w) {
                            r.replay_failures += 1;
                        }
                        for z in sets {
                            if eq(y, z).is_some() && eq(x, z).is_none() {
                                r.transitive_failures += 1;
                            }
                        }
                    }
                }
            }
            if eq(&a, &b).is_none() || eq(&b, &c).is_none() {
                r.transfer_failures += 1;
            }
        }
    }
    r
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PsiTransferReport {
    pub pairs: usize,
    /// Generated pairs that are not `≈`-equivalent (generator fault).
    pub not_equivalent: usize,
    /// Pairs with `ψ(A) ≁ ψ(B)`.
    pub failures: usize,
}

/// `A ≈ B` implies `ψ(A) ∼ ψ(B)`, on `pairs` seeded pairs `B = f(A)`.
pub fn psi_transfer(pairs: usize, seed: u64) -> Result<PsiTransferReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = PsiTransferReport { pairs, ..Default::default() };
    for _ in 0..pairs {
        let n = rng.gen_range(2..=3);
        let size = rng.gen_range(2..=6);
        let a = random_nodeset(&mut rng, n, size, 4);
        let f: Embedding = random_padded_substitution(&mut rng, n, 3).into();
        let b = f.apply_set(&a)?;
        if first_move_equivalent(&a, &b).is_none() {
            r.not_equivalent += 1;
            continue;
        }
        let psi: Embedding = Substitution::psi(n).into();
        if record_equivalent(&psi.apply_set(&a)?, &psi.apply_set(&b)?).is_none() {
            r.failures += 1;
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laws_hold_on_a_small_sample() {
        let r = equivalence_laws(40, 7);
        assert!(r.is_clean(), "{r:?}");
    }

    #[test]
    fn psi_transfer_small_sample() {
        let r = psi_transfer(40, 7).unwrap();
        assert_eq!((r.not_equivalent, r.failures), (0, 0));
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = random_nodeset(&mut ChaCha8Rng::seed_from_u64(3), 3, 5, 4);
        let b = random_nodeset(&mut ChaCha8Rng::seed_from_u64(3), 3, 5, 4);
        assert_eq!(a, b);
    }
}
