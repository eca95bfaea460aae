//! Desk-scale key-recovery searches against the sandwich protocols: a
//! brute-force decomposition solver usable as a ground-truth oracle, a
//! double-coset membership search, and the centralizer-based equivalent-key
//! attacks. Every attack verifies its own result end to end (a forged
//! response must be accepted, or the recovered shared key must match); no
//! success is ever reported on the strength of the search alone.

use crate::algebra::{
    equal, invert, multiply, subsemigroup_closure, AlgebraError, Platform, PlatformElement,
    SubsetSpec,
};
use crate::conditions::SelectionOutcome;
use crate::protocols::{
    hash_element, sample_role_secrets, verify, ProtocolError, ProtocolParams, Role, SecretPair,
    Verdict, VerifierState,
};
use rand::Rng;
use std::fmt;

pub const DEFAULT_SEARCH_CAP: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AttackError {
    #[error("search space of {0} pairs exceeds the configured cap")]
    SearchSpaceTooLarge(u64),
    #[error("no equivalent pair found within bounds after {0} tests")]
    NotFound(u64),
    #[error("attack needs an enumerable platform")]
    InfinitePlatform,
    #[error("candidate pair failed end-to-end verification")]
    VerificationFailed,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttackTarget {
    AKey,
    BKey,
    SharedKey,
}

impl fmt::Display for AttackTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackTarget::AKey => write!(f, "A-key"),
            AttackTarget::BKey => write!(f, "B-key"),
            AttackTarget::SharedKey => write!(f, "shared-key"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifiedBy {
    ImpersonationAccept,
    SharedKeyMatch,
}

impl fmt::Display for VerifiedBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifiedBy::ImpersonationAccept => write!(f, "impersonation-accept"),
            VerifiedBy::SharedKeyMatch => write!(f, "shared-key-match"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AttackResult {
    pub target: AttackTarget,
    pub equivalent_pair: (PlatformElement, PlatformElement),
    pub verified_by: VerifiedBy,
    pub search_cost: u64,
}

impl fmt::Display for AttackResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "target: {}", self.target)?;
        writeln!(
            f,
            "equivalent pair: {} ; {}",
            self.equivalent_pair.0, self.equivalent_pair.1
        )?;
        writeln!(
            f,
            "pair serialization: {} ; {}",
            hex::encode(self.equivalent_pair.0.canonical_bytes()),
            hex::encode(self.equivalent_pair.1.canonical_bytes())
        )?;
        writeln!(f, "search cost: {} pairs tested", self.search_cost)?;
        write!(f, "verified by: {}", self.verified_by)
    }
}

/// A bounded instance of the decomposition problem: find f, g with
/// f * x * g = y, where f is a positive product of at most `max_len`
/// generators of `left_subset` and g likewise over `right_subset`.
#[derive(Clone, Debug)]
pub struct DecompositionInstance {
    pub platform: Platform,
    pub x: PlatformElement,
    pub y: PlatformElement,
    pub left_subset: SubsetSpec,
    pub right_subset: SubsetSpec,
    pub max_len: u16,
    pub search_cap: u64,
}

impl DecompositionInstance {
    pub fn new(
        x: PlatformElement,
        y: PlatformElement,
        left_subset: SubsetSpec,
        right_subset: SubsetSpec,
        max_len: u16,
    ) -> Result<DecompositionInstance, AttackError> {
        let platform = x.platform();
        if y.platform() != platform
            || left_subset.platform() != platform
            || right_subset.platform() != platform
        {
            return Err(AttackError::Algebra(AlgebraError::PlatformMismatch));
        }
        Ok(DecompositionInstance {
            platform,
            x,
            y,
            left_subset,
            right_subset,
            max_len,
            search_cap: DEFAULT_SEARCH_CAP,
        })
    }

    pub fn with_cap(mut self, search_cap: u64) -> DecompositionInstance {
        self.search_cap = search_cap;
        self
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub left: PlatformElement,
    pub right: PlatformElement,
    pub cost: u64,
}

fn word_count(generators: u64, max_len: u16) -> u64 {
    let mut total = 0u64;
    let mut layer = 1u64;
    for _ in 0..=max_len {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(generators);
    }
    total
}

/// All positive products of at most `max_len` generators, in
/// length-then-lexicographic order of the underlying index words. The empty
/// product (identity) comes first; duplicates are kept so the order is a
/// pure function of the word, not of platform-specific equality.
fn bounded_words(subset: &SubsetSpec, max_len: u16) -> Result<Vec<PlatformElement>, AttackError> {
    let gens = subset.generators();
    let mut out = vec![subset.platform().identity()];
    for len in 1..=max_len {
        let mut idx = vec![0usize; len as usize];
        loop {
            let mut acc = gens[idx[0]].clone();
            for &i in &idx[1..] {
                acc = multiply(&acc, &gens[i])?;
            }
            out.push(acc);
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < gens.len() {
                    break;
                }
                idx[pos] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    Ok(out)
}

/// Exhaustive decomposition search. Returns the first solution in
/// enumeration order, or None once the whole bounded space is exhausted.
pub fn brute_force_dp(
    inst: &DecompositionInstance,
) -> Result<Option<SearchOutcome>, AttackError> {
    let left_count = word_count(inst.left_subset.generators().len() as u64, inst.max_len);
    let right_count = word_count(inst.right_subset.generators().len() as u64, inst.max_len);
    let product = left_count.saturating_mul(right_count);
    if product > inst.search_cap {
        return Err(AttackError::SearchSpaceTooLarge(product));
    }
    let left = bounded_words(&inst.left_subset, inst.max_len)?;
    let right = bounded_words(&inst.right_subset, inst.max_len)?;
    let mut cost = 0u64;
    for f in &left {
        let fx = multiply(f, &inst.x)?;
        for g in &right {
            cost += 1;
            if equal(&multiply(&fx, g)?, &inst.y)? {
                return Ok(Some(SearchOutcome {
                    left: f.clone(),
                    right: g.clone(),
                    cost,
                }));
            }
        }
    }
    Ok(None)
}

/// Membership search for the double coset H1 * w * H2: find x in H1, y in
/// H2 (as bounded positive products) with x * w * y = w'.
pub fn double_coset_search(
    w: &PlatformElement,
    w_prime: &PlatformElement,
    h1: &SubsetSpec,
    h2: &SubsetSpec,
    max_len: u16,
    search_cap: u64,
) -> Result<Option<SearchOutcome>, AttackError> {
    let inst = DecompositionInstance::new(
        w.clone(),
        w_prime.clone(),
        h1.clone(),
        h2.clone(),
        max_len,
    )?
    .with_cap(search_cap);
    brute_force_dp(&inst)
}

/// Every platform element commuting with all generators of `subset`, in
/// platform enumeration order.
fn subset_centralizer(
    platform: Platform,
    subset: &SubsetSpec,
) -> Result<Vec<PlatformElement>, AttackError> {
    if !platform.is_finite() {
        return Err(AttackError::InfinitePlatform);
    }
    let mut out = Vec::new();
    'candidates: for e in platform.enumerate_elements()? {
        for g in subset.generators() {
            if !equal(&multiply(&e, g)?, &multiply(g, &e)?)? {
                continue 'candidates;
            }
        }
        out.push(e);
    }
    Ok(out)
}

fn pair_search(
    left_pool: &[PlatformElement],
    right_pool: &[PlatformElement],
    middle: &PlatformElement,
    target: &PlatformElement,
    search_cap: u64,
) -> Result<SearchOutcome, AttackError> {
    let product = (left_pool.len() as u64).saturating_mul(right_pool.len() as u64);
    if product > search_cap {
        return Err(AttackError::SearchSpaceTooLarge(product));
    }
    let mut cost = 0u64;
    for f in left_pool {
        let fm = multiply(f, middle)?;
        for g in right_pool {
            cost += 1;
            if equal(&multiply(&fm, g)?, target)? {
                return Ok(SearchOutcome {
                    left: f.clone(),
                    right: g.clone(),
                    cost,
                });
            }
        }
    }
    Err(AttackError::NotFound(cost))
}

/// Recovers a pair equivalent to A's secrets from the published z'. The
/// left pool is the centralizer of L_B; the right pool is the centralizer
/// of R_B, except under the split-anchor selection method where A's a2 is
/// drawn from the published R_A and the pool is its generated subsemigroup.
/// The result is certified by forging a response to a fresh challenge,
/// issued by an honest verifier (anchor-aware when the params came from a
/// selection method, hence the `selection` argument).
pub fn attack_a_key<R: Rng>(
    params: &ProtocolParams,
    selection: Option<&SelectionOutcome>,
    public_key: &PlatformElement,
    rng: &mut R,
) -> Result<AttackResult, AttackError> {
    let left_pool = subset_centralizer(params.platform, &params.l_b)?;
    let right_pool = match params.selection_method {
        crate::conditions::SelectionMethod::Third => subsemigroup_closure(&params.r_a)?,
        _ => subset_centralizer(params.platform, &params.r_b)?,
    };
    let found = pair_search(&left_pool, &right_pool, &params.z, public_key, DEFAULT_SEARCH_CAP)?;

    let forged = SecretPair::from_elements(params, found.left.clone(), found.right.clone())?;
    let verifier = sample_role_secrets(params, selection, Role::B, rng)?;
    let x = verifier.sandwich(&params.z)?;
    let state = VerifierState::new(verifier);
    let w = hash_element(params, &forged.sandwich(&x)?);
    if verify(params, &state, public_key, &w)? != Verdict::Accept {
        return Err(AttackError::VerificationFailed);
    }
    Ok(AttackResult {
        target: AttackTarget::AKey,
        equivalent_pair: (found.left, found.right),
        verified_by: VerifiedBy::ImpersonationAccept,
        search_cost: found.cost,
    })
}

/// Recovers a pair equivalent to B's secrets from the published K_B (or a
/// challenge x), searching the double coset of the generated subsemigroups
/// of L_B and R_B; under the split-anchor method the right pool is the
/// centralizer of R_A instead. Certified by recomputing the shared key from
/// the recovered pair and A's public K_A.
pub fn attack_b_key(
    params: &ProtocolParams,
    k_b: &PlatformElement,
    k_a: &PlatformElement,
    honest_kappa: &PlatformElement,
) -> Result<AttackResult, AttackError> {
    if !params.platform.is_finite() {
        return Err(AttackError::InfinitePlatform);
    }
    let left_pool = subsemigroup_closure(&params.l_b)?;
    let right_pool = match params.selection_method {
        crate::conditions::SelectionMethod::Third => {
            subset_centralizer(params.platform, &params.r_a)?
        }
        _ => subsemigroup_closure(&params.r_b)?,
    };
    let found = pair_search(&left_pool, &right_pool, &params.z, k_b, DEFAULT_SEARCH_CAP)?;

    let stolen = SecretPair::from_elements(params, found.left.clone(), found.right.clone())?;
    let kappa = stolen.sandwich(k_a)?;
    if !equal(&kappa, honest_kappa)? {
        return Err(AttackError::VerificationFailed);
    }
    Ok(AttackResult {
        target: AttackTarget::BKey,
        equivalent_pair: (found.left, found.right),
        verified_by: VerifiedBy::SharedKeyMatch,
        search_cost: found.cost,
    })
}

/// Pool for the inverse-variant attack on platforms without enumeration:
/// words of bounded length over the full generator set, kept only if they
/// commute with every generator of `with`.
fn commuting_word_pool(
    platform: Platform,
    with: &SubsetSpec,
    max_len: u16,
) -> Result<Vec<PlatformElement>, AttackError> {
    let gens = SubsetSpec::new(
        platform.full_generator_set(),
        crate::algebra::SubsetLabel::Custom("pool".into()),
        (1, 1),
    )?;
    let mut pool = Vec::new();
    'words: for w in bounded_words(&gens, max_len)? {
        for g in with.generators() {
            if !equal(&multiply(&w, g)?, &multiply(g, &w)?)? {
                continue 'words;
            }
        }
        pool.push(w);
    }
    Ok(pool)
}

/// The inverse-variant attack: find invertible (a1', a2') with
/// a1' * z * a2' equal to the published value, then read the shared key as
/// a1'^-1 * K_B * a2'^-1. Candidates without inverses are skipped before
/// the pair search. On enumerable platforms the pools are centralizers; on
/// braid platforms a word-length bound must be supplied and the pools are
/// commuting bounded words.
pub fn attack_variant_b(
    params: &ProtocolParams,
    public_value: &PlatformElement,
    k_b: &PlatformElement,
    honest_kappa: &PlatformElement,
    braid_word_bound: Option<u16>,
) -> Result<AttackResult, AttackError> {
    let (left_raw, right_raw) = if params.platform.is_finite() {
        (
            subset_centralizer(params.platform, &params.l_b)?,
            subset_centralizer(params.platform, &params.r_b)?,
        )
    } else {
        let bound = braid_word_bound.ok_or(AttackError::InfinitePlatform)?;
        (
            commuting_word_pool(params.platform, &params.l_b, bound)?,
            commuting_word_pool(params.platform, &params.r_b, bound)?,
        )
    };
    let invertible = |pool: Vec<PlatformElement>| {
        pool.into_iter()
            .filter(|e| invert(e).is_ok())
            .collect::<Vec<_>>()
    };
    let left_pool = invertible(left_raw);
    let right_pool = invertible(right_raw);
    let found = pair_search(&left_pool, &right_pool, &params.z, public_value, DEFAULT_SEARCH_CAP)?;

    let a1_inv = invert(&found.left)?;
    let a2_inv = invert(&found.right)?;
    let kappa = multiply(&multiply(&a1_inv, k_b)?, &a2_inv)?;
    if !equal(&kappa, honest_kappa)? {
        return Err(AttackError::VerificationFailed);
    }
    Ok(AttackResult {
        target: AttackTarget::AKey,
        equivalent_pair: (found.left, found.right),
        verified_by: VerifiedBy::SharedKeyMatch,
        search_cost: found.cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{canonicalize, SubsetLabel};
    use crate::conditions::{select_method3, ConditionVariant, SelectionMethod};
    use crate::perm::Perm;
    use crate::protocols::{
        ka_publish, ka_shared, ka_variant_finish, ka_variant_respond, keygen, presets,
        sample_role_secrets, HashMode, KeyPair, Role, SecretMode,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn trivial_instance_solves_with_identities() {
        let params = presets::perm6().unwrap();
        let inst = DecompositionInstance::new(
            params.z.clone(),
            params.z.clone(),
            params.l_a.clone(),
            params.r_a.clone(),
            2,
        )
        .unwrap();
        let sol = brute_force_dp(&inst).unwrap().unwrap();
        assert!(sol.left.is_identity());
        assert!(sol.right.is_identity());
        assert_eq!(sol.cost, 1);
    }

    #[test]
    fn oracle_recovers_published_keys_on_presets() {
        for params in [presets::perm6().unwrap(), presets::matrix_2_3().unwrap()] {
            for seed in 0..10 {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                let key = keygen(&params, &mut rng).unwrap();
                let inst = DecompositionInstance::new(
                    params.z.clone(),
                    key.public().clone(),
                    params.l_a.clone(),
                    params.r_a.clone(),
                    3,
                )
                .unwrap();
                let sol = brute_force_dp(&inst).unwrap().expect("honest secrets are in range");
                let product = multiply(&multiply(&sol.left, &params.z).unwrap(), &sol.right).unwrap();
                assert!(equal(&product, key.public()).unwrap());
                assert!(sol.cost <= 16);
            }
        }
    }

    #[test]
    fn unreachable_parity_returns_none() {
        // f and g range over 3-cycles (even); an odd target is unreachable.
        let three_cycle = PlatformElement::permutation(Perm::from_cycles(5, &[&[1, 2, 3]]).unwrap());
        let sub = |label| {
            SubsetSpec::new(vec![three_cycle.clone()], label, (1, 2)).unwrap()
        };
        let x = Platform::permutation(5).unwrap().identity();
        let y = PlatformElement::permutation(Perm::from_cycles(5, &[&[1, 2]]).unwrap());
        let inst =
            DecompositionInstance::new(x, y, sub(SubsetLabel::LA), sub(SubsetLabel::RA), 4).unwrap();
        assert!(brute_force_dp(&inst).unwrap().is_none());
    }

    #[test]
    fn oversized_search_space_is_rejected_upfront() {
        let (lower, upper) = crate::braid::standard_commuting_subgroups(8).unwrap();
        let z = PlatformElement::braid_word(8, &[3, 4, 5]).unwrap();
        let inst = DecompositionInstance::new(z.clone(), z, lower, upper, 30)
            .unwrap()
            .with_cap(1 << 20);
        assert!(matches!(
            brute_force_dp(&inst),
            Err(AttackError::SearchSpaceTooLarge(_))
        ));
    }

    #[test]
    fn braid_toy_decomposition_is_found_within_bounds() {
        let s1 = PlatformElement::braid_word(4, &[1]).unwrap();
        let s3 = PlatformElement::braid_word(4, &[3]).unwrap();
        let left = SubsetSpec::new(vec![s1.clone()], SubsetLabel::LA, (1, 2)).unwrap();
        let right = SubsetSpec::new(vec![s3.clone()], SubsetLabel::RA, (1, 2)).unwrap();
        let x = PlatformElement::braid_word(4, &[2]).unwrap();
        // y = s1 s1 x s3, reachable at lengths (2, 1).
        let y = multiply(&multiply(&multiply(&s1, &s1).unwrap(), &x).unwrap(), &s3).unwrap();
        let inst = DecompositionInstance::new(x.clone(), canonicalize(&y), left, right, 2).unwrap();
        let sol = brute_force_dp(&inst).unwrap().unwrap();
        let rebuilt = multiply(&multiply(&sol.left, &x).unwrap(), &sol.right).unwrap();
        assert!(equal(&rebuilt, &y).unwrap());
    }

    #[test]
    fn double_coset_search_reproduces_a_shared_key() {
        let params = presets::perm6().unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let (sa, k_a) = ka_publish(&params, Role::A, &mut rng).unwrap();
        let (sb, k_b) = ka_publish(&params, Role::B, &mut rng).unwrap();
        let kappa = ka_shared(&params, &sa, &k_b).unwrap();
        let sol = double_coset_search(&params.z, &k_b, &params.l_b, &params.r_b, 3, 1 << 16)
            .unwrap()
            .expect("honest secrets are in range");
        let stolen = SecretPair::from_elements(&params, sol.left, sol.right).unwrap();
        assert!(equal(&stolen.sandwich(&k_a).unwrap(), &kappa).unwrap());
        assert!(equal(&ka_shared(&params, &sb, &k_a).unwrap(), &kappa).unwrap());
    }

    #[test]
    fn a_key_attack_impersonates_on_method1_presets() {
        for params in [presets::perm6().unwrap(), presets::matrix_2_3().unwrap()] {
            for seed in 0..5 {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                let key = keygen(&params, &mut rng).unwrap();
                let result = attack_a_key(&params, None, key.public(), &mut rng).unwrap();
                assert_eq!(result.target, AttackTarget::AKey);
                assert_eq!(result.verified_by, VerifiedBy::ImpersonationAccept);
                assert!(result.search_cost > 0);
            }
        }
    }

    #[test]
    fn identity_keys_yield_the_identity_pair() {
        let params = presets::perm6().unwrap();
        let e = params.platform.identity();
        let key = KeyPair::from_secrets(
            &params,
            SecretPair::from_elements(&params, e.clone(), e.clone()).unwrap(),
        )
        .unwrap();
        assert!(equal(key.public(), &params.z).unwrap());

        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let a_result = attack_a_key(&params, None, key.public(), &mut rng).unwrap();
        assert!(a_result.equivalent_pair.0.is_identity());
        assert!(a_result.equivalent_pair.1.is_identity());
        assert_eq!(a_result.search_cost, 1);

        // Identity responder: K_B = z, and the honest shared key is z too.
        let b_result = attack_b_key(&params, &params.z, &params.z, &params.z).unwrap();
        assert!(b_result.equivalent_pair.0.is_identity());
        assert!(b_result.equivalent_pair.1.is_identity());
        assert_eq!(b_result.search_cost, 1);
    }

    #[test]
    fn a_key_attack_uses_the_published_subsemigroup_under_method3() {
        let platform = Platform::permutation(5).unwrap();
        for seed in 0..5 {
            let mut rng = ChaCha12Rng::seed_from_u64(40 + seed);
            let outcome = select_method3(platform, &mut rng).unwrap();
            let mut z = outcome.z_set.sample(&mut rng);
            while z.is_identity() {
                z = outcome.z_set.sample(&mut rng);
            }
            let params = crate::protocols::ProtocolParams::from_selection(
                &outcome,
                z,
                HashMode::BitString,
                SecretMode::Independent,
            )
            .unwrap();
            let secrets = sample_role_secrets(&params, Some(&outcome), Role::A, &mut rng).unwrap();
            let key = KeyPair::from_secrets(&params, secrets).unwrap();
            let result = attack_a_key(&params, Some(&outcome), key.public(), &mut rng).unwrap();
            assert_eq!(result.verified_by, VerifiedBy::ImpersonationAccept);
        }
    }

    #[test]
    fn a_key_attack_works_on_selection_params() {
        let bundle = presets::perm6_method2().unwrap();
        let params = &bundle.params;
        let selection = bundle.selection.as_ref().unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let secrets = sample_role_secrets(params, Some(selection), Role::A, &mut rng).unwrap();
        let key = KeyPair::from_secrets(params, secrets).unwrap();
        let result = attack_a_key(params, Some(selection), key.public(), &mut rng).unwrap();
        assert_eq!(result.verified_by, VerifiedBy::ImpersonationAccept);
        let pools_bound = 720u64 * 720u64;
        assert!(result.search_cost <= pools_bound);
    }

    #[test]
    fn b_key_attack_recovers_the_shared_key() {
        for params in [presets::perm6().unwrap(), presets::matrix_2_3().unwrap()] {
            for seed in 0..5 {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                let (sa, k_a) = ka_publish(&params, Role::A, &mut rng).unwrap();
                let (_sb, k_b) = ka_publish(&params, Role::B, &mut rng).unwrap();
                let kappa = ka_shared(&params, &sa, &k_b).unwrap();
                let result = attack_b_key(&params, &k_b, &k_a, &kappa).unwrap();
                assert_eq!(result.target, AttackTarget::BKey);
                assert_eq!(result.verified_by, VerifiedBy::SharedKeyMatch);
            }
        }
    }

    #[test]
    fn b_key_attack_uses_the_anchor_centralizer_under_method3() {
        let platform = Platform::permutation(5).unwrap();
        for seed in 0..5 {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let outcome = select_method3(platform, &mut rng).unwrap();
            let mut z = outcome.z_set.sample(&mut rng);
            while z.is_identity() {
                z = outcome.z_set.sample(&mut rng);
            }
            let params = crate::protocols::ProtocolParams::from_selection(
                &outcome,
                z,
                HashMode::BitString,
                SecretMode::Independent,
            )
            .unwrap();
            assert_eq!(params.selection_method, SelectionMethod::Third);
            let sa = sample_role_secrets(&params, Some(&outcome), Role::A, &mut rng).unwrap();
            let sb = sample_role_secrets(&params, Some(&outcome), Role::B, &mut rng).unwrap();
            let k_a = sa.sandwich(&params.z).unwrap();
            let k_b = sb.sandwich(&params.z).unwrap();
            let kappa = sa.sandwich(&k_b).unwrap();
            let result = attack_b_key(&params, &k_b, &k_a, &kappa).unwrap();
            assert_eq!(result.verified_by, VerifiedBy::SharedKeyMatch);
        }
    }

    #[test]
    fn variant_attack_recovers_kappa_on_finite_presets() {
        for params in [presets::perm6().unwrap(), presets::matrix_2_3().unwrap()] {
            for seed in 0..5 {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                let (sa, k_a) = ka_publish(&params, Role::A, &mut rng).unwrap();
                let (_sb, k_b, kappa_b) = ka_variant_respond(&params, &k_a, &mut rng).unwrap();
                let kappa_a = ka_variant_finish(&params, &sa, &k_b).unwrap();
                assert!(equal(&kappa_a, &kappa_b).unwrap());
                let result = attack_variant_b(&params, &k_a, &k_b, &kappa_b, None).unwrap();
                assert_eq!(result.verified_by, VerifiedBy::SharedKeyMatch);
                // The recovered pair reproduces K_A.
                let (a1, a2) = &result.equivalent_pair;
                let rebuilt = multiply(&multiply(a1, &params.z).unwrap(), a2).unwrap();
                assert!(equal(&rebuilt, &k_a).unwrap());
            }
        }
    }

    #[test]
    fn variant_attack_runs_on_a_braid_toy() {
        let gen_subset = |letter: i32, label| {
            SubsetSpec::new(
                vec![PlatformElement::braid_word(4, &[letter]).unwrap()],
                label,
                (1, 1),
            )
            .unwrap()
        };
        let params = crate::protocols::ProtocolParams::new_unchecked(
            gen_subset(1, SubsetLabel::LA),
            gen_subset(3, SubsetLabel::RA),
            gen_subset(3, SubsetLabel::LB),
            gen_subset(1, SubsetLabel::RB),
            PlatformElement::braid_word(4, &[2]).unwrap(),
            ConditionVariant::A,
            SelectionMethod::First,
            HashMode::BitString,
            SecretMode::Independent,
        )
        .unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let (sa, k_a) = ka_publish(&params, Role::A, &mut rng).unwrap();
        let (_sb, k_b, kappa_b) = ka_variant_respond(&params, &k_a, &mut rng).unwrap();
        let kappa_a = ka_variant_finish(&params, &sa, &k_b).unwrap();
        assert!(equal(&kappa_a, &kappa_b).unwrap());
        let result = attack_variant_b(&params, &k_a, &k_b, &kappa_b, Some(2)).unwrap();
        assert_eq!(result.verified_by, VerifiedBy::SharedKeyMatch);
        assert!(matches!(
            attack_variant_b(&params, &k_a, &k_b, &kappa_b, None),
            Err(AttackError::InfinitePlatform)
        ));
    }

    #[test]
    fn search_cost_is_bounded_by_the_pool_product() {
        let params = presets::perm6().unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let key = keygen(&params, &mut rng).unwrap();
        let result = attack_a_key(&params, None, key.public(), &mut rng).unwrap();
        // Centralizer of a transposition in S_6 has 48 elements.
        assert!(result.search_cost <= 48 * 48);
        let text = result.to_string();
        assert!(text.contains("impersonation-accept"));
        assert!(text.contains("search cost"));
    }
}
