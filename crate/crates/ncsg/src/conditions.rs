//! Commutativity conditions on the subset family (L_A, R_A, L_B, R_B, Z),
//! and the centralizer-based subset selection methods.
//!
//! `[S, T] = 1` means every generator of S commutes with every generator of
//! T; commutation then propagates to all products. `[S, T] != 1` is read
//! existentially: some generator pair fails to commute, and the report
//! records that pair as a witness.

use crate::algebra::{
    centralizer_enumerate, equal, multiply, AlgebraError, Platform, PlatformElement, SubsetLabel,
    SubsetSpec,
};
use crate::protocols::ProtocolParams;
use rand::Rng;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConditionError {
    #[error("condition requires z != identity, but z is the identity")]
    ZIsIdentity,
    #[error("condition requires z = identity, but z is not")]
    ZNotIdentity,
    #[error("selection requires a finite platform")]
    InfinitePlatform,
    #[error("selection invariant violated: {0}")]
    SelectionInvariant(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionVariant {
    /// The eight-clause condition used when z is not the identity.
    A,
    /// The six-clause condition used when z is the identity.
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionMethod {
    /// Subsets are public, fixed ahead of time.
    First,
    /// One party picks private anchors (a1, a2) and publishes generator
    /// lists inside their centralizers.
    Second,
    /// Both parties pick one private anchor each and publish a generator
    /// list inside the peer anchor's centralizer.
    Third,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Requirement {
    Commute,
    NotCommute,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Clause {
    pub lhs: SubsetLabel,
    pub rhs: SubsetLabel,
    pub requirement: Requirement,
    pub holds: bool,
    /// First non-commuting generator pair found, if any.
    pub witness: Option<(PlatformElement, PlatformElement)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub variant: ConditionVariant,
    pub clauses: Vec<Clause>,
    pub all_hold: bool,
}

impl ConditionReport {
    pub fn failing_clauses(&self) -> Vec<&Clause> {
        self.clauses.iter().filter(|c| !c.holds).collect()
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.variant {
            ConditionVariant::A => "condition for z != e",
            ConditionVariant::B => "condition for z = e",
        };
        writeln!(f, "{name}:")?;
        for clause in &self.clauses {
            let req = match clause.requirement {
                Requirement::Commute => "= 1",
                Requirement::NotCommute => "!= 1",
            };
            let status = if clause.holds { "holds" } else { "FAILS" };
            write!(f, "  [{}, {}] {req}: {status}", clause.lhs, clause.rhs)?;
            if let Some((u, v)) = &clause.witness {
                write!(f, "  (non-commuting pair: {u} ; {v})")?;
            }
            writeln!(f)?;
        }
        write!(f, "all hold: {}", if self.all_hold { "yes" } else { "no" })
    }
}

/// Checks whether every generator of `s1` commutes with every generator of
/// `s2`. On failure returns the first offending pair in generator order.
pub fn subsets_commute(
    s1: &SubsetSpec,
    s2: &SubsetSpec,
) -> Result<(bool, Option<(PlatformElement, PlatformElement)>), ConditionError> {
    for u in s1.generators() {
        for v in s2.generators() {
            let uv = multiply(u, v)?;
            let vu = multiply(v, u)?;
            if !equal(&uv, &vu)? {
                return Ok((false, Some((u.clone(), v.clone()))));
            }
        }
    }
    Ok((true, None))
}

fn evaluate_clause(
    lhs_label: SubsetLabel,
    lhs: &SubsetSpec,
    rhs_label: SubsetLabel,
    rhs: &SubsetSpec,
    requirement: Requirement,
) -> Result<Clause, ConditionError> {
    let (commutes, witness) = subsets_commute(lhs, rhs)?;
    let holds = match requirement {
        Requirement::Commute => commutes,
        Requirement::NotCommute => !commutes,
    };
    Ok(Clause {
        lhs: lhs_label,
        rhs: rhs_label,
        requirement,
        holds,
        witness,
    })
}

/// Evaluates the eight-clause condition for a non-identity z: the two cross
/// commutations that make the protocols complete, plus the non-commutation
/// clauses that rule out degenerate instances.
pub fn check_condition_a(params: &ProtocolParams) -> Result<ConditionReport, ConditionError> {
    if params.z.is_identity() {
        return Err(ConditionError::ZIsIdentity);
    }
    let spec: [(SubsetLabel, &SubsetSpec, SubsetLabel, &SubsetSpec, Requirement); 8] = [
        (SubsetLabel::LA, &params.l_a, SubsetLabel::LB, &params.l_b, Requirement::Commute),
        (SubsetLabel::RA, &params.r_a, SubsetLabel::RB, &params.r_b, Requirement::Commute),
        (SubsetLabel::LB, &params.l_b, SubsetLabel::Z, &params.z_set, Requirement::NotCommute),
        (SubsetLabel::LA, &params.l_a, SubsetLabel::Z, &params.z_set, Requirement::NotCommute),
        (SubsetLabel::RB, &params.r_b, SubsetLabel::Z, &params.z_set, Requirement::NotCommute),
        (SubsetLabel::RA, &params.r_a, SubsetLabel::Z, &params.z_set, Requirement::NotCommute),
        (SubsetLabel::LA, &params.l_a, SubsetLabel::RA, &params.r_a, Requirement::NotCommute),
        (SubsetLabel::LB, &params.l_b, SubsetLabel::RB, &params.r_b, Requirement::NotCommute),
    ];
    let mut clauses = Vec::with_capacity(spec.len());
    for (ll, ls, rl, rs, req) in spec {
        clauses.push(evaluate_clause(ll, ls, rl, rs, req)?);
    }
    let all_hold = clauses.iter().all(|c| c.holds);
    Ok(ConditionReport {
        variant: ConditionVariant::A,
        clauses,
        all_hold,
    })
}

/// Evaluates the six-clause condition for z = identity.
pub fn check_condition_b(params: &ProtocolParams) -> Result<ConditionReport, ConditionError> {
    if !params.z.is_identity() {
        return Err(ConditionError::ZNotIdentity);
    }
    let spec: [(SubsetLabel, &SubsetSpec, SubsetLabel, &SubsetSpec, Requirement); 6] = [
        (SubsetLabel::LA, &params.l_a, SubsetLabel::LB, &params.l_b, Requirement::Commute),
        (SubsetLabel::RA, &params.r_a, SubsetLabel::RB, &params.r_b, Requirement::Commute),
        (SubsetLabel::LA, &params.l_a, SubsetLabel::RA, &params.r_a, Requirement::NotCommute),
        (SubsetLabel::LB, &params.l_b, SubsetLabel::RB, &params.r_b, Requirement::NotCommute),
        (SubsetLabel::LB, &params.l_b, SubsetLabel::RA, &params.r_a, Requirement::NotCommute),
        (SubsetLabel::LA, &params.l_a, SubsetLabel::RB, &params.r_b, Requirement::NotCommute),
    ];
    let mut clauses = Vec::with_capacity(spec.len());
    for (ll, ls, rl, rs, req) in spec {
        clauses.push(evaluate_clause(ll, ls, rl, rs, req)?);
    }
    let all_hold = clauses.iter().all(|c| c.holds);
    Ok(ConditionReport {
        variant: ConditionVariant::B,
        clauses,
        all_hold,
    })
}

/// Checks the condition that matches the params' declared variant.
pub fn check_condition(params: &ProtocolParams) -> Result<ConditionReport, ConditionError> {
    match params.condition_variant {
        ConditionVariant::A => check_condition_a(params),
        ConditionVariant::B => check_condition_b(params),
    }
}

/// Outcome of a centralizer-based selection. The published subsets live in
/// `l_a ... r_b`; `anchors` stay private to the party that drew them and
/// must never feed an attack.
#[derive(Clone, Debug)]
pub struct SelectionOutcome {
    pub method: SelectionMethod,
    pub l_a: SubsetSpec,
    pub r_a: SubsetSpec,
    pub l_b: SubsetSpec,
    pub r_b: SubsetSpec,
    pub z_set: SubsetSpec,
    anchors: Vec<PlatformElement>,
}

impl SelectionOutcome {
    pub fn anchors(&self) -> &[PlatformElement] {
        &self.anchors
    }

    /// Verifies the defining commutation of the published subsets against
    /// the private anchors.
    pub fn validate(&self) -> Result<(), ConditionError> {
        let check = |subset: &SubsetSpec, anchor: &PlatformElement, what: &str| {
            for g in subset.generators() {
                let ga = multiply(g, anchor)?;
                let ag = multiply(anchor, g)?;
                if !equal(&ga, &ag)? {
                    return Err(ConditionError::SelectionInvariant(format!(
                        "{what} generator {g} does not commute with its anchor"
                    )));
                }
            }
            Ok(())
        };
        match self.method {
            SelectionMethod::First => Ok(()),
            SelectionMethod::Second => {
                check(&self.l_b, &self.anchors[0], "L_B")?;
                check(&self.r_b, &self.anchors[1], "R_B")
            }
            SelectionMethod::Third => {
                check(&self.l_b, &self.anchors[0], "L_B")?;
                check(&self.r_a, &self.anchors[1], "R_A")
            }
        }
    }
}

pub const DEFAULT_PUBLISHED_GENERATORS: usize = 4;

fn truncate_subset<R: Rng>(
    full: &SubsetSpec,
    label: SubsetLabel,
    keep: usize,
    rng: &mut R,
) -> SubsetSpec {
    let members = full.generators();
    let keep = keep.min(members.len());
    let picked = rand::seq::index::sample(rng, members.len(), keep)
        .into_iter()
        .map(|i| members[i].clone())
        .collect();
    SubsetSpec::new(picked, label, (1, 3)).expect("truncation keeps at least one generator")
}

fn full_set(platform: Platform, label: SubsetLabel) -> SubsetSpec {
    SubsetSpec::new(platform.full_generator_set(), label, (1, 3))
        .expect("full generator set is nonempty")
}

/// Selection where one party draws private anchors (a1, a2) from the whole
/// platform and publishes truncated generator lists of their centralizers
/// as L_B and R_B. The other two subsets stand for the whole platform.
pub fn select_method2<R: Rng>(
    platform: Platform,
    rng: &mut R,
) -> Result<SelectionOutcome, ConditionError> {
    select_method2_with(platform, rng, DEFAULT_PUBLISHED_GENERATORS)
}

pub fn select_method2_with<R: Rng>(
    platform: Platform,
    rng: &mut R,
    published: usize,
) -> Result<SelectionOutcome, ConditionError> {
    if !platform.is_finite() {
        return Err(ConditionError::InfinitePlatform);
    }
    let elements = platform.enumerate_elements().map_err(ConditionError::from)?;
    let a1 = elements[rng.gen_range(0..elements.len())].clone();
    let a2 = elements[rng.gen_range(0..elements.len())].clone();
    let c1 = centralizer_enumerate(platform, &a1)?;
    let c2 = centralizer_enumerate(platform, &a2)?;
    let outcome = SelectionOutcome {
        method: SelectionMethod::Second,
        l_a: full_set(platform, SubsetLabel::LA),
        r_a: full_set(platform, SubsetLabel::RA),
        l_b: truncate_subset(&c1, SubsetLabel::LB, published, rng),
        r_b: truncate_subset(&c2, SubsetLabel::RB, published, rng),
        z_set: full_set(platform, SubsetLabel::Z),
        anchors: vec![a1, a2],
    };
    outcome.validate()?;
    Ok(outcome)
}

/// Selection where the first party draws anchor a1 and publishes L_B inside
/// its centralizer, while the second party draws anchor b2 and publishes
/// R_A inside that one's centralizer. The anchors are returned in the order
/// (a1, b2).
pub fn select_method3<R: Rng>(
    platform: Platform,
    rng: &mut R,
) -> Result<SelectionOutcome, ConditionError> {
    select_method3_with(platform, rng, DEFAULT_PUBLISHED_GENERATORS)
}

pub fn select_method3_with<R: Rng>(
    platform: Platform,
    rng: &mut R,
    published: usize,
) -> Result<SelectionOutcome, ConditionError> {
    if !platform.is_finite() {
        return Err(ConditionError::InfinitePlatform);
    }
    let elements = platform.enumerate_elements().map_err(ConditionError::from)?;
    let a1 = elements[rng.gen_range(0..elements.len())].clone();
    let b2 = elements[rng.gen_range(0..elements.len())].clone();
    let c_a1 = centralizer_enumerate(platform, &a1)?;
    let c_b2 = centralizer_enumerate(platform, &b2)?;
    let outcome = SelectionOutcome {
        method: SelectionMethod::Third,
        l_a: full_set(platform, SubsetLabel::LA),
        r_a: truncate_subset(&c_b2, SubsetLabel::RA, published, rng),
        l_b: truncate_subset(&c_a1, SubsetLabel::LB, published, rng),
        r_b: full_set(platform, SubsetLabel::RB),
        z_set: full_set(platform, SubsetLabel::Z),
        anchors: vec![a1, b2],
    };
    outcome.validate()?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::standard_commuting_subgroups;
    use crate::perm::Perm;
    use crate::protocols::presets;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn perm_elt(degree: usize, cycles: &[&[usize]]) -> PlatformElement {
        PlatformElement::permutation(Perm::from_cycles(degree, cycles).unwrap())
    }

    fn perm_subset(degree: usize, cycles: &[&[usize]], label: SubsetLabel) -> SubsetSpec {
        SubsetSpec::new(vec![perm_elt(degree, cycles)], label, (1, 3)).unwrap()
    }

    #[test]
    fn standard_braid_subgroups_commute() {
        for n in 5..=8 {
            let (lower, upper) = standard_commuting_subgroups(n).unwrap();
            let (ok, witness) = subsets_commute(&lower, &upper).unwrap();
            assert!(ok, "lower/upper subgroups of index {n} must commute");
            assert!(witness.is_none());
        }
    }

    #[test]
    fn adjacent_generators_yield_a_witness() {
        let s1 = SubsetSpec::new(
            vec![PlatformElement::braid_word(4, &[1]).unwrap()],
            SubsetLabel::LA,
            (1, 2),
        )
        .unwrap();
        let s2 = SubsetSpec::new(
            vec![PlatformElement::braid_word(4, &[2]).unwrap()],
            SubsetLabel::LB,
            (1, 2),
        )
        .unwrap();
        let (ok, witness) = subsets_commute(&s1, &s2).unwrap();
        assert!(!ok);
        let (u, v) = witness.unwrap();
        assert_eq!(u.as_braid().unwrap().letters(), &[1]);
        assert_eq!(v.as_braid().unwrap().letters(), &[2]);
    }

    #[test]
    fn identity_subsets_commute_with_anything() {
        let id = perm_subset(6, &[], SubsetLabel::LA);
        let other = perm_subset(6, &[&[1, 2, 3]], SubsetLabel::LB);
        assert!(subsets_commute(&id, &other).unwrap().0);
    }

    #[test]
    fn commutation_propagates_to_random_products() {
        let (lower, upper) = standard_commuting_subgroups(7).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for _ in 0..250 {
            let u = lower.sample(&mut rng);
            let v = upper.sample(&mut rng);
            let uv = multiply(&u, &v).unwrap();
            let vu = multiply(&v, &u).unwrap();
            assert!(equal(&uv, &vu).unwrap());
        }
    }

    #[test]
    fn eight_clause_condition_holds_on_the_permutation_preset() {
        let params = presets::perm6().unwrap();
        let report = check_condition_a(&params).unwrap();
        assert!(report.all_hold);
        assert_eq!(report.clauses.len(), 8);
        for clause in &report.clauses {
            if clause.requirement == Requirement::NotCommute {
                assert!(clause.witness.is_some(), "missing witness for {clause:?}");
            }
        }
    }

    #[test]
    fn identity_z_is_rejected_by_the_eight_clause_condition() {
        let mut params = presets::perm6().unwrap();
        let id = params.platform.identity();
        params.z = id.clone();
        params.z_set = SubsetSpec::singleton(id, SubsetLabel::Z);
        assert_eq!(check_condition_a(&params), Err(ConditionError::ZIsIdentity));
    }

    #[test]
    fn non_identity_z_is_rejected_by_the_six_clause_condition() {
        let params = presets::perm6().unwrap();
        assert_eq!(check_condition_b(&params), Err(ConditionError::ZNotIdentity));
    }

    #[test]
    fn six_clause_condition_holds_on_an_interlocking_tuple() {
        // (1 2) and (3 4) commute, (2 3) and (1 4) commute, and every
        // required non-commuting pair shares a point.
        let params = ProtocolParams::new_unchecked(
            perm_subset(6, &[&[1, 2]], SubsetLabel::LA),
            perm_subset(6, &[&[2, 3]], SubsetLabel::RA),
            perm_subset(6, &[&[3, 4]], SubsetLabel::LB),
            perm_subset(6, &[&[1, 4]], SubsetLabel::RB),
            Platform::permutation(6).unwrap().identity(),
            ConditionVariant::B,
            SelectionMethod::First,
            crate::protocols::HashMode::BitString,
            crate::protocols::SecretMode::Independent,
        )
        .unwrap();
        let report = check_condition_b(&params).unwrap();
        assert!(report.all_hold, "{report}");
    }

    #[test]
    fn six_clause_condition_pinpoints_disjoint_secret_subsets() {
        // With L_A = (1 2) disjoint from R_A = (3 5), and L_B = (3 4)
        // disjoint from R_B = (1 6), the two same-party clauses fail and the
        // report says exactly which.
        let params = ProtocolParams::new_unchecked(
            perm_subset(6, &[&[1, 2]], SubsetLabel::LA),
            perm_subset(6, &[&[3, 5]], SubsetLabel::RA),
            perm_subset(6, &[&[3, 4]], SubsetLabel::LB),
            perm_subset(6, &[&[1, 6]], SubsetLabel::RB),
            Platform::permutation(6).unwrap().identity(),
            ConditionVariant::B,
            SelectionMethod::First,
            crate::protocols::HashMode::BitString,
            crate::protocols::SecretMode::Independent,
        )
        .unwrap();
        let report = check_condition_b(&params).unwrap();
        assert!(!report.all_hold);
        let failing = report.failing_clauses();
        assert_eq!(failing.len(), 2);
        assert!(failing
            .iter()
            .any(|c| c.lhs == SubsetLabel::LA && c.rhs == SubsetLabel::RA));
        assert!(failing
            .iter()
            .any(|c| c.lhs == SubsetLabel::LB && c.rhs == SubsetLabel::RB));
    }

    #[test]
    fn method2_invariants_hold_for_many_seeds() {
        for platform in [
            Platform::permutation(5).unwrap(),
            Platform::matrix_mod_p(2, 3).unwrap(),
        ] {
            for seed in 0..100 {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                let outcome = select_method2(platform, &mut rng).unwrap();
                outcome.validate().unwrap();
                assert_eq!(outcome.method, SelectionMethod::Second);
                assert!(outcome.l_b.generators().len() <= DEFAULT_PUBLISHED_GENERATORS);
                assert!(outcome.r_b.generators().len() <= DEFAULT_PUBLISHED_GENERATORS);
            }
        }
    }

    #[test]
    fn method3_invariants_hold_for_many_seeds() {
        for platform in [
            Platform::permutation(5).unwrap(),
            Platform::matrix_mod_p(2, 3).unwrap(),
        ] {
            for seed in 0..100 {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                let outcome = select_method3(platform, &mut rng).unwrap();
                outcome.validate().unwrap();
                assert_eq!(outcome.method, SelectionMethod::Third);
            }
        }
    }

    #[test]
    fn selection_requires_a_finite_platform() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        assert!(matches!(
            select_method2(Platform::braid(6).unwrap(), &mut rng),
            Err(ConditionError::InfinitePlatform)
        ));
    }

    #[test]
    fn selection_is_deterministic_per_seed() {
        let platform = Platform::permutation(5).unwrap();
        let mut rng1 = ChaCha12Rng::seed_from_u64(9);
        let mut rng2 = ChaCha12Rng::seed_from_u64(9);
        let o1 = select_method2(platform, &mut rng1).unwrap();
        let o2 = select_method2(platform, &mut rng2).unwrap();
        assert_eq!(o1.l_b.generators(), o2.l_b.generators());
        assert_eq!(o1.anchors(), o2.anchors());
    }
}
