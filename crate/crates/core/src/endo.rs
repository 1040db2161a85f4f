//! Endomorphisms of a finitely presented monoid given by a complete system:
//! whether an assignment on generators lifts, bounded surjectivity and
//! non-injectivity evidence, and the end-to-end non-hopfian demonstration
//! for `Mon⟨a,b : ab²a²b² = b⟩`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::confluence::certify_complete;
use crate::error::{Error, Result};
use crate::family::{build_system, classify};
use crate::presentation::Presentation;
use crate::rewrite::{find_termination_order, RewritingSystem, DEFAULT_FUEL};
use crate::words::{Alphabet, Word};

/// An assignment generator -> word, extended homomorphically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndomorphismSpec {
    images: BTreeMap<u8, Word>,
}

impl EndomorphismSpec {
    pub fn new(images: BTreeMap<u8, Word>) -> Self {
        EndomorphismSpec { images }
    }

    pub fn identity(alphabet: &Alphabet) -> Self {
        EndomorphismSpec {
            images: alphabet
                .letters()
                .iter()
                .map(|&l| (l, Word::from_vec(vec![l])))
                .collect(),
        }
    }

    /// Checks that every generator has an image over the generators.
    pub fn check(&self, generators: &Alphabet) -> Result<()> {
        for &g in generators.letters() {
            let image = self.images.get(&g).ok_or(Error::MissingImage(g as char))?;
            generators.check(image)?;
        }
        if let Some(&extra) = self.images.keys().find(|&&l| !generators.contains(l)) {
            return Err(Error::InvalidMap(format!(
                "'{}' is not a generator",
                extra as char
            )));
        }
        Ok(())
    }

    pub fn image(&self, letter: u8) -> Option<&Word> {
        self.images.get(&letter)
    }

    /// `φ ∘ χ`: apply `chi` first.
    pub fn compose(&self, chi: &EndomorphismSpec) -> Result<EndomorphismSpec> {
        let images = chi
            .images
            .iter()
            .map(|(&g, w)| Ok((g, apply_substitution(self, w)?)))
            .collect::<Result<_>>()?;
        Ok(EndomorphismSpec { images })
    }
}

impl FromStr for EndomorphismSpec {
    type Err = Error;

    /// Parses `a=a,b=bab` (word syntax on the right).
    fn from_str(s: &str) -> Result<Self> {
        let mut images = BTreeMap::new();
        for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let (g, img) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidMap(format!("expected g=word, got `{item}`")))?;
            let g = g.trim();
            let mut chars = g.chars();
            let (Some(c), None) = (chars.next(), chars.next()) else {
                return Err(Error::InvalidMap(format!("`{g}` is not a single letter")));
            };
            if !c.is_ascii_alphabetic() {
                return Err(Error::InvalidLetter(c));
            }
            if images.insert(c as u8, Word::parse_free(img)?).is_some() {
                return Err(Error::InvalidMap(format!("'{c}' mapped twice")));
            }
        }
        Ok(EndomorphismSpec { images })
    }
}

impl fmt::Display for EndomorphismSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (g, w)) in self.images.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}={w}", *g as char)?;
        }
        Ok(())
    }
}

impl Serialize for EndomorphismSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn apply_substitution(phi: &EndomorphismSpec, w: &Word) -> Result<Word> {
    let mut out = Vec::new();
    for &l in w.letters() {
        let img = phi.images.get(&l).ok_or(Error::MissingImage(l as char))?;
        out.extend_from_slice(img.letters());
    }
    Ok(Word::from_vec(out))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationImage {
    pub lhs: Word,
    pub rhs: Word,
    pub lhs_image_normal_form: Word,
    pub rhs_image_normal_form: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiftVerdict {
    pub lifts: bool,
    pub relations: Vec<RelationImage>,
}

/// The assignment lifts to an endomorphism iff both sides of every defining
/// relation have images with the same normal form.
pub fn check_lifts(
    system: &RewritingSystem,
    presentation: &Presentation,
    phi: &EndomorphismSpec,
    fuel: u64,
) -> Result<LiftVerdict> {
    phi.check(presentation.alphabet())?;
    let relations: Vec<RelationImage> = presentation
        .equations()
        .iter()
        .map(|(l, r)| {
            Ok(RelationImage {
                lhs: l.clone(),
                rhs: r.clone(),
                lhs_image_normal_form: system.normalize(&apply_substitution(phi, l)?, fuel)?,
                rhs_image_normal_form: system.normalize(&apply_substitution(phi, r)?, fuel)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(LiftVerdict {
        lifts: relations
            .iter()
            .all(|r| r.lhs_image_normal_form == r.rhs_image_normal_form),
        relations,
    })
}

/// For each generator, the shortlex-first word of length at most `bound`
/// whose image equals the generator in the monoid.
pub fn surjectivity_evidence(
    system: &RewritingSystem,
    presentation: &Presentation,
    phi: &EndomorphismSpec,
    bound: usize,
    fuel: u64,
) -> Result<BTreeMap<char, Option<Word>>> {
    phi.check(presentation.alphabet())?;
    let generators = presentation.alphabet();
    let mut wanted: HashMap<Word, u8> = HashMap::new();
    for &g in generators.letters() {
        wanted.insert(system.normalize(&Word::from_vec(vec![g]), fuel)?, g);
    }
    let mut found: BTreeMap<char, Option<Word>> = generators
        .letters()
        .iter()
        .map(|&g| (g as char, None))
        .collect();
    let mut missing = generators.len();
    for u in generators.words_up_to(bound) {
        if missing == 0 {
            break;
        }
        let image = system.normalize(&apply_substitution(phi, &u)?, fuel)?;
        if let Some(&g) = wanted.get(&image) {
            let slot = found.get_mut(&(g as char)).expect("generator slot");
            if slot.is_none() {
                *slot = Some(u);
                missing -= 1;
            }
        }
    }
    Ok(found)
}

/// Two words with distinct normal forms whose images share a normal form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InjectivityWitness {
    pub u: Word,
    pub v: Word,
    pub u_normal_form: Word,
    pub v_normal_form: Word,
    pub image_normal_form: Word,
}

impl InjectivityWitness {
    /// Recomputes all normal forms and checks the witness conditions.
    pub fn revalidate(
        &self,
        system: &RewritingSystem,
        phi: &EndomorphismSpec,
        fuel: u64,
    ) -> Result<bool> {
        let un = system.normalize(&self.u, fuel)?;
        let vn = system.normalize(&self.v, fuel)?;
        let ui = system.normalize(&apply_substitution(phi, &self.u)?, fuel)?;
        let vi = system.normalize(&apply_substitution(phi, &self.v)?, fuel)?;
        Ok(un != vn
            && ui == vi
            && un == self.u_normal_form
            && vn == self.v_normal_form
            && ui == self.image_normal_form)
    }
}

/// Sweeps generator words of length at most `bound` in shortlex order,
/// keeping the first representative of each element, and returns the first
/// time two distinct elements have the same image.
pub fn find_injectivity_violation(
    system: &RewritingSystem,
    presentation: &Presentation,
    phi: &EndomorphismSpec,
    bound: usize,
    fuel: u64,
) -> Result<Option<InjectivityWitness>> {
    phi.check(presentation.alphabet())?;
    let mut elements: HashMap<Word, ()> = HashMap::new();
    // image normal form -> (representative, its normal form)
    let mut by_image: HashMap<Word, (Word, Word)> = HashMap::new();
    for v in presentation.alphabet().words_up_to(bound) {
        let vn = system.normalize(&v, fuel)?;
        if elements.insert(vn.clone(), ()).is_some() {
            continue;
        }
        let image = system.normalize(&apply_substitution(phi, &v)?, fuel)?;
        match by_image.get(&image) {
            Some((u, un)) => {
                return Ok(Some(InjectivityWitness {
                    u: u.clone(),
                    v,
                    u_normal_form: un.clone(),
                    v_normal_form: vn,
                    image_normal_form: image,
                }))
            }
            None => {
                by_image.insert(image, (v, vn));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonLift {
    pub map: EndomorphismSpec,
    pub lhs_image_normal_form: Word,
    pub rhs_image_normal_form: Word,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopfReport {
    pub presentation: Presentation,
    pub system: RewritingSystem,
    pub map: EndomorphismSpec,
    pub lift: LiftVerdict,
    pub surjectivity_bound: usize,
    pub preimages: BTreeMap<char, Option<Word>>,
    /// The would-be inverse and the distinct normal forms of its relation images.
    pub inverse_non_lift: NonLift,
    pub witness: InjectivityWitness,
    pub witness_bound: usize,
    /// `(ψ(ab²a²b²), ψ(b))` for the would-be inverse ψ, revalidated.
    pub derived_witness: InjectivityWitness,
    pub conclusion: String,
}

fn expect_eq(what: &str, got: &Word, want: &str) -> Result<()> {
    if got.to_string() != want {
        return Err(Error::Mismatch(format!(
            "{what}: got {got}, expected {want}"
        )));
    }
    Ok(())
}

/// Builds the Case 4 system for `(1,2,2,2)`, certifies it, and shows the
/// endomorphism `a ↦ a, b ↦ bab` is surjective but not injective.
pub fn hopf_demo() -> Result<HopfReport> {
    const MAX_WITNESS_BOUND: usize = 15;
    let fuel = DEFAULT_FUEL;
    let (tag, params) = classify(1, 2, 2, 2)?;
    let built = build_system(tag, &params)?;
    let order = find_termination_order(&built, 8)
        .ok_or_else(|| Error::Mismatch("no termination order for the (1,2,2,2) system".into()))?;
    let (system, conf) = certify_complete(&built, &order, fuel)?;
    if !conf.joinable {
        return Err(Error::Mismatch(
            "(1,2,2,2) system is not locally confluent".into(),
        ));
    }
    let pres = params.presentation();

    let phi: EndomorphismSpec = "a=a,b=bab".parse()?;
    let lift = check_lifts(&system, &pres, &phi, fuel)?;
    if !lift.lifts {
        return Err(Error::Mismatch("b -> bab does not lift".into()));
    }
    expect_eq(
        "image of the relator",
        &lift.relations[0].lhs_image_normal_form,
        "bx^2",
    )?;

    let surjectivity_bound = 3;
    let preimages = surjectivity_evidence(&system, &pres, &phi, surjectivity_bound, fuel)?;
    match preimages.get(&'b') {
        Some(Some(w)) => expect_eq("preimage of b", w, "ab^2")?,
        _ => return Err(Error::Mismatch("no preimage of b within bound 3".into())),
    }
    if preimages.values().any(Option::is_none) {
        return Err(Error::Mismatch("a generator has no preimage".into()));
    }

    let psi: EndomorphismSpec = "a=a,b=ab^2".parse()?;
    let psi_lift = check_lifts(&system, &pres, &psi, fuel)?;
    let rel = &psi_lift.relations[0];
    expect_eq(
        "ψ image of the relator",
        &rel.lhs_image_normal_form,
        "x^3bax^3b",
    )?;
    expect_eq("ψ image of b", &rel.rhs_image_normal_form, "x^2b")?;
    if psi_lift.lifts {
        return Err(Error::Mismatch("b -> ab^2 unexpectedly lifts".into()));
    }
    let inverse_non_lift = NonLift {
        map: psi.clone(),
        lhs_image_normal_form: rel.lhs_image_normal_form.clone(),
        rhs_image_normal_form: rel.rhs_image_normal_form.clone(),
    };

    let mut found = None;
    for bound in 1..=MAX_WITNESS_BOUND {
        if let Some(w) = find_injectivity_violation(&system, &pres, &phi, bound, fuel)? {
            found = Some((w, bound));
            break;
        }
    }
    let (witness, witness_bound) =
        found.ok_or_else(|| Error::Mismatch("no injectivity witness within bound 15".into()))?;
    if !witness.revalidate(&system, &phi, fuel)? {
        return Err(Error::Mismatch("search returned an invalid witness".into()));
    }

    let (u, v) = (
        apply_substitution(&psi, &pres.equations()[0].0)?,
        apply_substitution(&psi, &pres.equations()[0].1)?,
    );
    let derived_witness = InjectivityWitness {
        u_normal_form: system.normalize(&u, fuel)?,
        v_normal_form: system.normalize(&v, fuel)?,
        image_normal_form: system.normalize(&apply_substitution(&phi, &u)?, fuel)?,
        u,
        v,
    };
    if !derived_witness.revalidate(&system, &phi, fuel)? {
        return Err(Error::Mismatch("derived witness does not validate".into()));
    }

    Ok(HopfReport {
        presentation: pres,
        system,
        map: phi,
        lift,
        surjectivity_bound,
        preimages,
        inverse_non_lift,
        witness,
        witness_bound,
        derived_witness,
        conclusion: "surjective, non-injective ⟹ non-hopfian; by Malcev, not residually finite"
            .into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confluence::certify_complete;
    use crate::rewrite::ReductionOrder;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse_free(s).unwrap()
    }

    fn hopf_monoid() -> (RewritingSystem, Presentation) {
        let (tag, params) = classify(1, 2, 2, 2).unwrap();
        let sys = build_system(tag, &params).unwrap();
        let order: ReductionOrder = "weights: a=4 b=1 x=2; precedence: x>b>a".parse().unwrap();
        let (sys, _) = certify_complete(&sys, &order, DEFAULT_FUEL).unwrap();
        (sys, params.presentation())
    }

    fn spec(s: &str) -> EndomorphismSpec {
        s.parse().unwrap()
    }

    #[test]
    fn substitution_examples() {
        assert_eq!(
            apply_substitution(&spec("a=a,b=bab"), &w("ab^2")).unwrap(),
            w("abab^2ab")
        );
        let ab = Alphabet::parse("a b").unwrap();
        let id = EndomorphismSpec::identity(&ab);
        assert_eq!(apply_substitution(&id, &w("ab^2a")).unwrap(), w("ab^2a"));
        assert_eq!(
            apply_substitution(&spec("a=a,b=ab^2"), &w("ab^2a^2b^2")).unwrap(),
            w("a^2b^2ab^2a^3b^2ab^2")
        );
        assert_eq!(
            apply_substitution(&spec("a=a"), &w("ab")),
            Err(Error::MissingImage('b'))
        );
    }

    #[test]
    fn map_parsing() {
        assert_eq!(spec("a=a, b=bab").to_string(), "a=a,b=bab");
        assert!("a=a,a=b".parse::<EndomorphismSpec>().is_err());
        assert!("ab=a".parse::<EndomorphismSpec>().is_err());
        assert!("a".parse::<EndomorphismSpec>().is_err());
    }

    #[test]
    fn lift_examples() {
        let (sys, pres) = hopf_monoid();
        let v = check_lifts(&sys, &pres, &spec("a=a,b=bab"), DEFAULT_FUEL).unwrap();
        assert!(v.lifts);
        assert_eq!(v.relations[0].lhs_image_normal_form, w("bx^2"));

        let v = check_lifts(&sys, &pres, &spec("a=a,b=ab^2"), DEFAULT_FUEL).unwrap();
        assert!(!v.lifts);
        assert_eq!(v.relations[0].lhs_image_normal_form, w("x^3bax^3b"));
        assert_eq!(v.relations[0].rhs_image_normal_form, w("x^2b"));

        let id = EndomorphismSpec::identity(pres.alphabet());
        assert!(check_lifts(&sys, &pres, &id, DEFAULT_FUEL).unwrap().lifts);
        assert!(check_lifts(&sys, &pres, &spec("a=a,b=x"), DEFAULT_FUEL).is_err());
    }

    #[test]
    fn surjectivity_examples() {
        let (sys, pres) = hopf_monoid();
        let pre = surjectivity_evidence(&sys, &pres, &spec("a=a,b=bab"), 3, DEFAULT_FUEL).unwrap();
        assert_eq!(pre[&'a'], Some(w("a")));
        assert_eq!(pre[&'b'], Some(w("ab^2")));

        let id = EndomorphismSpec::identity(pres.alphabet());
        let pre = surjectivity_evidence(&sys, &pres, &id, 2, DEFAULT_FUEL).unwrap();
        assert_eq!(pre[&'a'], Some(w("a")));
        assert_eq!(pre[&'b'], Some(w("b")));

        let ab = Alphabet::parse("a b").unwrap();
        let free = RewritingSystem::new(ab.clone(), vec![]).unwrap();
        let free_pres = Presentation::new(ab, vec![]).unwrap();
        let pre =
            surjectivity_evidence(&free, &free_pres, &spec("a=a,b=ab"), 6, DEFAULT_FUEL).unwrap();
        assert_eq!(pre[&'a'], Some(w("a")));
        assert_eq!(pre[&'b'], None);
    }

    #[test]
    fn injectivity_examples() {
        let (sys, pres) = hopf_monoid();
        let phi = spec("a=a,b=bab");
        let derived = InjectivityWitness {
            u: w("a^2b^2ab^2a^3b^2ab^2"),
            v: w("ab^2"),
            u_normal_form: w("x^3bax^3b"),
            v_normal_form: w("x^2b"),
            image_normal_form: w("b"),
        };
        assert!(derived.revalidate(&sys, &phi, DEFAULT_FUEL).unwrap());

        let id = EndomorphismSpec::identity(pres.alphabet());
        assert_eq!(
            find_injectivity_violation(&sys, &pres, &id, 6, DEFAULT_FUEL).unwrap(),
            None
        );
        assert_eq!(
            find_injectivity_violation(&sys, &pres, &phi, 1, DEFAULT_FUEL).unwrap(),
            None
        );

        let found = find_injectivity_violation(&sys, &pres, &phi, 15, DEFAULT_FUEL)
            .unwrap()
            .expect("witness within the derived length");
        assert!(found.revalidate(&sys, &phi, DEFAULT_FUEL).unwrap());
    }

    #[test]
    fn inverse_composition_fixes_generators() {
        let (sys, pres) = hopf_monoid();
        let comp = spec("a=a,b=bab").compose(&spec("a=a,b=ab^2")).unwrap();
        for &g in pres.alphabet().letters() {
            let gw = Word::from_letters(&[g]).unwrap();
            let img = apply_substitution(&comp, &gw).unwrap();
            assert_eq!(
                sys.normalize(&img, DEFAULT_FUEL).unwrap(),
                sys.normalize(&gw, DEFAULT_FUEL).unwrap()
            );
        }
    }

    #[test]
    fn demo_report() {
        let report = hopf_demo().unwrap();
        assert!(report.lift.lifts);
        assert_eq!(report.preimages[&'b'], Some(w("ab^2")));
        assert_eq!(
            report.inverse_non_lift.lhs_image_normal_form,
            w("x^3bax^3b")
        );
        assert_eq!(report.inverse_non_lift.rhs_image_normal_form, w("x^2b"));
        assert_eq!(report.derived_witness.image_normal_form, w("b"));
        assert!(report.witness.u.len() <= 15 && report.witness.v.len() <= 15);
        assert!(report.conclusion.contains("Malcev"));
    }

    fn gen_word(max: usize) -> impl Strategy<Value = Word> {
        proptest::collection::vec(prop_oneof![Just(b'a'), Just(b'b')], 0..max)
            .prop_map(|v| Word::from_letters(&v).unwrap())
    }

    proptest! {
        #[test]
        fn substitution_is_a_homomorphism(u in gen_word(10), v in gen_word(10)) {
            let phi = spec("a=a,b=bab");
            let lhs = apply_substitution(&phi, &u.concat(&v)).unwrap();
            let rhs = apply_substitution(&phi, &u).unwrap().concat(&apply_substitution(&phi, &v).unwrap());
            prop_assert_eq!(lhs, rhs);
            prop_assert!(apply_substitution(&phi, &Word::empty()).unwrap().is_empty());
        }

        #[test]
        fn lifting_maps_compose(ia in gen_word(4), ib in gen_word(4), ja in gen_word(4), jb in gen_word(4)) {
            let (sys, pres) = hopf_monoid();
            let mk = |x: &Word, y: &Word| {
                EndomorphismSpec::new([(b'a', x.clone()), (b'b', y.clone())].into_iter().collect())
            };
            let phi = mk(&ia, &ib);
            let chi = mk(&ja, &jb);
            let lifts = |m: &EndomorphismSpec| check_lifts(&sys, &pres, m, DEFAULT_FUEL).unwrap().lifts;
            if lifts(&phi) && lifts(&chi) {
                prop_assert!(lifts(&phi.compose(&chi).unwrap()));
            }
        }
    }
}
