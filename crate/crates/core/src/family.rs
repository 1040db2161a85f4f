//! The family `Mon⟨a,b : a^α b^β a^γ b^δ = b⟩`: case classification, the
//! finite complete systems for each case, and checks that a constructed
//! system presents the same monoid.
//!
//! When the relator overlaps itself it is written `a^p b^(q+s) a^(r+pk) b^s`
//! with `p, s, k ≥ 1`, `q ≥ 0`, `0 ≤ r < p`. Cases 3 and 4 introduce a letter
//! `x` standing for `a^(pk) b^s`.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{equal_deepening, DeepenedOutcome, OracleConfig, OracleOutcome};
use crate::confluence::{certify_complete, certify_local_confluence, ConfluenceReport};
use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::rewrite::{
    empirical_termination, find_termination_order_with_caps, EmpiricalTermination, ReductionOrder,
    RewritingSystem, Rule,
};
use crate::words::{Alphabet, Word};

/// Derived parameters of a self-overlapping relator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct OverlapParams {
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub s: usize,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FamilyParams {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
    pub delta: usize,
    /// Present exactly when the relator overlaps itself.
    pub overlap: Option<OverlapParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum CaseTag {
    NoOverlap,
    /// `s = 1`
    Case1,
    /// `s > 1`, `r > 0`
    Case2,
    /// `s > 1`, `r = 0`, `k = 1`
    Case3,
    /// `s > 1`, `r = 0`, `k ≥ 2`; `extra_rule` when `q ≥ s − 1`
    Case4 {
        extra_rule: bool,
    },
}

impl CaseTag {
    pub fn uses_x(self) -> bool {
        matches!(self, CaseTag::Case3 | CaseTag::Case4 { .. })
    }

    pub fn label(self) -> &'static str {
        match self {
            CaseTag::NoOverlap => "no-overlap",
            CaseTag::Case1 => "case-1",
            CaseTag::Case2 => "case-2",
            CaseTag::Case3 => "case-3",
            CaseTag::Case4 { extra_rule: false } => "case-4",
            CaseTag::Case4 { extra_rule: true } => "case-4+",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn tag_for(o: &OverlapParams) -> CaseTag {
    if o.s == 1 {
        CaseTag::Case1
    } else if o.r > 0 {
        CaseTag::Case2
    } else if o.k == 1 {
        CaseTag::Case3
    } else {
        CaseTag::Case4 {
            extra_rule: o.q + 1 >= o.s,
        }
    }
}

pub fn classify(alpha: i64, beta: i64, gamma: i64, delta: i64) -> Result<(CaseTag, FamilyParams)> {
    if [alpha, beta, gamma, delta].iter().any(|&e| e < 1) {
        return Err(Error::NonPositiveExponent(alpha, beta, gamma, delta));
    }
    let [alpha, beta, gamma, delta] = [alpha, beta, gamma, delta].map(|e| e as usize);
    if !(beta >= delta && gamma >= alpha) {
        return Ok((
            CaseTag::NoOverlap,
            FamilyParams {
                alpha,
                beta,
                gamma,
                delta,
                overlap: None,
            },
        ));
    }
    let o = OverlapParams {
        p: alpha,
        q: beta - delta,
        r: gamma % alpha,
        s: delta,
        k: gamma / alpha,
    };
    Ok((
        tag_for(&o),
        FamilyParams {
            alpha,
            beta,
            gamma,
            delta,
            overlap: Some(o),
        },
    ))
}

fn a(n: usize) -> Word {
    Word::letter('a').pow(n)
}

fn b(n: usize) -> Word {
    Word::letter('b').pow(n)
}

fn x() -> Word {
    Word::letter('x')
}

fn cat(parts: &[&Word]) -> Word {
    parts.iter().fold(Word::empty(), |acc, p| acc.concat(p))
}

impl FamilyParams {
    /// `a^α b^β a^γ b^δ`
    pub fn relator(&self) -> Word {
        cat(&[
            &a(self.alpha),
            &b(self.beta),
            &a(self.gamma),
            &b(self.delta),
        ])
    }

    /// `Mon⟨a,b : relator = b⟩`
    pub fn presentation(&self) -> Presentation {
        Presentation::new(ab(), vec![(self.relator(), b(1))]).expect("words over {a,b}")
    }

    /// The word `a^(pk) b^s` named by `x`, when the relator overlaps itself.
    pub fn x_definition(&self) -> Option<Word> {
        self.overlap.map(|o| cat(&[&a(o.p * o.k), &b(o.s)]))
    }

    /// The presentation over `{a,b,x}` with `a^(pk) b^s = x` added.
    pub fn tietze_presentation(&self) -> Option<Presentation> {
        let xdef = self.x_definition()?;
        Some(
            Presentation::new(abx(), vec![(self.relator(), b(1)), (xdef, x())])
                .expect("words over {a,b,x}"),
        )
    }

    pub fn overlap_form(&self) -> Option<Word> {
        self.overlap
            .map(|o| cat(&[&a(o.p), &b(o.q + o.s), &a(o.r + o.p * o.k), &b(o.s)]))
    }
}

impl fmt::Display for FamilyParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{})",
            self.alpha, self.beta, self.gamma, self.delta
        )?;
        if let Some(o) = self.overlap {
            write!(f, " [p={} q={} r={} s={} k={}]", o.p, o.q, o.r, o.s, o.k)?;
        }
        Ok(())
    }
}

fn ab() -> Alphabet {
    Alphabet::parse("a b").expect("letters")
}

fn abx() -> Alphabet {
    Alphabet::parse("a b x").expect("letters")
}

/// `x b^q x (b^(q+s−1) x)^n`
fn x_chain(o: &OverlapParams, n: usize) -> Word {
    let block = cat(&[&b(o.q + o.s - 1), &x()]);
    cat(&[&x(), &b(o.q), &x(), &block.pow(n)])
}

/// Emits the complete system of the given case.
pub fn build_system(tag: CaseTag, params: &FamilyParams) -> Result<RewritingSystem> {
    let mismatch = || Error::CaseMismatch {
        tag: tag.to_string(),
        params: params.to_string(),
    };
    let expected = classify(
        params.alpha as i64,
        params.beta as i64,
        params.gamma as i64,
        params.delta as i64,
    )?;
    if expected != (tag, *params) {
        return Err(mismatch());
    }
    let rule = |l: Word, r: Word| Rule::new(l, r);
    let (alphabet, rules) = match (tag, params.overlap) {
        (CaseTag::NoOverlap, _) => (ab(), vec![rule(params.relator(), b(1))?]),
        (CaseTag::Case1, Some(o)) => {
            let mut rules = vec![rule(
                cat(&[&a(o.p), &b(o.q + 1), &a(o.r + o.p * o.k), &b(1)]),
                b(1),
            )?];
            for i in 0..o.k {
                rules.push(rule(
                    cat(&[&a(o.p), &b(o.q + 1), &a(o.r + o.p * i), &b(1)]),
                    cat(&[&b(o.q + 1), &a(o.r + o.p * (i + 1)), &b(1)]),
                )?);
            }
            (ab(), rules)
        }
        (CaseTag::Case2, Some(o)) => {
            let tail = cat(&[&a(o.r + o.p * o.k), &b(o.s)]);
            let block = cat(&[&a(o.r + o.p * o.k), &b(o.q + 2 * o.s - 1)]);
            let mut rules = vec![rule(
                cat(&[&a(o.p), &b(o.q + o.s), &a(o.r + o.p * o.k), &b(o.s)]),
                b(1),
            )?];
            for i in 0..o.k {
                rules.push(rule(
                    cat(&[&a(o.p), &b(o.q + o.s), &a(o.r + o.p * i), &b(1)]),
                    cat(&[&b(o.q + 1), &block.pow(o.k - 1 - i), &tail]),
                )?);
            }
            (ab(), rules)
        }
        (CaseTag::Case3, Some(o)) => (
            abx(),
            vec![
                rule(cat(&[&a(o.p), &b(o.s)]), x())?,
                rule(cat(&[&x(), &b(o.q), &x()]), b(1))?,
                rule(cat(&[&x(), &b(o.q + 1)]), cat(&[&b(o.q + 1), &x()]))?,
            ],
        ),
        (CaseTag::Case4 { extra_rule }, Some(o)) => {
            let mut rules = vec![
                rule(cat(&[&a(o.p), &x(), &b(o.q), &x(), &b(o.s - 1)]), x())?,
                rule(cat(&[&a(o.p), &b(1)]), x_chain(&o, o.k - 2))?,
                rule(x_chain(&o, o.k - 1), b(1))?,
                rule(
                    cat(&[&x_chain(&o, o.k - 2), &b(o.q + o.s)]),
                    cat(&[
                        &b(o.q + 1),
                        &x(),
                        &cat(&[&b(o.q + o.s - 1), &x()]).pow(o.k - 1),
                    ]),
                )?,
            ];
            if extra_rule {
                let tail = cat(&[&b(o.q + o.s - 1), &x()]).pow(o.k - 1);
                rules.push(rule(
                    cat(&[&a(o.p), &x(), &b(o.q + 1)]),
                    cat(&[&x(), &b(o.q + 1 - o.s), &x(), &tail]),
                )?);
            }
            (abx(), rules)
        }
        _ => return Err(mismatch()),
    };
    RewritingSystem::new(alphabet, rules)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleCheck {
    pub index: usize,
    pub rule: String,
    /// Both sides after substituting the definition of `x`.
    pub lhs: Word,
    pub rhs: Word,
    pub oracle: DeepenedOutcome,
}

impl RuleCheck {
    pub fn passed(&self) -> bool {
        matches!(self.oracle.outcome, OracleOutcome::Equal { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationCheck {
    pub lhs: Word,
    pub rhs: Word,
    pub lhs_normal_form: Word,
    pub rhs_normal_form: Word,
}

impl RelationCheck {
    pub fn passed(&self) -> bool {
        self.lhs_normal_form == self.rhs_normal_form
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub rules: Vec<RuleCheck>,
    pub relations: Vec<RelationCheck>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.rules.iter().all(RuleCheck::passed) && self.relations.iter().all(RelationCheck::passed)
    }

    pub fn inconclusive(&self) -> usize {
        self.rules.iter().filter(|r| !r.passed()).count()
    }

    /// A relation of the original presentation whose sides have distinct
    /// normal forms refutes equivalence outright.
    pub fn refuted(&self) -> bool {
        self.relations.iter().any(|r| !r.passed())
    }
}

/// Two-sided check that `constructed` presents the monoid of `original`:
/// every constructed rule, with `x` expanded, is an equality of the original
/// presentation (by the bounded oracle), and every original relation holds in
/// the constructed system.
pub fn verify_presentation_equivalence(
    original: &Presentation,
    constructed: &RewritingSystem,
    x_definition: Option<&Word>,
    config: &OracleConfig,
    fuel: u64,
) -> Result<EquivalenceReport> {
    let uses_x = constructed.alphabet().contains(b'x') && !original.alphabet().contains(b'x');
    if uses_x && x_definition.is_none() {
        return Err(Error::Mismatch(
            "constructed alphabet has x but no definition of x was given".into(),
        ));
    }
    let expand = |w: &Word| match x_definition {
        Some(d) if uses_x => w.substitute(b'x', d),
        _ => w.clone(),
    };
    let rules: Vec<RuleCheck> = constructed
        .rules()
        .par_iter()
        .enumerate()
        .map(|(index, r)| {
            let (lhs, rhs) = (expand(r.lhs()), expand(r.rhs()));
            let oracle = equal_deepening(original, &lhs, &rhs, config);
            RuleCheck {
                index,
                rule: r.to_string(),
                lhs,
                rhs,
                oracle,
            }
        })
        .collect();
    let relations = original
        .equations()
        .iter()
        .map(|(l, r)| {
            Ok(RelationCheck {
                lhs: l.clone(),
                rhs: r.clone(),
                lhs_normal_form: constructed.normalize(l, fuel)?,
                rhs_normal_form: constructed.normalize(r, fuel)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EquivalenceReport { rules, relations })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainIdentity {
    pub name: &'static str,
    pub lhs: Word,
    pub rhs: Word,
    pub oracle: DeepenedOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub params: FamilyParams,
    pub identities: Vec<ChainIdentity>,
}

impl ChainReport {
    pub fn passed(&self) -> bool {
        self.identities
            .iter()
            .all(|i| matches!(i.oracle.outcome, OracleOutcome::Equal { .. }))
    }
}

/// The identities that justify the Case 4 system, each checked by the oracle
/// on `⟨a,b,x | relator = b, a^(pk) b^s = x⟩`.
pub fn case4_identities(params: &FamilyParams) -> Result<Vec<(&'static str, Word, Word)>> {
    let (tag, _) = classify(
        params.alpha as i64,
        params.beta as i64,
        params.gamma as i64,
        params.delta as i64,
    )?;
    let (CaseTag::Case4 { extra_rule }, Some(o)) = (tag, params.overlap) else {
        return Err(Error::CaseMismatch {
            tag: tag.to_string(),
            params: params.to_string(),
        });
    };
    let mut ids = vec![
        (
            "a^(p(k-1))b = xb^qx",
            cat(&[&a(o.p * (o.k - 1)), &b(1)]),
            x_chain(&o, 0),
        ),
        (
            "a^p x b^q x b^(s-1) = x",
            cat(&[&a(o.p), &x(), &b(o.q), &x(), &b(o.s - 1)]),
            x(),
        ),
        (
            "a^p b = xb^qx(b^(q+s-1)x)^(k-2)",
            cat(&[&a(o.p), &b(1)]),
            x_chain(&o, o.k - 2),
        ),
        ("b = xb^qx(b^(q+s-1)x)^(k-1)", b(1), x_chain(&o, o.k - 1)),
        (
            "xb^qx(b^(q+s-1)x)^(k-2)b^(q+s) = b^(q+1)x(b^(q+s-1)x)^(k-1)",
            cat(&[&x_chain(&o, o.k - 2), &b(o.q + o.s)]),
            cat(&[
                &b(o.q + 1),
                &x(),
                &cat(&[&b(o.q + o.s - 1), &x()]).pow(o.k - 1),
            ]),
        ),
    ];
    if extra_rule {
        ids.push((
            "a^p x b^(q+1) = xb^(q-(s-1))x(b^(q+s-1)x)^(k-1)",
            cat(&[&a(o.p), &x(), &b(o.q + 1)]),
            cat(&[
                &x(),
                &b(o.q + 1 - o.s),
                &x(),
                &cat(&[&b(o.q + o.s - 1), &x()]).pow(o.k - 1),
            ]),
        ));
    }
    Ok(ids)
}

pub fn check_derivation_chain(params: &FamilyParams, config: &OracleConfig) -> Result<ChainReport> {
    let ids = case4_identities(params)?;
    let pres = params.tietze_presentation().expect("Case 4 overlaps");
    let identities = ids
        .into_par_iter()
        .map(|(name, lhs, rhs)| {
            let oracle = equal_deepening(&pres, &lhs, &rhs, config);
            ChainIdentity {
                name,
                lhs,
                rhs,
                oracle,
            }
        })
        .collect();
    Ok(ChainReport {
        params: *params,
        identities,
    })
}

/// Weight caps per letter (alphabet order) with `a` capped at `p·k + s`
/// instead of `max_weight` when that is larger.
pub fn literal_weight_caps(
    params: &FamilyParams,
    system: &RewritingSystem,
    max_weight: u32,
) -> Vec<u32> {
    let a_cap = params
        .overlap
        .map_or(max_weight, |o| max_weight.max((o.p * o.k + o.s) as u32));
    caps_with_a(system, max_weight, a_cap)
}

/// Like [`literal_weight_caps`], but `a` may also reach the length of the
/// longest right-hand side. With every other letter at weight 1 this makes
/// each `a`-rule weight-decreasing, so the search cannot fail for lack of room.
pub fn order_weight_caps(
    params: &FamilyParams,
    system: &RewritingSystem,
    max_weight: u32,
) -> Vec<u32> {
    let longest_rhs = system
        .rules()
        .iter()
        .map(|r| r.rhs().len())
        .max()
        .unwrap_or(0) as u32;
    let literal = literal_weight_caps(params, system, max_weight);
    let a_cap = literal[0].max(longest_rhs);
    caps_with_a(system, max_weight, a_cap)
}

fn caps_with_a(system: &RewritingSystem, max_weight: u32, a_cap: u32) -> Vec<u32> {
    system
        .alphabet()
        .letters()
        .iter()
        .map(|&l| if l == b'a' { a_cap } else { max_weight })
        .collect()
}

/// Budgets for [`certify_family_system`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CertifyBudgets {
    pub max_weight: u32,
    pub fuel: u64,
    pub samples: usize,
    pub sample_len: usize,
    pub sample_steps: u64,
    pub seed: u64,
}

impl Default for CertifyBudgets {
    fn default() -> Self {
        CertifyBudgets {
            max_weight: 8,
            fuel: crate::rewrite::DEFAULT_FUEL,
            samples: 200,
            sample_len: 20,
            sample_steps: 100_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TerminationEvidence {
    Order { order: ReductionOrder },
    Empirical { evidence: EmpiricalTermination },
    NotFound,
}

/// The built system for one tuple together with what could be certified.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyCertificate {
    pub tag: CaseTag,
    pub params: FamilyParams,
    pub system: RewritingSystem,
    pub confluence: ConfluenceReport,
    pub termination: TerminationEvidence,
    /// For Case 2: an order found by the search even though the case is
    /// certified only empirically.
    pub informational_order: Option<ReductionOrder>,
}

impl FamilyCertificate {
    pub fn level(&self) -> &'static str {
        self.system.certification().label()
    }
}

/// Builds the system for a tuple and certifies it. Case 2 is certified to
/// local confluence only, with sampled termination evidence; every other
/// case searches for a weighted shortlex order under [`order_weight_caps`].
pub fn certify_family_system(
    tag: CaseTag,
    params: &FamilyParams,
    budgets: &CertifyBudgets,
) -> Result<FamilyCertificate> {
    let built = build_system(tag, params)?;
    let caps = order_weight_caps(params, &built, budgets.max_weight);
    let order = find_termination_order_with_caps(&built, &caps);
    let (system, confluence, termination, informational_order) = match (tag, order) {
        (CaseTag::Case2, order) => {
            let (sys, conf) = certify_local_confluence(&built, budgets.fuel)?;
            let evidence = empirical_termination(
                &built,
                budgets.samples,
                budgets.sample_len,
                budgets.sample_steps,
                budgets.seed,
            );
            (
                sys,
                conf,
                TerminationEvidence::Empirical { evidence },
                order,
            )
        }
        (_, Some(order)) => {
            let (sys, conf) = certify_complete(&built, &order, budgets.fuel)?;
            (sys, conf, TerminationEvidence::Order { order }, None)
        }
        (_, None) => {
            let (sys, conf) = certify_local_confluence(&built, budgets.fuel)?;
            (sys, conf, TerminationEvidence::NotFound, None)
        }
    };
    Ok(FamilyCertificate {
        tag,
        params: *params,
        system,
        confluence,
        termination,
        informational_order,
    })
}

/// Every tuple in `[1..=max]^4`, first exponent slowest.
pub fn grid(max: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
    let r = 1..=max;
    r.clone().flat_map(move |al| {
        let r = 1..=max;
        r.clone().flat_map(move |be| {
            let r = 1..=max;
            r.clone()
                .flat_map(move |ga| (1..=max).map(move |de| (al, be, ga, de)))
        })
    })
}
