//! Critical pairs, local confluence, and Knuth–Bendix completion.

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::rewrite::{verify_termination, ReductionOrder, RewritingSystem, Rule, DEFAULT_FUEL};
use crate::words::{occurrences, Word};

/// Where the two left-hand sides meet in the source word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairOverlap {
    /// A suffix of the first lhs of length `len` is a prefix of the second.
    SuffixPrefix { len: usize },
    /// The second lhs occurs inside the first at `position`.
    Containment { position: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriticalPair {
    pub source: Word,
    /// Reduct by the first rule, applied at position 0.
    pub left: Word,
    /// Reduct by the second rule, applied at `position`.
    pub right: Word,
    pub position: usize,
    pub rules: (usize, usize),
    pub overlap: PairOverlap,
}

fn pairs_between(rules: &[Rule], i: usize, j: usize, out: &mut Vec<CriticalPair>) {
    let (l1, r1) = (rules[i].lhs(), rules[i].rhs());
    let (l2, r2) = (rules[j].lhs(), rules[j].rhs());
    let (a, b) = (l1.letters(), l2.letters());
    for t in 1..a.len().min(b.len()) {
        if a[a.len() - t..] == b[..t] {
            let tail = Word::from_letters(&b[t..]).expect("letters");
            out.push(CriticalPair {
                source: l1.concat(&tail),
                left: r1.concat(&tail),
                right: l1.prefix(a.len() - t).concat(r2),
                position: a.len() - t,
                rules: (i, j),
                overlap: PairOverlap::SuffixPrefix { len: t },
            });
        }
    }
    if i != j && b.len() <= a.len() {
        for p in occurrences(a, b) {
            out.push(CriticalPair {
                source: l1.clone(),
                left: r1.clone(),
                right: l1.splice(p, b.len(), r2),
                position: p,
                rules: (i, j),
                overlap: PairOverlap::Containment { position: p },
            });
        }
    }
}

fn dedup(pairs: Vec<CriticalPair>) -> Vec<CriticalPair> {
    let mut seen = HashSet::new();
    pairs
        .into_iter()
        .filter(|p| {
            let (x, y) = if p.left <= p.right {
                (&p.left, &p.right)
            } else {
                (&p.right, &p.left)
            };
            seen.insert((p.source.clone(), x.clone(), y.clone()))
        })
        .collect()
}

/// One pair per suffix-prefix overlap of every ordered rule pair (a rule with
/// itself included) and per containment of one lhs in another, deduplicated
/// by source and reduct set.
pub fn critical_pairs(system: &RewritingSystem) -> Vec<CriticalPair> {
    let rules = system.rules();
    let mut out = Vec::new();
    for i in 0..rules.len() {
        for j in 0..rules.len() {
            pairs_between(rules, i, j, &mut out);
        }
    }
    dedup(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonJoinable {
    pub pair: CriticalPair,
    pub left_normal_form: Word,
    pub right_normal_form: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfluenceReport {
    pub pairs_checked: usize,
    pub joinable: bool,
    pub failures: Vec<NonJoinable>,
}

/// Normalizes both reducts of every critical pair.
pub fn check_local_confluence(system: &RewritingSystem, fuel: u64) -> Result<ConfluenceReport> {
    let pairs = critical_pairs(system);
    let checked: Vec<Option<NonJoinable>> = pairs
        .par_iter()
        .map(|pair| {
            let l = system.normalize(&pair.left, fuel)?;
            let r = system.normalize(&pair.right, fuel)?;
            Ok((l != r).then(|| NonJoinable {
                pair: pair.clone(),
                left_normal_form: l,
                right_normal_form: r,
            }))
        })
        .collect::<Result<_>>()?;
    let failures: Vec<NonJoinable> = checked.into_iter().flatten().collect();
    Ok(ConfluenceReport {
        pairs_checked: pairs.len(),
        joinable: failures.is_empty(),
        failures,
    })
}

/// Runs [`check_local_confluence`] and, when joinable, records it in the
/// returned system's certification.
pub fn certify_local_confluence(
    system: &RewritingSystem,
    fuel: u64,
) -> Result<(RewritingSystem, ConfluenceReport)> {
    let report = check_local_confluence(system, fuel)?;
    let sys = if report.joinable {
        let cert = system.certification().with_local_confluence();
        system.clone().with_certification(cert)
    } else {
        system.clone()
    };
    Ok((sys, report))
}

/// Termination by `order` plus local confluence; by Newman's lemma the result
/// is complete.
pub fn certify_complete(
    system: &RewritingSystem,
    order: &ReductionOrder,
    fuel: u64,
) -> Result<(RewritingSystem, ConfluenceReport)> {
    let terminating = verify_termination(system, order)?;
    certify_local_confluence(&terminating, fuel)
}

pub fn is_length_non_increasing(system: &RewritingSystem) -> bool {
    system
        .rules()
        .iter()
        .all(|r| r.lhs().len() >= r.rhs().len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CompletionLimits {
    pub max_rules: usize,
    pub max_steps: usize,
}

impl Default for CompletionLimits {
    fn default() -> Self {
        CompletionLimits {
            max_rules: 200,
            max_steps: 20_000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CompletionStats {
    pub pairs_processed: usize,
    pub rules_added: usize,
    pub rules_removed: usize,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum CompletionOutcome {
    Completed { system: RewritingSystem },
    LimitExceeded { rules_so_far: usize },
    Unorientable { lhs: Word, rhs: Word },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionReport {
    #[serde(flatten)]
    pub outcome: CompletionOutcome,
    pub order: ReductionOrder,
    pub limits: CompletionLimits,
    pub statistics: CompletionStats,
}

impl CompletionReport {
    pub fn system(&self) -> Option<&RewritingSystem> {
        match &self.outcome {
            CompletionOutcome::Completed { system } => Some(system),
            _ => None,
        }
    }
}

/// Knuth–Bendix completion with a FIFO equation queue and inter-reduction
/// after every added rule.
pub fn knuth_bendix(
    presentation: &Presentation,
    order: &ReductionOrder,
    limits: CompletionLimits,
) -> Result<CompletionReport> {
    if !order.covers(presentation.alphabet()) {
        let missing = presentation
            .alphabet()
            .letters()
            .iter()
            .find(|&&l| order.weight(l).is_none())
            .copied()
            .unwrap_or(b'?');
        return Err(Error::MissingWeight(missing as char));
    }
    let alphabet = presentation.alphabet().clone();
    let mut stats = CompletionStats::default();
    let mut rules: Vec<Rule> = Vec::new();
    let mut system = RewritingSystem::new(alphabet.clone(), Vec::new())?;
    let mut queue: VecDeque<(Word, Word)> = presentation.equations().iter().cloned().collect();
    let report = |outcome, stats| CompletionReport {
        outcome,
        order: order.clone(),
        limits,
        statistics: stats,
    };

    while let Some((u, v)) = queue.pop_front() {
        if stats.steps == limits.max_steps {
            return Ok(report(
                CompletionOutcome::LimitExceeded {
                    rules_so_far: rules.len(),
                },
                stats,
            ));
        }
        stats.steps += 1;
        stats.pairs_processed += 1;
        // every active rule decreases under `order`, so this terminates
        let u = system.normalize(&u, u64::MAX)?;
        let v = system.normalize(&v, u64::MAX)?;
        let (lhs, rhs) = match order.compare(&u, &v)? {
            Ordering::Equal => continue,
            Ordering::Greater => (u, v),
            Ordering::Less => (v, u),
        };
        let new_rule = Rule::new(lhs, rhs)?;

        // inter-reduce: rules whose lhs contains the new lhs go back to the queue
        let mut kept = Vec::with_capacity(rules.len() + 1);
        for r in rules.drain(..) {
            if r.lhs().contains_factor(new_rule.lhs()) {
                stats.rules_removed += 1;
                queue.push_back((r.lhs().clone(), r.rhs().clone()));
            } else {
                kept.push(r);
            }
        }
        kept.push(new_rule);
        stats.rules_added += 1;
        if kept.len() > limits.max_rules {
            return Ok(report(
                CompletionOutcome::LimitExceeded {
                    rules_so_far: kept.len(),
                },
                stats,
            ));
        }
        let provisional = RewritingSystem::new(alphabet.clone(), kept.clone())?;
        rules = kept
            .into_iter()
            .map(|r| {
                let rhs = provisional.normalize(r.rhs(), u64::MAX)?;
                Rule::new(r.lhs().clone(), rhs)
            })
            .collect::<Result<_>>()?;
        system = RewritingSystem::new(alphabet.clone(), rules.clone())?;

        let newest = rules.len() - 1;
        let mut pairs = Vec::new();
        for i in 0..rules.len() {
            pairs_between(&rules, newest, i, &mut pairs);
            if i != newest {
                pairs_between(&rules, i, newest, &mut pairs);
            }
        }
        queue.extend(dedup(pairs).into_iter().map(|p| (p.left, p.right)));
    }

    let (certified, conf) = certify_complete(&system, order, DEFAULT_FUEL)?;
    if !conf.joinable {
        return Err(Error::Mismatch(format!(
            "completion produced a system with {} non-joinable critical pairs",
            conf.failures.len()
        )));
    }
    Ok(report(
        CompletionOutcome::Completed { system: certified },
        stats,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::Certification;
    use crate::words::Alphabet;

    fn w(s: &str) -> Word {
        Word::parse_free(s).unwrap()
    }

    fn ab() -> Alphabet {
        Alphabet::parse("a b").unwrap()
    }

    fn hopf_system() -> RewritingSystem {
        RewritingSystem::from_pairs(
            &Alphabet::parse("a b x").unwrap(),
            &[
                ("ax^2b", "x"),
                ("ab", "x^2"),
                ("x^2bx", "b"),
                ("x^2b^2", "bxbx"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_self_overlap() {
        let sys = RewritingSystem::from_pairs(&ab(), &[("abab", "b")]).unwrap();
        let pairs = critical_pairs(&sys);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].source, w("ababab"));
        assert_eq!(
            (pairs[0].left.clone(), pairs[0].right.clone()),
            (w("bab"), w("ab^2"))
        );

        let report = check_local_confluence(&sys, DEFAULT_FUEL).unwrap();
        assert!(!report.joinable);
        let f = &report.failures[0];
        assert_eq!(
            (f.left_normal_form.clone(), f.right_normal_form.clone()),
            (w("bab"), w("ab^2"))
        );
    }

    #[test]
    fn no_overlap_relator() {
        let sys = RewritingSystem::from_pairs(&ab(), &[("abab^2", "b")]).unwrap();
        assert!(critical_pairs(&sys).is_empty());
    }

    #[test]
    fn hopf_system_pairs() {
        let sys = hopf_system();
        let pairs = critical_pairs(&sys);
        let p = pairs
            .iter()
            .find(|p| p.rules == (2, 2))
            .expect("x^2bx self-overlap");
        assert_eq!(p.source, w("x^2bx^2bx"));
        assert_eq!((p.left.clone(), p.right.clone()), (w("bxbx"), w("x^2b^2")));
        assert_eq!(sys.normalize(&p.right, 100).unwrap(), w("bxbx"));
        assert!(check_local_confluence(&sys, DEFAULT_FUEL).unwrap().joinable);
    }

    #[test]
    fn pairs_replay() {
        let sys = hopf_system();
        for p in critical_pairs(&sys) {
            let (i, j) = p.rules;
            assert_eq!(sys.apply(&p.source, i, 0), p.left);
            let pos = match p.overlap {
                PairOverlap::SuffixPrefix { len } => sys.rules()[i].lhs().len() - len,
                PairOverlap::Containment { position } => position,
            };
            assert_eq!(pos, p.position);
            assert_eq!(sys.apply(&p.source, j, p.position), p.right);
        }
    }

    #[test]
    fn containment_pairs() {
        let sys = RewritingSystem::from_pairs(&ab(), &[("aba", "b"), ("b", "a")]).unwrap();
        let pairs = critical_pairs(&sys);
        assert!(pairs
            .iter()
            .any(|p| p.overlap == PairOverlap::Containment { position: 1 }
                && p.source == w("aba")
                && p.right == w("aaa")));
    }

    #[test]
    fn empty_system_is_vacuously_confluent() {
        let sys = RewritingSystem::new(ab(), vec![]).unwrap();
        let r = check_local_confluence(&sys, 1).unwrap();
        assert!(r.joinable);
        assert_eq!(r.pairs_checked, 0);
    }

    #[test]
    fn certification_upgrades() {
        let sys = hopf_system();
        let order: ReductionOrder = "weights: a=4 b=1 x=2; precedence: x>b>a".parse().unwrap();
        let (cert, _) = certify_complete(&sys, &order, DEFAULT_FUEL).unwrap();
        assert!(cert.certification().is_complete());
        let (lc, _) = certify_local_confluence(&sys, DEFAULT_FUEL).unwrap();
        assert_eq!(lc.certification(), &Certification::LocallyConfluent);
    }

    #[test]
    fn completion_rederives_case_one() {
        let pres = Presentation::from_pairs(&ab(), &[("abab", "b")]).unwrap();
        let order = ReductionOrder::shortlex(&ab());
        let report = knuth_bendix(&pres, &order, CompletionLimits::default()).unwrap();
        let sys = report.system().expect("completed");
        let rules: Vec<String> = sys.rules().iter().map(|r| r.to_string()).collect();
        assert_eq!(rules, ["abab -> b", "ab^2 -> bab"]);
        assert!(sys.certification().is_complete());
        assert!(is_length_non_increasing(sys));
    }

    #[test]
    fn completion_limits() {
        let pres = Presentation::from_pairs(&ab(), &[("abab", "b")]).unwrap();
        let order = ReductionOrder::shortlex(&ab());
        let report = knuth_bendix(
            &pres,
            &order,
            CompletionLimits {
                max_rules: 1,
                max_steps: 1,
            },
        )
        .unwrap();
        assert!(matches!(
            report.outcome,
            CompletionOutcome::LimitExceeded { .. }
        ));
    }

    #[test]
    fn length_non_increasing() {
        assert!(is_length_non_increasing(&hopf_system()));
        let case3 = RewritingSystem::from_pairs(
            &Alphabet::parse("a b x").unwrap(),
            &[("ab^2", "x"), ("x^2", "b"), ("xb", "bx")],
        )
        .unwrap();
        assert!(is_length_non_increasing(&case3));
        let grow = RewritingSystem::from_pairs(&ab(), &[("b", "ab")]).unwrap();
        assert!(!is_length_non_increasing(&grow));
    }
}
