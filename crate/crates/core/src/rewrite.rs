//! Rules, rewriting systems, reduction to normal form, and termination
//! certificates by weighted shortlex orders.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::words::{Alphabet, Word};

/// Default step budget for normalization.
pub const DEFAULT_FUEL: u64 = 1_000_000;

/// A rule `lhs -> rhs` with non-empty `lhs` distinct from `rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Rule {
    lhs: Word,
    rhs: Word,
}

impl Rule {
    pub fn new(lhs: Word, rhs: Word) -> Result<Self> {
        if lhs.is_empty() {
            return Err(Error::EmptyLhs);
        }
        if lhs == rhs {
            return Err(Error::TrivialRule(lhs.to_string()));
        }
        Ok(Rule { lhs, rhs })
    }

    pub fn lhs(&self) -> &Word {
        &self.lhs
    }

    pub fn rhs(&self) -> &Word {
        &self.rhs
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

/// How far a system has been certified.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Certification {
    #[default]
    Uncertified,
    /// Every critical pair was checked joinable.
    LocallyConfluent,
    /// Every rule decreases under the stored order.
    Terminating(ReductionOrder),
    /// Both of the above; normal forms are unique.
    Complete(ReductionOrder),
}

impl Certification {
    pub fn is_complete(&self) -> bool {
        matches!(self, Certification::Complete(_))
    }

    pub fn order(&self) -> Option<&ReductionOrder> {
        match self {
            Certification::Terminating(o) | Certification::Complete(o) => Some(o),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Certification::Uncertified => "uncertified",
            Certification::LocallyConfluent => "locally-confluent",
            Certification::Terminating(_) => "terminating",
            Certification::Complete(_) => "complete",
        }
    }

    pub(crate) fn with_termination(&self, order: ReductionOrder) -> Self {
        match self {
            Certification::LocallyConfluent | Certification::Complete(_) => {
                Certification::Complete(order)
            }
            _ => Certification::Terminating(order),
        }
    }

    pub(crate) fn with_local_confluence(&self) -> Self {
        match self {
            Certification::Terminating(o) | Certification::Complete(o) => {
                Certification::Complete(o.clone())
            }
            _ => Certification::LocallyConfluent,
        }
    }
}

impl Serialize for Certification {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Certification", 2)?;
        st.serialize_field("level", self.label())?;
        st.serialize_field("order", &self.order())?;
        st.end()
    }
}

/// An alphabet with an ordered list of rules.
#[derive(Debug, Clone)]
pub struct RewritingSystem {
    alphabet: Alphabet,
    rules: Vec<Rule>,
    certification: Certification,
    // rule indices bucketed by the first letter of the lhs, ascending
    by_first: Vec<Vec<usize>>,
    max_lhs: usize,
}

impl PartialEq for RewritingSystem {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.rules == other.rules
            && self.certification == other.certification
    }
}

impl RewritingSystem {
    pub fn new(alphabet: Alphabet, rules: Vec<Rule>) -> Result<Self> {
        for (i, r) in rules.iter().enumerate() {
            alphabet.check(&r.lhs)?;
            alphabet.check(&r.rhs)?;
            if rules[..i].contains(r) {
                return Err(Error::DuplicateRule {
                    lhs: r.lhs.to_string(),
                    rhs: r.rhs.to_string(),
                });
            }
        }
        let mut by_first = vec![Vec::new(); 128];
        for (i, r) in rules.iter().enumerate() {
            by_first[r.lhs.letters()[0] as usize].push(i);
        }
        let max_lhs = rules.iter().map(|r| r.lhs.len()).max().unwrap_or(0);
        Ok(RewritingSystem {
            alphabet,
            rules,
            certification: Certification::Uncertified,
            by_first,
            max_lhs,
        })
    }

    /// Convenience constructor from `(lhs, rhs)` text pairs.
    pub fn from_pairs(alphabet: &Alphabet, pairs: &[(&str, &str)]) -> Result<Self> {
        let rules = pairs
            .iter()
            .map(|(l, r)| Rule::new(Word::parse(l, alphabet)?, Word::parse(r, alphabet)?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet.clone(), rules)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn certification(&self) -> &Certification {
        &self.certification
    }

    pub(crate) fn with_certification(mut self, certification: Certification) -> Self {
        self.certification = certification;
        self
    }

    /// Drops all certification state.
    pub fn uncertified(self) -> Self {
        self.with_certification(Certification::Uncertified)
    }

    /// The first rule (lowest index) whose lhs occurs at `pos`.
    fn rule_at(&self, w: &[u8], pos: usize) -> Option<usize> {
        self.by_first
            .get(w[pos] as usize)?
            .iter()
            .copied()
            .find(|&i| w[pos..].starts_with(self.rules[i].lhs.letters()))
    }

    /// Leftmost match at or after `from`.
    fn find_redex(&self, w: &[u8], from: usize) -> Option<(usize, usize)> {
        (from..w.len()).find_map(|p| self.rule_at(w, p).map(|i| (i, p)))
    }

    pub fn is_irreducible(&self, w: &Word) -> bool {
        self.find_redex(w.letters(), 0).is_none()
    }

    /// Applies rule `index` at `pos`, which must be a match.
    pub fn apply(&self, w: &Word, index: usize, pos: usize) -> Word {
        let rule = &self.rules[index];
        debug_assert!(w.is_factor_at(&rule.lhs, pos));
        w.splice(pos, rule.lhs.len(), &rule.rhs)
    }

    /// One leftmost rewrite; `None` when `w` is irreducible.
    pub fn rewrite_step(&self, w: &Word) -> Option<(Word, usize, usize)> {
        let (i, p) = self.find_redex(w.letters(), 0)?;
        Some((self.apply(w, i, p), i, p))
    }

    fn reduce(
        &self,
        w: &Word,
        fuel: u64,
        mut on_step: impl FnMut(usize, usize, &[u8]),
    ) -> Result<Word> {
        let mut cur = w.letters().to_vec();
        let mut steps = 0u64;
        let mut from = 0;
        while let Some((i, p)) = self.find_redex(&cur, from) {
            if steps == fuel {
                return Err(Error::FuelExhausted { steps });
            }
            steps += 1;
            let rule = &self.rules[i];
            cur.splice(p..p + rule.lhs.len(), rule.rhs.letters().iter().copied());
            on_step(i, p, &cur);
            // positions left of here cannot host a match lying wholly in the untouched prefix
            from = p.saturating_sub(self.max_lhs.saturating_sub(1));
        }
        Ok(Word::from_vec(cur))
    }

    /// Reduces `w` to normal form, leftmost position first and lowest rule
    /// index among rules matching there.
    pub fn normal_form(&self, w: &Word, fuel: u64) -> Result<(Word, ReductionTrace)> {
        let mut steps = Vec::new();
        let nf = self.reduce(w, fuel, |rule, position, cur| {
            steps.push(TraceStep {
                rule,
                position,
                word: Word::from_vec(cur.to_vec()),
            })
        })?;
        Ok((
            nf,
            ReductionTrace {
                start: w.clone(),
                steps,
            },
        ))
    }

    /// [`normal_form`](Self::normal_form) without recording a trace.
    pub fn normalize(&self, w: &Word, fuel: u64) -> Result<Word> {
        self.reduce(w, fuel, |_, _, _| {})
    }

    /// Number of rewrite steps to normal form.
    pub fn derivation_length(&self, w: &Word, fuel: u64) -> Result<u64> {
        let mut n = 0;
        self.reduce(w, fuel, |_, _, _| n += 1)?;
        Ok(n)
    }

    /// Parses the system file format: `letters: a b x` followed by one
    /// `lhs -> rhs` per line. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let (alphabet, body) = parse_header(text)?;
        let mut rules = Vec::new();
        for (line, content) in body {
            let (l, r) = content.split_once("->").ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `lhs -> rhs`, got `{content}`"),
            })?;
            let at = |e: Error| Error::Parse {
                line,
                message: e.to_string(),
            };
            let lhs = Word::parse(l, &alphabet).map_err(at)?;
            let rhs = Word::parse(r, &alphabet).map_err(at)?;
            rules.push(Rule::new(lhs, rhs).map_err(at)?);
        }
        Self::new(alphabet, rules)
    }
}

impl fmt::Display for RewritingSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "letters: {}", self.alphabet)?;
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

impl Serialize for RewritingSystem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("RewritingSystem", 3)?;
        st.serialize_field("letters", &self.alphabet.to_string())?;
        let rules: Vec<String> = self.rules.iter().map(Rule::to_string).collect();
        st.serialize_field("rules", &rules)?;
        st.serialize_field("certification", &self.certification)?;
        st.end()
    }
}

/// Splits a `letters:` header from the remaining numbered, non-comment lines.
pub(crate) fn parse_header(text: &str) -> Result<(Alphabet, Vec<(usize, &str)>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing `letters:` header".into(),
    })?;
    let letters = header
        .strip_prefix("letters:")
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("expected `letters: ...`, got `{header}`"),
        })?;
    let alphabet = Alphabet::parse(letters).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })?;
    Ok((alphabet, lines.collect()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub rule: usize,
    pub position: usize,
    /// The word after this step.
    pub word: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionTrace {
    pub start: Word,
    pub steps: Vec<TraceStep>,
}

impl ReductionTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end(&self) -> &Word {
        self.steps.last().map_or(&self.start, |s| &s.word)
    }

    /// Checks that each step is one application of the recorded rule at the
    /// recorded position.
    pub fn replays(&self, system: &RewritingSystem) -> bool {
        let mut cur = &self.start;
        for step in &self.steps {
            let Some(rule) = system.rules().get(step.rule) else {
                return false;
            };
            if !cur.is_factor_at(rule.lhs(), step.position)
                || system.apply(cur, step.rule, step.position) != step.word
            {
                return false;
            }
            cur = &step.word;
        }
        true
    }
}

/// Weighted shortlex: compare total weight, then length, then the leftmost
/// differing letter by precedence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReductionOrder {
    weights: Vec<(u8, u32)>,
    /// Highest precedence first.
    precedence: Vec<u8>,
}

impl ReductionOrder {
    pub fn new(weights: &[(char, u32)], precedence: &[char]) -> Result<Self> {
        let mut ws: Vec<(u8, u32)> = Vec::with_capacity(weights.len());
        for &(c, w) in weights {
            if !c.is_ascii_alphabetic() {
                return Err(Error::InvalidLetter(c));
            }
            if w == 0 {
                return Err(Error::InvalidOrder(format!(
                    "weight of '{c}' must be at least 1"
                )));
            }
            if ws.iter().any(|&(l, _)| l == c as u8) {
                return Err(Error::InvalidOrder(format!("letter '{c}' weighted twice")));
            }
            ws.push((c as u8, w));
        }
        let prec: Vec<u8> = precedence.iter().map(|&c| c as u8).collect();
        let mut sorted_prec = prec.clone();
        sorted_prec.sort_unstable();
        sorted_prec.dedup();
        let mut sorted_w: Vec<u8> = ws.iter().map(|&(l, _)| l).collect();
        sorted_w.sort_unstable();
        if sorted_prec.len() != prec.len() || sorted_prec != sorted_w {
            return Err(Error::InvalidOrder(
                "precedence must list every weighted letter exactly once".into(),
            ));
        }
        Ok(ReductionOrder {
            weights: ws,
            precedence: prec,
        })
    }

    /// All weights 1 with precedence given by alphabet order, first letter highest.
    pub fn shortlex(alphabet: &Alphabet) -> Self {
        ReductionOrder {
            weights: alphabet.letters().iter().map(|&l| (l, 1)).collect(),
            precedence: alphabet.letters().to_vec(),
        }
    }

    pub fn weight(&self, letter: u8) -> Option<u32> {
        self.weights
            .iter()
            .find(|&&(l, _)| l == letter)
            .map(|&(_, w)| w)
    }

    fn rank(&self, letter: u8) -> Option<usize> {
        // higher rank = higher precedence
        self.precedence
            .iter()
            .position(|&l| l == letter)
            .map(|i| self.precedence.len() - i)
    }

    pub fn covers(&self, alphabet: &Alphabet) -> bool {
        alphabet.letters().iter().all(|&l| self.weight(l).is_some())
    }

    pub fn word_weight(&self, w: &Word) -> Result<u64> {
        w.letters().iter().try_fold(0u64, |acc, &l| {
            self.weight(l)
                .map(|x| acc + x as u64)
                .ok_or(Error::MissingWeight(l as char))
        })
    }

    pub fn compare(&self, u: &Word, v: &Word) -> Result<Ordering> {
        let by_weight = self.word_weight(u)?.cmp(&self.word_weight(v)?);
        if by_weight != Ordering::Equal {
            return Ok(by_weight);
        }
        if u.len() != v.len() {
            return Ok(u.len().cmp(&v.len()));
        }
        for (&x, &y) in u.letters().iter().zip(v.letters()) {
            if x != y {
                let rx = self.rank(x).ok_or(Error::MissingWeight(x as char))?;
                let ry = self.rank(y).ok_or(Error::MissingWeight(y as char))?;
                return Ok(rx.cmp(&ry));
            }
        }
        Ok(Ordering::Equal)
    }
}

pub fn compare(order: &ReductionOrder, u: &Word, v: &Word) -> Result<Ordering> {
    order.compare(u, v)
}

impl fmt::Display for ReductionOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("weights:")?;
        for &(l, w) in &self.weights {
            write!(f, " {}={w}", l as char)?;
        }
        f.write_str("; precedence: ")?;
        for (i, &l) in self.precedence.iter().enumerate() {
            if i > 0 {
                f.write_str(">")?;
            }
            write!(f, "{}", l as char)?;
        }
        Ok(())
    }
}

impl FromStr for ReductionOrder {
    type Err = Error;

    /// Parses `weights: a=4 b=1 x=2; precedence: x>b>a`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidOrder(format!("{m} in `{s}`"));
        let (w_part, p_part) = s.split_once(';').ok_or_else(|| bad("missing ';'"))?;
        let w_part = w_part
            .trim()
            .strip_prefix("weights:")
            .ok_or_else(|| bad("missing `weights:`"))?;
        let p_part = p_part
            .trim()
            .strip_prefix("precedence:")
            .ok_or_else(|| bad("missing `precedence:`"))?;
        let mut weights = Vec::new();
        for item in w_part.split_whitespace() {
            let (l, w) = item
                .split_once('=')
                .ok_or_else(|| bad("expected letter=weight"))?;
            let mut chars = l.chars();
            let (Some(c), None) = (chars.next(), chars.next()) else {
                return Err(bad("letters are single characters"));
            };
            let w: u32 = w
                .parse()
                .map_err(|_| bad("weight is not a positive integer"))?;
            weights.push((c, w));
        }
        let precedence: Vec<char> = p_part
            .split('>')
            .map(|p| {
                let p = p.trim();
                let mut chars = p.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => Ok(c),
                    _ => Err(bad("precedence entries are single letters")),
                }
            })
            .collect::<Result<_>>()?;
        ReductionOrder::new(&weights, &precedence)
    }
}

impl Serialize for ReductionOrder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Certifies termination: every rule must strictly decrease under `order`.
/// Weighted shortlex is compatible with concatenation, so rule-wise descent
/// suffices. Returns the system with its certification upgraded.
pub fn verify_termination(
    system: &RewritingSystem,
    order: &ReductionOrder,
) -> Result<RewritingSystem> {
    for (index, rule) in system.rules().iter().enumerate() {
        if order.compare(rule.lhs(), rule.rhs())? != Ordering::Greater {
            return Err(Error::NotDecreasing {
                index,
                lhs: rule.lhs().to_string(),
                rhs: rule.rhs().to_string(),
            });
        }
    }
    let cert = system.certification().with_termination(order.clone());
    Ok(system.clone().with_certification(cert))
}

/// Searches weighted shortlex orders with every weight in `[1, max_weight]`.
pub fn find_termination_order(system: &RewritingSystem, max_weight: u32) -> Option<ReductionOrder> {
    let caps = vec![max_weight; system.alphabet().len()];
    find_termination_order_with_caps(system, &caps)
}

/// Like [`find_termination_order`] with a separate weight cap per letter,
/// listed in alphabet order.
///
/// Weight vectors are enumerated odometer-style (first letter slowest) and,
/// for each, precedence permutations in lexicographic order of the alphabet;
/// the first certifying order is returned.
pub fn find_termination_order_with_caps(
    system: &RewritingSystem,
    caps: &[u32],
) -> Option<ReductionOrder> {
    let letters = system.alphabet().letters();
    assert_eq!(caps.len(), letters.len(), "one weight cap per letter");
    if caps.contains(&0) {
        return None;
    }
    let idx = |l: u8| {
        letters
            .iter()
            .position(|&x| x == l)
            .expect("letter in alphabet")
    };
    // per-rule letter-count difference lhs - rhs
    let deltas: Vec<Vec<i64>> = system
        .rules()
        .iter()
        .map(|r| {
            let mut d = vec![0i64; letters.len()];
            r.lhs().letters().iter().for_each(|&l| d[idx(l)] += 1);
            r.rhs().letters().iter().for_each(|&l| d[idx(l)] -= 1);
            d
        })
        .collect();

    let mut weights = vec![1u32; letters.len()];
    loop {
        let mut ties = Vec::new();
        let feasible = deltas.iter().enumerate().all(|(i, d)| {
            let diff: i64 = d.iter().zip(&weights).map(|(&c, &w)| c * w as i64).sum();
            if diff == 0 {
                ties.push(i);
            }
            diff >= 0
        });
        if feasible {
            if let Some(prec) = find_precedence(system, &ties, letters) {
                let ws: Vec<(char, u32)> = letters
                    .iter()
                    .zip(&weights)
                    .map(|(&l, &w)| (l as char, w))
                    .collect();
                let prec: Vec<char> = prec.iter().map(|&l| l as char).collect();
                return Some(ReductionOrder::new(&ws, &prec).expect("well-formed order"));
            }
        }
        // odometer, last letter fastest
        let mut i = letters.len();
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if weights[i] < caps[i] {
                weights[i] += 1;
                break;
            }
            weights[i] = 1;
        }
    }
}

/// Finds a precedence orienting every weight-tied rule, trying permutations
/// in lexicographic order.
fn find_precedence(system: &RewritingSystem, ties: &[usize], letters: &[u8]) -> Option<Vec<u8>> {
    let mut perm: Vec<usize> = (0..letters.len()).collect();
    loop {
        let prec: Vec<u8> = perm.iter().map(|&i| letters[i]).collect();
        let rank = |l: u8| letters.len() - prec.iter().position(|&x| x == l).unwrap_or(0);
        let ok = ties.iter().all(|&i| {
            let r = &system.rules()[i];
            match r.lhs().len().cmp(&r.rhs().len()) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => r
                    .lhs()
                    .letters()
                    .iter()
                    .zip(r.rhs().letters())
                    .find(|(x, y)| x != y)
                    .is_some_and(|(&x, &y)| rank(x) > rank(y)),
            }
        });
        if ok {
            return Some(prec);
        }
        if !next_permutation(&mut perm) {
            return None;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len())
        .rev()
        .find(|&j| p[j] > p[i - 1])
        .expect("pivot exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Outcome of running random words to normal form under a step budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmpiricalTermination {
    pub samples: usize,
    pub max_len: usize,
    pub step_budget: u64,
    pub seed: u64,
    /// Every sampled derivation halted within the budget.
    pub halted: bool,
    pub longest_derivation: u64,
}

/// Samples `samples` words of length `0..=max_len` uniformly letter by letter
/// from a ChaCha stream seeded with `seed`, and reduces each with `step_budget`.
/// Evidence only: it cannot establish termination.
pub fn empirical_termination(
    system: &RewritingSystem,
    samples: usize,
    max_len: usize,
    step_budget: u64,
    seed: u64,
) -> EmpiricalTermination {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let letters = system.alphabet().letters();
    let mut halted = true;
    let mut longest = 0;
    for _ in 0..samples {
        let len = rng.gen_range(0..=max_len);
        let w: Vec<u8> = (0..len)
            .map(|_| letters[rng.gen_range(0..letters.len())])
            .collect();
        match system.derivation_length(&Word::from_vec(w), step_budget) {
            Ok(n) => longest = longest.max(n),
            Err(_) => halted = false,
        }
    }
    EmpiricalTermination {
        samples,
        max_len,
        step_budget,
        seed,
        halted,
        longest_derivation: longest,
    }
}
