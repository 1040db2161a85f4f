//! Bounded word-problem oracle over a presentation, with explicit derivation
//! certificates, and empirical Dehn/space function measurement.
//!
//! The oracle explores the graph whose vertices are words of length at most a
//! cap and whose edges are single applications of a defining relation, in
//! either direction. It never consults a rewriting system, so it is an
//! independent check on anything derived from one.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::rewrite::RewritingSystem;
use crate::words::{occurrences, Word};

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Replace an occurrence of the equation's left side by its right side.
    LeftToRight,
    RightToLeft,
}

impl Direction {
    fn flip(self) -> Self {
        match self {
            Direction::LeftToRight => Direction::RightToLeft,
            Direction::RightToLeft => Direction::LeftToRight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Application {
    pub equation: usize,
    pub direction: Direction,
    pub position: usize,
}

fn sides(pres: &Presentation, app: Application) -> (&Word, &Word) {
    let (l, r) = &pres.equations()[app.equation];
    match app.direction {
        Direction::LeftToRight => (l, r),
        Direction::RightToLeft => (r, l),
    }
}

/// Applies one relation; `None` if the source side does not occur at the position.
pub fn apply_relation(pres: &Presentation, w: &Word, app: Application) -> Option<Word> {
    if app.equation >= pres.equations().len() {
        return None;
    }
    let (from, to) = sides(pres, app);
    (app.position <= w.len() && w.is_factor_at(from, app.position))
        .then(|| w.splice(app.position, from.len(), to))
}

/// Every single-relation neighbour of `w` no longer than `cap`.
pub fn neighbours(pres: &Presentation, w: &Word, cap: usize) -> Vec<(Word, Application)> {
    let mut out = Vec::new();
    for (equation, (l, r)) in pres.equations().iter().enumerate() {
        if l == r {
            continue;
        }
        for direction in [Direction::LeftToRight, Direction::RightToLeft] {
            let (from, to) = match direction {
                Direction::LeftToRight => (l, r),
                Direction::RightToLeft => (r, l),
            };
            if w.len() - from.len().min(w.len()) + to.len() > cap {
                continue;
            }
            let positions: Vec<usize> = if from.is_empty() {
                (0..=w.len()).collect()
            } else {
                occurrences(w.letters(), from.letters()).collect()
            };
            for position in positions {
                out.push((
                    w.splice(position, from.len(), to),
                    Application {
                        equation,
                        direction,
                        position,
                    },
                ));
            }
        }
    }
    out
}

/// A derivation `w₀ ∼ w₁ ∼ … ∼ w_d` with `d` relation applications and `s`
/// the longest intermediate word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EqualityCertificate {
    pub chain: Vec<Word>,
    pub applications: Vec<Application>,
    pub d: usize,
    pub s: usize,
}

impl EqualityCertificate {
    fn from_chain(chain: Vec<Word>, applications: Vec<Application>) -> Self {
        let d = applications.len();
        let s = chain.iter().map(Word::len).max().unwrap_or(0);
        EqualityCertificate {
            chain,
            applications,
            d,
            s,
        }
    }

    /// Re-applies every recorded application and checks the chain and the
    /// `d`/`s` fields.
    pub fn replays(&self, pres: &Presentation) -> bool {
        if self.chain.len() != self.applications.len() + 1 || self.d != self.applications.len() {
            return false;
        }
        let s = self.chain.iter().map(Word::len).max().unwrap_or(0);
        s == self.s
            && self
                .applications
                .iter()
                .zip(self.chain.windows(2))
                .all(|(&app, pair)| apply_relation(pres, &pair[0], app).as_ref() == Some(&pair[1]))
    }

    pub fn start(&self) -> &Word {
        &self.chain[0]
    }

    pub fn end(&self) -> &Word {
        self.chain.last().expect("chain is non-empty")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum OracleOutcome {
    Equal {
        certificate: EqualityCertificate,
    },
    /// The bounded component of `x` was exhausted without reaching `y`.
    UnequalWithinBound,
    /// The node budget ran out first.
    Inconclusive,
}

impl OracleOutcome {
    pub fn certificate(&self) -> Option<&EqualityCertificate> {
        match self {
            OracleOutcome::Equal { certificate } => Some(certificate),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            OracleOutcome::Equal { .. } => "equal",
            OracleOutcome::UnequalWithinBound => "unequal-within-bound",
            OracleOutcome::Inconclusive => "inconclusive",
        }
    }
}

const ROOT: u32 = u32::MAX;

struct Tree {
    index: HashMap<Word, u32>,
    words: Vec<Word>,
    parent: Vec<(u32, Option<Application>)>,
    depth: Vec<u32>,
    frontier: Vec<u32>,
}

impl Tree {
    fn new(root: &Word) -> Self {
        let mut index = HashMap::new();
        index.insert(root.clone(), 0);
        Tree {
            index,
            words: vec![root.clone()],
            parent: vec![(ROOT, None)],
            depth: vec![0],
            frontier: vec![0],
        }
    }

    fn add(&mut self, w: Word, parent: u32, app: Application) -> u32 {
        let id = self.words.len() as u32;
        self.index.insert(w.clone(), id);
        self.words.push(w);
        self.parent.push((parent, Some(app)));
        self.depth.push(self.depth[parent as usize] + 1);
        id
    }

    /// Path from the root to `id`, as words and the applications leading to each.
    fn path(&self, mut id: u32) -> (Vec<Word>, Vec<Application>) {
        let mut words = vec![self.words[id as usize].clone()];
        let mut apps = Vec::new();
        while let (p, Some(app)) = self.parent[id as usize] {
            words.push(self.words[p as usize].clone());
            apps.push(app);
            id = p;
        }
        words.reverse();
        apps.reverse();
        (words, apps)
    }
}

/// Bidirectional breadth-first search for a derivation from `x` to `y`
/// through words of length at most `bound`. An `Equal` answer carries a
/// derivation with the fewest applications among those within the bound.
pub fn equal_in_monoid(
    pres: &Presentation,
    x: &Word,
    y: &Word,
    bound: usize,
    node_budget: usize,
) -> OracleOutcome {
    if x == y {
        return OracleOutcome::Equal {
            certificate: EqualityCertificate::from_chain(vec![x.clone()], vec![]),
        };
    }
    if x.len() > bound || y.len() > bound {
        return OracleOutcome::UnequalWithinBound;
    }
    let mut sides = [Tree::new(x), Tree::new(y)];
    loop {
        if sides[0].frontier.is_empty() || sides[1].frontier.is_empty() {
            return OracleOutcome::UnequalWithinBound;
        }
        let this = usize::from(sides[1].frontier.len() < sides[0].frontier.len());
        let other = 1 - this;
        let frontier = std::mem::take(&mut sides[this].frontier);
        let mut next = Vec::new();
        // (total length, id in `this`, id in `other`)
        let mut best: Option<(u32, u32, u32)> = None;
        for id in frontier {
            let w = sides[this].words[id as usize].clone();
            for (m, app) in neighbours(pres, &w, bound) {
                if sides[this].index.contains_key(&m) {
                    continue;
                }
                let other_id = sides[other].index.get(&m).copied();
                let new_id = sides[this].add(m, id, app);
                next.push(new_id);
                if let Some(o) = other_id {
                    let total = sides[this].depth[new_id as usize] + sides[other].depth[o as usize];
                    if best.is_none_or(|(t, _, _)| total < t) {
                        best = Some((total, new_id, o));
                    }
                }
            }
        }
        if let Some((_, a, b)) = best {
            let (ia, ib) = if this == 0 { (a, b) } else { (b, a) };
            return OracleOutcome::Equal {
                certificate: join(&sides[0], ia, &sides[1], ib),
            };
        }
        sides[this].frontier = next;
        if sides[0].words.len() + sides[1].words.len() > node_budget {
            return OracleOutcome::Inconclusive;
        }
    }
}

fn join(from_x: &Tree, ix: u32, from_y: &Tree, iy: u32) -> EqualityCertificate {
    let (mut chain, mut apps) = from_x.path(ix);
    let (ywords, yapps) = from_y.path(iy);
    // walk the y-tree path backwards, inverting each application
    for (w, app) in ywords.iter().rev().skip(1).zip(yapps.iter().rev()) {
        chain.push(w.clone());
        apps.push(Application {
            direction: app.direction.flip(),
            ..*app
        });
    }
    EqualityCertificate::from_chain(chain, apps)
}

/// Oracle settings for checks that derive their length cap from the words
/// being compared: the cap starts at `max(|x|,|y|) + slack` and the slack is
/// doubled `deepenings` times before giving up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleConfig {
    /// Defaults to twice the longest relation side.
    pub slack: Option<usize>,
    pub deepenings: u32,
    pub node_budget: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            slack: None,
            deepenings: 2,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

impl OracleConfig {
    pub fn base_slack(&self, pres: &Presentation) -> usize {
        self.slack.unwrap_or(2 * pres.max_side_len())
    }

    /// The caps tried for a pair of words, in order.
    pub fn caps(&self, pres: &Presentation, x: &Word, y: &Word) -> Vec<usize> {
        let base = x.len().max(y.len());
        let slack = self.base_slack(pres);
        (0..=self.deepenings).map(|i| base + (slack << i)).collect()
    }
}

/// Result of an oracle run with iterative deepening.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeepenedOutcome {
    pub outcome: OracleOutcome,
    /// The cap of the last run.
    pub bound: usize,
}

/// Runs [`equal_in_monoid`] with each cap from [`OracleConfig::caps`] until
/// one finds a derivation. A final `UnequalWithinBound` is reported as
/// `Inconclusive`, since a larger cap might still connect the words.
pub fn equal_deepening(
    pres: &Presentation,
    x: &Word,
    y: &Word,
    config: &OracleConfig,
) -> DeepenedOutcome {
    let mut last = DeepenedOutcome {
        outcome: OracleOutcome::Inconclusive,
        bound: 0,
    };
    for bound in config.caps(pres, x, y) {
        let outcome = equal_in_monoid(pres, x, y, bound, config.node_budget);
        match outcome {
            OracleOutcome::Equal { .. } => return DeepenedOutcome { outcome, bound },
            OracleOutcome::Inconclusive => {
                return DeepenedOutcome {
                    outcome: OracleOutcome::Inconclusive,
                    bound,
                }
            }
            OracleOutcome::UnequalWithinBound => {
                last = DeepenedOutcome {
                    outcome: OracleOutcome::Inconclusive,
                    bound,
                }
            }
        }
    }
    last
}

/// Finds a derivation minimizing the longest intermediate word, by trying
/// caps `max(|x|,|y|), …, max_bound` in turn. The returned certificate's `s`
/// is optimal among derivations within `max_bound`; if any smaller cap was
/// cut off by the node budget the answer is `Inconclusive`.
pub fn space_minimal(
    pres: &Presentation,
    x: &Word,
    y: &Word,
    max_bound: usize,
    node_budget: usize,
) -> OracleOutcome {
    for cap in x.len().max(y.len())..=max_bound {
        match equal_in_monoid(pres, x, y, cap, node_budget) {
            OracleOutcome::UnequalWithinBound => continue,
            other => return other,
        }
    }
    OracleOutcome::UnequalWithinBound
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SampleMode {
    Exhaustive,
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DehnConfig {
    /// Extra length allowed above `n`; defaults to twice the longest relation side.
    pub slack: Option<usize>,
    /// Node budget per explored equality class.
    pub node_budget: usize,
    /// Largest `n` accepted in exhaustive mode.
    pub exhaustive_ceiling: usize,
}

impl Default for DehnConfig {
    fn default() -> Self {
        DehnConfig {
            slack: None,
            node_budget: DEFAULT_NODE_BUDGET,
            exhaustive_ceiling: 14,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DehnSample {
    pub n: usize,
    pub dehn: usize,
    pub space: usize,
    pub pairs_examined: usize,
    pub classes: usize,
    pub exhaustive: bool,
    pub bound: usize,
    /// A pair attaining `dehn`, when it is positive.
    pub dehn_witness: Option<(Word, Word)>,
}

/// The component of `start` in the bounded relation graph, with adjacency.
struct Component {
    words: Vec<Word>,
    adj: Vec<Vec<u32>>,
}

fn explore(pres: &Presentation, start: &Word, cap: usize, budget: usize) -> Option<Component> {
    let mut index: HashMap<Word, u32> = HashMap::new();
    let mut words = vec![start.clone()];
    let mut adj: Vec<Vec<u32>> = vec![Vec::new()];
    index.insert(start.clone(), 0);
    let mut queue = VecDeque::from([0u32]);
    while let Some(id) = queue.pop_front() {
        let w = words[id as usize].clone();
        let mut nbrs = Vec::new();
        for (m, _) in neighbours(pres, &w, cap) {
            let mid = match index.get(&m) {
                Some(&mid) => mid,
                None => {
                    if words.len() >= budget {
                        return None;
                    }
                    let mid = words.len() as u32;
                    index.insert(m.clone(), mid);
                    words.push(m);
                    adj.push(Vec::new());
                    queue.push_back(mid);
                    mid
                }
            };
            nbrs.push(mid);
        }
        nbrs.sort_unstable();
        nbrs.dedup();
        adj[id as usize] = nbrs;
    }
    Some(Component { words, adj })
}

fn bfs_distances(adj: &[Vec<u32>], src: u32) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    dist[src as usize] = 0;
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u as usize] {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = dist[u as usize] + 1;
                q.push_back(v);
            }
        }
    }
    dist
}

/// Smallest length `L` such that all `members` are connected through words
/// of length at most `L`.
fn bottleneck(comp: &Component, members: &[u32]) -> usize {
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    let n = comp.words.len();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by_key(|&i| comp.words[i as usize].len());
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut active = vec![false; n];
    let floor = members
        .iter()
        .map(|&m| comp.words[m as usize].len())
        .max()
        .unwrap_or(0);
    let mut i = 0;
    while i < n {
        let level = comp.words[order[i] as usize].len();
        while i < n && comp.words[order[i] as usize].len() == level {
            let u = order[i];
            active[u as usize] = true;
            for &v in &comp.adj[u as usize] {
                if active[v as usize] {
                    let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                    parent[ru as usize] = rv;
                }
            }
            i += 1;
        }
        if level >= floor {
            let root = find(&mut parent, members[0]);
            if members.iter().all(|&m| find(&mut parent, m) == root) {
                return level;
            }
        }
    }
    unreachable!("members of one component are connected at the full cap")
}

struct ClassMetrics {
    dehn: usize,
    space: usize,
    pairs: usize,
    witness: Option<(Word, Word)>,
}

fn class_metrics(
    pres: &Presentation,
    seed: &Word,
    members: &HashSet<Word>,
    cap: usize,
    budget: usize,
) -> ClassMetrics {
    let comp = explore(pres, seed, cap, budget).expect("class explored once within budget");
    let ids: Vec<u32> = (0..comp.words.len() as u32)
        .filter(|&i| members.contains(&comp.words[i as usize]))
        .collect();
    let mut dehn = 0;
    let mut witness = None;
    for &m in &ids {
        let dist = bfs_distances(&comp.adj, m);
        for &o in &ids {
            let d = dist[o as usize] as usize;
            if d > dehn {
                dehn = d;
                witness = Some((
                    comp.words[m as usize].clone(),
                    comp.words[o as usize].clone(),
                ));
            }
        }
    }
    ClassMetrics {
        dehn,
        space: bottleneck(&comp, &ids),
        pairs: ids.len() * (ids.len() - 1) / 2,
        witness,
    }
}

/// Measures `𝐝ₙ` and `𝐬𝐩ₙ` over words of length at most `n`: the words are
/// partitioned into equality classes by exploring bounded components, then
/// `d` and `s` are computed exactly within the bound for every pair in a class.
/// Singleton classes contribute `d = 0` and `s = |w|`.
pub fn dehn_sample(
    pres: &Presentation,
    n: usize,
    mode: &SampleMode,
    config: &DehnConfig,
) -> Result<DehnSample> {
    let words: Vec<Word> = match mode {
        SampleMode::Exhaustive => {
            if n > config.exhaustive_ceiling {
                return Err(Error::Mismatch(format!(
                    "exhaustive sampling limited to n <= {}",
                    config.exhaustive_ceiling
                )));
            }
            pres.alphabet().words_up_to(n).collect()
        }
        SampleMode::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let letters = pres.alphabet().letters();
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for _ in 0..*count {
                let len = rng.gen_range(0..=n);
                let v: Vec<u8> = (0..len)
                    .map(|_| letters[rng.gen_range(0..letters.len())])
                    .collect();
                let w = Word::from_vec(v);
                if seen.insert(w.clone()) {
                    out.push(w);
                }
            }
            out
        }
    };
    let cap = n + config.slack.unwrap_or(2 * pres.max_side_len());
    let targets: HashSet<Word> = words.iter().cloned().collect();
    let mut assigned: HashSet<Word> = HashSet::new();
    let mut classes: Vec<(Word, HashSet<Word>)> = Vec::new();
    let mut complete = matches!(mode, SampleMode::Exhaustive);
    let mut space = 0;
    for w in &words {
        if assigned.contains(w) {
            continue;
        }
        space = space.max(w.len());
        let Some(comp) = explore(pres, w, cap, config.node_budget) else {
            complete = false;
            assigned.insert(w.clone());
            continue;
        };
        let members: HashSet<Word> = comp
            .words
            .into_iter()
            .filter(|m| targets.contains(m) && !assigned.contains(m))
            .collect();
        assigned.extend(members.iter().cloned());
        if members.len() > 1 {
            classes.push((w.clone(), members));
        }
    }
    let n_classes = classes.len();
    let metrics: Vec<ClassMetrics> = classes
        .par_iter()
        .map(|(seed, members)| class_metrics(pres, seed, members, cap, config.node_budget))
        .collect();
    let mut sample = DehnSample {
        n,
        dehn: 0,
        space,
        pairs_examined: 0,
        classes: n_classes + (assigned.len() - classes.iter().map(|(_, m)| m.len()).sum::<usize>()),
        exhaustive: complete,
        bound: cap,
        dehn_witness: None,
    };
    for m in metrics {
        sample.pairs_examined += m.pairs;
        sample.space = sample.space.max(m.space);
        if m.dehn > sample.dehn {
            sample.dehn = m.dehn;
            sample.dehn_witness = m.witness;
        }
    }
    Ok(sample)
}

/// [`dehn_sample`] for every `n` in `1..=max_n`.
pub fn dehn_table(
    pres: &Presentation,
    max_n: usize,
    mode: &SampleMode,
    config: &DehnConfig,
) -> Result<Vec<DehnSample>> {
    (1..=max_n)
        .map(|n| dehn_sample(pres, n, mode, config))
        .collect()
}

/// All irreducible words of length at most `max_len` in shortlex order with
/// respect to the alphabet order. For a complete system these are exactly
/// the distinct elements of the monoid of that length.
pub fn enumerate_elements(
    system: &RewritingSystem,
    max_len: usize,
    allow_uncertified: bool,
) -> Result<Vec<Word>> {
    if !system.certification().is_complete() && !allow_uncertified {
        return Err(Error::Uncertified);
    }
    let letters = system.alphabet().letters();
    let mut out = vec![Word::empty()];
    let mut level = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &level {
            for &c in letters {
                let cand = w.concat(&Word::from_vec(vec![c]));
                // w is irreducible, so only a suffix can be a new redex
                let reducible = system
                    .rules()
                    .iter()
                    .any(|r| cand.letters().ends_with(r.lhs().letters()));
                if !reducible {
                    next.push(cand);
                }
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    Ok(out)
}
