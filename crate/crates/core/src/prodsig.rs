//! Production signatures, strong and weak prodsig-equivalence, and inference
//! of the nominal mapping from a servant ANF grammar onto the master.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::anf::is_anf_rhs;
use crate::bgf::{Expression, Grammar, Production};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchError {
    #[error("production is not in ANF: {0}")]
    NotAnf(String),
    #[error("no complete match: {0}")]
    NoCompleteMatch(String),
}

/// Occurrence mark of a nonterminal; the order is the canonical pattern order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mult {
    One,
    Plus,
    Star,
    Opt,
}

impl Mult {
    pub fn symbol(self) -> char {
        match self {
            Mult::One => '1',
            Mult::Plus => '+',
            Mult::Star => '*',
            Mult::Opt => '?',
        }
    }

    /// Servant mark `self` may stand for master mark `master`.
    pub fn compatible(self, master: Mult) -> bool {
        self == master
            || matches!((self, master), (Mult::Star, Mult::Plus) | (Mult::Opt, Mult::One))
    }
}

/// Sorted, nonempty multiset of marks, e.g. `1+`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern(Vec<Mult>);

impl Pattern {
    pub fn new(mut marks: Vec<Mult>) -> Pattern {
        marks.sort();
        Pattern(marks)
    }

    pub fn marks(&self) -> &[Mult] {
        &self.0
    }

    fn counts(&self) -> [usize; 4] {
        let mut c = [0; 4];
        for m in &self.0 {
            c[*m as usize] += 1;
        }
        c
    }

    /// Some pairing of servant and master marks is symbol-wise compatible:
    /// servant `*` may cover master `+` and servant `?` may cover master `1`.
    pub fn compatible(&self, master: &Pattern) -> bool {
        let [s1, sp, ss, so] = self.counts();
        let [m1, mp, ms, mo] = master.counts();
        ms <= ss && mo <= so && mp == sp + (ss - ms) && m1 == s1 + (so - mo)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|m| write!(f, "{}", m.symbol()))
    }
}

/// One entry per distinct nonterminal.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Signature(pub BTreeMap<String, Pattern>);

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entries: Vec<String> = self.0.iter().map(|(n, p)| format!("⟨{n}, {p}⟩")).collect();
        write!(f, "{{{}}}", entries.join(", "))
    }
}

/// Elements of an ANF rhs in order, with their marks.
pub fn elements(rhs: &Expression) -> Result<Vec<(String, Mult)>, MatchError> {
    if !is_anf_rhs(rhs) {
        return Err(MatchError::NotAnf(rhs.to_string()));
    }
    let element = |e: &Expression| match e {
        Expression::Nonterminal(n) => (n.clone(), Mult::One),
        Expression::Plus(x) => (x.as_nonterminal().unwrap().to_string(), Mult::Plus),
        Expression::Star(x) => (x.as_nonterminal().unwrap().to_string(), Mult::Star),
        Expression::Optional(x) => (x.as_nonterminal().unwrap().to_string(), Mult::Opt),
        _ => unreachable!("checked ANF shape"),
    };
    Ok(match rhs {
        Expression::Sequence(xs) => xs.iter().map(element).collect(),
        other => vec![element(other)],
    })
}

pub fn production_signature(p: &Production) -> Result<Signature, MatchError> {
    let mut marks: BTreeMap<String, Vec<Mult>> = BTreeMap::new();
    for (n, m) in elements(&p.rhs)? {
        marks.entry(n).or_default().push(m);
    }
    Ok(Signature(
        marks.into_iter().map(|(n, ms)| (n, Pattern::new(ms))).collect(),
    ))
}

/// Partial mapping from servant names to master names (`None` is ω).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialMapping {
    forward: HashMap<String, String>,
    backward: HashMap<String, String>,
}

impl PartialMapping {
    pub fn get(&self, servant: &str) -> Option<&str> {
        self.forward.get(servant).map(String::as_str)
    }

    /// Servant name mapped onto `master`, if any.
    pub fn preimage(&self, master: &str) -> Option<&str> {
        self.backward.get(master).map(String::as_str)
    }

    pub fn admits(&self, servant: &str, master: &str) -> bool {
        match (self.forward.get(servant), self.backward.get(master)) {
            (Some(m), _) => m == master,
            (None, Some(_)) => false,
            (None, None) => true,
        }
    }

    pub fn insert(&mut self, servant: &str, master: &str) -> bool {
        if !self.admits(servant, master) {
            return false;
        }
        self.forward.insert(servant.to_string(), master.to_string());
        self.backward.insert(master.to_string(), servant.to_string());
        true
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }
}

/// Name pairs (servant, master) implied by matching two productions,
/// including the left-hand sides; functional and injective.
pub type Alignment = Vec<(String, String)>;

fn extend(m: &PartialMapping, alignment: &[(String, String)]) -> Option<PartialMapping> {
    let mut out = m.clone();
    alignment
        .iter()
        .all(|(s, t)| out.insert(s, t))
        .then_some(out)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Evidence {
    OmittedNonterminal(String),
    /// Servant nonterminal whose pattern differs from the master's.
    MultiplicityMismatch {
        nonterminal: String,
        servant: String,
        master: String,
    },
    OrderMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchKind {
    Strong,
    Weak(BTreeSet<Evidence>),
}

impl MatchKind {
    pub fn is_strong(&self) -> bool {
        matches!(self, MatchKind::Strong)
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            MatchKind::Strong => "≃",
            MatchKind::Weak(_) => "⋈",
        }
    }
}

/// Positional skeleton equality; returns the name alignment.
pub fn strong_match(p: &Production, q: &Production, m: &PartialMapping) -> Option<Alignment> {
    let (ep, eq) = (elements(&p.rhs).ok()?, elements(&q.rhs).ok()?);
    if ep.len() != eq.len() {
        return None;
    }
    let mut alignment = vec![(p.lhs.clone(), q.lhs.clone())];
    for ((a, ma), (b, mb)) in ep.iter().zip(&eq) {
        if ma != mb {
            return None;
        }
        alignment.push((a.clone(), b.clone()));
    }
    extend(m, &alignment)?;
    Some(dedup(alignment))
}

fn dedup(alignment: Alignment) -> Alignment {
    let mut seen = BTreeSet::new();
    alignment
        .into_iter()
        .filter(|pair| seen.insert(pair.clone()))
        .collect()
}

/// All ways the master signature can be covered by servant entries,
/// consistent with `m`. Each result carries its kind: strong when the
/// alignment also matches positionally.
pub fn weak_matches(
    p: &Production,
    q: &Production,
    m: &PartialMapping,
) -> Vec<(Alignment, MatchKind)> {
    let (Ok(sp), Ok(sq)) = (production_signature(p), production_signature(q)) else {
        return Vec::new();
    };
    let Some(base) = extend(m, &[(p.lhs.clone(), q.lhs.clone())]) else {
        return Vec::new();
    };
    let servant: Vec<(&String, &Pattern)> = sp.0.iter().collect();
    let master: Vec<(&String, &Pattern)> = sq.0.iter().collect();
    let mut results = Vec::new();
    let mut chosen = vec![usize::MAX; master.len()];
    cover(&servant, &master, 0, &base, &mut chosen, &mut |chosen| {
        let mut alignment = vec![(p.lhs.clone(), q.lhs.clone())];
        let mut evidence = BTreeSet::new();
        for (j, &i) in chosen.iter().enumerate() {
            let (s, ps) = servant[i];
            let (t, pm) = master[j];
            alignment.push((s.clone(), t.clone()));
            if ps != pm {
                evidence.insert(Evidence::MultiplicityMismatch {
                    nonterminal: s.clone(),
                    servant: ps.to_string(),
                    master: pm.to_string(),
                });
            }
        }
        let covered: BTreeSet<usize> = chosen.iter().copied().collect();
        let omitted: BTreeSet<&str> = (0..servant.len())
            .filter(|i| !covered.contains(i))
            .map(|i| servant[i].0.as_str())
            .collect();
        for n in &omitted {
            evidence.insert(Evidence::OmittedNonterminal(n.to_string()));
        }
        let alignment = dedup(alignment);
        if !positionally_compatible(p, q, &alignment, &omitted) {
            evidence.insert(Evidence::OrderMismatch);
        }
        let kind = if evidence.is_empty() {
            MatchKind::Strong
        } else {
            MatchKind::Weak(evidence)
        };
        results.push((alignment, kind));
    });
    results
}

fn cover(
    servant: &[(&String, &Pattern)],
    master: &[(&String, &Pattern)],
    j: usize,
    m: &PartialMapping,
    chosen: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    if j == master.len() {
        emit(chosen);
        return;
    }
    let (t, pm) = master[j];
    for (i, (s, ps)) in servant.iter().enumerate() {
        if chosen[..j].contains(&i) || !ps.compatible(pm) {
            continue;
        }
        if let Some(next) = extend(m, &[((*s).clone(), t.clone())]) {
            chosen[j] = i;
            cover(servant, master, j + 1, &next, chosen, emit);
            chosen[j] = usize::MAX;
        }
    }
}

fn positionally_compatible(
    p: &Production,
    q: &Production,
    alignment: &[(String, String)],
    omitted: &BTreeSet<&str>,
) -> bool {
    let ep: Vec<(String, Mult)> = elements(&p.rhs)
        .unwrap_or_default()
        .into_iter()
        .filter(|(n, _)| !omitted.contains(n.as_str()))
        .collect();
    let eq = elements(&q.rhs).unwrap_or_default();
    ep.len() == eq.len()
        && ep.iter().zip(&eq).all(|((a, ma), (b, mb))| {
            ma.compatible(*mb) && alignment.iter().any(|(s, t)| s == a && t == b)
        })
}

/// Convenience: the best single weak-or-strong result, preferring strong.
pub fn weak_match(p: &Production, q: &Production, m: &PartialMapping) -> Option<MatchKind> {
    let all = weak_matches(p, q, m);
    all.iter()
        .find(|(_, k)| k.is_strong())
        .or_else(|| all.first())
        .map(|(_, k)| k.clone())
}

/// Servant nonterminals in first-appearance order with their master names;
/// `None` stands for ω.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NominalMapping {
    pub pairs: Vec<(String, Option<String>)>,
}

impl NominalMapping {
    pub fn get(&self, servant: &str) -> Option<Option<&str>> {
        self.pairs
            .iter()
            .find(|(s, _)| s == servant)
            .map(|(_, t)| t.as_deref())
    }

    pub fn is_identity(&self) -> bool {
        self.pairs.iter().all(|(s, t)| t.as_deref() == Some(s.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductionMatch {
    pub servant: Production,
    pub master: Option<Production>,
    pub kind: Option<MatchKind>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    /// One entry per servant production, in servant order.
    pub matches: Vec<ProductionMatch>,
    pub mapping: NominalMapping,
}

impl MatchResult {
    pub fn strong_count(&self) -> usize {
        self.matches
            .iter()
            .filter(|m| m.kind.as_ref().is_some_and(MatchKind::is_strong))
            .count()
    }
}

#[derive(Clone)]
struct Candidate {
    servant: usize,
    alignment: Alignment,
    kind: MatchKind,
}

struct Search<'a> {
    servant: &'a [Production],
    master: &'a [Production],
    best: Option<(usize, Vec<Option<Candidate>>)>,
}

impl Search<'_> {
    fn candidates(&self, j: usize, used: &[bool], m: &PartialMapping) -> Vec<Candidate> {
        let mut strong = Vec::new();
        let mut weak = Vec::new();
        for (i, p) in self.servant.iter().enumerate() {
            if used[i] {
                continue;
            }
            for (alignment, kind) in weak_matches(p, &self.master[j], m) {
                let c = Candidate {
                    servant: i,
                    alignment,
                    kind,
                };
                if c.kind.is_strong() {
                    strong.push(c);
                } else {
                    weak.push(c);
                }
            }
        }
        strong.extend(weak);
        strong
    }

    fn run(
        &mut self,
        assigned: &mut Vec<Option<Candidate>>,
        used: &mut Vec<bool>,
        m: &PartialMapping,
        strong: usize,
    ) {
        let open: Vec<usize> = (0..self.master.len()).filter(|&j| assigned[j].is_none()).collect();
        if let Some((best, _)) = &self.best {
            if strong + open.len() <= *best {
                return;
            }
        }
        if open.is_empty() {
            self.best = Some((strong, assigned.clone()));
            return;
        }
        let mut pick: Option<(usize, Vec<Candidate>)> = None;
        for &j in &open {
            let cs = self.candidates(j, used, m);
            if cs.is_empty() {
                return;
            }
            if pick.as_ref().is_none_or(|(_, best)| cs.len() < best.len()) {
                let forced = cs.len() == 1;
                pick = Some((j, cs));
                if forced {
                    break;
                }
            }
        }
        let (j, cs) = pick.expect("open is nonempty");
        for c in cs {
            let next = extend(m, &c.alignment).expect("candidate is consistent");
            let gain = usize::from(c.kind.is_strong());
            used[c.servant] = true;
            assigned[j] = Some(c.clone());
            self.run(assigned, used, &next, strong + gain);
            assigned[j] = None;
            used[c.servant] = false;
        }
    }
}

/// Initial mapping: the root pair when each grammar has exactly one root.
pub fn seed_mapping(servant: &Grammar, master: &Grammar) -> PartialMapping {
    let mut m = PartialMapping::default();
    if let ([s], [t]) = (servant.roots.as_slice(), master.roots.as_slice()) {
        m.insert(s, t);
    }
    m
}

/// Mapping table for a complete assignment of master productions
/// (indexed by master production) to servant productions.
pub fn mapping_from_assignment(
    servant: &Grammar,
    matched: &BTreeSet<usize>,
    m: &PartialMapping,
) -> NominalMapping {
    let mut names = BTreeSet::new();
    for &i in matched {
        let p = &servant.productions[i];
        names.insert(p.lhs.clone());
        names.extend(p.rhs.nonterminals().into_iter().map(str::to_string));
    }
    NominalMapping {
        pairs: servant
            .nonterminals()
            .into_iter()
            .filter(|n| names.contains(n))
            .map(|n| {
                let target = m.get(&n).map(str::to_string);
                (n, target)
            })
            .collect(),
    }
}

pub fn match_grammars(servant: &Grammar, master: &Grammar) -> Result<MatchResult, MatchError> {
    for p in servant.productions.iter().chain(&master.productions) {
        if p.is_labeled() || !is_anf_rhs(&p.rhs) {
            return Err(MatchError::NotAnf(p.to_string()));
        }
    }
    let seed = seed_mapping(servant, master);
    let mut search = Search {
        servant: &servant.productions,
        master: &master.productions,
        best: None,
    };
    let mut assigned = vec![None; master.productions.len()];
    let mut used = vec![false; servant.productions.len()];
    search.run(&mut assigned, &mut used, &seed, 0);
    let Some((_, best)) = search.best else {
        let unmatched: Vec<String> = master
            .productions
            .iter()
            .enumerate()
            .filter(|(j, _)| {
                search
                    .candidates(*j, &vec![false; servant.productions.len()], &seed)
                    .is_empty()
            })
            .map(|(_, q)| q.to_string())
            .collect();
        return Err(MatchError::NoCompleteMatch(if unmatched.is_empty() {
            "no consistent assignment of master productions".to_string()
        } else {
            format!("no candidate for {}", unmatched.join(", "))
        }));
    };
    let mut m = seed;
    let mut by_servant: HashMap<usize, (usize, MatchKind)> = HashMap::new();
    for (j, c) in best.into_iter().enumerate() {
        let c = c.expect("complete assignment");
        m = extend(&m, &c.alignment).expect("consistent");
        by_servant.insert(c.servant, (j, c.kind));
    }
    let matched: BTreeSet<usize> = by_servant.keys().copied().collect();
    let mapping = mapping_from_assignment(servant, &matched, &m);
    let matches = servant
        .productions
        .iter()
        .enumerate()
        .map(|(i, p)| match by_servant.remove(&i) {
            Some((j, kind)) => ProductionMatch {
                servant: p.clone(),
                master: Some(master.productions[j].clone()),
                kind: Some(kind),
            },
            None => ProductionMatch {
                servant: p.clone(),
                master: None,
                kind: None,
            },
        })
        .collect();
    Ok(MatchResult { matches, mapping })
}
