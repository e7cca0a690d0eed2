//! Shared helpers for the integration and acceptance tests: fixture
//! loading, random grammar generators and an exhaustive matching oracle.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use gramconv::bgf::{parse_bgf, Expression, Grammar, Production};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const SERVANTS: [&str; 11] = [
    "antlr", "dcg", "emf", "jaxb", "om", "python", "rascal-a", "rascal-c", "sdf", "txl", "xsd",
];

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/fl")
}

pub fn fixture_path(name: &str) -> PathBuf {
    fixture_dir().join(format!("{name}.bgf"))
}

pub fn load(name: &str) -> Grammar {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    parse_bgf(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn master() -> Grammar {
    load("master")
}

fn name(prefix: &str, k: usize) -> String {
    format!("{prefix}{k}")
}

fn mark(rng: &mut StdRng, x: Expression) -> Expression {
    match rng.gen_range(0..6) {
        0 => Expression::plus(x),
        1 => Expression::star(x),
        2 => Expression::opt(x),
        _ => x,
    }
}

/// Random grammar in ANF over at most `max_names` nonterminals.
pub fn random_anf(rng: &mut StdRng, max_names: usize) -> Grammar {
    let total = rng.gen_range(2..=max_names);
    let defined = rng.gen_range(1..total.min(5) + 1).min(total);
    let names: Vec<String> = (0..total).map(|k| name("n", k)).collect();
    let mut productions = Vec::new();
    for lhs in &names[..defined] {
        for _ in 0..rng.gen_range(1..=2) {
            let len = rng.gen_range(1..=3);
            let parts: Vec<Expression> = (0..len)
                .map(|_| {
                    let n = names.choose(rng).unwrap().clone();
                    mark(rng, Expression::nt(n))
                })
                .collect();
            productions.push(Production::unlabeled(lhs.clone(), Expression::seq(parts)));
        }
    }
    let roots = if rng.gen_bool(0.7) {
        vec![names[0].clone()]
    } else {
        Vec::new()
    };
    Grammar::new(roots, productions)
}

fn elements_of(rhs: &Expression) -> Vec<Expression> {
    match rhs {
        Expression::Sequence(xs) => xs.clone(),
        other => vec![other.clone()],
    }
}

fn base_name(e: &Expression) -> String {
    match e {
        Expression::Nonterminal(n) => n.clone(),
        Expression::Plus(x) | Expression::Star(x) | Expression::Optional(x) => base_name(x),
        _ => unreachable!("ANF element"),
    }
}

/// A servant resembling `master`: names are permuted, production order is
/// shuffled and some productions are perturbed (elements reordered, marks
/// relaxed, extra elements added) or added.
pub fn perturbed_servant(rng: &mut StdRng, master: &Grammar, max_names: usize) -> Grammar {
    let mut names = master.nonterminals();
    names.shuffle(rng);
    let renaming: HashMap<String, String> = names
        .iter()
        .enumerate()
        .map(|(k, n)| (n.clone(), name("s", k)))
        .collect();
    let mut spare = (names.len()..max_names).map(|k| name("s", k));
    let mut extra = spare.next();
    let mut productions: Vec<Production> = Vec::new();
    for p in &master.productions {
        let mut parts: Vec<Expression> = elements_of(&p.rhs)
            .iter()
            .map(|e| {
                let e = e.transform(&mut |x| match x {
                    Expression::Nonterminal(n) => Expression::nt(renaming[&n].clone()),
                    other => other,
                });
                match (rng.gen_range(0..8), e) {
                    (0, Expression::Plus(x)) => Expression::Star(x),
                    (1, Expression::Nonterminal(n)) => Expression::opt(Expression::nt(n)),
                    (_, e) => e,
                }
            })
            .collect();
        if parts.len() > 1 && rng.gen_bool(0.25) {
            parts.shuffle(rng);
        }
        if let Some(x) = extra.as_ref().filter(|_| rng.gen_bool(0.15)) {
            let at = rng.gen_range(0..=parts.len());
            parts.insert(at, Expression::nt(x.clone()));
        }
        productions.push(Production::unlabeled(renaming[&p.lhs].clone(), Expression::seq(parts)));
    }
    if rng.gen_bool(0.3) {
        let lhs = spare.next().or_else(|| extra.take()).unwrap_or_else(|| renaming[&names[0]].clone());
        let target = renaming[names.choose(rng).unwrap()].clone();
        productions.push(Production::unlabeled(lhs, Expression::nt(target)));
    }
    productions.shuffle(rng);
    let roots = master.roots.iter().map(|r| renaming[r].clone()).collect();
    Grammar::new(roots, productions)
}

fn contentful(rng: &mut StdRng, names: &[String], depth: usize) -> Expression {
    let nt = |rng: &mut StdRng| Expression::nt(names.choose(rng).unwrap().clone());
    if depth == 0 {
        return nt(rng);
    }
    let sub = |rng: &mut StdRng| contentful(rng, names, depth - 1);
    let term = |rng: &mut StdRng| Expression::term(["+", "(", ")", "if", ";"].choose(rng).unwrap().to_string());
    match rng.gen_range(0..10) {
        0 | 1 => nt(rng),
        2 | 3 => {
            let mut parts = vec![sub(rng)];
            for _ in 0..rng.gen_range(1..=2) {
                let part = if rng.gen_bool(0.4) { term(rng) } else { sub(rng) };
                parts.insert(rng.gen_range(0..=parts.len()), part);
            }
            Expression::seq(parts)
        }
        4 => Expression::choice(vec![sub(rng), sub(rng)]),
        5 => Expression::star(sub(rng)),
        6 => Expression::plus(sub(rng)),
        7 => Expression::opt(sub(rng)),
        8 => Expression::sel(["x", "y", "arg"].choose(rng).unwrap().to_string(), sub(rng)),
        _ => Expression::sep_plus(sub(rng), term(rng)),
    }
}

/// Random BGF grammar (labels, selectors, terminals, nesting) over at most
/// `max_names` nonterminals that normalization can bring into ANF: every
/// composite contains a nonterminal, and terminal-only nonterminals have
/// only terminal-only definitions.
pub fn random_bgf(rng: &mut StdRng, max_names: usize) -> Grammar {
    let total = rng.gen_range(2..=max_names);
    let names: Vec<String> = (0..total).map(|k| name("N", k)).collect();
    let lexical = rng.gen_range(0..=total / 3);
    let mut productions = Vec::new();
    for (k, lhs) in names.iter().enumerate() {
        if k >= total - lexical {
            if rng.gen_bool(0.5) {
                productions.push(Production::unlabeled(lhs.clone(), Expression::term(format!("t{k}"))));
            }
            continue;
        }
        for j in 0..rng.gen_range(1..=2) {
            let rhs = contentful(rng, &names, 2);
            let label = if rng.gen_bool(0.3) { format!("l{j}") } else { String::new() };
            productions.push(Production::new(label, lhs.clone(), rhs));
        }
    }
    let roots = if rng.gen_bool(0.5) {
        vec![names[0].clone()]
    } else {
        Vec::new()
    };
    Grammar::new(roots, productions)
}

/// Exhaustive matching oracle: the largest number of strong matches over
/// all complete, consistent assignments of master productions to distinct
/// servant productions, or `None` when there is no complete assignment.
pub mod oracle {
    use super::*;

    type Entry = (String, Vec<char>);

    fn elements(rhs: &Expression) -> Vec<(String, char)> {
        elements_of(rhs)
            .iter()
            .map(|e| {
                let m = match e {
                    Expression::Plus(_) => '+',
                    Expression::Star(_) => '*',
                    Expression::Optional(_) => '?',
                    _ => '1',
                };
                (base_name(e), m)
            })
            .collect()
    }

    fn signature(rhs: &Expression) -> Vec<Entry> {
        let mut out: Vec<Entry> = Vec::new();
        for (n, m) in elements(rhs) {
            match out.iter_mut().find(|(k, _)| *k == n) {
                Some((_, ms)) => ms.push(m),
                None => out.push((n, vec![m])),
            }
        }
        out
    }

    fn mark_ok(s: char, m: char) -> bool {
        s == m || (s, m) == ('*', '+') || (s, m) == ('?', '1')
    }

    /// Some bijection between the two mark lists pairs compatible marks.
    fn pattern_ok(s: &[char], m: &[char]) -> bool {
        if s.len() != m.len() {
            return false;
        }
        fn go(s: &[char], m: &[char], used: &mut Vec<bool>) -> bool {
            let Some((first, rest)) = m.split_first() else {
                return true;
            };
            for i in 0..s.len() {
                if !used[i] && mark_ok(s[i], *first) {
                    used[i] = true;
                    if go(s, rest, used) {
                        return true;
                    }
                    used[i] = false;
                }
            }
            false
        }
        go(s, m, &mut vec![false; s.len()])
    }

    type Map = Vec<(String, String)>;

    fn consistent(map: &Map, s: &str, t: &str) -> bool {
        map.iter().all(|(a, b)| (a == s) == (b == t))
    }

    fn with(map: &Map, pairs: &[(String, String)]) -> Option<Map> {
        let mut out = map.clone();
        for (s, t) in pairs {
            if !consistent(&out, s, t) {
                return None;
            }
            if !out.iter().any(|(a, _)| a == s) {
                out.push((s.clone(), t.clone()));
            }
        }
        Some(out)
    }

    /// Every (alignment, strong) pair for servant `p` against master `q`.
    fn alignments(p: &Production, q: &Production) -> Vec<(Map, bool)> {
        let (sp, sq) = (signature(&p.rhs), signature(&q.rhs));
        let mut out = Vec::new();
        let mut pick = vec![0usize; sq.len()];
        fn go(
            j: usize,
            sp: &[Entry],
            sq: &[Entry],
            pick: &mut Vec<usize>,
            emit: &mut dyn FnMut(&[usize]),
        ) {
            if j == sq.len() {
                emit(pick);
                return;
            }
            for i in 0..sp.len() {
                if !pick[..j].contains(&i) && pattern_ok(&sp[i].1, &sq[j].1) {
                    pick[j] = i;
                    go(j + 1, sp, sq, pick, emit);
                }
            }
        }
        go(0, &sp, &sq, &mut pick, &mut |pick| {
            let mut pairs = vec![(p.lhs.clone(), q.lhs.clone())];
            pairs.extend(pick.iter().enumerate().map(|(j, &i)| (sp[i].0.clone(), sq[j].0.clone())));
            let Some(map) = with(&Vec::new(), &pairs) else {
                return;
            };
            let (ep, eq) = (elements(&p.rhs), elements(&q.rhs));
            let strong = sp.len() == sq.len()
                && ep.len() == eq.len()
                && ep.iter().zip(&eq).all(|((a, ma), (b, mb))| {
                    ma == mb && map.iter().any(|(s, t)| s == a && t == b)
                });
            out.push((map, strong));
        });
        out
    }

    pub fn best_strong_count(servant: &Grammar, master: &Grammar) -> Option<usize> {
        let table: Vec<Vec<Vec<(Map, bool)>>> = master
            .productions
            .iter()
            .map(|q| servant.productions.iter().map(|p| alignments(p, q)).collect())
            .collect();
        let mut seed = Vec::new();
        if let ([s], [t]) = (servant.roots.as_slice(), master.roots.as_slice()) {
            seed.push((s.clone(), t.clone()));
        }
        let mut best = None;
        fn go(
            j: usize,
            table: &[Vec<Vec<(Map, bool)>>],
            used: &mut Vec<bool>,
            map: &Map,
            strong: usize,
            best: &mut Option<usize>,
        ) {
            if j == table.len() {
                *best = Some(best.map_or(strong, |b: usize| b.max(strong)));
                return;
            }
            for (i, options) in table[j].iter().enumerate() {
                if used[i] {
                    continue;
                }
                for (pairs, is_strong) in options {
                    if let Some(next) = with(map, pairs) {
                        used[i] = true;
                        go(j + 1, table, used, &next, strong + usize::from(*is_strong), best);
                        used[i] = false;
                    }
                }
            }
        }
        let mut used = vec![false; servant.productions.len()];
        go(0, &table, &mut used, &seed, 0, &mut best);
        best
    }

    /// The claimed matches are a valid complete assignment under one
    /// consistent mapping; returns its strong count.
    pub fn check_assignment(
        servant: &Grammar,
        master: &Grammar,
        result: &gramconv::prodsig::MatchResult,
    ) -> Result<usize, String> {
        let mut seed = Vec::new();
        if let ([s], [t]) = (servant.roots.as_slice(), master.roots.as_slice()) {
            seed.push((s.clone(), t.clone()));
        }
        let mut master_left: Vec<&Production> = master.productions.iter().collect();
        let pairs: Vec<(&Production, &Production, bool)> = result
            .matches
            .iter()
            .filter_map(|m| {
                m.master
                    .as_ref()
                    .map(|q| (&m.servant, q, m.kind.as_ref().is_some_and(|k| k.is_strong())))
            })
            .collect();
        for (_, q, _) in &pairs {
            let k = master_left
                .iter()
                .position(|x| x == q)
                .ok_or_else(|| format!("master production {q} matched twice"))?;
            master_left.remove(k);
        }
        if !master_left.is_empty() {
            return Err(format!("{} master productions unmatched", master_left.len()));
        }
        fn go(pairs: &[(&Production, &Production, bool)], map: &Map) -> bool {
            let Some(((p, q, strong), rest)) = pairs.split_first() else {
                return true;
            };
            alignments(p, q).into_iter().any(|(pairs_, s)| {
                s == *strong && with(map, &pairs_).is_some_and(|next| go(rest, &next))
            })
        }
        if !go(&pairs, &seed) {
            return Err("no consistent mapping supports the claimed matches".into());
        }
        Ok(pairs.iter().filter(|(_, _, s)| *s).count())
    }
}
