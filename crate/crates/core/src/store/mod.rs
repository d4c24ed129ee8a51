//! Embedded triple store: indexed pattern matching, conjunctive (BGP)
//! queries, forward-chaining saturation and N-Triples persistence.

mod ntriples;
mod pattern;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::model::{Iri, Term, Triple};

pub use pattern::{builtin_rules, Binding, InferenceRule, PatternTerm, TriplePattern};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("invalid variable name `{0}`")]
    InvalidVariable(String),
    #[error("rule body is empty")]
    EmptyBody,
    #[error("head variable ?{0} does not occur in the body")]
    RangeRestriction(String),
    #[error("rule syntax: {0}")]
    Rule(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Set-semantics triple store with subject/predicate/object indexes.
///
/// Triples are never removed; indexes hold positions into `triples`.
#[derive(Debug, Default, Clone)]
pub struct TripleStore {
    triples: Vec<Triple>,
    inferred: Vec<bool>,
    positions: HashMap<Triple, usize>,
    by_subject: HashMap<Term, Vec<usize>>,
    by_predicate: HashMap<Iri, Vec<usize>>,
    by_object: HashMap<Term, Vec<usize>>,
}

impl TripleStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.positions.contains_key(t)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn is_inferred(&self, t: &Triple) -> bool {
        self.positions.get(t).is_some_and(|&i| self.inferred[i])
    }

    /// Inserts an asserted triple. Returns `true` if it was new.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.insert_marked(triple, false).is_some()
    }

    fn insert_marked(&mut self, triple: Triple, inferred: bool) -> Option<usize> {
        if self.positions.contains_key(&triple) {
            return None;
        }
        let i = self.triples.len();
        self.by_subject.entry(triple.subject().clone()).or_default().push(i);
        self.by_predicate.entry(triple.predicate().clone()).or_default().push(i);
        self.by_object.entry(triple.object().clone()).or_default().push(i);
        self.positions.insert(triple.clone(), i);
        self.triples.push(triple);
        self.inferred.push(inferred);
        Some(i)
    }

    pub fn extend(&mut self, triples: impl IntoIterator<Item = Triple>) -> usize {
        triples.into_iter().filter(|t| self.insert(t.clone())).count()
    }

    /// Positions of triples that may unify with `pattern` under `binding`,
    /// taken from the most selective bound index.
    fn candidates(&self, pattern: &TriplePattern, binding: &Binding) -> Candidates<'_> {
        let [s, p, o] = pattern.bound_positions(binding);
        if let (Some(s), Some(Term::Iri(p)), Some(o)) = (s, p, o) {
            return match Triple::new(s.clone(), p.clone(), o.clone()).ok().and_then(|t| self.positions.get(&t)) {
                Some(&i) => Candidates::One(i),
                None => Candidates::List(&[]),
            };
        }
        const EMPTY: &[usize] = &[];
        let mut lists: Vec<&[usize]> = Vec::with_capacity(3);
        if let Some(s) = s {
            lists.push(self.by_subject.get(s).map_or(EMPTY, Vec::as_slice));
        }
        match p {
            Some(Term::Iri(p)) => lists.push(self.by_predicate.get(p).map_or(EMPTY, Vec::as_slice)),
            Some(_) => lists.push(EMPTY),
            None => {}
        }
        if let Some(o) = o {
            lists.push(self.by_object.get(o).map_or(EMPTY, Vec::as_slice));
        }
        match lists.into_iter().min_by_key(|l| l.len()) {
            Some(list) => Candidates::List(list),
            None => Candidates::All(self.triples.len()),
        }
    }

    fn for_each_match(&self, pattern: &TriplePattern, binding: &Binding, mut f: impl FnMut(Binding)) {
        let mut visit = |i: usize| {
            if let Some(b) = pattern.unify(&self.triples[i], binding) {
                f(b);
            }
        };
        match self.candidates(pattern, binding) {
            Candidates::One(i) => visit(i),
            Candidates::List(list) => list.iter().copied().for_each(visit),
            Candidates::All(n) => (0..n).for_each(visit),
        }
    }

    fn candidate_count(&self, pattern: &TriplePattern, binding: &Binding) -> usize {
        match self.candidates(pattern, binding) {
            Candidates::One(_) => 1,
            Candidates::List(l) => l.len(),
            Candidates::All(n) => n,
        }
    }

    /// One binding per stored triple unifying with `pattern`. A ground
    /// pattern yields `{∅}` when present and `{}` otherwise.
    pub fn match_pattern(&self, pattern: &TriplePattern) -> BTreeSet<Binding> {
        let mut out = BTreeSet::new();
        self.for_each_match(pattern, &Binding::new(), |b| {
            out.insert(b);
        });
        out
    }

    /// Natural join of the per-pattern solutions. An empty pattern list
    /// yields the single empty binding.
    pub fn query_bgp(&self, patterns: &[TriplePattern]) -> BTreeSet<Binding> {
        let mut out = BTreeSet::new();
        let remaining: Vec<&TriplePattern> = patterns.iter().collect();
        self.join(&remaining, Binding::new(), &mut |b| {
            out.insert(b);
        });
        out
    }

    /// Nested-loop index join; at each level the pattern with the fewest
    /// candidates under the current binding goes next.
    fn join(&self, remaining: &[&TriplePattern], binding: Binding, emit: &mut dyn FnMut(Binding)) {
        if remaining.is_empty() {
            emit(binding);
            return;
        }
        let (next, _) =
            remaining.iter().enumerate().map(|(i, p)| (i, self.candidate_count(p, &binding))).min_by_key(|&(_, c)| c).expect("non-empty");
        let mut rest = remaining.to_vec();
        let pattern = rest.remove(next);
        let mut partials = Vec::new();
        self.for_each_match(pattern, &binding, |b| partials.push(b));
        for b in partials {
            self.join(&rest, b, emit);
        }
    }

    /// Computes the least fixpoint of `rules` over the store (semi-naive).
    /// Returns the number of distinct triples derived; derived triples are
    /// marked inferred.
    pub fn saturate(&mut self, rules: &[InferenceRule]) -> usize {
        self.saturate_from(rules, 0)
    }

    /// Incremental [`TripleStore::saturate`]: valid when the first `since`
    /// triples (in insertion order) were already closed under `rules`.
    pub fn saturate_from(&mut self, rules: &[InferenceRule], since: usize) -> usize {
        let mut delta: Vec<usize> = (since.min(self.triples.len())..self.triples.len()).collect();
        let mut derived = 0;
        while !delta.is_empty() {
            let mut fresh: BTreeSet<Triple> = BTreeSet::new();
            for rule in rules {
                let body: Vec<&TriplePattern> = rule.body().iter().collect();
                for (i, seed) in body.iter().enumerate() {
                    let mut rest = body.clone();
                    rest.remove(i);
                    for &d in &delta {
                        let Some(b) = seed.unify(&self.triples[d], &Binding::new()) else { continue };
                        self.join(&rest, b, &mut |b| {
                            if let Some(t) = instantiate(rule.head(), &b) {
                                if !self.positions.contains_key(&t) {
                                    fresh.insert(t);
                                }
                            }
                        });
                    }
                }
            }
            delta = fresh.into_iter().filter_map(|t| self.insert_marked(t, true)).collect();
            derived += delta.len();
        }
        derived
    }

    /// One N-Triples line per triple, sorted; inferred marks are dropped.
    pub fn serialize(&self) -> String {
        let mut lines: Vec<String> = self.triples.iter().map(ToString::to_string).collect();
        lines.sort();
        let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
        out
    }

    /// Parses the N-Triples subset written by [`TripleStore::serialize`].
    /// Blank lines and `#` comments are skipped.
    pub fn load(text: &str) -> Result<Self, StoreError> {
        let mut store = TripleStore::new();
        for (n, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let t = ntriples::parse_line(trimmed).map_err(|message| StoreError::Parse { line: n + 1, message })?;
            store.insert(t);
        }
        Ok(store)
    }

    pub fn triple_set(&self) -> BTreeSet<Triple> {
        self.triples.iter().cloned().collect()
    }
}

enum Candidates<'a> {
    One(usize),
    List(&'a [usize]),
    All(usize),
}

/// Grounds a rule head. Heads that would put a literal in subject position
/// or a non-IRI in predicate position produce nothing.
fn instantiate(head: &TriplePattern, b: &Binding) -> Option<Triple> {
    let [s, p, o] = head.ground(b)?;
    Triple::from_terms(s, p, o).ok()
}
