use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::StoreError;
use crate::model::{Namespace, Term, Triple};

/// Variable name → bound term.
pub type Binding = BTreeMap<String, Term>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternTerm {
    Var(String),
    Term(Term),
}

impl PatternTerm {
    pub fn var(name: &str) -> Result<Self, StoreError> {
        let mut chars = name.chars();
        let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if ok {
            Ok(PatternTerm::Var(name.to_string()))
        } else {
            Err(StoreError::InvalidVariable(name.to_string()))
        }
    }

    fn resolve<'a>(&'a self, b: &'a Binding) -> Option<&'a Term> {
        match self {
            PatternTerm::Term(t) => Some(t),
            PatternTerm::Var(v) => b.get(v),
        }
    }
}

impl From<Term> for PatternTerm {
    fn from(t: Term) -> Self {
        PatternTerm::Term(t)
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Var(v) => write!(f, "?{v}"),
            PatternTerm::Term(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(subject: impl Into<PatternTerm>, predicate: impl Into<PatternTerm>, object: impl Into<PatternTerm>) -> Self {
        TriplePattern { subject: subject.into(), predicate: predicate.into(), object: object.into() }
    }

    /// Parses `subject predicate object` using the rule term syntax.
    pub fn parse(text: &str, ns: &Namespace) -> Result<Self, StoreError> {
        parse_pattern(text.trim().trim_end_matches('.').trim(), ns)
    }

    pub fn positions(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        self.positions()
            .into_iter()
            .filter_map(|p| match p {
                PatternTerm::Var(v) => Some(v.as_str()),
                PatternTerm::Term(_) => None,
            })
            .collect()
    }

    /// Extends `binding` so that the pattern equals `triple`, if possible.
    pub fn unify(&self, triple: &Triple, binding: &Binding) -> Option<Binding> {
        let pred = Term::Iri(triple.predicate().clone());
        let mut out = binding.clone();
        for (p, t) in self.positions().into_iter().zip([triple.subject(), &pred, triple.object()]) {
            match p {
                PatternTerm::Term(c) if c != t => return None,
                PatternTerm::Term(_) => {}
                PatternTerm::Var(v) => match out.get(v) {
                    Some(bound) if bound != t => return None,
                    Some(_) => {}
                    None => {
                        out.insert(v.clone(), t.clone());
                    }
                },
            }
        }
        Some(out)
    }

    /// Substitutes bound variables. Returns the positions as terms, or
    /// `None` when a variable is unbound.
    pub fn ground(&self, b: &Binding) -> Option<[Term; 3]> {
        Some([self.subject.resolve(b)?.clone(), self.predicate.resolve(b)?.clone(), self.object.resolve(b)?.clone()])
    }

    pub(super) fn bound_positions<'a>(&'a self, b: &'a Binding) -> [Option<&'a Term>; 3] {
        [self.subject.resolve(b), self.predicate.resolve(b), self.object.resolve(b)]
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

/// A positive Datalog rule over triples. Every head variable occurs in the
/// body, so saturation never invents terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceRule {
    body: Vec<TriplePattern>,
    head: TriplePattern,
}

impl InferenceRule {
    pub fn new(body: Vec<TriplePattern>, head: TriplePattern) -> Result<Self, StoreError> {
        if body.is_empty() {
            return Err(StoreError::EmptyBody);
        }
        let body_vars: BTreeSet<&str> = body.iter().flat_map(TriplePattern::variables).collect();
        if let Some(v) = head.variables().into_iter().find(|v| !body_vars.contains(v)) {
            return Err(StoreError::RangeRestriction(v.to_string()));
        }
        Ok(InferenceRule { body, head })
    }

    pub fn body(&self) -> &[TriplePattern] {
        &self.body
    }

    pub fn head(&self) -> &TriplePattern {
        &self.head
    }

    /// Parses `pattern . pattern ... => pattern`, where terms are `?var`,
    /// `<iri>`, `prefix:name`, `_:label` or `"lexical"^^datatype`.
    pub fn parse(text: &str, ns: &Namespace) -> Result<Self, StoreError> {
        let (body_text, head_text) = text.split_once("=>").ok_or_else(|| StoreError::Rule(format!("missing `=>` in `{}`", text.trim())))?;
        let body =
            body_text.split(" .").map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_pattern(s, ns)).collect::<Result<Vec<_>, _>>()?;
        let head = parse_pattern(head_text.trim().trim_end_matches('.').trim(), ns)?;
        InferenceRule::new(body, head)
    }
}

impl fmt::Display for InferenceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.body.iter().map(ToString::to_string).collect();
        write!(f, "{} => {}", body.join(" . "), self.head)
    }
}

fn parse_pattern(text: &str, ns: &Namespace) -> Result<TriplePattern, StoreError> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    let [s, p, o] = parts.as_slice() else {
        return Err(StoreError::Rule(format!("pattern `{text}` must have three terms")));
    };
    Ok(TriplePattern::new(parse_pattern_term(s, ns)?, parse_pattern_term(p, ns)?, parse_pattern_term(o, ns)?))
}

fn parse_pattern_term(tok: &str, ns: &Namespace) -> Result<PatternTerm, StoreError> {
    if let Some(v) = tok.strip_prefix('?') {
        return PatternTerm::var(v);
    }
    if tok.starts_with('"') || tok.starts_with("_:") {
        let (term, rest) = super::ntriples::parse_term(tok, ns).map_err(StoreError::Rule)?;
        if !rest.trim().is_empty() {
            return Err(StoreError::Rule(format!("trailing input after `{tok}`")));
        }
        return Ok(PatternTerm::Term(term));
    }
    ns.expand(tok).map(|i| PatternTerm::Term(Term::Iri(i))).map_err(|e| StoreError::Rule(e.to_string()))
}

/// Transitivity of subClassOf/subPropertyOf and propagation of types and
/// predicates along them. `influencedBy` deliberately has no rule.
pub fn builtin_rules(ns: &Namespace) -> Vec<InferenceRule> {
    [
        "?a rdfs:subClassOf ?b . ?b rdfs:subClassOf ?c => ?a rdfs:subClassOf ?c",
        "?p rdfs:subPropertyOf ?q . ?q rdfs:subPropertyOf ?r => ?p rdfs:subPropertyOf ?r",
        "?x rdf:type ?a . ?a rdfs:subClassOf ?b => ?x rdf:type ?b",
        "?s ?p ?o . ?p rdfs:subPropertyOf ?q => ?s ?q ?o",
    ]
    .iter()
    .map(|r| InferenceRule::parse(r, ns).expect("built-in rules parse"))
    .collect()
}
