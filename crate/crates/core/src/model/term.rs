//! RDF-style terms, literals and triples.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{time, ModelError};

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const DEFAULT_BASE_IRI: &str = "http://example.org/semdrought#";

/// An absolute IRI. Always stored in expanded form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(String);

impl TryFrom<String> for Iri {
    type Error = ModelError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Iri::new(s)
    }
}

impl From<Iri> for String {
    fn from(i: Iri) -> Self {
        i.0
    }
}

impl Iri {
    pub fn new(s: impl Into<String>) -> Result<Self, ModelError> {
        let s = s.into();
        if s.is_empty() || s.chars().any(|c| c.is_whitespace() || c == '<' || c == '>' || c == '"') {
            return Err(ModelError::InvalidIri(s));
        }
        match s.find("://") {
            Some(i) if i > 0 => Ok(Iri(s)),
            _ => Err(ModelError::InvalidIri(s)),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Trailing segment after the last `/` or `#`.
    pub fn local_name(&self) -> &str {
        let s = self.0.as_str();
        match s.rfind(['/', '#']) {
            Some(i) if i + 1 < s.len() => &s[i + 1..],
            _ => s,
        }
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Prefix table used to expand `prefix:local` names.
///
/// `rdf:`, `rdfs:` and `xsd:` are fixed; `ex:` is the configurable base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Namespace {
    base: String,
}

impl Default for Namespace {
    fn default() -> Self {
        Namespace { base: DEFAULT_BASE_IRI.to_string() }
    }
}

impl Namespace {
    pub fn new(base: impl Into<String>) -> Result<Self, ModelError> {
        let base = base.into();
        Iri::new(base.clone())?;
        Ok(Namespace { base })
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn prefix(&self, p: &str) -> Option<&str> {
        match p {
            "rdf" => Some(RDF),
            "rdfs" => Some(RDFS),
            "xsd" => Some(XSD),
            "ex" => Some(&self.base),
            _ => None,
        }
    }

    /// A term in the `ex:` namespace.
    pub fn ex(&self, local: &str) -> Iri {
        Iri(format!("{}{}", self.base, local))
    }

    pub fn rdf(&self, local: &str) -> Iri {
        Iri(format!("{RDF}{local}"))
    }

    pub fn rdfs(&self, local: &str) -> Iri {
        Iri(format!("{RDFS}{local}"))
    }

    /// Expands a registered prefixed name or accepts an absolute IRI.
    /// Angle brackets around the input are stripped.
    pub fn expand(&self, s: &str) -> Result<Iri, ModelError> {
        let s = s.trim();
        let s = s.strip_prefix('<').and_then(|x| x.strip_suffix('>')).unwrap_or(s);
        if !s.contains("://") {
            if let Some((p, local)) = s.split_once(':') {
                if let Some(ns) = self.prefix(p) {
                    return Iri::new(format!("{ns}{local}"));
                }
            }
        }
        Iri::new(s)
    }

    /// Inverse of [`Namespace::expand`] for display purposes.
    pub fn compact(&self, iri: &Iri) -> String {
        for (p, ns) in [("ex", self.base.as_str()), ("rdf", RDF), ("rdfs", RDFS), ("xsd", XSD)] {
            if let Some(rest) = iri.as_str().strip_prefix(ns) {
                return format!("{p}:{rest}");
            }
        }
        iri.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Datatype {
    Double,
    DateTime,
    String,
    Integer,
}

impl Datatype {
    pub fn iri(self) -> &'static str {
        match self {
            Datatype::Double => "http://www.w3.org/2001/XMLSchema#double",
            Datatype::DateTime => "http://www.w3.org/2001/XMLSchema#dateTime",
            Datatype::String => "http://www.w3.org/2001/XMLSchema#string",
            Datatype::Integer => "http://www.w3.org/2001/XMLSchema#integer",
        }
    }

    pub fn from_iri(iri: &str) -> Option<Self> {
        [Datatype::Double, Datatype::DateTime, Datatype::String, Datatype::Integer].into_iter().find(|d| d.iri() == iri)
    }
}

/// A typed literal whose lexical form is valid for its datatype.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    datatype: Datatype,
}

impl Literal {
    pub fn new(lexical: impl Into<String>, datatype: Datatype) -> Result<Self, ModelError> {
        let lexical = lexical.into();
        let ok = match datatype {
            Datatype::Double => lexical.parse::<f64>().map(f64::is_finite).unwrap_or(false),
            Datatype::DateTime => time::parse_utc(&lexical).is_ok(),
            Datatype::Integer => lexical.parse::<i64>().is_ok(),
            Datatype::String => true,
        };
        if ok {
            Ok(Literal { lexical, datatype })
        } else {
            Err(ModelError::BadLiteral { lexical, datatype })
        }
    }

    pub fn double(x: f64) -> Result<Self, ModelError> {
        if !x.is_finite() {
            return Err(ModelError::NonFinite);
        }
        Ok(Literal { lexical: canonical_double(x), datatype: Datatype::Double })
    }

    pub fn date_time(ts: i64) -> Result<Self, ModelError> {
        Ok(Literal { lexical: time::format_utc(ts)?, datatype: Datatype::DateTime })
    }

    pub fn string(s: impl Into<String>) -> Self {
        Literal { lexical: s.into(), datatype: Datatype::String }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Datatype {
        self.datatype
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self.datatype {
            Datatype::Double | Datatype::Integer => self.lexical.parse().ok(),
            _ => None,
        }
    }

    pub fn as_timestamp(&self) -> Option<i64> {
        match self.datatype {
            Datatype::DateTime => time::parse_utc(&self.lexical).ok(),
            _ => None,
        }
    }
}

/// Shortest round-tripping decimal text for `x`.
///
/// Zero is `"0"`; magnitudes in `[1e-3, 1e7)` never use an exponent,
/// everything else does.
pub fn canonical_double(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let a = x.abs();
    if (1e-3..1e7).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
    Blank(String),
}

impl Term {
    pub fn iri(s: &str) -> Result<Self, ModelError> {
        Iri::new(s).map(Term::Iri)
    }

    pub fn blank(label: impl Into<String>) -> Result<Self, ModelError> {
        let label = label.into();
        if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(ModelError::InvalidBlank(label));
        }
        Ok(Term::Blank(label))
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }
}

impl From<Iri> for Term {
    fn from(i: Iri) -> Self {
        Term::Iri(i)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

impl fmt::Display for Term {
    /// N-Triples rendering.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write!(f, "<{i}>"),
            Term::Blank(b) => write!(f, "_:{b}"),
            Term::Literal(l) => {
                f.write_str("\"")?;
                for c in l.lexical.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                write!(f, "\"^^<{}>", l.datatype.iri())
            }
        }
    }
}

/// Subject-predicate-object fact. Subjects are never literals and
/// predicates are always IRIs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    subject: Term,
    predicate: Iri,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Iri, object: Term) -> Result<Self, ModelError> {
        if matches!(subject, Term::Literal(_)) {
            return Err(ModelError::LiteralSubject);
        }
        Ok(Triple { subject, predicate, object })
    }

    /// Builds a triple from a predicate given as a term; fails unless it is an IRI.
    pub fn from_terms(subject: Term, predicate: Term, object: Term) -> Result<Self, ModelError> {
        match predicate {
            Term::Iri(p) => Triple::new(subject, p, object),
            other => Err(ModelError::NonIriPredicate(other.to_string())),
        }
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Iri {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <{}> {} .", self.subject, self.predicate, self.object)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iri_rules() {
        assert!(Iri::new("http://x.org/a").is_ok());
        assert!(Iri::new("").is_err());
        assert!(Iri::new("http://x.org/a b").is_err());
        assert!(Iri::new("no-scheme").is_err());
        let ns = Namespace::default();
        assert_eq!(ns.expand("ex:soilMoisture").unwrap().as_str(), "http://example.org/semdrought#soilMoisture");
        assert_eq!(ns.expand("rdf:type").unwrap().as_str(), format!("{RDF}type"));
        assert!(ns.expand("foo:bar").is_err());
        assert_eq!(ns.compact(&ns.ex("x")), "ex:x");
    }

    #[test]
    fn canonical_doubles() {
        assert_eq!(canonical_double(0.0), "0");
        assert_eq!(canonical_double(-0.0), "0");
        assert_eq!(canonical_double(23.5), "23.5");
        assert_eq!(canonical_double(1.0), "1");
        assert_eq!(canonical_double(0.001), "0.001");
        assert_eq!(canonical_double(0.0001), "1e-4");
        assert_eq!(canonical_double(9_999_999.5), "9999999.5");
        assert_eq!(canonical_double(1e7), "1e7");
        assert_eq!(canonical_double(-2.5e-9), "-2.5e-9");
    }

    #[test]
    fn literal_validation() {
        assert!(Literal::new("abc", Datatype::Double).is_err());
        assert!(Literal::new("inf", Datatype::Double).is_err());
        assert!(Literal::new("2023-01-01T00:00:00", Datatype::DateTime).is_err());
        assert!(Literal::new("2023-01-01T00:00:00Z", Datatype::DateTime).is_ok());
        assert!(Literal::double(f64::NAN).is_err());
    }

    #[test]
    fn literal_subject_rejected() {
        let p = Iri::new("http://x.org/p").unwrap();
        let lit = Term::Literal(Literal::string("a"));
        assert!(Triple::new(lit.clone(), p.clone(), lit.clone()).is_err());
        assert!(Triple::from_terms(Term::blank("b").unwrap(), lit.clone(), lit).is_err());
    }

    #[test]
    fn ntriples_escaping() {
        let t = Term::Literal(Literal::string("a \"q\"\n"));
        assert_eq!(t.to_string(), format!("\"a \\\"q\\\"\\n\"^^<{XSD}string>"));
    }
}
