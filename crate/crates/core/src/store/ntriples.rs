//! Line-oriented N-Triples subset: IRIs, blank nodes and typed literals.

use crate::model::{Datatype, Iri, Literal, Namespace, Term, Triple};

/// Parses one term from the start of `s`, returning the rest of the input.
pub(crate) fn parse_term<'a>(s: &'a str, ns: &Namespace) -> Result<(Term, &'a str), String> {
    let s = s.trim_start();
    if let Some(rest) = s.strip_prefix('<') {
        let end = rest.find('>').ok_or("unterminated IRI")?;
        let iri = Iri::new(&rest[..end]).map_err(|e| e.to_string())?;
        return Ok((Term::Iri(iri), &rest[end + 1..]));
    }
    if let Some(rest) = s.strip_prefix("_:") {
        let end = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-')).unwrap_or(rest.len());
        let term = Term::blank(&rest[..end]).map_err(|e| e.to_string())?;
        return Ok((term, &rest[end..]));
    }
    if let Some(rest) = s.strip_prefix('"') {
        let mut lexical = String::new();
        let mut chars = rest.char_indices();
        let close = loop {
            match chars.next() {
                None => return Err("unterminated literal".into()),
                Some((i, '"')) => break i,
                Some((_, '\\')) => match chars.next() {
                    Some((_, '"')) => lexical.push('"'),
                    Some((_, '\\')) => lexical.push('\\'),
                    Some((_, 'n')) => lexical.push('\n'),
                    Some((_, 'r')) => lexical.push('\r'),
                    Some((_, 't')) => lexical.push('\t'),
                    _ => return Err("bad escape in literal".into()),
                },
                Some((_, c)) => lexical.push(c),
            }
        };
        let rest = rest[close + 1..].strip_prefix("^^").ok_or("literal without datatype")?;
        let (dt_iri, rest) = if let Some(r) = rest.strip_prefix('<') {
            let end = r.find('>').ok_or("unterminated datatype IRI")?;
            (r[..end].to_string(), &r[end + 1..])
        } else {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            let iri = ns.expand(&rest[..end]).map_err(|e| e.to_string())?;
            (iri.as_str().to_string(), &rest[end..])
        };
        let dt = Datatype::from_iri(&dt_iri).ok_or_else(|| format!("unsupported datatype <{dt_iri}>"))?;
        let lit = Literal::new(lexical, dt).map_err(|e| e.to_string())?;
        return Ok((Term::Literal(lit), rest));
    }
    Err(format!("expected a term at `{}`", s.chars().take(20).collect::<String>()))
}

pub(crate) fn parse_line(line: &str) -> Result<Triple, String> {
    let ns = Namespace::default();
    let (s, rest) = parse_term(line, &ns)?;
    let (p, rest) = parse_term(rest, &ns)?;
    let (o, rest) = parse_term(rest, &ns)?;
    if rest.trim() != "." {
        return Err("expected terminal ` .`".into());
    }
    if !rest.starts_with(char::is_whitespace) {
        return Err("expected whitespace before terminal `.`".into());
    }
    Triple::from_terms(s, p, o).map_err(|e| e.to_string())
}
