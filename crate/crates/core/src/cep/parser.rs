//! Recursive-descent parser for the rule language.
//!
//! ```text
//! ruleset := rule+
//! rule    := "RULE" ident "WHEN" or "WITHIN" dur ["STEP" dur] "EMIT" ident ["SEVERITY" num]
//! or      := and {"OR" and}
//! and     := unary {"AND" unary}
//! unary   := ["NOT"] prim
//! prim    := thr | agg | trend | seq | abs | "(" or ")"
//! ```

use std::collections::HashSet;

use super::ast::{AggFn, CepRule, Cmp, KindRef, PatternExpr, WindowSpec};
use super::CepError;

/// Used when a rule has no `SEVERITY` clause.
pub const DEFAULT_SEVERITY: f64 = 1.0;

const KEYWORDS: &[&str] = &[
    "RULE", "WHEN", "WITHIN", "STEP", "EMIT", "SEVERITY", "AND", "OR", "NOT", "AVG", "MIN", "MAX", "SUM", "COUNT", "SLOPE", "SEQ", "ABSENT",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Iri(String),
    Num(f64),
    LParen,
    RParen,
    Arrow,
    Cmp(Cmp),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Iri(s) => format!("<{s}>"),
        Tok::Num(n) => format!("number {n}"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::Cmp(c) => format!("`{}`", c.symbol()),
        Tok::Eof => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, CepError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, expected: &str| CepError::Syntax { line, column, expected: expected.to_string() };

    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                advance(1, &mut i, &mut col);
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            _ => {}
        }
        let tok = match c {
            '(' => {
                advance(1, &mut i, &mut col);
                Tok::LParen
            }
            ')' => {
                advance(1, &mut i, &mut col);
                Tok::RParen
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                advance(2, &mut i, &mut col);
                Tok::Arrow
            }
            '<' if looks_like_iri(&chars[i..]) => {
                let end = chars[i..].iter().position(|&c| c == '>').expect("checked") + i;
                let iri: String = chars[i + 1..end].iter().collect();
                advance(end + 1 - i, &mut i, &mut col);
                Tok::Iri(iri)
            }
            '<' | '>' | '=' | '!' => {
                let two = chars.get(i + 1) == Some(&'=');
                let cmp = match (c, two) {
                    ('<', false) => Cmp::Lt,
                    ('<', true) => Cmp::Le,
                    ('>', false) => Cmp::Gt,
                    ('>', true) => Cmp::Ge,
                    ('=', true) => Cmp::Eq,
                    ('!', true) => Cmp::Ne,
                    _ => return Err(err(start_line, start_col, "comparison operator")),
                };
                advance(if two { 2 } else { 1 }, &mut i, &mut col);
                Tok::Cmp(cmp)
            }
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let s: String = chars[i..j].iter().collect();
                let n: f64 = s.parse().map_err(|_| err(start_line, start_col, "number"))?;
                advance(j - i, &mut i, &mut col);
                Tok::Num(n)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                // prefixed name, e.g. ex:soilMoisture
                if j + 1 < chars.len() && chars[j] == ':' && is_local_char(chars[j + 1]) {
                    j += 1;
                    while j < chars.len() && is_local_char(chars[j]) {
                        j += 1;
                    }
                }
                let s: String = chars[i..j].iter().collect();
                advance(j - i, &mut i, &mut col);
                Tok::Ident(s)
            }
            _ => return Err(err(start_line, start_col, "a token")),
        };
        out.push(Token { tok, line: start_line, column: start_col });
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

fn is_local_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '/'
}

/// `<scheme://...>` with no whitespace before the closing bracket.
fn looks_like_iri(rest: &[char]) -> bool {
    let Some(end) = rest.iter().position(|&c| c == '>' || c.is_whitespace()) else { return false };
    if rest[end] != '>' || end < 2 {
        return false;
    }
    let body: String = rest[1..end].iter().collect();
    body.find("://").is_some_and(|i| i > 0)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, CepError> {
        let t = self.peek();
        Err(CepError::Syntax { line: t.line, column: t.column, expected: format!("expected {expected}, found {}", describe(&t.tok)) })
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), CepError> {
        if self.at_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            self.fail(&format!("`{kw}`"))
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), CepError> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(&describe(&tok))
        }
    }

    /// Plain identifier (no prefix, not a keyword).
    fn ident(&mut self) -> Result<String, CepError> {
        match &self.peek().tok {
            Tok::Ident(s) if !s.contains(':') && !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.fail("identifier"),
        }
    }

    fn term(&mut self) -> Result<KindRef, CepError> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let k = KindRef::Name(s.clone());
                self.bump();
                Ok(k)
            }
            Tok::Iri(s) => {
                let k = KindRef::Iri(s.clone());
                self.bump();
                Ok(k)
            }
            _ => self.fail("event kind"),
        }
    }

    fn number(&mut self) -> Result<f64, CepError> {
        match self.peek().tok {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.fail("number"),
        }
    }

    fn cmp(&mut self) -> Result<Cmp, CepError> {
        match self.peek().tok {
            Tok::Cmp(c) => {
                self.bump();
                Ok(c)
            }
            _ => self.fail("comparison operator"),
        }
    }

    fn duration(&mut self) -> Result<i64, CepError> {
        let (line, column) = (self.peek().line, self.peek().column);
        let n = self.number()?;
        let unit = match &self.peek().tok {
            Tok::Ident(u) if u == "d" => 86_400.0,
            Tok::Ident(u) if u == "h" => 3_600.0,
            Tok::Ident(u) if u == "m" => 60.0,
            _ => return self.fail("duration unit `d`, `h` or `m`"),
        };
        self.bump();
        let secs = n * unit;
        if !(secs > 0.0 && secs.is_finite() && secs.fract() == 0.0 && secs % 60.0 == 0.0 && secs < 9.0e15) {
            return Err(CepError::Semantic(format!("line {line}, column {column}: duration must be a positive whole number of minutes")));
        }
        Ok(secs as i64)
    }

    fn rule(&mut self) -> Result<CepRule, CepError> {
        self.keyword("RULE")?;
        let name = self.ident()?;
        self.keyword("WHEN")?;
        let pattern = self.or()?;
        self.keyword("WITHIN")?;
        let length = self.duration()?;
        let step = if self.at_keyword("STEP") {
            self.bump();
            Some(self.duration()?)
        } else {
            None
        };
        self.keyword("EMIT")?;
        let emit = self.ident()?;
        let severity = if self.at_keyword("SEVERITY") {
            self.bump();
            self.number()?
        } else {
            DEFAULT_SEVERITY
        };
        let rule = CepRule { name, window: WindowSpec { length, step }, pattern, emit, severity };
        check_rule(&rule)?;
        Ok(rule)
    }

    fn or(&mut self) -> Result<PatternExpr, CepError> {
        let mut xs = vec![self.and()?];
        while self.at_keyword("OR") {
            self.bump();
            xs.push(self.and()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { PatternExpr::Or(xs) })
    }

    fn and(&mut self) -> Result<PatternExpr, CepError> {
        let mut xs = vec![self.unary()?];
        while self.at_keyword("AND") {
            self.bump();
            xs.push(self.unary()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { PatternExpr::And(xs) })
    }

    fn unary(&mut self) -> Result<PatternExpr, CepError> {
        if self.at_keyword("NOT") {
            let (line, column) = (self.peek().line, self.peek().column);
            self.bump();
            let inner = self.prim()?;
            if !inner.is_value_predicate() {
                return Err(CepError::Semantic(format!(
                    "line {line}, column {column}: NOT applies only to threshold, aggregate or SLOPE predicates"
                )));
            }
            return Ok(PatternExpr::Not(Box::new(inner)));
        }
        self.prim()
    }

    fn prim(&mut self) -> Result<PatternExpr, CepError> {
        if self.peek().tok == Tok::LParen {
            self.bump();
            let inner = self.or()?;
            self.expect(Tok::RParen)?;
            return Ok(inner);
        }
        let call = *self.peek_at(1) == Tok::LParen;
        let head = match &self.peek().tok {
            Tok::Ident(s) if call => s.clone(),
            _ => String::new(),
        };
        if let Some(func) = AggFn::from_keyword(&head) {
            self.bump();
            self.expect(Tok::LParen)?;
            let kind = self.term()?;
            self.expect(Tok::RParen)?;
            let cmp = self.cmp()?;
            let constant = self.number()?;
            return Ok(PatternExpr::Aggregate { func, kind, cmp, constant });
        }
        match head.as_str() {
            "SLOPE" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let kind = self.term()?;
                self.expect(Tok::RParen)?;
                let cmp = self.cmp()?;
                let constant = self.number()?;
                Ok(PatternExpr::Trend { kind, cmp, constant })
            }
            "SEQ" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let first = self.term()?;
                self.expect(Tok::Arrow)?;
                let then = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(PatternExpr::Seq { first, then })
            }
            "ABSENT" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let kind = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(PatternExpr::Absent { kind })
            }
            _ => {
                let kind = self.term()?;
                let cmp = self.cmp()?;
                let constant = self.number()?;
                Ok(PatternExpr::Threshold { kind, cmp, constant })
            }
        }
    }
}

fn check_pattern(p: &PatternExpr) -> Result<(), CepError> {
    match p {
        PatternExpr::Threshold { constant, .. } | PatternExpr::Aggregate { constant, .. } | PatternExpr::Trend { constant, .. } => {
            if constant.is_finite() {
                Ok(())
            } else {
                Err(CepError::Semantic("comparison constants must be finite".into()))
            }
        }
        PatternExpr::Seq { .. } | PatternExpr::Absent { .. } => Ok(()),
        PatternExpr::And(xs) | PatternExpr::Or(xs) => xs.iter().try_for_each(check_pattern),
        PatternExpr::Not(x) if x.is_value_predicate() => check_pattern(x),
        PatternExpr::Not(_) => Err(CepError::Semantic("NOT applies only to threshold, aggregate or SLOPE predicates".into())),
    }
}

/// Structural checks shared by the parser and programmatic construction.
pub fn check_rule(rule: &CepRule) -> Result<(), CepError> {
    let sem = |m: String| Err(CepError::Semantic(format!("rule `{}`: {m}", rule.name)));
    if rule.window.length <= 0 {
        return sem("window length must be positive".into());
    }
    if let Some(step) = rule.window.step {
        if step <= 0 || step > rule.window.length {
            return sem(format!("STEP must be positive and at most the window length (step {step}s, length {}s)", rule.window.length));
        }
    }
    if !(0.0..=1.0).contains(&rule.severity) {
        return sem(format!("SEVERITY {} outside [0, 1]", rule.severity));
    }
    check_pattern(&rule.pattern)
}

/// Parses one or more rules. Rule names must be unique.
pub fn parse_ruleset(text: &str) -> Result<Vec<CepRule>, CepError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let mut rules = Vec::new();
    let mut names = HashSet::new();
    loop {
        rules.push(p.rule()?);
        let name = &rules.last().unwrap().name;
        if !names.insert(name.clone()) {
            return Err(CepError::Semantic(format!("duplicate rule name `{name}`")));
        }
        if p.peek().tok == Tok::Eof {
            break;
        }
    }
    Ok(rules)
}

/// Parses a standalone duration such as `90d`, in seconds.
pub fn parse_duration(text: &str) -> Result<i64, CepError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let secs = p.duration()?;
    if p.peek().tok != Tok::Eof {
        return p.fail("end of input");
    }
    Ok(secs)
}

/// Parses exactly one rule.
pub fn parse_rule(text: &str) -> Result<CepRule, CepError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let rule = p.rule()?;
    if p.peek().tok != Tok::Eof {
        return p.fail("end of input");
    }
    Ok(rule)
}
