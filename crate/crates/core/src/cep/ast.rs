use std::fmt;

use crate::model::canonical_double;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Cmp {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Gt => lhs > rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ne => lhs != rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
            Cmp::Eq => "==",
            Cmp::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggFn {
    Avg,
    Min,
    Max,
    Sum,
    Count,
}

impl AggFn {
    pub fn keyword(self) -> &'static str {
        match self {
            AggFn::Avg => "AVG",
            AggFn::Min => "MIN",
            AggFn::Max => "MAX",
            AggFn::Sum => "SUM",
            AggFn::Count => "COUNT",
        }
    }

    pub(crate) fn from_keyword(s: &str) -> Option<Self> {
        [AggFn::Avg, AggFn::Min, AggFn::Max, AggFn::Sum, AggFn::Count].into_iter().find(|f| f.keyword() == s)
    }
}

/// An event kind as written in a rule: a bare or prefixed name, or an
/// absolute IRI in angle brackets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum KindRef {
    Name(String),
    Iri(String),
}

impl KindRef {
    pub fn as_str(&self) -> &str {
        match self {
            KindRef::Name(s) | KindRef::Iri(s) => s,
        }
    }
}

impl fmt::Display for KindRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KindRef::Name(s) => f.write_str(s),
            KindRef::Iri(s) => write!(f, "<{s}>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PatternExpr {
    /// Some event of `kind` in the window has `value cmp constant`.
    Threshold {
        kind: KindRef,
        cmp: Cmp,
        constant: f64,
    },
    Aggregate {
        func: AggFn,
        kind: KindRef,
        cmp: Cmp,
        constant: f64,
    },
    /// Least-squares slope (value units per day) compared with `constant`.
    Trend {
        kind: KindRef,
        cmp: Cmp,
        constant: f64,
    },
    /// An event of `first` strictly before an event of `then`.
    Seq {
        first: KindRef,
        then: KindRef,
    },
    Absent {
        kind: KindRef,
    },
    And(Vec<PatternExpr>),
    Or(Vec<PatternExpr>),
    Not(Box<PatternExpr>),
}

impl PatternExpr {
    /// True for the node kinds `NOT` may wrap.
    pub fn is_value_predicate(&self) -> bool {
        matches!(self, PatternExpr::Threshold { .. } | PatternExpr::Aggregate { .. } | PatternExpr::Trend { .. })
    }

    /// Every kind referenced by the pattern, in first-occurrence order.
    pub fn kinds(&self) -> Vec<&KindRef> {
        let mut out = Vec::new();
        self.collect_kinds(&mut out);
        out
    }

    fn collect_kinds<'a>(&'a self, out: &mut Vec<&'a KindRef>) {
        match self {
            PatternExpr::Threshold { kind, .. }
            | PatternExpr::Aggregate { kind, .. }
            | PatternExpr::Trend { kind, .. }
            | PatternExpr::Absent { kind } => out.push(kind),
            PatternExpr::Seq { first, then } => {
                out.push(first);
                out.push(then);
            }
            PatternExpr::And(xs) | PatternExpr::Or(xs) => xs.iter().for_each(|x| x.collect_kinds(out)),
            PatternExpr::Not(x) => x.collect_kinds(out),
        }
    }

    /// Rewrites every kind through `f`.
    pub fn map_kinds(&self, f: &impl Fn(&KindRef) -> KindRef) -> PatternExpr {
        match self {
            PatternExpr::Threshold { kind, cmp, constant } => PatternExpr::Threshold { kind: f(kind), cmp: *cmp, constant: *constant },
            PatternExpr::Aggregate { func, kind, cmp, constant } => {
                PatternExpr::Aggregate { func: *func, kind: f(kind), cmp: *cmp, constant: *constant }
            }
            PatternExpr::Trend { kind, cmp, constant } => PatternExpr::Trend { kind: f(kind), cmp: *cmp, constant: *constant },
            PatternExpr::Seq { first, then } => PatternExpr::Seq { first: f(first), then: f(then) },
            PatternExpr::Absent { kind } => PatternExpr::Absent { kind: f(kind) },
            PatternExpr::And(xs) => PatternExpr::And(xs.iter().map(|x| x.map_kinds(f)).collect()),
            PatternExpr::Or(xs) => PatternExpr::Or(xs.iter().map(|x| x.map_kinds(f)).collect()),
            PatternExpr::Not(x) => PatternExpr::Not(Box::new(x.map_kinds(f))),
        }
    }
}

impl fmt::Display for PatternExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternExpr::Threshold { kind, cmp, constant } => {
                write!(f, "{kind} {} {}", cmp.symbol(), canonical_double(*constant))
            }
            PatternExpr::Aggregate { func, kind, cmp, constant } => {
                write!(f, "{}({kind}) {} {}", func.keyword(), cmp.symbol(), canonical_double(*constant))
            }
            PatternExpr::Trend { kind, cmp, constant } => {
                write!(f, "SLOPE({kind}) {} {}", cmp.symbol(), canonical_double(*constant))
            }
            PatternExpr::Seq { first, then } => write!(f, "SEQ({first} -> {then})"),
            PatternExpr::Absent { kind } => write!(f, "ABSENT({kind})"),
            PatternExpr::And(xs) => join(f, xs, " AND ", |x| matches!(x, PatternExpr::And(_) | PatternExpr::Or(_))),
            PatternExpr::Or(xs) => join(f, xs, " OR ", |x| matches!(x, PatternExpr::Or(_))),
            PatternExpr::Not(x) => match **x {
                PatternExpr::And(_) | PatternExpr::Or(_) | PatternExpr::Not(_) => write!(f, "NOT ({x})"),
                _ => write!(f, "NOT {x}"),
            },
        }
    }
}

fn join(f: &mut fmt::Formatter<'_>, xs: &[PatternExpr], sep: &str, paren: impl Fn(&PatternExpr) -> bool) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        if paren(x) {
            write!(f, "({x})")?;
        } else {
            write!(f, "{x}")?;
        }
    }
    Ok(())
}

/// Evaluation window. Without a step the window is tumbling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    /// Seconds.
    pub length: i64,
    /// Seconds; `None` for tumbling windows.
    pub step: Option<i64>,
}

impl WindowSpec {
    pub fn tumbling(length: i64) -> Self {
        WindowSpec { length, step: None }
    }

    pub fn sliding(length: i64, step: i64) -> Self {
        WindowSpec { length, step: Some(step) }
    }

    pub fn is_sliding(&self) -> bool {
        self.step.is_some()
    }

    /// Spacing of window ends.
    pub fn period(&self) -> i64 {
        self.step.unwrap_or(self.length)
    }
}

/// Largest exact unit among `d`, `h` and `m`.
pub fn format_duration(secs: i64) -> String {
    if secs % 86_400 == 0 {
        format!("{}d", secs / 86_400)
    } else if secs % 3_600 == 0 {
        format!("{}h", secs / 3_600)
    } else {
        format!("{}m", secs / 60)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CepRule {
    pub name: String,
    pub window: WindowSpec,
    pub pattern: PatternExpr,
    pub emit: String,
    pub severity: f64,
}

impl fmt::Display for CepRule {
    /// Canonical rule text; parsing it yields an equal rule.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RULE {} WHEN {} WITHIN {}", self.name, self.pattern, format_duration(self.window.length))?;
        if let Some(step) = self.window.step {
            write!(f, " STEP {}", format_duration(step))?;
        }
        write!(f, " EMIT {} SEVERITY {}", self.emit, canonical_double(self.severity))
    }
}
