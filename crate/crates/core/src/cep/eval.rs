//! Window kernels and pattern evaluation over one window's events.

use super::ast::{AggFn, PatternExpr};
use super::{CepError, EventId, StoredEvent};
use crate::model::time::DAY;

/// Standard aggregates. `COUNT`/`SUM` of nothing is 0; the others fail on
/// an empty window.
pub fn window_aggregate(events: &[(i64, f64)], func: AggFn) -> Result<f64, CepError> {
    match func {
        AggFn::Count => return Ok(events.len() as f64),
        AggFn::Sum => return Ok(events.iter().map(|&(_, v)| v).sum()),
        _ => {}
    }
    if events.is_empty() {
        return Err(CepError::EmptyWindow);
    }
    let values = events.iter().map(|&(_, v)| v);
    Ok(match func {
        AggFn::Avg => values.sum::<f64>() / events.len() as f64,
        AggFn::Min => values.fold(f64::INFINITY, f64::min),
        AggFn::Max => values.fold(f64::NEG_INFINITY, f64::max),
        AggFn::Count | AggFn::Sum => unreachable!(),
    })
}

/// Least-squares slope in value units per day.
pub fn slope(points: &[(i64, f64)]) -> Result<f64, CepError> {
    if points.len() < 2 {
        return Err(CepError::Degenerate);
    }
    let t0 = points[0].0;
    let n = points.len() as f64;
    let days = |t: i64| (t - t0) as f64 / DAY as f64;
    let t_mean = points.iter().map(|&(t, _)| days(t)).sum::<f64>() / n;
    let v_mean = points.iter().map(|&(_, v)| v).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, v) in points {
        let dt = days(t) - t_mean;
        sxy += dt * (v - v_mean);
        sxx += dt * dt;
    }
    if sxx == 0.0 {
        return Err(CepError::Degenerate);
    }
    Ok(sxy / sxx)
}

/// Pattern truth over `window` (events in timestamp order). When true,
/// returns the contributing events.
pub(crate) fn evaluate(pattern: &PatternExpr, window: &[StoredEvent]) -> Option<Vec<EventId>> {
    fn of_kind<'a>(window: &'a [StoredEvent], kind: &'a str) -> impl Iterator<Item = &'a StoredEvent> + 'a {
        window.iter().filter(move |e| e.event.kind == kind)
    }
    let valued = |kind: &str| -> Vec<(i64, f64, EventId)> {
        of_kind(window, kind).filter_map(|e| e.event.value.map(|v| (e.event.timestamp, v, e.id))).collect()
    };
    match pattern {
        PatternExpr::Threshold { kind, cmp, constant } => {
            let hits: Vec<EventId> =
                valued(kind.as_str()).into_iter().filter(|&(_, v, _)| cmp.holds(v, *constant)).map(|(_, _, id)| id).collect();
            (!hits.is_empty()).then_some(hits)
        }
        PatternExpr::Aggregate { func, kind, cmp, constant } => {
            let (value, ids) = if *func == AggFn::Count {
                let ids: Vec<EventId> = of_kind(window, kind.as_str()).map(|e| e.id).collect();
                (ids.len() as f64, ids)
            } else {
                let pts = valued(kind.as_str());
                let pairs: Vec<(i64, f64)> = pts.iter().map(|&(t, v, _)| (t, v)).collect();
                (window_aggregate(&pairs, *func).ok()?, pts.into_iter().map(|(_, _, id)| id).collect())
            };
            cmp.holds(value, *constant).then_some(ids)
        }
        PatternExpr::Trend { kind, cmp, constant } => {
            let pts = valued(kind.as_str());
            let pairs: Vec<(i64, f64)> = pts.iter().map(|&(t, v, _)| (t, v)).collect();
            let s = slope(&pairs).ok()?;
            cmp.holds(s, *constant).then(|| pts.into_iter().map(|(_, _, id)| id).collect())
        }
        PatternExpr::Seq { first, then } => {
            let pairs = seq_pairs(window, first.as_str(), then.as_str());
            (!pairs.is_empty()).then(|| pairs.into_iter().flat_map(|(a, b)| [a, b]).collect())
        }
        PatternExpr::Absent { kind } => of_kind(window, kind.as_str()).next().is_none().then(Vec::new),
        PatternExpr::And(xs) => {
            let mut ids = Vec::new();
            for x in xs {
                ids.extend(evaluate(x, window)?);
            }
            Some(normalize(ids))
        }
        PatternExpr::Or(xs) => {
            let mut any = false;
            let mut ids = Vec::new();
            for x in xs {
                if let Some(more) = evaluate(x, window) {
                    any = true;
                    ids.extend(more);
                }
            }
            any.then(|| normalize(ids))
        }
        PatternExpr::Not(x) => evaluate(x, window).is_none().then(Vec::new),
    }
}

fn normalize(mut ids: Vec<EventId>) -> Vec<EventId> {
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// Earliest-first, non-overlapping `(first, then)` matches with strictly
/// increasing timestamps.
fn seq_pairs(window: &[StoredEvent], first: &str, then: &str) -> Vec<(EventId, EventId)> {
    let mut pairs = Vec::new();
    let mut pending: Option<&StoredEvent> = None;
    for e in window {
        if let Some(a) = pending {
            if e.event.kind == then && e.event.timestamp > a.event.timestamp {
                pairs.push((a.id, e.id));
                pending = None;
                continue;
            }
        }
        if pending.is_none() && e.event.kind == first {
            pending = Some(e);
        }
    }
    pairs
}
