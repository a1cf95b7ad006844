//! Disruption (consolidation/destabilization) index over the citation
//! graph.
//!
//! For a focal work, the evaluated set W holds every work published
//! within the forward horizon that cites the focal work or cites at
//! least one of the focal work's references. With b = 1 when a member
//! cites the focal work and f = 1 when it cites any focal reference,
//! the index is the mean of (b - 2*f*b), which is +1 for a fully
//! disruptive work and -1 for a fully consolidating one. Works with an
//! empty W have no defined index.

use serde::Serialize;

use super::graph::CitationGraph;
use crate::error::{Error, Result};

/// A defined index value for one work.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdResult {
    pub doi: String,
    pub cd: f64,
    /// Size of the evaluated citing set.
    pub n: u64,
}

/// Horizon length in days for a year count (365 days per year plus one
/// leap day per started four-year block: 5 years = 1826 days).
pub fn horizon_days(horizon_years: u32) -> i64 {
    i64::from(horizon_years) * 365 + i64::from(horizon_years / 4)
}

/// Exact numerator and set size for one focal work, or None when the
/// evaluated set is empty.
pub fn cd_fraction(
    graph: &CitationGraph,
    focal: u32,
    horizon_years: u32,
) -> Result<Option<(i64, u64)>> {
    if (focal as usize) >= graph.node_count() {
        return Err(Error::Domain(format!("unknown node {focal}")));
    }
    let t0 = graph.timestamp(focal);
    let t1 = t0 + horizon_days(horizon_years);
    let refs = graph.cites(focal);

    // Candidate citers: everything citing the focal work or one of its
    // references.
    let mut candidates: Vec<u32> = graph.cited_by(focal).to_vec();
    for r in refs {
        candidates.extend_from_slice(graph.cited_by(*r));
    }
    candidates.sort_unstable();
    candidates.dedup();

    let mut n = 0u64;
    let mut numerator = 0i64;
    for i in candidates {
        let t = graph.timestamp(i);
        if t <= t0 || t > t1 {
            continue;
        }
        let cites_focal = graph.has_edge(i, focal);
        let cites_ref = intersects(graph.cites(i), refs);
        if !cites_focal && !cites_ref {
            continue;
        }
        n += 1;
        let b = i64::from(cites_focal);
        let f = i64::from(cites_ref);
        numerator += b - 2 * f * b;
    }
    Ok(if n == 0 { None } else { Some((numerator, n)) })
}

/// The index for one focal work; None when undefined (empty citing set).
pub fn cd_index(
    graph: &CitationGraph,
    focal: u32,
    horizon_years: u32,
) -> Result<Option<CdResult>> {
    Ok(cd_fraction(graph, focal, horizon_years)?.map(|(numerator, n)| CdResult {
        doi: graph.doi(focal).to_owned(),
        cd: numerator as f64 / n as f64,
        n,
    }))
}

/// The index for every node, computed across the requested number of
/// worker threads over one shared read-only graph. Undefined nodes are
/// omitted; results come back in node order regardless of worker count.
pub fn cd_index_all(
    graph: &CitationGraph,
    horizon_years: u32,
    workers: usize,
) -> Result<Vec<CdResult>> {
    let workers = workers.max(1);
    let n = graph.node_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    let chunk = n.div_ceil(workers);
    let mut partials: Vec<Result<Vec<CdResult>>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers {
            let lo = w * chunk;
            let hi = ((w + 1) * chunk).min(n);
            if lo >= hi {
                continue;
            }
            handles.push(scope.spawn(move || -> Result<Vec<CdResult>> {
                let mut out = Vec::new();
                for node in lo..hi {
                    if let Some(r) = cd_index(graph, node as u32, horizon_years)? {
                        out.push(r);
                    }
                }
                Ok(out)
            }));
        }
        for h in handles {
            partials.push(h.join().expect("worker panicked"));
        }
    });
    let mut out = Vec::new();
    for p in partials {
        out.extend(p?);
    }
    Ok(out)
}

/// True when two ascending slices share an element.
fn intersects(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    /// focal = node 0 at day 0 citing refs 1..=k published before it.
    fn graph(nodes: Vec<(String, i64)>, edges: Vec<(u32, u32)>) -> CitationGraph {
        CitationGraph::from_parts(nodes, &edges)
    }

    fn named(stamps: &[i64]) -> Vec<(String, i64)> {
        stamps
            .iter()
            .enumerate()
            .map(|(i, t)| (format!("10.1/{i}"), *t))
            .collect()
    }

    #[test]
    fn all_citers_cite_focal_only() {
        // Nodes: 0 focal (day 100), 1 ref (day 0), 2..4 citers of focal.
        let g = graph(
            named(&[100, 0, 200, 300, 400]),
            vec![(0, 1), (2, 0), (3, 0), (4, 0)],
        );
        let r = cd_index(&g, 0, 5).unwrap().unwrap();
        assert_eq!(r.cd, 1.0);
        assert_eq!(r.n, 3);
    }

    #[test]
    fn mixed_citing_set_balances_to_zero() {
        // 2 cites focal only; 3 cites focal and the ref; 4 cites the ref only.
        let g = graph(
            named(&[100, 0, 200, 300, 400]),
            vec![(0, 1), (2, 0), (3, 0), (3, 1), (4, 1)],
        );
        let r = cd_index(&g, 0, 5).unwrap().unwrap();
        assert_eq!(r.cd, 0.0);
        assert_eq!(r.n, 3);
        assert_eq!(cd_fraction(&g, 0, 5).unwrap(), Some((0, 3)));
    }

    #[test]
    fn empty_window_is_undefined() {
        let g = graph(named(&[100, 0]), vec![(0, 1)]);
        assert!(cd_index(&g, 0, 5).unwrap().is_none());
    }

    #[test]
    fn citers_outside_horizon_are_ignored() {
        // Citer published 1827 days after the focal work: out of window.
        let g = graph(named(&[0, 1827]), vec![(1, 0)]);
        assert!(cd_index(&g, 0, 5).unwrap().is_none());
        // At exactly 1826 days it counts.
        let g = graph(named(&[0, 1826]), vec![(1, 0)]);
        assert_eq!(cd_index(&g, 0, 5).unwrap().unwrap().cd, 1.0);
    }

    #[test]
    fn unknown_node_errors() {
        let g = graph(named(&[0]), vec![]);
        assert!(matches!(cd_index(&g, 7, 5), Err(Error::Domain(_))));
    }

    #[test]
    fn horizon_arithmetic() {
        assert_eq!(horizon_days(5), 1826);
        assert_eq!(horizon_days(1), 365);
        assert_eq!(horizon_days(4), 1461);
    }
}
