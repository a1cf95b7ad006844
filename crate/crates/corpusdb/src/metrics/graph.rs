//! Compact timestamped citation graph.
//!
//! Node identifiers are dense. Adjacency is stored in sorted compact
//! arrays (offset + target vectors), binary-searchable and shareable
//! read-only across worker threads. An edge `a -> b` means `a` cites `b`.

use std::collections::HashMap;

use chrono::NaiveDate;
use rusqlite::Connection;

use crate::error::{Error, Result};

#[derive(Debug)]
pub struct CitationGraph {
    dois: Vec<String>,
    /// Publication timestamp in days since the Unix epoch.
    stamps: Vec<i64>,
    out_offsets: Vec<usize>,
    out_targets: Vec<u32>,
    in_offsets: Vec<usize>,
    in_targets: Vec<u32>,
    index: HashMap<String, u32>,
    /// References whose target is not a node.
    pub dangling_references: u64,
}

impl CitationGraph {
    /// Build from explicit node and edge lists. Duplicate edges collapse;
    /// both adjacency directions are sorted.
    pub fn from_parts(nodes: Vec<(String, i64)>, edges: &[(u32, u32)]) -> Self {
        let n = nodes.len();
        let mut out_adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut in_adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (from, to) in edges {
            out_adj[*from as usize].push(*to);
            in_adj[*to as usize].push(*from);
        }
        let flatten = |mut adj: Vec<Vec<u32>>| {
            let mut offsets = Vec::with_capacity(n + 1);
            let mut targets = Vec::new();
            offsets.push(0);
            for list in &mut adj {
                list.sort_unstable();
                list.dedup();
                targets.extend_from_slice(list);
                offsets.push(targets.len());
            }
            (offsets, targets)
        };
        let (out_offsets, out_targets) = flatten(out_adj);
        let (in_offsets, in_targets) = flatten(in_adj);
        let mut index = HashMap::with_capacity(n);
        for (i, (doi, _)) in nodes.iter().enumerate() {
            index.entry(doi.clone()).or_insert(i as u32);
        }
        CitationGraph {
            stamps: nodes.iter().map(|(_, t)| *t).collect(),
            dois: nodes.into_iter().map(|(d, _)| d).collect(),
            out_offsets,
            out_targets,
            in_offsets,
            in_targets,
            index,
            dangling_references: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.dois.len()
    }

    pub fn doi(&self, node: u32) -> &str {
        &self.dois[node as usize]
    }

    pub fn timestamp(&self, node: u32) -> i64 {
        self.stamps[node as usize]
    }

    pub fn node_by_doi(&self, doi: &str) -> Option<u32> {
        self.index.get(doi).copied()
    }

    /// Works this node cites.
    pub fn cites(&self, node: u32) -> &[u32] {
        let n = node as usize;
        &self.out_targets[self.out_offsets[n]..self.out_offsets[n + 1]]
    }

    /// Works citing this node.
    pub fn cited_by(&self, node: u32) -> &[u32] {
        let n = node as usize;
        &self.in_targets[self.in_offsets[n]..self.in_offsets[n + 1]]
    }

    pub fn has_edge(&self, from: u32, to: u32) -> bool {
        self.cites(from).binary_search(&to).is_ok()
    }

    /// In- and out-neighbors, deduplicated, excluding the node itself.
    pub fn neighbors(&self, node: u32) -> Vec<u32> {
        let mut out: Vec<u32> = self
            .cites(node)
            .iter()
            .chain(self.cited_by(node))
            .copied()
            .filter(|n| *n != node)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Days since the Unix epoch for a (year, month, day) date; month and day
/// default to 1 when missing.
pub fn days_since_epoch(year: i64, month: Option<i64>, day: Option<i64>) -> Option<i64> {
    let date = NaiveDate::from_ymd_opt(
        i32::try_from(year).ok()?,
        u32::try_from(month.unwrap_or(1)).ok()?,
        u32::try_from(day.unwrap_or(1)).ok()?,
    )?;
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("epoch");
    Some((date - epoch).num_days())
}

/// Build the citation graph from a populated database: one node per work
/// with a resolvable date, one edge per reference whose target identifier
/// matches a node. Dangling references are counted, not edged.
pub fn build_graph(conn: &Connection) -> Result<CitationGraph> {
    let mut nodes: Vec<(String, i64)> = Vec::new();
    let mut by_doi: HashMap<String, u32> = HashMap::new();
    let mut node_of_work: HashMap<i64, u32> = HashMap::new();

    let mut works = conn
        .prepare(
            "SELECT id, doi, published_year, published_month, published_day \
             FROM works ORDER BY id",
        )
        .map_err(|e| {
            if e.to_string().contains("no such table") {
                Error::Precondition("graph construction requires a populated works table".into())
            } else {
                Error::Sql(e)
            }
        })?;
    let mut rows = works.query([])?;
    while let Some(row) = rows.next()? {
        let work_id: i64 = row.get(0)?;
        let doi: String = row.get(1)?;
        let year: Option<i64> = row.get(2)?;
        let month: Option<i64> = row.get(3)?;
        let day: Option<i64> = row.get(4)?;
        let stamp = match year.and_then(|y| days_since_epoch(y, month, day)) {
            Some(s) => s,
            None => continue, // temporal ordering requires a date
        };
        if by_doi.contains_key(&doi) {
            continue;
        }
        let node = nodes.len() as u32;
        by_doi.insert(doi.clone(), node);
        node_of_work.insert(work_id, node);
        nodes.push((doi, stamp));
    }

    let mut dangling = 0u64;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let refs_present: i64 = conn.query_row(
        "SELECT count(*) FROM sqlite_master WHERE type = 'table' AND name = 'work_references'",
        [],
        |r| r.get(0),
    )?;
    if refs_present > 0 {
        let mut refs = conn.prepare(
            "SELECT work_id, doi FROM work_references WHERE doi IS NOT NULL ORDER BY id",
        )?;
        let mut rows = refs.query([])?;
        while let Some(row) = rows.next()? {
            let work_id: i64 = row.get(0)?;
            let doi: String = row.get(1)?;
            match (node_of_work.get(&work_id), by_doi.get(&doi)) {
                (Some(from), Some(to)) => edges.push((*from, *to)),
                _ => dangling += 1,
            }
        }
    }

    let mut graph = CitationGraph::from_parts(nodes, &edges);
    graph.dangling_references = dangling;
    Ok(graph)
}

/// Average local clustering coefficient of the distance-2 citation
/// neighborhood of a work: the subgraph induced by the work, everything
/// citing or cited by it, and everything citing or cited by those, viewed
/// as an undirected simple graph.
pub fn clustering_sample(graph: &CitationGraph, focal: u32) -> Result<f64> {
    if (focal as usize) >= graph.node_count() {
        return Err(Error::Domain(format!("unknown node {focal}")));
    }
    let mut members: Vec<u32> = vec![focal];
    let ring1 = graph.neighbors(focal);
    members.extend(&ring1);
    for s in &ring1 {
        members.extend(graph.neighbors(*s));
    }
    members.sort_unstable();
    members.dedup();

    // Undirected adjacency within the induced subgraph.
    let position: HashMap<u32, usize> =
        members.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); members.len()];
    for (i, node) in members.iter().enumerate() {
        for n in graph.neighbors(*node) {
            if let Some(&j) = position.get(&n) {
                adj[i].push(j);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    let mut total = 0.0;
    for neighbors in &adj {
        let k = neighbors.len();
        if k < 2 {
            continue;
        }
        let mut triangles = 0u64;
        for (a, &u) in neighbors.iter().enumerate() {
            for &w in &neighbors[a + 1..] {
                if adj[u].binary_search(&w).is_ok() {
                    triangles += 1;
                }
            }
        }
        total += 2.0 * triangles as f64 / (k as f64 * (k as f64 - 1.0));
    }
    Ok(total / members.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_nodes(n: usize) -> Vec<(String, i64)> {
        (0..n).map(|i| (format!("10.1/{i}"), i as i64)).collect()
    }

    #[test]
    fn adjacency_is_sorted_and_deduplicated() {
        let g = CitationGraph::from_parts(
            simple_nodes(3),
            &[(2, 0), (2, 1), (2, 0), (1, 0)],
        );
        assert_eq!(g.cites(2), &[0, 1]);
        assert_eq!(g.cited_by(0), &[1, 2]);
        assert!(g.has_edge(2, 0));
        assert!(!g.has_edge(0, 2));
    }

    #[test]
    fn isolated_focal_has_zero_clustering() {
        let g = CitationGraph::from_parts(simple_nodes(1), &[]);
        assert_eq!(clustering_sample(&g, 0).unwrap(), 0.0);
    }

    #[test]
    fn citation_triangle_is_fully_clustered() {
        let g = CitationGraph::from_parts(simple_nodes(3), &[(2, 1), (2, 0), (1, 0)]);
        assert_eq!(clustering_sample(&g, 0).unwrap(), 1.0);
    }

    #[test]
    fn unknown_node_is_a_domain_error() {
        let g = CitationGraph::from_parts(simple_nodes(1), &[]);
        assert!(matches!(clustering_sample(&g, 9), Err(Error::Domain(_))));
    }

    #[test]
    fn day_arithmetic() {
        assert_eq!(days_since_epoch(1970, None, None), Some(0));
        assert_eq!(days_since_epoch(1970, Some(1), Some(2)), Some(1));
        assert_eq!(days_since_epoch(1969, Some(12), Some(31)), Some(-1));
        assert_eq!(days_since_epoch(2020, Some(2), Some(30)), None);
    }
}
