//! Deterministic topological ordering of tables.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use super::SchemaGraph;
use crate::error::{Error, Result};

/// Order the requested tables so that every dependency (containment parent
/// or foreign-key target) precedes its dependents. Ties are broken by
/// table name, so the order is deterministic. Ordering is computed over
/// the whole graph, which keeps transitive constraints intact even when
/// intermediate tables are not requested.
pub fn topological_order(tables: &BTreeSet<String>, graph: &SchemaGraph) -> Result<Vec<String>> {
    for t in tables {
        if !graph.contains(t) {
            return Err(Error::Resolution(format!("unknown table {t}")));
        }
    }

    let mut indegree: BTreeMap<&str, usize> = BTreeMap::new();
    let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for name in graph.table_names() {
        let deps = graph.dependencies(name);
        indegree.insert(name, deps.len());
        for dep in deps {
            children.entry(dep).or_default().push(name);
        }
    }

    // Min-heap on name via Reverse for lexicographic tie-breaking.
    let mut ready: BinaryHeap<std::cmp::Reverse<&str>> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(n, _)| std::cmp::Reverse(*n))
        .collect();

    let mut order = Vec::new();
    while let Some(std::cmp::Reverse(name)) = ready.pop() {
        order.push(name);
        if let Some(next) = children.get(name) {
            for child in next {
                let d = indegree.get_mut(child).expect("known table");
                *d -= 1;
                if *d == 0 {
                    ready.push(std::cmp::Reverse(child));
                }
            }
        }
    }

    if order.len() != indegree.len() {
        return Err(Error::Cycle(find_cycle(graph, &indegree)));
    }

    Ok(order
        .into_iter()
        .filter(|n| tables.contains(*n))
        .map(str::to_owned)
        .collect())
}

/// Walk unresolved tables until one repeats, producing a concrete cycle
/// for the error message.
fn find_cycle(graph: &SchemaGraph, indegree: &BTreeMap<&str, usize>) -> Vec<String> {
    let stuck: BTreeSet<&str> = indegree
        .iter()
        .filter(|(_, d)| **d > 0)
        .map(|(n, _)| *n)
        .collect();
    let start = *stuck.iter().next().expect("cycle exists");
    let mut path = vec![start];
    let mut seen = BTreeSet::from([start]);
    let mut cur = start;
    loop {
        let next = graph
            .dependencies(cur)
            .into_iter()
            .find(|d| stuck.contains(d))
            .expect("stuck table keeps a stuck dependency");
        if !seen.insert(next) {
            let from = path.iter().position(|p| *p == next).unwrap_or(0);
            let mut cycle: Vec<String> = path[from..].iter().map(|s| s.to_string()).collect();
            cycle.push(next.to_owned());
            return cycle;
        }
        path.push(next);
        cur = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{ColumnSchema, SemanticKind, TableSchema};

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_chain() {
        let schema = SchemaGraph::bundled();
        let order = topological_order(
            &set(&["work_authors", "author_affiliations", "works"]),
            &schema,
        )
        .unwrap();
        assert_eq!(order, vec!["works", "work_authors", "author_affiliations"]);
    }

    #[test]
    fn siblings_in_name_order() {
        let schema = SchemaGraph::bundled();
        let order =
            topological_order(&set(&["work_subjects", "works", "work_references"]), &schema)
                .unwrap();
        assert_eq!(order, vec!["works", "work_references", "work_subjects"]);
    }

    #[test]
    fn foreign_key_cycle_detected() {
        let a = TableSchema::new(
            "a",
            vec![
                ColumnSchema::new("id", SemanticKind::Key, false),
                ColumnSchema::new(
                    "b_id",
                    SemanticKind::ForeignKey { target: "b".into() },
                    true,
                ),
            ],
            None,
            None,
        )
        .unwrap();
        let b = TableSchema::new(
            "b",
            vec![
                ColumnSchema::new("id", SemanticKind::Key, false),
                ColumnSchema::new(
                    "a_id",
                    SemanticKind::ForeignKey { target: "a".into() },
                    true,
                ),
            ],
            None,
            None,
        )
        .unwrap();
        let schema = SchemaGraph::new(vec![a, b]).unwrap();
        match topological_order(&set(&["a", "b"]), &schema) {
            Err(Error::Cycle(cycle)) => {
                assert!(cycle.len() >= 3);
                assert_eq!(cycle.first(), cycle.last());
            }
            other => panic!("expected cycle error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_table_is_a_resolution_error() {
        let schema = SchemaGraph::bundled();
        assert!(matches!(
            topological_order(&set(&["nope"]), &schema),
            Err(Error::Resolution(_))
        ));
    }
}
