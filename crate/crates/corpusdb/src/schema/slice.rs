//! Slice specifications: which columns to materialize, which rows to
//! keep, and which containers to sample.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use super::{trace, SchemaGraph};
use crate::error::{Error, Result};

/// Deterministic container sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    /// Inclusion probability in [0, 1].
    pub probability: f64,
    pub seed: u64,
}

/// An external database made visible to the row expression under a name.
#[derive(Debug, Clone)]
pub struct Attachment {
    pub name: String,
    pub path: PathBuf,
}

/// A horizontal/vertical slice request.
///
/// `columns` holds `table.column` or `table.*` selectors; an empty set
/// selects every container-sourced table in full. `row_expression` is an
/// SQL boolean expression over schema columns; it may consult attached
/// databases through subqueries (`doi IN (SELECT doi FROM ext.t)`).
#[derive(Debug, Clone, Default)]
pub struct SliceSpec {
    pub columns: BTreeSet<String>,
    pub row_expression: Option<String>,
    pub sampling: Option<Sampling>,
    pub attachments: Vec<Attachment>,
}

impl SliceSpec {
    pub fn all() -> Self {
        SliceSpec::default()
    }

    pub fn with_columns<I: IntoIterator<Item = S>, S: Into<String>>(selectors: I) -> Self {
        SliceSpec {
            columns: selectors.into_iter().map(Into::into).collect(),
            ..SliceSpec::default()
        }
    }
}

/// The outcome of resolving a [`SliceSpec`] against a schema.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResolvedSlice {
    /// Columns to materialize, per table. Closed over each table's key,
    /// foreign keys, container id column, and all ancestors up to the root.
    pub columns: BTreeMap<String, BTreeSet<String>>,
    /// Every schema column the row expression reads.
    pub expr_deps: BTreeSet<(String, String)>,
}

impl ResolvedSlice {
    pub fn tables(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }

    pub fn contains(&self, table: &str, column: &str) -> bool {
        self.columns
            .get(table)
            .map(|cols| cols.contains(column))
            .unwrap_or(false)
    }

    /// Tables named by the row expression.
    pub fn expr_tables(&self) -> BTreeSet<String> {
        self.expr_deps.iter().map(|(t, _)| t.clone()).collect()
    }
}

/// Expand selectors, force-include structural columns, and trace the row
/// expression's column dependencies.
pub fn resolve_slice(spec: &SliceSpec, schema: &SchemaGraph) -> Result<ResolvedSlice> {
    if let Some(s) = &spec.sampling {
        if !(0.0..=1.0).contains(&s.probability) {
            return Err(Error::Domain(format!(
                "sampling probability {} outside [0, 1]",
                s.probability
            )));
        }
    }

    let mut resolved = ResolvedSlice::default();

    let selectors: Vec<String> = if spec.columns.is_empty() {
        schema
            .container_tables()
            .map(|t| format!("{}.*", t.name))
            .collect()
    } else {
        spec.columns.iter().cloned().collect()
    };

    for selector in &selectors {
        let (table_name, column) = selector
            .split_once('.')
            .ok_or_else(|| Error::Resolution(format!("selector {selector}: expected table.column")))?;
        let table = schema
            .table(table_name)
            .ok_or_else(|| Error::Resolution(format!("selector {selector}: unknown table")))?;
        let entry = resolved.columns.entry(table.name.clone()).or_default();
        if column == "*" {
            entry.extend(table.columns.iter().map(|c| c.name.clone()));
        } else if table.column(column).is_some() {
            entry.insert(column.to_owned());
        } else {
            return Err(Error::Resolution(format!(
                "selector {selector}: unknown column"
            )));
        }
    }

    if let Some(expr) = &spec.row_expression {
        resolved.expr_deps = trace_expression(expr, schema, &spec.attachments)?;
    }

    // Close over structural columns and ancestors. Tables named only by
    // the expression are not materialized, but the ancestors of selected
    // tables always are (keys only, unless also selected).
    let selected: Vec<String> = resolved.columns.keys().cloned().collect();
    for name in selected {
        force_include(&mut resolved.columns, schema, &name);
        for ancestor in schema.ancestors(&name) {
            force_include(&mut resolved.columns, schema, &ancestor.name);
        }
    }

    Ok(resolved)
}

fn force_include(
    columns: &mut BTreeMap<String, BTreeSet<String>>,
    schema: &SchemaGraph,
    table: &str,
) {
    let t = schema.table(table).expect("validated");
    columns
        .entry(table.to_owned())
        .or_default()
        .extend(t.forced_columns());
}

/// Trace which schema columns an expression reads by preparing a dummy
/// query whose only column references come from the expression itself.
fn trace_expression(
    expr: &str,
    schema: &SchemaGraph,
    attachments: &[Attachment],
) -> Result<BTreeSet<(String, String)>> {
    let from: Vec<&str> = schema.container_tables().map(|t| t.name.as_str()).collect();
    if from.is_empty() {
        return Err(Error::Resolution(
            "row expressions require container-sourced tables in the schema".into(),
        ));
    }
    let probe = format!("SELECT 1 FROM {} WHERE ({expr})", from.join(", "));
    let report = trace::trace_query(&probe, schema, attachments).map_err(|e| match e {
        Error::Resolution(msg) => Error::Resolution(format!("row expression: {msg}")),
        Error::Sql(err) => Error::Resolution(format!("row expression: {err}")),
        other => other,
    })?;
    Ok(report.columns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_columns_forced() {
        let schema = SchemaGraph::bundled();
        let spec = SliceSpec::with_columns(["works.doi"]);
        let plan = resolve_slice(&spec, &schema).unwrap();
        assert!(plan.contains("works", "doi"));
        assert!(plan.contains("works", "id"));
        assert!(plan.contains("works", "container_id"));
        assert_eq!(plan.columns.len(), 1);
    }

    #[test]
    fn ancestors_closed() {
        let schema = SchemaGraph::bundled();
        let spec = SliceSpec::with_columns(["work_authors.*"]);
        let plan = resolve_slice(&spec, &schema).unwrap();
        let authors = schema.table("work_authors").unwrap();
        for c in &authors.columns {
            assert!(plan.contains("work_authors", &c.name));
        }
        assert!(plan.contains("works", "id"));
        assert!(plan.contains("works", "container_id"));
        assert!(!plan.contains("works", "doi"));
    }

    #[test]
    fn expression_dependencies_traced() {
        let schema = SchemaGraph::bundled();
        let spec = SliceSpec {
            row_expression: Some("published_year BETWEEN 2017 AND 2021".into()),
            ..SliceSpec::with_columns(["works.doi"])
        };
        let plan = resolve_slice(&spec, &schema).unwrap();
        let deps: Vec<_> = plan.expr_deps.iter().cloned().collect();
        assert_eq!(
            deps,
            vec![("works".to_string(), "published_year".to_string())]
        );
    }

    #[test]
    fn unknown_selector_names_the_offender() {
        let schema = SchemaGraph::bundled();
        let err = resolve_slice(&SliceSpec::with_columns(["works.zap"]), &schema).unwrap_err();
        assert!(err.to_string().contains("works.zap"));
        let err = resolve_slice(&SliceSpec::with_columns(["zap.*"]), &schema).unwrap_err();
        assert!(err.to_string().contains("zap.*"));
    }

    #[test]
    fn probability_bounds_checked() {
        let schema = SchemaGraph::bundled();
        let spec = SliceSpec {
            sampling: Some(Sampling {
                probability: 1.5,
                seed: 1,
            }),
            ..SliceSpec::all()
        };
        assert!(matches!(
            resolve_slice(&spec, &schema),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn empty_spec_selects_all_container_tables() {
        let schema = SchemaGraph::bundled();
        let plan = resolve_slice(&SliceSpec::all(), &schema).unwrap();
        assert_eq!(plan.columns.len(), 8);
        let works = schema.table("works").unwrap();
        assert_eq!(plan.columns["works"].len(), works.columns.len());
    }
}
