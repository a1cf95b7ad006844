//! Column-usage tracing via dummy query execution.
//!
//! A query is prepared against an empty shadow database that mirrors the
//! schema, with the engine's authorizer hook recording every column read.
//! The query plan of the same dummy execution supplies the set of scanned
//! tables (a query such as `SELECT count(*) FROM works` reads no column
//! but still requires the table).

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::{Arc, Mutex};

use rusqlite::hooks::{AuthAction, Authorization};
use rusqlite::Connection;

use super::{ddl_for, Attachment, SchemaGraph};
use crate::error::{Error, Result};

/// Everything a traced query touches.
#[derive(Debug, Clone, Default)]
pub struct TraceReport {
    /// Schema columns the query reads, as (table, column) pairs.
    pub columns: BTreeSet<(String, String)>,
    /// Schema tables the query scans or searches.
    pub tables: BTreeSet<String>,
}

/// Columns a query reads, determined by tracing a dummy execution against
/// empty shadow tables. Errors mirror the engine's own diagnostics for
/// unparseable queries and unresolvable names.
pub fn trace_required_columns(
    query: &str,
    schema: &SchemaGraph,
) -> Result<BTreeSet<(String, String)>> {
    Ok(trace_query(query, schema, &[])?.columns)
}

/// Full trace, optionally with external databases attached so that
/// queries referring to them resolve.
pub fn trace_query(
    query: &str,
    schema: &SchemaGraph,
    attachments: &[Attachment],
) -> Result<TraceReport> {
    let conn = shadow_connection(schema, attachments)?;

    let reads: Arc<Mutex<BTreeSet<(String, String)>>> = Arc::default();
    let sink = Arc::clone(&reads);
    conn.authorizer(Some(move |ctx: rusqlite::hooks::AuthContext<'_>| {
        if let AuthAction::Read {
            table_name,
            column_name,
        } = ctx.action
        {
            if ctx.database_name == Some("main") && !column_name.is_empty() {
                sink.lock()
                    .expect("trace sink")
                    .insert((table_name.to_owned(), column_name.to_owned()));
            }
        }
        Authorization::Allow
    }))?;

    // Preparation both authorizes every access and validates the query.
    conn.prepare(query).map_err(translate_prepare_error)?;
    conn.authorizer(None::<fn(rusqlite::hooks::AuthContext<'_>) -> Authorization>)?;

    let mut report = TraceReport::default();
    report.columns = {
        let guard = reads.lock().expect("trace sink");
        guard
            .iter()
            .filter(|(t, c)| {
                schema
                    .table(t)
                    .map(|ts| ts.column(c).is_some())
                    .unwrap_or(false)
            })
            .cloned()
            .collect()
    };
    for (t, _) in &report.columns {
        report.tables.insert(t.clone());
    }
    for table in planned_tables(&conn, query)? {
        if schema.contains(&table) {
            report.tables.insert(table);
        }
    }
    Ok(report)
}

/// Shadow connection holding every schema table, empty.
pub(crate) fn shadow_connection(
    schema: &SchemaGraph,
    attachments: &[Attachment],
) -> Result<Connection> {
    let conn = Connection::open_in_memory()?;
    for table in schema.tables() {
        conn.execute_batch(&ddl_for(table))?;
    }
    attach_all(&conn, attachments)?;
    Ok(conn)
}

/// ATTACH each external database under its requested name.
pub(crate) fn attach_all(conn: &Connection, attachments: &[Attachment]) -> Result<()> {
    for a in attachments {
        if !a.path.exists() {
            return Err(Error::io(
                &a.path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "attachment not found"),
            ));
        }
        conn.execute(
            "ATTACH DATABASE ?1 AS ?2",
            rusqlite::params![path_str(&a.path)?, a.name],
        )?;
    }
    Ok(())
}

pub(crate) fn path_str(path: &Path) -> Result<&str> {
    path.to_str()
        .ok_or_else(|| Error::Usage(format!("path {} is not valid UTF-8", path.display())))
}

/// Tables mentioned by the dummy execution's query plan.
fn planned_tables(conn: &Connection, query: &str) -> Result<BTreeSet<String>> {
    let mut tables = BTreeSet::new();
    let mut stmt = conn.prepare(&format!("EXPLAIN QUERY PLAN {query}"))?;
    let n = stmt.column_count();
    let mut rows = stmt.query([])?;
    while let Some(row) = rows.next()? {
        let detail: String = row.get(n - 1)?;
        let mut words = detail.split_whitespace();
        while let Some(word) = words.next() {
            if word == "SCAN" || word == "SEARCH" {
                match words.next() {
                    Some("TABLE") => {
                        if let Some(name) = words.next() {
                            tables.insert(name.to_owned());
                        }
                    }
                    Some(name) => {
                        tables.insert(name.to_owned());
                    }
                    None => {}
                }
                break;
            }
        }
    }
    Ok(tables)
}

/// Make the engine's resolution errors easier to classify: missing
/// tables/columns become resolution errors, everything else passes
/// through as a SQL error.
fn translate_prepare_error(err: rusqlite::Error) -> Error {
    let msg = err.to_string();
    if msg.contains("no such table") || msg.contains("no such column") {
        Error::Resolution(msg)
    } else {
        Error::Sql(err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cols(pairs: &[(&str, &str)]) -> BTreeSet<(String, String)> {
        pairs
            .iter()
            .map(|(t, c)| (t.to_string(), c.to_string()))
            .collect()
    }

    #[test]
    fn single_column() {
        let schema = SchemaGraph::bundled();
        let traced = trace_required_columns("SELECT doi FROM works", &schema).unwrap();
        assert_eq!(traced, cols(&[("works", "doi")]));
    }

    #[test]
    fn join_reads_keys_and_predicates() {
        let schema = SchemaGraph::bundled();
        let traced = trace_required_columns(
            "SELECT w.doi FROM works w JOIN work_authors a ON a.work_id = w.id \
             WHERE a.orcid IS NOT NULL",
            &schema,
        )
        .unwrap();
        assert_eq!(
            traced,
            cols(&[
                ("works", "doi"),
                ("works", "id"),
                ("work_authors", "work_id"),
                ("work_authors", "orcid"),
            ])
        );
    }

    #[test]
    fn star_expands_to_all_columns() {
        let schema = SchemaGraph::bundled();
        let traced = trace_required_columns("SELECT * FROM works", &schema).unwrap();
        let works = schema.table("works").unwrap();
        assert_eq!(traced.len(), works.columns.len());
        assert!(works.columns.iter().all(|c| traced
            .contains(&("works".to_string(), c.name.clone()))));
    }

    #[test]
    fn bare_count_still_reports_the_table() {
        let schema = SchemaGraph::bundled();
        let report = trace_query("SELECT count(*) FROM works", &schema, &[]).unwrap();
        assert!(report.columns.is_empty());
        assert!(report.tables.contains("works"));
    }

    #[test]
    fn unknown_column_is_a_resolution_error() {
        let schema = SchemaGraph::bundled();
        assert!(matches!(
            trace_required_columns("SELECT zap FROM works", &schema),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn syntax_errors_pass_through() {
        let schema = SchemaGraph::bundled();
        assert!(matches!(
            trace_required_columns("SELEKT 1", &schema),
            Err(Error::Sql(_))
        ));
    }
}
