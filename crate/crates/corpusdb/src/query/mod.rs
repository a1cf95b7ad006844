//! SQL over un-populated container sets.
//!
//! Single-table queries run as one streaming scan across containers.
//! Multi-table queries run in partitioned mode: the required tables and
//! columns are traced, per-container temporary tables are loaded, and the
//! query is executed once per container with results concatenated in
//! container order. Joins therefore resolve only within one container
//! (publications with their own authors, references, and so on); rows
//! ordered by an outer ORDER BY are ordered within each container only.

mod scripts;

pub use scripts::{run_script_set, ScriptLog};

use std::path::Path;
use std::sync::Arc;

use rusqlite::types::Value;
use rusqlite::Connection;

use crate::error::{Error, Result};
use crate::schema::{trace, ColumnSchema, SchemaGraph};
use crate::sources::ContainerSource;
use crate::vtab;

/// A fully collected query result.
#[derive(Debug, Default)]
pub struct QueryOutput {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub warnings: Vec<String>,
}

/// Run a query over the container set and collect all rows.
pub fn query_collect(
    source: &Arc<ContainerSource>,
    sql: &str,
    partition: bool,
) -> Result<QueryOutput> {
    let mut out = QueryOutput::default();
    let warnings = query_for_each(source, sql, partition, |columns, row| {
        if out.columns.is_empty() {
            out.columns = columns.to_vec();
        }
        out.rows.push(row.to_vec());
        Ok(())
    })?;
    out.warnings = warnings;
    Ok(out)
}

/// Run a query over the container set, writing rows to a CSV file with a
/// header row (RFC 4180, CRLF line endings). Returns the data row count.
pub fn query_to_csv(
    source: &Arc<ContainerSource>,
    sql: &str,
    partition: bool,
    out: &Path,
) -> Result<u64> {
    let file = std::fs::File::create(out).map_err(|e| Error::io(out, e))?;
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(file);
    let mut count = 0u64;
    let mut wrote_header = false;
    query_for_each(source, sql, partition, |columns, row| {
        if !wrote_header {
            writer
                .write_record(columns)
                .map_err(|e| Error::io(out, std::io::Error::other(e.to_string())))?;
            wrote_header = true;
        }
        writer
            .write_record(row.iter().map(value_to_csv))
            .map_err(|e| Error::io(out, std::io::Error::other(e.to_string())))?;
        count += 1;
        Ok(())
    })?;
    if !wrote_header {
        // Empty result: emit the header alone.
        let (columns, _) = describe(source, sql)?;
        writer
            .write_record(&columns)
            .map_err(|e| Error::io(out, std::io::Error::other(e.to_string())))?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(out, std::io::Error::other(e.to_string())))?;
    Ok(count)
}

pub fn value_to_csv(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Integer(i) => i.to_string(),
        Value::Real(r) => r.to_string(),
        Value::Text(t) => t.clone(),
        Value::Blob(b) => b.iter().map(|x| format!("{x:02x}")).collect(),
    }
}

/// Column names and required tables of a query, without running it.
fn describe(source: &Arc<ContainerSource>, sql: &str) -> Result<(Vec<String>, trace::TraceReport)> {
    let schema = SchemaGraph::bundled().container_subset();
    let report = trace::trace_query(sql, &schema, &[])?;
    let shadow = trace::shadow_connection(&schema, &[])?;
    let stmt = shadow.prepare(sql)?;
    let columns = stmt.column_names().into_iter().map(str::to_owned).collect();
    Ok((columns, report))
}

/// Streaming query execution; `emit` receives the column names and each
/// row. Returns accumulated warnings.
pub fn query_for_each(
    source: &Arc<ContainerSource>,
    sql: &str,
    partition: bool,
    mut emit: impl FnMut(&[String], &[Value]) -> Result<()>,
) -> Result<Vec<String>> {
    let schema = Arc::new(SchemaGraph::bundled());
    let container_schema = schema.container_subset();
    let report = trace::trace_query(sql, &container_schema, &[])?;

    if report.tables.is_empty() {
        return Err(Error::Usage(
            "query references no container table".into(),
        ));
    }
    if report.tables.len() > 1 && !partition {
        return Err(Error::Usage(format!(
            "query references {} tables ({}); multi-table queries require partitioned mode",
            report.tables.len(),
            report.tables.iter().cloned().collect::<Vec<_>>().join(", ")
        )));
    }

    let mut warnings = Vec::new();
    if partition {
        if let Some(w) = partitioned_aggregate_warning(sql) {
            warnings.push(w);
        }
        run_partitioned(source, &schema, &report, sql, &mut emit)?;
    } else {
        run_streaming(source, &schema, &report, sql, &mut emit)?;
    }
    Ok(warnings)
}

/// Single-table mode: the table is exposed under its own name as a
/// virtual table and the query streams across all containers.
fn run_streaming(
    source: &Arc<ContainerSource>,
    schema: &Arc<SchemaGraph>,
    report: &trace::TraceReport,
    sql: &str,
    emit: &mut impl FnMut(&[String], &[Value]) -> Result<()>,
) -> Result<()> {
    let conn = Connection::open_in_memory()?;
    vtab::register_source(&conn, Arc::clone(source), Arc::clone(schema))?;
    vtab::create_source_tables(&conn, "", report.tables.iter().map(String::as_str))?;
    forward_rows(&conn, sql, emit)
}

/// Partitioned mode: load required columns of each container into
/// temporary tables and run the query once per container.
fn run_partitioned(
    source: &Arc<ContainerSource>,
    schema: &Arc<SchemaGraph>,
    report: &trace::TraceReport,
    sql: &str,
    emit: &mut impl FnMut(&[String], &[Value]) -> Result<()>,
) -> Result<()> {
    let conn = Connection::open_in_memory()?;
    vtab::register_source(&conn, Arc::clone(source), Arc::clone(schema))?;
    vtab::create_source_tables(&conn, "src_", report.tables.iter().map(String::as_str))?;

    // Temporary mirror of each required table, holding the traced columns
    // (plus the key, so row counts survive column-free queries).
    let mut column_lists: Vec<(String, String)> = Vec::new();
    for table in &report.tables {
        let t = schema.table(table).expect("traced against schema");
        let mut keep: Vec<&str> = vec![t.key_column()];
        if let Some(cid) = &t.container_id_column {
            keep.push(cid);
        }
        for c in &t.columns {
            if report.columns.contains(&(table.clone(), c.name.clone()))
                && !keep.contains(&c.name.as_str())
            {
                keep.push(c.name.as_str());
            }
        }
        let ordered: Vec<&ColumnSchema> = t
            .columns
            .iter()
            .filter(|c| keep.contains(&c.name.as_str()))
            .collect();
        let decls: Vec<String> = ordered
            .iter()
            .map(|c| format!("{} {}", c.name, c.kind.sql_type()))
            .collect();
        conn.execute_batch(&format!(
            "CREATE TEMP TABLE {table} ({})",
            decls.join(", ")
        ))?;
        let list: Vec<&str> = ordered.iter().map(|c| c.name.as_str()).collect();
        column_lists.push((table.clone(), list.join(", ")));
    }

    for container in source.set().containers() {
        for (table, list) in &column_lists {
            conn.execute_batch(&format!("DELETE FROM temp.{table}"))?;
            conn.execute(
                &format!(
                    "INSERT INTO temp.{table} ({list}) \
                     SELECT {list} FROM temp.src_{table} WHERE container_id = ?1"
                ),
                [container.index as i64],
            )?;
        }
        forward_rows(&conn, sql, emit)?;
    }
    Ok(())
}

fn forward_rows(
    conn: &Connection,
    sql: &str,
    emit: &mut impl FnMut(&[String], &[Value]) -> Result<()>,
) -> Result<()> {
    let mut stmt = conn.prepare(sql)?;
    let columns: Vec<String> = stmt.column_names().into_iter().map(str::to_owned).collect();
    let n = columns.len();
    let mut rows = stmt.query([])?;
    while let Some(row) = rows.next()? {
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            values.push(row.get::<_, Value>(i)?);
        }
        emit(&columns, &values)?;
    }
    Ok(())
}

/// Outer-level aggregation in partitioned mode operates per container,
/// which silently under-aggregates across containers. Detected by a
/// token scan of the outermost query level; grouping by the container id
/// is the sanctioned pattern and is not flagged.
pub fn partitioned_aggregate_warning(sql: &str) -> Option<String> {
    let tokens = outer_tokens(sql);
    let mut has_aggregate = false;
    let mut group_by_container = false;
    let mut saw_group_by = false;
    for (i, tok) in tokens.iter().enumerate() {
        let lower = tok.to_ascii_lowercase();
        match lower.as_str() {
            "count" | "sum" | "avg" | "min" | "max" | "total" | "group_concat" => {
                has_aggregate = true;
            }
            "group" if matches!(tokens.get(i + 1).map(|t| t.to_ascii_lowercase()), Some(ref n) if n == "by") =>
            {
                saw_group_by = true;
                // Scan the grouping list for the container id column.
                for t in &tokens[i + 2..] {
                    let l = t.to_ascii_lowercase();
                    if ["order", "limit", "having", "window"].contains(&l.as_str()) {
                        break;
                    }
                    if l == "container_id" {
                        group_by_container = true;
                    }
                }
            }
            _ => {}
        }
    }
    if (has_aggregate || saw_group_by) && !group_by_container {
        Some(
            "partitioned mode evaluates aggregates per container; results are \
             combined by concatenation, not re-aggregated. Group by container_id \
             and combine externally, or populate a database for global aggregates."
                .to_string(),
        )
    } else {
        None
    }
}

/// Identifier-ish tokens at parenthesis depth zero, with strings and
/// comments stripped.
fn outer_tokens(sql: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut depth = 0i32;
    let mut chars = sql.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\'' | '"' => {
                // Skip quoted literal/identifier.
                while let Some(n) = chars.next() {
                    if n == c {
                        if chars.peek() == Some(&c) {
                            chars.next();
                        } else {
                            break;
                        }
                    }
                }
                if depth == 0 && !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            '-' if chars.peek() == Some(&'-') => {
                for n in chars.by_ref() {
                    if n == '\n' {
                        break;
                    }
                }
            }
            '(' => {
                if depth == 0 && !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                depth += 1;
            }
            ')' => {
                depth -= 1;
                current.clear();
            }
            c if c.is_alphanumeric() || c == '_' => {
                if depth == 0 {
                    current.push(c);
                }
            }
            _ => {
                if depth == 0 && !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_without_container_grouping_warns() {
        assert!(partitioned_aggregate_warning("SELECT count(*) FROM works").is_some());
        assert!(partitioned_aggregate_warning(
            "SELECT published_year, count(*) FROM works GROUP BY published_year"
        )
        .is_some());
    }

    #[test]
    fn container_grouping_is_sanctioned() {
        assert!(partitioned_aggregate_warning(
            "SELECT container_id, count(*) FROM works GROUP BY container_id"
        )
        .is_none());
    }

    #[test]
    fn subquery_aggregates_do_not_warn() {
        assert!(partitioned_aggregate_warning(
            "SELECT doi FROM works WHERE id IN (SELECT max(id) FROM works)"
        )
        .is_none());
    }

    #[test]
    fn plain_select_is_silent() {
        assert!(partitioned_aggregate_warning("SELECT doi FROM works").is_none());
    }
}
