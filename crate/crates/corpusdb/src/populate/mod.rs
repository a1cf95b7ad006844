//! Database population with horizontal and vertical slicing.
//!
//! Containers are processed one at a time inside one transaction each.
//! When a row expression is present, per-container in-memory mirror
//! tables (keys, foreign keys, and the expression's column dependencies)
//! are joined in topological order to compute the matched-work set; each
//! destination table then receives, in batched insert-select statements
//! against the attached source table functions, exactly the rows
//! reachable from matched works.

mod persons;
mod refs;

pub use persons::populate_persons;
pub use refs::{populate_reference_tables, ReferencePaths};

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use rusqlite::Connection;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::schema::{
    ddl_for_columns, resolve_slice, topological_order, trace, ResolvedSlice, SchemaGraph,
    SliceSpec,
};
use crate::sources::{ContainerSet, ContainerSource};
use crate::vtab;

/// Tuning knobs for population runs.
#[derive(Debug, Clone)]
pub struct PopulateOptions {
    /// Rows per bulk-insert statement.
    pub batch_size: usize,
}

impl Default for PopulateOptions {
    fn default() -> Self {
        PopulateOptions { batch_size: 1000 }
    }
}

/// What a population run did.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PopulationReport {
    pub containers_processed: u64,
    /// Containers skipped because an earlier run already committed them.
    pub containers_resumed: u64,
    /// Rows inserted per table.
    pub rows: BTreeMap<String, u64>,
    /// Bulk-insert batches executed per table.
    pub batches: BTreeMap<String, u64>,
    /// Malformed source records skipped while parsing.
    pub parse_warnings: u64,
    /// Index of the last fully committed container; a rerun with the same
    /// slice resumes after it.
    pub last_committed_container: Option<i64>,
    /// True when the run aborted and the database holds a partial result.
    pub partial: bool,
    pub batch_size: u64,
}

impl PopulationReport {
    pub fn total_rows(&self) -> u64 {
        self.rows.values().sum()
    }

    /// Human-readable summary, one line per entry.
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        out.push(format!(
            "containers processed: {} (resumed past {})",
            self.containers_processed, self.containers_resumed
        ));
        for (table, rows) in &self.rows {
            out.push(format!(
                "{table}: {rows} rows in {} batches",
                self.batches.get(table).copied().unwrap_or(0)
            ));
        }
        out.push(format!("parse warnings: {}", self.parse_warnings));
        if let Some(last) = self.last_committed_container {
            out.push(format!("last committed container: {last}"));
        }
        if self.partial {
            out.push("PARTIAL RESULT: run aborted before completion".to_string());
        }
        out
    }
}

/// Populate `db` with the requested slice of a container set.
pub fn populate(
    db: &Path,
    set: &ContainerSet,
    spec: &SliceSpec,
    schema: &SchemaGraph,
    options: &PopulateOptions,
) -> Result<PopulationReport> {
    let plan = resolve_slice(spec, schema)?;
    for table in plan.tables() {
        let t = schema.table(table).expect("resolved");
        if t.container_id_column.is_none() {
            return Err(Error::Usage(format!(
                "table {table} is not sourced from containers; only container tables can be populated here"
            )));
        }
    }

    let selected = match &spec.sampling {
        Some(s) => set.sample(s.probability, s.seed)?,
        None => set.clone(),
    };

    let conn = Connection::open(db)?;
    conn.pragma_update(None, "synchronous", "OFF")?;
    trace::attach_all(&conn, &spec.attachments)?;

    let source = Arc::new(ContainerSource::new(set.clone()));
    vtab::register_source(&conn, Arc::clone(&source), Arc::new(schema.clone()))?;

    let mut report = PopulationReport {
        batch_size: options.batch_size as u64,
        ..PopulationReport::default()
    };

    let fingerprint = slice_fingerprint(set, spec, &plan);
    let resume_after = prepare_destination(&conn, schema, &plan, &fingerprint)?;
    report.last_committed_container = resume_after;

    // Mirror set: tables named by the expression or selected for
    // population, closed over ancestors so the join path is complete.
    let has_expr = spec.row_expression.is_some();
    let mirror_tables: Vec<String> = if has_expr {
        let mut m: BTreeSet<String> = plan.expr_tables();
        m.extend(plan.columns.keys().cloned());
        for t in m.clone() {
            for a in schema.ancestors(&t) {
                m.insert(a.name.clone());
            }
        }
        topological_order(&m, schema)?
    } else {
        Vec::new()
    };

    let populate_order = topological_order(&plan.columns.keys().cloned().collect(), schema)?;

    let mut src_tables: BTreeSet<&str> = populate_order.iter().map(String::as_str).collect();
    src_tables.extend(mirror_tables.iter().map(String::as_str));
    vtab::create_source_tables(&conn, "src_", src_tables)?;

    let run = |report: &mut PopulationReport| -> Result<()> {
        for container in selected.containers() {
            let index = container.index as i64;
            if let Some(done) = resume_after {
                if index <= done {
                    report.containers_resumed += 1;
                    continue;
                }
            }
            conn.execute_batch("BEGIN")?;
            let result = populate_container(
                &conn,
                schema,
                &plan,
                spec,
                &mirror_tables,
                &populate_order,
                index,
                options.batch_size,
                report,
            )
            .and_then(|_| {
                conn.execute(
                    "INSERT OR REPLACE INTO _populate_meta (key, value) VALUES ('last_container', ?1)",
                    [index],
                )?;
                conn.execute_batch("COMMIT")?;
                Ok(())
            });
            if let Err(e) = result {
                let _ = conn.execute_batch("ROLLBACK");
                return Err(e);
            }
            report.containers_processed += 1;
            report.last_committed_container = Some(index);
        }
        Ok(())
    };

    match run(&mut report) {
        Ok(()) => {
            report.parse_warnings = source.warnings();
            Ok(report)
        }
        Err(e) => {
            report.parse_warnings = source.warnings();
            report.partial = true;
            Err(Error::PopulateAborted {
                message: e.to_string(),
                report: Box::new(report),
            })
        }
    }
}

/// Create destination tables (exactly the resolved columns) and the
/// bookkeeping table, or validate them when resuming. Returns the last
/// committed container index when resuming.
fn prepare_destination(
    conn: &Connection,
    schema: &SchemaGraph,
    plan: &ResolvedSlice,
    fingerprint: &str,
) -> Result<Option<i64>> {
    let existing: i64 = conn.query_row(
        "SELECT count(*) FROM sqlite_master WHERE type = 'table' AND name = '_populate_meta'",
        [],
        |r| r.get(0),
    )?;
    if existing > 0 {
        let stored: Option<String> = conn
            .query_row(
                "SELECT value FROM _populate_meta WHERE key = 'fingerprint'",
                [],
                |r| r.get(0),
            )
            .ok();
        if stored.as_deref() != Some(fingerprint) {
            return Err(Error::Precondition(
                "database was populated with a different slice; use a fresh database".into(),
            ));
        }
        let last: Option<i64> = conn
            .query_row(
                "SELECT CAST(value AS INTEGER) FROM _populate_meta WHERE key = 'last_container'",
                [],
                |r| r.get(0),
            )
            .ok();
        return Ok(last);
    }

    let tables: i64 = conn.query_row(
        "SELECT count(*) FROM sqlite_master WHERE type = 'table'",
        [],
        |r| r.get(0),
    )?;
    if tables > 0 {
        return Err(Error::Precondition(
            "destination database already contains tables".into(),
        ));
    }

    for (table, columns) in &plan.columns {
        let t = schema.table(table).expect("resolved");
        conn.execute_batch(&ddl_for_columns(t, columns))?;
    }
    conn.execute_batch(
        "CREATE TABLE _populate_meta (key TEXT PRIMARY KEY, value TEXT NOT NULL)",
    )?;
    conn.execute(
        "INSERT INTO _populate_meta (key, value) VALUES ('fingerprint', ?1)",
        [fingerprint],
    )?;
    Ok(None)
}

/// Process one container inside the caller's transaction.
#[allow(clippy::too_many_arguments)]
fn populate_container(
    conn: &Connection,
    schema: &SchemaGraph,
    plan: &ResolvedSlice,
    spec: &SliceSpec,
    mirror_tables: &[String],
    populate_order: &[String],
    container: i64,
    batch_size: usize,
    report: &mut PopulationReport,
) -> Result<()> {
    let has_expr = spec.row_expression.is_some();
    if let Some(expr) = &spec.row_expression {
        build_mirrors(conn, schema, plan, mirror_tables, container)?;
        build_matched(conn, schema, mirror_tables, expr)?;
    }

    for table in populate_order {
        let t = schema.table(table).expect("resolved");
        let columns: Vec<&str> = t
            .columns
            .iter()
            .filter(|c| plan.contains(table, &c.name))
            .map(|c| c.name.as_str())
            .collect();
        let column_list = columns.join(", ");
        let select_list: Vec<String> = columns.iter().map(|c| format!("s.{c}")).collect();

        let scope = match t.parent.as_deref() {
            None if has_expr => {
                " AND s.id IN (SELECT work_id FROM temp.m_matched)".to_string()
            }
            None => String::new(),
            Some(parent) => {
                let fk = t.parent_fk().ok_or_else(|| {
                    Error::Schema(format!("table {table} has no foreign key to {parent}"))
                })?;
                format!(
                    " AND s.{fk} IN (SELECT id FROM main.{parent} WHERE container_id = ?1)"
                )
            }
        };

        let sql = format!(
            "INSERT INTO main.{table} ({column_list}) \
             SELECT {select} FROM temp.src_{table} AS s \
             WHERE s.container_id = ?1{scope} AND s.id > ?2 \
             ORDER BY s.id LIMIT ?3",
            select = select_list.join(", "),
        );
        let mut stmt = conn.prepare(&sql)?;
        let mut last: i64 = -1;
        loop {
            let inserted =
                stmt.execute(rusqlite::params![container, last, batch_size as i64])?;
            if inserted == 0 {
                break;
            }
            *report.rows.entry(table.clone()).or_default() += inserted as u64;
            *report.batches.entry(table.clone()).or_default() += 1;
            last = conn.query_row(
                &format!("SELECT max(id) FROM main.{table} WHERE container_id = ?1"),
                [container],
                |r| r.get(0),
            )?;
            if inserted < batch_size {
                break;
            }
        }
    }

    if has_expr {
        drop_mirrors(conn, mirror_tables)?;
    }
    Ok(())
}

/// Per-container mirror tables: keys, foreign keys, container id, and the
/// expression's column dependencies.
fn build_mirrors(
    conn: &Connection,
    schema: &SchemaGraph,
    plan: &ResolvedSlice,
    mirror_tables: &[String],
    container: i64,
) -> Result<()> {
    for table in mirror_tables {
        let t = schema.table(table).expect("resolved");
        let mut cols = t.forced_columns();
        for (dep_table, dep_col) in &plan.expr_deps {
            if dep_table == table {
                cols.insert(dep_col.clone());
            }
        }
        let ordered: Vec<&str> = t
            .columns
            .iter()
            .filter(|c| cols.contains(&c.name))
            .map(|c| c.name.as_str())
            .collect();
        conn.execute(
            &format!(
                "CREATE TEMP TABLE m_{table} AS SELECT {} FROM temp.src_{table} WHERE container_id = ?1",
                ordered.join(", ")
            ),
            [container],
        )?;
    }
    Ok(())
}

/// Join the mirrors in topological order, apply the expression as a
/// filter, and keep the identifiers of matched works.
fn build_matched(
    conn: &Connection,
    schema: &SchemaGraph,
    mirror_tables: &[String],
    expr: &str,
) -> Result<()> {
    let mut from = String::new();
    for (i, table) in mirror_tables.iter().enumerate() {
        if i == 0 {
            from.push_str(&format!("m_{table} AS {table}"));
            continue;
        }
        let t = schema.table(table).expect("resolved");
        let parent = t.parent.as_deref().expect("non-root mirror has a parent");
        let fk = t.parent_fk().expect("container tables link to parents");
        from.push_str(&format!(
            " LEFT JOIN m_{table} AS {table} ON {table}.{fk} = {parent}.id"
        ));
    }
    let root = &mirror_tables[0];
    conn.execute_batch(&format!(
        "CREATE TEMP TABLE m_matched AS \
         SELECT DISTINCT {root}.id AS work_id FROM {from} WHERE ({expr})"
    ))?;
    Ok(())
}

fn drop_mirrors(conn: &Connection, mirror_tables: &[String]) -> Result<()> {
    for table in mirror_tables {
        conn.execute_batch(&format!("DROP TABLE IF EXISTS temp.m_{table}"))?;
    }
    conn.execute_batch("DROP TABLE IF EXISTS temp.m_matched")?;
    Ok(())
}

/// Stable digest of everything that shapes the populated content; reruns
/// resume only when it matches.
fn slice_fingerprint(set: &ContainerSet, spec: &SliceSpec, plan: &ResolvedSlice) -> String {
    let mut hasher = Sha256::new();
    hasher.update(set.root().to_string_lossy().as_bytes());
    for (table, cols) in &plan.columns {
        hasher.update(table.as_bytes());
        for c in cols {
            hasher.update(b".");
            hasher.update(c.as_bytes());
        }
        hasher.update(b";");
    }
    if let Some(expr) = &spec.row_expression {
        hasher.update(b"expr:");
        hasher.update(expr.as_bytes());
    }
    if let Some(s) = &spec.sampling {
        hasher.update(b"sample:");
        hasher.update(s.probability.to_bits().to_le_bytes());
        hasher.update(s.seed.to_le_bytes());
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
