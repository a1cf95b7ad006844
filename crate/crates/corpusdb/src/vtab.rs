//! Application-defined table functions over container sets.
//!
//! `register_source` installs a module so that
//! `CREATE VIRTUAL TABLE temp.src_works USING corpus_source(works)`
//! exposes a container table to any query in the session. Scans stream
//! container by container; an equality constraint on the container id
//! column is pushed down so per-container statements decompress exactly
//! one container, served from the shared parsed-container cache.

use std::ffi::{c_int, CStr, CString};
use std::marker::PhantomData;
use std::sync::Arc;

use rusqlite::ffi;
use rusqlite::types::Value;
use rusqlite::vtab::{
    Context, CreateVTab, Filters, IndexInfo, Module, VTab, VTabConnection, VTabCursor, VTabKind,
};
use rusqlite::{Connection, Result};

use crate::rows::table_rows;
use crate::schema::{SchemaGraph, TableSchema};
use crate::sources::ContainerSource;

pub const MODULE_NAME: &str = "corpus_source";

/// Shared state handed to every virtual table of a session.
pub struct SourceAux {
    pub source: Arc<ContainerSource>,
    pub schema: Arc<SchemaGraph>,
}

/// Register the `corpus_source` module on a connection.
pub fn register_source(
    conn: &Connection,
    source: Arc<ContainerSource>,
    schema: Arc<SchemaGraph>,
) -> Result<()> {
    const MODULE: Module<ContainerTable> = Module::read_only_module();
    conn.create_module(MODULE_NAME, &MODULE, Some(SourceAux { source, schema }))
}

/// Create `temp.<prefix><table>` virtual tables for the given tables.
pub fn create_source_tables<'a>(
    conn: &Connection,
    prefix: &str,
    tables: impl IntoIterator<Item = &'a str>,
) -> Result<()> {
    for table in tables {
        conn.execute_batch(&format!(
            "CREATE VIRTUAL TABLE temp.\"{prefix}{table}\" USING {MODULE_NAME}({table});"
        ))?;
    }
    Ok(())
}

#[repr(C)]
pub struct ContainerTable {
    base: ffi::sqlite3_vtab,
    source: Arc<ContainerSource>,
    table: TableSchema,
    /// Position of the container id column.
    container_col: usize,
}

unsafe impl<'vtab> VTab<'vtab> for ContainerTable {
    type Aux = SourceAux;
    type Cursor = ContainerCursor<'vtab>;

    fn connect(
        _db: &mut VTabConnection,
        aux: Option<&SourceAux>,
        _module_name: &[u8],
        _database_name: &[u8],
        _table_name: &[u8],
        args: &[&[u8]],
    ) -> Result<(std::borrow::Cow<'static, CStr>, Self)> {
        let aux = aux.ok_or_else(|| module_error("missing source"))?;
        let name = args
            .first()
            .map(|a| String::from_utf8_lossy(a).trim().to_owned())
            .ok_or_else(|| module_error("table name argument required"))?;
        let table = aux
            .schema
            .table(&name)
            .filter(|t| t.container_id_column.is_some())
            .ok_or_else(|| module_error(&format!("{name} is not a container table")))?
            .clone();
        let container_col = table
            .columns
            .iter()
            .position(|c| Some(&c.name) == table.container_id_column.as_ref())
            .expect("validated at schema construction");

        let decls: Vec<String> = table
            .columns
            .iter()
            .map(|c| format!("{} {}", c.name, c.kind.sql_type()))
            .collect();
        let ddl = CString::new(format!("CREATE TABLE x({})", decls.join(", ")))
            .map_err(|_| module_error("table name contains NUL"))?;
        Ok((
            std::borrow::Cow::Owned(ddl),
            ContainerTable {
                base: ffi::sqlite3_vtab::default(),
                source: Arc::clone(&aux.source),
                table,
                container_col,
            },
        ))
    }

    fn best_index(&self, info: &mut IndexInfo) -> Result<bool> {
        let mut constrained = None;
        for (i, constraint) in info.constraints().enumerate() {
            if constraint.is_usable()
                && constraint.column() == self.container_col as c_int
                && constraint.operator()
                    == rusqlite::vtab::IndexConstraintOp::SQLITE_INDEX_CONSTRAINT_EQ
            {
                constrained = Some(i);
                break;
            }
        }
        match constrained {
            Some(i) => {
                let mut usage = info.constraint_usage(i);
                usage.set_argv_index(1);
                usage.set_omit(true);
                info.set_idx_num(1);
                info.set_estimated_cost(10_000.0);
            }
            None => {
                info.set_idx_num(0);
                let containers = self.source.set().len() as f64;
                info.set_estimated_cost(10_000.0 * containers.max(1.0));
            }
        }
        Ok(true)
    }

    fn open(&'vtab mut self) -> Result<ContainerCursor<'vtab>> {
        Ok(ContainerCursor {
            base: ffi::sqlite3_vtab_cursor::default(),
            source: Arc::clone(&self.source),
            table: self.table.name.clone(),
            containers: Vec::new(),
            position: 0,
            rows: Vec::new(),
            row: 0,
            phantom: PhantomData,
        })
    }
}

impl<'vtab> CreateVTab<'vtab> for ContainerTable {
    const KIND: VTabKind = VTabKind::Default;
}

#[repr(C)]
pub struct ContainerCursor<'vtab> {
    base: ffi::sqlite3_vtab_cursor,
    source: Arc<ContainerSource>,
    table: String,
    /// Container indices remaining to scan (current one first).
    containers: Vec<usize>,
    position: usize,
    rows: Vec<(i64, Vec<Value>)>,
    row: usize,
    phantom: PhantomData<&'vtab ContainerTable>,
}

impl ContainerCursor<'_> {
    /// Load rows of the current container, skipping empty ones.
    fn settle(&mut self) -> Result<()> {
        while self.position < self.containers.len() {
            let index = self.containers[self.position];
            let records = self
                .source
                .records(index)
                .map_err(|e| module_error(&e.to_string()))?;
            self.rows = table_rows(&self.table, &records);
            self.row = 0;
            if !self.rows.is_empty() {
                return Ok(());
            }
            self.position += 1;
        }
        self.rows.clear();
        self.row = 0;
        Ok(())
    }
}

unsafe impl VTabCursor for ContainerCursor<'_> {
    fn filter(&mut self, idx_num: c_int, _idx_str: Option<&str>, args: &Filters<'_>) -> Result<()> {
        self.containers = if idx_num == 1 {
            match args.get::<Option<i64>>(0)? {
                Some(wanted) if wanted >= 0 => {
                    let wanted = wanted as usize;
                    self.source
                        .set()
                        .containers()
                        .iter()
                        .filter(|c| c.index == wanted)
                        .map(|c| c.index)
                        .collect()
                }
                _ => Vec::new(),
            }
        } else {
            self.source
                .set()
                .containers()
                .iter()
                .map(|c| c.index)
                .collect()
        };
        self.position = 0;
        self.settle()
    }

    fn next(&mut self) -> Result<()> {
        self.row += 1;
        if self.row >= self.rows.len() {
            self.position += 1;
            self.settle()?;
        }
        Ok(())
    }

    fn eof(&self) -> bool {
        self.position >= self.containers.len()
    }

    fn column(&self, ctx: &mut Context, i: c_int) -> Result<()> {
        let value = self
            .rows
            .get(self.row)
            .and_then(|(_, cols)| cols.get(i as usize))
            .ok_or_else(|| module_error("column index out of range"))?;
        ctx.set_result(value)
    }

    fn rowid(&self) -> Result<i64> {
        self.rows
            .get(self.row)
            .map(|(id, _)| *id)
            .ok_or_else(|| module_error("rowid past end"))
    }
}

fn module_error(msg: &str) -> rusqlite::Error {
    rusqlite::Error::ModuleError(msg.to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn module_rejects_non_container_tables() {
        let conn = Connection::open_in_memory().unwrap();
        let schema = Arc::new(SchemaGraph::bundled());
        let source = Arc::new(ContainerSource::with_capacity(
            crate::sources::ContainerSet::synthetic(0),
            1,
        ));
        register_source(&conn, source, schema).unwrap();
        let err = conn
            .execute_batch("CREATE VIRTUAL TABLE temp.p USING corpus_source(persons)")
            .unwrap_err();
        assert!(err.to_string().contains("not a container table"));
    }
}
