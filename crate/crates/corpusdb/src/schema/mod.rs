//! Relational schema model: tables, columns, containment and foreign-key
//! relations, DDL generation, slice resolution, table ordering, and
//! column-usage tracing.

mod bundled;
mod ddl;
mod slice;
mod topo;
pub(crate) mod trace;

pub use ddl::{ddl_for, ddl_for_columns};
pub use slice::{resolve_slice, Attachment, ResolvedSlice, Sampling, SliceSpec};
pub use topo::topological_order;
pub use trace::{trace_required_columns, TraceReport};

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// What a column means to the toolkit, independent of storage type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemanticKind {
    /// Synthetic integer row identifier; exactly one per table.
    Key,
    /// Integer reference to the named table's key column.
    ForeignKey { target: String },
    Text,
    Integer,
    Real,
    /// Year, month, or day component of a partial date.
    DatePart,
}

impl SemanticKind {
    /// SQL storage type used in emitted DDL.
    pub fn sql_type(&self) -> &'static str {
        match self {
            SemanticKind::Key | SemanticKind::ForeignKey { .. } => "INTEGER",
            SemanticKind::Text => "TEXT",
            SemanticKind::Integer | SemanticKind::DatePart => "INTEGER",
            SemanticKind::Real => "REAL",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: SemanticKind,
    pub nullable: bool,
}

impl ColumnSchema {
    pub fn new(name: &str, kind: SemanticKind, nullable: bool) -> Self {
        ColumnSchema {
            name: name.to_owned(),
            kind,
            nullable,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TableSchema {
    pub name: String,
    pub columns: Vec<ColumnSchema>,
    /// Containment parent (e.g. `work_authors` is contained in `works`).
    pub parent: Option<String>,
    /// Column holding the source container index, present only on tables
    /// sourced from a container set.
    pub container_id_column: Option<String>,
}

impl TableSchema {
    pub fn new(
        name: &str,
        columns: Vec<ColumnSchema>,
        parent: Option<&str>,
        container_id_column: Option<&str>,
    ) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Schema(format!("table {name} has no columns")));
        }
        let mut seen = BTreeSet::new();
        for c in &columns {
            if !seen.insert(c.name.clone()) {
                return Err(Error::Schema(format!(
                    "table {name} declares column {} twice",
                    c.name
                )));
            }
        }
        let keys = columns
            .iter()
            .filter(|c| matches!(c.kind, SemanticKind::Key))
            .count();
        if keys != 1 {
            return Err(Error::Schema(format!(
                "table {name} must declare exactly one key column, found {keys}"
            )));
        }
        if let Some(cid) = container_id_column {
            if !columns.iter().any(|c| c.name == cid) {
                return Err(Error::Schema(format!(
                    "table {name} names container id column {cid} that does not exist"
                )));
            }
        }
        Ok(TableSchema {
            name: name.to_owned(),
            columns,
            parent: parent.map(str::to_owned),
            container_id_column: container_id_column.map(str::to_owned),
        })
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSchema> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Name of the table's key column.
    pub fn key_column(&self) -> &str {
        self.columns
            .iter()
            .find(|c| matches!(c.kind, SemanticKind::Key))
            .map(|c| c.name.as_str())
            .expect("validated at construction")
    }

    /// Names of all foreign-key columns with their target tables.
    pub fn foreign_keys(&self) -> impl Iterator<Item = (&str, &str)> {
        self.columns.iter().filter_map(|c| match &c.kind {
            SemanticKind::ForeignKey { target } => Some((c.name.as_str(), target.as_str())),
            _ => None,
        })
    }

    /// The foreign-key column pointing at the containment parent, if any.
    pub fn parent_fk(&self) -> Option<&str> {
        let parent = self.parent.as_deref()?;
        self.foreign_keys()
            .find(|(_, target)| *target == parent)
            .map(|(col, _)| col)
    }

    /// Columns that must always be materialized alongside any selection:
    /// the key, every foreign key, and the container id column.
    pub fn forced_columns(&self) -> BTreeSet<String> {
        let mut cols = BTreeSet::new();
        cols.insert(self.key_column().to_owned());
        for (fk, _) in self.foreign_keys() {
            cols.insert(fk.to_owned());
        }
        if let Some(cid) = &self.container_id_column {
            cols.insert(cid.clone());
        }
        cols
    }
}

/// The full relational schema: tables plus containment and foreign-key
/// edges. Immutable once constructed and safe to share across threads.
#[derive(Debug, Clone)]
pub struct SchemaGraph {
    tables: BTreeMap<String, TableSchema>,
}

impl SchemaGraph {
    /// Build a graph from table definitions, validating referential
    /// structure: parents must exist and containment must form a forest.
    /// Foreign-key cycles are representable (they are caught later by
    /// [`topological_order`]).
    pub fn new(tables: Vec<TableSchema>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for t in tables {
            if map.insert(t.name.clone(), t).is_some() {
                return Err(Error::Schema("duplicate table name".into()));
            }
        }
        for t in map.values() {
            if let Some(p) = &t.parent {
                if !map.contains_key(p) {
                    return Err(Error::Schema(format!(
                        "table {} names unknown parent {p}",
                        t.name
                    )));
                }
            }
            for (col, target) in t.foreign_keys() {
                if !map.contains_key(target) {
                    return Err(Error::Schema(format!(
                        "column {}.{col} references unknown table {target}",
                        t.name
                    )));
                }
            }
        }
        // Containment edges must form a forest: walking up terminates.
        for t in map.values() {
            let mut seen = BTreeSet::new();
            let mut cur = t;
            seen.insert(cur.name.clone());
            while let Some(p) = &cur.parent {
                if !seen.insert(p.clone()) {
                    let mut cycle: Vec<String> = seen.into_iter().collect();
                    cycle.push(p.clone());
                    return Err(Error::Cycle(cycle));
                }
                cur = &map[p];
            }
        }
        Ok(SchemaGraph { tables: map })
    }

    /// The bundled schema covering container-sourced publication tables,
    /// person tables, organization tables, and flat reference tables.
    pub fn bundled() -> Self {
        bundled::bundled_schema()
    }

    pub fn table(&self, name: &str) -> Option<&TableSchema> {
        self.tables.get(name)
    }

    pub fn tables(&self) -> impl Iterator<Item = &TableSchema> {
        self.tables.values()
    }

    pub fn table_names(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.tables.contains_key(name)
    }

    /// Tables sourced from a container set, i.e. those carrying a container
    /// id column.
    pub fn container_tables(&self) -> impl Iterator<Item = &TableSchema> {
        self.tables
            .values()
            .filter(|t| t.container_id_column.is_some())
    }

    /// A reduced graph holding only the container-sourced tables.
    pub fn container_subset(&self) -> SchemaGraph {
        SchemaGraph {
            tables: self
                .tables
                .iter()
                .filter(|(_, t)| t.container_id_column.is_some())
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Chain of ancestors of `table` up to (and excluding) the root,
    /// nearest parent first.
    pub fn ancestors(&self, table: &str) -> Vec<&TableSchema> {
        let mut out = Vec::new();
        let mut cur = self.tables.get(table);
        while let Some(t) = cur {
            match &t.parent {
                Some(p) => {
                    let pt = &self.tables[p];
                    out.push(pt);
                    cur = Some(pt);
                }
                None => break,
            }
        }
        out
    }

    /// Dependency edges used for ordering: each table depends on its
    /// containment parent and on every foreign-key target.
    pub fn dependencies(&self, table: &str) -> BTreeSet<&str> {
        let mut deps = BTreeSet::new();
        if let Some(t) = self.tables.get(table) {
            if let Some(p) = &t.parent {
                deps.insert(p.as_str());
            }
            for (_, target) in t.foreign_keys() {
                if target != table {
                    deps.insert(target);
                }
            }
        }
        deps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_column_table_rejected() {
        let err = TableSchema::new("t", vec![], None, None).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn duplicate_column_rejected() {
        let cols = vec![
            ColumnSchema::new("id", SemanticKind::Key, false),
            ColumnSchema::new("id", SemanticKind::Text, true),
        ];
        assert!(TableSchema::new("t", cols, None, None).is_err());
    }

    #[test]
    fn containment_cycle_rejected() {
        let a = TableSchema::new(
            "a",
            vec![ColumnSchema::new("id", SemanticKind::Key, false)],
            Some("b"),
            None,
        )
        .unwrap();
        let b = TableSchema::new(
            "b",
            vec![ColumnSchema::new("id", SemanticKind::Key, false)],
            Some("a"),
            None,
        )
        .unwrap();
        assert!(matches!(
            SchemaGraph::new(vec![a, b]).unwrap_err(),
            Error::Cycle(_)
        ));
    }

    #[test]
    fn bundled_schema_is_valid() {
        let schema = SchemaGraph::bundled();
        assert!(schema.contains("works"));
        assert!(schema.contains("research_organizations"));
        assert_eq!(schema.table("works").unwrap().key_column(), "id");
        let authors = schema.table("work_authors").unwrap();
        assert_eq!(authors.parent.as_deref(), Some("works"));
        assert_eq!(authors.parent_fk(), Some("work_id"));
        // Container-sourced tables all carry a container id column.
        assert_eq!(schema.container_tables().count(), 8);
    }
}
