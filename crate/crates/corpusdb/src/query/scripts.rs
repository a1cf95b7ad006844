//! Sequential SQL script runner: each file's statements execute in order
//! inside one transaction per file, with per-file timing and row counts.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rusqlite::fallible_iterator::FallibleIterator;
use rusqlite::{Batch, Connection};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ScriptLog {
    pub script: PathBuf,
    pub statements: usize,
    /// Rows changed by data statements plus rows returned by queries.
    pub rows: u64,
    pub elapsed: Duration,
}

/// Execute script files against a database in the given order. The first
/// failing statement aborts the run; earlier files stay committed, the
/// failing file is rolled back, and the error names the file and the
/// statement position.
pub fn run_script_set(db: &Path, scripts: &[PathBuf]) -> Result<Vec<ScriptLog>> {
    let conn = Connection::open(db)?;
    let mut logs = Vec::new();
    for script in scripts {
        let sql = std::fs::read_to_string(script).map_err(|e| Error::io(script, e))?;
        let started = Instant::now();
        conn.execute_batch("BEGIN")?;
        match run_statements(&conn, &sql) {
            Ok((statements, rows)) => {
                conn.execute_batch("COMMIT")?;
                logs.push(ScriptLog {
                    script: script.clone(),
                    statements,
                    rows,
                    elapsed: started.elapsed(),
                });
            }
            Err((statement, source)) => {
                let _ = conn.execute_batch("ROLLBACK");
                return Err(Error::Script {
                    script: script.clone(),
                    statement,
                    source,
                });
            }
        }
    }
    Ok(logs)
}

fn run_statements(conn: &Connection, sql: &str) -> Result<(usize, u64), (usize, rusqlite::Error)> {
    let mut batch = Batch::new(conn, sql);
    let mut statements = 0;
    let mut rows = 0u64;
    loop {
        let mut stmt = match batch.next() {
            Ok(Some(stmt)) => stmt,
            Ok(None) => break,
            Err(e) => return Err((statements + 1, e)),
        };
        statements += 1;
        if stmt.column_count() > 0 {
            let mut result = stmt.query([]).map_err(|e| (statements, e))?;
            loop {
                match result.next() {
                    Ok(Some(_)) => rows += 1,
                    Ok(None) => break,
                    Err(e) => return Err((statements, e)),
                }
            }
        } else {
            let changed = stmt.execute([]).map_err(|e| (statements, e))?;
            rows += changed as u64;
        }
    }
    Ok((statements, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_script(dir: &Path, name: &str, body: &str) -> PathBuf {
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn sequencing_and_counts() {
        let dir = tempfile::tempdir().unwrap();
        let db = dir.path().join("s.db");
        let a = write_script(
            dir.path(),
            "a.sql",
            "CREATE TABLE t (x INTEGER);\nINSERT INTO t VALUES (1);\nINSERT INTO t VALUES (2);",
        );
        let b = write_script(dir.path(), "b.sql", "SELECT x FROM t;");
        let logs = run_script_set(&db, &[a, b]).unwrap();
        assert_eq!(logs.len(), 2);
        assert_eq!(logs[0].statements, 3);
        assert_eq!(logs[0].rows, 2);
        assert_eq!(logs[1].rows, 2);
    }

    #[test]
    fn failure_names_file_and_statement_and_keeps_prior_commits() {
        let dir = tempfile::tempdir().unwrap();
        let db = dir.path().join("s.db");
        let a = write_script(dir.path(), "a.sql", "CREATE TABLE t (x INTEGER);");
        let b = write_script(
            dir.path(),
            "b.sql",
            "INSERT INTO t VALUES (1);\nINSERT INTO missing VALUES (2);",
        );
        let err = run_script_set(&db, &[a, b]).unwrap_err();
        match err {
            Error::Script {
                script, statement, ..
            } => {
                assert!(script.ends_with("b.sql"));
                assert_eq!(statement, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
        // First file committed; failing file rolled back entirely.
        let conn = Connection::open(&db).unwrap();
        let rows: i64 = conn.query_row("SELECT count(*) FROM t", [], |r| r.get(0)).unwrap();
        assert_eq!(rows, 0);
    }

    #[test]
    fn empty_list_is_success() {
        let dir = tempfile::tempdir().unwrap();
        let db = dir.path().join("s.db");
        assert!(run_script_set(&db, &[]).unwrap().is_empty());
    }
}
