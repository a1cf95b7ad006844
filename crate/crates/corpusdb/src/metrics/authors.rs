//! Distinct-author estimation from name pairs and identifier coverage.

use rusqlite::Connection;
use serde::Serialize;

use crate::error::{Error, Result};

/// Estimated number of distinct authors behind a filtered work set.
///
/// `n_an` counts distinct (given, family) pairs over all authors of the
/// filtered works. Within the identifier-bearing subset, `n_o` counts
/// distinct identifiers (the true author count there) and `n_on` the
/// distinct name pairs; their ratio corrects the name-based count for
/// clashes and spelling variation: estimate = n_an * n_o / n_on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuthorCountEstimate {
    pub n_an: u64,
    pub n_o: u64,
    pub n_on: u64,
    pub estimate: f64,
    /// Set when no identifiers exist in the filtered set; the estimate
    /// then falls back to the raw name-pair count.
    pub low_confidence: bool,
}

/// Estimate distinct authors of the works matching `work_filter`, an SQL
/// boolean expression over the `works` table (e.g. a title predicate).
pub fn estimate_author_count(conn: &Connection, work_filter: &str) -> Result<AuthorCountEstimate> {
    let base = format!(
        "FROM work_authors JOIN works ON work_authors.work_id = works.id WHERE ({work_filter})"
    );
    let count = |sql: String| -> Result<u64> {
        conn.query_row(&sql, [], |r| r.get::<_, i64>(0))
            .map(|v| v as u64)
            .map_err(|e| {
                let msg = e.to_string();
                if msg.contains("no such table") {
                    Error::Precondition(
                        "author estimation requires populated works and work_authors tables"
                            .into(),
                    )
                } else if msg.contains("no such column") || msg.contains("syntax error") {
                    Error::Resolution(format!("work filter: {msg}"))
                } else {
                    Error::Sql(e)
                }
            })
    };

    let n_an = count(format!(
        "SELECT count(*) FROM (SELECT DISTINCT work_authors.given, work_authors.family {base})"
    ))?;
    let n_o = count(format!(
        "SELECT count(DISTINCT work_authors.orcid) {base} AND work_authors.orcid IS NOT NULL"
    ))?;
    let n_on = count(format!(
        "SELECT count(*) FROM (SELECT DISTINCT work_authors.given, work_authors.family {base} \
         AND work_authors.orcid IS NOT NULL)"
    ))?;

    if n_o == 0 {
        return Ok(AuthorCountEstimate {
            n_an,
            n_o,
            n_on,
            estimate: n_an as f64,
            low_confidence: true,
        });
    }
    Ok(AuthorCountEstimate {
        n_an,
        n_o,
        n_on,
        estimate: n_an as f64 * n_o as f64 / n_on as f64,
        low_confidence: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db_with_authors(authors: &[(&str, &str, Option<&str>)]) -> Connection {
        let conn = Connection::open_in_memory().unwrap();
        conn.execute_batch(
            "CREATE TABLE works (id INTEGER PRIMARY KEY, doi TEXT, title TEXT);
             CREATE TABLE work_authors (id INTEGER PRIMARY KEY, work_id INTEGER,
                                        given TEXT, family TEXT, orcid TEXT);
             INSERT INTO works VALUES (0, '10.1/x', 'A study');",
        )
        .unwrap();
        for (i, (given, family, orcid)) in authors.iter().enumerate() {
            conn.execute(
                "INSERT INTO work_authors VALUES (?1, 0, ?2, ?3, ?4)",
                rusqlite::params![i as i64, given, family, orcid],
            )
            .unwrap();
        }
        conn
    }

    #[test]
    fn formula_substitution() {
        // 3 distinct names; 2 identifiers over 1 distinct name in the
        // identified subset -> 3 * 2 / 1 = 6.
        let conn = db_with_authors(&[
            ("A", "One", Some("0000-0000-0000-0001")),
            ("A", "One", Some("0000-0000-0000-0002")),
            ("B", "Two", None),
            ("C", "Three", None),
        ]);
        let e = estimate_author_count(&conn, "1=1").unwrap();
        assert_eq!((e.n_an, e.n_o, e.n_on), (3, 2, 1));
        assert_eq!(e.estimate, 6.0);
        assert!(!e.low_confidence);
    }

    #[test]
    fn unbiased_when_names_unique() {
        let conn = db_with_authors(&[
            ("A", "One", Some("0000-0000-0000-0001")),
            ("B", "Two", Some("0000-0000-0000-0002")),
            ("C", "Three", None),
        ]);
        let e = estimate_author_count(&conn, "1=1").unwrap();
        assert_eq!(e.estimate, e.n_an as f64);
    }

    #[test]
    fn no_identifiers_is_low_confidence() {
        let conn = db_with_authors(&[("A", "One", None)]);
        let e = estimate_author_count(&conn, "1=1").unwrap();
        assert!(e.low_confidence);
        assert_eq!(e.estimate, 1.0);
    }

    #[test]
    fn bad_filter_is_a_resolution_error() {
        let conn = db_with_authors(&[("A", "One", None)]);
        assert!(matches!(
            estimate_author_count(&conn, "zap = 1"),
            Err(Error::Resolution(_))
        ));
    }
}
