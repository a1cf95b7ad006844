//! Propagation of matched organizations to their ultimate parents.

use std::collections::HashMap;

use rusqlite::Connection;

use crate::error::{Error, Result};

/// Rewrite every affiliation link to the identifier of the most senior
/// ancestor organization. A recursive traversal assigns each matched
/// organization its ancestor chain with generation numbers; a windowed
/// ordering by generation selects the top of each chain. Roots map to
/// themselves, so the operation is idempotent. Returns the number of
/// links that changed.
pub fn propagate_to_parent(conn: &Connection) -> Result<u64> {
    for table in ["affiliation_links", "org_relationships", "research_organizations"] {
        let present: i64 = conn.query_row(
            "SELECT count(*) FROM sqlite_master WHERE type = 'table' AND name = ?1",
            [table],
            |r| r.get(0),
        )?;
        if present == 0 {
            return Err(Error::Precondition(format!(
                "parent propagation requires the {table} table"
            )));
        }
    }
    detect_parent_cycles(conn)?;

    conn.execute_batch("BEGIN")?;
    let result = (|| -> Result<u64> {
        let changed = conn.execute(
            "WITH RECURSIVE
             parent_of(ror, parent) AS (
               SELECT o.ror, r.related_ror
               FROM org_relationships r
               JOIN research_organizations o ON o.id = r.org_id
               WHERE r.type = 'Parent'
             ),
             chain(start_ror, ancestor, generation) AS (
               SELECT DISTINCT ror, ror, 0 FROM affiliation_links
               UNION ALL
               SELECT c.start_ror, p.parent, c.generation + 1
               FROM chain c JOIN parent_of p ON p.ror = c.ancestor
             ),
             senior(start_ror, ancestor) AS (
               SELECT start_ror, ancestor FROM (
                 SELECT start_ror, ancestor,
                        ROW_NUMBER() OVER (
                          PARTITION BY start_ror
                          ORDER BY generation DESC, ancestor
                        ) AS seniority
                 FROM chain
               ) WHERE seniority = 1
             )
             UPDATE affiliation_links
             SET ror = (SELECT ancestor FROM senior WHERE start_ror = affiliation_links.ror)
             WHERE ror <> (SELECT ancestor FROM senior WHERE start_ror = affiliation_links.ror)",
            [],
        )?;
        Ok(changed as u64)
    })();
    match result {
        Ok(changed) => {
            conn.execute_batch("COMMIT")?;
            Ok(changed)
        }
        Err(e) => {
            let _ = conn.execute_batch("ROLLBACK");
            Err(e)
        }
    }
}

/// Walk every organization's parent chain; a repeated identifier means
/// the registry declares a cycle, which would make the recursive
/// traversal diverge.
fn detect_parent_cycles(conn: &Connection) -> Result<()> {
    let mut stmt = conn.prepare(
        "SELECT o.ror, min(r.related_ror)
         FROM org_relationships r
         JOIN research_organizations o ON o.id = r.org_id
         WHERE r.type = 'Parent'
         GROUP BY o.ror",
    )?;
    let parent: HashMap<String, String> = stmt
        .query_map([], |row| Ok((row.get::<_, String>(0)?, row.get::<_, String>(1)?)))?
        .collect::<rusqlite::Result<_>>()?;

    for start in parent.keys() {
        let mut seen = vec![start.clone()];
        let mut cur = start;
        while let Some(next) = parent.get(cur) {
            if seen.contains(next) {
                let from = seen.iter().position(|s| s == next).unwrap_or(0);
                let mut cycle: Vec<String> = seen[from..].to_vec();
                cycle.push(next.clone());
                return Err(Error::Cycle(cycle));
            }
            seen.push(next.clone());
            cur = next;
        }
    }
    Ok(())
}
