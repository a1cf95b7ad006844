//! Linking records across datasets: free-text affiliations to
//! organization identifiers, matched organizations to their ultimate
//! parents, and subject codes to their general fields.

mod automaton;
mod parent;

pub use automaton::{build_automaton, AffiliationMatch, MatchAutomaton, PatternEntry, PatternKind};
pub use parent::propagate_to_parent;

use rusqlite::Connection;

use crate::error::{Error, Result};
use crate::schema::{ddl_for, SchemaGraph};

/// General field of a 4-digit subject classification code: same two-digit
/// prefix, "00" suffix.
pub fn asjc_general_field(code: i64) -> Result<i64> {
    if !(1000..=9999).contains(&code) {
        return Err(Error::Domain(format!(
            "subject code {code} is not a 4-digit code"
        )));
    }
    Ok(code / 100 * 100)
}

/// Match every stored affiliation string against the automaton and write
/// the results to the `affiliation_links` table (affiliation row id,
/// organization identifier). Existing links are replaced. Returns the
/// number of link rows written.
pub fn match_affiliations(conn: &Connection, automaton: &MatchAutomaton) -> Result<u64> {
    let present: i64 = conn.query_row(
        "SELECT count(*) FROM sqlite_master WHERE type = 'table' AND name = 'author_affiliations'",
        [],
        |r| r.get(0),
    )?;
    if present == 0 {
        return Err(Error::Precondition(
            "affiliation matching requires a populated author_affiliations table".into(),
        ));
    }

    let links_present: i64 = conn.query_row(
        "SELECT count(*) FROM sqlite_master WHERE type = 'table' AND name = 'affiliation_links'",
        [],
        |r| r.get(0),
    )?;
    if links_present == 0 {
        let schema = SchemaGraph::bundled();
        conn.execute_batch(&ddl_for(schema.table("affiliation_links").expect("bundled")))?;
    }

    conn.execute_batch("BEGIN")?;
    let result = (|| -> Result<u64> {
        conn.execute_batch("DELETE FROM affiliation_links")?;
        let mut read = conn.prepare("SELECT id, name FROM author_affiliations ORDER BY id")?;
        let mut write =
            conn.prepare("INSERT INTO affiliation_links (id, affiliation_id, ror) VALUES (?1, ?2, ?3)")?;
        let mut rows = read.query([])?;
        let mut written = 0u64;
        while let Some(row) = rows.next()? {
            let affiliation_id: i64 = row.get(0)?;
            let name: String = row.get(1)?;
            if let Some(m) = automaton.find_longest(&name) {
                write.execute(rusqlite::params![written as i64, affiliation_id, m.ror])?;
                written += 1;
            }
        }
        Ok(written)
    })();
    match result {
        Ok(written) => {
            conn.execute_batch("COMMIT")?;
            Ok(written)
        }
        Err(e) => {
            let _ = conn.execute_batch("ROLLBACK");
            Err(e)
        }
    }
}

/// Organization records read back from a populated database, in insertion
/// order; used to build the matcher from already-loaded registry tables.
pub fn org_records_from_db(conn: &Connection) -> Result<Vec<crate::sources::OrgRecord>> {
    let mut stmt = conn
        .prepare(
            "SELECT o.id, o.ror, o.name, o.country FROM research_organizations o ORDER BY o.id",
        )
        .map_err(|e| {
            if e.to_string().contains("no such table") {
                Error::Precondition(
                    "building the matcher requires populated organization tables".into(),
                )
            } else {
                Error::Sql(e)
            }
        })?;
    let mut orgs: Vec<(i64, crate::sources::OrgRecord)> = stmt
        .query_map([], |row| {
            Ok((
                row.get::<_, i64>(0)?,
                crate::sources::OrgRecord {
                    ror: row.get(1)?,
                    name: row.get(2)?,
                    country: row.get::<_, Option<String>>(3)?.unwrap_or_default(),
                    ..Default::default()
                },
            ))
        })?
        .collect::<rusqlite::Result<_>>()?;

    let mut acronyms = conn.prepare("SELECT org_id, acronym FROM org_acronyms ORDER BY id")?;
    let mut rows = acronyms.query([])?;
    while let Some(row) = rows.next()? {
        let org_id: i64 = row.get(0)?;
        if let Some((_, org)) = orgs.iter_mut().find(|(id, _)| *id == org_id) {
            org.acronyms.push(row.get(1)?);
        }
    }
    let mut aliases = conn.prepare("SELECT org_id, alias FROM org_aliases ORDER BY id")?;
    let mut rows = aliases.query([])?;
    while let Some(row) = rows.next()? {
        let org_id: i64 = row.get(0)?;
        if let Some((_, org)) = orgs.iter_mut().find(|(id, _)| *id == org_id) {
            org.aliases.push(row.get(1)?);
        }
    }
    let mut parents = conn.prepare(
        "SELECT org_id, related_ror FROM org_relationships WHERE type = 'Parent' ORDER BY id",
    )?;
    let mut rows = parents.query([])?;
    while let Some(row) = rows.next()? {
        let org_id: i64 = row.get(0)?;
        if let Some((_, org)) = orgs.iter_mut().find(|(id, _)| *id == org_id) {
            if org.parent.is_none() {
                org.parent = Some(row.get(1)?);
            }
        }
    }
    Ok(orgs.into_iter().map(|(_, org)| org).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_field_rollup() {
        assert_eq!(asjc_general_field(1503).unwrap(), 1500);
        assert_eq!(asjc_general_field(2700).unwrap(), 2700);
        assert!(matches!(asjc_general_field(345), Err(Error::Domain(_))));
        assert!(matches!(asjc_general_field(10000), Err(Error::Domain(_))));
    }
}
