//! Reference-table population: organization registry, journals with
//! ISSN-type disaggregation, funders, open-access journals, and subject
//! classification codes. These sets are small, so they are loaded
//! wholesale with no slicing controls.

use std::path::{Path, PathBuf};

use rusqlite::Connection;

use super::PopulationReport;
use crate::error::Result;
use crate::schema::{ddl_for, SchemaGraph};
use crate::sources::{read_csv_table, read_journals_csv, OrgRegistry};

/// Paths of the reference data sets to load; absent entries are skipped.
#[derive(Debug, Clone, Default)]
pub struct ReferencePaths {
    pub org_registry: Option<PathBuf>,
    pub journals: Option<PathBuf>,
    pub funders: Option<PathBuf>,
    pub open_access: Option<PathBuf>,
    pub asjc: Option<PathBuf>,
}

pub fn populate_reference_tables(db: &Path, paths: &ReferencePaths) -> Result<PopulationReport> {
    let conn = Connection::open(db)?;
    let schema = SchemaGraph::bundled();
    let mut report = PopulationReport::default();

    let ensure = |table: &str| -> Result<()> {
        let exists: i64 = conn.query_row(
            "SELECT count(*) FROM sqlite_master WHERE type = 'table' AND name = ?1",
            [table],
            |r| r.get(0),
        )?;
        if exists == 0 {
            conn.execute_batch(&ddl_for(schema.table(table).expect("bundled")))?;
        }
        Ok(())
    };

    conn.execute_batch("BEGIN")?;
    let result = (|| -> Result<()> {
        if let Some(path) = &paths.org_registry {
            for t in [
                "research_organizations",
                "org_acronyms",
                "org_aliases",
                "org_relationships",
            ] {
                ensure(t)?;
            }
            load_org_registry(&conn, path, &mut report)?;
        }
        if let Some(path) = &paths.journals {
            ensure("journal_names")?;
            ensure("journal_issns")?;
            let mut issn_id = 0i64;
            for (id, journal) in read_journals_csv(path)?.iter().enumerate() {
                conn.execute(
                    "INSERT INTO journal_names (id, title) VALUES (?1, ?2)",
                    rusqlite::params![id as i64, journal.title],
                )?;
                *report.rows.entry("journal_names".into()).or_default() += 1;
                for issn in &journal.issns {
                    conn.execute(
                        "INSERT INTO journal_issns (id, journal_id, issn, issn_type) \
                         VALUES (?1, ?2, ?3, ?4)",
                        rusqlite::params![issn_id, id as i64, issn.value, issn.kind.as_str()],
                    )?;
                    issn_id += 1;
                    *report.rows.entry("journal_issns".into()).or_default() += 1;
                }
            }
        }
        if let Some(path) = &paths.funders {
            ensure("funder_names")?;
            let table = schema.table("funder_names").expect("bundled");
            for (id, row) in read_csv_table(path, table)?.iter().enumerate() {
                conn.execute(
                    "INSERT INTO funder_names (id, uri, name) VALUES (?1, ?2, ?3)",
                    rusqlite::params![id as i64, row[0], row[1]],
                )?;
                *report.rows.entry("funder_names".into()).or_default() += 1;
            }
        }
        if let Some(path) = &paths.open_access {
            ensure("open_access_journals")?;
            let table = schema.table("open_access_journals").expect("bundled");
            for (id, row) in read_csv_table(path, table)?.iter().enumerate() {
                conn.execute(
                    "INSERT INTO open_access_journals (id, title, issn) VALUES (?1, ?2, ?3)",
                    rusqlite::params![id as i64, row[0], row[1]],
                )?;
                *report.rows.entry("open_access_journals".into()).or_default() += 1;
            }
        }
        if let Some(path) = &paths.asjc {
            ensure("asjc_codes")?;
            let table = schema.table("asjc_codes").expect("bundled");
            for (id, row) in read_csv_table(path, table)?.iter().enumerate() {
                let code: i64 = row[0].trim().parse().map_err(|_| {
                    crate::error::Error::Domain(format!("ASJC code {:?} is not numeric", row[0]))
                })?;
                conn.execute(
                    "INSERT INTO asjc_codes (id, code, description) VALUES (?1, ?2, ?3)",
                    rusqlite::params![id as i64, code, row[1]],
                )?;
                *report.rows.entry("asjc_codes".into()).or_default() += 1;
            }
        }
        Ok(())
    })();

    match result {
        Ok(()) => {
            conn.execute_batch("COMMIT")?;
            Ok(report)
        }
        Err(e) => {
            let _ = conn.execute_batch("ROLLBACK");
            Err(e)
        }
    }
}

/// Stream the registry into the four organization tables. Parent links
/// referring to organizations outside the registry are kept (they still
/// name a real identifier) but counted as warnings.
fn load_org_registry(conn: &Connection, path: &Path, report: &mut PopulationReport) -> Result<()> {
    let mut registry = OrgRegistry::open(path)?;
    let mut records = registry.records()?;
    let mut orgs: Vec<(i64, String, Option<String>)> = Vec::new();
    let mut acronym_id = 0i64;
    let mut alias_id = 0i64;

    for record in records.by_ref() {
        let org = record?;
        let id = orgs.len() as i64;
        conn.execute(
            "INSERT INTO research_organizations (id, ror, name, country) VALUES (?1, ?2, ?3, ?4)",
            rusqlite::params![id, org.ror, org.name, org.country],
        )?;
        *report.rows.entry("research_organizations".into()).or_default() += 1;
        for acronym in &org.acronyms {
            conn.execute(
                "INSERT INTO org_acronyms (id, org_id, acronym) VALUES (?1, ?2, ?3)",
                rusqlite::params![acronym_id, id, acronym],
            )?;
            acronym_id += 1;
            *report.rows.entry("org_acronyms".into()).or_default() += 1;
        }
        for alias in &org.aliases {
            conn.execute(
                "INSERT INTO org_aliases (id, org_id, alias) VALUES (?1, ?2, ?3)",
                rusqlite::params![alias_id, id, alias],
            )?;
            alias_id += 1;
            *report.rows.entry("org_aliases".into()).or_default() += 1;
        }
        orgs.push((id, org.ror.clone(), org.parent.clone()));
    }
    report.parse_warnings += records.warnings;

    let known: std::collections::HashSet<&str> =
        orgs.iter().map(|(_, ror, _)| ror.as_str()).collect();
    let mut rel_id = 0i64;
    for (id, _, parent) in &orgs {
        if let Some(parent) = parent {
            if !known.contains(parent.as_str()) {
                report.parse_warnings += 1;
            }
            conn.execute(
                "INSERT INTO org_relationships (id, org_id, type, related_ror) \
                 VALUES (?1, ?2, 'Parent', ?3)",
                rusqlite::params![rel_id, id, parent],
            )?;
            rel_id += 1;
            *report.rows.entry("org_relationships".into()).or_default() += 1;
        }
    }
    Ok(())
}
