//! Person-archive population.

use std::collections::HashSet;
use std::path::Path;

use rusqlite::Connection;

use super::PopulationReport;
use crate::error::{Error, Result};
use crate::schema::{ddl_for, SchemaGraph};
use crate::sources::visit_person_archive;

/// Load persons (and their employment, education, and work detail rows)
/// from a `.tar.gz` archive. With `only_linked`, only persons whose
/// identifier appears in the populated `work_authors` table are loaded.
pub fn populate_persons(db: &Path, archive: &Path, only_linked: bool) -> Result<PopulationReport> {
    let conn = Connection::open(db)?;
    let schema = SchemaGraph::bundled();

    let linked: Option<HashSet<String>> = if only_linked {
        let mut stmt = conn
            .prepare("SELECT DISTINCT orcid FROM work_authors WHERE orcid IS NOT NULL")
            .map_err(|e| {
                if e.to_string().contains("no such table") {
                    Error::Precondition(
                        "only_linked requires a populated work_authors table".into(),
                    )
                } else {
                    Error::Sql(e)
                }
            })?;
        let ids = stmt
            .query_map([], |r| r.get::<_, String>(0))?
            .collect::<rusqlite::Result<HashSet<String>>>()?;
        Some(ids)
    } else {
        None
    };

    for table in ["persons", "person_employments", "person_educations", "person_works"] {
        let t = schema.table(table).expect("bundled");
        let exists: i64 = conn.query_row(
            "SELECT count(*) FROM sqlite_master WHERE type = 'table' AND name = ?1",
            [table],
            |r| r.get(0),
        )?;
        if exists == 0 {
            conn.execute_batch(&ddl_for(t))?;
        }
    }

    let mut next_person: i64 =
        conn.query_row("SELECT coalesce(max(id), -1) + 1 FROM persons", [], |r| r.get(0))?;
    let mut next_detail: [i64; 3] = [
        conn.query_row(
            "SELECT coalesce(max(id), -1) + 1 FROM person_employments",
            [],
            |r| r.get(0),
        )?,
        conn.query_row(
            "SELECT coalesce(max(id), -1) + 1 FROM person_educations",
            [],
            |r| r.get(0),
        )?,
        conn.query_row("SELECT coalesce(max(id), -1) + 1 FROM person_works", [], |r| {
            r.get(0)
        })?,
    ];

    let mut report = PopulationReport::default();
    conn.execute_batch("BEGIN")?;
    let result = visit_person_archive(archive, |person| {
        if let Some(linked) = &linked {
            if !linked.contains(&person.orcid) {
                return Ok(());
            }
        }
        let person_id = next_person;
        next_person += 1;
        conn.execute(
            "INSERT INTO persons (id, orcid, given, family) VALUES (?1, ?2, ?3, ?4)",
            rusqlite::params![person_id, person.orcid, person.given, person.family],
        )?;
        *report.rows.entry("persons".into()).or_default() += 1;

        for (slot, table, spells) in [
            (0usize, "person_employments", &person.employments),
            (1, "person_educations", &person.educations),
        ] {
            for spell in spells {
                conn.execute(
                    &format!(
                        "INSERT INTO {table} (id, person_id, organization, ror, start_date, end_date) \
                         VALUES (?1, ?2, ?3, ?4, ?5, ?6)"
                    ),
                    rusqlite::params![
                        next_detail[slot],
                        person_id,
                        spell.organization,
                        spell.ror,
                        spell.start_date,
                        spell.end_date
                    ],
                )?;
                next_detail[slot] += 1;
                *report.rows.entry(table.into()).or_default() += 1;
            }
        }
        for doi in &person.works {
            conn.execute(
                "INSERT INTO person_works (id, person_id, doi) VALUES (?1, ?2, ?3)",
                rusqlite::params![next_detail[2], person_id, doi],
            )?;
            next_detail[2] += 1;
            *report.rows.entry("person_works".into()).or_default() += 1;
        }
        Ok(())
    });

    match result {
        Ok(skipped) => {
            conn.execute_batch("COMMIT")?;
            report.parse_warnings = skipped;
            Ok(report)
        }
        Err(e) => {
            let _ = conn.execute_batch("ROLLBACK");
            Err(e)
        }
    }
}
