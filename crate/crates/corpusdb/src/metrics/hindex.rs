//! h-index family over windowed citation counts.

use std::collections::{BTreeMap, HashMap};

use rusqlite::Connection;

use crate::error::{Error, Result};

/// h-index of one entity's citation counts: rank the counts in
/// descending order and keep the rows whose rank does not exceed their
/// count; h is the number of selected rows.
pub fn h_index(counts: &[u64]) -> u64 {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted
        .iter()
        .enumerate()
        .filter(|(rank0, &c)| (*rank0 as u64) < c)
        .count() as u64
}

/// Per-journal h-index over works published in the trailing window
/// ending at `census_year` (window of `window_years` calendar years).
/// Journals are keyed by title when registered, else by the first ISSN.
pub fn h5_by_journal(
    conn: &Connection,
    census_year: i64,
    window_years: i64,
) -> Result<Vec<(String, u64)>> {
    let journals = super::jif::JournalDirectory::load(conn)?;
    let lo = census_year - window_years + 1;

    let mut works = conn
        .prepare(
            "SELECT id, issn_print, issn_electronic FROM works \
             WHERE published_year BETWEEN ?1 AND ?2 \
               AND (issn_print IS NOT NULL OR issn_electronic IS NOT NULL) \
             ORDER BY id",
        )
        .map_err(no_such_table)?;
    let mut work_entity: HashMap<i64, String> = HashMap::new();
    let mut rows = works.query([lo, census_year])?;
    while let Some(row) = rows.next()? {
        let id: i64 = row.get(0)?;
        let print: Option<String> = row.get(1)?;
        let electronic: Option<String> = row.get(2)?;
        let key = journals.display_key(print.as_deref(), electronic.as_deref());
        if let Some(key) = key {
            work_entity.insert(id, key);
        }
    }

    group_h_index(conn, &work_entity)
}

/// Per-person h-index over works published in the trailing window; a
/// person is an author identifier, works are attributed through the
/// author rows.
pub fn h5_by_person(
    conn: &Connection,
    census_year: i64,
    window_years: i64,
) -> Result<Vec<(String, u64)>> {
    let lo = census_year - window_years + 1;
    let mut stmt = conn
        .prepare(
            "SELECT w.id, a.orcid FROM works w \
             JOIN work_authors a ON a.work_id = w.id \
             WHERE a.orcid IS NOT NULL AND w.published_year BETWEEN ?1 AND ?2 \
             ORDER BY w.id",
        )
        .map_err(no_such_table)?;
    // A work may have several identified authors; count it for each.
    let mut attributions: Vec<(i64, String)> = Vec::new();
    let mut rows = stmt.query([lo, census_year])?;
    while let Some(row) = rows.next()? {
        attributions.push((row.get(0)?, row.get(1)?));
    }

    let citations = citation_counts(conn)?;
    let mut per_entity: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for (work, orcid) in attributions {
        per_entity
            .entry(orcid)
            .or_default()
            .push(citations.get(&work).copied().unwrap_or(0));
    }
    Ok(per_entity
        .into_iter()
        .map(|(key, counts)| {
            let h = h_index(&counts);
            (key, h)
        })
        .collect())
}

fn group_h_index(
    conn: &Connection,
    work_entity: &HashMap<i64, String>,
) -> Result<Vec<(String, u64)>> {
    let citations = citation_counts(conn)?;
    let mut per_entity: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for (work, entity) in work_entity {
        per_entity
            .entry(entity.clone())
            .or_default()
            .push(citations.get(work).copied().unwrap_or(0));
    }
    Ok(per_entity
        .into_iter()
        .map(|(key, counts)| {
            let h = h_index(&counts);
            (key, h)
        })
        .collect())
}

/// Citations received per work: references anywhere in the database
/// whose target identifier matches the work.
fn citation_counts(conn: &Connection) -> Result<HashMap<i64, u64>> {
    let mut stmt = conn
        .prepare(
            "SELECT w.id, count(*) FROM works w \
             JOIN work_references r ON r.doi = w.doi \
             GROUP BY w.id",
        )
        .map_err(no_such_table)?;
    let mut out = HashMap::new();
    let mut rows = stmt.query([])?;
    while let Some(row) = rows.next()? {
        out.insert(row.get::<_, i64>(0)?, row.get::<_, i64>(1)? as u64);
    }
    Ok(out)
}

fn no_such_table(e: rusqlite::Error) -> Error {
    if e.to_string().contains("no such table") {
        Error::Precondition("metric requires populated works and reference tables".into())
    } else {
        Error::Sql(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_vs_count_selection() {
        assert_eq!(h_index(&[9, 7, 5, 5, 4, 1]), 5);
        assert_eq!(h_index(&[]), 0);
        assert_eq!(h_index(&[0, 0]), 0);
        assert_eq!(h_index(&[1]), 1);
        assert_eq!(h_index(&[100]), 1);
        assert_eq!(h_index(&[2, 2, 2]), 2);
    }
}
