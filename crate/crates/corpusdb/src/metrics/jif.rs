//! Journal impact factor.
//!
//! For a census year, the numerator counts citations appearing in
//! census-year works to works the journal published in the two prior
//! years; the denominator counts the journal's citable items in those
//! two years (longer than two pages, or lacking a usable page range).
//! Journals with no citable items are omitted. Each journal's metric is
//! keyed by all its registered ISSN variants, excluding alternative
//! ISSNs that serve as primary for another journal.

use std::collections::{BTreeMap, HashMap};

use rusqlite::Connection;
use serde::Serialize;

use super::pages::is_citable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct JifRow {
    /// Journal display key: registered title, else the grouping ISSN.
    pub journal: String,
    /// All ISSN variants the metric is keyed by.
    pub issns: Vec<String>,
    pub citations: u64,
    pub citable_items: u64,
    pub jif: f64,
}

#[derive(Debug, Default)]
pub struct JifReport {
    pub rows: Vec<JifRow>,
    pub warnings: Vec<String>,
}

/// Registered journals and the ISSN-to-journal lookup with the
/// alternative-ISSN exclusion rule applied.
pub(crate) struct JournalDirectory {
    /// journal id -> (title, issn variants)
    journals: HashMap<i64, (String, Vec<String>)>,
    /// issn -> journal id
    lookup: HashMap<String, i64>,
}

impl JournalDirectory {
    pub(crate) fn load(conn: &Connection) -> Result<Self> {
        let mut journals: HashMap<i64, (String, Vec<String>)> = HashMap::new();
        let mut lookup: HashMap<String, i64> = HashMap::new();

        let tables: i64 = conn.query_row(
            "SELECT count(*) FROM sqlite_master WHERE type = 'table' \
             AND name IN ('journal_names', 'journal_issns')",
            [],
            |r| r.get(0),
        )?;
        if tables < 2 {
            return Ok(JournalDirectory {
                journals,
                lookup,
            });
        }

        let mut stmt = conn.prepare(
            "SELECT i.journal_id, n.title, i.issn, i.issn_type \
             FROM journal_issns i JOIN journal_names n ON n.id = i.journal_id \
             ORDER BY i.id",
        )?;
        let mut rows = stmt.query([])?;
        let mut alternatives: Vec<(i64, String)> = Vec::new();
        while let Some(row) = rows.next()? {
            let journal: i64 = row.get(0)?;
            let title: String = row.get(1)?;
            let issn: String = row.get(2)?;
            let kind: String = row.get(3)?;
            journals
                .entry(journal)
                .or_insert_with(|| (title, Vec::new()));
            if kind == "alternative" {
                alternatives.push((journal, issn));
            } else {
                // Primary (print/electronic) claims win the lookup.
                lookup.insert(issn.clone(), journal);
                journals.get_mut(&journal).expect("inserted").1.push(issn);
            }
        }
        for (journal, issn) in alternatives {
            match lookup.get(&issn) {
                // Alternative ISSN that is primary for another journal:
                // excluded from this journal's variants.
                Some(owner) if *owner != journal => {}
                Some(_) => {}
                None => {
                    lookup.insert(issn.clone(), journal);
                    journals.get_mut(&journal).expect("inserted").1.push(issn);
                }
            }
        }
        Ok(JournalDirectory { journals, lookup })
    }

    /// Grouping key for a work's ISSNs: the registered journal when
    /// known, else a singleton group keyed by the first ISSN present.
    pub(crate) fn group_key(
        &self,
        print: Option<&str>,
        electronic: Option<&str>,
    ) -> Option<JournalKey> {
        for issn in [print, electronic].iter().flatten() {
            if let Some(journal) = self.lookup.get(*issn) {
                return Some(JournalKey::Registered(*journal));
            }
        }
        print
            .or(electronic)
            .map(|issn| JournalKey::Unregistered(issn.to_owned()))
    }

    /// Human-readable key used in metric outputs.
    pub(crate) fn display_key(
        &self,
        print: Option<&str>,
        electronic: Option<&str>,
    ) -> Option<String> {
        self.group_key(print, electronic).map(|k| match k {
            JournalKey::Registered(id) => self.journals[&id].0.clone(),
            JournalKey::Unregistered(issn) => issn,
        })
    }

    fn describe(&self, key: &JournalKey) -> (String, Vec<String>) {
        match key {
            JournalKey::Registered(id) => self.journals[id].clone(),
            JournalKey::Unregistered(issn) => (issn.clone(), vec![issn.clone()]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum JournalKey {
    Registered(i64),
    Unregistered(String),
}

/// Compute the impact factor for every journal with a non-zero
/// denominator, sorted by journal display key.
pub fn impact_factor(conn: &Connection, census_year: i64) -> Result<JifReport> {
    let mut report = JifReport::default();
    let directory = JournalDirectory::load(conn)?;
    let prior = [census_year - 2, census_year - 1];

    let census_works: i64 = conn
        .query_row(
            "SELECT count(*) FROM works WHERE published_year = ?1",
            [census_year],
            |r| r.get(0),
        )
        .map_err(|e| {
            if e.to_string().contains("no such table") {
                Error::Precondition("impact factor requires a populated works table".into())
            } else {
                Error::Sql(e)
            }
        })?;
    let prior_works: i64 = conn.query_row(
        "SELECT count(*) FROM works WHERE published_year IN (?1, ?2)",
        [prior[0], prior[1]],
        |r| r.get(0),
    )?;
    if census_works == 0 || prior_works == 0 {
        report.warnings.push(format!(
            "missing year data: {census_works} works in {census_year}, {prior_works} in {}-{}",
            prior[0], prior[1]
        ));
        return Ok(report);
    }

    // Prior-year works: journal assignment and citability.
    let mut work_journal: HashMap<i64, JournalKey> = HashMap::new();
    let mut denominators: BTreeMap<JournalKey, u64> = BTreeMap::new();
    {
        let mut stmt = conn.prepare(
            "SELECT id, issn_print, issn_electronic, pages FROM works \
             WHERE published_year IN (?1, ?2) ORDER BY id",
        )?;
        let mut rows = stmt.query([prior[0], prior[1]])?;
        while let Some(row) = rows.next()? {
            let id: i64 = row.get(0)?;
            let print: Option<String> = row.get(1)?;
            let electronic: Option<String> = row.get(2)?;
            let pages: Option<String> = row.get(3)?;
            let key = match directory.group_key(print.as_deref(), electronic.as_deref()) {
                Some(k) => k,
                None => continue, // no ISSN: not attributable to a journal
            };
            work_journal.insert(id, key.clone());
            if is_citable(pages.as_deref().unwrap_or("")) {
                *denominators.entry(key).or_default() += 1;
            } else {
                denominators.entry(key).or_default();
            }
        }
    }

    // Citations in census-year works to those prior-year works.
    let mut numerators: BTreeMap<JournalKey, u64> = BTreeMap::new();
    {
        let mut stmt = conn.prepare(
            "SELECT cited.id FROM work_references r \
             JOIN works citing ON citing.id = r.work_id \
             JOIN works cited ON cited.doi = r.doi \
             WHERE citing.published_year = ?1 \
               AND cited.published_year IN (?2, ?3)",
        )?;
        let mut rows = stmt.query([census_year, prior[0], prior[1]])?;
        while let Some(row) = rows.next()? {
            let cited: i64 = row.get(0)?;
            if let Some(key) = work_journal.get(&cited) {
                *numerators.entry(key.clone()).or_default() += 1;
            }
        }
    }

    for (key, citable) in denominators {
        if citable == 0 {
            continue;
        }
        let citations = numerators.get(&key).copied().unwrap_or(0);
        let (journal, issns) = directory.describe(&key);
        report.rows.push(JifRow {
            journal,
            issns,
            citations,
            citable_items: citable,
            jif: citations as f64 / citable as f64,
        });
    }
    report
        .rows
        .sort_by(|a, b| (&a.journal, &a.issns).cmp(&(&b.journal, &b.issns)));
    Ok(report)
}
