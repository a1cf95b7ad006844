//! Citation statistics between subject fields.

use std::collections::{BTreeMap, HashMap};

use rusqlite::Connection;
use serde::Serialize;

use crate::error::{Error, Result};

/// Mutual citation statistics of an unordered field pair. `citations_ab`
/// counts citations from `field_a` to `field_b`; strength is the sum of
/// both directions and fundamentalness the share of `field_a`'s outgoing
/// citations in it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldPairStat {
    pub field_a: i64,
    pub field_b: i64,
    pub citations_ab: u64,
    pub citations_ba: u64,
    pub strength: u64,
    pub fundamentalness_of_a: f64,
}

/// Count citations between subject fields. Works carry subject names;
/// the classification table maps names to codes. Self-pairs and pairs
/// touching the Multidisciplinary subject are excluded.
pub fn field_pair_stats(conn: &Connection) -> Result<Vec<FieldPairStat>> {
    let mut code_of_subject: HashMap<String, i64> = HashMap::new();
    let mut multidisciplinary: Vec<i64> = Vec::new();
    {
        let mut stmt = conn
            .prepare("SELECT lower(description), code FROM asjc_codes")
            .map_err(|e| missing(e, "asjc_codes"))?;
        let mut rows = stmt.query([])?;
        while let Some(row) = rows.next()? {
            let name: String = row.get(0)?;
            let code: i64 = row.get(1)?;
            if name == "multidisciplinary" {
                multidisciplinary.push(code);
            }
            code_of_subject.insert(name, code);
        }
    }

    // Subject codes per work.
    let mut codes_of_work: HashMap<i64, Vec<i64>> = HashMap::new();
    {
        let mut stmt = conn
            .prepare("SELECT work_id, lower(name) FROM work_subjects ORDER BY id")
            .map_err(|e| missing(e, "work_subjects"))?;
        let mut rows = stmt.query([])?;
        while let Some(row) = rows.next()? {
            let work: i64 = row.get(0)?;
            let name: String = row.get(1)?;
            if let Some(code) = code_of_subject.get(&name) {
                let list = codes_of_work.entry(work).or_default();
                if !list.contains(code) {
                    list.push(*code);
                }
            }
        }
    }

    // Directed citation counts per ordered code pair.
    let mut directed: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    {
        let mut stmt = conn
            .prepare(
                "SELECT r.work_id, cited.id FROM work_references r \
                 JOIN works cited ON cited.doi = r.doi",
            )
            .map_err(|e| missing(e, "works/work_references"))?;
        let mut rows = stmt.query([])?;
        while let Some(row) = rows.next()? {
            let citing: i64 = row.get(0)?;
            let cited: i64 = row.get(1)?;
            let (Some(from), Some(to)) = (codes_of_work.get(&citing), codes_of_work.get(&cited))
            else {
                continue;
            };
            for a in from {
                for b in to {
                    if a == b || multidisciplinary.contains(a) || multidisciplinary.contains(b) {
                        continue;
                    }
                    *directed.entry((*a, *b)).or_default() += 1;
                }
            }
        }
    }

    let mut out: BTreeMap<(i64, i64), FieldPairStat> = BTreeMap::new();
    for ((from, to), count) in directed {
        let (a, b) = if from < to { (from, to) } else { (to, from) };
        let stat = out.entry((a, b)).or_insert(FieldPairStat {
            field_a: a,
            field_b: b,
            citations_ab: 0,
            citations_ba: 0,
            strength: 0,
            fundamentalness_of_a: 0.0,
        });
        if from == a {
            stat.citations_ab += count;
        } else {
            stat.citations_ba += count;
        }
    }
    let mut rows: Vec<FieldPairStat> = out.into_values().collect();
    for stat in &mut rows {
        stat.strength = stat.citations_ab + stat.citations_ba;
        stat.fundamentalness_of_a = stat.citations_ab as f64 / stat.strength as f64;
    }
    Ok(rows)
}

fn missing(e: rusqlite::Error, what: &str) -> Error {
    if e.to_string().contains("no such table") {
        Error::Precondition(format!("field statistics require the {what} table"))
    } else {
        Error::Sql(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_exclusions() {
        let conn = Connection::open_in_memory().unwrap();
        conn.execute_batch(
            "CREATE TABLE asjc_codes (id INTEGER PRIMARY KEY, code INTEGER, description TEXT);
             CREATE TABLE works (id INTEGER PRIMARY KEY, doi TEXT);
             CREATE TABLE work_subjects (id INTEGER PRIMARY KEY, work_id INTEGER, name TEXT);
             CREATE TABLE work_references (id INTEGER PRIMARY KEY, work_id INTEGER, doi TEXT);
             INSERT INTO asjc_codes VALUES (0, 1503, 'Catalysis'), (1, 2700, 'General Medicine'),
                                           (2, 1000, 'Multidisciplinary');
             INSERT INTO works VALUES (0, '10.1/a'), (1, '10.1/b'), (2, '10.1/c');
             INSERT INTO work_subjects VALUES (0, 0, 'Catalysis'), (1, 1, 'General Medicine'),
                                              (2, 2, 'Multidisciplinary'), (3, 2, 'Catalysis');
             -- a cites b four times; b cites a once; c (multi+catalysis) cites b.
             INSERT INTO work_references VALUES (0, 0, '10.1/b'), (1, 0, '10.1/b'),
                                                (2, 0, '10.1/b'), (3, 0, '10.1/b'),
                                                (4, 1, '10.1/a'), (5, 2, '10.1/b');",
        )
        .unwrap();
        let stats = field_pair_stats(&conn).unwrap();
        assert_eq!(stats.len(), 1);
        let s = &stats[0];
        assert_eq!((s.field_a, s.field_b), (1503, 2700));
        // Catalysis → Medicine: 4 from work 0 plus 1 from work 2's
        // catalysis subject; Medicine → Catalysis: 1.
        assert_eq!(s.citations_ab, 5);
        assert_eq!(s.citations_ba, 1);
        assert_eq!(s.strength, 6);
        assert!((s.fundamentalness_of_a - 5.0 / 6.0).abs() < 1e-12);
    }
}
