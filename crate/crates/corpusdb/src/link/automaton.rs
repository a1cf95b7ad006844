//! Pruned multi-pattern matcher from organization names, aliases, and
//! acronyms to organization identifiers.
//!
//! Construction runs in three passes: collect unique lowercased patterns
//! (dropping sub-3-character noise and patterns claimed by several
//! organizations), scan every pattern through an automaton over all
//! patterns and prune entries that occur inside another pattern, then
//! rebuild the automaton from the survivors. Matching returns the longest
//! surviving pattern occurrence, with ties broken by earliest start and
//! then pattern text.

use aho_corasick::AhoCorasick;

use crate::error::{Error, Result};
use crate::sources::OrgRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PatternKind {
    Name,
    Alias,
    Acronym,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternEntry {
    /// Lowercased pattern text.
    pub pattern: String,
    /// Organization identifier the pattern resolves to.
    pub ror: String,
    pub kind: PatternKind,
}

/// An immutable matcher; build once, share across threads.
pub struct MatchAutomaton {
    entries: Vec<PatternEntry>,
    pruned: Vec<PatternEntry>,
    machine: AhoCorasick,
}

/// A resolved occurrence within an affiliation string. Offsets are
/// character positions in the lowercase-normalized text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffiliationMatch {
    pub ror: String,
    pub pattern: String,
    pub start: usize,
    pub end: usize,
}

/// Build the matcher from registry records.
pub fn build_automaton(orgs: impl IntoIterator<Item = OrgRecord>) -> Result<MatchAutomaton> {
    let mut candidates: Vec<PatternEntry> = Vec::new();
    let mut any = false;
    for org in orgs {
        any = true;
        let mut push = |text: &str, kind: PatternKind| {
            let pattern = text.to_lowercase();
            // Very short patterns are acronym noise.
            if pattern.chars().count() < 3 {
                return;
            }
            candidates.push(PatternEntry {
                pattern,
                ror: org.ror.clone(),
                kind,
            });
        };
        push(&org.name, PatternKind::Name);
        for alias in &org.aliases {
            push(alias, PatternKind::Alias);
        }
        for acronym in &org.acronyms {
            push(acronym, PatternKind::Acronym);
        }
    }
    if !any {
        return Err(Error::Domain("organization registry is empty".into()));
    }

    // Pass 1: unique patterns. A pattern claimed by more than one
    // organization is ambiguous and removed outright; within one
    // organization the most specific kind wins.
    candidates.sort_by(|a, b| {
        (&a.pattern, &a.kind, &a.ror).cmp(&(&b.pattern, &b.kind, &b.ror))
    });
    let mut entries: Vec<PatternEntry> = Vec::new();
    let mut pruned: Vec<PatternEntry> = Vec::new();
    let mut i = 0;
    while i < candidates.len() {
        let mut j = i + 1;
        while j < candidates.len() && candidates[j].pattern == candidates[i].pattern {
            j += 1;
        }
        let claimants = &candidates[i..j];
        let ambiguous = claimants.iter().any(|c| c.ror != claimants[0].ror);
        if ambiguous {
            pruned.extend(claimants.iter().cloned());
        } else {
            entries.push(claimants[0].clone());
        }
        i = j;
    }

    // Pass 2: scan every pattern as text through an automaton over all
    // patterns; any entry occurring inside a different entry's pattern is
    // ambiguous in running text and is marked for removal.
    let patterns: Vec<&str> = entries.iter().map(|e| e.pattern.as_str()).collect();
    let scanner = AhoCorasick::new(&patterns)
        .map_err(|e| Error::Domain(format!("cannot build matcher: {e}")))?;
    let mut remove = vec![false; entries.len()];
    for entry in &entries {
        for m in scanner.find_overlapping_iter(&entry.pattern) {
            let hit = m.pattern().as_usize();
            if entries[hit].pattern != entry.pattern {
                remove[hit] = true;
            }
        }
    }

    // Pass 3: rebuild from the survivors.
    let mut survivors = Vec::new();
    for (entry, gone) in entries.into_iter().zip(remove) {
        if gone {
            pruned.push(entry);
        } else {
            survivors.push(entry);
        }
    }
    MatchAutomaton::from_entries(survivors, pruned)
}

impl MatchAutomaton {
    /// Build directly from pattern entries (callers are responsible for
    /// pruning decisions; [`build_automaton`] is the registry path).
    pub fn from_entries(entries: Vec<PatternEntry>, pruned: Vec<PatternEntry>) -> Result<Self> {
        let machine = AhoCorasick::new(entries.iter().map(|e| e.pattern.as_str()))
            .map_err(|e| Error::Domain(format!("cannot build matcher: {e}")))?;
        Ok(MatchAutomaton {
            entries,
            pruned,
            machine,
        })
    }

    pub fn entries(&self) -> &[PatternEntry] {
        &self.entries
    }

    /// Entries removed as ambiguous during construction.
    pub fn pruned(&self) -> &[PatternEntry] {
        &self.pruned
    }

    /// The longest pattern occurrence within the affiliation string,
    /// matching case-insensitively with word-boundary enforcement (an
    /// occurrence flanked by a letter on either side does not count).
    /// Ties on length break by earliest start, then pattern text.
    pub fn find_longest(&self, affiliation: &str) -> Option<AffiliationMatch> {
        let text = affiliation.to_lowercase();
        let mut best: Option<(usize, usize, &PatternEntry)> = None;
        for m in self.machine.find_overlapping_iter(&text) {
            if !word_bounded(&text, m.start(), m.end()) {
                continue;
            }
            let entry = &self.entries[m.pattern().as_usize()];
            let better = match &best {
                None => true,
                Some((bs, be, bp)) => {
                    let (len, blen) = (m.end() - m.start(), be - bs);
                    (len, std::cmp::Reverse(m.start()), std::cmp::Reverse(&entry.pattern))
                        > (blen, std::cmp::Reverse(*bs), std::cmp::Reverse(&bp.pattern))
                }
            };
            if better {
                best = Some((m.start(), m.end(), entry));
            }
        }
        best.map(|(start, end, entry)| AffiliationMatch {
            ror: entry.ror.clone(),
            pattern: entry.pattern.clone(),
            start: text[..start].chars().count(),
            end: text[..end].chars().count(),
        })
    }
}

/// True when the byte span is not flanked by letters.
fn word_bounded(text: &str, start: usize, end: usize) -> bool {
    let before = text[..start].chars().next_back();
    let after = text[end..].chars().next();
    !before.is_some_and(char::is_alphabetic) && !after.is_some_and(char::is_alphabetic)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn org(ror: &str, name: &str, aliases: &[&str], acronyms: &[&str]) -> OrgRecord {
        OrgRecord {
            ror: ror.into(),
            name: name.into(),
            aliases: aliases.iter().map(|s| s.to_string()).collect(),
            acronyms: acronyms.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    #[test]
    fn acronym_inside_name_is_pruned() {
        // "ai" is shorter than 3 characters, so use a 3+ character pair
        // exercising the same containment rule.
        let automaton = build_automaton(vec![
            org("r1", "Ministry of Foreign Affairs", &[], &[]),
            org("r2", "AI Corporation", &[], &["affairs"]),
        ])
        .unwrap();
        assert!(automaton
            .entries()
            .iter()
            .all(|e| e.pattern != "affairs"));
        assert!(automaton.pruned().iter().any(|e| e.pattern == "affairs"));
    }

    #[test]
    fn duplicate_claim_is_ambiguous() {
        let automaton = build_automaton(vec![
            org("r1", "Alpha University", &["tech institute"], &[]),
            org("r2", "Beta College", &["tech institute"], &[]),
        ])
        .unwrap();
        assert!(automaton
            .entries()
            .iter()
            .all(|e| e.pattern != "tech institute"));
        assert_eq!(
            automaton
                .pruned()
                .iter()
                .filter(|e| e.pattern == "tech institute")
                .count(),
            2
        );
    }

    #[test]
    fn disjoint_patterns_survive() {
        let automaton =
            build_automaton(vec![org("r1", "mit", &[], &[]), org("r2", "eth zurich", &[], &[])])
                .unwrap();
        assert_eq!(automaton.entries().len(), 2);
        assert!(automaton.pruned().is_empty());
    }

    #[test]
    fn longest_match_wins() {
        let automaton = MatchAutomaton::from_entries(
            vec![
                PatternEntry {
                    pattern: "university of california".into(),
                    ror: "r1".into(),
                    kind: PatternKind::Name,
                },
                PatternEntry {
                    pattern: "university of california, berkeley".into(),
                    ror: "r2".into(),
                    kind: PatternKind::Name,
                },
            ],
            vec![],
        )
        .unwrap();
        let m = automaton
            .find_longest("Dept. of Physics, University of California, Berkeley, USA")
            .unwrap();
        assert_eq!(m.ror, "r2");
    }

    #[test]
    fn word_boundaries_enforced() {
        let automaton = MatchAutomaton::from_entries(
            vec![PatternEntry {
                pattern: "eth".into(),
                ror: "r1".into(),
                kind: PatternKind::Acronym,
            }],
            vec![],
        )
        .unwrap();
        assert!(automaton.find_longest("methods department").is_none());
        assert!(automaton.find_longest("ETH, Zurich").is_some());
    }

    #[test]
    fn no_match_yields_none() {
        let automaton = build_automaton(vec![org("r1", "Alpha University", &[], &[])]).unwrap();
        assert!(automaton.find_longest("Independent Researcher").is_none());
    }
}
