//! Person archive reading: a `.tar.gz` holding one XML document per
//! person.
//!
//! Element subset handled per person:
//!
//! ```xml
//! <person>
//!   <orcid>0000-0002-1825-0097</orcid>
//!   <given-names>Josiah</given-names>
//!   <family-name>Carberry</family-name>
//!   <employments>
//!     <employment>
//!       <organization>Brown University</organization>
//!       <ror>https://ror.org/05gq02987</ror>
//!       <start-date>2001-01</start-date>
//!       <end-date>2005-12</end-date>
//!     </employment>
//!   </employments>
//!   <educations><education>...</education></educations>
//!   <works><doi>10.1234/x</doi></works>
//! </person>
//! ```
//!
//! Unknown elements are ignored; malformed entries are skipped and
//! counted. Entries are processed one at a time, so memory stays bounded
//! by the largest single entry.

use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use quick_xml::events::Event;
use quick_xml::Reader;

use super::{normalize_orcid, AffiliationSpell, PersonRecord};
use crate::error::{Error, Result};

/// Read every person in the archive, skipping malformed entries and
/// duplicate identifiers. Returns the records plus the skip count.
pub fn read_person_archive(path: &Path) -> Result<(Vec<PersonRecord>, u64)> {
    let mut out = Vec::new();
    let mut warnings = 0;
    visit_person_archive(path, |person| {
        out.push(person);
        Ok(())
    })
    .map(|skipped| {
        warnings = skipped;
    })?;
    Ok((out, warnings))
}

/// Streaming variant: `visit` is called once per well-formed person, in
/// archive order. Returns the number of skipped entries.
pub fn visit_person_archive(
    path: &Path,
    mut visit: impl FnMut(PersonRecord) -> Result<()>,
) -> Result<u64> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let gz = flate2::read::GzDecoder::new(file);
    let mut archive = tar::Archive::new(gz);
    let mut warnings = 0u64;
    let mut seen: HashSet<String> = HashSet::new();

    let entries = archive.entries().map_err(|e| Error::io(path, e))?;
    for entry in entries {
        let mut entry = entry.map_err(|e| Error::io(path, e))?;
        if !entry.header().entry_type().is_file() {
            continue;
        }
        let mut xml = String::new();
        if entry.read_to_string(&mut xml).is_err() {
            warnings += 1;
            continue;
        }
        match parse_person_xml(&xml) {
            Some(person) => {
                if seen.insert(person.orcid.clone()) {
                    visit(person)?;
                } else {
                    // Identifier must be unique within an archive.
                    warnings += 1;
                }
            }
            None => warnings += 1,
        }
    }
    Ok(warnings)
}

fn parse_person_xml(xml: &str) -> Option<PersonRecord> {
    let mut reader = Reader::from_str(xml);
    reader.config_mut().trim_text(true);

    let mut person = PersonRecord::default();
    let mut path: Vec<String> = Vec::new();
    let mut spell = AffiliationSpell::default();
    let mut text = String::new();

    loop {
        match reader.read_event() {
            Ok(Event::Start(e)) => {
                let name = String::from_utf8_lossy(e.name().as_ref()).into_owned();
                path.push(name);
                text.clear();
            }
            Ok(Event::Text(t)) => {
                text = t
                    .xml_content(quick_xml::XmlVersion::Implicit1_0)
                    .ok()?
                    .into_owned();
            }
            Ok(Event::End(e)) => {
                let name = String::from_utf8_lossy(e.name().as_ref()).into_owned();
                let in_spell = path
                    .iter()
                    .any(|p| p == "employment" || p == "education");
                match name.as_str() {
                    "orcid" => person.orcid = text.clone(),
                    "given-names" => person.given = text.clone(),
                    "family-name" => person.family = text.clone(),
                    "organization" if in_spell => spell.organization = text.clone(),
                    "ror" if in_spell => spell.ror = non_empty(&text),
                    "start-date" if in_spell => spell.start_date = non_empty(&text),
                    "end-date" if in_spell => spell.end_date = non_empty(&text),
                    "employment" => {
                        person.employments.push(std::mem::take(&mut spell));
                    }
                    "education" => {
                        person.educations.push(std::mem::take(&mut spell));
                    }
                    "doi" if path.iter().any(|p| p == "works") => {
                        if !text.is_empty() {
                            person.works.push(text.clone());
                        }
                    }
                    _ => {}
                }
                path.pop();
                text.clear();
            }
            Ok(Event::Eof) => break,
            Ok(_) => {}
            Err(_) => return None,
        }
    }

    person.orcid = normalize_orcid(&person.orcid)?;
    Some(person)
}

fn non_empty(s: &str) -> Option<String> {
    (!s.is_empty()).then(|| s.to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_person() {
        let xml = r#"<?xml version="1.0"?>
            <person>
              <orcid>0000-0002-1825-0097</orcid>
              <given-names>Josiah</given-names>
              <family-name>Carberry</family-name>
              <employments>
                <employment>
                  <organization>Brown University</organization>
                  <ror>https://ror.org/05gq02987</ror>
                  <start-date>2001-01</start-date>
                </employment>
              </employments>
              <educations>
                <education>
                  <organization>Wesleyan</organization>
                </education>
              </educations>
              <works><doi>10.1234/a</doi><doi>10.1234/b</doi></works>
            </person>"#;
        let p = parse_person_xml(xml).unwrap();
        assert_eq!(p.orcid, "0000-0002-1825-0097");
        assert_eq!(p.family, "Carberry");
        assert_eq!(p.employments.len(), 1);
        assert_eq!(
            p.employments[0].ror.as_deref(),
            Some("https://ror.org/05gq02987")
        );
        assert_eq!(p.employments[0].end_date, None);
        assert_eq!(p.educations[0].organization, "Wesleyan");
        assert_eq!(p.works, vec!["10.1234/a", "10.1234/b"]);
    }

    #[test]
    fn invalid_orcid_rejects_entry() {
        let xml = "<person><orcid>junk</orcid></person>";
        assert!(parse_person_xml(xml).is_none());
    }

    #[test]
    fn broken_xml_rejects_entry() {
        assert!(parse_person_xml("<person><orcid>").is_none());
    }
}
