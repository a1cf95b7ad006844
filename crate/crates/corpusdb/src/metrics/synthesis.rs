//! Title classification for research-synthesis study types.

/// Study category recognized from a title. Precedence runs from the most
/// specific systematic form down to generic secondary studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TitleCategory {
    /// Systematic review / systematic literature review / systematic
    /// mapping study.
    Slr,
    /// Meta-analysis.
    Ma,
    /// Tertiary study or umbrella review.
    TerUr,
    /// Mapping review.
    Mr,
    /// Bibliometric study.
    Bm,
    /// Scientometric study.
    Sm,
    /// Unspecified secondary study.
    Sec,
    None,
}

impl TitleCategory {
    pub fn label(&self) -> &'static str {
        match self {
            TitleCategory::Slr => "SLR",
            TitleCategory::Ma => "MA",
            TitleCategory::TerUr => "TER/UR",
            TitleCategory::Mr => "MR",
            TitleCategory::Bm => "BM",
            TitleCategory::Sm => "SM",
            TitleCategory::Sec => "SEC",
            TitleCategory::None => "NONE",
        }
    }
}

/// Phrase lists checked in precedence order; the first category with a
/// matching phrase wins.
const RULES: &[(TitleCategory, &[&str])] = &[
    (
        TitleCategory::Slr,
        &[
            "systematic review",
            "systematic literature review",
            "systematic mapping study",
        ],
    ),
    (TitleCategory::Ma, &["meta-analysis"]),
    (TitleCategory::TerUr, &["tertiary study", "umbrella review"]),
    (TitleCategory::Mr, &["mapping review"]),
    (TitleCategory::Bm, &["bibliometric"]),
    (TitleCategory::Sm, &["scientometric"]),
    (
        TitleCategory::Sec,
        &["secondary study", "literature survey", "literature review"],
    ),
];

/// Case-insensitive phrase classification of a title.
pub fn classify_title(title: &str) -> TitleCategory {
    let lower = title.to_lowercase();
    for (category, phrases) in RULES {
        if phrases.iter().any(|p| lower.contains(p)) {
            return *category;
        }
    }
    TitleCategory::None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_phrases() {
        assert_eq!(classify_title("A systematic review of X"), TitleCategory::Slr);
        assert_eq!(
            classify_title("Bibliometric analysis of Y"),
            TitleCategory::Bm
        );
        assert_eq!(classify_title("On the design of widgets"), TitleCategory::None);
    }

    #[test]
    fn dual_phrase_titles_take_precedence() {
        assert_eq!(
            classify_title("A systematic review and meta-analysis of Z"),
            TitleCategory::Slr
        );
        assert_eq!(
            classify_title("Meta-analysis with a literature survey"),
            TitleCategory::Ma
        );
    }

    #[test]
    fn literature_review_is_secondary_unless_systematic() {
        assert_eq!(
            classify_title("A literature review of things"),
            TitleCategory::Sec
        );
        assert_eq!(
            classify_title("A systematic literature review of things"),
            TitleCategory::Slr
        );
    }

    #[test]
    fn case_insensitive() {
        assert_eq!(
            classify_title("AN UMBRELLA REVIEW OF REVIEWS"),
            TitleCategory::TerUr
        );
    }
}
