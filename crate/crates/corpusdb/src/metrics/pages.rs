//! Page-range parsing for page counts and citability checks.

/// Outcome of parsing a raw page field. Rejection is a classified
/// outcome, not an error: unusable formats are common in real data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PageCount {
    Pages(u32),
    Rejected(PageReject),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PageReject {
    /// Empty, no dash, several dashes, or non-numeric endpoints.
    Malformed,
    /// Ending page before the starting page.
    NonPositiveSpan,
    /// Span above 1000 pages; such spans come from data-entry mistakes
    /// like repeated page digits.
    TooManyPages,
}

/// Parse "A-B" into B - A + 1. Requires exactly one dash split with
/// integer endpoints, a positive span, and at most 1000 pages.
pub fn page_count(pages: &str) -> PageCount {
    let trimmed = pages.trim();
    if trimmed.matches('-').count() != 1 {
        return PageCount::Rejected(PageReject::Malformed);
    }
    let (a, b) = trimmed.split_once('-').expect("counted one dash");
    let (a, b) = (a.trim(), b.trim());
    let parse = |s: &str| -> Option<u64> {
        if s.is_empty() || !s.bytes().all(|c| c.is_ascii_digit()) {
            return None;
        }
        s.parse().ok()
    };
    match (parse(a), parse(b)) {
        (Some(start), Some(end)) => {
            if end < start {
                PageCount::Rejected(PageReject::NonPositiveSpan)
            } else if end - start + 1 > 1000 {
                PageCount::Rejected(PageReject::TooManyPages)
            } else {
                PageCount::Pages((end - start + 1) as u32)
            }
        }
        _ => PageCount::Rejected(PageReject::Malformed),
    }
}

/// Citable-item heuristic: longer than two pages, or no usable page
/// range at all (absent and unusable ranges cannot prove a work short).
pub fn is_citable(pages: &str) -> bool {
    match page_count(pages) {
        PageCount::Pages(n) => n > 2,
        PageCount::Rejected(_) => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_span() {
        assert_eq!(page_count("100-110"), PageCount::Pages(11));
        assert_eq!(page_count("5-5"), PageCount::Pages(1));
    }

    #[test]
    fn repeated_digit_mistake_rejected() {
        assert_eq!(
            page_count("234-2366"),
            PageCount::Rejected(PageReject::TooManyPages)
        );
    }

    #[test]
    fn multi_dash_formats_rejected() {
        assert_eq!(
            page_count("1744-8069-5-32"),
            PageCount::Rejected(PageReject::Malformed)
        );
    }

    #[test]
    fn reversed_span_rejected() {
        assert_eq!(
            page_count("110-100"),
            PageCount::Rejected(PageReject::NonPositiveSpan)
        );
    }

    #[test]
    fn single_number_and_empty_rejected() {
        assert_eq!(page_count("42"), PageCount::Rejected(PageReject::Malformed));
        assert_eq!(page_count(""), PageCount::Rejected(PageReject::Malformed));
        assert_eq!(
            page_count("e100-e110"),
            PageCount::Rejected(PageReject::Malformed)
        );
    }

    #[test]
    fn citability() {
        assert!(!is_citable("1-2"));
        assert!(is_citable("1-4"));
        assert!(is_citable(""));
        assert!(is_citable("1744-8069-5-32"));
        assert!(!is_citable("7-7"));
    }
}
