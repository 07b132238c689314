//! Text formats: GKG v1 documents, flat triples and reification rules.

mod flat;
mod gkg;
mod rules;

pub use flat::{parse_flat, serialize_flat, FlatError, FlatTriple};
pub use gkg::{parse_gkg, parse_gkg_unchecked, serialize_gkg, GkgDocument, GkgError};
pub use rules::{parse_rules, RuleError, RuleSet};

/// Splits the first `n` whitespace-separated fields off `line`. The
/// remainder (trimmed) is returned as the greedy last field.
pub(crate) fn split_fields(line: &str, n: usize) -> (Vec<&str>, Option<&str>) {
    let mut fields = Vec::with_capacity(n);
    let mut rest = line.trim_start();
    while fields.len() < n && !rest.is_empty() {
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        fields.push(&rest[..end]);
        rest = rest[end..].trim_start();
    }
    let rest = rest.trim_end();
    (fields, (!rest.is_empty()).then_some(rest))
}

/// Iterates over meaningful lines as `(1-based line number, content)`,
/// skipping blanks and `#` comments.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_fields_greedy_rest() {
        let (f, rest) = split_fields("N ex:v2 V ont:Village Great  Bookham ", 4);
        assert_eq!(f, ["N", "ex:v2", "V", "ont:Village"]);
        assert_eq!(rest, Some("Great  Bookham"));
        let (f, rest) = split_fields("T a", 3);
        assert_eq!(f, ["T", "a"]);
        assert_eq!(rest, None);
    }

    #[test]
    fn comment_lines_skipped() {
        let lines: Vec<_> = content_lines("# c\n\n  \nT a -\r\n  # x\n").collect();
        assert_eq!(lines, [(4, "T a -")]);
    }
}
