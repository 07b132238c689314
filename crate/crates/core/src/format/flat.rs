use std::fmt;

use thiserror::Error;

/// An ad-hoc `<e1, r, e2>` triple as found in conventional KGs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlatTriple {
    pub e1: String,
    pub r: String,
    pub e2: String,
}

impl FlatTriple {
    pub fn new(e1: impl Into<String>, r: impl Into<String>, e2: impl Into<String>) -> Self {
        FlatTriple { e1: e1.into(), r: r.into(), e2: e2.into() }
    }
}

impl fmt::Display for FlatTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}, {}>", self.e1, self.r, self.e2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlatError {
    #[error("line {0}: expected three non-empty tab-separated fields")]
    MalformedLine(usize),
}

/// One triple per line, `e1 TAB r TAB e2`; blank and `#` lines are skipped.
pub fn parse_flat(text: &str) -> Result<Vec<FlatTriple>, FlatError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match fields.as_slice() {
            [e1, r, e2] if !e1.is_empty() && !r.is_empty() && !e2.is_empty() => {
                out.push(FlatTriple::new(*e1, *r, *e2));
            }
            _ => return Err(FlatError::MalformedLine(i + 1)),
        }
    }
    Ok(out)
}

pub fn serialize_flat(triples: &[FlatTriple]) -> String {
    triples.iter().map(|t| format!("{}\t{}\t{}\n", t.e1, t.r, t.e2)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn born_on_triple() {
        let ts = parse_flat("RogerWaters\tBornOn\t01/08/1955\n").unwrap();
        assert_eq!(ts, vec![FlatTriple::new("RogerWaters", "BornOn", "01/08/1955")]);
    }

    #[test]
    fn empty_input() {
        assert!(parse_flat("").unwrap().is_empty());
        assert!(parse_flat("# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn two_fields_is_malformed() {
        assert_eq!(parse_flat("a\tb"), Err(FlatError::MalformedLine(1)));
        assert_eq!(parse_flat("a\tb\tc\n\na\t\tc"), Err(FlatError::MalformedLine(3)));
        assert_eq!(parse_flat("a\tb\tc\td"), Err(FlatError::MalformedLine(1)));
    }

    #[test]
    fn labels_keep_spaces_and_order() {
        let ts = parse_flat("Pink Floyd\tFormed In\tLondon\r\nRogerWaters\tBornIn\tGreat Bookham\n").unwrap();
        assert_eq!(ts[0].e1, "Pink Floyd");
        assert_eq!(ts[1].e2, "Great Bookham");
        assert_eq!(parse_flat(&serialize_flat(&ts)).unwrap(), ts);
    }
}
