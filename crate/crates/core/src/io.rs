//! Text formats: `index value` lines with 1-based indices, and instance
//! files made of a header line and named occurrence sections.

use crate::dist::{Distribution, OccurrenceVector};
use crate::error::{parse, Error, Result};
use std::fmt::Write as _;
use std::str::FromStr;

fn parse_pairs<T: FromStr>(lines: &[(usize, &str)]) -> Result<Vec<T>> {
    let mut values: Vec<Option<T>> = Vec::new();
    for &(no, line) in lines {
        let mut parts = line.split_whitespace();
        let (Some(idx), Some(val), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse(no, "expected `index value`"));
        };
        let idx: usize = idx.parse().map_err(|_| parse(no, format!("bad index {idx:?}")))?;
        if idx == 0 || idx > lines.len() {
            return Err(parse(no, format!("index {idx} outside 1..={}", lines.len())));
        }
        let val: T = val.parse().map_err(|_| parse(no, format!("bad value {val:?}")))?;
        if values.len() < idx {
            values.resize_with(idx, || None);
        }
        if values[idx - 1].replace(val).is_some() {
            return Err(parse(no, format!("index {idx} repeated")));
        }
    }
    values.into_iter().enumerate().map(|(i, v)| v.ok_or_else(|| parse(0, format!("index {} missing", i + 1)))).collect()
}

fn counts_to_vector(counts: Vec<u64>) -> Result<OccurrenceVector> {
    OccurrenceVector::try_from_counts(counts).map_err(|_| parse(0, "counts overflow a 64-bit total"))
}

fn content_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty()).collect()
}

pub fn write_distribution(p: &Distribution) -> String {
    let mut s = String::new();
    for (i, x) in p.probs().iter().enumerate() {
        writeln!(s, "{} {x}", i + 1).expect("writing to a String");
    }
    s
}

/// Every index in `1..=n` exactly once, in any order; blank lines ignored.
pub fn parse_distribution(text: &str) -> Result<Distribution> {
    let probs: Vec<f64> = parse_pairs(&content_lines(text))?;
    if probs.is_empty() {
        return Err(parse(0, "empty distribution"));
    }
    Distribution::new(probs).map_err(|e| match e {
        Error::InvalidArgument(msg) => parse(0, msg),
        other => other,
    })
}

pub fn write_occurrence_vector(x: &OccurrenceVector) -> String {
    let mut s = String::new();
    for (i, c) in x.counts().iter().enumerate() {
        writeln!(s, "{} {c}", i + 1).expect("writing to a String");
    }
    s
}

pub fn parse_occurrence_vector(text: &str) -> Result<OccurrenceVector> {
    counts_to_vector(parse_pairs(&content_lines(text))?)
}

/// `case=<label> n=<n> t=<t> seed=<seed>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceHeader {
    pub case: String,
    pub n: usize,
    pub t: usize,
    pub seed: u64,
}

impl InstanceHeader {
    pub fn line(&self) -> String {
        format!("case={} n={} t={} seed={}", self.case, self.n, self.t, self.seed)
    }

    pub fn parse(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [case, n, t, seed] = fields.as_slice() else {
            return Err(parse(1, "header needs exactly case, n, t and seed"));
        };
        fn field<'a>(s: &'a str, key: &str) -> Result<&'a str> {
            s.strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .ok_or_else(|| parse(1, format!("expected `{key}=` in header")))
        }
        fn number<T: FromStr>(s: &str, key: &str) -> Result<T> {
            field(s, key)?.parse().map_err(|_| parse(1, format!("bad {key} in header")))
        }
        let label = field(case, "case")?;
        if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(parse(1, "case label must be alphanumeric"));
        }
        Ok(Self { case: label.to_string(), n: number(n, "n")?, t: number(t, "t")?, seed: number(seed, "seed")? })
    }
}

/// A header followed by `# <name>` sections of `index value` lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceFile {
    pub header: InstanceHeader,
    pub sections: Vec<(String, OccurrenceVector)>,
}

impl InstanceFile {
    pub fn section(&self, name: &str) -> Option<&OccurrenceVector> {
        self.sections.iter().find(|(s, _)| s == name).map(|(_, v)| v)
    }
}

pub fn write_instance(file: &InstanceFile) -> String {
    let mut s = file.header.line();
    s.push('\n');
    for (name, occ) in &file.sections {
        writeln!(s, "# {name}").expect("writing to a String");
        s.push_str(&write_occurrence_vector(occ));
    }
    s
}

pub fn parse_instance(text: &str) -> Result<InstanceFile> {
    let lines = content_lines(text);
    let Some((&(no, first), rest)) = lines.split_first() else {
        return Err(parse(1, "empty instance file"));
    };
    let header = InstanceHeader::parse(first).map_err(|e| match e {
        Error::Parse { msg, .. } => parse(no, msg),
        other => other,
    })?;
    let mut sections: Vec<(String, Vec<(usize, &str)>)> = Vec::new();
    for &(no, line) in rest {
        if let Some(name) = line.strip_prefix('#') {
            let name = name.trim();
            if name.is_empty() || sections.iter().any(|(s, _)| s == name) {
                return Err(parse(no, "section names must be nonempty and distinct"));
            }
            sections.push((name.to_string(), Vec::new()));
        } else {
            match sections.last_mut() {
                Some((_, body)) => body.push((no, line)),
                None => return Err(parse(no, "data before the first section")),
            }
        }
    }
    let sections = sections
        .into_iter()
        .map(|(name, body)| Ok((name, counts_to_vector(parse_pairs(&body)?)?)))
        .collect::<Result<_>>()?;
    Ok(InstanceFile { header, sections })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distribution_round_trip() {
        let p = Distribution::new(vec![0.1, 0.2, 0.7]).unwrap();
        let text = write_distribution(&p);
        assert_eq!(text, "1 0.1\n2 0.2\n3 0.7\n");
        assert_eq!(parse_distribution(&text).unwrap(), p);
        assert_eq!(parse_distribution("2 0.5\n\n1 0.5\n").unwrap().probs(), &[0.5, 0.5]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_distribution("").is_err());
        assert!(parse_distribution("1 0.5\n1 0.5\n").is_err());
        assert!(parse_distribution("1 0.5\n3 0.5\n").is_err());
        assert!(parse_distribution("0 1\n").is_err());
        assert!(parse_distribution("1 0.4\n2 0.4\n").is_err());
        assert!(parse_occurrence_vector("1 -3\n").is_err());
        assert!(parse_occurrence_vector("1 3 4\n").is_err());
        assert!(parse_occurrence_vector("1 18446744073709551615\n2 1\n").is_err());
        let err = parse_occurrence_vector("1 3\n2 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn instance_round_trip() {
        let file = InstanceFile {
            header: InstanceHeader { case: "far".into(), n: 3, t: 40, seed: 7 },
            sections: vec![
                ("alice".into(), OccurrenceVector::from_counts(vec![1, 0, 4])),
                ("bob".into(), OccurrenceVector::from_counts(vec![0, 2, 2])),
            ],
        };
        let text = write_instance(&file);
        assert!(text.starts_with("case=far n=3 t=40 seed=7\n# alice\n1 1\n"));
        assert_eq!(parse_instance(&text).unwrap(), file);
        assert!(parse_instance("case=far n=3 t=40\n").is_err());
        assert!(parse_instance("case=far n=3 t=40 seed=1\n1 2\n").is_err());
    }

    proptest! {
        #[test]
        fn occurrence_round_trip(counts in prop::collection::vec(0u64..1 << 48, 0..40)) {
            let x = OccurrenceVector::from_counts(counts);
            prop_assert_eq!(parse_occurrence_vector(&write_occurrence_vector(&x)).unwrap(), x);
        }

        #[test]
        fn parsers_never_panic(text in "[0-9a-z=# .\\n-]{0,80}") {
            let _ = parse_distribution(&text);
            let _ = parse_occurrence_vector(&text);
            let _ = parse_instance(&text);
        }
    }
}
