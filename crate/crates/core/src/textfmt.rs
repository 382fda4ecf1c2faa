//! Line-oriented `key = value` files with optional `[section]` headers and
//! `#` comments.

use crate::error::{Error, Result};
use crate::units::parse_si_at;

#[derive(Debug, Clone, PartialEq)]
pub struct KvEntry {
    pub section: String,
    pub key: String,
    pub value: String,
    pub line: usize,
}

impl KvEntry {
    pub fn number(&self) -> Result<f64> {
        parse_si_at(&self.value, self.line)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvFile {
    pub entries: Vec<KvEntry>,
}

impl KvFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut section = String::new();
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = strip_comment(raw).trim();
            if s.is_empty() {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::parse(line, "unterminated section header"))?;
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::parse(line, format!("expected `key = value`, got `{s}`")))?;
            let key = k.trim();
            if key.is_empty() {
                return Err(Error::parse(line, "empty key"));
            }
            entries.push(KvEntry {
                section: section.clone(),
                key: key.to_string(),
                value: v.trim().to_string(),
                line,
            });
        }
        Ok(KvFile { entries })
    }

    pub fn section<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a KvEntry> + 'a {
        self.entries.iter().filter(move |e| e.section == name)
    }

    pub fn sections(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.section.as_str()) {
                out.push(&e.section);
            }
        }
        out
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&KvEntry> {
        self.entries
            .iter()
            .find(|e| e.section == section && e.key == key)
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let f = KvFile::parse("a = 1u # trailing\n\n[design]\nM2 = 300\n[metrics nominal]\nf0=5.6G\n").unwrap();
        assert_eq!(f.entries.len(), 3);
        assert_eq!(f.get("", "a").unwrap().number().unwrap(), 1e-6);
        assert_eq!(f.get("design", "M2").unwrap().number().unwrap(), 300.0);
        assert_eq!(f.get("metrics nominal", "f0").unwrap().number().unwrap(), 5.6e9);
        assert_eq!(f.sections(), vec!["", "design", "metrics nominal"]);
    }

    #[test]
    fn reports_line_numbers() {
        match KvFile::parse("a = 1\nbroken line\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(KvFile::parse("[open\n").is_err());
    }
}
