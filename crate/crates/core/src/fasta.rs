//! FASTA-like text records: a `>key=<number>` header line and one sequence line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const POOL_KEY: &str = "idx";
pub const READ_KEY: &str = "read";

pub fn format_records<'a>(
    key: &str,
    records: impl IntoIterator<Item = (usize, &'a [u8])>,
) -> String {
    let mut out = String::new();
    for (i, seq) in records {
        let _ = writeln!(out, ">{key}={i}");
        out.push_str(std::str::from_utf8(seq).expect("sequences are ASCII"));
        out.push('\n');
    }
    out
}

pub fn parse_records(text: &str, key: &str) -> Result<Vec<(usize, Vec<u8>)>> {
    let prefix = format!(">{key}=");
    let mut out = Vec::new();
    let mut lines = text.lines().enumerate().peekable();
    while let Some((ln, header)) = lines.next() {
        if header.trim().is_empty() {
            continue;
        }
        let id = header
            .trim()
            .strip_prefix(&prefix)
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| {
                Error::Parse(format!(
                    "line {}: expected '{prefix}<n>', got {header:?}",
                    ln + 1
                ))
            })?;
        let seq = match lines.peek() {
            Some((_, l)) if !l.starts_with('>') => {
                lines.next().unwrap().1.trim().as_bytes().to_vec()
            }
            _ => Vec::new(),
        };
        if let Some(&b) = seq.iter().find(|b| !matches!(b, b'A' | b'C' | b'G' | b'T')) {
            return Err(Error::Parse(format!(
                "record {id}: invalid base {:?}",
                b as char
            )));
        }
        out.push((id, seq));
    }
    Ok(out)
}

pub fn write_file<'a>(
    path: &Path,
    key: &str,
    records: impl IntoIterator<Item = (usize, &'a [u8])>,
) -> Result<()> {
    fs::write(path, format_records(key, records)).map_err(|e| Error::io(path, e))
}

pub fn read_file(path: &Path, key: &str) -> Result<Vec<(usize, Vec<u8>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_records(&text, key)
}
