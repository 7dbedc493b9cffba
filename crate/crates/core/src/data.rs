//! Frequency-count files and the embedded tomato EST data set.

use std::path::Path;

use crate::error::{Error, Result};
use crate::models::FrequencyCounts;

/// Tomato flower EST library: (l, m_l) pairs, n = 2586 reads from j = 1825 genes.
pub const TOMATO: [(usize, u64); 17] = [
    (1, 1434),
    (2, 253),
    (3, 71),
    (4, 33),
    (5, 11),
    (6, 6),
    (7, 2),
    (8, 3),
    (9, 1),
    (10, 2),
    (11, 2),
    (12, 1),
    (13, 1),
    (14, 1),
    (16, 2),
    (23, 1),
    (27, 1),
];

pub const TOMATO_N: u64 = 2586;
pub const TOMATO_J: u64 = 1825;

/// The tomato counts. Panics if the embedded table is inconsistent.
pub fn tomato() -> FrequencyCounts {
    let c = FrequencyCounts::from_pairs(TOMATO).expect("embedded table is valid");
    assert_eq!(c.n(), TOMATO_N, "embedded tomato data: wrong n");
    assert_eq!(c.j(), TOMATO_J, "embedded tomato data: wrong j");
    c
}

/// Parses "l<TAB>m_l" lines (any whitespace separates the fields). Blank lines
/// and text after '#' are ignored; lines may come in any order.
pub fn parse_frequency_file(text: &str) -> Result<FrequencyCounts> {
    let mut counts = FrequencyCounts::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected two fields 'l<TAB>m_l', found {}", fields.len()),
            });
        }
        let parse = |s: &str, what: &str| -> Result<u64> {
            match s.parse::<u64>() {
                Ok(v) if v > 0 => Ok(v),
                _ => Err(Error::Parse {
                    line: line_no,
                    msg: format!("{} must be a positive integer, got '{}'", what, s),
                }),
            }
        };
        let l = parse(fields[0], "frequency l")? as usize;
        let m = parse(fields[1], "count m_l")?;
        if counts.get(l) > 0 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("duplicate entry for l = {}", l),
            });
        }
        counts.insert(l, m).map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
    }
    if counts.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no frequency counts found".into(),
        });
    }
    Ok(counts)
}

pub fn read_frequency_file(path: impl AsRef<Path>) -> Result<FrequencyCounts> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("cannot read {}: {}", path.display(), e),
    })?;
    parse_frequency_file(&text)
}

/// Canonical form: one "l\tm_l" line per frequency, increasing in l.
pub fn write_frequency_file(counts: &FrequencyCounts) -> String {
    counts.iter().map(|(l, m)| format!("{}\t{}\n", l, m)).collect()
}
