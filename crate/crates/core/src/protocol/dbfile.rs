//! Flat database file:
//!
//! ```text
//! LPIRSI1
//! K
//! L
//! q
//! X_1[1] ... X_1[L]
//! ...
//! X_K[1] ... X_K[L]
//! ```
//!
//! Symbols are decimal and whitespace separated; the row layout is a
//! convention, not a requirement.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::model::{Database, Message};

pub const MAGIC: &str = "LPIRSI1";

pub fn parse_database(text: &str) -> Result<Database> {
    let rest = text
        .strip_prefix(MAGIC)
        .and_then(|r| r.strip_prefix('\n').or_else(|| r.strip_prefix("\r\n")))
        .ok_or_else(|| Error::DatabaseFormat(format!("missing {MAGIC:?} header line")))?;
    let mut tokens = rest.split_whitespace();
    let mut header = |name: &str| -> Result<u64> {
        let tok = tokens.next().ok_or_else(|| Error::DatabaseFormat(format!("missing {name}")))?;
        tok.parse().map_err(|_| Error::DatabaseFormat(format!("{name} is not a decimal integer: {tok:?}")))
    };
    let k = header("K")? as usize;
    let l = header("L")? as usize;
    let q = header("q")?;
    let field = PrimeField::new(q).map_err(|e| Error::DatabaseFormat(e.to_string()))?;
    let symbols: Vec<u64> = tokens
        .map(|tok| tok.parse().map_err(|_| Error::DatabaseFormat(format!("symbol is not a decimal integer: {tok:?}"))))
        .collect::<Result<_>>()?;
    if symbols.len() != k * l {
        return Err(Error::DatabaseFormat(format!("expected K*L = {} symbols, found {}", k * l, symbols.len())));
    }
    let messages = if l == 0 {
        vec![Message::new(Vec::new()); k]
    } else {
        symbols.chunks(l).map(|row| Message::new(row.to_vec())).collect()
    };
    Database::new(messages, field).map_err(|e| Error::DatabaseFormat(e.to_string()))
}

pub fn format_database(db: &Database) -> String {
    let mut out = format!("{MAGIC}\n{}\n{}\n{}\n", db.message_count(), db.subpackets(), db.field().modulus());
    for m in db.messages() {
        let row: Vec<String> = m.subpackets().iter().map(u64::to_string).collect();
        writeln!(out, "{}", row.join(" ")).expect("writing to a String");
    }
    out
}

pub fn load_database(path: &Path) -> Result<Database> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::DatabaseFormat(format!("cannot read {}: {e}", path.display())))?;
    parse_database(&text)
}

pub fn save_database(db: &Database, path: &Path) -> Result<()> {
    fs::write(path, format_database(db))?;
    Ok(())
}
