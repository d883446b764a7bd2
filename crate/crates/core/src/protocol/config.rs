//! Server configuration: `key = value` lines, `#` comments.
//!
//! Required keys are `port`, `q`, `K`, `L` and `database`; `host` defaults
//! to `127.0.0.1`. A relative database path is resolved against the
//! directory holding the config file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::Database;
use crate::protocol::dbfile::load_database;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ServerConfig {
    pub host: String,
    pub port: u16,
    pub modulus: u64,
    pub messages: usize,
    pub subpackets: usize,
    pub database: PathBuf,
}

impl ServerConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
            let key = key.trim();
            if !matches!(key, "host" | "port" | "q" | "K" | "L" | "database") {
                return Err(Error::Config(format!("line {}: unknown key {key:?}", lineno + 1)));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {key:?}", lineno + 1)));
            }
        }
        let get = |key: &str| entries.get(key).cloned().ok_or_else(|| Error::Config(format!("missing key {key:?}")));
        fn num<T: std::str::FromStr>(key: &str, v: String) -> Result<T> {
            v.parse().map_err(|_| Error::Config(format!("{key} = {v:?} is not a valid number")))
        }
        let database = PathBuf::from(get("database")?);
        Ok(Self {
            host: entries.get("host").cloned().unwrap_or_else(|| "127.0.0.1".into()),
            port: num("port", get("port")?)?,
            modulus: num("q", get("q")?)?,
            messages: num("K", get("K")?)?,
            subpackets: num("L", get("L")?)?,
            database: if database.is_relative() { base_dir.join(database) } else { database },
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn bind_address(&self) -> String {
        format!("{}:{}", self.host, self.port)
    }

    /// Loads the database and checks it against the declared K, L and q.
    pub fn load_database(&self) -> Result<Database> {
        let db = load_database(&self.database)?;
        let found = (db.message_count(), db.subpackets(), db.field().modulus());
        let declared = (self.messages, self.subpackets, self.modulus);
        if found != declared {
            return Err(Error::Config(format!(
                "database {} has (K, L, q) = {found:?}, config declares {declared:?}",
                self.database.display()
            )));
        }
        Ok(db)
    }
}
