//! CSV and summary files, written atomically.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

/// Where a run came from: enough to reproduce every file it writes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    /// Subcommand.
    pub command: String,
    /// Config file path as given.
    pub config_path: String,
    /// Config text with whitespace collapsed.
    pub config: String,
    /// Command-line overrides, e.g. `seed=7 paths=1000`.
    pub overrides: String,
    /// Root seed after overrides.
    pub seed: u64,
}

impl Provenance {
    /// Comment lines shared by every file of a run.
    pub fn header(&self) -> Vec<String> {
        vec![
            format!("dynkin-lab {} {}", env!("CARGO_PKG_VERSION"), self.command),
            format!("seed={}", self.seed),
            format!("config_path={}", self.config_path),
            format!("config={}", self.config),
            format!("overrides={}", if self.overrides.is_empty() { "none" } else { &self.overrides }),
        ]
    }
}

/// A table destined for a CSV file with `# `-prefixed header comments.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    comments: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    /// Empty table with the run header and the given columns.
    pub fn new(provenance: &Provenance, columns: &[&str]) -> Self {
        Self {
            comments: provenance.header(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Adds a comment line below the run header.
    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    /// Appends a row; the cell count must match the columns.
    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        let row: Vec<String> = cells.into_iter().map(|c| c.to_string()).collect();
        assert_eq!(row.len(), self.columns.len(), "row width differs from header");
        self.rows.push(row);
    }

    /// Rows added so far.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// True when no rows were added.
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Serialized file contents.
    pub fn to_bytes(&self) -> io::Result<Vec<u8>> {
        let mut buf = Vec::new();
        for c in &self.comments {
            for line in c.lines() {
                writeln!(buf, "# {line}")?;
            }
        }
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }

    /// Writes the table to `dir/name` atomically.
    pub fn write(&self, dir: &Path, name: &str) -> io::Result<PathBuf> {
        write_atomic(&dir.join(name), &self.to_bytes()?)
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<PathBuf> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(path.to_path_buf())
}

/// Shortest round-trip formatting of a float.
pub fn num(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance {
            command: "synth".into(),
            config_path: "c.json".into(),
            config: "{\"seed\":1}".into(),
            overrides: String::new(),
            seed: 1,
        }
    }

    #[test]
    fn header_then_csv() {
        let mut t = Table::new(&prov(), &["x", "value"]);
        t.comment("grid: dx=0.5");
        t.row([num(0.0), num(0.1)]);
        t.row([num(0.5), num(-2.5e-7)]);
        let s = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# dynkin-lab"));
        assert!(lines.contains(&"# seed=1"));
        assert!(lines.contains(&"# grid: dx=0.5"));
        assert!(lines.contains(&"x,value"));
        assert_eq!(lines.last().unwrap(), &"0.5,-0.00000025");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
