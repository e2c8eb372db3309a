//! Atomic file output and number formatting for the data files.

use std::fs;
use std::io;
use std::path::Path;

/// Format a float with 17 significant digits, enough for an exact f64
/// round trip through the CSV files.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// Write a file atomically: write to a sibling temp file, then rename.
pub fn atomic_write(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp_path = Path::new(&tmp);
    fs::write(tmp_path, contents)?;
    fs::rename(tmp_path, path)
}
