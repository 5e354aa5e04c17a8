//! Deterministic file output: 17-significant-digit floats, RFC-4180 style
//! rows with `.` decimal separator, one `#` header comment per file.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::{CliError, RunConfig};

/// 17 significant digits, locale-independent.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct OutFile {
    path: PathBuf,
    writer: BufWriter<File>,
}

impl OutFile {
    pub fn create(cfg: &RunConfig, name: &str) -> Result<OutFile, CliError> {
        let dir = Path::new(&cfg.output_dir);
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", cfg.output_dir)))?;
        let path = dir.join(name);
        let file = File::create(&path)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "{}", cfg.header_line())
            .map_err(|e| CliError::Io(e.to_string()))?;
        Ok(OutFile { path, writer })
    }

    pub fn line(&mut self, text: &str) -> Result<(), CliError> {
        writeln!(self.writer, "{text}").map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.writer
            .flush()
            .map_err(|e| CliError::Io(e.to_string()))?;
        Ok(self.path)
    }
}

/// Serialize a JSON value under the standard header comment is not possible
/// inside JSON itself, so summaries embed the header fields instead.
pub fn write_json<T: serde::Serialize>(
    cfg: &RunConfig,
    name: &str,
    value: &T,
) -> Result<PathBuf, CliError> {
    let dir = Path::new(&cfg.output_dir);
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", cfg.output_dir)))?;
    let path = dir.join(name);
    let wrapped = serde_json::json!({
        "command": cfg.command,
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "data": value,
    });
    let text = serde_json::to_string_pretty(&wrapped)
        .map_err(|e| CliError::Io(format!("serialization: {e}")))?;
    std::fs::write(&path, text + "\n")
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_17_significant_digits() {
        let s = fmt_f64(std::f64::consts::LN_2);
        assert_eq!(s, "6.9314718055994531e-1");
        let back: f64 = s.parse().unwrap();
        assert_eq!(back, std::f64::consts::LN_2);
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
    }
}
