use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use giant_atom::phase::as_rational_pi;
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial artifact.
pub fn write_atomic<F>(path: &Path, fill: F) -> CliResult<PathBuf>
where
    F: FnOnce(&mut dyn Write) -> CliResult<()>,
{
    let dir = path.parent().unwrap_or(Path::new("."));
    let tmp = NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    let mut w = BufWriter::new(tmp);
    fill(&mut w)?;
    let tmp = w.into_inner().map_err(|e| io_err(path)(e.into_error()))?;
    tmp.persist(path).map_err(|e| io_err(path)(e.error))?;
    Ok(path.to_path_buf())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<PathBuf> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

/// Single-line JSON for bulky artifacts such as trajectories.
pub fn write_json_compact<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<PathBuf> {
    write_atomic(path, |w| {
        serde_json::to_writer(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

/// Prints lines to stdout, stopping quietly if the reader goes away.
pub fn print_lines<S: AsRef<str>>(lines: &[S]) {
    let mut out = std::io::stdout().lock();
    for l in lines {
        if writeln!(out, "{}", l.as_ref()).is_err() {
            return;
        }
    }
}

/// File-name fragment for a phase: `pi_2`, `m3pi_4`, `0`, or `1p250000`.
pub fn phase_slug(phi: f64) -> String {
    let text = match as_rational_pi(phi, 8, 1e-9) {
        Some((0, _)) => "0".to_string(),
        Some((p, q)) => {
            let num = match p.abs() {
                1 => "pi".to_string(),
                n => format!("{n}pi"),
            };
            let sign = if p < 0 { "m" } else { "" };
            if q == 1 {
                format!("{sign}{num}")
            } else {
                format!("{sign}{num}_{q}")
            }
        }
        None => format!("{phi:.6}").replace('-', "m").replace('.', "p"),
    };
    text
}

pub fn cell_stem(prefix: &str, d: Option<usize>, phi_c: Option<f64>) -> String {
    let mut s = prefix.to_string();
    if let Some(d) = d {
        s += &format!("_d{d}");
    }
    if let Some(p) = phi_c {
        s += &format!("_phic{}", phase_slug(p));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn slugs_are_path_safe() {
        assert_eq!(phase_slug(0.0), "0");
        assert_eq!(phase_slug(PI / 2.0), "pi_2");
        assert_eq!(phase_slug(-3.0 * PI / 4.0), "m3pi_4");
        assert_eq!(phase_slug(PI), "pi");
        assert_eq!(phase_slug(1.25), "1p250000");
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, |w| Ok(writeln!(w, "one")?)).unwrap();
        write_atomic(&p, |w| Ok(writeln!(w, "two")?)).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
