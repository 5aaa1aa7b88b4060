//! CSV tables, PGM intensity maps and the plain-text report.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// A named table of floating-point columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Grey-level image, row-major, `width` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::from(e).context(format!("creating {}", dir.display())))?;
    }
    Ok(())
}

/// Header row then one record per row, `\n` terminated, values in `{:.16e}`.
pub fn csv_string(table: &Table) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

pub fn write_csv(path: &Path, table: &Table) -> Result<()> {
    ensure_parent(path)?;
    let text = csv_string(table)?;
    fs::write(path, text).map_err(|e| Error::from(e).context(format!("writing {}", path.display())))
}

/// Plain PGM (P2), maxval 65535, linearly scaled from the pixel range.
pub fn pgm_string(image: &Image) -> String {
    let (lo, hi) = range(&image.pixels);
    let span = hi - lo;
    let mut out = format!("P2\n{} {}\n65535\n", image.width, image.height);
    for row in image.pixels.chunks(image.width.max(1)) {
        let line: Vec<String> = row
            .iter()
            .map(|&v| {
                let level = if span > 0.0 { ((v - lo) / span * 65535.0).round() } else { 0.0 };
                format!("{}", level as u32)
            })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn range(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

/// Writes the PGM plus a `.range` sidecar holding the physical min and max.
pub fn write_pgm(path: &Path, image: &Image) -> Result<()> {
    ensure_parent(path)?;
    let io = |p: &Path, e: std::io::Error| Error::from(e).context(format!("writing {}", p.display()));
    fs::write(path, pgm_string(image)).map_err(|e| io(path, e))?;
    let (lo, hi) = range(&image.pixels);
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".range");
    let sidecar = PathBuf::from(sidecar);
    let mut f = fs::File::create(&sidecar).map_err(|e| io(&sidecar, e))?;
    writeln!(f, "min {lo:.16e}\nmax {hi:.16e}").map_err(|e| io(&sidecar, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| Error::from(e).context(format!("writing {}", path.display())))
}
