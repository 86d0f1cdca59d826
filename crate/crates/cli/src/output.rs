//! CSV artifacts with a `#` provenance block, written to `.partial` files and
//! renamed into place only when the whole pipeline succeeds.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use muoam::experiment::Record;

/// Column names of the long-form metric tables.
pub const RECORD_HEADER: [&str; 9] = ["snr_db", "param", "param_value", "user", "mode", "metric", "value", "trials", "seed"];
/// Column names of matrix dumps.
pub const MATRIX_HEADER: [&str; 5] = ["w", "row", "col", "re", "im"];

/// Files staged for one run.
pub struct Staging {
    dir: PathBuf,
    provenance: Vec<String>,
    staged: Vec<(PathBuf, PathBuf)>,
}

impl Staging {
    pub fn new(dir: &Path, provenance: Vec<String>) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), provenance, staged: Vec::new() })
    }

    /// Open `<name>` for writing; the provenance block is already written.
    pub fn create(&mut self, name: &str, columns: &[&str]) -> Result<csv::Writer<BufWriter<File>>> {
        let target = self.dir.join(name);
        let partial = self.dir.join(format!("{name}.partial"));
        let file = File::create(&partial).with_context(|| format!("creating {}", partial.display()))?;
        self.staged.push((partial, target));
        let mut buf = BufWriter::new(file);
        for line in &self.provenance {
            writeln!(buf, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(columns)?;
        Ok(w)
    }

    /// Move every staged file into place and return the final paths.
    pub fn commit(mut self) -> Result<Vec<PathBuf>> {
        let staged = std::mem::take(&mut self.staged);
        let mut done = Vec::new();
        for (partial, target) in staged {
            fs::rename(&partial, &target).with_context(|| format!("renaming {}", partial.display()))?;
            done.push(target);
        }
        Ok(done)
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        for (partial, _) in &self.staged {
            let _ = fs::remove_file(partial);
        }
    }
}

/// Shortest round-trip text; scientific outside [1e-4, 1e15).
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "all".to_string(), |x| x.to_string())
}

pub fn write_records(w: &mut csv::Writer<BufWriter<File>>, records: &[Record]) -> Result<()> {
    for r in records {
        w.write_record([
            num(r.snr_db),
            r.param.clone(),
            r.param_value.clone(),
            opt(r.user),
            opt(r.mode),
            r.metric.clone(),
            num(r.value),
            r.trials.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrices(w: &mut csv::Writer<BufWriter<File>>, matrices: &[muoam::CMat]) -> Result<()> {
    for (k, m) in matrices.iter().enumerate() {
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                w.write_record([k.to_string(), r.to_string(), c.to_string(), num(v.re), num(v.im)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
