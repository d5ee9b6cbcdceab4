use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{CliError, RunConfig};

/// Full precision scientific notation (17 significant digits).
pub(crate) fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    config: &'a RunConfig,
    seed: u64,
    #[serde(flatten)]
    body: &'a T,
}

pub(crate) fn write_json<T: Serialize>(dir: &Path, name: &str, cfg: &RunConfig, body: &T) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(file);
    let doc = Document {
        config: cfg,
        seed: cfg.seed,
        body,
    };
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| io_err(&path)(e.into()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(io_err(&path))?;
    Ok(path)
}

/// Writes `# config:` and `# seed:` comment lines followed by RFC 4180 rows.
pub(crate) fn write_csv<I>(
    dir: &Path,
    name: &str,
    cfg: &RunConfig,
    header: &[String],
    rows: I,
) -> Result<PathBuf, CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let path = dir.join(name);
    let file = File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(file);
    let config = serde_json::to_string(cfg).map_err(|e| io_err(&path)(e.into()))?;
    writeln!(w, "# config: {config}")
        .and_then(|_| writeln!(w, "# seed: {}", cfg.seed))
        .map_err(io_err(&path))?;
    let mut csv = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| io_err(&path)(e.into());
    csv.write_record(header).map_err(csv_err)?;
    for row in rows {
        csv.write_record(&row).map_err(csv_err)?;
    }
    csv.flush().map_err(io_err(&path))?;
    Ok(path)
}
