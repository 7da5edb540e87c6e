//! Output directory with a manifest listing every file written to it.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use serde::Serialize;

use vecgame_core::features::write_feature_csv;
use vecgame_core::report::{render_volume_table, RunManifest, SummaryTable, VolumeCell};
use vecgame_core::sim::RaceRecord;

use crate::{CliError, Result};

pub const MANIFEST: &str = "manifest.json";

/// The command line as given, or `command` when there are no arguments.
fn invocation(command: &str) -> String {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        command.to_string()
    } else {
        format!("vecgame {}", args.join(" "))
    }
}

pub struct Output {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Output {
    pub fn create<T: Serialize>(dir: PathBuf, command: &str, inputs: &T, seed: u64) -> Result<Self> {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir,
            manifest: RunManifest::new(&invocation(command), inputs, seed),
        })
    }

    pub fn write_with<E: Display>(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> std::result::Result<(), E>,
    ) -> Result<()> {
        let path = self.dir.join(name);
        let fail = |e: &dyn Display| CliError::Runtime(format!("{}: {e}", path.display()));
        let file = File::create(&path).map_err(|e| fail(&e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).map_err(|e| fail(&e))?;
        w.flush().map_err(|e| fail(&e))?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(|e| e.to_string())?;
            w.write_all(b"\n").map_err(|e| e.to_string())
        })
    }

    pub fn ndjson<T: Serialize>(&mut self, name: &str, values: &[T]) -> Result<()> {
        self.write_with(name, |w| {
            for v in values {
                serde_json::to_writer(&mut *w, v).map_err(|e| e.to_string())?;
                w.write_all(b"\n").map_err(|e| e.to_string())?;
            }
            Ok::<_, String>(())
        })
    }

    pub fn features(&mut self, name: &str, records: &[RaceRecord]) -> Result<()> {
        self.write_with(name, |w| write_feature_csv(records, w))
    }

    pub fn summary(&mut self, table: &SummaryTable) -> Result<()> {
        self.write_with("summary.txt", |w| w.write_all(table.render_text().as_bytes()))?;
        self.write_with("summary.csv", |w| table.write_csv(w))?;
        self.json("summary.json", table)
    }

    pub fn volume_table(&mut self, cells: &[VolumeCell]) -> Result<()> {
        self.write_with("volumes.txt", |w| {
            for c in cells {
                writeln!(w, "{}", c.line())?;
            }
            writeln!(w)?;
            w.write_all(render_volume_table(cells).as_bytes())
        })?;
        self.json("volumes.json", &cells)
    }

    pub fn finish(mut self) -> Result<()> {
        self.manifest.finish();
        let path = self.dir.join(MANIFEST);
        let bytes = serde_json::to_vec_pretty(&self.manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
        std::fs::write(&path, bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
    }
}
