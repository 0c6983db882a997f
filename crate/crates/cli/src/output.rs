//! Deterministic CSV emission with `#`-prefixed provenance headers.
//!
//! Output bytes depend only on the resolved config, the semantic command
//! parameters and the tool version. The thread count and output paths are
//! execution details and never appear in a file, so reruns with different
//! `--threads` are byte-identical.

use crate::config::RunConfig;
use crate::CliError;
use std::io::Write;
use std::path::Path;

/// Shortest f64 representation that parses back to the same bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Optional cell: empty when absent.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub struct CsvFile {
    buf: String,
}

impl CsvFile {
    /// Start a CSV with the standard provenance block. `command` is the
    /// normalized semantic command line (no --threads, no paths).
    pub fn new(tool: &str, command: &str, cfg: &RunConfig, extra: &[(&str, String)]) -> CsvFile {
        let mut buf = String::new();
        buf.push_str(&format!(
            "# annulus-dyn {} v{}\n",
            tool,
            env!("CARGO_PKG_VERSION")
        ));
        buf.push_str(&format!("# command: {command}\n"));
        buf.push_str(&format!("# body: {}\n", cfg.body_json()));
        buf.push_str(&format!("# tolerances: {}\n", cfg.tolerances_json()));
        for (k, v) in extra {
            buf.push_str(&format!("# {k}: {v}\n"));
        }
        CsvFile { buf }
    }

    pub fn columns(&mut self, cols: &[&str]) {
        self.buf.push_str(&cols.join(","));
        self.buf.push('\n');
    }

    pub fn row(&mut self, cells: &[String]) {
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn comment(&mut self, line: &str) {
        self.buf.push_str(&format!("# {line}\n"));
    }

    pub fn write_to(&self, path: &Path) -> Result<(), CliError> {
        let mut f = std::fs::File::create(path).map_err(CliError::Io)?;
        f.write_all(self.buf.as_bytes()).map_err(CliError::Io)?;
        Ok(())
    }
}

/// Order-deterministic parallel map: index space is split into contiguous
/// chunks, one worker per chunk, results reassembled by index. The output is
/// identical for every thread count.
pub fn par_map_indexed<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.max(1).min(n.max(1));
    if threads <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(threads);
    let mut out: Vec<Option<T>> = Vec::with_capacity(n);
    out.resize_with(n, || None);
    let slots: Vec<&mut [Option<T>]> = out.chunks_mut(chunk).collect();
    std::thread::scope(|scope| {
        for (ci, slot) in slots.into_iter().enumerate() {
            let f = &f;
            scope.spawn(move || {
                let base = ci * chunk;
                for (j, cell) in slot.iter_mut().enumerate() {
                    *cell = Some(f(base + j));
                }
            });
        }
    });
    out.into_iter().map(|c| c.expect("filled")).collect()
}
