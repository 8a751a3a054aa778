//! Output sinks, CSV footers and the run manifest.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// A file or standard output; file contents are hashed for the manifest.
pub enum Sink {
    Stdout(io::Stdout),
    File { path: PathBuf, w: BufWriter<File> },
}

impl Sink {
    pub fn open(target: &str) -> Result<Sink> {
        if target == "-" {
            return Ok(Sink::Stdout(io::stdout()));
        }
        let path = PathBuf::from(target);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(Sink::File { path, w: BufWriter::new(f) })
    }

    pub fn finish(self, manifest: &mut Manifest) -> Result<()> {
        match self {
            Sink::Stdout(mut s) => s.flush()?,
            Sink::File { path, mut w } => {
                w.flush()?;
                drop(w);
                manifest.add_output(&path)?;
            }
        }
        Ok(())
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            Sink::Stdout(s) => s.write(buf),
            Sink::File { w, .. } => w.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Sink::Stdout(s) => s.flush(),
            Sink::File { w, .. } => w.flush(),
        }
    }
}

/// `# {json}` trailer line after CSV rows.
pub fn write_footer<W: Write, T: Serialize>(w: &mut W, meta: &T) -> Result<()> {
    writeln!(w, "# {}", serde_json::to_string(meta)?)?;
    Ok(())
}

/// JSON objects from `# ` lines of a CSV file.
pub fn read_footers(text: &str) -> Vec<serde_json::Value> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter_map(|l| serde_json::from_str(l).ok())
        .collect()
}

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: Vec<String>,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_time_s: f64,
    pub threads: usize,
    pub outputs: Vec<OutputDigest>,
    #[serde(skip)]
    started: Option<Instant>,
}

impl Manifest {
    pub fn start(seed: Option<u64>) -> Manifest {
        Manifest {
            command: std::env::args().collect(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: 0.0,
            threads: rayon::current_num_threads(),
            outputs: Vec::new(),
            started: Some(Instant::now()),
        }
    }

    pub fn add_output(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.outputs.push(OutputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Writes next to the first file output, to `explicit` when given, otherwise to stderr.
    pub fn write(mut self, explicit: Option<&Path>) -> Result<()> {
        if let Some(t) = self.started {
            self.wall_time_s = t.elapsed().as_secs_f64();
        }
        let json = serde_json::to_string_pretty(&self)?;
        let target = explicit.map(Path::to_path_buf).or_else(|| {
            self.outputs.first().map(|o| PathBuf::from(format!("{}.manifest.json", o.path)))
        });
        match target {
            Some(p) => std::fs::write(&p, json + "\n").with_context(|| format!("writing {}", p.display()))?,
            None => eprintln!("manifest: {}", serde_json::to_string(&self)?),
        }
        Ok(())
    }
}
