use std::path::{Path, PathBuf};
use std::time::Instant;

use rise_core::io::{sha256_file, PROTOTYPE_FORMAT_VERSION, SPACE_MAP_FORMAT_VERSION};
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub rise: &'static str,
    pub prototype_format: u64,
    pub space_map_format: u64,
    pub pair_binary_format: u64,
}

#[derive(Debug, Serialize)]
pub struct Machine {
    pub os: &'static str,
    pub arch: &'static str,
    pub cpus: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cpu_model: Option<String>,
}

impl Machine {
    pub fn detect() -> Self {
        let cpu_model = std::fs::read_to_string("/proc/cpuinfo").ok().and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split_once(':'))
                .map(|(_, v)| v.trim().to_string())
        });
        Self {
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            cpu_model,
        }
    }
}

/// Audit record of one invocation. Everything except `wall_ms` is a pure
/// function of the command line, config and input bytes.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub versions: Versions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub machine: Option<Machine>,
    pub wall_ms: f64,
}

pub struct Recorder {
    manifest: RunManifest,
    started: Instant,
}

impl Recorder {
    pub fn new(command: &str, config: impl Serialize, seed: Option<u64>) -> Self {
        Self {
            manifest: RunManifest {
                command: command.into(),
                config: serde_json::to_value(config).expect("settings serialize"),
                seed,
                inputs: Vec::new(),
                outputs: Vec::new(),
                versions: Versions {
                    rise: rise_core::VERSION,
                    prototype_format: PROTOTYPE_FORMAT_VERSION,
                    space_map_format: SPACE_MAP_FORMAT_VERSION,
                    pair_binary_format: rise_core::io::binary::FORMAT_VERSION,
                },
                machine: None,
                wall_ms: 0.0,
            },
            started: Instant::now(),
        }
    }

    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        let sha256 = sha256_file(path)?;
        self.manifest.inputs.push(FileDigest {
            path: path.to_path_buf(),
            sha256,
        });
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> CliResult<()> {
        let sha256 = sha256_file(path)?;
        self.manifest.outputs.push(FileDigest {
            path: path.to_path_buf(),
            sha256,
        });
        Ok(())
    }

    pub fn machine(&mut self) {
        self.manifest.machine = Some(Machine::detect());
    }

    /// Writes to `explicit`, else next to the first output, else stderr.
    pub fn finish(mut self, explicit: Option<&Path>) -> CliResult<()> {
        self.manifest.wall_ms = self.started.elapsed().as_secs_f64() * 1e3;
        let json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        let target = explicit.map(Path::to_path_buf).or_else(|| {
            self.manifest.outputs.first().map(|o| {
                let mut s = o.path.clone().into_os_string();
                s.push(".manifest.json");
                PathBuf::from(s)
            })
        });
        match target {
            Some(path) => std::fs::write(&path, json + "\n").map_err(|e| CliError::io(path, e)),
            None => {
                eprintln!("{json}");
                Ok(())
            }
        }
    }
}
