use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::{mpsc, OnceLock};
use std::thread;
use std::time::{Duration, Instant, SystemTime};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tempfile::TempDir;

use super::{CheckReport, TypeChecker};
use crate::error::{Error, Result};
use crate::sync::Semaphore;

/// Flags passed on every invocation, followed by the file name.
pub const MYPY_FLAGS: [&str; 4] = [
    "--install-types",
    "--non-interactive",
    "--ignore-missing-imports",
    "--follow-imports=silent",
];

pub const CHECKED_FILE_NAME: &str = "temp_code.py";

const ENV_PASSTHROUGH: &[&str] = &[
    "PATH",
    "HOME",
    "LANG",
    "LC_ALL",
    "TMPDIR",
    "SYSTEMROOT",
    "VIRTUAL_ENV",
    "CONDA_PREFIX",
    "PYTHONPATH",
    "PYTHONHOME",
    "PIP_INDEX_URL",
    "PIP_EXTRA_INDEX_URL",
    "PIP_TRUSTED_HOST",
    "HTTP_PROXY",
    "HTTPS_PROXY",
    "NO_PROXY",
    "http_proxy",
    "https_proxy",
    "no_proxy",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MypyConfig {
    pub executable: PathBuf,
    #[serde(with = "crate::config::secs")]
    pub timeout: Duration,
    /// Shared cache (and stub install bookkeeping); defaults to a directory
    /// inside the checker's work root.
    pub cache_dir: Option<PathBuf>,
    pub max_concurrent: usize,
}

impl Default for MypyConfig {
    fn default() -> Self {
        MypyConfig {
            executable: PathBuf::from("mypy"),
            timeout: Duration::from_secs(60),
            cache_dir: None,
            max_concurrent: thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

/// Runs mypy on candidates, one isolated directory per call.
pub struct Mypy {
    config: MypyConfig,
    root: TempDir,
    cache_dir: PathBuf,
    permits: Semaphore,
    version: OnceLock<String>,
}

impl std::fmt::Debug for Mypy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mypy").field("config", &self.config).finish()
    }
}

impl Mypy {
    pub fn new(config: MypyConfig) -> Result<Self> {
        let root = tempfile::Builder::new()
            .prefix("typeloop-check-")
            .tempdir()
            .map_err(|e| Error::io("creating checker work directory", e))?;
        let cache_dir = config.cache_dir.clone().unwrap_or_else(|| root.path().join("mypy_cache"));
        fs::create_dir_all(&cache_dir).map_err(|e| Error::io(format!("creating {}", cache_dir.display()), e))?;
        Ok(Mypy {
            permits: Semaphore::new(config.max_concurrent),
            config,
            root,
            cache_dir,
            version: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &MypyConfig {
        &self.config
    }

    fn command(&self) -> Command {
        let mut cmd = Command::new(&self.config.executable);
        cmd.env_clear();
        for key in ENV_PASSTHROUGH {
            if let Some(v) = std::env::var_os(key) {
                cmd.env(key, v);
            }
        }
        cmd.env("MYPY_CACHE_DIR", &self.cache_dir);
        cmd.stdin(Stdio::null()).stdout(Stdio::piped()).stderr(Stdio::piped());
        #[cfg(unix)]
        std::os::unix::process::CommandExt::process_group(&mut cmd, 0);
        cmd
    }

    fn spawn_error(&self, e: std::io::Error) -> Error {
        Error::Environment(format!("cannot run {}: {e}", self.config.executable.display()))
    }

    /// Writes `code` to a fresh directory under `workdir` and checks it.
    pub fn run_check(&self, code: &str, workdir: &Path) -> Result<CheckReport> {
        let dir = tempfile::Builder::new()
            .prefix("check-")
            .tempdir_in(workdir)
            .map_err(|e| Error::io(format!("creating check directory in {}", workdir.display()), e))?;
        let file = dir.path().join(CHECKED_FILE_NAME);
        fs::write(&file, code)
            .and_then(|_| stamp_mtime(&file, code))
            .map_err(|e| Error::io(format!("writing candidate in {}", dir.path().display()), e))?;

        let _permit = self.permits.acquire();
        let start = Instant::now();
        let mut child = self
            .command()
            .args(MYPY_FLAGS)
            .arg(CHECKED_FILE_NAME)
            .current_dir(dir.path())
            .spawn()
            .map_err(|e| self.spawn_error(e))?;

        let out_reader = drain(child.stdout.take().expect("piped"));
        let err_reader = drain(child.stderr.take().expect("piped"));

        let deadline = start + self.config.timeout;
        let status = loop {
            match child.try_wait().map_err(|e| Error::io("waiting for mypy", e))? {
                Some(status) => break Some(status),
                None if Instant::now() >= deadline => {
                    kill_tree(&mut child);
                    let _ = child.wait();
                    break None;
                }
                None => thread::sleep(Duration::from_millis(5)),
            }
        };
        let duration = start.elapsed();
        let grace = Duration::from_secs(2);
        let stdout = out_reader.recv_timeout(grace).unwrap_or_default();
        let stderr = err_reader.recv_timeout(grace).unwrap_or_default();

        // mypy prints diagnostics to stderr and the summary to stdout when
        // --install-types is active; keep diagnostics first.
        let mut raw = join_streams(&stderr, &stdout);
        match status {
            Some(status) => Ok(CheckReport::from_output(raw, status.code().unwrap_or(-1), duration, false)),
            None => {
                if !raw.is_empty() {
                    raw.push('\n');
                }
                raw.push_str(&format!(
                    "{CHECKED_FILE_NAME}:1: error: Type check timed out after {}s  [timeout]",
                    self.config.timeout.as_secs_f64()
                ));
                Ok(CheckReport::from_output(raw, -1, duration, true))
            }
        }
    }
}

/// mypy's cache trusts a module whose path, size and whole-second mtime all
/// match its record. Every candidate is `temp_code.py`, so two same-sized
/// candidates written within one second would get the first one's verdict.
/// Deriving the mtime from the content makes mypy re-hash whenever the
/// content changes while keeping cache hits for identical candidates.
fn stamp_mtime(path: &Path, code: &str) -> std::io::Result<()> {
    let digest = Sha256::digest(code.as_bytes());
    let offset = u32::from_le_bytes([digest[0], digest[1], digest[2], digest[3]]);
    let mtime = SystemTime::UNIX_EPOCH + Duration::from_secs(1_000_000_000 + u64::from(offset));
    fs::File::options().write(true).open(path)?.set_modified(mtime)
}

fn drain(mut pipe: impl Read + Send + 'static) -> mpsc::Receiver<String> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = pipe.read_to_end(&mut buf);
        let _ = tx.send(String::from_utf8_lossy(&buf).into_owned());
    });
    rx
}

#[cfg(unix)]
fn kill_tree(child: &mut Child) {
    // The child leads its own process group; take down stub installers too.
    unsafe {
        libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
    }
    let _ = child.kill();
}

#[cfg(not(unix))]
fn kill_tree(child: &mut Child) {
    let _ = child.kill();
}

fn join_streams(first: &str, second: &str) -> String {
    let parts: Vec<&str> = [first, second]
        .into_iter()
        .map(|s| s.trim_end())
        .filter(|s| !s.is_empty())
        .collect();
    parts.join("\n")
}

impl TypeChecker for Mypy {
    fn check(&self, code: &str) -> Result<CheckReport> {
        self.run_check(code, self.root.path())
    }

    fn version(&self) -> Result<String> {
        if let Some(v) = self.version.get() {
            return Ok(v.clone());
        }
        let out = self
            .command()
            .arg("--version")
            .output()
            .map_err(|e| self.spawn_error(e))?;
        if !out.status.success() {
            return Err(Error::Environment(format!(
                "{} --version failed: {}",
                self.config.executable.display(),
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        let v = String::from_utf8_lossy(&out.stdout).trim().to_string();
        Ok(self.version.get_or_init(|| v).clone())
    }
}
