use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

/// Line-oriented run log, mirrored to stderr.
pub struct RunLog {
    file: Mutex<File>,
    start: Instant,
}

impl RunLog {
    pub fn create(path: &Path) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).write(true).truncate(true).open(path)?;
        Ok(RunLog { file: Mutex::new(file), start: Instant::now() })
    }

    pub fn line(&self, msg: &str) {
        let text = format!("[{:>9.3}s] {msg}\n", self.start.elapsed().as_secs_f64());
        eprint!("{text}");
        if let Ok(mut f) = self.file.lock() {
            let _ = f.write_all(text.as_bytes());
        }
    }

    /// Runs `f`, logging its wall time under `stage`.
    pub fn timed<T>(&self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.line(&format!("stage {stage} took {:.3}s", t.elapsed().as_secs_f64()));
        out
    }
}
