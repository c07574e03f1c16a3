//! CSV dumps, manifests and output-directory handling.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::discretize::{Grid, Profile};
use crate::error::{Error, Result};
use crate::obstacles::ObstaclePair;
use crate::solver::IterRecord;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// `x,Q,Qsharp,v`
pub fn profile_csv(q: &Profile, qsharp: &Profile) -> Result<String> {
    q.check_same_grid(qsharp)?;
    let mut out = String::from("x,Q,Qsharp,v\n");
    for i in 0..q.grid.n {
        let (a, b) = (q.values[i], qsharp.values[i]);
        out.push_str(&format!("{},{},{},{}\n", num(q.grid.x(i)), num(a), num(b), num(a - b)));
    }
    Ok(out)
}

/// Reads a profile dump; returns `(Q, Q♯)`. The far fields are the values
/// of `Q♯` at the window edges.
pub fn read_profile_csv(text: &str) -> Result<(Profile, Profile)> {
    let mut lines = text.lines().enumerate();
    let schema = |line: usize, column: usize, message: String| Error::Parse {
        line,
        column,
        message,
    };
    match lines.next() {
        Some((_, h)) if h.trim() == "x,Q,Qsharp,v" => {}
        Some((_, h)) => return Err(schema(1, 1, format!("expected header `x,Q,Qsharp,v`, found `{h}`"))),
        None => return Err(schema(1, 1, "empty profile file".into())),
    }
    let (mut xs, mut qs, mut ss) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(schema(i + 1, 1, format!("expected 4 fields, found {}", fields.len())));
        }
        let mut vals = [0.0; 4];
        let mut col = 1;
        for (k, f) in fields.iter().enumerate() {
            vals[k] = f
                .trim()
                .parse()
                .map_err(|_| schema(i + 1, col, format!("`{f}` is not a number")))?;
            col += f.len() + 1;
        }
        xs.push(vals[0]);
        qs.push(vals[1]);
        ss.push(vals[2]);
    }
    let n = xs.len();
    if n < 3 || n % 2 == 0 {
        return Err(schema(n + 1, 1, format!("need an odd number >= 3 of rows, found {n}")));
    }
    let grid = Grid::new(-xs[0], n)?;
    for (i, &x) in xs.iter().enumerate() {
        if (x - grid.x(i)).abs() > 1e-9 * grid.h.max(1.0) {
            return Err(schema(i + 2, 1, format!("x = {x} is off the uniform grid (expected {})", grid.x(i))));
        }
    }
    let (left, right) = (ss[0], ss[n - 1]);
    Ok((Profile::new(grid, qs, left, right)?, Profile::new(grid, ss, left, right)?))
}

/// `iter,viscous,penalty,potential,interaction,total,grad_norm`; iterations
/// are numbered consecutively across stages.
pub fn energy_trace_csv(stages: &[Vec<IterRecord>]) -> String {
    let mut out = String::from("iter,viscous,penalty,potential,interaction,total,grad_norm\n");
    let mut k = 0usize;
    for stage in stages {
        for r in stage {
            let e = &r.energy;
            out.push_str(&format!(
                "{k},{},{},{},{},{},{}\n",
                num(e.viscous),
                num(e.penalty),
                num(e.potential),
                num(e.interaction),
                num(e.total),
                num(r.grad_norm)
            ));
            k += 1;
        }
    }
    out
}

/// `x,phi,psi,Phi,Psi`
pub fn obstacle_csv(pair: &ObstaclePair) -> String {
    let g = pair.phi.grid;
    let mut out = String::from("x,phi,psi,Phi,Psi\n");
    for i in 0..g.n {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            num(g.x(i)),
            num(pair.phi.values[i]),
            num(pair.psi.values[i]),
            num(pair.upper.values[i]),
            num(pair.lower.values[i])
        ));
    }
    out
}

/// `x,log_abs_dev`
pub fn tail_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("x,log_abs_dev\n");
    for &(x, d) in points {
        out.push_str(&format!("{},{}\n", num(x), num(d)));
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub command: String,
    pub config_digest: String,
    pub model_hash: String,
    pub outputs: Vec<String>,
    pub verdicts: BTreeMap<String, serde_json::Value>,
}

/// Output directory of one run: tracks written files and holds a lock.
pub struct RunDir {
    root: PathBuf,
    outputs: Vec<String>,
    lock: PathBuf,
}

impl RunDir {
    pub fn open(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        let lock = root.join(".lock");
        fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&lock)
            .map_err(|e| {
                std::io::Error::new(
                    e.kind(),
                    format!("{} is locked by another run ({e})", root.display()),
                )
            })?;
        Ok(RunDir {
            root: root.to_path_buf(),
            outputs: Vec::new(),
            lock,
        })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn write(&mut self, rel: &str, contents: &[u8]) -> Result<()> {
        let p = self.root.join(rel);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir)?;
        }
        write_atomic(&p, contents)?;
        if !self.outputs.iter().any(|o| o == rel) {
            self.outputs.push(rel.to_string());
        }
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        self.write(rel, text.as_bytes())
    }

    /// Records the manifest last, listing every file written through `self`.
    pub fn finish(mut self, mut manifest: RunManifest) -> Result<()> {
        manifest.outputs = self.outputs.clone();
        manifest.outputs.sort();
        self.write_json("manifest.json", &manifest)
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}
