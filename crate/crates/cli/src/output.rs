//! CSV emission. Floats carry 17 significant digits so files round-trip.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use dipolar::Trajectory;

pub const TRAJECTORY_HEADER: &str =
    "tau,re_c1,im_c1,re_c2,im_c2,re_b,im_b,p1,p2,pb,p_leak,concurrence";

pub fn fmt(x: f64) -> String {
    // Adding +0.0 folds -0.0 into 0.0.
    format!("{:.16e}", x + 0.0)
}

pub fn write_trajectory<W: Write>(mut w: W, traj: &Trajectory) -> io::Result<()> {
    let lambda = traj.model.lambda();
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for s in &traj.samples {
        let c = (2.0 * s.c1.norm() * s.c2.norm()).min(1.0);
        let cols = [
            lambda * s.t,
            s.c1.re,
            s.c1.im,
            s.c2.re,
            s.c2.im,
            s.b.re,
            s.b.im,
            s.p1(),
            s.p2(),
            s.pb(),
            s.leak(),
            c,
        ];
        let row: Vec<String> = cols.iter().map(|&x| fmt(x)).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

/// Matrix of concurrences: one row per `tau`, one column per `K`.
pub fn write_sweep<W: Write>(
    mut w: W,
    tau: &[f64],
    k_values: &[f64],
    columns: &[Vec<f64>],
) -> io::Result<()> {
    let mut header = vec!["tau".to_string()];
    header.extend(k_values.iter().map(|k| format!("K={k}")));
    writeln!(w, "{}", header.join(","))?;
    for (i, &t) in tau.iter().enumerate() {
        let mut row = vec![fmt(t)];
        row.extend(columns.iter().map(|col| fmt(col[i])));
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

/// Runs `body` against the file at `path`, or stdout when there is none.
pub fn with_sink(
    path: Option<&Path>,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = BufWriter::new(file);
            body(&mut w).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock).context("writing to stdout")
        }
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
