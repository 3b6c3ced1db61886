//! Whitespace-separated data blocks plus a gnuplot stub. Nothing is rendered.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::ValueEnum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    /// `corners.csv` from the corners suite: (log distance, log H).
    Corners,
    /// `trace.csv` from minimize or `descent.csv` from the descent suite: (iter, energy).
    Descent,
    /// `dichotomy.csv` from the corners suite: (N, total).
    Refinement,
}

struct Layout {
    x: &'static str,
    y: &'static str,
    group: &'static str,
    log: bool,
    labels: (&'static str, &'static str),
}

fn layout(kind: PlotKind) -> Layout {
    match kind {
        PlotKind::Corners => Layout { x: "distance", y: "h_s", group: "s", log: true, labels: ("log distance", "log H") },
        PlotKind::Descent => Layout { x: "iter", y: "energy", group: "seed", log: false, labels: ("iteration", "energy") },
        PlotKind::Refinement => Layout { x: "n", y: "total", group: "p", log: false, labels: ("N", "total energy") },
    }
}

/// Writes `<kind>.dat` and `<kind>.gp` into `out`; returns both paths.
pub fn emit(kind: PlotKind, input: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let lay = layout(kind);
    let mut rdr = csv::Reader::from_path(input).with_context(|| format!("reading {}", input.display()))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let x = col(lay.x).ok_or_else(|| anyhow!("{} has no column {:?}", input.display(), lay.x))?;
    let y = col(lay.y).ok_or_else(|| anyhow!("{} has no column {:?}", input.display(), lay.y))?;
    let g = col(lay.group);

    let mut blocks: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut order: Vec<String> = vec![];
    for rec in rdr.records() {
        let rec = rec?;
        let key = g.map(|i| rec[i].to_string()).unwrap_or_default();
        let (mut xv, mut yv): (f64, f64) = (rec[x].parse()?, rec[y].parse()?);
        if lay.log {
            (xv, yv) = (xv.ln(), yv.abs().ln());
        }
        if !blocks.contains_key(&key) {
            order.push(key.clone());
        }
        blocks.entry(key).or_default().push((xv, yv));
    }

    let name = kind.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    std::fs::create_dir_all(out)?;
    let mut dat = format!("# source: {}\n# columns: {}  {}\n", input.display(), lay.labels.0, lay.labels.1);
    for (b, key) in order.iter().enumerate() {
        if b > 0 {
            dat.push_str("\n\n");
        }
        if g.is_some() {
            writeln!(dat, "# {} = {key}", lay.group)?;
        }
        for (xv, yv) in &blocks[key] {
            writeln!(dat, "{xv:.12e} {yv:.12e}")?;
        }
    }
    let dat_path = out.join(format!("{name}.dat"));
    std::fs::write(&dat_path, dat)?;

    let mut gp = format!("set xlabel '{}'\nset ylabel '{}'\nplot ", lay.labels.0, lay.labels.1);
    let plots: Vec<String> = order
        .iter()
        .enumerate()
        .map(|(i, key)| {
            let title = if g.is_some() { format!("{} = {key}", lay.group) } else { name.clone() };
            format!("'{name}.dat' index {i} using 1:2 with linespoints title '{title}'")
        })
        .collect();
    gp.push_str(&plots.join(", \\\n     "));
    gp.push('\n');
    let gp_path = out.join(format!("{name}.gp"));
    std::fs::write(&gp_path, gp)?;
    Ok(vec![dat_path, gp_path])
}
