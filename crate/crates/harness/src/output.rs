//! CSV files of a grid run: `results.csv` (one row per cell and board),
//! `timings.csv` (wall-clock per phase, kept apart so results stay
//! byte-reproducible) and `summary.csv` (aggregates over boards).

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::grid::ResultRow;

/// One (cell, board) result as stored in `results.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub game: String,
    pub solver: String,
    pub abstraction: String,
    pub k: usize,
    pub w: u64,
    pub t: u64,
    pub board_id: u64,
    pub seed: u64,
    pub expl_final: f64,
    pub checkpoints: Vec<(u64, f64)>,
}

impl Record {
    fn key(&self) -> (&str, &str, &str, usize, u64, u64) {
        (&self.game, &self.solver, &self.abstraction, self.k, self.w, self.t)
    }
}

/// Mean and spread of final exploitability over the boards of one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub game: String,
    pub solver: String,
    pub abstraction: String,
    pub k: usize,
    pub w: u64,
    pub t: u64,
    pub mean: f64,
    pub stderr: f64,
    pub stddev: f64,
    pub n_boards: usize,
}

const KEYS: [&str; 6] = ["game", "solver", "abstraction", "K", "W", "T"];

fn key_fields(r: &Record) -> Vec<String> {
    vec![
        r.game.clone(),
        r.solver.clone(),
        r.abstraction.clone(),
        r.k.to_string(),
        r.w.to_string(),
        r.t.to_string(),
    ]
}

pub fn write_results<W: std::io::Write>(out: W, records: &[Record]) -> Result<()> {
    let ladder: BTreeSet<u64> = records.iter().flat_map(|r| r.checkpoints.iter().map(|c| c.0)).collect();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = KEYS.iter().map(|s| s.to_string()).collect();
    header.extend(["board_id", "seed", "expl_final"].map(String::from));
    header.extend(ladder.iter().map(|c| format!("expl_at_{c}")));
    w.write_record(&header)?;
    for r in records {
        let mut row = key_fields(r);
        row.extend([r.board_id.to_string(), r.seed.to_string(), r.expl_final.to_string()]);
        for c in &ladder {
            row.push(
                r.checkpoints
                    .iter()
                    .find(|x| x.0 == *c)
                    .map_or(String::new(), |x| x.1.to_string()),
            );
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timings<W: std::io::Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = KEYS.to_vec();
    header.extend(["board_id", "ms_warmup", "ms_feature", "ms_cluster", "ms_solve", "ms_eval"]);
    w.write_record(&header)?;
    for r in rows {
        let t = r.timings;
        let mut row = key_fields(&r.record);
        row.push(r.record.board_id.to_string());
        for v in [t.warmup_ms, t.feature_ms, t.cluster_ms, t.solve_ms, r.ms_eval] {
            row.push(format!("{v:.3}"));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn field<'a>(rec: &'a csv::StringRecord, header: &csv::StringRecord, name: &str) -> Result<&'a str> {
    let i = header
        .iter()
        .position(|h| h == name)
        .with_context(|| format!("missing column `{name}`"))?;
    Ok(rec.get(i).unwrap_or(""))
}

fn parse<T: std::str::FromStr>(s: &str, name: &str) -> Result<T> {
    s.parse().map_err(|_| anyhow::anyhow!("bad value `{s}` in column `{name}`"))
}

pub fn read_results(path: &Path) -> Result<Vec<Record>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header = rdr.headers()?.clone();
    let ladder: Vec<(usize, u64)> = header
        .iter()
        .enumerate()
        .filter_map(|(i, h)| h.strip_prefix("expl_at_").and_then(|c| c.parse().ok()).map(|c| (i, c)))
        .collect();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let get = |n: &str| field(&rec, &header, n);
        out.push(Record {
            game: get("game")?.to_string(),
            solver: get("solver")?.to_string(),
            abstraction: get("abstraction")?.to_string(),
            k: parse(get("K")?, "K")?,
            w: parse(get("W")?, "W")?,
            t: parse(get("T")?, "T")?,
            board_id: parse(get("board_id")?, "board_id")?,
            seed: parse(get("seed")?, "seed")?,
            expl_final: parse(get("expl_final")?, "expl_final")?,
            checkpoints: ladder
                .iter()
                .filter_map(|&(i, c)| rec.get(i).filter(|s| !s.is_empty()).map(|s| (c, s)))
                .map(|(c, s)| Ok((c, parse(s, "expl_at")?)))
                .collect::<Result<_>>()?,
        });
    }
    Ok(out)
}

/// Mean, sample standard deviation and standard error over boards, one
/// entry per distinct cell in order of first appearance.
pub fn summarize(records: &[Record]) -> Vec<Summary> {
    let mut groups: Vec<(&Record, Vec<f64>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|(g, _)| g.key() == r.key()) {
            Some((_, v)) => v.push(r.expl_final),
            None => groups.push((r, vec![r.expl_final])),
        }
    }
    groups
        .into_iter()
        .map(|(r, v)| {
            let n = v.len();
            let mean = v.iter().sum::<f64>() / n as f64;
            let stddev = if n > 1 {
                (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            Summary {
                game: r.game.clone(),
                solver: r.solver.clone(),
                abstraction: r.abstraction.clone(),
                k: r.k,
                w: r.w,
                t: r.t,
                mean,
                stderr: stddev / (n as f64).sqrt(),
                stddev,
                n_boards: n,
            }
        })
        .collect()
}

pub fn write_summary<W: std::io::Write>(out: W, summary: &[Summary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = KEYS.to_vec();
    header.extend(["expl_mean", "expl_stderr", "expl_stddev", "n_boards"]);
    w.write_record(&header)?;
    for s in summary {
        w.write_record([
            s.game.clone(),
            s.solver.clone(),
            s.abstraction.clone(),
            s.k.to_string(),
            s.w.to_string(),
            s.t.to_string(),
            s.mean.to_string(),
            s.stderr.to_string(),
            s.stddev.to_string(),
            s.n_boards.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `results.csv`, `timings.csv` and `summary.csv` into `dir`.
pub fn write_run(dir: &Path, rows: &[ResultRow]) -> Result<Vec<Summary>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let records: Vec<Record> = rows.iter().map(|r| r.record.clone()).collect();
    if records.is_empty() {
        bail!("no results to write");
    }
    let summary = summarize(&records);
    let create = |name: &str| {
        let p = dir.join(name);
        std::fs::File::create(&p).with_context(|| format!("writing {}", p.display()))
    };
    write_results(create("results.csv")?, &records)?;
    write_timings(create("timings.csv")?, rows)?;
    write_summary(create("summary.csv")?, &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(abstraction: &str, board: u64, expl: f64) -> Record {
        Record {
            game: "hunl-river".into(),
            solver: "pcfr+".into(),
            abstraction: abstraction.into(),
            k: 50,
            w: 0,
            t: 5,
            board_id: board,
            seed: 42 + board,
            expl_final: expl,
            checkpoints: vec![(1, 0.5), (2, 0.25), (5, expl)],
        }
    }

    #[test]
    fn constant_column_has_zero_spread() {
        let rs: Vec<Record> = (0..10).map(|b| rec("equity", b, 0.125)).collect();
        let s = summarize(&rs);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].mean, s[0].stderr, s[0].n_boards), (0.125, 0.0, 10));
    }

    #[test]
    fn stderr_is_stddev_over_root_n() {
        let rs: Vec<Record> = [1.0, 2.0, 3.0, 4.0].iter().enumerate().map(|(b, &x)| rec("rank", b as u64, x)).collect();
        let s = &summarize(&rs)[0];
        assert_eq!(s.mean, 2.5);
        assert!((s.stddev - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.stderr - s.stddev / 2.0).abs() < 1e-15);
    }

    #[test]
    fn results_round_trip() {
        let mut rs = vec![rec("equity", 0, 0.1), rec("ev-nd", 0, 1.0 / 3.0)];
        rs[1].w = 50;
        rs[1].checkpoints.pop();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("results.csv");
        write_results(std::fs::File::create(&p).unwrap(), &rs).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("game,solver,abstraction,K,W,T,board_id,seed,expl_final,expl_at_1,expl_at_2,expl_at_5\n"));
        assert_eq!(read_results(&p).unwrap(), rs);
    }
}
