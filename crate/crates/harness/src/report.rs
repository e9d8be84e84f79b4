//! Turns result records into SVG charts plus the CSV data behind them.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use weva_core::evaluation::CorrelationPoint;

use crate::output::{summarize, Record};
use crate::plots::{bar_chart, line_chart, Series};
use crate::tables::row_label;

/// Exploitability of a method divided by equity's on the same board, K
/// and solver.
#[derive(Clone, Debug, PartialEq)]
pub struct Ratio {
    pub game: String,
    pub solver: String,
    pub label: String,
    pub k: usize,
    pub board_id: u64,
    pub ratio: f64,
}

pub fn equity_ratios(records: &[Record]) -> Vec<Ratio> {
    records
        .iter()
        .filter_map(|r| {
            let base = records.iter().find(|b| {
                b.abstraction == "equity" && b.game == r.game && b.solver == r.solver && b.k == r.k && b.t == r.t && b.board_id == r.board_id
            })?;
            Some(Ratio {
                game: r.game.clone(),
                solver: r.solver.clone(),
                label: record_label(r),
                k: r.k,
                board_id: r.board_id,
                ratio: r.expl_final / base.expl_final,
            })
        })
        .collect()
}

fn record_label(r: &Record) -> String {
    row_label(&crate::output::Summary {
        game: String::new(),
        solver: String::new(),
        abstraction: r.abstraction.clone(),
        k: r.k,
        w: r.w,
        t: r.t,
        mean: 0.0,
        stderr: 0.0,
        stddev: 0.0,
        n_boards: 0,
    })
}

fn uniq<T: PartialEq + Clone>(items: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn write(dir: &Path, name: String, text: &str, made: &mut Vec<PathBuf>) -> Result<()> {
    let p = dir.join(name);
    std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
    made.push(p);
    Ok(())
}

fn slug(s: &str) -> String {
    s.replace('+', "plus")
}

/// Writes per (game, solver): grouped bars of mean final exploitability,
/// equity-normalised ratios, per-board bars and convergence curves for
/// every K; plus `ratios.csv`. Returns the files written.
pub fn emit_plots(dir: &Path, records: &[Record]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut made = Vec::new();
    let ratios = equity_ratios(records);
    let mut csv = String::from("game,solver,method,K,board_id,ratio\n");
    for r in &ratios {
        csv.push_str(&format!("{},{},{},{},{},{}\n", r.game, r.solver, r.label, r.k, r.board_id, r.ratio));
    }
    write(dir, "ratios.csv".into(), &csv, &mut made)?;

    let summary = summarize(records);
    for (game, solver) in uniq(records.iter().map(|r| (r.game.clone(), r.solver.clone()))) {
        let tag = format!("{game}_{}", slug(&solver));
        let rows: Vec<&Record> = records.iter().filter(|r| r.game == game && r.solver == solver).collect();
        let labels = uniq(rows.iter().map(|r| record_label(r)));
        let ks = {
            let mut k = uniq(rows.iter().map(|r| r.k));
            k.sort_unstable();
            k
        };
        let groups: Vec<String> = ks.iter().map(|k| format!("K={k}")).collect();

        let means: Vec<Vec<Option<f64>>> = labels
            .iter()
            .map(|l| {
                ks.iter()
                    .map(|&k| {
                        summary
                            .iter()
                            .find(|s| s.game == game && s.solver == solver && s.k == k && &row_label(s) == l)
                            .map(|s| s.mean)
                    })
                    .collect()
            })
            .collect();
        let svg = bar_chart(&format!("Final exploitability, {game}, {solver}"), "exploitability (log)", &groups, &labels, &means, true, None);
        write(dir, format!("bars_{tag}.svg"), &svg, &mut made)?;

        let rs: Vec<&Ratio> = ratios.iter().filter(|r| r.game == game && r.solver == solver).collect();
        if !rs.is_empty() {
            let ratio_means: Vec<Vec<Option<f64>>> = labels
                .iter()
                .map(|l| {
                    ks.iter()
                        .map(|&k| {
                            let v: Vec<f64> = rs.iter().filter(|r| r.k == k && &r.label == l).map(|r| r.ratio).collect();
                            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
                        })
                        .collect()
                })
                .collect();
            let svg = bar_chart(&format!("Exploitability / equity, {game}, {solver}"), "ratio to equity", &groups, &labels, &ratio_means, false, Some(1.0));
            write(dir, format!("ratio_{tag}.svg"), &svg, &mut made)?;
        }

        for &k in &ks {
            let at_k: Vec<&&Record> = rows.iter().filter(|r| r.k == k).collect();
            let boards = {
                let mut b = uniq(at_k.iter().map(|r| r.board_id));
                b.sort_unstable();
                b
            };
            let per_board: Vec<Vec<Option<f64>>> = labels
                .iter()
                .map(|l| {
                    boards
                        .iter()
                        .map(|&b| at_k.iter().find(|r| r.board_id == b && &record_label(r) == l).map(|r| r.expl_final))
                        .collect()
                })
                .collect();
            let names: Vec<String> = boards.iter().map(|b| format!("board {b}")).collect();
            let svg = bar_chart(&format!("Per-board exploitability, {game}, {solver}, K={k}"), "exploitability (log)", &names, &labels, &per_board, true, None);
            write(dir, format!("boards_{tag}_k{k}.svg"), &svg, &mut made)?;

            let series: Vec<Series> = labels
                .iter()
                .filter_map(|l| {
                    let rs: Vec<&&&Record> = at_k.iter().filter(|r| &record_label(r) == l).collect();
                    let its = uniq(rs.iter().flat_map(|r| r.checkpoints.iter().map(|c| c.0)));
                    let points: Vec<(f64, f64)> = its
                        .iter()
                        .map(|&t| {
                            let v: Vec<f64> = rs.iter().filter_map(|r| r.checkpoints.iter().find(|c| c.0 == t)).map(|c| c.1).collect();
                            (t as f64, v.iter().sum::<f64>() / v.len() as f64)
                        })
                        .collect();
                    (!points.is_empty()).then(|| Series { name: l.clone(), points })
                })
                .collect();
            let svg = line_chart(&format!("Convergence, {game}, {solver}, K={k}"), "iteration", "exploitability", &series, true, true);
            write(dir, format!("convergence_{tag}_k{k}.svg"), &svg, &mut made)?;
        }
    }
    Ok(made)
}

/// One row of the rank-correlation study output.
#[derive(Clone, Debug)]
pub struct StudyRow {
    pub game: String,
    pub board_id: u64,
    pub point: CorrelationPoint,
}

/// `figure1.csv` and one chart per game: ρ (linear) and exploitability
/// (log) against the iteration.
pub fn write_study(dir: &Path, rows: &[StudyRow]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut made = Vec::new();
    let mut csv = String::from("game,board_id,t,rho,rho_p1,rho_p2,expl\n");
    for r in rows {
        let p = &r.point;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.game, r.board_id, p.iteration, p.rho, p.rho_per_player[0], p.rho_per_player[1], p.expl
        ));
    }
    write(dir, "figure1.csv".into(), &csv, &mut made)?;
    for game in uniq(rows.iter().map(|r| r.game.clone())) {
        let mine: Vec<&StudyRow> = rows.iter().filter(|r| r.game == game).collect();
        let by_board = |f: &dyn Fn(&CorrelationPoint) -> f64| -> Vec<Series> {
            uniq(mine.iter().map(|r| r.board_id))
                .into_iter()
                .map(|b| Series {
                    name: format!("board {b}"),
                    points: mine.iter().filter(|r| r.board_id == b).map(|r| (r.point.iteration as f64, f(&r.point))).collect(),
                })
                .collect()
        };
        let svg = line_chart(&format!("EV rank correlation, {game}"), "iteration", "Spearman rho", &by_board(&|p| p.rho), true, false);
        write(dir, format!("figure1_rho_{game}.svg"), &svg, &mut made)?;
        let svg = line_chart(&format!("Exploitability, {game}"), "iteration", "exploitability", &by_board(&|p| p.expl), true, true);
        write(dir, format!("figure1_expl_{game}.svg"), &svg, &mut made)?;
    }
    Ok(made)
}
