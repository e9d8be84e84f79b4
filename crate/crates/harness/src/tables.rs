//! Plain-text exploitability tables: one per (game, solver), methods as
//! rows and bucket counts as columns.

use std::fmt::Write;

use weva_core::abstraction::Method;

use crate::config::{label, Spread};
use crate::output::Summary;

pub fn row_label(s: &Summary) -> String {
    match s.abstraction.parse::<Method>() {
        Ok(m) => label(m, s.w),
        Err(_) => s.abstraction.clone(),
    }
}

fn column_label(k: usize) -> String {
    if k == 0 {
        "full".into()
    } else {
        format!("K={k}")
    }
}

fn cell_text(s: &Summary, spread: Spread) -> String {
    let sp = match spread {
        Spread::Stderr => s.stderr,
        Spread::Stddev => s.stddev,
    };
    format!("{:.5} ± {:.5}", s.mean, sp)
}

/// Renders every (game, solver) block. Cells show mean ± spread to five
/// decimals; the lowest mean of each column carries a `*`, and missing
/// cells print as an em dash.
pub fn render(summary: &[Summary], spread: Spread) -> String {
    let mut blocks: Vec<(&str, &str)> = Vec::new();
    for s in summary {
        if !blocks.contains(&(s.game.as_str(), s.solver.as_str())) {
            blocks.push((&s.game, &s.solver));
        }
    }
    let mut out = String::new();
    for (game, solver) in blocks {
        let rows: Vec<&Summary> = summary.iter().filter(|s| s.game == game && s.solver == solver).collect();
        let mut labels: Vec<String> = Vec::new();
        let mut ks: Vec<usize> = Vec::new();
        for s in &rows {
            let l = row_label(s);
            if !labels.contains(&l) {
                labels.push(l);
            }
            if !ks.contains(&s.k) {
                ks.push(s.k);
            }
        }
        ks.sort_unstable();
        let best: Vec<f64> = ks
            .iter()
            .map(|&k| rows.iter().filter(|s| s.k == k).map(|s| s.mean).fold(f64::INFINITY, f64::min))
            .collect();
        let mut grid: Vec<Vec<String>> = vec![std::iter::once("Method".to_string()).chain(ks.iter().map(|&k| column_label(k))).collect()];
        for l in &labels {
            let mut line = vec![l.clone()];
            for (c, &k) in ks.iter().enumerate() {
                let text = match rows.iter().find(|s| s.k == k && &row_label(s) == l) {
                    Some(s) if s.mean == best[c] => format!("{} *", cell_text(s, spread)),
                    Some(s) => format!("{}  ", cell_text(s, spread)),
                    None => "—".to_string(),
                };
                line.push(text);
            }
            grid.push(line);
        }
        let widths: Vec<usize> = (0..grid[0].len())
            .map(|c| grid.iter().map(|r| r[c].chars().count()).max().unwrap())
            .collect();
        let spread_name = match spread {
            Spread::Stderr => "stderr",
            Spread::Stddev => "stddev",
        };
        let n = rows.iter().map(|s| s.n_boards).max().unwrap_or(0);
        writeln!(out, "Exploitability (fraction of pot), {game}, {solver}: mean ± {spread_name} over {n} boards").unwrap();
        for (i, r) in grid.iter().enumerate() {
            let cells: Vec<String> = r
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (s, &w))| {
                    let pad = w - s.chars().count();
                    if c == 0 {
                        format!("{s}{}", " ".repeat(pad))
                    } else {
                        format!("{}{s}", " ".repeat(pad))
                    }
                })
                .collect();
            writeln!(out, "{}", cells.join(" | ").trim_end()).unwrap();
            if i == 0 {
                let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
                writeln!(out, "{}", rule.join("-+-")).unwrap();
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(abstraction: &str, w: u64, k: usize, mean: f64) -> Summary {
        Summary {
            game: "random".into(),
            solver: "pcfr+".into(),
            abstraction: abstraction.into(),
            k,
            w,
            t: 2000,
            mean,
            stderr: 0.0001,
            stddev: 0.0003,
            n_boards: 10,
        }
    }

    #[test]
    fn single_cell() {
        let t = render(&[s("equity", 0, 50, 0.02785)], Spread::Stderr);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[1].contains("K=50"));
        assert!(lines[3].starts_with("equity") && lines[3].ends_with("0.02785 ± 0.00010 *"));
    }

    #[test]
    fn grid_best_and_missing() {
        let mut v = Vec::new();
        for (m, w) in [("equity", 0), ("ev-root", 50), ("ev-nd", 10)] {
            for k in [20, 50, 200] {
                v.push(s(m, w, k, 0.01 + k as f64 * 1e-5 + if m == "ev-nd" { -0.005 } else { 0.0 }));
            }
        }
        v.remove(4); // ev-root K=50
        let t = render(&v, Spread::Stddev);
        let body: Vec<&str> = t.lines().skip(3).take(3).collect();
        assert!(body[1].contains("—"));
        assert_eq!(body[2].matches('*').count(), 3);
        assert_eq!(body[0].matches('*').count(), 0);
        assert!(body[2].starts_with("ev-nd (W=10)"));
        assert!(t.contains("0.00030"));
    }
}
