//! Bucket dumps for one (cell, board): per-hand assignments with features,
//! and per-bucket hand lists with centroids.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use weva_core::abstraction::{build_mapping, BucketMapping};
use weva_core::game::{Game, HandSpace, Player};
use weva_core::hand_eval::FeatureMatrix;

use crate::config::{Cell, ExperimentConfig};
use crate::grid::abstraction_config;

/// `bucket_id,size,hands,c0..` where `hands` is space-separated.
pub fn write_groups<W: Write>(out: &mut W, mapping: &BucketMapping, p: Player, hands: &HandSpace, features: &FeatureMatrix) -> Result<()> {
    let dim = features.cols();
    write!(out, "bucket_id,size,hands")?;
    for d in 0..dim {
        write!(out, ",c{d}")?;
    }
    writeln!(out)?;
    let phi = mapping.buckets(p);
    for b in 0..mapping.k() {
        let members: Vec<usize> = (0..phi.len()).filter(|&i| phi[i] as usize == b).collect();
        let names: Vec<String> = members.iter().map(|&i| hands.get(i).to_string()).collect();
        write!(out, "{b},{},{}", members.len(), names.join(" "))?;
        for d in 0..dim {
            let mean = members.iter().map(|&i| features.get(i, d)).sum::<f64>() / members.len().max(1) as f64;
            if members.is_empty() {
                write!(out, ",")?;
            } else {
                write!(out, ",{mean}")?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn inspect_buckets(config: &ExperimentConfig, cell: &Cell, board_id: u64, dir: &Path) -> Result<Vec<PathBuf>> {
    let game = Game::for_board(cell.game, board_id, config.base_seed, &config.tree())?;
    let acfg = abstraction_config(config, cell, game.n_hands(), board_id);
    let (mapping, features, _) = build_mapping(&game, &acfg)?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut made = Vec::new();
    for p in Player::BOTH {
        let n = p.index() + 1;
        let path = dir.join(format!("buckets_p{n}.csv"));
        let mut f = std::io::BufWriter::new(std::fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?);
        mapping.write_csv(&mut f, p, &game.hands, Some(&features[p.index()]))?;
        made.push(path);
        let path = dir.join(format!("buckets_p{n}_groups.csv"));
        let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
        write_groups(&mut f, &mapping, p, &game.hands, &features[p.index()])?;
        made.push(path);
        log::info!("{p}: {} of {} buckets non-empty", mapping.non_empty(p), mapping.k());
    }
    Ok(made)
}
