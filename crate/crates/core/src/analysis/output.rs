use std::path::{Path, PathBuf};

use super::rank::{ImportanceRanking, InteractionReport};
use super::table::render_conditioning;
use crate::{Error, Result};

pub const RANKING_HEADER: [&str; 8] = ["step", "factor", "level", "score", "range", "std_variance", "support", "low_support"];
pub const PLOT_HEADER: [&str; 4] = ["factor", "level", "mean_std_loss", "conditioning"];
pub const INTERACTIONS_HEADER: [&str; 6] = ["factor", "conditioning", "argmin_level", "mean_std_loss", "support", "flagged"];

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(Error::at(path))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn write_ranking_csv(path: &Path, ranking: &ImportanceRanking) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RANKING_HEADER)?;
    for (k, s) in ranking.steps.iter().enumerate() {
        w.write_record([
            (k + 1).to_string(),
            s.factor.clone(),
            s.level.clone(),
            s.score.to_string(),
            s.range.to_string(),
            s.std_variance.to_string(),
            s.support.to_string(),
            s.low_support.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One `step_<k>.csv` per ranking step with the level means of every
/// candidate factor under that step's conditioning. Returns the paths.
pub fn write_plot_data(dir: &Path, ranking: &ImportanceRanking) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(Error::at(dir))?;
    let mut paths = Vec::new();
    for (k, s) in ranking.steps.iter().enumerate() {
        let path = dir.join(format!("step_{}.csv", k + 1));
        let mut w = writer(&path)?;
        w.write_record(PLOT_HEADER)?;
        let cond = render_conditioning(&s.conditioning);
        for stats in &s.candidates {
            for ls in stats {
                let mean = ls.mean_std_loss.map(|m| m.to_string()).unwrap_or_default();
                w.write_record([ls.factor.as_str(), &ls.level, &mean, &cond])?;
            }
        }
        w.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn write_interactions_csv(path: &Path, reports: &[InteractionReport]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(INTERACTIONS_HEADER)?;
    for r in reports {
        for e in &r.entries {
            w.write_record([
                r.factor.clone(),
                render_conditioning(&e.conditioning),
                e.level.clone(),
                e.mean_std_loss.to_string(),
                e.support.to_string(),
                r.flagged.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
