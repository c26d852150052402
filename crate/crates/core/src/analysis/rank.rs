use std::cmp::Ordering;

use super::table::{render_conditioning, Conditioning, StandardizedTable};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LevelStats {
    pub factor: String,
    pub level: String,
    /// `None` when no row under the conditioning has this level.
    pub mean_std_loss: Option<f64>,
    pub support: usize,
}

/// Mean standardized loss per level of `factor` over rows matching `cond`.
/// Every level present anywhere in the table is reported.
pub fn level_means(st: &StandardizedTable, factor: &str, cond: &[(String, String)]) -> Result<Vec<LevelStats>> {
    let table = st.table();
    let k = table.factor_index(factor)?;
    let mut fixed = Vec::with_capacity(cond.len());
    for (f, level) in cond {
        if f == factor {
            return Err(Error::config(format!("factor `{factor}` cannot be conditioned on itself")));
        }
        fixed.push((table.factor_index(f)?, level.as_str()));
    }
    let levels = table.levels(factor)?;
    let mut sums = vec![0.0; levels.len()];
    let mut counts = vec![0usize; levels.len()];
    let mut matched = 0;
    for (row, z) in table.rows().iter().zip(st.std_loss()) {
        if fixed.iter().all(|&(j, l)| row.levels[j] == l) {
            matched += 1;
            let i = levels.iter().position(|l| *l == row.levels[k]).expect("level listed");
            sums[i] += z;
            counts[i] += 1;
        }
    }
    if matched == 0 {
        return Err(Error::EmptyCondition(render_conditioning(cond)));
    }
    Ok(levels
        .into_iter()
        .enumerate()
        .map(|(i, level)| LevelStats {
            factor: factor.to_string(),
            level,
            mean_std_loss: (counts[i] > 0).then(|| sums[i] / counts[i] as f64),
            support: counts[i],
        })
        .collect())
}

/// Range and population variance of the level means that exist.
pub fn dispersion(stats: &[LevelStats]) -> Result<(f64, f64)> {
    let means: Vec<f64> = stats.iter().filter_map(|s| s.mean_std_loss).collect();
    if means.is_empty() {
        return Err(Error::data("dispersion needs at least one supported level"));
    }
    let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = means.iter().copied().fold(f64::INFINITY, f64::min);
    let mu = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|m| (m - mu).powi(2)).sum::<f64>() / means.len() as f64;
    Ok((max - min, var))
}

/// Outcome of one ranking step.
#[derive(Debug, Clone, PartialEq)]
pub struct RankStep {
    pub factor: String,
    pub level: String,
    /// Smallest eligible level mean.
    pub score: f64,
    pub range: f64,
    pub std_variance: f64,
    pub support: usize,
    /// The ranking was computed without the conditioning trail.
    pub low_support: bool,
    /// Conditioning under which this step was scored.
    pub conditioning: Conditioning,
    /// Level means of every candidate factor at this step.
    pub candidates: Vec<Vec<LevelStats>>,
}

/// Scores one factor from its level means: argmin over levels with enough
/// support, first level in natural order on ties.
fn score_levels(stats: &[LevelStats], min_support: usize) -> Option<(usize, f64, f64, f64)> {
    let eligible: Vec<LevelStats> = stats.iter().filter(|s| s.support >= min_support && s.mean_std_loss.is_some()).cloned().collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in stats.iter().enumerate() {
        if s.support < min_support {
            continue;
        }
        if let Some(m) = s.mean_std_loss {
            if best.is_none_or(|(_, b)| m < b) {
                best = Some((i, m));
            }
        }
    }
    let (i, score) = best?;
    let (range, var) = dispersion(&eligible).ok()?;
    Some((i, score, range, var))
}

fn better(a: (f64, f64, &str), b: (f64, f64, &str)) -> bool {
    match a.0.total_cmp(&b.0) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => match a.1.total_cmp(&b.1) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => a.2 < b.2,
        },
    }
}

/// Picks the undetermined factor whose best eligible level has the lowest
/// mean standardized loss. Ties go to the larger range, then the smaller name.
pub fn rank_step(st: &StandardizedTable, undetermined: &[String], cond: &[(String, String)], min_support: usize) -> Result<RankStep> {
    if undetermined.is_empty() {
        return Err(Error::config("rank_step needs at least one undetermined factor"));
    }
    let mut candidates = Vec::with_capacity(undetermined.len());
    let mut best: Option<RankStep> = None;
    for factor in undetermined {
        let stats = level_means(st, factor, cond)?;
        if let Some((i, score, range, var)) = score_levels(&stats, min_support) {
            let wins = best.as_ref().is_none_or(|b| better((score, range, factor), (b.score, b.range, &b.factor)));
            if wins {
                best = Some(RankStep {
                    factor: factor.clone(),
                    level: stats[i].level.clone(),
                    score,
                    range,
                    std_variance: var,
                    support: stats[i].support,
                    low_support: false,
                    conditioning: cond.to_vec(),
                    candidates: Vec::new(),
                });
            }
        }
        candidates.push(stats);
    }
    let mut step = best.ok_or(Error::SupportExhausted { min_support })?;
    step.candidates = candidates;
    Ok(step)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceRanking {
    pub min_support: usize,
    pub steps: Vec<RankStep>,
}

impl ImportanceRanking {
    pub fn order(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.factor.as_str()).collect()
    }
}

/// Repeated `rank_step`, fixing each winner at its best level. When the
/// conditioned rows run out, the remaining factors are ordered by their
/// unconditional scores and flagged `low_support`.
pub fn hierarchical_select(st: &StandardizedTable, min_support: usize) -> Result<ImportanceRanking> {
    let mut remaining: Vec<String> = st.table().factors().to_vec();
    let mut cond: Conditioning = Vec::new();
    let mut steps = Vec::new();
    while !remaining.is_empty() {
        match rank_step(st, &remaining, &cond, min_support) {
            Ok(step) => {
                remaining.retain(|f| *f != step.factor);
                cond.push((step.factor.clone(), step.level.clone()));
                steps.push(step);
            }
            Err(Error::SupportExhausted { .. } | Error::EmptyCondition(_)) => {
                steps.extend(unconditional_fallback(st, &remaining, min_support)?);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ImportanceRanking { min_support, steps })
}

fn unconditional_fallback(st: &StandardizedTable, remaining: &[String], min_support: usize) -> Result<Vec<RankStep>> {
    let mut scored = Vec::with_capacity(remaining.len());
    for factor in remaining {
        let stats = level_means(st, factor, &[])?;
        let (i, score, range, var) = score_levels(&stats, min_support)
            .or_else(|| score_levels(&stats, 1))
            .ok_or_else(|| Error::Internal(format!("factor `{factor}` has no rows")))?;
        scored.push(RankStep {
            factor: factor.clone(),
            level: stats[i].level.clone(),
            score,
            range,
            std_variance: var,
            support: stats[i].support,
            low_support: true,
            conditioning: Vec::new(),
            candidates: vec![stats],
        });
    }
    scored.sort_by(|a, b| {
        if better((a.score, a.range, &a.factor), (b.score, b.range, &b.factor)) {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    });
    Ok(scored)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionEntry {
    pub conditioning: Conditioning,
    pub level: String,
    pub mean_std_loss: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionReport {
    pub factor: String,
    pub entries: Vec<InteractionEntry>,
    /// The argmin level differs between at least two conditionings.
    pub flagged: bool,
}

pub fn interaction_report(st: &StandardizedTable, factor: &str, conditionings: &[Conditioning], min_support: usize) -> Result<InteractionReport> {
    let mut entries = Vec::with_capacity(conditionings.len());
    for cond in conditionings {
        let stats = level_means(st, factor, cond)?;
        let (i, mean, _, _) = score_levels(&stats, min_support).ok_or(Error::SupportExhausted { min_support })?;
        entries.push(InteractionEntry {
            conditioning: cond.clone(),
            level: stats[i].level.clone(),
            mean_std_loss: mean,
            support: stats[i].support,
        });
    }
    let flagged = entries.windows(2).any(|w| w[0].level != w[1].level);
    Ok(InteractionReport {
        factor: factor.to_string(),
        entries,
        flagged,
    })
}

/// For every factor ranked after the first step, compares its argmin under
/// each conditioning prefix of the trail where it was still undetermined.
/// Prefixes without enough support are skipped.
pub fn trail_interactions(st: &StandardizedTable, ranking: &ImportanceRanking) -> Result<Vec<InteractionReport>> {
    let trail: Vec<(String, String)> = ranking
        .steps
        .iter()
        .filter(|s| !s.low_support)
        .map(|s| (s.factor.clone(), s.level.clone()))
        .collect();
    let mut reports = Vec::new();
    for (pos, step) in ranking.steps.iter().enumerate().skip(1) {
        let depth = pos.min(trail.len());
        let mut conds = Vec::new();
        for k in 0..=depth {
            let cond = trail[..k].to_vec();
            if cond.iter().any(|(f, _)| *f == step.factor) {
                break;
            }
            let ok = level_means(st, &step.factor, &cond)
                .ok()
                .and_then(|stats| score_levels(&stats, ranking.min_support))
                .is_some();
            if ok {
                conds.push(cond);
            }
        }
        if conds.len() >= 2 {
            reports.push(interaction_report(st, &step.factor, &conds, ranking.min_support)?);
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{standardize, ResultTable, TableRow};

    fn table(factors: &[&str], rows: &[(&[&str], f64)]) -> StandardizedTable {
        let rows = rows
            .iter()
            .enumerate()
            .map(|(i, (l, v))| TableRow {
                config_id: format!("c{i}"),
                levels: l.iter().map(|s| s.to_string()).collect(),
                loss: *v,
            })
            .collect();
        standardize(ResultTable::new(factors.iter().map(|s| s.to_string()).collect(), rows).unwrap()).unwrap()
    }

    fn cond(pairs: &[(&str, &str)]) -> Conditioning {
        pairs.iter().map(|(f, l)| (f.to_string(), l.to_string())).collect()
    }

    #[test]
    fn equal_means_unequal_spread() {
        let st = table(&["h"], &[(&["A"], 1.0), (&["A"], 3.0), (&["B"], 2.0)]);
        let stats = level_means(&st, "h", &[]).unwrap();
        assert!(stats[0].mean_std_loss.unwrap().abs() < 1e-12);
        assert!(stats[1].mean_std_loss.unwrap().abs() < 1e-12);
        assert_eq!((stats[0].support, stats[1].support), (2, 1));
    }

    #[test]
    fn single_row_condition_and_missing_level() {
        let st = table(&["h", "g"], &[(&["a", "x"], 1.0), (&["b", "x"], 2.0), (&["a", "y"], 4.0)]);
        let stats = level_means(&st, "h", &cond(&[("g", "y")])).unwrap();
        assert_eq!(stats[0].mean_std_loss, Some(st.std_loss()[2]));
        assert_eq!((stats[1].support, stats[1].mean_std_loss), (0, None));
        assert!(matches!(level_means(&st, "h", &cond(&[("g", "z")])), Err(Error::EmptyCondition(_))));
        assert!(level_means(&st, "h", &cond(&[("h", "a")])).is_err());
    }

    #[test]
    fn dispersion_examples() {
        let mk = |m: &[f64]| -> Vec<LevelStats> {
            m.iter()
                .map(|&v| LevelStats { factor: "h".into(), level: v.to_string(), mean_std_loss: Some(v), support: 1 })
                .collect()
        };
        let (r, v) = dispersion(&mk(&[-0.5, 0.0, 0.5])).unwrap();
        assert!((r - 1.0).abs() < 1e-15 && (v - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(dispersion(&mk(&[0.3])).unwrap(), (0.0, 0.0));
        assert_eq!(dispersion(&mk(&[-0.5, 0.0, 0.5, 0.5])).unwrap().0, 1.0);
        let empty = vec![LevelStats { factor: "h".into(), level: "a".into(), mean_std_loss: None, support: 0 }];
        assert!(dispersion(&empty).is_err());
    }

    #[test]
    fn tie_goes_to_larger_range() {
        // Both factors reach the same minimum; g spreads further.
        let st = table(
            &["h", "g"],
            &[(&["a", "x"], 0.0), (&["a", "y"], 0.0), (&["b", "x"], 1.0), (&["b", "y"], 3.0)],
        );
        let fs = vec!["h".to_string(), "g".to_string()];
        let step = rank_step(&st, &fs, &[], 1).unwrap();
        // h: a=0.0, b=2.0 ; g: x=0.5, y=1.5 -> h wins outright
        assert_eq!((step.factor.as_str(), step.level.as_str()), ("h", "a"));

        let st = table(&["h", "g"], &[(&["a", "x"], 0.0), (&["b", "y"], 2.0), (&["b", "x"], 0.0), (&["a", "y"], 1.0)]);
        // h: a=0.5, b=1.0 ; g: x=0.0, y=1.5 -> g wins
        let step = rank_step(&st, &fs, &[], 1).unwrap();
        assert_eq!(step.factor, "g");

        let st = table(&["h", "g"], &[(&["a", "x"], 0.0), (&["a", "y"], 2.0), (&["b", "x"], 2.0), (&["b", "y"], 4.0)]);
        // h: a=1, b=3 ; g: x=1, y=3 -> equal everything, name decides
        assert_eq!(rank_step(&st, &fs, &[], 1).unwrap().factor, "g");
    }

    #[test]
    fn min_support_excludes_levels() {
        let st = table(&["h"], &[(&["a"], 0.0), (&["b"], 1.0), (&["b"], 1.2), (&["a"], 5.0), (&["c"], -3.0)]);
        let step = rank_step(&st, &["h".into()], &[], 2).unwrap();
        assert_eq!(step.level, "b");
        assert!(matches!(rank_step(&st, &["h".into()], &[], 3), Err(Error::SupportExhausted { min_support: 3 })));
    }

    #[test]
    fn single_factor_ranking() {
        let st = table(&["h"], &[(&["a"], 3.0), (&["b"], 1.0), (&["c"], 2.0)]);
        let r = hierarchical_select(&st, 1).unwrap();
        assert_eq!(r.order(), ["h"]);
        assert_eq!(r.steps[0].level, "b");
    }

    #[test]
    fn fallback_flags_low_support() {
        let st = table(
            &["h", "g", "k"],
            &[(&["a", "x", "p"], 0.0), (&["a", "y", "q"], 0.1), (&["b", "x", "q"], 1.0), (&["b", "y", "p"], 1.1), (&["a", "x", "q"], 0.2)],
        );
        let r = hierarchical_select(&st, 2).unwrap();
        assert_eq!(r.steps.len(), 3);
        assert_eq!(r.steps[0].factor, "h");
        assert!(!r.steps[0].low_support);
        assert!(r.steps[1..].iter().any(|s| s.low_support));
        let mut names = r.order();
        names.sort();
        assert_eq!(names, ["g", "h", "k"]);
    }

    #[test]
    fn crossover_is_flagged_additive_is_not() {
        let cross = table(&["h", "g"], &[(&["a", "x"], 0.0), (&["b", "x"], 1.0), (&["a", "y"], 1.0), (&["b", "y"], 0.0)]);
        let conds = vec![cond(&[("g", "x")]), cond(&[("g", "y")])];
        assert!(interaction_report(&cross, "h", &conds, 1).unwrap().flagged);
        let add = table(&["h", "g"], &[(&["a", "x"], 0.0), (&["b", "x"], 1.0), (&["a", "y"], 2.0), (&["b", "y"], 3.0)]);
        assert!(!interaction_report(&add, "h", &conds, 1).unwrap().flagged);
    }
}
