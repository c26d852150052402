//! Hyper-parameter importance from a table of final validation losses:
//! standardization, conditional level means, dispersion, hierarchical
//! ranking and interaction detection.

mod output;
mod rank;
mod table;

pub use output::{write_interactions_csv, write_plot_data, write_ranking_csv, INTERACTIONS_HEADER, PLOT_HEADER, RANKING_HEADER};
pub use rank::{
    dispersion, hierarchical_select, interaction_report, level_means, rank_step, trail_interactions, ImportanceRanking, InteractionEntry,
    InteractionReport, LevelStats, RankStep,
};
pub use table::{compare_levels, render_conditioning, standardize, Conditioning, ResultTable, StandardizedTable, TableRow, FACTOR_NAMES};
