mod auc;
mod pipeline;
mod report;

pub use auc::auc;
pub use pipeline::{
    evaluate, fit, run_combined_baseline, score, Approach, Fitted, FittedModel, LabeledSplit,
    PipelineConfig, SnnSettings,
};
pub use report::{
    read_eval_reports, results_table, write_eval_reports, ConfigEcho, EvalReport, ModelKind,
    ResultsTable, ScoredSet,
};
