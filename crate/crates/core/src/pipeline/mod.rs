//! End-to-end workflow: datasets from a corpus, model application, and
//! comparison of exact, sampling and model rankings.

pub mod compare;
pub mod dataset;
pub mod predict;
pub mod report;

pub use compare::{
    compare, summarize, CompareConfig, ComparisonRun, ExactReference, MethodSummary, NamedModel,
    RankPredictor,
};
pub use dataset::{make_dataset, make_datasets, model_inputs, Dataset, DatasetRow};
pub use predict::{predict, score_inputs, Prediction};
pub use report::{read_reports, read_reports_file, write_reports, write_summary};
