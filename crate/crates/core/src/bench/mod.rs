//! Experiment harness: seeded corruption of a dataset, the method grid,
//! report tables, the checkerboard study and the scale sweep.

mod checker;
mod hash;
mod report;
mod run;
mod spec;
mod sweep;

pub use checker::{
    checkerboard_csv, checkerboard_regions, checkerboard_study, horizontal_bands,
    make_checkerboard, regional_psnr, RegionalResult, CHECKERBOARD_REGION_HEIGHT,
    CHECKERBOARD_TILES, CHECKERBOARD_WIDTH,
};
pub use hash::Fnv1a;
pub use report::{MeanRow, ReportRow, ReportTable, META_TXT, RESULTS_CSV, RUNTIMES_CSV, SUMMARY_CSV, TABLE_TXT};
pub use run::{
    derive_seed, load_dataset, load_images, report_meta, run_cells, run_experiment,
    run_experiment_with, CLASSIC_IMAGES,
};
pub use spec::{Dataset, ExperimentSpec};
pub use sweep::{scale_sweep, sweep_csv, SweepRow};
