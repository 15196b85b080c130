//! Experiment drivers: bit-flip scans and transition detection, landscape
//! rasters, the perturbative comparison, CNOT folding, output files and the
//! command-line front end.

mod cli;
mod fold;
mod landscape;
mod output;
mod scan;
mod transition;

pub use cli::{cli_run, Settings};
pub use fold::{
    fold_experiment, fold_experiment_with, FoldReport, FOLD_DEFAULT_M_MAX, FOLD_DEFAULT_NOISE, FOLD_DEFAULT_P2,
};
pub use landscape::{
    dimer2_minima, landscape_raster, landscape_raster_for, periodic_grid, periodic_grid_with_step, refine_basins,
    Basin, DimerMinimum, GridPoint, LandscapeRaster,
};
pub use output::{
    write_branches_csv, write_distribution_csv, write_file, write_paired_csv, write_scan_csv, Manifest,
};
pub use scan::{
    compare_perturbative, linspace, scan_noise, scan_noise_with, scaled_grid, validate_grid, PairedScan,
    ScanMetadata, ScanRow, ScanTable, DEFAULT_CLUSTER_TOL,
};
pub use transition::{
    continue_branches, detect_transition, link_cluster_tracks, BranchCurves, ClusterTracks, TransitionMethod,
    TransitionReport, TransitionSettings,
};
