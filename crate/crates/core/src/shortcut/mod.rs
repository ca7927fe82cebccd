//! Randomized shortcut construction and quality measurement.

mod build;
mod params;
mod quality;
pub(crate) mod sampling;

pub use build::{
    build, build_centralized, build_odd, build_with, BuildMode, BuildOptions, PartShortcut,
    Provenance, ShortcutSet,
};
pub(crate) use build::mode_for;
pub use params::{classify_parts, compute_params, ShortcutParams};
pub use quality::{
    augmented_dilation, build_and_measure, measure_quality, recount_congestion, Dilation,
    PartQuality, QualityReport,
};
pub use sampling::uniform;
