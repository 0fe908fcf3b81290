//! Image mining for grayscale scan classification: preprocessing, Canny edge
//! detection, region features, maximal frequent itemsets over an FP-tree
//! and a rule-attribute decision tree classifier.

pub mod edge;
pub mod fpm;
pub mod harc;
pub mod label;
pub mod metrics;
pub mod prep;
pub mod raster;
pub mod segment;

pub use label::ClassLabel;
