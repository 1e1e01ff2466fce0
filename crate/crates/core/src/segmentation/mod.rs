//! Binary mask to labelled objects: flood-fill components, exact distance
//! transform, watershed splitting of touching objects, and size filtering.

mod components;
mod distance;
mod filter;
mod pipeline;
mod watershed;

pub use components::connected_components;
pub use distance::{distance_transform, squared_distance_transform, DistanceMap};
pub use filter::{filter_small, filter_small_with_mean, mean_area, touches_border, SizeFilter};
pub use pipeline::{segment_pipeline, SegmentationOutput, TileThreshold};
pub use watershed::{nearest_seed, watershed, watershed_with, WatershedOptions, DEFAULT_MERGE_TOLERANCE};
