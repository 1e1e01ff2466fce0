//! Separable Gaussian-process denoising for lattice images and a fully
//! unsupervised cell-segmentation pipeline built on top of it.

pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod gp;
pub mod io;
pub mod kernels;
pub mod mask;
pub mod segmentation;
pub mod synthetic;
pub mod thresholding;
pub mod tiling;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use gp::{GpHyperParams, GrayImage, PredictiveField};
pub use kernels::{AxisGrid, KernelFamily, KernelSpec};
pub use mask::{BinaryMask, LabelMask};
pub use segmentation::{segment_pipeline, SegmentationOutput};
