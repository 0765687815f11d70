//! Event-camera toolkit: frame-video to event-stream simulation, voxel-grid
//! encoding, and a small self-contained training lab for motion-augmented
//! event models (channel attention, channel-to-temporal folding, and
//! flow-to-event feature distillation).
//!
//! The crate is organized around the pipeline:
//!
//! ```text
//! frames (PGM + timestamps) --simulate--> EventStream --encode--> VoxelClip
//!                                                                    |
//!                                              motionlab (train/eval)+
//! ```
//!
//! All randomized paths draw from a single seeded generator per call so that
//! every output is reproducible bit-for-bit from (inputs, config, seed).

pub mod encode;
pub mod experiment;
pub mod io;
pub mod motionlab;
pub mod simulate;

pub use encode::{clip_values, make_clip, voxel_grid, VoxelClip, VoxelGrid};
pub use simulate::{
    adaptive_upsample, log_intensity, simulate_events, Event, EventStream, FrameSequence,
    Polarity, SimulatorConfig,
};
