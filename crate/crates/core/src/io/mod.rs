//! File formats and rigid transforms.

pub mod config;
pub mod kv;
pub mod map_file;
pub mod pose;
pub mod poses;
pub mod scan;
pub mod truth;

pub use config::{format_map_config, parse_map_config, read_map_config, write_map_config};
pub use map_file::{decode_map, deserialize_map, encode_map, serialize_map};
pub use pose::{transform_points, Pose};
pub use poses::{read_poses, write_poses};
pub use scan::{read_scan, write_scan};
pub use truth::{read_truth, write_truth, GroundTruth};
