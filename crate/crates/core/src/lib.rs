//! Ranking the people in a scene by importance.
//!
//! Each person is described by feature channels (spatial layout, attention,
//! and optionally action and appearance embeddings). Per channel, persons
//! exchange pairwise messages and receive a prior from the spatial regions
//! around them; a damped power iteration turns that hybrid graph into
//! per-channel scores, which are then fused into one ranking.
//!
//! ```
//! use personrank::{rank_scene, prepare_scenes, FeatureConfig, RankConfig, WeightSet};
//! use personrank::synth::{generate_scene, SynthSpec};
//!
//! let scene = generate_scene(&SynthSpec::default()).unwrap();
//! let prepared = &prepare_scenes(&[scene], &FeatureConfig::default()).unwrap()[0];
//! let mut weights = WeightSet::default();
//! weights.channels = vec![personrank::ChannelId::Spatial];
//! weights.q = vec![1.0];
//! let ranking = rank_scene(&prepared.scene, &prepared.bundles, &weights, &RankConfig::default()).unwrap();
//! assert_eq!(ranking.fused.ranking.len(), prepared.scene.persons.len());
//! ```
//!
//! The `examples/` directory has one runnable program per capability.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod graph;
pub mod message;
pub mod rank;
pub mod scene;
pub mod synth;
pub mod trainer;
pub mod weights;

pub use dataset::{prepare_scenes, PreparedScene};
pub use error::{Error, Result};
pub use eval::{run_eval, EvalConfig, EvalReport};
pub use features::{build_bundles, FeatureBundle, FeatureConfig};
pub use graph::{InteractionMatrix, MatrixKind};
pub use message::ChannelId;
pub use rank::{rank_scene, solve_channel, RankConfig, SceneRanking, ScoreVector, SelectBy, SolveConfig};
pub use scene::{read_scenes, validate_scene, write_scenes, BoundingBox, PersonObservation, Scene};
pub use trainer::{tune_validation, TrainConfig, TrainReport};
pub use weights::WeightSet;
