//! End-to-end driver: agent chain or prebuilt parameters in, scene graph
//! through four ordered stages, JSON/OBJ/SVG files out.

mod config;
pub mod demo;
mod export;
mod library;
mod run;
mod scene;
mod svg;

pub use config::{
    BackendChoice, BackendConfig, EmbedderChoice, EmbedderConfig, Format, PipelineConfig, StructureConfig, MAX_ROOMS,
};
pub use export::{export_json, export_mtl, export_obj, import_json, SCENE_SCHEMA_VERSION};
pub use library::AssetLibrary;
pub use run::{
    check_params, generate, generate_with, index_catalog, load_library, sha256_hex, sidecar_path, write_outputs, Input,
    Manifest, ManifestEntry, RunReport, MANIFEST_NAME,
};
pub use scene::{build_scene, BuiltScene, DrawnObject, DrawnOpening, LayoutSummary, PlanDrawing, RoomLabel};
pub use svg::{export_svg, wall_outlines, MM_PER_M};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Procedural stages, in the only order they may run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Floorplan,
    Materials,
    Openings,
    Layout,
}

impl Stage {
    pub const ORDER: [Stage; 4] = [Stage::Floorplan, Stage::Materials, Stage::Openings, Stage::Layout];
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Floorplan => "floorplan",
            Stage::Materials => "materials",
            Stage::Openings => "openings",
            Stage::Layout => "layout",
        })
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("params: {0}")]
    Params(String),
    #[error(transparent)]
    Chain(#[from] crate::agents::ChainError),
    /// `path` points into the structured parameters, e.g. `openings[2].target`.
    #[error("{stage} stage failed at `{path}`: {message}")]
    Stage {
        stage: Stage,
        path: String,
        message: String,
    },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl PipelineError {
    pub(crate) fn stage(stage: Stage, path: impl Into<String>, message: impl std::fmt::Display) -> Self {
        PipelineError::Stage {
            stage,
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, e: impl std::fmt::Display) -> Self {
        PipelineError::Io {
            path: path.into(),
            message: e.to_string(),
        }
    }
}
