use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::agents::GridSize;
use crate::agents::{RemoteBackendConfig, DEFAULT_MAX_RETRIES};
use crate::floorplan::{
    validate_structure_dims, BeamSection, ColumnGridSpec, DEFAULT_ARC_SEGMENTS, DEFAULT_WALL_HEIGHT,
    DEFAULT_WALL_THICKNESS,
};
use crate::layout::PlacementConfig;
use crate::openings::{DEFAULT_DOOR_SIZE, DEFAULT_WINDOW_SIZE};
use crate::retrieval::{Embedder, MockEmbedder, RemoteEmbedder, RemoteEmbedderConfig};

/// Soft cap on rooms per scene.
pub const MAX_ROOMS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Obj,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "obj" => Ok(Format::Obj),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format `{other}` (json, obj, svg)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    #[default]
    Scripted,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackendConfig {
    pub kind: BackendChoice,
    /// Fixture file for the scripted backend; the built-in set when absent.
    pub fixtures: Option<PathBuf>,
    pub remote: RemoteBackendConfig,
    pub max_retries: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendChoice::Scripted,
            fixtures: None,
            remote: RemoteBackendConfig::default(),
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedderChoice {
    #[default]
    Mock,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbedderConfig {
    pub kind: EmbedderChoice,
    pub remote: Option<RemoteEmbedderConfig>,
}

impl EmbedderConfig {
    pub fn build(&self) -> Result<Box<dyn Embedder>, PipelineError> {
        match self.kind {
            EmbedderChoice::Mock => Ok(Box::new(MockEmbedder::default())),
            EmbedderChoice::Remote => {
                let cfg = self
                    .remote
                    .clone()
                    .ok_or_else(|| PipelineError::Config("embedder.remote settings are required".into()))?;
                Ok(Box::new(RemoteEmbedder::new(cfg)))
            }
        }
    }
}

/// Structural dimensions the agents do not choose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StructureConfig {
    pub wall_thickness: f64,
    pub wall_height: f64,
    pub arc_segments: usize,
    pub column_radius: f64,
    pub column_height: f64,
    pub beam_width: f64,
    pub beam_height: f64,
    pub ground_margin: f64,
    /// Width and height used when an agent leaves a door unsized.
    pub door_size: [f64; 2],
    pub window_size: [f64; 2],
}

impl Default for StructureConfig {
    fn default() -> Self {
        let g = ColumnGridSpec::new(2, 2, 1.0);
        StructureConfig {
            wall_thickness: DEFAULT_WALL_THICKNESS,
            wall_height: DEFAULT_WALL_HEIGHT,
            arc_segments: DEFAULT_ARC_SEGMENTS,
            column_radius: g.column_radius,
            column_height: g.column_height,
            beam_width: g.beam_section.width,
            beam_height: g.beam_section.height,
            ground_margin: g.margin,
            door_size: [DEFAULT_DOOR_SIZE.0, DEFAULT_DOOR_SIZE.1],
            window_size: [DEFAULT_WINDOW_SIZE.0, DEFAULT_WINDOW_SIZE.1],
        }
    }
}

impl StructureConfig {
    pub fn grid(&self, size: &GridSize) -> ColumnGridSpec {
        ColumnGridSpec {
            rows: size.rows,
            cols: size.cols,
            spacing: size.spacing,
            column_radius: self.column_radius,
            column_height: self.column_height,
            beam_section: BeamSection {
                width: self.beam_width,
                height: self.beam_height,
            },
            margin: self.ground_margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Catalog JSON; the built-in demo catalog when absent.
    pub catalog_path: Option<PathBuf>,
    pub backend: BackendConfig,
    pub embedder: EmbedderConfig,
    pub structure: StructureConfig,
    pub placement: PlacementConfig,
    pub output_dir: PathBuf,
    /// Reserved; every stage is deterministic.
    pub random_seed: u64,
    pub formats: Vec<Format>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            catalog_path: None,
            backend: BackendConfig::default(),
            embedder: EmbedderConfig::default(),
            structure: StructureConfig::default(),
            placement: PlacementConfig::default(),
            output_dir: PathBuf::from("out"),
            random_seed: 0,
            formats: vec![Format::Json, Format::Obj, Format::Svg],
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = PipelineConfig::from_toml(&text)?;
        // Relative paths in a config file are relative to the file.
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(c) = &cfg.catalog_path {
            if c.is_relative() {
                cfg.catalog_path = Some(base.join(c));
            }
        }
        if let Some(f) = &cfg.backend.fixtures {
            if f.is_relative() {
                cfg.backend.fixtures = Some(base.join(f));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if let Some(c) = &self.catalog_path {
            if !c.is_file() {
                return bad(format!("catalog `{}` does not exist", c.display()));
            }
        }
        if let Some(f) = &self.backend.fixtures {
            if !f.is_file() {
                return bad(format!("fixtures `{}` do not exist", f.display()));
            }
        }
        if self.formats.is_empty() {
            return bad("formats must not be empty".into());
        }
        if self.backend.max_retries == 0 {
            return bad("backend.max_retries must be at least 1".into());
        }
        let s = &self.structure;
        validate_structure_dims(s.wall_thickness, s.wall_height).map_err(|e| PipelineError::Config(e.to_string()))?;
        if !(3..=256).contains(&s.arc_segments) {
            return bad(format!("arc_segments {} outside [3, 256]", s.arc_segments));
        }
        for (name, [w, h]) in [("door_size", s.door_size), ("window_size", s.window_size)] {
            if !(w > 0.0 && h > 0.0) {
                return bad(format!("structure.{name} must be positive"));
            }
        }
        self.structure
            .grid(&GridSize {
                rows: 2,
                cols: 2,
                spacing: 4.0,
            })
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        self.placement.validate().map_err(PipelineError::Config)?;
        if self.output_dir.exists() && !self.output_dir.is_dir() {
            return bad(format!("output `{}` is not a directory", self.output_dir.display()));
        }
        Ok(())
    }
}
