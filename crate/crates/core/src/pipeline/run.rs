use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    build_scene, demo, export_json, export_mtl, export_obj, export_svg, AssetLibrary, BackendChoice, Format,
    LayoutSummary, PipelineConfig, PipelineError, Stage,
};
use crate::agents::{
    run_chain, AgentBackend, AgentRole, RemoteBackend, ScriptedBackend, Section, SectionHook, StructuredParams,
};
use crate::retrieval::{build_index, AssetCategory, Catalog, EmbeddingSidecar, Mount};

pub const MANIFEST_NAME: &str = "manifest.json";

/// What a run starts from.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Description(String),
    Params(Box<StructuredParams>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Every file a run wrote, except the manifest itself.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn get(&self, path: &str) -> Option<&ManifestEntry> {
        self.files.iter().find(|f| f.path == path)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    pub stages: Vec<Stage>,
    /// Agent turns taken; zero for prebuilt parameters.
    pub turns: usize,
    pub adjacency_attempts: usize,
    pub layout: Vec<LayoutSummary>,
    pub params: StructuredParams,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Resolves every query an accepted section raises, so a section naming
/// something the catalog cannot serve fails on its own turn.
struct RetrievalHook<'a> {
    lib: &'a AssetLibrary,
}

impl SectionHook for RetrievalHook<'_> {
    fn on_section(&mut self, _: AgentRole, section: &Section) -> Result<(), String> {
        for (category, query) in section.queries() {
            let mount = (category == AssetCategory::Object).then_some(Mount::Floor);
            self.lib
                .best(category, &query, mount)
                .map_err(|e| format!("`{query}`: {e}"))?;
        }
        Ok(())
    }
}

/// Where `index-catalog` puts precomputed vectors for a catalog file.
pub fn sidecar_path(catalog: &Path) -> PathBuf {
    catalog.with_extension("embeddings.json")
}

fn read_sidecar(catalog: &Path) -> Result<Option<EmbeddingSidecar>, PipelineError> {
    let path = sidecar_path(catalog);
    if !path.is_file() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
}

pub fn load_library(cfg: &PipelineConfig) -> Result<AssetLibrary, PipelineError> {
    let (catalog, sidecar) = match &cfg.catalog_path {
        Some(p) => (
            Catalog::load(p).map_err(|e| PipelineError::Config(format!("catalog: {e}")))?,
            read_sidecar(p)?,
        ),
        None => (demo::catalog(), None),
    };
    let embedder = cfg.embedder.build()?;
    AssetLibrary::with_sidecar(catalog, embedder, sidecar.as_ref())
        .map_err(|e| PipelineError::Config(format!("catalog index: {e}")))
}

/// Embed a catalog and write its sidecar, returning the sidecar path.
pub fn index_catalog(cfg: &PipelineConfig, catalog: &Path) -> Result<(PathBuf, usize), PipelineError> {
    let records = Catalog::load(catalog).map_err(|e| PipelineError::Config(format!("catalog: {e}")))?;
    let embedder = cfg.embedder.build()?;
    let index = build_index(&records.records, embedder.as_ref(), None)
        .map_err(|e| PipelineError::Config(format!("catalog index: {e}")))?;
    let mut text = serde_json::to_string_pretty(&index.to_sidecar()).expect("sidecar serializes");
    text.push('\n');
    let path = sidecar_path(catalog);
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path.file_name().expect("sidecar has a file name").to_string_lossy();
    write_atomic(dir, &name, text.as_bytes())?;
    Ok((path, index.len()))
}

/// Run the four stages on `params` without writing anything.
pub fn check_params(cfg: &PipelineConfig, params: &StructuredParams) -> Result<super::BuiltScene, PipelineError> {
    cfg.validate()?;
    let mut lib = load_library(cfg)?;
    build_scene(params, &mut lib, cfg)
}

fn backend(cfg: &PipelineConfig) -> Result<Box<dyn AgentBackend>, PipelineError> {
    match cfg.backend.kind {
        BackendChoice::Scripted => {
            let b = match &cfg.backend.fixtures {
                Some(p) => ScriptedBackend::load(p),
                None => ScriptedBackend::from_json(demo::fixtures(demo::DEFAULT_DEMO).expect("built-in demo")),
            }
            .map_err(|e| PipelineError::Config(e.to_string()))?;
            Ok(Box::new(b))
        }
        BackendChoice::Remote => {
            let r = &cfg.backend.remote;
            if r.endpoint.is_empty() || r.model.is_empty() {
                return Err(PipelineError::Config("backend.remote needs endpoint and model".into()));
            }
            Ok(Box::new(RemoteBackend::new(r.clone())))
        }
    }
}

/// Render every requested artifact in memory.
fn render(cfg: &PipelineConfig, built: &super::BuiltScene, params: &StructuredParams) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut formats = cfg.formats.clone();
    formats.sort();
    formats.dedup();
    for f in formats {
        match f {
            Format::Json => files.push(("scene.json".to_string(), export_json(&built.graph))),
            Format::Obj => {
                files.push(("scene.obj".to_string(), export_obj(&built.graph, "scene.mtl")));
                files.push(("scene.mtl".to_string(), export_mtl(&built.graph)));
            }
            Format::Svg => files.push(("floorplan.svg".to_string(), export_svg(&built.drawing))),
        }
    }
    files.push(("params.json".to_string(), params.to_json().into_bytes()));
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

/// Run the agents (or take prebuilt parameters), the four stages and the
/// exports, then write everything atomically into the output directory.
pub fn generate(cfg: &PipelineConfig, input: Input) -> Result<RunReport, PipelineError> {
    cfg.validate()?;
    match input {
        Input::Description(_) => generate_with(cfg, input, Some(backend(cfg)?.as_mut())),
        Input::Params(_) => generate_with(cfg, input, None),
    }
}

/// [`generate`] with a caller-supplied agent backend, which a description
/// input requires.
pub fn generate_with(
    cfg: &PipelineConfig,
    input: Input,
    backend: Option<&mut dyn AgentBackend>,
) -> Result<RunReport, PipelineError> {
    cfg.validate()?;
    let mut lib = load_library(cfg)?;
    let (params, turns, attempts) = match input {
        Input::Params(p) => (*p, 0, 0),
        Input::Description(text) => {
            let backend =
                backend.ok_or_else(|| PipelineError::Config("a description needs an agent backend".into()))?;
            let mut hook = RetrievalHook { lib: &lib };
            let run = run_chain(&text, backend, &mut hook, cfg.backend.max_retries)?;
            log::info!("agents finished in {} turns", run.turns.len());
            (run.params, run.turns.len(), run.adjacency_attempts)
        }
    };
    let built = build_scene(&params, &mut lib, cfg)?;
    debug_assert_eq!(built.stages, Stage::ORDER);
    let files = render(cfg, &built, &params);
    let manifest = write_outputs(&cfg.output_dir, &files)?;
    Ok(RunReport {
        out_dir: cfg.output_dir.clone(),
        manifest,
        stages: built.stages,
        turns,
        adjacency_attempts: attempts,
        layout: built.layout,
        params,
    })
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, PipelineError> {
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| PipelineError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| PipelineError::io(&target, e))?;
    tmp.as_file().sync_all().map_err(|e| PipelineError::io(&target, e))?;
    tmp.persist(&target).map_err(|e| PipelineError::io(&target, e.error))?;
    Ok(target)
}

/// Write `files` and a manifest of their hashes. On any failure the files
/// written so far are removed.
pub fn write_outputs(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<Manifest, PipelineError> {
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    let mut written: Vec<PathBuf> = Vec::new();
    let mut manifest = Manifest::default();
    let result = (|| {
        for (name, bytes) in files {
            written.push(write_atomic(dir, name, bytes)?);
            manifest.files.push(ManifestEntry {
                path: name.clone(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len() as u64,
            });
        }
        manifest.files.sort_by(|a, b| a.path.cmp(&b.path));
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        written.push(write_atomic(dir, MANIFEST_NAME, text.as_bytes())?);
        Ok(())
    })();
    if let Err(e) = result {
        for p in &written {
            let _ = std::fs::remove_file(p);
        }
        return Err(e);
    }
    Ok(manifest)
}
