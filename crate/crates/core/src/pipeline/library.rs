use std::collections::BTreeMap;

use crate::geom::Vec3;
use crate::model::Mesh;
use crate::retrieval::{
    build_index, load_asset_mesh, AssetCategory, AssetRecord, Catalog, Embedder, EmbeddingIndex, EmbeddingSidecar,
    Mount, RetrievalError,
};

/// Catalog, its embedding index and a mesh cache.
pub struct AssetLibrary {
    pub catalog: Catalog,
    pub index: EmbeddingIndex,
    pub embedder: Box<dyn Embedder>,
    meshes: BTreeMap<String, Mesh>,
}

impl AssetLibrary {
    pub fn new(catalog: Catalog, embedder: Box<dyn Embedder>) -> Result<Self, RetrievalError> {
        AssetLibrary::with_sidecar(catalog, embedder, None)
    }

    /// Like [`AssetLibrary::new`], reusing precomputed vectors when the
    /// sidecar was written by the same embedder.
    pub fn with_sidecar(
        catalog: Catalog,
        embedder: Box<dyn Embedder>,
        sidecar: Option<&EmbeddingSidecar>,
    ) -> Result<Self, RetrievalError> {
        let index = build_index(&catalog.records, embedder.as_ref(), sidecar)?;
        Ok(AssetLibrary {
            catalog,
            index,
            embedder,
            meshes: BTreeMap::new(),
        })
    }

    /// Best match for `query`. Among objects, the best one with the wanted
    /// mount wins when there is one.
    pub fn best(
        &self,
        category: AssetCategory,
        query: &str,
        mount: Option<Mount>,
    ) -> Result<&AssetRecord, RetrievalError> {
        let hits = self
            .index
            .search(self.embedder.as_ref(), query, category, self.index.len().max(1))?;
        let record = |id: &str| self.catalog.get(id).expect("indexed ids come from the catalog");
        let pick = mount
            .and_then(|m| hits.iter().find(|(id, _)| record(id).mount() == m))
            .unwrap_or(&hits[0]);
        log::debug!("{category} `{query}` -> {} ({:.3})", pick.0, pick.1);
        Ok(record(&pick.0))
    }

    /// Normalized mesh and native size of a geometric asset.
    pub fn mesh(&mut self, record: &AssetRecord) -> Result<(Mesh, Vec3), RetrievalError> {
        let size = record.native_size.ok_or_else(|| RetrievalError::InvalidRecord {
            id: record.id.clone(),
            reason: "no native size".into(),
        })?;
        if let Some(m) = self.meshes.get(&record.id) {
            return Ok((m.clone(), size));
        }
        let m = load_asset_mesh(&self.catalog, record)?;
        self.meshes.insert(record.id.clone(), m.clone());
        Ok((m, size))
    }
}
