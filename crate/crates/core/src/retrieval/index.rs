use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AssetCategory, AssetRecord, Embedder, RetrievalError};

/// Doors and windows live apart from other objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    Object,
    DoorWindow,
    Material,
}

impl From<AssetCategory> for Partition {
    fn from(c: AssetCategory) -> Self {
        match c {
            AssetCategory::Object => Partition::Object,
            AssetCategory::Door | AssetCategory::Window => Partition::DoorWindow,
            AssetCategory::Material => Partition::Material,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub id: String,
    pub category: AssetCategory,
    pub vector: Vec<f64>,
}

/// Precomputed vectors keyed by asset id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSidecar {
    pub embedder_version: String,
    pub dimension: usize,
    pub map: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingIndex {
    pub dimension: usize,
    pub embedder_version: String,
    partitions: BTreeMap<Partition, Vec<IndexEntry>>,
}

/// Embed every record's annotation text. Vectors already on a record, or in
/// a sidecar written by the same embedder version, are reused.
pub fn build_index(
    records: &[AssetRecord],
    embedder: &dyn Embedder,
    sidecar: Option<&EmbeddingSidecar>,
) -> Result<EmbeddingIndex, RetrievalError> {
    let dimension = embedder.dimension();
    let version = embedder.version();
    let cached = sidecar.filter(|s| s.embedder_version == version && s.dimension == dimension);
    let mut partitions: BTreeMap<Partition, Vec<IndexEntry>> = BTreeMap::new();
    for r in records {
        let vector = match (&r.embedding, cached.and_then(|s| s.map.get(&r.id))) {
            (Some(v), _) | (None, Some(v)) => v.clone(),
            (None, None) => embedder.embed(&r.annotations.text())?,
        };
        if vector.len() != dimension {
            return Err(RetrievalError::DimensionMismatch {
                id: r.id.clone(),
                expected: dimension,
                got: vector.len(),
            });
        }
        partitions.entry(r.category.into()).or_default().push(IndexEntry {
            id: r.id.clone(),
            category: r.category,
            vector,
        });
    }
    for entries in partitions.values_mut() {
        entries.sort_by(|a, b| a.id.cmp(&b.id));
    }
    Ok(EmbeddingIndex {
        dimension,
        embedder_version: version,
        partitions,
    })
}

impl EmbeddingIndex {
    pub fn len(&self) -> usize {
        self.partitions.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn partition(&self, p: Partition) -> &[IndexEntry] {
        self.partitions.get(&p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn entries(&self) -> impl Iterator<Item = &IndexEntry> {
        self.partitions.values().flatten()
    }

    /// Top `k` assets of `category` by cosine similarity, best first, ties
    /// broken by ascending id.
    pub fn search(
        &self,
        embedder: &dyn Embedder,
        query: &str,
        category: AssetCategory,
        k: usize,
    ) -> Result<Vec<(String, f64)>, RetrievalError> {
        let q = embedder.embed(query)?;
        self.search_vector(&q, category, k)
    }

    pub fn search_vector(
        &self,
        q: &[f64],
        category: AssetCategory,
        k: usize,
    ) -> Result<Vec<(String, f64)>, RetrievalError> {
        if k == 0 {
            return Err(RetrievalError::InvalidK);
        }
        if q.len() != self.dimension {
            return Err(RetrievalError::DimensionMismatch {
                id: "<query>".into(),
                expected: self.dimension,
                got: q.len(),
            });
        }
        let mut scored: Vec<(String, f64)> = self
            .partition(category.into())
            .iter()
            .filter(|e| e.category == category)
            .map(|e| (e.id.clone(), e.vector.iter().zip(q).map(|(a, b)| a * b).sum()))
            .collect();
        if scored.is_empty() {
            return Err(RetrievalError::EmptyCategory(category));
        }
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(k);
        Ok(scored)
    }

    pub fn to_sidecar(&self) -> EmbeddingSidecar {
        EmbeddingSidecar {
            embedder_version: self.embedder_version.clone(),
            dimension: self.dimension,
            map: self.entries().map(|e| (e.id.clone(), e.vector.clone())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::{Annotations, MockEmbedder};

    fn rec(id: &str, cat: AssetCategory, label: &str) -> AssetRecord {
        AssetRecord {
            id: id.into(),
            category: cat,
            annotations: Annotations {
                category_label: label.into(),
                ..Default::default()
            },
            native_size: None,
            mesh_path: None,
            uv_scale: None,
            mount: None,
            embedding: None,
        }
    }

    fn sample() -> Vec<AssetRecord> {
        vec![
            rec("m1", AssetCategory::Material, "aged concrete"),
            rec("m2", AssetCategory::Material, "oak wood"),
            rec("m3", AssetCategory::Material, "red brick"),
            rec("d1", AssetCategory::Door, "wooden door"),
            rec("o1", AssetCategory::Object, "wooden chair"),
        ]
    }

    #[test]
    fn partitions_keep_doors_apart() {
        let idx = build_index(&sample(), &MockEmbedder::default(), None).unwrap();
        assert_eq!(idx.len(), 5);
        assert!(idx.partition(Partition::DoorWindow).iter().any(|e| e.id == "d1"));
        assert!(idx.partition(Partition::Object).iter().all(|e| e.id != "d1"));
    }

    #[test]
    fn verbatim_query_scores_one() {
        let e = MockEmbedder::default();
        let idx = build_index(&sample(), &e, None).unwrap();
        let r = idx
            .search(&e, "aged concrete wall", AssetCategory::Material, 1)
            .unwrap();
        assert_eq!(r[0].0, "m1");
        let r = idx.search(&e, "oak wood", AssetCategory::Material, 1).unwrap();
        assert_eq!(r[0].0, "m2");
        assert!((r[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k_beyond_partition_returns_all() {
        let e = MockEmbedder::default();
        let idx = build_index(&sample(), &e, None).unwrap();
        assert_eq!(idx.search(&e, "x", AssetCategory::Material, 50).unwrap().len(), 3);
        assert_eq!(
            idx.search(&e, "x", AssetCategory::Window, 1).unwrap_err(),
            RetrievalError::EmptyCategory(AssetCategory::Window)
        );
        assert_eq!(
            idx.search(&e, "x", AssetCategory::Material, 0).unwrap_err(),
            RetrievalError::InvalidK
        );
    }

    #[test]
    fn sidecar_round_trip_and_dimension_check() {
        let e = MockEmbedder::default();
        let idx = build_index(&sample(), &e, None).unwrap();
        let side = idx.to_sidecar();
        let again = build_index(&sample(), &e, Some(&side)).unwrap();
        assert_eq!(idx, again);
        let mut bad = sample();
        bad[0].embedding = Some(vec![1.0]);
        assert!(matches!(
            build_index(&bad, &e, None),
            Err(RetrievalError::DimensionMismatch { .. })
        ));
    }
}
