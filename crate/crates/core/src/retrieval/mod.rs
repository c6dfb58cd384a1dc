//! Asset catalog, text embedding and exhaustive cosine search.

mod catalog;
mod embed;
mod index;

pub use catalog::{
    load_asset_mesh, Annotations, AssetCategory, AssetRecord, Catalog, Mount, BUILTIN_BOX, DEFAULT_MATERIAL,
};
pub use embed::{fnv1a64, Embedder, MockEmbedder, RemoteEmbedder, RemoteEmbedderConfig, MOCK_DIMENSION};
pub use index::{build_index, EmbeddingIndex, EmbeddingSidecar, IndexEntry, Partition};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RetrievalError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("embedding backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("record `{id}`: embedding has dimension {got}, index uses {expected}")]
    DimensionMismatch { id: String, expected: usize, got: usize },
    #[error("no {0} assets in the catalog")]
    EmptyCategory(AssetCategory),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("catalog error: {0}")]
    Catalog(String),
    #[error("record `{id}`: {reason}")]
    InvalidRecord { id: String, reason: String },
    #[error("unknown asset `{0}`")]
    UnknownAsset(String),
}
