use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::RetrievalError;

pub const MOCK_DIMENSION: usize = 256;

/// Text encoder producing unit-norm vectors of a fixed dimension.
pub trait Embedder: Send + Sync {
    /// Identifies the model; cached vectors are reused only on a match.
    fn version(&self) -> String;
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vec<f64>, RetrievalError>;
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// Bag of hashed tokens. Order-insensitive and platform-stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MockEmbedder {
    pub dimension: usize,
}

impl Default for MockEmbedder {
    fn default() -> Self {
        MockEmbedder {
            dimension: MOCK_DIMENSION,
        }
    }
}

impl MockEmbedder {
    pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
    }
}

impl Embedder for MockEmbedder {
    fn version(&self) -> String {
        format!("mock-fnv1a64-{}", self.dimension)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, RetrievalError> {
        let mut v = vec![0.0; self.dimension];
        let mut any = false;
        for tok in Self::tokens(text) {
            v[(fnv1a64(tok.as_bytes()) % self.dimension as u64) as usize] += 1.0;
            any = true;
        }
        if !any {
            return Err(RetrievalError::EmptyText);
        }
        normalize(&mut v);
        Ok(v)
    }
}

pub(crate) fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteEmbedderConfig {
    /// OpenAI-compatible `/embeddings` endpoint.
    pub endpoint: String,
    pub model: String,
    pub dimension: usize,
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_key_env() -> String {
    "SETFORGE_API_KEY".into()
}

fn default_timeout() -> u64 {
    60
}

/// Sentence-embedding service speaking the `{"model", "input"}` ->
/// `{"data": [{"embedding": [...]}]}` protocol.
#[derive(Debug, Clone)]
pub struct RemoteEmbedder {
    cfg: RemoteEmbedderConfig,
    agent: ureq::Agent,
}

impl RemoteEmbedder {
    pub fn new(cfg: RemoteEmbedderConfig) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build();
        RemoteEmbedder { cfg, agent }
    }
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
}

impl Embedder for RemoteEmbedder {
    fn version(&self) -> String {
        format!("remote-{}-{}", self.cfg.model, self.cfg.dimension)
    }

    fn dimension(&self) -> usize {
        self.cfg.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, RetrievalError> {
        if text.trim().is_empty() {
            return Err(RetrievalError::EmptyText);
        }
        let unavailable = |e: String| RetrievalError::BackendUnavailable(e);
        let mut req = self.agent.post(&self.cfg.endpoint);
        if let Ok(key) = std::env::var(&self.cfg.api_key_env) {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let resp: EmbeddingResponse = req
            .send_json(serde_json::json!({ "model": self.cfg.model, "input": text }))
            .map_err(|e| unavailable(e.to_string()))?
            .into_json()
            .map_err(|e| unavailable(e.to_string()))?;
        let mut v = resp
            .data
            .into_iter()
            .next()
            .ok_or_else(|| unavailable("response carried no embedding".into()))?
            .embedding;
        if v.len() != self.cfg.dimension {
            return Err(RetrievalError::DimensionMismatch {
                id: "<query>".into(),
                expected: self.cfg.dimension,
                got: v.len(),
            });
        }
        normalize(&mut v);
        Ok(v)
    }
}
