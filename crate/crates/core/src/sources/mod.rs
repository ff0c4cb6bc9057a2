//! Where candidate pools come from: an HTTP endpoint, JSONL files on disk,
//! or seeded corruption of an existing pool.

pub mod corrupt;
pub mod http;
pub mod pool;
pub mod prompt;

pub use corrupt::{corrupt_pool, CorruptionKind, CorruptionSpec};
pub use http::{fetch_candidates, EndpointConfig, FetchError, SampleRequest};
pub use pool::{load_pool, parse_pool, write_pool, PoolError, PoolFile};
pub use prompt::{render_prompt, PromptError, PromptTemplate};
