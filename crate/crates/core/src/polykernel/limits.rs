use std::sync::RwLock;

pub const DEFAULT_MAX_DIM: usize = 8;
pub const DEFAULT_MAX_GENERATORS: usize = 100_000;
pub const MAX_FACETS_ENV: &str = "SUBGRAD_MAX_FACETS";

/// Hard caps for the exact kernel. Exceeding one is an error, never a
/// silent approximation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_dim: usize,
    pub max_generators: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_dim: DEFAULT_MAX_DIM, max_generators: DEFAULT_MAX_GENERATORS }
    }
}

impl Limits {
    /// Defaults, with the facet cap taken from `SUBGRAD_MAX_FACETS` when set.
    pub fn from_env() -> Self {
        let mut l = Limits::default();
        if let Some(n) = std::env::var(MAX_FACETS_ENV).ok().and_then(|s| s.trim().parse().ok()) {
            l.max_generators = n;
        }
        l
    }
}

static ACTIVE: RwLock<Limits> = RwLock::new(Limits { max_dim: DEFAULT_MAX_DIM, max_generators: DEFAULT_MAX_GENERATORS });

pub fn limits() -> Limits {
    *ACTIVE.read().unwrap_or_else(|e| e.into_inner())
}

/// Replaces the process-wide caps. Intended to be called once at startup.
pub fn set_limits(l: Limits) {
    *ACTIVE.write().unwrap_or_else(|e| e.into_inner()) = l;
}
