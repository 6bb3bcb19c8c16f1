//! Sequential / data-parallel execution switch.
//!
//! Every parallel code path has a sequential twin and both produce
//! bit-identical output: work is split per frame, per row or per pixel and
//! no floating-point reduction ever crosses a split boundary.

use serde::{Deserialize, Serialize};

/// Defaults to `Parallel` when the feature is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Execution {
    /// Maps `f` over `0..n`, preserving order.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
        }
    }
}

/// `Zip::map_collect` or `Zip::par_map_collect` depending on the execution mode.
macro_rules! zip_map {
    ($exec:expr, $zip:expr, $f:expr) => {{
        match $exec {
            $crate::exec::Execution::Sequential => $zip.map_collect($f),
            #[cfg(feature = "parallel")]
            $crate::exec::Execution::Parallel => $zip.par_map_collect($f),
        }
    }};
}
pub(crate) use zip_map;
