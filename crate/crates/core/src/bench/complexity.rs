//! Operation-count model for the proposed estimator and the grid searches.

use serde::{Deserialize, Serialize};

/// Search dimensions from per-axis grid point counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchDims {
    /// Joint search over all sources: `(g_doa g_spread)^(2K)`.
    pub d1: u128,
    /// Per-source search: `(g_doa g_spread)^2`.
    pub d2: u128,
}

pub fn search_dims(k: u32, grid_doa: u128, grid_spread: u128) -> SearchDims {
    let per = grid_doa * grid_spread;
    SearchDims { d1: per.pow(2 * k), d2: per * per }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Proposed,
    Comet,
    Dispare,
    Subspace,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Comet => "comet",
            Method::Dispare => "dispare",
            Method::Subspace => "subspace",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityRow {
    pub method: Method,
    /// Search dimension used (1 for the proposed estimator).
    pub d: u128,
    pub count: u128,
}

/// Leading-order counts: `M^3 + M^2 T + M K^2` for the proposed method and
/// `D M^3 + M^2 T` for the searches.
pub fn complexity_table(m: u128, t: u128, k: u32, grid_doa: u128, grid_spread: u128) -> Vec<ComplexityRow> {
    let dims = search_dims(k, grid_doa, grid_spread);
    let kk = u128::from(k);
    let cov = m * m * t;
    let search = |d: u128| d * m * m * m + cov;
    vec![
        ComplexityRow { method: Method::Proposed, d: 1, count: m * m * m + cov + m * kk * kk },
        ComplexityRow { method: Method::Comet, d: dims.d1, count: search(dims.d1) },
        ComplexityRow { method: Method::Subspace, d: dims.d2, count: search(dims.d2) },
        ComplexityRow { method: Method::Dispare, d: dims.d2, count: search(dims.d2) },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_source_dims() {
        let d = search_dims(1, 11, 10);
        assert_eq!(d.d1, 12_100);
        assert_eq!(d.d2, 12_100);
    }

    #[test]
    fn tiny_table() {
        let t = complexity_table(4, 10, 1, 2, 3);
        assert_eq!(t[0].count, 64 + 160 + 4);
        assert_eq!(t[1].count, 36 * 64 + 160);
    }
}
