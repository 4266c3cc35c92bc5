//! 3D processor grids with a fixed rank-to-coordinate bijection.

use crate::error::{CoreError, Result};

/// A `p1 x p2 x p3` processor grid. Ranks map to coordinates `(i, j, k)` in
/// row-major order over `(i, j, k)`: `rank = (i * p2 + j) * p3 + k`. The
/// mapping is pinned so that independently built backends agree on which
/// rank owns which block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    dims: [usize; 3],
}

impl GridSpec {
    pub fn new(p1: usize, p2: usize, p3: usize) -> Result<Self> {
        if p1 == 0 || p2 == 0 || p3 == 0 {
            return Err(CoreError::InvalidParameter {
                param: "grid dims",
                requirement: "all three dimensions positive",
                value: 0,
            });
        }
        Ok(GridSpec { dims: [p1, p2, p3] })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn size(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn coords_of(&self, rank: usize) -> [usize; 3] {
        debug_assert!(rank < self.size());
        let [_, p2, p3] = self.dims;
        [rank / (p2 * p3), (rank / p3) % p2, rank % p3]
    }

    pub fn rank_of(&self, coords: [usize; 3]) -> usize {
        let [_, p2, p3] = self.dims;
        debug_assert!(coords[0] < self.dims[0] && coords[1] < p2 && coords[2] < p3);
        (coords[0] * p2 + coords[1]) * p3 + coords[2]
    }

    /// Ranks sharing all coordinates with `coords` except along `axis`,
    /// ascending in the varying coordinate (which is also ascending rank
    /// order for this mapping).
    pub fn fiber(&self, coords: [usize; 3], axis: usize) -> Vec<usize> {
        debug_assert!(axis < 3);
        (0..self.dims[axis])
            .map(|v| {
                let mut c = coords;
                c[axis] = v;
                self.rank_of(c)
            })
            .collect()
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.dims[0], self.dims[1], self.dims[2])
    }
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split('x').collect();
        if parts.len() != 3 {
            return Err(format!("expected p1xp2xp3, got `{s}`"));
        }
        let mut dims = [0usize; 3];
        for (slot, part) in dims.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| format!("invalid grid dimension `{part}` in `{s}`"))?;
        }
        GridSpec::new(dims[0], dims[1], dims[2]).map_err(|e| e.to_string())
    }
}

/// All ordered factor triples `(p1, p2, p3)` with `p1 * p2 * p3 == p`,
/// lexicographically ascending.
pub fn factor_triples(p: usize) -> Vec<GridSpec> {
    let mut out = Vec::new();
    for p1 in 1..=p {
        if !p.is_multiple_of(p1) {
            continue;
        }
        let rest = p / p1;
        for p2 in 1..=rest {
            if !rest.is_multiple_of(p2) {
                continue;
            }
            out.push(GridSpec {
                dims: [p1, p2, rest / p2],
            });
        }
    }
    out
}
