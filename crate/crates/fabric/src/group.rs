use crate::error::{FabricError, Result};

/// An ordered list of distinct ranks over which a collective runs.
/// Collectives concatenate, chunk and reduce in this order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Group {
    members: Vec<usize>,
}

impl Group {
    pub fn new(members: Vec<usize>) -> Result<Group> {
        if members.is_empty() {
            return Err(FabricError::InvalidGroup {
                reason: "no members".to_string(),
            });
        }
        let mut seen = members.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(FabricError::InvalidGroup {
                reason: format!("duplicate members in {members:?}"),
            });
        }
        Ok(Group { members })
    }

    /// The full world `0..p` in rank order.
    pub fn world(p: usize) -> Group {
        Group {
            members: (0..p).collect(),
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn position_of(&self, rank: usize) -> Option<usize> {
        self.members.iter().position(|&m| m == rank)
    }
}
