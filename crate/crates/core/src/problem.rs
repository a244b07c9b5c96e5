use crate::channel::{Channel, LossTables};
use crate::mappings::MappingSet;
use crate::Result;

/// A channel together with the single-symbol denoisers under consideration
/// and their loss tables. Both denoisers are driven by one of these.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub channel: Channel,
    pub mappings: MappingSet,
    pub tables: LossTables,
}

impl Problem {
    /// Uses the full set `|S| = |X̂|^|Z|`.
    pub fn new(channel: Channel) -> Result<Self> {
        let mappings = channel.mappings()?;
        Self::with_mappings(channel, mappings)
    }

    pub fn with_mappings(channel: Channel, mappings: MappingSet) -> Result<Self> {
        let tables = channel.estimated_loss(&mappings)?;
        Ok(Problem { channel, mappings, tables })
    }

    /// Same channel restricted to the non-dominated mappings.
    pub fn pruned(&self) -> Result<Self> {
        let mappings = self.mappings.prune_dominated(&self.tables);
        Self::with_mappings(self.channel.clone(), mappings)
    }

    pub fn s_size(&self) -> usize {
        self.mappings.len()
    }

    pub fn z_size(&self) -> usize {
        self.channel.z_size()
    }
}
