//! Closed vocabularies shared by the goal, scene and executor modules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Object states allowed in node goals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NodeState {
    Closed,
    Open,
    On,
    Off,
    Sitting,
    Dirty,
    Clean,
    Lying,
    PluggedIn,
    PluggedOut,
}

impl NodeState {
    pub const ALL: [NodeState; 10] = [
        NodeState::Closed,
        NodeState::Open,
        NodeState::On,
        NodeState::Off,
        NodeState::Sitting,
        NodeState::Dirty,
        NodeState::Clean,
        NodeState::Lying,
        NodeState::PluggedIn,
        NodeState::PluggedOut,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeState::Closed => "CLOSED",
            NodeState::Open => "OPEN",
            NodeState::On => "ON",
            NodeState::Off => "OFF",
            NodeState::Sitting => "SITTING",
            NodeState::Dirty => "DIRTY",
            NodeState::Clean => "CLEAN",
            NodeState::Lying => "LYING",
            NodeState::PluggedIn => "PLUGGED_IN",
            NodeState::PluggedOut => "PLUGGED_OUT",
        }
    }

    /// The mutually exclusive partner of a binary state.
    pub fn opposite(self) -> Option<NodeState> {
        use NodeState::*;
        match self {
            Open => Some(Closed),
            Closed => Some(Open),
            On => Some(Off),
            Off => Some(On),
            PluggedIn => Some(PluggedOut),
            PluggedOut => Some(PluggedIn),
            Clean => Some(Dirty),
            Dirty => Some(Clean),
            Sitting | Lying => None,
        }
    }
}

/// Pairs of states that may never hold together on one node.
pub const EXCLUSIVE_PAIRS: [(&str, &str); 4] = [
    ("OPEN", "CLOSED"),
    ("ON", "OFF"),
    ("PLUGGED_IN", "PLUGGED_OUT"),
    ("CLEAN", "DIRTY"),
];

impl fmt::Display for NodeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let up = s.trim().to_ascii_uppercase();
        NodeState::ALL
            .into_iter()
            .find(|st| st.as_str() == up)
            .ok_or_else(|| s.to_string())
    }
}

/// Relations between two objects. `ONTOP` and `NEXT_TO` are read as aliases
/// of `ON` and `CLOSE`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "ON", alias = "ONTOP")]
    On,
    #[serde(rename = "INSIDE")]
    Inside,
    #[serde(rename = "BETWEEN")]
    Between,
    #[serde(rename = "CLOSE", alias = "NEXT_TO")]
    Close,
    #[serde(rename = "FACING")]
    Facing,
    #[serde(rename = "HOLDS_RH")]
    HoldsRh,
    #[serde(rename = "HOLDS_LH")]
    HoldsLh,
}

impl Relation {
    pub const ALL: [Relation; 7] = [
        Relation::On,
        Relation::Inside,
        Relation::Between,
        Relation::Close,
        Relation::Facing,
        Relation::HoldsRh,
        Relation::HoldsLh,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::On => "ON",
            Relation::Inside => "INSIDE",
            Relation::Between => "BETWEEN",
            Relation::Close => "CLOSE",
            Relation::Facing => "FACING",
            Relation::HoldsRh => "HOLDS_RH",
            Relation::HoldsLh => "HOLDS_LH",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ON" | "ONTOP" => Ok(Relation::On),
            "INSIDE" => Ok(Relation::Inside),
            "BETWEEN" => Ok(Relation::Between),
            "CLOSE" | "NEXT_TO" => Ok(Relation::Close),
            "FACING" => Ok(Relation::Facing),
            "HOLDS_RH" => Ok(Relation::HoldsRh),
            "HOLDS_LH" => Ok(Relation::HoldsLh),
            _ => Err(s.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_vocabulary_is_closed() {
        for st in NodeState::ALL {
            assert_eq!(st.as_str().parse::<NodeState>(), Ok(st));
        }
        assert!("HALF_OPEN".parse::<NodeState>().is_err());
        assert_eq!("plugged_in".parse::<NodeState>(), Ok(NodeState::PluggedIn));
    }

    #[test]
    fn opposites_are_involutive() {
        for st in NodeState::ALL {
            if let Some(o) = st.opposite() {
                assert_eq!(o.opposite(), Some(st));
            }
        }
    }

    #[test]
    fn relation_aliases() {
        assert_eq!("ONTOP".parse::<Relation>(), Ok(Relation::On));
        assert_eq!("next_to".parse::<Relation>(), Ok(Relation::Close));
        let r: Relation = serde_json::from_str("\"NEXT_TO\"").unwrap();
        assert_eq!(r, Relation::Close);
        assert_eq!(serde_json::to_string(&Relation::On).unwrap(), "\"ON\"");
        for r in Relation::ALL {
            assert_eq!(r.as_str().parse::<Relation>(), Ok(r));
        }
    }
}
