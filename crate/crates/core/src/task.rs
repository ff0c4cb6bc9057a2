use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The four structured-output tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "gi", alias = "GI", alias = "goal_interpretation")]
    GoalInterpretation,
    #[serde(rename = "as", alias = "AS", alias = "action_sequencing")]
    ActionSequencing,
    #[serde(rename = "sd", alias = "SD", alias = "subgoal_decomposition")]
    SubgoalDecomposition,
    #[serde(rename = "tm", alias = "TM", alias = "transition_modeling")]
    TransitionModeling,
}

impl Task {
    pub const ALL: [Task; 4] = [
        Task::ActionSequencing,
        Task::GoalInterpretation,
        Task::SubgoalDecomposition,
        Task::TransitionModeling,
    ];

    /// Short code used in pool headers and on the command line.
    pub fn code(self) -> &'static str {
        match self {
            Task::GoalInterpretation => "gi",
            Task::ActionSequencing => "as",
            Task::SubgoalDecomposition => "sd",
            Task::TransitionModeling => "tm",
        }
    }

    /// Long name used in reports.
    pub fn report_name(self) -> &'static str {
        match self {
            Task::GoalInterpretation => "goal_interpretation",
            Task::ActionSequencing => "action_sequencing",
            Task::SubgoalDecomposition => "subgoal_decomposition",
            Task::TransitionModeling => "transition_modeling",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown task `{0}` (expected gi, as, sd or tm)")]
pub struct UnknownTask(pub String);

impl FromStr for Task {
    type Err = UnknownTask;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gi" | "goal_interpretation" => Ok(Task::GoalInterpretation),
            "as" | "action_sequencing" => Ok(Task::ActionSequencing),
            "sd" | "subgoal_decomposition" => Ok(Task::SubgoalDecomposition),
            "tm" | "transition_modeling" => Ok(Task::TransitionModeling),
            _ => Err(UnknownTask(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip() {
        for t in Task::ALL {
            assert_eq!(t.code().parse::<Task>().unwrap(), t);
            assert_eq!(t.report_name().parse::<Task>().unwrap(), t);
            let json = serde_json::to_string(&t).unwrap();
            assert_eq!(serde_json::from_str::<Task>(&json).unwrap(), t);
        }
        assert!("xx".parse::<Task>().is_err());
    }

    #[test]
    fn report_names_sort_alphabetically_like_all() {
        let mut names: Vec<_> = Task::ALL.iter().map(|t| t.report_name()).collect();
        let before = names.clone();
        names.sort();
        assert_eq!(names, before);
    }
}
