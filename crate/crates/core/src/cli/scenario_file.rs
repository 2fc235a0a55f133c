use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Distribution, Scenario};
use crate::production::ValueFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectSpec {
    pub name: String,
    pub value_fn: ValueFunction,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub agent: String,
    pub project: String,
    /// `[value, probability]` pairs.
    pub support: Vec<(f64, f64)>,
}

/// On-disk scenario: named agents and projects with one distribution per pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub agents: Vec<String>,
    pub projects: Vec<ProjectSpec>,
    pub distributions: Vec<DistributionSpec>,
}

fn index<'a>(names: &'a [String], what: &str) -> Result<HashMap<&'a str, usize>> {
    let mut map = HashMap::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        if map.insert(name.as_str(), i).is_some() {
            return Err(Error::InvalidScenario(format!("duplicate {what} name {name:?}")));
        }
    }
    Ok(map)
}

impl ScenarioFile {
    pub fn read(path: &Path) -> Result<ScenarioFile> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidScenario(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario file serializes")
    }

    pub fn project_names(&self) -> Vec<String> {
        self.projects.iter().map(|p| p.name.clone()).collect()
    }

    /// Validates names and coverage and builds the scenario. Probabilities
    /// are accepted with the rounding tolerance of text files.
    pub fn to_scenario(&self) -> Result<Scenario> {
        let agents = index(&self.agents, "agent")?;
        let names: Vec<String> = self.project_names();
        let projects = index(&names, "project")?;
        let (n, m) = (self.agents.len(), self.projects.len());
        let mut slots: Vec<Option<Distribution>> = vec![None; n * m];
        for d in &self.distributions {
            let i = *agents
                .get(d.agent.as_str())
                .ok_or_else(|| Error::InvalidScenario(format!("unknown agent {:?}", d.agent)))?;
            let j = *projects
                .get(d.project.as_str())
                .ok_or_else(|| Error::InvalidScenario(format!("unknown project {:?}", d.project)))?;
            let dist = Distribution::from_rounded(d.support.iter().copied()).map_err(|e| {
                Error::InvalidScenario(format!("distribution of {:?} on {:?}: {e}", d.agent, d.project))
            })?;
            if slots[i * m + j].replace(dist).is_some() {
                return Err(Error::InvalidScenario(format!(
                    "duplicate distribution for {:?} on {:?}",
                    d.agent, d.project
                )));
            }
        }
        let mut rows = Vec::with_capacity(n);
        let mut slots = slots.into_iter();
        for agent in &self.agents {
            let row = (0..m)
                .map(|j| {
                    slots.next().flatten().ok_or_else(|| {
                        Error::InvalidScenario(format!(
                            "no distribution for {agent:?} on {:?}",
                            self.projects[j].name
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Scenario::new(
            rows,
            self.projects.iter().map(|p| p.value_fn).collect(),
            self.projects.iter().map(|p| p.k).collect(),
        )
    }

    /// Scenario file with the given names, or `a<i>` / `p<j>` when absent.
    pub fn from_scenario(scn: &Scenario, agents: Option<Vec<String>>, projects: Option<Vec<String>>) -> ScenarioFile {
        let agents = agents.unwrap_or_else(|| scn.agents().map(|i| format!("a{i}")).collect());
        let projects: Vec<String> =
            projects.unwrap_or_else(|| (0..scn.n_projects()).map(|j| format!("p{j}")).collect());
        let mut distributions = Vec::with_capacity(scn.n_agents() * scn.n_projects());
        for (i, agent) in agents.iter().enumerate() {
            for (j, project) in projects.iter().enumerate() {
                distributions.push(DistributionSpec {
                    agent: agent.clone(),
                    project: project.clone(),
                    support: scn.dist(i, j).atoms().collect(),
                });
            }
        }
        ScenarioFile {
            agents,
            projects: projects
                .into_iter()
                .enumerate()
                .map(|(j, name)| ProjectSpec {
                    name,
                    value_fn: *scn.value_fn(j),
                    k: scn.cardinality(j),
                })
                .collect(),
            distributions,
        }
    }
}
