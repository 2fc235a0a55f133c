use serde::{Deserialize, Serialize};

use super::Distribution;
use crate::error::{Error, Result};
use crate::production::ValueFunction;

pub type AgentId = usize;
pub type ProjectId = usize;

/// Agents × projects with per-pair performance distributions, a value
/// function per project and a cardinality target per project.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    n: usize,
    m: usize,
    // row-major [agent][project]
    dists: Vec<Distribution>,
    value_fns: Vec<ValueFunction>,
    cardinalities: Vec<usize>,
    relaxed: bool,
}

impl Scenario {
    /// `dists[i][j]` is the performance distribution of agent `i` on project `j`.
    pub fn new(
        dists: Vec<Vec<Distribution>>,
        value_fns: Vec<ValueFunction>,
        cardinalities: Vec<usize>,
    ) -> Result<Self> {
        Self::build(dists, value_fns, cardinalities, false)
    }

    /// Same as [`Scenario::new`] but allows `Σ k_j > n`; projects may then
    /// be filled only partially by the assignment algorithms.
    pub fn relaxed(
        dists: Vec<Vec<Distribution>>,
        value_fns: Vec<ValueFunction>,
        cardinalities: Vec<usize>,
    ) -> Result<Self> {
        Self::build(dists, value_fns, cardinalities, true)
    }

    /// One project, one distribution per agent.
    pub fn single_project(dists: Vec<Distribution>, g: ValueFunction, k: usize) -> Result<Self> {
        Self::new(dists.into_iter().map(|d| vec![d]).collect(), vec![g], vec![k])
    }

    fn build(
        dists: Vec<Vec<Distribution>>,
        value_fns: Vec<ValueFunction>,
        cardinalities: Vec<usize>,
        relaxed: bool,
    ) -> Result<Self> {
        let n = dists.len();
        let m = value_fns.len();
        if n == 0 {
            return Err(Error::InvalidScenario("no agents".into()));
        }
        if m == 0 {
            return Err(Error::InvalidScenario("no projects".into()));
        }
        if cardinalities.len() != m {
            return Err(Error::InvalidScenario(format!(
                "{} cardinalities for {m} projects",
                cardinalities.len()
            )));
        }
        if let Some(j) = cardinalities.iter().position(|&k| k == 0) {
            return Err(Error::InvalidScenario(format!("project {j} has k = 0")));
        }
        let total: usize = cardinalities.iter().sum();
        if !relaxed && total > n {
            return Err(Error::InvalidScenario(format!(
                "sum of cardinalities {total} exceeds {n} agents"
            )));
        }
        for g in &value_fns {
            g.validate()?;
        }
        let mut flat = Vec::with_capacity(n * m);
        for (i, row) in dists.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidScenario(format!(
                    "agent {i} has {} distributions for {m} projects",
                    row.len()
                )));
            }
            flat.extend(row);
        }
        Ok(Scenario {
            n,
            m,
            dists: flat,
            value_fns,
            cardinalities,
            relaxed,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.n
    }

    pub fn n_projects(&self) -> usize {
        self.m
    }

    pub fn dist(&self, agent: AgentId, project: ProjectId) -> &Distribution {
        &self.dists[agent * self.m + project]
    }

    pub fn value_fn(&self, project: ProjectId) -> &ValueFunction {
        &self.value_fns[project]
    }

    pub fn value_fns(&self) -> &[ValueFunction] {
        &self.value_fns
    }

    pub fn cardinality(&self, project: ProjectId) -> usize {
        self.cardinalities[project]
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    pub fn max_cardinality(&self) -> usize {
        self.cardinalities.iter().copied().max().unwrap_or(0)
    }

    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }

    pub fn agents(&self) -> std::ops::Range<AgentId> {
        0..self.n
    }

    pub(crate) fn check_agent(&self, agent: AgentId) -> Result<()> {
        if agent >= self.n {
            return Err(Error::InvalidArgument(format!(
                "agent {agent} out of range (n = {})",
                self.n
            )));
        }
        Ok(())
    }

    pub(crate) fn check_project(&self, project: ProjectId) -> Result<()> {
        if project >= self.m {
            return Err(Error::InvalidArgument(format!(
                "project {project} out of range (m = {})",
                self.m
            )));
        }
        Ok(())
    }

    /// Copy with project `project`'s cardinality replaced by `k`.
    pub fn with_cardinality(&self, project: ProjectId, k: usize) -> Result<Scenario> {
        self.check_project(project)?;
        let mut cards = self.cardinalities.clone();
        cards[project] = k;
        Self::build(self.rows(self.agents()), self.value_fns.clone(), cards, self.relaxed)
    }

    /// Sub-scenario over the given agents, renumbered in the given order.
    pub fn restrict_agents(&self, agents: &[AgentId]) -> Result<Scenario> {
        for &a in agents {
            self.check_agent(a)?;
        }
        Self::build(
            self.rows(agents.iter().copied()),
            self.value_fns.clone(),
            self.cardinalities.clone(),
            self.relaxed,
        )
    }

    fn rows(&self, agents: impl Iterator<Item = AgentId>) -> Vec<Vec<Distribution>> {
        agents
            .map(|i| (0..self.m).map(|j| self.dist(i, j).clone()).collect())
            .collect()
    }
}

/// Disjoint agent sets, one per project, in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub sets: Vec<Vec<AgentId>>,
}

impl Assignment {
    pub fn empty(projects: usize) -> Self {
        Assignment {
            sets: vec![Vec::new(); projects],
        }
    }

    pub fn assigned(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    /// Checks disjointness and the per-project upper bound `|S_j| <= k_j`.
    pub fn validate(&self, scn: &Scenario) -> Result<()> {
        if self.sets.len() != scn.n_projects() {
            return Err(Error::InvalidArgument(format!(
                "assignment covers {} projects, scenario has {}",
                self.sets.len(),
                scn.n_projects()
            )));
        }
        let mut seen = vec![false; scn.n_agents()];
        for (j, set) in self.sets.iter().enumerate() {
            if set.len() > scn.cardinality(j) {
                return Err(Error::InvalidArgument(format!(
                    "project {j} has {} agents, k = {}",
                    set.len(),
                    scn.cardinality(j)
                )));
            }
            for &i in set {
                scn.check_agent(i)?;
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidArgument(format!(
                        "agent {i} assigned twice"
                    )));
                }
            }
        }
        Ok(())
    }
}
