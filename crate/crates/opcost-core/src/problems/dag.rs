//! Precedence-constrained scheduling: the inner problem is a longest-path
//! computation on an acyclic event graph whose edge weights are predicted
//! durations.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::model::{LinearModel, UnlabeledSet};
use crate::problems::lp::{ConstraintSense, LpConstraint};
use crate::problems::PolicySolution;
use crate::tol;

/// One precedence edge: event `from_event` must finish the station whose
/// duration is predicted from unlabeled row `instance_index` before event
/// `to_event` can start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecedenceEdge {
    pub from_event: usize,
    pub to_event: usize,
    pub instance_index: usize,
}

/// An acyclic event graph with a designated source and sink. Event times form
/// the policy vector; the operational cost is the makespan `pi_sink - pi_source`.
#[derive(Debug, Clone)]
pub struct PrecedenceDag {
    num_events: usize,
    edges: Vec<PrecedenceEdge>,
    source_event: usize,
    sink_event: usize,
    topo_order: Vec<usize>,
}

impl PrecedenceDag {
    pub fn new(
        num_events: usize,
        edges: Vec<PrecedenceEdge>,
        source_event: usize,
        sink_event: usize,
    ) -> Result<Self> {
        if num_events == 0 {
            return Err(Error::InvalidInput("DAG needs at least one event".into()));
        }
        if source_event >= num_events || sink_event >= num_events {
            return Err(Error::InvalidInput(format!(
                "source/sink out of range for {num_events} events"
            )));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.from_event >= num_events || e.to_event >= num_events {
                return Err(Error::InvalidInput(format!("edge {i} references unknown event")));
            }
        }
        let topo_order = topological_order(num_events, &edges)?;
        let dag = Self { num_events, edges, source_event, sink_event, topo_order };
        if !dag.reachable_from_source()[sink_event] {
            return Err(Error::InvalidInput("sink not reachable from source".into()));
        }
        Ok(dag)
    }

    pub fn num_events(&self) -> usize {
        self.num_events
    }

    pub fn edges(&self) -> &[PrecedenceEdge] {
        &self.edges
    }

    pub fn source_event(&self) -> usize {
        self.source_event
    }

    pub fn sink_event(&self) -> usize {
        self.sink_event
    }

    /// Largest instance index any edge refers to, or None when edgeless.
    pub fn max_instance_index(&self) -> Option<usize> {
        self.edges.iter().map(|e| e.instance_index).max()
    }

    fn reachable_from_source(&self) -> Vec<bool> {
        let mut reach = vec![false; self.num_events];
        reach[self.source_event] = true;
        for &v in &self.topo_order {
            if !reach[v] {
                continue;
            }
            for e in &self.edges {
                if e.from_event == v {
                    reach[e.to_event] = true;
                }
            }
        }
        reach
    }

    /// The six-station clinic instance: five events (check-in, three interior
    /// milestones, check-out) and six stations on three routes.
    pub fn clinic_six_stations() -> Self {
        let edges = vec![
            PrecedenceEdge { from_event: 0, to_event: 1, instance_index: 0 },
            PrecedenceEdge { from_event: 0, to_event: 2, instance_index: 1 },
            PrecedenceEdge { from_event: 1, to_event: 3, instance_index: 2 },
            PrecedenceEdge { from_event: 2, to_event: 3, instance_index: 3 },
            PrecedenceEdge { from_event: 1, to_event: 4, instance_index: 4 },
            PrecedenceEdge { from_event: 3, to_event: 4, instance_index: 5 },
        ];
        Self::new(5, edges, 0, 4).expect("static instance is valid")
    }
}

fn topological_order(num_events: usize, edges: &[PrecedenceEdge]) -> Result<Vec<usize>> {
    let mut indeg = vec![0usize; num_events];
    for e in edges {
        indeg[e.to_event] += 1;
    }
    let mut queue: Vec<usize> = (0..num_events).filter(|&v| indeg[v] == 0).collect();
    queue.sort_unstable();
    let mut order = Vec::with_capacity(num_events);
    let mut head = 0;
    while head < queue.len() {
        let v = queue[head];
        head += 1;
        order.push(v);
        for e in edges {
            if e.from_event == v {
                indeg[e.to_event] -= 1;
                if indeg[e.to_event] == 0 {
                    queue.push(e.to_event);
                }
            }
        }
    }
    if order.len() != num_events {
        return Err(Error::InvalidInput("precedence graph contains a cycle".into()));
    }
    Ok(order)
}

/// Maximum total weight over source-to-sink paths. Weights may be negative;
/// the dynamic program over the topological order handles them exactly.
pub fn dag_longest_path(dag: &PrecedenceDag, weights: &[f64]) -> Result<f64> {
    if weights.len() != dag.edges.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} edges",
            weights.len(),
            dag.edges.len()
        )));
    }
    let dist = longest_from_source(dag, weights);
    dist[dag.sink_event].ok_or_else(|| Error::Internal("sink unreachable despite invariant".into()))
}

/// Longest-path distance from the source to every event; None if unreachable.
fn longest_from_source(dag: &PrecedenceDag, weights: &[f64]) -> Vec<Option<f64>> {
    let mut dist: Vec<Option<f64>> = vec![None; dag.num_events];
    dist[dag.source_event] = Some(0.0);
    for &v in &dag.topo_order {
        let Some(dv) = dist[v] else { continue };
        for (i, e) in dag.edges.iter().enumerate() {
            if e.from_event == v {
                let cand = dv + weights[i];
                dist[e.to_event] = Some(match dist[e.to_event] {
                    Some(cur) => cur.max(cand),
                    None => cand,
                });
            }
        }
    }
    dist
}

/// Predicted duration of every edge's station under the model.
pub fn edge_weights(model: &LinearModel, dag: &PrecedenceDag, unl: &UnlabeledSet) -> Result<Vec<f64>> {
    if let Some(max_idx) = dag.max_instance_index() {
        if max_idx >= unl.m() {
            return Err(Error::InvalidInput(format!(
                "edge refers to instance {max_idx} but unlabeled set has {} rows",
                unl.m()
            )));
        }
    }
    let preds = unl.predictions(model)?;
    Ok(dag.edges.iter().map(|e| preds[e.instance_index]).collect())
}

/// Minimize the makespan subject to the precedence constraints.
///
/// Returns the earliest-start schedule, shifted so every event time is
/// nonnegative; the objective equals the longest source-to-sink path weight.
pub fn opcost_scheduling(
    model: &LinearModel,
    dag: &PrecedenceDag,
    unl: &UnlabeledSet,
) -> Result<PolicySolution> {
    let weights = edge_weights(model, dag, unl)?;
    schedule_with_weights(dag, &weights)
}

/// Same as [`opcost_scheduling`] but with explicit edge weights.
pub fn schedule_with_weights(dag: &PrecedenceDag, weights: &[f64]) -> Result<PolicySolution> {
    if weights.len() != dag.edges.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} edges",
            weights.len(),
            dag.edges.len()
        )));
    }
    let dist = longest_from_source(dag, weights);
    let objective = dist[dag.sink_event]
        .ok_or_else(|| Error::Internal("sink unreachable despite invariant".into()))?;

    // Events not reachable from the source cannot influence the makespan
    // (the reachable set is closed under successors), so schedule them first
    // at their own earliest nonnegative times.
    let mut pi = vec![0.0f64; dag.num_events];
    for &v in &dag.topo_order {
        if dist[v].is_some() {
            continue;
        }
        let mut t: f64 = 0.0;
        for (i, e) in dag.edges.iter().enumerate() {
            if e.to_event == v && dist[e.from_event].is_none() {
                t = t.max(pi[e.from_event] + weights[i]);
            }
        }
        pi[v] = t;
    }
    // Shift the reachable block so that every time is nonnegative and every
    // cross edge from the unreachable block is respected.
    let mut shift: f64 = 0.0;
    for v in 0..dag.num_events {
        if let Some(d) = dist[v] {
            shift = shift.max(-d);
        }
    }
    for (i, e) in dag.edges.iter().enumerate() {
        if dist[e.from_event].is_none() {
            if let Some(d) = dist[e.to_event] {
                shift = shift.max(pi[e.from_event] + weights[i] - d);
            }
        }
    }
    for v in 0..dag.num_events {
        if let Some(d) = dist[v] {
            pi[v] = d + shift;
        }
    }
    Ok(PolicySolution { policy: Array1::from(pi), objective_value: objective })
}

/// Verify a schedule against the precedence constraints and nonnegativity.
pub fn check_schedule_feasible(
    dag: &PrecedenceDag,
    weights: &[f64],
    pi: &Array1<f64>,
) -> Result<()> {
    if pi.len() != dag.num_events {
        return Err(Error::DimensionMismatch("schedule length != number of events".into()));
    }
    for (i, e) in dag.edges.iter().enumerate() {
        if pi[e.from_event] + weights[i] > pi[e.to_event] + tol::POLICY_FEAS_TOL {
            return Err(Error::Internal(format!("edge {i} violated by schedule")));
        }
    }
    if pi.iter().any(|&t| t < -tol::POLICY_FEAS_TOL) {
        return Err(Error::Internal("negative event time".into()));
    }
    Ok(())
}

/// Walk every source-to-sink path, invoking `visit` with the edge indices of
/// each. Refuses once more than [`tol::PATH_ENUM_CAP`] paths are seen.
pub fn for_each_path(dag: &PrecedenceDag, mut visit: impl FnMut(&[usize])) -> Result<u64> {
    let mut stack: Vec<usize> = Vec::new();
    let mut count: u64 = 0;
    fn go(
        dag: &PrecedenceDag,
        at: usize,
        stack: &mut Vec<usize>,
        count: &mut u64,
        visit: &mut impl FnMut(&[usize]),
    ) -> Result<()> {
        if at == dag.sink_event() {
            *count += 1;
            if *count > tol::PATH_ENUM_CAP {
                return Err(Error::SizeLimit(format!(
                    "more than {} source-sink paths",
                    tol::PATH_ENUM_CAP
                )));
            }
            visit(stack);
            return Ok(());
        }
        for (i, e) in dag.edges().iter().enumerate() {
            if e.from_event == at {
                stack.push(i);
                go(dag, e.to_event, stack, count, visit)?;
                stack.pop();
            }
        }
        Ok(())
    }
    go(dag, dag.source_event, &mut stack, &mut count, &mut visit)?;
    Ok(count)
}

/// The scheduling LP in generic form: minimize `pi_sink - pi_source` over
/// nonnegative event times subject to one precedence row per edge.
pub fn scheduling_lp(dag: &PrecedenceDag, weights: &[f64]) -> (Array1<f64>, Vec<LpConstraint>) {
    let n = dag.num_events;
    let mut objective = Array1::zeros(n);
    objective[dag.sink_event] += 1.0;
    objective[dag.source_event] -= 1.0;
    let constraints = dag
        .edges
        .iter()
        .zip(weights)
        .map(|(e, &w)| {
            // pi_from - pi_to <= -w
            let mut row = vec![0.0; n];
            row[e.from_event] += 1.0;
            row[e.to_event] -= 1.0;
            LpConstraint { coeffs: row, bound: -w, sense: ConstraintSense::Le }
        })
        .collect();
    (objective, constraints)
}
