//! The decomposition engine: from a pair of binary-message measurement
//! families and per-input positive decompositions of `1/d`, build the atom
//! measure `p_I`, solve one transportation problem per channel input, and
//! assemble the channel as a mixture of stochastic matrices that each touch
//! at most four outputs.
//!
//! The trace inequality that powers feasibility, and a randomized search for
//! counterexamples to two candidate bilinear forms that would generalize it
//! beyond maximally entangled states, live here too.

use crate::channels::{mix, ClassicalChannel};
use crate::error::{Error, Result};
use crate::exec;
use crate::qmat::{Complex, ComplexMatrix, DEFAULT_PSD_TOL};
use crate::quantum::{Povm, PositiveDecomposition};
use crate::sampling;

/// Atoms at or below this mass are dropped: the conditional distribution of
/// a zero-mass atom is undefined.
pub const ATOM_CUTOFF: f64 = 1e-12;
/// Residual capacities below this are treated as saturated during max-flow.
const FLOW_EPS: f64 = 1e-12;
/// Unmet transport demand above this is reported as infeasible.
pub const INFEASIBILITY_TOL: f64 = 1e-8;
/// Marginal residual allowed on a successful transport plan.
pub const MARGINAL_TOL: f64 = 1e-10;
/// A candidate bilinear form must misbehave by more than this to count as a
/// violation; rounding noise stays well below.
pub const VIOLATION_TOL: f64 = 1e-9;

/// Probability measure on output quadruples `I = (i₁,i₂,i₃,i₄)`, stored
/// sparsely in lexicographic order with only positive atoms.
#[derive(Debug, Clone)]
pub struct PMeasure {
    k: usize,
    atoms: Vec<([usize; 4], f64)>,
}

impl PMeasure {
    pub fn new(k: usize, mut atoms: Vec<([usize; 4], f64)>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Dimension("atom measure needs at least one output".into()));
        }
        for &(idx, mass) in &atoms {
            if idx.iter().any(|&i| i >= k) {
                return Err(Error::Dimension(format!(
                    "atom {idx:?} out of range for {k} outputs"
                )));
            }
            if !mass.is_finite() || mass < -1e-12 {
                return Err(Error::Numerical(format!(
                    "atom {idx:?} carries invalid mass {mass}"
                )));
            }
        }
        atoms.sort_by_key(|&(idx, _)| idx);
        let mut merged: Vec<([usize; 4], f64)> = Vec::with_capacity(atoms.len());
        for (idx, mass) in atoms {
            match merged.last_mut() {
                Some((last, m)) if *last == idx => *m += mass,
                _ => merged.push((idx, mass)),
            }
        }
        merged.retain(|&(_, m)| m > ATOM_CUTOFF);
        Ok(Self { k, atoms: merged })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn atoms(&self) -> &[([usize; 4], f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, m)| m).sum()
    }

    /// Mass of `S⁴` for a subset of outputs given as a membership mask.
    pub fn mass_inside(&self, in_s: &[bool]) -> f64 {
        self.atoms
            .iter()
            .filter(|(idx, _)| idx.iter().all(|&i| in_s[i]))
            .map(|&(_, m)| m)
            .sum()
    }
}

/// Feasible transportation plan between an atom measure and a column
/// distribution, supported on occurrence edges only.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    k: usize,
    atoms: Vec<[usize; 4]>,
    supplies: Vec<f64>,
    /// Per atom: `(output index, mass)` in ascending index order.
    flows: Vec<Vec<(usize, f64)>>,
}

impl TransportPlan {
    pub fn atoms(&self) -> &[[usize; 4]] {
        &self.atoms
    }

    pub fn flows(&self) -> &[Vec<(usize, f64)>] {
        &self.flows
    }

    pub fn row_marginal(&self, atom: usize) -> f64 {
        self.flows[atom].iter().map(|&(_, m)| m).sum()
    }

    pub fn column_marginals(&self) -> Vec<f64> {
        let mut cols = vec![0.0; self.k];
        for row in &self.flows {
            for &(i, m) in row {
                cols[i] += m;
            }
        }
        cols
    }

    /// Largest deviation of either marginal from its prescription.
    pub fn max_marginal_residual(&self, column: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (a, &supply) in self.supplies.iter().enumerate() {
            worst = worst.max((self.row_marginal(a) - supply).abs());
        }
        for (i, &demand) in column.iter().enumerate() {
            worst = worst.max((self.column_marginals()[i] - demand).abs());
        }
        worst
    }
}

/// Mixture of column-stochastic channels; when produced by the decomposition
/// engine each component is tagged with its atom quadruple.
#[derive(Debug, Clone)]
pub struct ConvexDecomposition {
    weights: Vec<f64>,
    components: Vec<ClassicalChannel>,
    atoms: Option<Vec<[usize; 4]>>,
}

impl ConvexDecomposition {
    pub fn new(
        weights: Vec<f64>,
        components: Vec<ClassicalChannel>,
        atoms: Option<Vec<[usize; 4]>>,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        if let Some(a) = &atoms {
            if a.len() != components.len() {
                return Err(Error::Dimension(format!(
                    "{} atom tags for {} components",
                    a.len(),
                    components.len()
                )));
            }
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < -1e-12) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Normalization(format!(
                "weights sum to {total} or contain a negative entry"
            )));
        }
        let (l, k) = (components[0].n_inputs(), components[0].n_outputs());
        if components.iter().any(|c| c.n_inputs() != l || c.n_outputs() != k) {
            return Err(Error::Dimension("components differ in shape".into()));
        }
        Ok(Self { weights, components, atoms })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[ClassicalChannel] {
        &self.components
    }

    pub fn atoms(&self) -> Option<&[[usize; 4]]> {
        self.atoms.as_deref()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The mixture `Σ w_I B(I)` as a single channel.
    pub fn reconstruct(&self) -> Result<ClassicalChannel> {
        mix(&self.components, &self.weights)
    }

    /// Largest count of nonzero rows over the components.
    pub fn max_row_support(&self) -> usize {
        self.components.iter().map(|c| c.row_support()).max().unwrap_or(0)
    }
}

/// A binary-message instance: two measurement families over a shared output
/// alphabet and, per input, a two-part positive decomposition of `1/d`.
#[derive(Debug, Clone)]
pub struct TheoremInstance {
    d: usize,
    e_plus: Povm,
    e_minus: Povm,
    betas: Vec<PositiveDecomposition>,
    target: ClassicalChannel,
}

impl TheoremInstance {
    pub fn new(
        d: usize,
        e_plus: Povm,
        e_minus: Povm,
        betas: Vec<PositiveDecomposition>,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("instance needs dimension at least 1".into()));
        }
        if e_plus.dim() != d || e_minus.dim() != d {
            return Err(Error::Dimension(format!(
                "measurement dimension {} and {} must equal {d}",
                e_plus.dim(),
                e_minus.dim()
            )));
        }
        let k = e_plus.len();
        if e_minus.len() != k {
            return Err(Error::Dimension(format!(
                "message measurements disagree on the output count: {k} vs {}",
                e_minus.len()
            )));
        }
        if betas.is_empty() {
            return Err(Error::Dimension("instance needs at least one input".into()));
        }
        let normalized = ComplexMatrix::identity(d).scale_re(1.0 / d as f64);
        for (j, dec) in betas.iter().enumerate() {
            if dec.len() != 2 {
                return Err(Error::Dimension(format!(
                    "input {j} must decompose into exactly two parts, got {}",
                    dec.len()
                )));
            }
            if (dec.target() - &normalized).max_abs_entry() > 1e-9 {
                return Err(Error::Domain(format!(
                    "input {j} does not decompose the normalized identity"
                )));
            }
        }

        let l = betas.len();
        let mut probs = vec![0.0; k * l];
        for (j, dec) in betas.iter().enumerate() {
            for i in 0..k {
                let plus = e_plus.element(i).trace_product(&dec.parts()[0])?.re;
                let minus = e_minus.element(i).trace_product(&dec.parts()[1])?.re;
                let mut p = plus + minus;
                if p < 0.0 && p > -1e-12 {
                    p = 0.0;
                }
                probs[i * l + j] = p;
            }
        }
        let target = ClassicalChannel::new(l, k, probs)?;
        Ok(Self { d, e_plus, e_minus, betas, target })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_outputs(&self) -> usize {
        self.e_plus.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.betas.len()
    }

    pub fn e_plus(&self) -> &Povm {
        &self.e_plus
    }

    pub fn e_minus(&self) -> &Povm {
        &self.e_minus
    }

    pub fn betas(&self) -> &[PositiveDecomposition] {
        &self.betas
    }

    pub fn target(&self) -> &ClassicalChannel {
        &self.target
    }
}

fn require_effect(name: &str, e: &ComplexMatrix) -> Result<()> {
    if !e.is_psd(1e-9)? {
        return Err(Error::Domain(format!("{name} is not positive semidefinite")));
    }
    let complement = &ComplexMatrix::identity(e.rows()) - e;
    if !complement.is_psd(1e-9)? {
        return Err(Error::Domain(format!("{name} exceeds the identity")));
    }
    Ok(())
}

/// Slack of the trace inequality
/// `|tr E⁺E⁻ρ_B|² ≤ tr E⁺β₊ + tr E⁻β₋` with `ρ_B = β₊ + β₋`;
/// nonnegative for every valid input.
pub fn check_trace_lemma(
    e_plus: &ComplexMatrix,
    e_minus: &ComplexMatrix,
    beta_plus: &ComplexMatrix,
    beta_minus: &ComplexMatrix,
) -> Result<f64> {
    require_effect("E+", e_plus)?;
    require_effect("E-", e_minus)?;
    if !beta_plus.is_psd(DEFAULT_PSD_TOL)? {
        return Err(Error::Domain("beta+ is not positive semidefinite".into()));
    }
    if !beta_minus.is_psd(DEFAULT_PSD_TOL)? {
        return Err(Error::Domain("beta- is not positive semidefinite".into()));
    }
    let rho_b = beta_plus + beta_minus;
    let tr = rho_b.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "beta+ + beta- has trace {tr}, expected 1"
        )));
    }
    let plus_term = e_plus.trace_product(beta_plus)?.re;
    let minus_term = e_minus.trace_product(beta_minus)?.re;
    let cross = (e_plus * e_minus).trace_product(&rho_b)?;
    Ok(plus_term + minus_term - cross.norm_sqr())
}

/// Atom measure `p_I = (1/d²)(tr E⁺_{i₁}E⁻_{i₂})(tr E⁺_{i₃}E⁻_{i₄})`; always
/// a probability measure for a valid instance.
pub fn p_measure(instance: &TheoremInstance) -> Result<PMeasure> {
    let k = instance.n_outputs();
    let d2 = (instance.d * instance.d) as f64;
    let mut cross = vec![0.0; k * k];
    for i1 in 0..k {
        for i2 in 0..k {
            let t = instance.e_plus.element(i1).trace_product(instance.e_minus.element(i2))?;
            if t.re < -1e-12 || t.im.abs() > 1e-9 {
                return Err(Error::Numerical(format!(
                    "cross trace ({i1},{i2}) = {t} is not a nonnegative real"
                )));
            }
            cross[i1 * k + i2] = t.re.max(0.0);
        }
    }
    let mut atoms = Vec::new();
    let mut total = 0.0;
    for i1 in 0..k {
        for i2 in 0..k {
            let first = cross[i1 * k + i2];
            if first == 0.0 {
                continue;
            }
            for i3 in 0..k {
                for i4 in 0..k {
                    let mass = first * cross[i3 * k + i4] / d2;
                    total += mass;
                    if mass > ATOM_CUTOFF {
                        atoms.push(([i1, i2, i3, i4], mass));
                    }
                }
            }
        }
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Normalization(format!(
            "atom masses sum to {total}, not 1"
        )));
    }
    PMeasure::new(k, atoms)
}

/// Largest Hall-condition violation `max_S P(S⁴) − A(S)` over every output
/// subset; at most zero (within tolerance) exactly when transport is
/// feasible.
pub fn hall_max_violation(p: &PMeasure, column: &[f64]) -> f64 {
    let k = p.k();
    let mut worst = f64::NEG_INFINITY;
    for mask in 0u64..(1u64 << k) {
        let in_s: Vec<bool> = (0..k).map(|i| mask >> i & 1 == 1).collect();
        let demand: f64 = (0..k).filter(|&i| in_s[i]).map(|i| column[i]).sum();
        let supply = p.mass_inside(&in_s);
        worst = worst.max(supply - demand);
    }
    worst
}

struct FlowEdge {
    to: usize,
    residual: f64,
}

struct FlowNetwork {
    edges: Vec<FlowEdge>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        Self { edges: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(FlowEdge { to, residual: cap });
        self.edges.push(FlowEdge { to: from, residual: 0.0 });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Shortest augmenting paths until none carries more than the flow floor.
    fn max_flow(&mut self, source: usize, sink: usize) {
        loop {
            let parent = self.bfs(source, sink);
            let Some(path) = self.trace_path(&parent, sink) else {
                return;
            };
            let mut bottleneck = f64::INFINITY;
            for &e in &path {
                bottleneck = bottleneck.min(self.edges[e].residual);
            }
            for &e in &path {
                self.edges[e].residual -= bottleneck;
                if self.edges[e].residual < FLOW_EPS {
                    self.edges[e].residual = 0.0;
                }
                self.edges[e ^ 1].residual += bottleneck;
            }
        }
    }

    fn bfs(&self, source: usize, sink: usize) -> Vec<Option<usize>> {
        let mut parent: Vec<Option<usize>> = vec![None; self.adj.len()];
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(source);
        let mut seen = vec![false; self.adj.len()];
        seen[source] = true;
        while let Some(u) = queue.pop_front() {
            if u == sink {
                break;
            }
            for &e in &self.adj[u] {
                let edge = &self.edges[e];
                if !seen[edge.to] && edge.residual > FLOW_EPS {
                    seen[edge.to] = true;
                    parent[edge.to] = Some(e);
                    queue.push_back(edge.to);
                }
            }
        }
        parent
    }

    fn trace_path(&self, parent: &[Option<usize>], sink: usize) -> Option<Vec<usize>> {
        parent[sink]?;
        let mut path = Vec::new();
        let mut node = sink;
        while let Some(e) = parent[node] {
            path.push(e);
            // the tail of an edge is the head of its paired reverse edge
            node = self.edges[e ^ 1].to;
        }
        Some(path)
    }
}

/// Finds a transportation plan moving the atom masses to the column
/// distribution along occurrence edges, or returns the violated Hall set.
pub fn transport_solve(p: &PMeasure, column: &[f64]) -> Result<TransportPlan> {
    let k = p.k();
    if column.len() != k {
        return Err(Error::Dimension(format!(
            "column has {} entries for {k} outputs",
            column.len()
        )));
    }
    if column.iter().any(|&c| !c.is_finite() || c < -1e-12) {
        return Err(Error::Domain("column contains a negative demand".into()));
    }
    let demand_total: f64 = column.iter().sum();
    if (demand_total - 1.0).abs() > 1e-9 || (p.total_mass() - 1.0).abs() > 1e-9 {
        return Err(Error::Normalization(format!(
            "supply {:.12} and demand {demand_total:.12} must both be 1",
            p.total_mass()
        )));
    }

    let n_atoms = p.atoms().len();
    let source = 0usize;
    let atom_node = |a: usize| 1 + a;
    let index_node = |i: usize| 1 + n_atoms + i;
    let sink = 1 + n_atoms + k;
    let mut net = FlowNetwork::new(sink + 1);

    let mut supply_edges = Vec::with_capacity(n_atoms);
    let mut occurrence_edges: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n_atoms);
    for (a, &(idx, mass)) in p.atoms().iter().enumerate() {
        supply_edges.push(net.add_edge(source, atom_node(a), mass));
        let mut uniq: Vec<usize> = idx.to_vec();
        uniq.sort_unstable();
        uniq.dedup();
        let edges = uniq
            .into_iter()
            .map(|i| (i, net.add_edge(atom_node(a), index_node(i), f64::INFINITY)))
            .collect();
        occurrence_edges.push(edges);
    }
    let mut demand_edges = Vec::with_capacity(k);
    for (i, &c) in column.iter().enumerate() {
        demand_edges.push(net.add_edge(index_node(i), sink, c.max(0.0)));
    }

    net.max_flow(source, sink);

    let delivered: f64 = demand_edges.iter().map(|&e| net.edges[e ^ 1].residual).sum();
    let unmet = demand_total - delivered;
    if unmet > INFEASIBILITY_TOL {
        // residual-reachable output nodes witness the Hall violation
        let parent = net.bfs(source, usize::MAX);
        let reached = |node: usize| node == source || parent[node].is_some();
        let witness: Vec<usize> = (0..k).filter(|&i| reached(index_node(i))).collect();
        let in_s: Vec<bool> = (0..k).map(|i| witness.contains(&i)).collect();
        let supply = p.mass_inside(&in_s);
        let demand: f64 = witness.iter().map(|&i| column[i]).sum();
        return Err(Error::Infeasible { unmet, witness, demand, supply });
    }

    let flows: Vec<Vec<(usize, f64)>> = occurrence_edges
        .iter()
        .map(|edges| {
            edges
                .iter()
                .map(|&(i, e)| (i, net.edges[e ^ 1].residual))
                .collect()
        })
        .collect();
    let plan = TransportPlan {
        k,
        atoms: p.atoms().iter().map(|&(idx, _)| idx).collect(),
        supplies: p.atoms().iter().map(|&(_, m)| m).collect(),
        flows,
    };
    let residual = plan.max_marginal_residual(column);
    if residual > MARGINAL_TOL {
        return Err(Error::Numerical(format!(
            "transport marginals drift by {residual:.3e}"
        )));
    }
    Ok(plan)
}

/// Full pipeline: atom measure, one transport per input, conditional
/// distributions as components. The reconstruction is checked against the
/// instance target before returning; failure here would falsify the
/// simulation claim and is surfaced as an error, never patched over.
pub fn decompose_theorem(instance: &TheoremInstance) -> Result<ConvexDecomposition> {
    let p = p_measure(instance)?;
    let l = instance.n_inputs();
    let k = instance.n_outputs();

    let plans = exec::map_collect(l, |j| transport_solve(&p, &instance.target().column(j)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut weights = Vec::with_capacity(p.atoms().len());
    let mut components = Vec::with_capacity(p.atoms().len());
    let mut atom_tags = Vec::with_capacity(p.atoms().len());
    for (a, &(idx, mass)) in p.atoms().iter().enumerate() {
        let mut probs = vec![0.0; k * l];
        for (j, plan) in plans.iter().enumerate() {
            let delivered = plan.row_marginal(a);
            if (delivered - mass).abs() > MARGINAL_TOL {
                return Err(Error::Numerical(format!(
                    "atom {idx:?} received {delivered:.15} of its mass {mass:.15} in column {j}"
                )));
            }
            for &(i, flow) in &plan.flows[a] {
                probs[i * l + j] = flow / delivered;
            }
        }
        weights.push(mass);
        components.push(ClassicalChannel::new(l, k, probs)?);
        atom_tags.push(idx);
    }

    // mass lost to the atom cutoff is redistributed by renormalizing
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let dec = ConvexDecomposition::new(weights, components, Some(atom_tags))?;

    let rebuilt = dec.reconstruct()?;
    let err = rebuilt.max_abs_diff(instance.target());
    if err > 1e-8 {
        return Err(Error::Numerical(format!(
            "decomposition reconstructs the channel only within {err:.3e}"
        )));
    }
    Ok(dec)
}

/// Candidate bilinear replacements for the cross-trace term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BilinearCandidate {
    /// `D(Z₁,Z₂) = Re tr(Z₁ Z₂ ρ_B)`; suspected to go negative on PSD pairs.
    Symmetrized,
    /// `D(Z₁,Z₂) = tr(Z₁ ρ_B^{1/2} Z₂ ρ_B^{1/2})`; positive, but suspected to
    /// break the trace inequality.
    SqrtSandwich,
}

/// A confirmed misbehavior of a candidate form, kept with enough context to
/// reproduce it.
#[derive(Debug, Clone)]
pub struct ViolationRecord {
    pub candidate: BilinearCandidate,
    pub trial: usize,
    pub trial_seed: u64,
    /// "positivity" or "trace-inequality".
    pub requirement: &'static str,
    /// The violating quantity: the form's value, or the inequality slack.
    pub value: f64,
    /// The same quantity recomputed with compensated summation.
    pub recheck: f64,
}

fn kahan_trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex {
    let n = a.rows();
    let (mut sum_re, mut c_re) = (0.0f64, 0.0f64);
    let (mut sum_im, mut c_im) = (0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..a.cols() {
            let term = a[(i, j)] * b[(j, i)];
            let y = term.re - c_re;
            let t = sum_re + y;
            c_re = (t - sum_re) - y;
            sum_re = t;
            let y = term.im - c_im;
            let t = sum_im + y;
            c_im = (t - sum_im) - y;
            sum_im = t;
        }
    }
    Complex::new(sum_re, sum_im)
}

fn candidate_value(
    candidate: BilinearCandidate,
    z1: &ComplexMatrix,
    z2: &ComplexMatrix,
    rho_b: &ComplexMatrix,
    root: &ComplexMatrix,
    compensated: bool,
) -> Complex {
    match candidate {
        BilinearCandidate::Symmetrized => {
            let prod = z1 * z2;
            if compensated {
                kahan_trace_product(&prod, rho_b)
            } else {
                prod.trace_product(rho_b).expect("square operands")
            }
        }
        BilinearCandidate::SqrtSandwich => {
            // tr(Z1 r Z2 r) = tr((Z1 r)(Z2 r)) with r = rho_B^{1/2}
            let a = z1 * root;
            let b = z2 * root;
            if compensated {
                kahan_trace_product(&a, &b)
            } else {
                a.trace_product(&b).expect("square operands")
            }
        }
    }
}

/// Randomized search for a violation of requirement (positivity for the
/// symmetrized form, the trace inequality for the sandwich form) against a
/// fixed receiver state. Every hit is re-verified with compensated summation
/// before being returned; an empty result is merely inconclusive.
pub fn search_bilinear_counterexample(
    rho_b: &ComplexMatrix,
    candidate: BilinearCandidate,
    trials: usize,
    seed: u64,
) -> Result<Option<ViolationRecord>> {
    if !rho_b.is_psd(DEFAULT_PSD_TOL)? {
        return Err(Error::Domain("receiver state is not positive semidefinite".into()));
    }
    if (rho_b.trace().re - 1.0).abs() > 1e-9 {
        return Err(Error::Normalization(format!(
            "receiver state trace {} is not 1",
            rho_b.trace().re
        )));
    }
    let d = rho_b.rows();
    let root = rho_b.psd_sqrt()?;

    let hits = exec::map_collect(trials, |trial| -> Result<Option<ViolationRecord>> {
        let trial_seed = sampling::trial_seed(seed, trial);
        let mut rng = sampling::rng_from(trial_seed);
        let e_plus = sampling::random_effect(d, &mut rng);
        let e_minus = sampling::random_effect(d, &mut rng);
        let (beta_plus, beta_minus) = sampling::random_split(rho_b, &root, &mut rng);

        let d_val = candidate_value(candidate, &e_plus, &e_minus, rho_b, &root, false);
        let record = match candidate {
            BilinearCandidate::Symmetrized => {
                let value = d_val.re;
                if value < -VIOLATION_TOL {
                    let recheck =
                        candidate_value(candidate, &e_plus, &e_minus, rho_b, &root, true).re;
                    (recheck < -VIOLATION_TOL).then_some(ViolationRecord {
                        candidate,
                        trial,
                        trial_seed,
                        requirement: "positivity",
                        value,
                        recheck,
                    })
                } else {
                    None
                }
            }
            BilinearCandidate::SqrtSandwich => {
                let plus_term = e_plus.trace_product(&beta_plus)?.re;
                let minus_term = e_minus.trace_product(&beta_minus)?.re;
                let slack = plus_term + minus_term - d_val.norm_sqr();
                if slack < -VIOLATION_TOL {
                    let d_re =
                        candidate_value(candidate, &e_plus, &e_minus, rho_b, &root, true);
                    let plus_k = kahan_trace_product(&e_plus, &beta_plus).re;
                    let minus_k = kahan_trace_product(&e_minus, &beta_minus).re;
                    let recheck = plus_k + minus_k - d_re.norm_sqr();
                    (recheck < -VIOLATION_TOL).then_some(ViolationRecord {
                        candidate,
                        trial,
                        trial_seed,
                        requirement: "trace-inequality",
                        value: slack,
                        recheck,
                    })
                } else {
                    None
                }
            }
        };
        Ok(record)
    });

    for hit in hits {
        if let Some(record) = hit? {
            return Ok(Some(record));
        }
    }
    Ok(None)
}
