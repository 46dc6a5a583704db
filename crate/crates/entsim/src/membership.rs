//! Membership in the shared-randomness classes: is a channel a convex
//! combination of stochastic matrices with at most `n` nonzero rows?
//!
//! The extreme points of that set are the deterministic maps whose image has
//! at most `n` values, so membership is a small linear program: minimize the
//! l1 distance between the query and the mixture polytope. Distance zero
//! means membership with an explicit mixture certificate; positive distance
//! yields a separating reward game from the optimal duals.

use crate::channels::{ClassicalChannel, Game};
use crate::error::{Error, Result};
use crate::exec;
use crate::simplex::solve_equality_lp;
use crate::simulate::ConvexDecomposition;

/// Hard ceiling on the raw enumeration space `k^l`.
pub const ENUMERATION_CAP: usize = 10_000_000;

/// Total map from inputs `[l]` to outputs `[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicChannel {
    assignment: Vec<usize>,
    n_outputs: usize,
}

impl DeterministicChannel {
    pub fn new(assignment: Vec<usize>, n_outputs: usize) -> Result<Self> {
        if assignment.is_empty() || n_outputs == 0 {
            return Err(Error::Dimension("deterministic map needs inputs and outputs".into()));
        }
        if let Some(&y) = assignment.iter().find(|&&y| y >= n_outputs) {
            return Err(Error::Dimension(format!(
                "assignment value {y} out of range for {n_outputs} outputs"
            )));
        }
        Ok(Self { assignment, n_outputs })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn n_inputs(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    /// Number of distinct outputs actually hit.
    pub fn image_size(&self) -> usize {
        let mut seen = vec![false; self.n_outputs];
        let mut count = 0;
        for &y in &self.assignment {
            if !seen[y] {
                seen[y] = true;
                count += 1;
            }
        }
        count
    }

    pub fn to_channel(&self) -> ClassicalChannel {
        ClassicalChannel::deterministic(self.n_outputs, &self.assignment)
            .expect("assignment validated at construction")
    }

    /// `Σ_x q(x) R(x, f(x))` without building the matrix.
    pub fn game_value(&self, g: &Game) -> f64 {
        self.assignment
            .iter()
            .enumerate()
            .map(|(x, &y)| g.input_dist()[x] * g.reward(x, y))
            .sum()
    }
}

/// All deterministic maps `[l] -> [k]` with image size at most `min(n, k)`,
/// in lexicographic order of their assignment tuples.
pub fn enumerate_deterministic(l: usize, k: usize, n: usize) -> Result<Vec<DeterministicChannel>> {
    enumerate_deterministic_with_cap(l, k, n, ENUMERATION_CAP)
}

pub fn enumerate_deterministic_with_cap(
    l: usize,
    k: usize,
    n: usize,
    cap: usize,
) -> Result<Vec<DeterministicChannel>> {
    if l == 0 || k == 0 || n == 0 {
        return Err(Error::Dimension("enumeration needs l, k, n >= 1".into()));
    }
    let space = (k as u128)
        .checked_pow(l as u32)
        .ok_or_else(|| Error::Resource(format!("{k}^{l} overflows the enumeration space")))?;
    if space > cap as u128 {
        return Err(Error::Resource(format!(
            "{k}^{l} = {space} deterministic maps exceed the cap of {cap}"
        )));
    }
    let limit = n.min(k);
    let mut out = Vec::new();
    let mut assign = vec![0usize; l];
    loop {
        let mut seen = vec![false; k];
        let mut image = 0;
        for &y in &assign {
            if !seen[y] {
                seen[y] = true;
                image += 1;
            }
        }
        if image <= limit {
            out.push(DeterministicChannel { assignment: assign.clone(), n_outputs: k });
        }
        let mut pos = l;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            assign[pos] += 1;
            if assign[pos] < k {
                break;
            }
            assign[pos] = 0;
        }
    }
}

/// Outcome of a membership query: a mixture certificate when feasible, a
/// separating game when not, plus the l1 distance to the polytope either way.
#[derive(Debug, Clone)]
pub struct MembershipResult {
    pub feasible: bool,
    pub distance: f64,
    pub certificate: Option<ConvexDecomposition>,
    pub witness: Option<Game>,
}

/// Decides whether `a` is a convex combination of stochastic matrices with at
/// most `n` nonzero rows, up to l1 distance `tol`.
pub fn in_cn_sr(a: &ClassicalChannel, n: usize, tol: f64) -> Result<MembershipResult> {
    let l = a.n_inputs();
    let k = a.n_outputs();
    let dets = enumerate_deterministic(l, k, n)?;
    let nd = dets.len();
    let entries = k * l;
    let nv = nd + 2 * entries;

    // variables [lambda_D | u_e | v_e]; rows: one per channel entry, then the
    // normalization row; minimizing sum(u + v) measures the l1 misfit
    let mut rows = Vec::with_capacity(entries + 1);
    let mut b = Vec::with_capacity(entries + 1);
    for y in 0..k {
        for x in 0..l {
            let mut row = vec![0.0; nv];
            for (d, det) in dets.iter().enumerate() {
                if det.assignment[x] == y {
                    row[d] = 1.0;
                }
            }
            let e = y * l + x;
            row[nd + e] = 1.0;
            row[nd + entries + e] = -1.0;
            rows.push(row);
            b.push(a.prob(y, x));
        }
    }
    let mut norm_row = vec![0.0; nv];
    norm_row[..nd].fill(1.0);
    rows.push(norm_row);
    b.push(1.0);
    let mut costs = vec![0.0; nv];
    costs[nd..].fill(1.0);

    let sol = solve_equality_lp(&rows, &b, &costs)?;
    let distance = sol.objective.max(0.0);

    if distance <= tol {
        let mut weights = Vec::new();
        let mut components = Vec::new();
        for (d, det) in dets.iter().enumerate() {
            if sol.primal[d] > 1e-12 {
                weights.push(sol.primal[d]);
                components.push(det.to_channel());
            }
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let certificate = ConvexDecomposition::new(weights, components, None)?;
        return Ok(MembershipResult { feasible: true, distance, certificate: Some(certificate), witness: None });
    }

    // separating game from the entry-row duals: |w_e| <= 1 by dual
    // feasibility, and every extreme point scores at least `distance` below
    // the query channel
    let w = &sol.duals[..entries];
    let scale = w.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if scale < 1e-15 {
        return Err(Error::Numerical(
            "membership LP reported a gap but returned a null dual".into(),
        ));
    }
    let mut reward = vec![0.0; l * k];
    for y in 0..k {
        for x in 0..l {
            reward[x * k + y] = w[y * l + x] / scale;
        }
    }
    let witness = Game::new(vec![1.0 / l as f64; l], k, reward)?;
    Ok(MembershipResult { feasible: false, distance, certificate: None, witness: Some(witness) })
}

/// Best value of a game over mixtures of `n`-row channels, attained at a
/// deterministic extreme point; ties break toward enumeration order.
pub fn best_classical_value(g: &Game, n: usize) -> Result<(f64, DeterministicChannel)> {
    let dets = enumerate_deterministic(g.n_inputs(), g.n_outputs(), n)?;
    let values = exec::map_slice(&dets, |d| d.game_value(g));
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    Ok((values[best], dets[best].clone()))
}

/// Everything a certificate check measures, whether or not it passes.
#[derive(Debug, Clone)]
pub struct CertificateReport {
    pub ok: bool,
    pub diagnostic: Option<String>,
    pub reconstruction_error: f64,
    pub max_row_support: usize,
    pub weight_sum: f64,
}

/// Full check of a mixture certificate against a target channel: weights form
/// a distribution, every component has at most `n` nonzero rows, and the
/// mixture reproduces the target within `tol` entrywise.
pub fn check_certificate(
    a: &ClassicalChannel,
    cert: &ConvexDecomposition,
    n: usize,
    tol: f64,
) -> CertificateReport {
    let weight_sum: f64 = cert.weights().iter().sum();
    let max_row_support = cert
        .components()
        .iter()
        .map(|c| c.row_support())
        .max()
        .unwrap_or(0);

    let fail = |diag: &str, err: f64| CertificateReport {
        ok: false,
        diagnostic: Some(diag.to_string()),
        reconstruction_error: err,
        max_row_support,
        weight_sum,
    };

    if cert.components().is_empty() {
        return fail("empty", f64::INFINITY);
    }
    for c in cert.components() {
        if c.n_inputs() != a.n_inputs() || c.n_outputs() != a.n_outputs() {
            return fail("shape", f64::INFINITY);
        }
    }
    if cert.weights().iter().any(|&w| w < -1e-12) || (weight_sum - 1.0).abs() > 1e-9 {
        return fail("weights", f64::INFINITY);
    }
    if max_row_support > n {
        return fail("row-support", f64::INFINITY);
    }

    let mut err = 0.0f64;
    for y in 0..a.n_outputs() {
        for x in 0..a.n_inputs() {
            let mixed: f64 = cert
                .weights()
                .iter()
                .zip(cert.components())
                .map(|(w, c)| w * c.prob(y, x))
                .sum();
            err = err.max((mixed - a.prob(y, x)).abs());
        }
    }
    if err > tol {
        return fail("reconstruction", err);
    }
    CertificateReport {
        ok: true,
        diagnostic: None,
        reconstruction_error: err,
        max_row_support,
        weight_sum,
    }
}

pub fn verify_cn_sr_certificate(
    a: &ClassicalChannel,
    cert: &ConvexDecomposition,
    n: usize,
    tol: f64,
) -> bool {
    check_certificate(a, cert, n, tol).ok
}
