//! Classical channel algebra: stochastic matrices, shared-randomness
//! mixtures, non-signaling resources, reward games, and the channel induced
//! by a measure-send-measure protocol over a shared quantum state.
//!
//! Channels are column-stochastic throughout: entry `(y, x)` is the
//! probability `N(y|x)` of output `y` on input `x`, and every column sums
//! to 1. Two-argument inputs such as "input and local outcome" are flattened
//! with the first index major.

use crate::error::{Error, Result};
use crate::quantum::{conditional_states, DensityOperator, Povm};

/// Column-stochastic `n_outputs x n_inputs` matrix of conditional
/// probabilities, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalChannel {
    n_inputs: usize,
    n_outputs: usize,
    probs: Vec<f64>,
}

impl ClassicalChannel {
    pub fn new(n_inputs: usize, n_outputs: usize, probs: Vec<f64>) -> Result<Self> {
        if n_inputs == 0 || n_outputs == 0 || probs.len() != n_inputs * n_outputs {
            return Err(Error::Dimension(format!(
                "channel matrix length {} does not match {n_outputs}x{n_inputs}",
                probs.len()
            )));
        }
        for (idx, &p) in probs.iter().enumerate() {
            if !p.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&p) {
                return Err(Error::Domain(format!(
                    "entry {idx} = {p} is not a probability"
                )));
            }
        }
        for x in 0..n_inputs {
            let s: f64 = (0..n_outputs).map(|y| probs[y * n_inputs + x]).sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::Normalization(format!(
                    "column {x} sums to {s}, not 1"
                )));
            }
        }
        Ok(Self { n_inputs, n_outputs, probs })
    }

    /// Identity channel on `n` symbols.
    pub fn identity(n: usize) -> Self {
        let mut probs = vec![0.0; n * n];
        for i in 0..n {
            probs[i * n + i] = 1.0;
        }
        Self { n_inputs: n, n_outputs: n, probs }
    }

    /// Deterministic channel sending input `x` to `assignment[x]`.
    pub fn deterministic(n_outputs: usize, assignment: &[usize]) -> Result<Self> {
        let n_inputs = assignment.len();
        let mut probs = vec![0.0; n_inputs * n_outputs];
        for (x, &y) in assignment.iter().enumerate() {
            if y >= n_outputs {
                return Err(Error::Dimension(format!(
                    "assignment {y} out of range for {n_outputs} outputs"
                )));
            }
            probs[y * n_inputs + x] = 1.0;
        }
        Ok(Self { n_inputs, n_outputs, probs })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    /// `N(y|x)`.
    pub fn prob(&self, y: usize, x: usize) -> f64 {
        self.probs[y * self.n_inputs + x]
    }

    pub fn entries(&self) -> &[f64] {
        &self.probs
    }

    pub fn column(&self, x: usize) -> Vec<f64> {
        (0..self.n_outputs).map(|y| self.prob(y, x)).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.n_inputs, self.n_outputs),
            (other.n_inputs, other.n_outputs),
            "channel shape mismatch"
        );
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Number of rows holding any entry above 1e-12.
    pub fn row_support(&self) -> usize {
        (0..self.n_outputs)
            .filter(|&y| (0..self.n_inputs).any(|x| self.prob(y, x) > 1e-12))
            .count()
    }
}

/// `dec ∘ enc` through a noiseless middle alphabet.
pub fn compose_noiseless(enc: &ClassicalChannel, dec: &ClassicalChannel) -> Result<ClassicalChannel> {
    if enc.n_outputs != dec.n_inputs {
        return Err(Error::Dimension(format!(
            "encoder outputs {} but decoder expects {}",
            enc.n_outputs, dec.n_inputs
        )));
    }
    let (l, n, k) = (enc.n_inputs, enc.n_outputs, dec.n_outputs);
    let mut probs = vec![0.0; k * l];
    for y in 0..k {
        for x in 0..l {
            probs[y * l + x] = (0..n).map(|r| dec.prob(y, r) * enc.prob(r, x)).sum();
        }
    }
    ClassicalChannel::new(l, k, probs)
}

/// Convex combination of equally shaped channels.
pub fn mix(channels: &[ClassicalChannel], weights: &[f64]) -> Result<ClassicalChannel> {
    if channels.is_empty() || channels.len() != weights.len() {
        return Err(Error::Dimension(format!(
            "{} channels with {} weights",
            channels.len(),
            weights.len()
        )));
    }
    let (l, k) = (channels[0].n_inputs, channels[0].n_outputs);
    for ch in channels {
        if ch.n_inputs != l || ch.n_outputs != k {
            return Err(Error::Dimension("mixture components differ in shape".into()));
        }
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < -1e-12) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Normalization(format!(
            "weights sum to {total} or contain a negative entry"
        )));
    }
    let mut probs = vec![0.0; k * l];
    for (ch, &w) in channels.iter().zip(weights) {
        for (acc, &p) in probs.iter_mut().zip(&ch.probs) {
            *acc += w * p;
        }
    }
    ClassicalChannel::new(l, k, probs)
}

/// Bipartite conditional distribution `ω(y₁,y₂|x₁,x₂)`. Construction checks
/// normalization only, so signaling tables can be built and then rejected by
/// [`NonSignalingResource::is_nonsignaling`].
#[derive(Debug, Clone)]
pub struct NonSignalingResource {
    n_x1: usize,
    n_x2: usize,
    n_y1: usize,
    n_y2: usize,
    table: Vec<f64>,
}

impl NonSignalingResource {
    pub fn new(n_x1: usize, n_x2: usize, n_y1: usize, n_y2: usize, table: Vec<f64>) -> Result<Self> {
        if n_x1 * n_x2 * n_y1 * n_y2 == 0 || table.len() != n_x1 * n_x2 * n_y1 * n_y2 {
            return Err(Error::Dimension(format!(
                "resource table length {} does not match |Y1||Y2||X1||X2| = {}",
                table.len(),
                n_x1 * n_x2 * n_y1 * n_y2
            )));
        }
        if table.iter().any(|&p| !p.is_finite() || p < -1e-12) {
            return Err(Error::Domain("resource table has a negative entry".into()));
        }
        let w = Self { n_x1, n_x2, n_y1, n_y2, table };
        for x1 in 0..n_x1 {
            for x2 in 0..n_x2 {
                let mut s = 0.0;
                for y1 in 0..n_y1 {
                    for y2 in 0..n_y2 {
                        s += w.prob(y1, y2, x1, x2);
                    }
                }
                if (s - 1.0).abs() > 1e-9 {
                    return Err(Error::Normalization(format!(
                        "outcomes for inputs ({x1},{x2}) sum to {s}, not 1"
                    )));
                }
            }
        }
        Ok(w)
    }

    /// Resource carrying a shared random symbol: both parties see the same
    /// `s` with probability `dist[s]`, whatever they ask.
    pub fn shared_randomness(n_x1: usize, n_x2: usize, dist: &[f64]) -> Result<Self> {
        let n = dist.len();
        let mut table = vec![0.0; n_x1 * n_x2 * n * n];
        for (s, &p) in dist.iter().enumerate() {
            for x1 in 0..n_x1 {
                for x2 in 0..n_x2 {
                    table[((s * n + s) * n_x1 + x1) * n_x2 + x2] = p;
                }
            }
        }
        Self::new(n_x1, n_x2, n, n, table)
    }

    pub fn sizes(&self) -> (usize, usize, usize, usize) {
        (self.n_x1, self.n_x2, self.n_y1, self.n_y2)
    }

    /// `ω(y₁,y₂|x₁,x₂)`.
    pub fn prob(&self, y1: usize, y2: usize, x1: usize, x2: usize) -> f64 {
        self.table[((y1 * self.n_y2 + y2) * self.n_x1 + x1) * self.n_x2 + x2]
    }

    /// Largest deviation of either party's outcome marginal across the other
    /// party's inputs; zero for a perfectly non-signaling table.
    pub fn max_signaling_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        // marginal of y1 must not depend on x2
        for x1 in 0..self.n_x1 {
            for y1 in 0..self.n_y1 {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for x2 in 0..self.n_x2 {
                    let m: f64 = (0..self.n_y2).map(|y2| self.prob(y1, y2, x1, x2)).sum();
                    lo = lo.min(m);
                    hi = hi.max(m);
                }
                worst = worst.max(hi - lo);
            }
        }
        // marginal of y2 must not depend on x1
        for x2 in 0..self.n_x2 {
            for y2 in 0..self.n_y2 {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for x1 in 0..self.n_x1 {
                    let m: f64 = (0..self.n_y1).map(|y1| self.prob(y1, y2, x1, x2)).sum();
                    lo = lo.min(m);
                    hi = hi.max(m);
                }
                worst = worst.max(hi - lo);
            }
        }
        worst
    }

    pub fn is_nonsignaling(&self, tol: f64) -> bool {
        self.max_signaling_violation() <= tol
    }
}

/// Reward game: an input distribution and a reward for each input-output
/// pair; its value on a channel is the expected reward.
#[derive(Debug, Clone)]
pub struct Game {
    n_inputs: usize,
    n_outputs: usize,
    input_dist: Vec<f64>,
    reward: Vec<f64>,
}

impl Game {
    /// `reward` is `n_inputs x n_outputs` row-major: entry `(x, y)` pays out
    /// when input `x` produces output `y`.
    pub fn new(input_dist: Vec<f64>, n_outputs: usize, reward: Vec<f64>) -> Result<Self> {
        let n_inputs = input_dist.len();
        if n_inputs == 0 || n_outputs == 0 || reward.len() != n_inputs * n_outputs {
            return Err(Error::Dimension(format!(
                "reward table length {} does not match {n_inputs}x{n_outputs}",
                reward.len()
            )));
        }
        let total: f64 = input_dist.iter().sum();
        if input_dist.iter().any(|&q| q < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Normalization(format!(
                "input distribution sums to {total} or has a negative entry"
            )));
        }
        if reward.iter().any(|r| !r.is_finite()) {
            return Err(Error::Domain("reward table has a non-finite entry".into()));
        }
        Ok(Self { n_inputs, n_outputs, input_dist, reward })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn input_dist(&self) -> &[f64] {
        &self.input_dist
    }

    /// `R(x, y)`.
    pub fn reward(&self, x: usize, y: usize) -> f64 {
        self.reward[x * self.n_outputs + y]
    }
}

/// `Σ_{x,y} R(x,y) N(y|x) q(x)`.
pub fn expected_reward(g: &Game, n: &ClassicalChannel) -> Result<f64> {
    if g.n_inputs != n.n_inputs() || g.n_outputs != n.n_outputs() {
        return Err(Error::Dimension(format!(
            "game shape {}x{} does not match channel {}x{}",
            g.n_inputs,
            g.n_outputs,
            n.n_inputs(),
            n.n_outputs()
        )));
    }
    let mut total = 0.0;
    for x in 0..g.n_inputs {
        for y in 0..g.n_outputs {
            total += g.reward(x, y) * n.prob(y, x) * g.input_dist[x];
        }
    }
    Ok(total)
}

/// One use of a non-signaling resource around a noiseless `n`-letter channel.
/// The sender turns `x` into a resource query `x₁`, encodes the letter `r`
/// from `(x, y₁)`; the receiver turns `r` into a query `x₂` and decodes `y`
/// from `(r, y₂)`. Flattened inputs are first-index major: `enc` column
/// `x·|Y₁| + y₁`, `dec` column `r·|Y₂| + y₂`.
pub fn assisted_channel_classical(
    w: &NonSignalingResource,
    in1: &ClassicalChannel,
    enc: &ClassicalChannel,
    in2: &ClassicalChannel,
    dec: &ClassicalChannel,
) -> Result<ClassicalChannel> {
    let (n_x1, n_x2, n_y1, n_y2) = w.sizes();
    let l = in1.n_inputs();
    let n = enc.n_outputs();
    let k = dec.n_outputs();
    if in1.n_outputs() != n_x1 {
        return Err(Error::Dimension(format!(
            "query channel produces {} symbols but the resource expects {n_x1}",
            in1.n_outputs()
        )));
    }
    if enc.n_inputs() != l * n_y1 {
        return Err(Error::Dimension(format!(
            "encoder expects {} flattened inputs, got {}",
            l * n_y1,
            enc.n_inputs()
        )));
    }
    if in2.n_inputs() != n || in2.n_outputs() != n_x2 {
        return Err(Error::Dimension(format!(
            "receiver query channel must be {n} -> {n_x2}, got {} -> {}",
            in2.n_inputs(),
            in2.n_outputs()
        )));
    }
    if dec.n_inputs() != n * n_y2 {
        return Err(Error::Dimension(format!(
            "decoder expects {} flattened inputs, got {}",
            n * n_y2,
            dec.n_inputs()
        )));
    }
    if !w.is_nonsignaling(1e-8) {
        return Err(Error::Domain(format!(
            "resource signals: marginal deviation {:.3e}",
            w.max_signaling_violation()
        )));
    }

    let mut probs = vec![0.0; k * l];
    for x in 0..l {
        for x1 in 0..n_x1 {
            let p_in1 = in1.prob(x1, x);
            if p_in1 == 0.0 {
                continue;
            }
            for y1 in 0..n_y1 {
                for r in 0..n {
                    let p_enc = enc.prob(r, x * n_y1 + y1);
                    if p_enc == 0.0 {
                        continue;
                    }
                    for x2 in 0..n_x2 {
                        let p_in2 = in2.prob(x2, r);
                        if p_in2 == 0.0 {
                            continue;
                        }
                        for y2 in 0..n_y2 {
                            let p_w = w.prob(y1, y2, x1, x2);
                            for y in 0..k {
                                probs[y * l + x] +=
                                    p_in1 * p_enc * p_in2 * p_w * dec.prob(y, r * n_y2 + y2);
                            }
                        }
                    }
                }
            }
        }
    }
    ClassicalChannel::new(l, k, probs)
}

/// Measure, send one of `n` letters, measure again.
#[derive(Debug, Clone)]
pub struct AssistedQuantumProtocol {
    rho: DensityOperator,
    alice: Vec<Povm>,
    bob: Vec<Povm>,
}

impl AssistedQuantumProtocol {
    /// `alice[x]` has one effect per letter; `bob[r]` has one effect per
    /// channel output, all on the receiver side of `rho`.
    pub fn new(rho: DensityOperator, alice: Vec<Povm>, bob: Vec<Povm>) -> Result<Self> {
        if alice.is_empty() || bob.is_empty() {
            return Err(Error::Dimension("protocol needs measurements on both sides".into()));
        }
        let n = alice[0].len();
        for p in &alice {
            if p.dim() != rho.dim_a() || p.len() != n {
                return Err(Error::Dimension(
                    "sender measurements must act on the sender system with one effect per letter"
                        .into(),
                ));
            }
        }
        if bob.len() != n {
            return Err(Error::Dimension(format!(
                "{} letters but {} receiver measurements",
                n,
                bob.len()
            )));
        }
        let k = bob[0].len();
        for p in &bob {
            if p.dim() != rho.dim_b() || p.len() != k {
                return Err(Error::Dimension(
                    "receiver measurements must act on the receiver system with a common outcome count"
                        .into(),
                ));
            }
        }
        Ok(Self { rho, alice, bob })
    }

    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn n_letters(&self) -> usize {
        self.alice[0].len()
    }

    pub fn alice(&self) -> &[Povm] {
        &self.alice
    }

    pub fn bob(&self) -> &[Povm] {
        &self.bob
    }
}

/// Channel `N(y|x) = Σ_r tr ρ(F^{(x)}_r ⊗ E^{(r)}_y)`, evaluated through the
/// receiver-side conditional states `β^{(x)}_r`.
pub fn assisted_channel_quantum(p: &AssistedQuantumProtocol) -> Result<ClassicalChannel> {
    let l = p.alice.len();
    let k = p.bob[0].len();
    let mut probs = vec![0.0; k * l];
    for (x, fx) in p.alice.iter().enumerate() {
        let betas = conditional_states(&p.rho, fx)?;
        for (r, beta) in betas.parts().iter().enumerate() {
            for (y, e) in p.bob[r].elements().iter().enumerate() {
                probs[y * l + x] += e.trace_product(beta)?.re;
            }
        }
    }
    for p in &mut probs {
        if *p < 0.0 && *p > -1e-12 {
            *p = 0.0;
        }
    }
    ClassicalChannel::new(l, k, probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{Complex, ComplexMatrix};
    use crate::quantum::maximally_entangled;

    fn random_channel(l: usize, k: usize, seed: u64) -> ClassicalChannel {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        let mut probs = vec![0.0; k * l];
        for x in 0..l {
            let col: Vec<f64> = (0..k).map(|_| next() + 1e-3).collect();
            let s: f64 = col.iter().sum();
            for y in 0..k {
                probs[y * l + x] = col[y] / s;
            }
        }
        ClassicalChannel::new(l, k, probs).unwrap()
    }

    #[test]
    fn channel_validation() {
        assert!(ClassicalChannel::new(2, 2, vec![0.5, 0.5, 0.5, 0.5]).is_ok());
        assert!(matches!(
            ClassicalChannel::new(2, 2, vec![0.6, 0.5, 0.5, 0.5]),
            Err(Error::Normalization(_))
        ));
        assert!(matches!(
            ClassicalChannel::new(2, 2, vec![1.5, 0.5, -0.5, 0.5]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            ClassicalChannel::new(2, 2, vec![1.0; 3]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn compose_identities() {
        let id3 = ClassicalChannel::identity(3);
        let out = compose_noiseless(&id3, &id3).unwrap();
        assert_eq!(out, id3);
    }

    #[test]
    fn compose_through_constant_encoder() {
        let enc = ClassicalChannel::deterministic(2, &[0, 0, 0]).unwrap();
        let dec = random_channel(2, 4, 5);
        let out = compose_noiseless(&enc, &dec).unwrap();
        for x in 0..3 {
            for y in 0..4 {
                assert!((out.prob(y, x) - dec.prob(y, 0)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn compose_rank_is_bounded_by_middle_alphabet() {
        let enc = random_channel(6, 2, 11);
        let dec = random_channel(2, 4, 12);
        let out = compose_noiseless(&enc, &dec).unwrap();
        let m = ComplexMatrix::from_fn(4, 6, |y, x| Complex::new(out.prob(y, x), 0.0));
        let gram = &m.adjoint() * &m;
        let (evals, _) = gram.eigh().unwrap();
        let rank = evals.iter().filter(|&&e| e > 1e-9).count();
        assert!(rank <= 2, "rank {rank}");
    }

    #[test]
    fn mix_basics() {
        let n = random_channel(3, 3, 21);
        assert!(mix(std::slice::from_ref(&n), &[1.0]).unwrap().max_abs_diff(&n) < 1e-15);
        assert!(
            mix(&[n.clone(), n.clone()], &[0.5, 0.5]).unwrap().max_abs_diff(&n) < 1e-15
        );
        assert!(matches!(
            mix(&[n.clone(), n.clone()], &[0.7, 0.7]),
            Err(Error::Normalization(_))
        ));
        assert!(matches!(
            mix(&[n.clone(), random_channel(2, 3, 22)], &[0.5, 0.5]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn mix_of_deterministic_channels() {
        let a = ClassicalChannel::deterministic(2, &[0, 1]).unwrap();
        let b = ClassicalChannel::deterministic(2, &[1, 1]).unwrap();
        let m = mix(&[a, b], &[1.0 / 3.0, 2.0 / 3.0]).unwrap();
        for &p in m.entries() {
            let hit = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]
                .iter()
                .any(|&v| (p - v).abs() < 1e-12);
            assert!(hit, "unexpected entry {p}");
        }
    }

    #[test]
    fn shared_randomness_is_nonsignaling() {
        let w = NonSignalingResource::shared_randomness(3, 2, &[0.25, 0.75]).unwrap();
        assert!(w.is_nonsignaling(1e-12));
        assert_eq!(w.max_signaling_violation(), 0.0);
    }

    #[test]
    fn identity_forwarding_signals_maximally() {
        // y2 = x1: one party's outcome is the other's input
        let mut table = vec![0.0; 2 * 2];
        for x1 in 0..2 {
            // layout ((y1*n_y2 + y2)*n_x1 + x1)*n_x2 + x2 with n_y1 = n_x2 = 1
            table[x1 * 2 + x1] = 1.0;
        }
        let w = NonSignalingResource::new(2, 1, 1, 2, table).unwrap();
        assert!(!w.is_nonsignaling(1e-10));
        assert!((w.max_signaling_violation() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn assisted_channel_with_trivial_resource_composes() {
        let w = NonSignalingResource::new(1, 1, 1, 1, vec![1.0]).unwrap();
        let enc = random_channel(5, 3, 31);
        let dec = random_channel(3, 4, 32);
        let in1 = ClassicalChannel::deterministic(1, &[0, 0, 0, 0, 0]).unwrap();
        let in2 = ClassicalChannel::deterministic(1, &[0, 0, 0]).unwrap();
        let assisted = assisted_channel_classical(&w, &in1, &enc, &in2, &dec).unwrap();
        let composed = compose_noiseless(&enc, &dec).unwrap();
        assert!(assisted.max_abs_diff(&composed) < 1e-12);
    }

    #[test]
    fn assisted_channel_with_shared_bit_is_a_mixture() {
        // strategy s in {0,1}: encode f_s, decode g_s
        let f = [[0usize, 1, 0], [1, 0, 1]];
        let g = [[0usize, 2], [2, 1]];
        let l = 3;
        let n = 2;
        let k = 3;

        let w = NonSignalingResource::shared_randomness(1, 1, &[0.5, 0.5]).unwrap();
        let in1 = ClassicalChannel::deterministic(1, &vec![0; l]).unwrap();
        let in2 = ClassicalChannel::deterministic(1, &vec![0; n]).unwrap();
        // enc column x*2 + s -> letter f_s(x); dec column r*2 + s -> g_s(r)
        let enc_assign: Vec<usize> = (0..l * 2).map(|c| f[c % 2][c / 2]).collect();
        let dec_assign: Vec<usize> = (0..n * 2).map(|c| g[c % 2][c / 2]).collect();
        let enc = ClassicalChannel::deterministic(n, &enc_assign).unwrap();
        let dec = ClassicalChannel::deterministic(k, &dec_assign).unwrap();

        let assisted = assisted_channel_classical(&w, &in1, &enc, &in2, &dec).unwrap();

        let pieces: Vec<ClassicalChannel> = (0..2)
            .map(|s| {
                let e = ClassicalChannel::deterministic(n, f[s].as_ref()).unwrap();
                let d = ClassicalChannel::deterministic(k, g[s].as_ref()).unwrap();
                compose_noiseless(&e, &d).unwrap()
            })
            .collect();
        let mixed = mix(&pieces, &[0.5, 0.5]).unwrap();
        assert!(assisted.max_abs_diff(&mixed) < 1e-12);
    }

    #[test]
    fn assisted_channel_rejects_signaling_resources() {
        let mut table = vec![0.0; 2 * 2];
        for x1 in 0..2 {
            table[x1 * 2 + x1] = 1.0;
        }
        let w = NonSignalingResource::new(2, 1, 1, 2, table).unwrap();
        let in1 = ClassicalChannel::identity(2);
        let enc = ClassicalChannel::deterministic(2, &[0, 1]).unwrap();
        let in2 = ClassicalChannel::deterministic(1, &[0, 0]).unwrap();
        let dec = ClassicalChannel::deterministic(2, &[0, 0, 1, 1]).unwrap();
        assert!(matches!(
            assisted_channel_classical(&w, &in1, &enc, &in2, &dec),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn quantum_channel_without_branching() {
        // sender always produces the first letter, so every column is the
        // receiver's first-measurement distribution on the marginal
        let rho = maximally_entangled(2).unwrap();
        let alice = Povm::new(vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(2, 2)])
            .unwrap();
        let e = ComplexMatrix::from_real_rows(&[&[0.8, 0.1], &[0.1, 0.3]]);
        let bob1 = Povm::new(vec![e.clone(), &ComplexMatrix::identity(2) - &e]).unwrap();
        let bob2 = Povm::new(vec![
            ComplexMatrix::identity(2).scale_re(0.5),
            ComplexMatrix::identity(2).scale_re(0.5),
        ])
        .unwrap();
        let p = AssistedQuantumProtocol::new(
            rho.clone(),
            vec![alice.clone(), alice],
            vec![bob1.clone(), bob2],
        )
        .unwrap();
        let ch = assisted_channel_quantum(&p).unwrap();
        let dist = bob1.outcome_distribution(&rho.marginal_b()).unwrap();
        for x in 0..2 {
            assert!((ch.prob(0, x) - dist[0]).abs() < 1e-12);
            assert!((ch.prob(1, x) - dist[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn quantum_channel_matches_joint_trace_form() {
        let rho = maximally_entangled(2).unwrap();
        let w1 = ComplexMatrix::from_real_rows(&[&[0.6, 0.2], &[0.2, 0.5]]);
        let w2 = ComplexMatrix::from_real_rows(&[&[0.3, -0.1], &[-0.1, 0.8]]);
        let alice: Vec<Povm> = [w1, w2]
            .into_iter()
            .map(|w| Povm::new(vec![w.clone(), &ComplexMatrix::identity(2) - &w]).unwrap())
            .collect();
        let e1 = ComplexMatrix::from_real_rows(&[&[0.5, 0.25], &[0.25, 0.25]]);
        let e2 = ComplexMatrix::from_real_rows(&[&[0.25, 0.0], &[0.0, 0.5]]);
        let bob: Vec<Povm> = [e1, e2]
            .into_iter()
            .map(|e| {
                let rest = (&ComplexMatrix::identity(2) - &e).scale_re(0.5);
                Povm::new(vec![e.clone(), rest.clone(), rest]).unwrap()
            })
            .collect();
        let p = AssistedQuantumProtocol::new(rho.clone(), alice.clone(), bob.clone()).unwrap();
        let ch = assisted_channel_quantum(&p).unwrap();

        for (x, alice_x) in alice.iter().enumerate() {
            for y in 0..3 {
                let direct: f64 = (0..2)
                    .map(|r| {
                        let joint = alice_x.element(r).kron(bob[r].element(y));
                        rho.matrix().trace_product(&joint).unwrap().re
                    })
                    .sum();
                assert!((ch.prob(y, x) - direct).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn reward_of_constant_game_is_constant() {
        let g = Game::new(vec![0.25; 4], 3, vec![1.0; 12]).unwrap();
        let n = random_channel(4, 3, 41);
        assert!((expected_reward(&g, &n).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reward_is_linear_in_the_channel() {
        let g = Game::new(
            vec![0.5, 0.3, 0.2],
            2,
            vec![1.0, -0.5, 0.25, 2.0, 0.0, 1.5],
        )
        .unwrap();
        let n1 = random_channel(3, 2, 51);
        let n2 = random_channel(3, 2, 52);
        let t = 0.37;
        let mixed = mix(&[n1.clone(), n2.clone()], &[t, 1.0 - t]).unwrap();
        let lhs = expected_reward(&g, &mixed).unwrap();
        let rhs = t * expected_reward(&g, &n1).unwrap() + (1.0 - t) * expected_reward(&g, &n2).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
