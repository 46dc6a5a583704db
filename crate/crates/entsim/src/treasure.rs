//! The two-winning-boxes guessing game: four boxes, two of them hold a
//! prize, the first player learns the winning pair and may send a single
//! bit. Sharing a singlet lets the players win with probability
//! `(4+√2)/6 ≈ 0.902`, beating every classical one-bit strategy (best:
//! `5/6`). This module builds the explicit protocol, its induced
//! 6-input/4-output channel, and the associated game.

use crate::channels::{assisted_channel_quantum, AssistedQuantumProtocol, ClassicalChannel, Game};
use crate::error::Result;
use crate::qmat::ComplexMatrix;
use crate::quantum::{conditional_states, singlet, Povm};
use crate::simulate::TheoremInstance;

/// An unordered pair of winning boxes out of `{1,2,3,4}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TreasureConfig {
    a: u8,
    b: u8,
}

impl TreasureConfig {
    /// The six configurations in the fixed enumeration order used for
    /// channel columns and game inputs.
    pub const ALL: [TreasureConfig; 6] = [
        TreasureConfig { a: 1, b: 2 },
        TreasureConfig { a: 1, b: 3 },
        TreasureConfig { a: 1, b: 4 },
        TreasureConfig { a: 2, b: 3 },
        TreasureConfig { a: 2, b: 4 },
        TreasureConfig { a: 3, b: 4 },
    ];

    pub fn new(a: u8, b: u8) -> Result<Self> {
        if !(1..=4).contains(&a) || !(1..=4).contains(&b) || a == b {
            return Err(crate::Error::Domain(format!(
                "boxes must be a distinct pair from 1..=4, got ({a},{b})"
            )));
        }
        Ok(Self { a: a.min(b), b: a.max(b) })
    }

    pub fn boxes(&self) -> (u8, u8) {
        (self.a, self.b)
    }

    pub fn contains(&self, box_label: u8) -> bool {
        self.a == box_label || self.b == box_label
    }

    /// Position in the fixed enumeration order.
    pub fn index(&self) -> usize {
        Self::ALL.iter().position(|c| c == self).expect("all pairs enumerated")
    }
}

/// The bit value the first player sends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

fn half_identity_plus(op: &ComplexMatrix, coeff: f64) -> ComplexMatrix {
    (&ComplexMatrix::identity(2) + &op.scale_re(coeff)).scale_re(0.5)
}

/// The sender's two-outcome measurement for a configuration. The pairs
/// `{1,2}` and `{3,4}` use the trivial measurements (the bit is certain);
/// the four mixed pairs measure `σ_z` or `σ_x` with a sign depending on the
/// configuration.
pub fn alice_povm(c: TreasureConfig) -> Povm {
    let one = ComplexMatrix::identity(2);
    let zero = ComplexMatrix::zeros(2, 2);
    let elements = match c.boxes() {
        (1, 2) => vec![one, zero],
        (3, 4) => vec![zero, one],
        (1, 3) => vec![
            half_identity_plus(&ComplexMatrix::sigma_z(), 1.0),
            half_identity_plus(&ComplexMatrix::sigma_z(), -1.0),
        ],
        (2, 4) => vec![
            half_identity_plus(&ComplexMatrix::sigma_z(), -1.0),
            half_identity_plus(&ComplexMatrix::sigma_z(), 1.0),
        ],
        (1, 4) => vec![
            half_identity_plus(&ComplexMatrix::sigma_x(), 1.0),
            half_identity_plus(&ComplexMatrix::sigma_x(), -1.0),
        ],
        (2, 3) => vec![
            half_identity_plus(&ComplexMatrix::sigma_x(), -1.0),
            half_identity_plus(&ComplexMatrix::sigma_x(), 1.0),
        ],
        _ => unreachable!("constructor admits exactly six configurations"),
    };
    Povm::with_labels(elements, vec!["+".into(), "-".into()], crate::qmat::DEFAULT_PSD_TOL)
        .expect("protocol measurements are valid by construction")
}

/// The receiver's four-outcome measurement for each message value. A `+`
/// points at boxes 1 and 2 (outcomes 3 and 4 never occur), a `−` at boxes
/// 3 and 4.
pub fn bob_povm(sign: Sign) -> Povm {
    let one = ComplexMatrix::identity(2);
    let zero = ComplexMatrix::zeros(2, 2);
    let inv_sqrt2 = 1.0 / 2f64.sqrt();
    let elements = match sign {
        Sign::Plus => {
            let diag = &ComplexMatrix::sigma_z() + &ComplexMatrix::sigma_x();
            let e1 = half_identity_plus(&diag, -inv_sqrt2);
            let e2 = &one - &e1;
            vec![e1, e2, zero.clone(), zero]
        }
        Sign::Minus => {
            let anti = &ComplexMatrix::sigma_z() - &ComplexMatrix::sigma_x();
            let e3 = half_identity_plus(&anti, inv_sqrt2);
            let e4 = &one - &e3;
            vec![zero.clone(), zero, e3, e4]
        }
    };
    Povm::new(elements).expect("protocol measurements are valid by construction")
}

/// Probability that the receiver's guess lands in the winning pair when the
/// players run the singlet protocol for configuration `c`.
pub fn win_probability(c: TreasureConfig) -> f64 {
    let rho = singlet();
    let alice = alice_povm(c);
    let mut total = 0.0;
    for (s, sign) in [Sign::Plus, Sign::Minus].into_iter().enumerate() {
        let bob = bob_povm(sign);
        for y in 0..4u8 {
            if !c.contains(y + 1) {
                continue;
            }
            let joint = alice.element(s).kron(bob.element(y as usize));
            total += rho
                .matrix()
                .trace_product(&joint)
                .expect("shapes agree by construction")
                .re;
        }
    }
    total
}

/// Average winning probability over the six equally likely configurations:
/// `(4+√2)/6`.
pub fn overall_win_probability() -> f64 {
    TreasureConfig::ALL.iter().map(|&c| win_probability(c)).sum::<f64>() / 6.0
}

/// The protocol bundled as a one-bit quantum-assisted strategy.
pub fn protocol() -> AssistedQuantumProtocol {
    let alice: Vec<Povm> = TreasureConfig::ALL.iter().map(|&c| alice_povm(c)).collect();
    let bob = vec![bob_povm(Sign::Plus), bob_povm(Sign::Minus)];
    AssistedQuantumProtocol::new(singlet(), alice, bob)
        .expect("protocol shapes agree by construction")
}

/// The 6-input/4-output channel the protocol realizes; columns follow
/// [`TreasureConfig::ALL`].
pub fn induced_channel() -> ClassicalChannel {
    assisted_channel_quantum(&protocol()).expect("protocol is valid by construction")
}

/// The same protocol from the receiver's point of view: the two message
/// measurements together with the conditional states each configuration
/// induces on the receiver's side (a positive decomposition of `1/2`).
pub fn theorem_instance() -> TheoremInstance {
    let rho = singlet();
    let betas = TreasureConfig::ALL
        .iter()
        .map(|&c| conditional_states(&rho, &alice_povm(c)))
        .collect::<Result<Vec<_>>>()
        .expect("singlet conditional states are valid by construction");
    TheoremInstance::new(2, bob_povm(Sign::Plus), bob_povm(Sign::Minus), betas)
        .expect("protocol instance is valid by construction")
}

/// The guessing game: uniformly random configuration, reward 1 exactly when
/// the chosen box belongs to the winning pair.
pub fn game() -> Game {
    let input_dist = vec![1.0 / 6.0; 6];
    let mut reward = vec![0.0; 6 * 4];
    for (x, c) in TreasureConfig::ALL.iter().enumerate() {
        for y in 0..4u8 {
            if c.contains(y + 1) {
                reward[x * 4 + y as usize] = 1.0;
            }
        }
    }
    Game::new(input_dist, 4, reward).expect("uniform distribution and 0/1 rewards are valid")
}
