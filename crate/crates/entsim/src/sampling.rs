//! Seeded random generators for measurements, states, and whole instances.
//!
//! Every generator takes an explicit RNG so that trials can be sharded
//! across workers: give worker `i` the stream derived from [`trial_seed`]
//! and the merged results are independent of scheduling.

use crate::error::{Error, Result};
use crate::qmat::{Complex, ComplexMatrix};
use crate::quantum::{PositiveDecomposition, Povm};
use crate::simulate::TheoremInstance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Fresh deterministic RNG for one seed.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Decorrelated per-trial seed: nearby trial indices land far apart in the
/// seed space, so sharding a range of trials never overlaps streams.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    splitmix64(base.wrapping_add((trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

fn gaussian<R: Rng>(rng: &mut R) -> Complex {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re, im)
}

/// Matrix with independent standard complex Gaussian entries.
pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, gaussian(rng));
        }
    }
    m
}

/// Random Hermitian matrix `(G + G†)/2`.
pub fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = random_matrix(d, d, rng);
    (&g + &g.adjoint()).scale_re(0.5)
}

/// Haar-ish unitary from Gram–Schmidt on Gaussian columns; exactly unitary
/// up to rounding, which is all the samplers need.
pub fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> ComplexMatrix {
    'sample: loop {
        let g = random_matrix(d, d, rng);
        let mut cols: Vec<Vec<Complex>> = (0..d)
            .map(|j| (0..d).map(|i| g[(i, j)]).collect())
            .collect();
        for j in 0..d {
            let (done, rest) = cols.split_at_mut(j);
            let current = &mut rest[0];
            // two orthogonalization passes keep the basis clean
            for _ in 0..2 {
                for finished in done.iter() {
                    let proj: Complex = finished
                        .iter()
                        .zip(current.iter())
                        .map(|(q, c)| q.conj() * *c)
                        .sum();
                    for (c, q) in current.iter_mut().zip(finished.iter()) {
                        *c -= proj * q;
                    }
                }
            }
            let norm: f64 = current.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                continue 'sample;
            }
            for c in current.iter_mut() {
                *c /= norm;
            }
        }
        return ComplexMatrix::from_fn(d, d, |i, j| cols[j][i]);
    }
}

/// Normalized random vector: a pure state on `dim` levels.
pub fn random_pure_state<R: Rng>(dim: usize, rng: &mut R) -> Vec<Complex> {
    loop {
        let v: Vec<Complex> = (0..dim).map(|_| gaussian(rng)).collect();
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

/// Random full-rank density matrix `GG†/tr(GG†)`.
pub fn random_density_matrix<R: Rng>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = random_matrix(d, d, rng);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    m.scale_re(1.0 / tr).symmetrized()
}

/// Random effect `0 ≤ E ≤ 1`: uniform eigenvalues in a random basis.
pub fn random_effect<R: Rng>(d: usize, rng: &mut R) -> ComplexMatrix {
    let u = random_unitary(d, rng);
    let evals: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
    let diag = ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex::new(evals[i], 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    (&(&u * &diag) * &u.adjoint()).symmetrized()
}

/// Random `k`-outcome measurement: Gram blocks normalized by their sum,
/// `E_i = S^{-1/2} G_i†G_i S^{-1/2}`.
pub fn random_povm<R: Rng>(d: usize, k: usize, rng: &mut R) -> Result<Povm> {
    if k == 0 {
        return Err(Error::Dimension("measurement needs at least one outcome".into()));
    }
    for _ in 0..16 {
        let grams: Vec<ComplexMatrix> = (0..k)
            .map(|_| {
                let g = random_matrix(d, d, rng);
                &g.adjoint() * &g
            })
            .collect();
        let mut total = ComplexMatrix::zeros(d, d);
        for g in &grams {
            total = &total + g;
        }
        let Ok(inv_root) = inv_sqrt(&total) else {
            continue;
        };
        let elements: Vec<ComplexMatrix> = grams
            .iter()
            .map(|g| (&(&inv_root * g) * &inv_root).symmetrized())
            .collect();
        return Povm::new(elements);
    }
    Err(Error::Numerical("measurement sampling kept hitting a singular normalizer".into()))
}

fn inv_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (evals, vecs) = m.symmetrized().eigh()?;
    if evals.iter().any(|&l| l < 1e-12) {
        return Err(Error::Numerical(format!(
            "matrix is numerically singular (smallest eigenvalue {:.3e})",
            evals[0]
        )));
    }
    let d = m.rows();
    let diag = ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex::new(1.0 / evals[i].sqrt(), 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    Ok(&(&vecs * &diag) * &vecs.adjoint())
}

/// Split a state into two sandwiched parts `(ρ^{1/2} W ρ^{1/2}, ρ^{1/2}(1−W)ρ^{1/2})`
/// with `W` a random contraction; both parts are positive by congruence and
/// they sum back to the state.
pub fn random_split<R: Rng>(
    rho_b: &ComplexMatrix,
    root: &ComplexMatrix,
    rng: &mut R,
) -> (ComplexMatrix, ComplexMatrix) {
    let d = rho_b.rows();
    let w = random_effect(d, rng);
    let complement = &ComplexMatrix::identity(d) - &w;
    let plus = (&(root * &w) * root).symmetrized();
    let minus = (&(root * &complement) * root).symmetrized();
    (plus, minus)
}

/// Random two-part positive decomposition of a given state.
pub fn random_decomposition<R: Rng>(
    rho_b: &ComplexMatrix,
    rng: &mut R,
) -> Result<PositiveDecomposition> {
    let root = rho_b.psd_sqrt()?;
    let (plus, minus) = random_split(rho_b, &root, rng);
    PositiveDecomposition::new(rho_b.clone(), vec![plus, minus])
}

/// Random qubit instance: output count in `{2,3,4}`, input count in
/// `{2,…,6}`, random sign measurements, random decompositions of `1/2`.
pub fn random_instance(seed: u64) -> Result<TheoremInstance> {
    let mut rng = rng_from(seed);
    let d = 2;
    let k = rng.gen_range(2..=4);
    let l = rng.gen_range(2..=6);
    let e_plus = random_povm(d, k, &mut rng)?;
    let e_minus = random_povm(d, k, &mut rng)?;
    let half = ComplexMatrix::identity(d).scale_re(1.0 / d as f64);
    let betas: Vec<PositiveDecomposition> = (0..l)
        .map(|_| {
            let w = random_effect(d, &mut rng);
            let plus = w.scale_re(1.0 / d as f64);
            let minus = (&ComplexMatrix::identity(d) - &w).scale_re(1.0 / d as f64);
            PositiveDecomposition::new(half.clone(), vec![plus, minus])
        })
        .collect::<Result<_>>()?;
    TheoremInstance::new(d, e_plus, e_minus, betas)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_columns_are_orthonormal() {
        let mut rng = rng_from(3);
        for d in [2, 3, 5] {
            let u = random_unitary(d, &mut rng);
            let gram = &u.adjoint() * &u;
            let err = (&gram - &ComplexMatrix::identity(d)).max_abs_entry();
            assert!(err < 1e-12, "d={d}: deviation {err}");
        }
    }

    #[test]
    fn effects_stay_between_zero_and_one() {
        let mut rng = rng_from(4);
        for d in [2, 3, 4] {
            let e = random_effect(d, &mut rng);
            assert!(e.min_eigenvalue_hermitian().unwrap() > -1e-12);
            let c = &ComplexMatrix::identity(d) - &e;
            assert!(c.min_eigenvalue_hermitian().unwrap() > -1e-12);
        }
    }

    #[test]
    fn povm_sampling_produces_valid_measurements() {
        let mut rng = rng_from(5);
        for (d, k) in [(2, 2), (2, 4), (3, 3), (4, 2)] {
            let povm = random_povm(d, k, &mut rng).unwrap();
            assert_eq!(povm.len(), k);
            let mut sum = ComplexMatrix::zeros(d, d);
            for e in povm.elements() {
                sum = &sum + e;
            }
            let err = (&sum - &ComplexMatrix::identity(d)).max_abs_entry();
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn pure_states_are_normalized() {
        let mut rng = rng_from(6);
        let v = random_pure_state(6, &mut rng);
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_matrices_are_states() {
        let mut rng = rng_from(7);
        for d in [2, 3, 4] {
            let rho = random_density_matrix(d, &mut rng);
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
            assert!(rho.min_eigenvalue_hermitian().unwrap() > -1e-12);
        }
    }

    #[test]
    fn splits_recombine_to_the_state() {
        let mut rng = rng_from(8);
        let rho = random_density_matrix(3, &mut rng);
        let root = rho.psd_sqrt().unwrap();
        let (plus, minus) = random_split(&rho, &root, &mut rng);
        assert!(plus.min_eigenvalue_hermitian().unwrap() > -1e-12);
        assert!(minus.min_eigenvalue_hermitian().unwrap() > -1e-12);
        let err = (&(&plus + &minus) - &rho).max_abs_entry();
        assert!(err < 1e-12);
    }

    #[test]
    fn instances_hit_the_advertised_ranges() {
        let mut seen_k = [false; 5];
        let mut seen_l = [false; 7];
        for trial in 0..40 {
            let inst = random_instance(trial_seed(0, trial)).unwrap();
            assert_eq!(inst.d(), 2);
            assert!((2..=4).contains(&inst.n_outputs()));
            assert!((2..=6).contains(&inst.n_inputs()));
            seen_k[inst.n_outputs()] = true;
            seen_l[inst.n_inputs()] = true;
        }
        assert!(seen_k[2] && seen_k[3] && seen_k[4]);
        assert!(seen_l[2] && seen_l[6]);
    }

    #[test]
    fn seeded_streams_are_reproducible_and_distinct() {
        let a = random_matrix(3, 3, &mut rng_from(9));
        let b = random_matrix(3, 3, &mut rng_from(9));
        assert!((&a - &b).max_abs_entry() == 0.0);
        assert_ne!(trial_seed(0, 0), trial_seed(0, 1));
        assert_ne!(trial_seed(0, 0), trial_seed(1, 0));
        let c = random_matrix(3, 3, &mut rng_from(trial_seed(9, 0)));
        assert!((&a - &c).max_abs_entry() > 1e-6);
    }
}
