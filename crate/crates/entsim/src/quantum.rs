//! States, measurements, and the conditional-state calculus.
//!
//! The central object is the linear map `Φ_ρ(Z) = tr_A[ρ(Z ⊗ 1)]` taking an
//! operator on the sender's system to the subnormalized conditional state the
//! receiver holds once the sender measures. Around it: Schmidt decompositions
//! of bipartite pure vectors, the positive right-inverse [`gamma_rho`] of
//! `Φ_ρ` defined on the sandwich space `ρ_B^{1/2}·B(H_B)·ρ_B^{1/2}`, and the
//! resulting correspondence between positive decompositions of the receiver
//! marginal and measurements on the sender side.

use crate::channels::NonSignalingResource;
use crate::error::{Error, Result};
use crate::qmat::{Complex, ComplexMatrix, Side, DEFAULT_PSD_TOL};

/// A state counts as pure when its second-largest eigenvalue is below this.
pub const PURITY_TOL: f64 = 1e-9;
/// Schmidt coefficients at or below this cutoff are dropped from the rank.
pub const SCHMIDT_CUTOFF: f64 = 1e-12;
/// Largest off-support residual accepted when inverting the conditional-state
/// map; beyond it the operator is simply not in the sandwich space.
pub const SANDWICH_RESIDUAL_TOL: f64 = 1e-8;
/// Entrywise tolerance for POVM elements summing to the identity.
pub const POVM_SUM_TOL: f64 = 1e-9;

/// Bipartite density operator: PSD, unit trace, on a `dim_a * dim_b` space
/// with the first tensor factor belonging to the sender.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    dim_a: usize,
    dim_b: usize,
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(dim_a: usize, dim_b: usize, matrix: ComplexMatrix) -> Result<Self> {
        let n = dim_a * dim_b;
        if n == 0 || !matrix.is_square() || matrix.rows() != n {
            return Err(Error::Dimension(format!(
                "density operator must be {n}x{n} for subsystem dimensions {dim_a} and {dim_b}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if matrix.hermitian_asymmetry() > DEFAULT_PSD_TOL {
            return Err(Error::Domain(format!(
                "density operator is not Hermitian: asymmetry {:.3e}",
                matrix.hermitian_asymmetry()
            )));
        }
        let min_eig = matrix.min_eigenvalue_hermitian()?;
        if min_eig < -DEFAULT_PSD_TOL {
            return Err(Error::Domain(format!(
                "density operator is not positive semidefinite: min eigenvalue {min_eig:.3e}"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::Normalization(format!(
                "density operator trace {tr} is not 1"
            )));
        }
        Ok(Self { dim_a, dim_b, matrix })
    }

    /// Projection onto a unit vector of length `dim_a * dim_b`. The vector may
    /// be off unit norm by up to 1e-9; it is renormalized exactly.
    pub fn from_pure(psi: &[Complex], dim_a: usize, dim_b: usize) -> Result<Self> {
        if psi.len() != dim_a * dim_b {
            return Err(Error::Dimension(format!(
                "state vector length {} does not match {dim_a}x{dim_b}",
                psi.len()
            )));
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Normalization(format!(
                "state vector norm {norm} is not 1"
            )));
        }
        let n = psi.len();
        let matrix = ComplexMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Self::new(dim_a, dim_b, matrix)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Receiver marginal `ρ_B = tr_A ρ`.
    pub fn marginal_b(&self) -> ComplexMatrix {
        self.matrix
            .partial_trace(Side::A, self.dim_a, self.dim_b)
            .expect("dimensions validated at construction")
    }

    /// Sender marginal `ρ_A = tr_B ρ`.
    pub fn marginal_a(&self) -> ComplexMatrix {
        self.matrix
            .partial_trace(Side::B, self.dim_a, self.dim_b)
            .expect("dimensions validated at construction")
    }

    /// `tr ρ²`; equals 1 exactly on pure states.
    pub fn purity(&self) -> f64 {
        self.matrix
            .trace_product(&self.matrix)
            .expect("square by construction")
            .re
    }
}

/// Finite measurement: PSD effects summing to the identity. Zero effects are
/// legitimate elements, not errors.
#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    elements: Vec<ComplexMatrix>,
    labels: Vec<String>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let labels = (1..=elements.len()).map(|i| i.to_string()).collect();
        Self::with_labels(elements, labels, DEFAULT_PSD_TOL)
    }

    /// As [`Povm::new`] but with caller-chosen labels and PSD tolerance. The
    /// looser tolerance matters for effects produced by [`gamma_rho`], whose
    /// positivity guarantee is 1e-9 rather than the default 1e-10.
    pub fn with_labels(
        elements: Vec<ComplexMatrix>,
        labels: Vec<String>,
        psd_tol: f64,
    ) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Dimension("a POVM needs at least one effect".into()));
        }
        if labels.len() != elements.len() {
            return Err(Error::Dimension(format!(
                "{} labels for {} effects",
                labels.len(),
                elements.len()
            )));
        }
        let dim = elements[0].rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (idx, e) in elements.iter().enumerate() {
            if !e.is_square() || e.rows() != dim {
                return Err(Error::Dimension(format!(
                    "effect {} is {}x{}, expected {dim}x{dim}",
                    idx,
                    e.rows(),
                    e.cols()
                )));
            }
            if !e.is_psd(psd_tol)? {
                return Err(Error::Domain(format!(
                    "effect {idx} is not positive semidefinite within {psd_tol:.1e}"
                )));
            }
            sum = &sum + e;
        }
        let dev = (&sum - &ComplexMatrix::identity(dim)).max_abs_entry();
        if dev > POVM_SUM_TOL {
            return Err(Error::Normalization(format!(
                "effects sum to the identity only within {dev:.3e}"
            )));
        }
        Ok(Self { dim, elements, labels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &ComplexMatrix {
        &self.elements[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Outcome distribution when measuring the given state.
    pub fn outcome_distribution(&self, state: &ComplexMatrix) -> Result<Vec<f64>> {
        self.elements
            .iter()
            .map(|e| Ok(e.trace_product(state)?.re))
            .collect()
    }
}

/// PSD operators summing to a fixed target, the receiver-side conditional
/// states induced by a measurement on the other half.
#[derive(Debug, Clone)]
pub struct PositiveDecomposition {
    target: ComplexMatrix,
    parts: Vec<ComplexMatrix>,
}

impl PositiveDecomposition {
    pub fn new(target: ComplexMatrix, parts: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = target.rows();
        if !target.is_square() {
            return Err(Error::Dimension("decomposition target must be square".into()));
        }
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (idx, p) in parts.iter().enumerate() {
            if !p.is_square() || p.rows() != dim {
                return Err(Error::Dimension(format!(
                    "part {} is {}x{}, expected {dim}x{dim}",
                    idx,
                    p.rows(),
                    p.cols()
                )));
            }
            if !p.is_psd(DEFAULT_PSD_TOL)? {
                return Err(Error::Domain(format!(
                    "part {idx} is not positive semidefinite"
                )));
            }
            sum = &sum + p;
        }
        let dev = (&sum - &target).max_abs_entry();
        if dev > 1e-9 {
            return Err(Error::Normalization(format!(
                "parts miss the target by {dev:.3e} entrywise"
            )));
        }
        Ok(Self { target, parts })
    }

    pub fn target(&self) -> &ComplexMatrix {
        &self.target
    }

    pub fn parts(&self) -> &[ComplexMatrix] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

/// Schmidt form of a bipartite unit vector: `ψ = Σ λ_n e^A_n ⊗ e^B_n` with
/// coefficients sorted descending and orthonormal basis columns on each side.
#[derive(Debug, Clone)]
pub struct SchmidtData {
    pub coefficients: Vec<f64>,
    pub basis_a: ComplexMatrix,
    pub basis_b: ComplexMatrix,
}

impl SchmidtData {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// Rebuilds the vector `Σ λ_n e^A_n ⊗ e^B_n`.
    pub fn reconstruct(&self) -> Vec<Complex> {
        let da = self.basis_a.rows();
        let db = self.basis_b.rows();
        let mut psi = vec![Complex::new(0.0, 0.0); da * db];
        for (n, &lam) in self.coefficients.iter().enumerate() {
            for i in 0..da {
                for j in 0..db {
                    psi[i * db + j] += self.basis_a[(i, n)] * self.basis_b[(j, n)] * lam;
                }
            }
        }
        psi
    }
}

/// The state `(1/√d) Σ e_n ⊗ e_n` as a density operator.
pub fn maximally_entangled(d: usize) -> Result<DensityOperator> {
    if d == 0 {
        return Err(Error::Dimension(
            "maximally entangled state needs dimension at least 1".into(),
        ));
    }
    let amp = Complex::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut psi = vec![Complex::new(0.0, 0.0); d * d];
    for n in 0..d {
        psi[n * d + n] = amp;
    }
    DensityOperator::from_pure(&psi, d, d)
}

/// The two-qubit singlet `(1/√2)(e₁⊗e₂ − e₂⊗e₁)` as a density operator.
pub fn singlet() -> DensityOperator {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let psi = [
        Complex::new(0.0, 0.0),
        Complex::new(r, 0.0),
        Complex::new(-r, 0.0),
        Complex::new(0.0, 0.0),
    ];
    DensityOperator::from_pure(&psi, 2, 2).expect("singlet vector is unit")
}

/// The conditional-state map `Φ_ρ(Z) = tr_A[ρ(Z ⊗ 1)]`.
pub fn phi_rho(rho: &DensityOperator, z: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !z.is_square() || z.rows() != rho.dim_a {
        return Err(Error::Dimension(format!(
            "expected a {da}x{da} sender-side operator, got {}x{}",
            z.rows(),
            z.cols(),
            da = rho.dim_a
        )));
    }
    let lifted = z.kron(&ComplexMatrix::identity(rho.dim_b));
    (&rho.matrix * &lifted).partial_trace(Side::A, rho.dim_a, rho.dim_b)
}

/// Schmidt decomposition of a unit vector on a `dim_a * dim_b` space, via the
/// eigendecomposition of the smaller Gram matrix of the coefficient matrix.
pub fn schmidt(psi: &[Complex], dim_a: usize, dim_b: usize) -> Result<SchmidtData> {
    if psi.len() != dim_a * dim_b || dim_a == 0 || dim_b == 0 {
        return Err(Error::Dimension(format!(
            "state vector length {} does not match {dim_a}x{dim_b}",
            psi.len()
        )));
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Normalization(format!(
            "state vector norm {norm} is not 1"
        )));
    }
    let m = ComplexMatrix::from_fn(dim_a, dim_b, |i, j| psi[i * dim_b + j]);

    // Writing the coefficient matrix as M = Σ λ_n u_n v_nᵀ (v transposed, not
    // conjugated), MM† has eigenpairs (λ², u) and M†M has eigenpairs
    // (λ², conj(v)); the other side follows by applying M.
    let mut pairs: Vec<(f64, Vec<Complex>, Vec<Complex>)> = Vec::new();
    if dim_a <= dim_b {
        let g = &m * &m.adjoint();
        let (evals, u) = g.eigh()?;
        for idx in (0..dim_a).rev() {
            let lam = evals[idx].max(0.0).sqrt();
            if lam <= SCHMIDT_CUTOFF {
                continue;
            }
            let ua: Vec<Complex> = (0..dim_a).map(|i| u[(i, idx)]).collect();
            let vb: Vec<Complex> = (0..dim_b)
                .map(|j| (0..dim_a).map(|i| m[(i, j)] * ua[i].conj()).sum::<Complex>() / lam)
                .collect();
            pairs.push((lam, ua, vb));
        }
    } else {
        let g = &m.adjoint() * &m;
        let (evals, w) = g.eigh()?;
        for idx in (0..dim_b).rev() {
            let lam = evals[idx].max(0.0).sqrt();
            if lam <= SCHMIDT_CUTOFF {
                continue;
            }
            let wb: Vec<Complex> = (0..dim_b).map(|j| w[(j, idx)]).collect();
            let ua: Vec<Complex> = (0..dim_a)
                .map(|i| (0..dim_b).map(|j| m[(i, j)] * wb[j]).sum::<Complex>() / lam)
                .collect();
            let vb: Vec<Complex> = wb.iter().map(|z| z.conj()).collect();
            pairs.push((lam, ua, vb));
        }
    }

    let r = pairs.len();
    let coefficients: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let basis_a = ComplexMatrix::from_fn(dim_a, r, |i, n| pairs[n].1[i]);
    let basis_b = ComplexMatrix::from_fn(dim_b, r, |j, n| pairs[n].2[j]);
    debug_assert!(
        (coefficients.iter().map(|l| l * l).sum::<f64>() - 1.0).abs() < 1e-10,
        "Schmidt coefficients must square-sum to 1"
    );
    Ok(SchmidtData { coefficients, basis_a, basis_b })
}

fn schmidt_of_state(rho: &DensityOperator) -> Result<SchmidtData> {
    let (evals, evecs) = rho.matrix.eigh()?;
    let n = evals.len();
    if n >= 2 && evals[n - 2] > PURITY_TOL {
        return Err(Error::Purity(evals[n - 2]));
    }
    let psi: Vec<Complex> = (0..n).map(|i| evecs[(i, n - 1)]).collect();
    schmidt(&psi, rho.dim_a, rho.dim_b)
}

/// Right-inverse of [`phi_rho`] for a pure state, defined on the sandwich
/// space `K = ρ_B^{1/2}·B(H_B)·ρ_B^{1/2}`. In the Schmidt bases the defining
/// relation `Φ_ρ(X) = K` reads `λ_m λ_n ⟨e^A_n|X|e^A_m⟩ = ⟨e^B_m|K|e^B_n⟩`,
/// so on the support `X` is the transposed coefficient-rescaled image of `K`;
/// off the support the completion term `(tr K)(1 − Q^A)` keeps positivity and
/// sends the target marginal to the identity.
pub fn gamma_rho(rho: &DensityOperator, k: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !k.is_square() || k.rows() != rho.dim_b {
        return Err(Error::Dimension(format!(
            "expected a {db}x{db} receiver-side operator, got {}x{}",
            k.rows(),
            k.cols(),
            db = rho.dim_b
        )));
    }
    let sd = schmidt_of_state(rho)?;
    let r = sd.rank();
    let wa = &sd.basis_a;
    let wb = &sd.basis_b;

    let qb = wb * &wb.adjoint();
    let projected = &(&qb * k) * &qb;
    let residual = (&projected - k).frobenius_norm();
    if residual > SANDWICH_RESIDUAL_TOL {
        return Err(Error::Domain(format!(
            "operator lies outside the sandwich space of the receiver marginal: off-support residual {residual:.3e}"
        )));
    }

    let ktilde = &(&wb.adjoint() * k) * wb;
    let xtilde = ComplexMatrix::from_fn(r, r, |n, m| {
        ktilde[(m, n)] / (sd.coefficients[m] * sd.coefficients[n])
    });
    let on_support = &(wa * &xtilde) * &wa.adjoint();
    let qa = wa * &wa.adjoint();
    let completion = (&ComplexMatrix::identity(rho.dim_a) - &qa).scale(k.trace());
    Ok(&on_support + &completion)
}

/// Lifts a positive decomposition of the receiver marginal to a measurement
/// on the sender side whose conditional states reproduce the parts.
pub fn povm_from_decomposition(rho: &DensityOperator, dec: &PositiveDecomposition) -> Result<Povm> {
    let rho_b = rho.marginal_b();
    let dev = (&rho_b - dec.target()).max_abs_entry();
    if dev > 1e-9 {
        return Err(Error::Domain(format!(
            "decomposition target differs from the receiver marginal by {dev:.3e}"
        )));
    }
    let elements = dec
        .parts()
        .iter()
        .map(|b| gamma_rho(rho, b))
        .collect::<Result<Vec<_>>>()?;
    let labels = (1..=elements.len()).map(|i| i.to_string()).collect();
    Povm::with_labels(elements, labels, 1e-9)
}

/// Conditional states `β_y = Φ_ρ(F_y)` of a sender measurement; they always
/// form a positive decomposition of the receiver marginal.
pub fn conditional_states(rho: &DensityOperator, alice_povm: &Povm) -> Result<PositiveDecomposition> {
    if alice_povm.dim() != rho.dim_a {
        return Err(Error::Dimension(format!(
            "measurement dimension {} does not match sender dimension {}",
            alice_povm.dim(),
            rho.dim_a
        )));
    }
    let parts = alice_povm
        .elements()
        .iter()
        .map(|f| phi_rho(rho, f))
        .collect::<Result<Vec<_>>>()?;
    PositiveDecomposition::new(rho.marginal_b(), parts)
}

/// Joint outcome table `ω(y₁,y₂|x₁,x₂) = tr ρ(F^{x₁}_{y₁} ⊗ E^{x₂}_{y₂})` of
/// local measurements on a shared state. The result is always non-signaling.
pub fn realize_resource(
    rho: &DensityOperator,
    alice: &[Povm],
    bob: &[Povm],
) -> Result<NonSignalingResource> {
    if alice.is_empty() || bob.is_empty() {
        return Err(Error::Dimension("need at least one measurement per side".into()));
    }
    let n_y1 = alice[0].len();
    let n_y2 = bob[0].len();
    for p in alice {
        if p.dim() != rho.dim_a || p.len() != n_y1 {
            return Err(Error::Dimension(
                "sender measurements must share the state dimension and outcome count".into(),
            ));
        }
    }
    for p in bob {
        if p.dim() != rho.dim_b || p.len() != n_y2 {
            return Err(Error::Dimension(
                "receiver measurements must share the state dimension and outcome count".into(),
            ));
        }
    }
    let (n_x1, n_x2) = (alice.len(), bob.len());
    let mut table = vec![0.0; n_y1 * n_y2 * n_x1 * n_x2];
    for (x1, f_povm) in alice.iter().enumerate() {
        for (x2, e_povm) in bob.iter().enumerate() {
            for (y1, f) in f_povm.elements().iter().enumerate() {
                for (y2, e) in e_povm.elements().iter().enumerate() {
                    let joint = f.kron(e);
                    let p = rho.matrix.trace_product(&joint)?.re;
                    table[((y1 * n_y2 + y2) * n_x1 + x1) * n_x2 + x2] = p.max(0.0);
                }
            }
        }
    }
    NonSignalingResource::new(n_x1, n_x2, n_y1, n_y2, table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        }
    }

    fn random_unit_vector(n: usize, seed: u64) -> Vec<Complex> {
        let mut next = lcg(seed);
        let mut v: Vec<Complex> = (0..n).map(|_| c(next(), next())).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut v {
            *z /= norm;
        }
        v
    }

    fn random_square(n: usize, seed: u64) -> ComplexMatrix {
        let mut next = lcg(seed);
        ComplexMatrix::from_fn(n, n, |_, _| c(next(), next()))
    }

    #[test]
    fn maximally_entangled_marginals() {
        let rho = maximally_entangled(3).unwrap();
        let third = ComplexMatrix::identity(3).scale_re(1.0 / 3.0);
        assert!((&rho.marginal_b() - &third).max_abs_entry() < 1e-12);
        assert!((&rho.marginal_a() - &third).max_abs_entry() < 1e-12);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!(matches!(maximally_entangled(0), Err(Error::Dimension(_))));

        let trivial = maximally_entangled(1).unwrap();
        assert!((trivial.matrix()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singlet_expectations() {
        let rho = singlet();
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-12);

        let zz = ComplexMatrix::sigma_z().kron(&ComplexMatrix::sigma_z());
        let xz = ComplexMatrix::sigma_x().kron(&ComplexMatrix::sigma_z());
        assert!((rho.matrix().trace_product(&zz).unwrap().re + 1.0).abs() < 1e-12);
        assert!(rho.matrix().trace_product(&xz).unwrap().norm() < 1e-12);

        let half = ComplexMatrix::identity(2).scale_re(0.5);
        assert!((&rho.marginal_a() - &half).max_abs_entry() < 1e-12);
        assert!((&rho.marginal_b() - &half).max_abs_entry() < 1e-12);
    }

    #[test]
    fn phi_of_identity_is_marginal() {
        for rho in [singlet(), maximally_entangled(2).unwrap()] {
            let out = phi_rho(&rho, &ComplexMatrix::identity(2)).unwrap();
            assert!((&out - &rho.marginal_b()).max_abs_entry() < 1e-12);
        }
    }

    #[test]
    fn phi_on_singlet_conditional_state() {
        // F^{1,3}_+ = (1/2)(1 + sigma_z) = diag(1, 0); the singlet flips it
        // to diag(0, 1/2).
        let f = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let beta = phi_rho(&singlet(), &f).unwrap();
        assert!((beta.trace().re - 0.5).abs() < 1e-12);
        let expected = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 0.5]]);
        assert!((&beta - &expected).max_abs_entry() < 1e-12);
    }

    #[test]
    fn phi_on_maximally_entangled_is_transpose_over_d() {
        for d in [2usize, 3] {
            let rho = maximally_entangled(d).unwrap();
            let z = random_square(d, 7 + d as u64);
            let out = phi_rho(&rho, &z).unwrap();
            let expected = z.transpose().scale_re(1.0 / d as f64);
            assert!((&out - &expected).max_abs_entry() < 1e-12);
        }
    }

    #[test]
    fn phi_preserves_positivity() {
        let rho = DensityOperator::from_pure(&random_unit_vector(9, 41), 3, 3).unwrap();
        let g = random_square(3, 42);
        let z = &g.adjoint() * &g;
        let out = phi_rho(&rho, &z).unwrap();
        assert!(out.is_psd(1e-10).unwrap());
    }

    #[test]
    fn schmidt_product_vector() {
        let mut psi = vec![c(0.0, 0.0); 4];
        psi[1] = c(1.0, 0.0); // e1 (x) e2
        let sd = schmidt(&psi, 2, 2).unwrap();
        assert_eq!(sd.rank(), 1);
        assert!((sd.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((sd.basis_a[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((sd.basis_b[(1, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schmidt_singlet_coefficients() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let psi = vec![c(0.0, 0.0), c(r, 0.0), c(-r, 0.0), c(0.0, 0.0)];
        let sd = schmidt(&psi, 2, 2).unwrap();
        assert_eq!(sd.rank(), 2);
        assert!((sd.coefficients[0] - r).abs() < 1e-12);
        assert!((sd.coefficients[1] - r).abs() < 1e-12);
    }

    #[test]
    fn schmidt_reconstructs_random_vectors() {
        for (da, db, seed) in [(3usize, 3usize, 11u64), (2, 3, 12), (3, 2, 13), (4, 4, 14)] {
            let psi = random_unit_vector(da * db, seed);
            let sd = schmidt(&psi, da, db).unwrap();
            let back = sd.reconstruct();
            let err = psi
                .iter()
                .zip(&back)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-10, "reconstruction error {err} for {da}x{db}");
            let mass: f64 = sd.coefficients.iter().map(|l| l * l).sum();
            assert!((mass - 1.0).abs() < 1e-10);
            // orthonormal columns on both sides
            for basis in [&sd.basis_a, &sd.basis_b] {
                let g = &basis.adjoint() * basis;
                assert!((&g - &ComplexMatrix::identity(sd.rank())).max_abs_entry() < 1e-9);
            }
        }
    }

    #[test]
    fn schmidt_rejects_non_unit_vectors() {
        let psi = vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert!(matches!(schmidt(&psi, 2, 2), Err(Error::Normalization(_))));
    }

    #[test]
    fn gamma_sends_marginal_to_identity() {
        for seed in [3u64, 4, 5] {
            let rho = DensityOperator::from_pure(&random_unit_vector(9, seed), 3, 3).unwrap();
            let out = gamma_rho(&rho, &rho.marginal_b()).unwrap();
            assert!((&out - &ComplexMatrix::identity(3)).frobenius_norm() < 1e-9);
        }
    }

    #[test]
    fn gamma_on_rank_one_part() {
        // beta = (1/2)|+><+| under the maximally entangled qubit pair: the
        // lifted effect must be a projection (eigenvalues 0 and 1) mapping
        // back onto beta.
        let rho = maximally_entangled(2).unwrap();
        let plus = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let beta = plus.scale_re(0.5);
        let lifted = gamma_rho(&rho, &beta).unwrap();
        let (evals, _) = lifted.eigh().unwrap();
        assert!((evals[0] - 0.0).abs() < 1e-9);
        assert!((evals[1] - 1.0).abs() < 1e-9);
        let back = phi_rho(&rho, &lifted).unwrap();
        assert!((&back - &beta).frobenius_norm() < 1e-10);
    }

    #[test]
    fn gamma_round_trip_on_sandwich_space() {
        for (d, seed) in [(2usize, 21u64), (3, 22), (4, 23)] {
            let rho = DensityOperator::from_pure(&random_unit_vector(d * d, seed), d, d).unwrap();
            let root = rho.marginal_b().psd_sqrt().unwrap();
            let g = random_square(d, seed + 100);
            let w = {
                let gram = &g.adjoint() * &g;
                let tr = gram.trace().re;
                gram.scale_re(1.0 / tr)
            };
            let k = &(&root * &w) * &root;
            let lifted = gamma_rho(&rho, &k).unwrap();
            let back = phi_rho(&rho, &lifted).unwrap();
            assert!((&back - &k).frobenius_norm() < 1e-9);
            // PSD in, PSD out
            assert!(lifted.min_eigenvalue_hermitian().unwrap() >= -1e-9);
        }
    }

    #[test]
    fn gamma_rejects_mixed_states() {
        let mixed = DensityOperator::new(2, 2, ComplexMatrix::identity(4).scale_re(0.25)).unwrap();
        assert!(matches!(
            gamma_rho(&mixed, &ComplexMatrix::identity(2).scale_re(0.5)),
            Err(Error::Purity(_))
        ));
    }

    #[test]
    fn gamma_rejects_operators_off_the_support() {
        // product vector e1 (x) e1: the receiver marginal has rank 1, so a
        // part living on e2 is outside the sandwich space
        let mut psi = vec![c(0.0, 0.0); 4];
        psi[0] = c(1.0, 0.0);
        let rho = DensityOperator::from_pure(&psi, 2, 2).unwrap();
        let off = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(gamma_rho(&rho, &off), Err(Error::Domain(_))));
    }

    #[test]
    fn povm_from_single_part_is_trivial() {
        let rho = DensityOperator::from_pure(&random_unit_vector(4, 31), 2, 2).unwrap();
        let dec = PositiveDecomposition::new(rho.marginal_b(), vec![rho.marginal_b()]).unwrap();
        let povm = povm_from_decomposition(&rho, &dec).unwrap();
        assert_eq!(povm.len(), 1);
        assert!((povm.element(0) - &ComplexMatrix::identity(2)).max_abs_entry() < 1e-9);
    }

    #[test]
    fn povm_from_halves() {
        let rho = maximally_entangled(2).unwrap();
        let half = rho.marginal_b().scale_re(0.5);
        let dec = PositiveDecomposition::new(rho.marginal_b(), vec![half.clone(), half]).unwrap();
        let povm = povm_from_decomposition(&rho, &dec).unwrap();
        let expected = ComplexMatrix::identity(2).scale_re(0.5);
        for e in povm.elements() {
            assert!((e - &expected).max_abs_entry() < 1e-9);
        }
    }

    #[test]
    fn povm_round_trip_reproduces_parts() {
        let rho = singlet();
        let f_plus = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let f_minus = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]);
        let alice = Povm::new(vec![f_plus, f_minus]).unwrap();
        let dec = conditional_states(&rho, &alice).unwrap();
        let lifted = povm_from_decomposition(&rho, &dec).unwrap();
        for (g, beta) in lifted.elements().iter().zip(dec.parts()) {
            let image = phi_rho(&rho, g).unwrap();
            assert!((&image - beta).frobenius_norm() < 1e-9);
        }
    }

    #[test]
    fn povm_from_decomposition_target_mismatch() {
        let rho = maximally_entangled(2).unwrap();
        let wrong = ComplexMatrix::from_real_rows(&[&[0.9, 0.0], &[0.0, 0.1]]);
        let dec = PositiveDecomposition::new(wrong.clone(), vec![wrong]).unwrap();
        assert!(matches!(
            povm_from_decomposition(&rho, &dec),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn conditional_states_of_trivial_measurement() {
        let rho = singlet();
        let dec = conditional_states(&rho, &Povm::new(vec![ComplexMatrix::identity(2)]).unwrap())
            .unwrap();
        assert_eq!(dec.len(), 1);
        assert!((&dec.parts()[0] - &rho.marginal_b()).max_abs_entry() < 1e-12);
    }

    #[test]
    fn conditional_states_of_coarse_measurement() {
        // F = {1, 0}: the sender learns nothing and surely sends the first
        // symbol, so the parts are {rho_B, 0}
        let rho = singlet();
        let povm = Povm::new(vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(2, 2)])
            .unwrap();
        let dec = conditional_states(&rho, &povm).unwrap();
        let half = ComplexMatrix::identity(2).scale_re(0.5);
        assert!((&dec.parts()[0] - &half).max_abs_entry() < 1e-12);
        assert!(dec.parts()[1].max_abs_entry() < 1e-15);
    }

    #[test]
    fn conditional_states_split_traces() {
        let rho = singlet();
        let f = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let povm = Povm::new(vec![f.clone(), &ComplexMatrix::identity(2) - &f]).unwrap();
        let dec = conditional_states(&rho, &povm).unwrap();
        for part in dec.parts() {
            assert!((part.trace().re - 0.5).abs() < 1e-12);
            assert!(part.is_psd(1e-10).unwrap());
        }
    }

    #[test]
    fn conditional_trace_scales_with_effect_trace() {
        let d = 3;
        let rho = maximally_entangled(d).unwrap();
        let g = random_square(d, 77);
        let effect = {
            let gram = &g.adjoint() * &g;
            let tr = gram.trace().re;
            gram.scale_re(1.0 / tr)
        };
        let beta = phi_rho(&rho, &effect).unwrap();
        assert!((beta.trace().re - effect.trace().re / d as f64).abs() < 1e-10);
    }

    #[test]
    fn realized_resource_of_trivial_measurements() {
        let rho = maximally_entangled(2).unwrap();
        let trivial = Povm::new(vec![ComplexMatrix::identity(2)]).unwrap();
        let w = realize_resource(
            &rho,
            std::slice::from_ref(&trivial),
            std::slice::from_ref(&trivial),
        )
        .unwrap();
        assert!((w.prob(0, 0, 0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn realized_resource_factorizes_on_product_states() {
        let e0 = [c(1.0, 0.0), c(0.0, 0.0)];
        let plus = [
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ];
        let mut psi = vec![c(0.0, 0.0); 4];
        for i in 0..2 {
            for j in 0..2 {
                psi[i * 2 + j] = e0[i] * plus[j];
            }
        }
        let rho = DensityOperator::from_pure(&psi, 2, 2).unwrap();
        let f = ComplexMatrix::from_real_rows(&[&[0.7, 0.0], &[0.0, 0.3]]);
        let alice = Povm::new(vec![f.clone(), &ComplexMatrix::identity(2) - &f]).unwrap();
        let e = ComplexMatrix::from_real_rows(&[&[0.5, 0.2], &[0.2, 0.4]]);
        let bob = Povm::new(vec![e.clone(), &ComplexMatrix::identity(2) - &e]).unwrap();
        let w = realize_resource(&rho, std::slice::from_ref(&alice), std::slice::from_ref(&bob))
            .unwrap();

        let rho_a = rho.marginal_a();
        let rho_b = rho.marginal_b();
        for y1 in 0..2 {
            for y2 in 0..2 {
                let pa = alice.element(y1).trace_product(&rho_a).unwrap().re;
                let pb = bob.element(y2).trace_product(&rho_b).unwrap().re;
                assert!((w.prob(y1, y2, 0, 0) - pa * pb).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn povm_validation_rejects_bad_families() {
        let sz = ComplexMatrix::sigma_z();
        assert!(matches!(
            Povm::new(vec![sz, ComplexMatrix::identity(2)]),
            Err(Error::Domain(_))
        ));
        let half = ComplexMatrix::identity(2).scale_re(0.5);
        assert!(matches!(
            Povm::new(vec![half.clone(), half.clone(), half]),
            Err(Error::Normalization(_))
        ));
        assert!(matches!(Povm::new(vec![]), Err(Error::Dimension(_))));
    }

    #[test]
    fn density_operator_validation() {
        assert!(matches!(
            DensityOperator::new(2, 2, ComplexMatrix::identity(4)),
            Err(Error::Normalization(_))
        ));
        assert!(matches!(
            DensityOperator::new(2, 2, ComplexMatrix::sigma_z().kron(&ComplexMatrix::identity(2)).scale_re(0.25)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            DensityOperator::new(2, 3, ComplexMatrix::identity(4).scale_re(0.25)),
            Err(Error::Dimension(_))
        ));
    }
}
