//! Exact two-point measurement laboratory on a small total Hilbert space:
//! the driven two-level system coupled to a few truncated bosonic modes.
//!
//! The module tabulates the joint distribution of boundary energy
//! measurements by brute force, evaluates the associated generating
//! function through an independent operator-trace route, and evaluates the
//! commuting-generator approximation of that function from its modified
//! time-ordered product. Comparing moments of the two functions isolates
//! the commutator corrections to the third moment at desk scale.
//!
//! The bath here is a validation instrument: a handful of modes near
//! resonance exercises the measurement algebra, not the quantitative
//! reduced dynamics.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::model::{self, SystemParams};
use crate::parallel;

/// Energy window within which measurement outcomes are merged into one
/// projector cluster.
pub const CLUSTER_TOL: f64 = 1e-9;

/// System-bath coupling structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingForm {
    /// `(a + a†) ⊗ Σ_k (g_k b†_k + g*_k b_k)`
    Full,
    /// `Σ_k (g_k a ⊗ b†_k + g*_k a† ⊗ b_k)`: excitation conserving.
    Rwa,
}

/// Which Hamiltonian defines the boundary energy measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementBasis {
    /// System and bath measured separately; the coupling is neglected in
    /// the measurement. The thermal product state is then diagonal in the
    /// measurement basis.
    Bare,
    /// The full Hamiltonian including the coupling. This is the convention
    /// under which the commuting/non-commuting generating-function algebra
    /// closes exactly, at the price of projecting the initial state.
    Total,
}

/// Configuration of the composite system.
#[derive(Debug, Clone)]
pub struct TotalSystemModel {
    pub system: SystemParams,
    /// Number of bosonic modes (0 to 3).
    pub n_modes: usize,
    /// Occupation truncation per mode: levels `0..=n_max`.
    pub n_max: usize,
    /// Mode frequencies in units of `ω₀`.
    pub mode_freqs: Vec<f64>,
    /// Coupling strengths `g_k` in units of `ħω₀`.
    pub couplings: Vec<Complex64>,
    pub coupling_form: CouplingForm,
    pub measurement: MeasurementBasis,
}

impl TotalSystemModel {
    /// Single resonant mode with four levels and a weak coupling; the
    /// standard validation configuration.
    pub fn reference(system: SystemParams) -> Self {
        TotalSystemModel {
            system,
            n_modes: 1,
            n_max: 3,
            mode_freqs: vec![1.0],
            couplings: vec![Complex64::new(0.02, 0.0)],
            coupling_form: CouplingForm::Full,
            measurement: MeasurementBasis::Bare,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.system.check_measurement_basis()?;
        if self.n_modes > 3 {
            return Err(Error::invalid("n_modes", "at most 3 modes are supported"));
        }
        if self.mode_freqs.len() != self.n_modes || self.couplings.len() != self.n_modes {
            return Err(Error::invalid(
                "mode_freqs/couplings",
                format!("expected {} entries", self.n_modes),
            ));
        }
        if self
            .mode_freqs
            .iter()
            .any(|&w| !(w > 0.0) || !w.is_finite())
        {
            return Err(Error::invalid("mode_freqs", "must be positive"));
        }
        let dim = self.dim();
        if dim > linalg::MAX_DIM {
            return Err(Error::DimensionCap {
                requested: dim,
                max: linalg::MAX_DIM,
            });
        }
        Ok(())
    }

    /// Total Hilbert-space dimension `2 (n_max+1)^n_modes`.
    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1).pow(self.n_modes as u32)
    }

    fn mode_dim(&self) -> usize {
        self.n_max + 1
    }
}

fn mode_annihilation(dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |r, c| {
        if c == r + 1 {
            Complex64::new((c as f64).sqrt(), 0.0)
        } else {
            Complex64::ZERO
        }
    })
}

/// Lift a system operator to the composite space.
fn lift_system(m: &TotalSystemModel, op: &ComplexMatrix) -> Result<ComplexMatrix> {
    let bath_dim = m.dim() / 2;
    linalg::kron(op, &ComplexMatrix::identity(bath_dim))
}

/// Lift an operator of mode `k` to the composite space.
fn lift_mode(m: &TotalSystemModel, k: usize, op: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = m.mode_dim();
    let before = d.pow(k as u32);
    let after = d.pow((m.n_modes - 1 - k) as u32);
    let with_before = linalg::kron(&ComplexMatrix::identity(2 * before), op)?;
    linalg::kron(&with_before, &ComplexMatrix::identity(after))
}

/// Bath Hamiltonian `Σ_k ω_k b†_k b_k` on the composite space.
fn bath_hamiltonian(m: &TotalSystemModel) -> Result<ComplexMatrix> {
    let mut h = ComplexMatrix::zeros(m.dim());
    for k in 0..m.n_modes {
        let b = mode_annihilation(m.mode_dim());
        let n = b.adjoint().matmul(&b);
        h.add_scaled(&lift_mode(m, k, &n)?, m.mode_freqs[k].into());
    }
    Ok(h)
}

fn coupling_hamiltonian(m: &TotalSystemModel) -> Result<ComplexMatrix> {
    let (a, adag) = model::ladder_operators();
    let mut h = ComplexMatrix::zeros(m.dim());
    for k in 0..m.n_modes {
        let g = m.couplings[k];
        let b = mode_annihilation(m.mode_dim());
        let bdag = b.adjoint();
        match m.coupling_form {
            CouplingForm::Full => {
                let x = lift_system(m, &(&a + &adag))?;
                let mut bath_part = lift_mode(m, k, &bdag)?.scale(g);
                bath_part.add_scaled(&lift_mode(m, k, &b)?, g.conj());
                h.add_scaled(&x.matmul(&bath_part), Complex64::ONE);
            }
            CouplingForm::Rwa => {
                let term = lift_system(m, &a)?.matmul(&lift_mode(m, k, &bdag)?);
                h.add_scaled(&term, g);
                h.add_scaled(&term.adjoint().scale(g.conj()), Complex64::ONE);
            }
        }
    }
    Ok(h)
}

/// Full Hamiltonian `H_S(t) ⊗ 1 + 1 ⊗ H_B + H_C`.
pub fn build_total_hamiltonian(m: &TotalSystemModel, t: f64) -> Result<ComplexMatrix> {
    let mut h = lift_system(m, &model::system_hamiltonian(&m.system, t))?;
    h.add_scaled(&bath_hamiltonian(m)?, Complex64::ONE);
    h.add_scaled(&coupling_hamiltonian(m)?, Complex64::ONE);
    Ok(h)
}

/// Hamiltonian whose eigenbasis defines the boundary measurement at time `t`.
pub fn measurement_hamiltonian(m: &TotalSystemModel, t: f64) -> Result<ComplexMatrix> {
    match m.measurement {
        MeasurementBasis::Bare => {
            let mut h = lift_system(m, &model::system_hamiltonian(&m.system, t))?;
            h.add_scaled(&bath_hamiltonian(m)?, Complex64::ONE);
            Ok(h)
        }
        MeasurementBasis::Total => build_total_hamiltonian(m, t),
    }
}

/// Power operator lifted to the composite space: the coupling and bath are
/// time independent, so `∂_t H = ∂_t H_S`.
fn lifted_power(m: &TotalSystemModel, t: f64) -> Result<ComplexMatrix> {
    lift_system(m, &model::power_operator(&m.system, t))
}

/// Thermal product state `ρ_S ⊗ Π_k ρ_k` as a diagonal matrix.
fn thermal_product_state(m: &TotalSystemModel) -> ComplexMatrix {
    let beta = m.system.beta * m.system.omega0;
    let (pg, pe) = model::thermal_populations(&m.system);
    let dim = m.dim();
    let mode_dim = m.mode_dim();

    let mode_weights: Vec<Vec<f64>> = (0..m.n_modes)
        .map(|k| {
            let w: Vec<f64> = (0..mode_dim)
                .map(|n| (-beta * m.mode_freqs[k] * n as f64).exp())
                .collect();
            let z: f64 = w.iter().sum();
            w.into_iter().map(|x| x / z).collect()
        })
        .collect();

    let mut rho = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        let mut idx = i;
        let mut weight = 1.0;
        for k in (0..m.n_modes).rev() {
            let n_k = idx % mode_dim;
            idx /= mode_dim;
            weight *= mode_weights[k][n_k];
        }
        weight *= if idx == 0 { pg } else { pe };
        rho[(i, i)] = weight.into();
    }
    rho
}

fn cluster_energies(evals: &[f64]) -> Vec<(f64, usize, usize)> {
    // (representative energy, start index, length) over the ascending list
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=evals.len() {
        if i == evals.len() || evals[i] - evals[i - 1] > CLUSTER_TOL {
            let slice = &evals[start..i];
            let mean = slice.iter().sum::<f64>() / slice.len() as f64;
            clusters.push((mean, start, i - start));
            start = i;
        }
    }
    clusters
}

/// Spectrally resolved initial ensemble: the thermal product state after
/// the first measurement, as weights over orthonormal states of definite
/// measured energy.
struct InitialEnsemble {
    weights: Vec<f64>,
    states: Vec<Vec<Complex64>>,
    energies: Vec<f64>,
    /// `ρ̄₀` as a matrix, for the operator-trace routes.
    rho_bar: ComplexMatrix,
}

fn initial_ensemble(m: &TotalSystemModel) -> Result<InitialEnsemble> {
    let h0 = measurement_hamiltonian(m, 0.0)?;
    let (evals, vecs) = linalg::hermitian_eigensystem(&h0)?;
    let clusters = cluster_energies(&evals);
    let rho0 = thermal_product_state(m);
    let dim = m.dim();

    let mut weights = Vec::with_capacity(dim);
    let mut states = Vec::with_capacity(dim);
    let mut energies = Vec::with_capacity(dim);

    for &(energy, start, len) in &clusters {
        // Project the thermal state onto this measurement cluster and
        // re-diagonalize the block.
        let cols: Vec<Vec<Complex64>> = (start..start + len).map(|c| vecs.column(c)).collect();
        let block = ComplexMatrix::from_fn(len, |r, c| {
            (0..dim)
                .map(|i| cols[r][i].conj() * rho0[(i, i)] * cols[c][i])
                .sum()
        });
        let (mu, w) = linalg::hermitian_eigensystem(&block)?;
        for j in 0..len {
            let mut phi = vec![Complex64::ZERO; dim];
            for (c, col) in cols.iter().enumerate() {
                let amp = w[(c, j)];
                for (p, v) in phi.iter_mut().zip(col.iter()) {
                    *p += amp * v;
                }
            }
            weights.push(mu[j].max(0.0));
            states.push(phi);
            energies.push(energy);
        }
    }

    let mut rho_bar = ComplexMatrix::zeros(dim);
    for (w, phi) in weights.iter().zip(states.iter()) {
        for r in 0..dim {
            for c in 0..dim {
                rho_bar[(r, c)] += phi[r] * phi[c].conj() * *w;
            }
        }
    }

    Ok(InitialEnsemble {
        weights,
        states,
        energies,
        rho_bar,
    })
}

/// March a set of states through the time-ordered product of midpoint
/// exponentials of `h(t)`, renormalizing after every step.
fn propagate_states(
    h: &dyn Fn(f64) -> Result<ComplexMatrix>,
    tau: f64,
    steps: usize,
    states: &mut [Vec<Complex64>],
) -> Result<()> {
    assert!(steps >= 1);
    let dt = tau / steps as f64;
    for k in 0..steps {
        let t_mid = (k as f64 + 0.5) * dt;
        let generator = h(t_mid)?.scale(Complex64::new(0.0, -dt));
        let u = linalg::matrix_exponential(&generator)?;
        for psi in states.iter_mut() {
            let mut next = u.mul_vec(psi);
            let norm = next.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in &mut next {
                *z /= norm;
            }
            *psi = next;
        }
    }
    Ok(())
}

/// Propagate the identity basis into the full evolution operator.
fn full_propagator(m: &TotalSystemModel, steps: usize) -> Result<ComplexMatrix> {
    let dim = m.dim();
    let mut columns: Vec<Vec<Complex64>> = (0..dim)
        .map(|i| {
            let mut v = vec![Complex64::ZERO; dim];
            v[i] = Complex64::ONE;
            v
        })
        .collect();
    let h = |t: f64| build_total_hamiltonian(m, t);
    propagate_states(&h, m.system.tau(), steps, &mut columns)?;
    Ok(ComplexMatrix::from_fn(dim, |r, c| columns[c][r]))
}

/// Joint distribution of the boundary measurements.
#[derive(Debug, Clone)]
pub struct TpmDistribution {
    /// `(E₀, E_τ, probability)` for every populated pair of measurement
    /// outcomes, energies in `ħω₀`.
    pub entries: Vec<(f64, f64, f64)>,
    /// Measurement spectrum at `t = 0`: `(energy, multiplicity)` clusters.
    pub initial_clusters: Vec<(f64, usize)>,
    /// Measurement spectrum at `t = τ`.
    pub final_clusters: Vec<(f64, usize)>,
    /// `max |Ψ†Ψ - 1|` over the propagated orthonormal ensemble.
    pub unitarity_residual: f64,
}

impl TpmDistribution {
    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.2).sum()
    }

    /// `Σ (E_τ - E₀)ⁿ P`.
    pub fn moment(&self, order: u32) -> f64 {
        self.entries
            .iter()
            .map(|&(e0, etau, p)| (etau - e0).powi(order as i32) * p)
            .sum()
    }

    /// Fourier transform `Σ e^{iu(E_τ-E₀)} P` of the outcome table.
    pub fn fourier(&self, u: f64) -> Complex64 {
        self.entries
            .iter()
            .map(|&(e0, etau, p)| Complex64::from_polar(p, u * (etau - e0)))
            .sum()
    }

    /// `⟨e^{-βW}⟩` over the joint table.
    pub fn exponential_average(&self, beta: f64) -> f64 {
        self.entries
            .iter()
            .map(|&(e0, etau, p)| (-beta * (etau - e0)).exp() * p)
            .sum()
    }

    /// Marginal work distribution, merging work values within `tol`.
    pub fn work_distribution(&self, tol: f64) -> Vec<(f64, f64)> {
        let mut values: Vec<(f64, f64)> = Vec::new();
        let mut works: Vec<(f64, f64)> = self
            .entries
            .iter()
            .map(|&(e0, etau, p)| (etau - e0, p))
            .collect();
        works.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (w, p) in works {
            match values.last_mut() {
                Some((w0, p0)) if (w - *w0).abs() <= tol => *p0 += p,
                _ => values.push((w, p)),
            }
        }
        values
    }
}

/// Moments of the tabulated outcome law: `Σ (E_τ-E₀)ⁿ P` for `n = 1..=4`.
pub fn moments_from_distribution(d: &TpmDistribution, order: u32) -> f64 {
    assert!((1..=4).contains(&order), "supported orders are 1..=4");
    d.moment(order)
}

/// Brute-force two-point measurement: propagate every spectral state of the
/// projected initial ensemble and tabulate the joint outcome law.
pub fn tpm_distribution(m: &TotalSystemModel, steps: usize) -> Result<TpmDistribution> {
    m.validate()?;
    let ens = initial_ensemble(m)?;
    let dim = m.dim();

    let h_final = measurement_hamiltonian(m, m.system.tau())?;
    let (evals_f, vecs_f) = linalg::hermitian_eigensystem(&h_final)?;
    let clusters_f = cluster_energies(&evals_f);

    let mut states = ens.states.clone();
    let h = |t: f64| build_total_hamiltonian(m, t);
    propagate_states(&h, m.system.tau(), steps, &mut states)?;

    // Orthonormality of the propagated ensemble.
    let mut residual: f64 = 0.0;
    for i in 0..dim {
        for j in i..dim {
            let dot: Complex64 = states[i]
                .iter()
                .zip(states[j].iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            let target = if i == j {
                Complex64::ONE
            } else {
                Complex64::ZERO
            };
            residual = residual.max((dot - target).norm());
        }
    }

    // Initial spectrum clusters; the ensemble lists energies in ascending
    // cluster order.
    let mut initial_clusters: Vec<(f64, usize)> = Vec::new();
    for &e in &ens.energies {
        match initial_clusters.last_mut() {
            Some((e0, n)) if (e - *e0).abs() <= CLUSTER_TOL => *n += 1,
            _ => initial_clusters.push((e, 1)),
        }
    }

    let mut cells: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
    let e0_index = |e: f64| -> usize {
        initial_clusters
            .iter()
            .position(|&(e0, _)| (e - e0).abs() <= CLUSTER_TOL)
            .expect("initial energy belongs to a cluster")
    };
    for ((w, psi), &e0) in ens
        .weights
        .iter()
        .zip(states.iter())
        .zip(ens.energies.iter())
    {
        if *w == 0.0 {
            continue;
        }
        let i0 = e0_index(e0);
        for (fi, &(_, start, len)) in clusters_f.iter().enumerate() {
            let mut p_cluster = 0.0;
            for c in start..start + len {
                let amp: Complex64 = (0..dim).map(|r| vecs_f[(r, c)].conj() * psi[r]).sum();
                p_cluster += amp.norm_sqr();
            }
            if p_cluster > 0.0 {
                *cells.entry((i0, fi)).or_insert(0.0) += w * p_cluster;
            }
        }
    }

    let entries: Vec<(f64, f64, f64)> = cells
        .into_iter()
        .map(|((i0, fi), p)| (initial_clusters[i0].0, clusters_f[fi].0, p))
        .collect();

    Ok(TpmDistribution {
        entries,
        initial_clusters,
        final_clusters: clusters_f.iter().map(|&(e, _, n)| (e, n)).collect(),
        unitarity_residual: residual,
    })
}

/// Exact generating function, evaluated through the operator-trace route
/// with the boundary phases supplied by matrix exponentials. The propagator
/// shares its stepping with [`tpm_distribution`]; only the assembly
/// differs, which is what makes the Fourier-sum comparison meaningful.
pub struct ExactGeneratingFunction {
    propagator: ComplexMatrix,
    rho_bar: ComplexMatrix,
    h_meas_0: ComplexMatrix,
    h_meas_tau: ComplexMatrix,
}

impl ExactGeneratingFunction {
    pub fn new(m: &TotalSystemModel, steps: usize) -> Result<Self> {
        m.validate()?;
        let ens = initial_ensemble(m)?;
        Ok(ExactGeneratingFunction {
            propagator: full_propagator(m, steps)?,
            rho_bar: ens.rho_bar,
            h_meas_0: measurement_hamiltonian(m, 0.0)?,
            h_meas_tau: measurement_hamiltonian(m, m.system.tau())?,
        })
    }

    /// `G(u) = Tr{ U_{u/2} ρ̄₀ U†_{-u/2} }` with
    /// `U_v = e^{ivH(τ)} U e^{-ivH(0)}`.
    pub fn eval(&self, u: f64) -> Result<Complex64> {
        let half = 0.5 * u;
        let phase_0 = linalg::matrix_exponential(&self.h_meas_0.scale(Complex64::new(0.0, -half)))?;
        let phase_tau =
            linalg::matrix_exponential(&self.h_meas_tau.scale(Complex64::new(0.0, half)))?;
        let left = phase_tau.matmul(&self.propagator).matmul(&phase_0);
        let right = phase_0
            .matmul(&self.propagator.adjoint())
            .matmul(&phase_tau);
        Ok(left.matmul(&self.rho_bar).matmul(&right).trace())
    }
}

/// Exact generating function at a single point; prefer
/// [`ExactGeneratingFunction`] when evaluating many points.
pub fn generating_function_exact(m: &TotalSystemModel, steps: usize, u: f64) -> Result<Complex64> {
    ExactGeneratingFunction::new(m, steps)?.eval(u)
}

/// Generating function of the commuting-generator approximation: both
/// time-ordered factors use the modified generator `H(t) ∓ (u/2)P(t)` and
/// the commutator hierarchy is dropped.
pub fn generating_function_commuting(
    m: &TotalSystemModel,
    steps: usize,
    u: f64,
) -> Result<Complex64> {
    m.validate()?;
    let ens = initial_ensemble(m)?;
    let dim = m.dim();
    let tau = m.system.tau();

    let modified = |v: f64| -> Result<ComplexMatrix> {
        let mut columns: Vec<Vec<Complex64>> = (0..dim)
            .map(|i| {
                let mut e = vec![Complex64::ZERO; dim];
                e[i] = Complex64::ONE;
                e
            })
            .collect();
        let h = move |t: f64| -> Result<ComplexMatrix> {
            let mut h = build_total_hamiltonian(m, t)?;
            h.add_scaled(&lifted_power(m, t)?, (-v).into());
            Ok(h)
        };
        propagate_states(&h, tau, steps, &mut columns)?;
        Ok(ComplexMatrix::from_fn(dim, |r, c| columns[c][r]))
    };

    let plus = modified(0.5 * u)?;
    let minus = modified(-0.5 * u)?;
    Ok(plus.matmul(&ens.rho_bar).matmul(&minus.adjoint()).trace())
}

/// Moment extracted by Richardson-refined central finite differences of a
/// generating function at `u = 0`.
#[derive(Debug, Clone, Copy)]
pub struct FdMoment {
    /// `(-i)ⁿ dⁿG/duⁿ |₀`, real part.
    pub value: f64,
    /// Magnitude of the imaginary remainder, a consistency diagnostic.
    pub imaginary_residual: f64,
}

/// Central finite differences of order `n ∈ 1..=3` with two Richardson
/// refinement levels; errors out when the refinements disagree.
pub fn moments_by_finite_difference<G>(g: G, order: u32, h: f64) -> Result<FdMoment>
where
    G: Fn(f64) -> Result<Complex64> + Sync,
{
    if !(1..=3).contains(&order) {
        return Err(Error::invalid("order", "supported orders are 1..=3"));
    }
    if !(1e-4..=1e-1).contains(&h) {
        return Err(Error::invalid("h", "step must lie in [1e-4, 1e-1]"));
    }

    // Distinct evaluation points over three stencil scales.
    let mut points: Vec<f64> = Vec::new();
    for scale in [1.0, 0.5, 0.25] {
        let hh = h * scale;
        match order {
            1 | 2 => points.extend_from_slice(&[hh, -hh]),
            _ => points.extend_from_slice(&[2.0 * hh, hh, -hh, -2.0 * hh]),
        }
    }
    if order == 2 {
        points.push(0.0);
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();

    let values = parallel::map_indexed(points.len(), |i| g(points[i]));
    let mut table = std::collections::BTreeMap::new();
    for (p, v) in points.iter().zip(values) {
        table.insert(p.to_bits(), v?);
    }
    let gv = |u: f64| table[&u.to_bits()];

    let stencil = |hh: f64| -> Complex64 {
        match order {
            1 => (gv(hh) - gv(-hh)) / (2.0 * hh),
            2 => (gv(hh) - gv(0.0) * 2.0 + gv(-hh)) / (hh * hh),
            _ => {
                (gv(2.0 * hh) - gv(hh) * 2.0 + gv(-hh) * 2.0 - gv(-2.0 * hh)) / (2.0 * hh * hh * hh)
            }
        }
    };

    let d0 = stencil(h);
    let d1 = stencil(0.5 * h);
    let d2 = stencil(0.25 * h);
    let r1 = (d1 * 4.0 - d0) / 3.0;
    let r2 = (d2 * 4.0 - d1) / 3.0;
    let disagreement = (r2 - r1).norm() / r2.norm().max(r1.norm()).max(1e-9);
    if disagreement > 1e-4 {
        return Err(Error::StepSize { disagreement });
    }

    let prefactor = Complex64::new(0.0, -1.0).powu(order);
    let value = prefactor * r2;
    Ok(FdMoment {
        value: value.re,
        imaginary_residual: value.im.abs(),
    })
}

/// Predicted third-moment gap between the exact and commuting-generator
/// functions: the double-commutator integral plus the ordered cross
/// correlation, evaluated on the total system with unitary regression.
pub fn third_moment_gap_prediction(m: &TotalSystemModel, steps: usize) -> Result<f64> {
    m.validate()?;
    let ens = initial_ensemble(m)?;
    let tau = m.system.tau();
    let dt = tau / steps as f64;

    let mut rho = ens.rho_bar.clone();
    let mut chain = ComplexMatrix::zeros(m.dim());

    let source = |t: f64, rho: &ComplexMatrix| -> Result<ComplexMatrix> {
        let h = build_total_hamiltonian(m, t)?;
        let c2 = linalg::commutator(&h, &lifted_power(m, t)?)?;
        Ok(c2.matmul(rho))
    };
    let single = |t: f64, rho: &ComplexMatrix| -> Result<f64> {
        let h = build_total_hamiltonian(m, t)?;
        let p = lifted_power(m, t)?;
        let c2 = linalg::commutator(&h, &p)?;
        let c3 = linalg::commutator(&h, &c2)?;
        Ok(c3.matmul(rho).trace().re)
    };
    let cross_sample = |t: f64, chain: &ComplexMatrix| -> Result<f64> {
        Ok(lifted_power(m, t)?.matmul(chain).trace().re)
    };

    let mut single_acc = 0.0;
    let mut cross_acc = 0.0;
    let mut f_single = single(0.0, &rho)?;
    let mut f_cross = cross_sample(0.0, &chain)?;

    for k in 0..steps {
        let t = k as f64 * dt;
        let t_next = t + dt;
        let t_mid = t + 0.5 * dt;
        let u = linalg::matrix_exponential(
            &build_total_hamiltonian(m, t_mid)?.scale(Complex64::new(0.0, -dt)),
        )?;
        let u_dag = u.adjoint();

        let src_now = source(t, &rho)?;
        let mut x = chain.clone();
        x.add_scaled(&src_now, (0.5 * dt).into());
        chain = u.matmul(&x).matmul(&u_dag);
        rho = u.matmul(&rho).matmul(&u_dag);
        chain.add_scaled(&source(t_next, &rho)?, (0.5 * dt).into());

        let g_single = single(t_next, &rho)?;
        let g_cross = cross_sample(t_next, &chain)?;
        single_acc += 0.5 * dt * (f_single + g_single);
        cross_acc += 0.5 * dt * (f_cross + g_cross);
        f_single = g_single;
        f_cross = g_cross;
    }

    Ok(0.25 * single_acc + 1.5 * cross_acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_model() -> TotalSystemModel {
        TotalSystemModel {
            system: SystemParams {
                steps: 600,
                cycles: 2.0,
                ..SystemParams::default()
            },
            n_modes: 1,
            n_max: 2,
            mode_freqs: vec![1.0],
            couplings: vec![Complex64::new(0.02, 0.0)],
            coupling_form: CouplingForm::Full,
            measurement: MeasurementBasis::Bare,
        }
    }

    #[test]
    fn decoupled_hamiltonian_has_ladder_sum_spectrum() {
        let mut m = small_model();
        m.couplings = vec![Complex64::ZERO];
        let h = build_total_hamiltonian(&m, 0.0).unwrap();
        let (evals, _) = linalg::hermitian_eigensystem(&h).unwrap();
        let expected = [0.0, 1.0, 1.0, 2.0, 2.0, 3.0];
        for (a, b) in evals.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn hamiltonian_does_not_commute_with_its_derivative() {
        let m = small_model();
        let t = 0.37;
        let h = build_total_hamiltonian(&m, t).unwrap();
        let p = lifted_power(&m, t).unwrap();
        let c = linalg::commutator(&h, &p).unwrap();
        assert!(c.max_abs() > 1e-4);
    }

    #[test]
    fn rwa_coupling_has_jaynes_cummings_single_excitation_block() {
        let mut m = small_model();
        m.coupling_form = CouplingForm::Rwa;
        let h = build_total_hamiltonian(&m, 0.0).unwrap();
        // basis |sys, n⟩ at index sys*3 + n; single-excitation pair
        // {|e,0⟩ (index 3), |g,1⟩ (index 1)}
        assert!((h[(3, 1)] - Complex64::new(0.02, 0.0)).norm() < 1e-15);
        assert!((h[(1, 3)] - Complex64::new(0.02, 0.0)).norm() < 1e-15);
        // no counter-rotating entry: ⟨e,1|H|g,0⟩ = 0
        assert!(h[(4, 0)].norm() == 0.0);
        assert!(h.hermiticity_deviation() < 1e-15);
    }

    #[test]
    fn distribution_is_diagonal_without_drive_or_coupling() {
        let mut m = small_model();
        m.couplings = vec![Complex64::ZERO];
        m.system.lambda0 = 0.0;
        let d = tpm_distribution(&m, 400).unwrap();
        assert!((d.total_probability() - 1.0).abs() < 1e-10);
        for &(e0, etau, p) in &d.entries {
            if p > 1e-12 {
                assert!(
                    (e0 - etau).abs() < 1e-9,
                    "off-diagonal weight {p} at ({e0}, {etau})"
                );
            }
        }
        assert!(d.unitarity_residual < 1e-8);
    }

    #[test]
    fn decoupled_work_distribution_has_three_point_support() {
        let mut m = small_model();
        m.couplings = vec![Complex64::ZERO];
        let d = tpm_distribution(&m, 1500).unwrap();
        let works = d.work_distribution(1e-6);
        assert_eq!(works.len(), 3, "{works:?}");
        let pge = model::closed_system_flip_probability(&m.system, 6000);
        let (pg, pe) = model::thermal_populations(&m.system);
        let p_plus = works
            .iter()
            .find(|(w, _)| (w - 1.0).abs() < 1e-6)
            .unwrap()
            .1;
        let p_minus = works
            .iter()
            .find(|(w, _)| (w + 1.0).abs() < 1e-6)
            .unwrap()
            .1;
        assert!((p_plus - pg * pge).abs() < 1e-6, "{p_plus} vs {}", pg * pge);
        assert!((p_minus - pe * pge).abs() < 1e-6);
    }

    #[test]
    fn generating_functions_normalize_at_zero() {
        let m = small_model();
        let g = ExactGeneratingFunction::new(&m, 300).unwrap();
        assert!((g.eval(0.0).unwrap() - Complex64::ONE).norm() < 1e-12);
        let g0 = generating_function_commuting(&m, 300, 0.0).unwrap();
        assert!((g0 - Complex64::ONE).norm() < 1e-12);
    }

    #[test]
    fn generating_functions_have_hermitian_symmetry() {
        let m = small_model();
        let g = ExactGeneratingFunction::new(&m, 300).unwrap();
        for &u in &[0.3, 1.1] {
            let plus = g.eval(u).unwrap();
            let minus = g.eval(-u).unwrap();
            assert!((plus - minus.conj()).norm() < 1e-10);
        }
        let g0p = generating_function_commuting(&m, 300, 0.7).unwrap();
        let g0m = generating_function_commuting(&m, 300, -0.7).unwrap();
        assert!((g0p - g0m.conj()).norm() < 1e-10);
    }

    #[test]
    fn trace_route_matches_fourier_sum() {
        let m = small_model();
        let steps = 800;
        let d = tpm_distribution(&m, steps).unwrap();
        let g = ExactGeneratingFunction::new(&m, steps).unwrap();
        for &u in &[0.1, 0.5, 1.0] {
            let trace = g.eval(u).unwrap();
            let fourier = d.fourier(u);
            assert!(
                (trace - fourier).norm() < 1e-8,
                "u = {u}: {trace} vs {fourier}"
            );
        }
    }

    #[test]
    fn closed_system_satisfies_the_work_fluctuation_identity() {
        let mut m = small_model();
        m.couplings = vec![Complex64::ZERO];
        let d = tpm_distribution(&m, 1000).unwrap();
        let beta = m.system.beta;
        assert!((d.exponential_average(beta) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn excitation_number_is_conserved_by_rwa_coupling_without_drive() {
        let mut m = small_model();
        m.coupling_form = CouplingForm::Rwa;
        m.system.lambda0 = 0.0;
        let d = tpm_distribution(&m, 800).unwrap();
        // With a resonant mode the bare measurement energy equals the
        // excitation number, so energy-changing cells carry no weight.
        for &(e0, etau, p) in &d.entries {
            if (e0 - etau).abs() > 1e-9 {
                assert!(p < 1e-10, "leakage {p} at ({e0}, {etau})");
            }
        }
    }

    #[test]
    fn finite_difference_moments_of_a_point_mass() {
        // G(u) = e^{iu} generates W = 1 exactly.
        let g = |u: f64| Ok(Complex64::from_polar(1.0, u));
        for order in 1..=3 {
            let m = moments_by_finite_difference(g, order, 0.02).unwrap();
            assert!((m.value - 1.0).abs() < 1e-7, "order {order}: {}", m.value);
            assert!(m.imaginary_residual < 1e-7);
        }
        let constant = |_: f64| Ok(Complex64::ONE);
        for order in 1..=3 {
            let m = moments_by_finite_difference(constant, order, 0.02).unwrap();
            assert!(m.value.abs() < 1e-12);
        }
    }

    #[test]
    fn finite_difference_rejects_out_of_range_steps() {
        let g = |u: f64| Ok(Complex64::from_polar(1.0, u));
        assert!(moments_by_finite_difference(g, 1, 1e-5).is_err());
        assert!(moments_by_finite_difference(g, 1, 0.5).is_err());
        assert!(moments_by_finite_difference(g, 4, 0.02).is_err());
    }

    #[test]
    fn distribution_moments_match_finite_differences_of_the_trace_route() {
        let m = small_model();
        let steps = 800;
        let d = tpm_distribution(&m, steps).unwrap();
        let g = ExactGeneratingFunction::new(&m, steps).unwrap();
        for order in 1..=2u32 {
            let fd = moments_by_finite_difference(|u| g.eval(u), order, 0.02).unwrap();
            let direct = moments_from_distribution(&d, order);
            assert!(
                (fd.value - direct).abs() < 1e-6 * direct.abs().max(1.0),
                "order {order}: fd {} vs table {}",
                fd.value,
                direct
            );
        }
    }
}
