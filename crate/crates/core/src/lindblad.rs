//! Lindblad generator for the reduced two-level system, a fixed-step
//! propagator, and a co-evolution engine that evaluates the multi-time
//! power-operator correlation functions in a single forward pass.
//!
//! The co-evolution realizes the regression rule: for ordered times
//! `t₃ ≤ t₂ ≤ t₁`,
//!
//! ```text
//! ⟨A(t₁)B(t₂)C(t₃)⟩ = Tr{ A · V(t₁,t₂)[ B · V(t₂,t₃)[ C ρ(t₃) ] ] }
//! ⟨C(t₃)A(t₁)B(t₂)⟩ = Tr{ A · V(t₁,t₂)[ B · V(t₂,t₃)[ ρ(t₃) C ] ] }
//! ```
//!
//! where `V(s,s')` propagates arbitrary (generally non-Hermitian) matrices
//! with the same generator as the state. Instead of nesting the integrals,
//! each insertion becomes a source term of an auxiliary matrix that is
//! integrated alongside `ρ`, turning the triple time-ordered integral into
//! a single `O(steps)` sweep.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::model::{self, SystemParams};

/// Generator description consumed by the co-evolution engine. The full
/// numeric track and the rotating-frame analytic track provide different
/// operator families but share the stepping and accumulation logic.
pub(crate) trait TrackOps {
    /// Hamiltonian entering the coherent part of the generator.
    fn hamiltonian(&self, t: f64) -> ComplexMatrix;
    /// Power operator whose correlators build the work moments.
    fn power(&self, t: f64) -> ComplexMatrix;
    /// First commutator correction operator.
    fn c2(&self, t: f64) -> ComplexMatrix;
    /// Second commutator correction operator.
    fn c3(&self, t: f64) -> ComplexMatrix;
    /// Emission and absorption rates.
    fn rates(&self) -> (f64, f64);
}

/// Schrödinger-picture track: the sinusoidally driven Hamiltonian with its
/// exact commutator hierarchy.
pub(crate) struct FullTrack<'a> {
    params: &'a SystemParams,
    rates: (f64, f64),
}

impl<'a> FullTrack<'a> {
    pub(crate) fn new(params: &'a SystemParams) -> Self {
        FullTrack {
            params,
            rates: model::transition_rates(params),
        }
    }
}

impl TrackOps for FullTrack<'_> {
    fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        model::system_hamiltonian(self.params, t)
    }

    fn power(&self, t: f64) -> ComplexMatrix {
        model::power_operator(self.params, t)
    }

    fn c2(&self, t: f64) -> ComplexMatrix {
        // [H_S(t), P(t)] = λ̇(t) ω₀ (a† - a)
        let f = self.params.lambda_dot(t) * self.params.omega0;
        ComplexMatrix::two_by_two(0.0, -f, f, 0.0)
    }

    fn c3(&self, t: f64) -> ComplexMatrix {
        // [H_S(t), [H_S(t), P(t)]] = λ̇ ω₀ [ω₀ (a+a†) + 2λ (aa† - a†a)]
        let ld = self.params.lambda_dot(t) * self.params.omega0;
        let w = self.params.omega0;
        let l = self.params.lambda(t);
        ComplexMatrix::two_by_two(2.0 * l * ld, w * ld, w * ld, -2.0 * l * ld)
    }

    fn rates(&self) -> (f64, f64) {
        self.rates
    }
}

/// Apply the Lindblad generator at time `t` to an arbitrary 2x2 matrix.
///
/// `L_t[x] = -i[H_S(t), x] + Γ↓ (x_ee |g⟩⟨g| - ½{x, |e⟩⟨e|})
///                        + Γ↑ (x_gg |e⟩⟨e| - ½{x, |g⟩⟨g|})`
pub fn lindblad_apply(p: &SystemParams, t: f64, x: &ComplexMatrix) -> ComplexMatrix {
    let (gd, gu) = model::transition_rates(p);
    let h = model::system_hamiltonian(p, t);
    apply_generator(&h, gd, gu, x)
}

/// Generator application shared by all tracks; `x` need not be Hermitian.
pub(crate) fn apply_generator(
    h: &ComplexMatrix,
    gamma_down: f64,
    gamma_up: f64,
    x: &ComplexMatrix,
) -> ComplexMatrix {
    debug_assert_eq!(x.dim(), 2);
    let (xgg, xge, xeg, xee) = (x[(0, 0)], x[(0, 1)], x[(1, 0)], x[(1, 1)]);
    let (hgg, hge, heg, hee) = (h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]);

    // -i (h x - x h)
    let minus_i = Complex64::new(0.0, -1.0);
    let cgg = minus_i * (hge * xeg - xge * heg);
    let cge = minus_i * (hgg * xge + hge * xee - xgg * hge - xge * hee);
    let ceg = minus_i * (heg * xgg + hee * xeg - xeg * hgg - xee * heg);
    let cee = minus_i * (heg * xge - xeg * hge);

    // Dissipators in component form.
    let half = 0.5 * (gamma_down + gamma_up);
    let mut out = ComplexMatrix::zeros(2);
    out[(0, 0)] = cgg + gamma_down * xee - gamma_up * xgg;
    out[(0, 1)] = cge - half * xge;
    out[(1, 0)] = ceg - half * xeg;
    out[(1, 1)] = cee + gamma_up * xgg - gamma_down * xee;
    out
}

/// One classical 4th-order step of the homogeneous equation `dx/dt = L_t[x]`.
fn rk4_step<T: TrackOps>(ops: &T, t: f64, dt: f64, x: &ComplexMatrix) -> ComplexMatrix {
    let (gd, gu) = ops.rates();
    let h0 = ops.hamiltonian(t);
    let h1 = ops.hamiltonian(t + 0.5 * dt);
    let h2 = ops.hamiltonian(t + dt);

    let k1 = apply_generator(&h0, gd, gu, x);
    let mut s = x.clone();
    s.add_scaled(&k1, (0.5 * dt).into());
    let k2 = apply_generator(&h1, gd, gu, &s);
    let mut s = x.clone();
    s.add_scaled(&k2, (0.5 * dt).into());
    let k3 = apply_generator(&h1, gd, gu, &s);
    let mut s = x.clone();
    s.add_scaled(&k3, dt.into());
    let k4 = apply_generator(&h2, gd, gu, &s);

    let mut out = x.clone();
    out.add_scaled(&k1, (dt / 6.0).into());
    out.add_scaled(&k2, (dt / 3.0).into());
    out.add_scaled(&k3, (dt / 3.0).into());
    out.add_scaled(&k4, (dt / 6.0).into());
    out
}

fn min_eigenvalue_2x2(rho: &ComplexMatrix) -> f64 {
    let m = 0.5 * (rho[(0, 0)].re + rho[(1, 1)].re);
    let det = rho[(0, 0)].re * rho[(1, 1)].re - rho[(0, 1)].norm_sqr();
    m - (m * m - det).max(0.0).sqrt()
}

/// Positivity floor tolerated during propagation before reporting an error.
pub const POSITIVITY_FLOOR: f64 = -1e-6;

/// Integrate the master equation from `t0` to `t1` with `substeps` fixed
/// steps, re-symmetrizing the state after every step.
pub fn propagate_state(
    p: &SystemParams,
    rho0: &ComplexMatrix,
    t0: f64,
    t1: f64,
    substeps: usize,
) -> Result<ComplexMatrix> {
    assert!(t1 >= t0, "propagate_state requires t0 <= t1");
    assert!(substeps >= 1);
    let track = FullTrack::new(p);
    let dt = (t1 - t0) / substeps as f64;
    let mut rho = rho0.clone();
    for k in 0..substeps {
        rho = rk4_step(&track, t0 + k as f64 * dt, dt, &rho);
        rho.hermitize();
        let min_eig = min_eigenvalue_2x2(&rho);
        if min_eig < POSITIVITY_FLOOR {
            return Err(Error::PositivityViolation {
                step: k,
                min_eigenvalue: min_eig,
            });
        }
    }
    Ok(rho)
}

/// Scalar integrals and trajectories returned by one co-evolution pass.
#[derive(Debug, Clone)]
pub struct Coevolution {
    /// Grid times, `steps + 1` points covering `[0, τ]`.
    pub times: Vec<f64>,
    /// First moment `∫ ⟨P⟩ dt`.
    pub w1: f64,
    /// Second moment `2 ∫∫ Re⟨P P⟩`.
    pub w2: f64,
    /// Uncorrected third moment `3 ∫∫∫ Re{⟨P P P⟩ + ⟨P P P⟩_cyc}`.
    pub w3_0: f64,
    /// Two-time commutator correction `(3/2) ∫∫ Re⟨P(t₁) C₂(t₂)⟩`.
    pub w3_cross: f64,
    /// Running value of `w1` at each grid point.
    pub running_w1: Vec<f64>,
    /// Running value of `w2` at each grid point.
    pub running_w2: Vec<f64>,
    /// Running value of `w3_0` at each grid point.
    pub running_w3_0: Vec<f64>,
    /// State trajectory on the grid.
    pub rho: Vec<ComplexMatrix>,
    /// Largest deviation of the right-insertion chain from the adjoint of
    /// the left-insertion chain, a discretization health indicator.
    pub chain_adjoint_deviation: f64,
}

fn re_trace_prod(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    // Re Tr{a b} for 2x2 matrices.
    (a[(0, 0)] * b[(0, 0)] + a[(0, 1)] * b[(1, 0)] + a[(1, 0)] * b[(0, 1)] + a[(1, 1)] * b[(1, 1)])
        .re
}

/// One forward pass co-evolving the state and the correlation chains.
///
/// Sources are accumulated on the shared grid with trapezoidal
/// end-correction: each chain is advanced homogeneously by the same RK4 step
/// as the state, with half-weighted source contributions attached at both
/// ends of every step. This makes the pass agree with an explicit
/// nested-loop evaluation of the regression formulas to rounding accuracy.
pub(crate) fn coevolve_with<T: TrackOps>(
    ops: &T,
    rho0: &ComplexMatrix,
    tau: f64,
    steps: usize,
) -> Result<Coevolution> {
    assert!(steps >= 2);
    let dt = tau / steps as f64;
    let n_points = steps + 1;

    let mut rho = rho0.clone();
    let mut a1 = ComplexMatrix::zeros(2); // left insertion:  dA₁/dt = L[A₁] + Pρ
    let mut a2 = ComplexMatrix::zeros(2); // right insertion: dA₂/dt = L[A₂] + ρP
    let mut b1 = ComplexMatrix::zeros(2); // dB₁/dt = L[B₁] + P A₁
    let mut b2 = ComplexMatrix::zeros(2); // dB₂/dt = L[B₂] + P A₂
    let mut dchain = ComplexMatrix::zeros(2); // dD/dt = L[D] + C₂ρ

    let mut times = Vec::with_capacity(n_points);
    let mut running_w1 = Vec::with_capacity(n_points);
    let mut running_w2 = Vec::with_capacity(n_points);
    let mut running_w3 = Vec::with_capacity(n_points);
    let mut rho_traj = Vec::with_capacity(n_points);

    let mut w1 = 0.0;
    let mut w2 = 0.0;
    let mut w3_0 = 0.0;
    let mut cross = 0.0;
    let mut adjoint_dev: f64 = 0.0;

    // Integrand samples at the current grid point.
    let integrands = |t: f64,
                      rho: &ComplexMatrix,
                      a1: &ComplexMatrix,
                      b1: &ComplexMatrix,
                      b2: &ComplexMatrix,
                      d: &ComplexMatrix|
     -> (f64, f64, f64, f64) {
        let pw = ops.power(t);
        let f1 = re_trace_prod(&pw, rho);
        let f2 = 2.0 * re_trace_prod(&pw, a1);
        let f3 = 3.0 * (re_trace_prod(&pw, b1) + re_trace_prod(&pw, b2));
        let fc = 1.5 * re_trace_prod(&pw, d);
        (f1, f2, f3, fc)
    };

    let (mut f1, mut f2, mut f3, mut fc) = integrands(0.0, &rho, &a1, &b1, &b2, &dchain);
    times.push(0.0);
    running_w1.push(0.0);
    running_w2.push(0.0);
    running_w3.push(0.0);
    rho_traj.push(rho.clone());

    for k in 0..steps {
        let t = k as f64 * dt;
        let t_next = (k + 1) as f64 * dt;

        // Sources at the left end of the step.
        let p_now = ops.power(t);
        let src_a1 = p_now.matmul(&rho);
        let src_a2 = rho.matmul(&p_now);
        let src_b1 = p_now.matmul(&a1);
        let src_b2 = p_now.matmul(&a2);
        let src_d = ops.c2(t).matmul(&rho);

        // State first: the chains' right-end sources need ρ(t+dt).
        rho = rk4_step(ops, t, dt, &rho);
        rho.hermitize();
        let min_eig = min_eigenvalue_2x2(&rho);
        if min_eig < POSITIVITY_FLOOR {
            return Err(Error::PositivityViolation {
                step: k,
                min_eigenvalue: min_eig,
            });
        }

        let p_next = ops.power(t_next);
        let half = (0.5 * dt).into();

        let mut x = a1.clone();
        x.add_scaled(&src_a1, half);
        a1 = rk4_step(ops, t, dt, &x);
        a1.add_scaled(&p_next.matmul(&rho), half);

        let mut x = a2.clone();
        x.add_scaled(&src_a2, half);
        a2 = rk4_step(ops, t, dt, &x);
        a2.add_scaled(&rho.matmul(&p_next), half);

        let mut x = b1.clone();
        x.add_scaled(&src_b1, half);
        b1 = rk4_step(ops, t, dt, &x);
        b1.add_scaled(&p_next.matmul(&a1), half);

        let mut x = b2.clone();
        x.add_scaled(&src_b2, half);
        b2 = rk4_step(ops, t, dt, &x);
        b2.add_scaled(&p_next.matmul(&a2), half);

        let mut x = dchain.clone();
        x.add_scaled(&src_d, half);
        dchain = rk4_step(ops, t, dt, &x);
        dchain.add_scaled(&ops.c2(t_next).matmul(&rho), half);

        adjoint_dev = adjoint_dev.max(a2.max_abs_diff(&a1.adjoint()));

        // Trapezoid accumulation of the scalar integrands.
        let (g1, g2, g3, gc) = integrands(t_next, &rho, &a1, &b1, &b2, &dchain);
        w1 += 0.5 * dt * (f1 + g1);
        w2 += 0.5 * dt * (f2 + g2);
        w3_0 += 0.5 * dt * (f3 + g3);
        cross += 0.5 * dt * (fc + gc);
        (f1, f2, f3, fc) = (g1, g2, g3, gc);

        times.push(t_next);
        running_w1.push(w1);
        running_w2.push(w2);
        running_w3.push(w3_0);
        rho_traj.push(rho.clone());
    }

    Ok(Coevolution {
        times,
        w1,
        w2,
        w3_0,
        w3_cross: cross,
        running_w1,
        running_w2,
        running_w3_0: running_w3,
        rho: rho_traj,
        chain_adjoint_deviation: adjoint_dev,
    })
}

/// Full-track co-evolution from the thermal state over `[0, τ]`.
pub fn coevolve_correlations(p: &SystemParams) -> Result<Coevolution> {
    let track = FullTrack::new(p);
    coevolve_with(&track, &model::thermal_state(p), p.tau(), p.steps)
}

/// Explicit nested-loop evaluation of the same regression integrals on a
/// coarse grid, built from per-step superoperator matrices.
///
/// This reference makes no use of the source-term co-evolution; it exists to
/// cross-validate `coevolve_correlations` and is only practical for small
/// grids (`O(n²)` superoperator products).
pub fn nested_regression_reference(p: &SystemParams, steps: usize) -> Result<(f64, f64, f64, f64)> {
    let track = FullTrack::new(p);
    nested_regression_with(&track, &model::thermal_state(p), p.tau(), steps)
}

pub(crate) fn nested_regression_with<T: TrackOps>(
    ops: &T,
    rho0: &ComplexMatrix,
    tau: f64,
    steps: usize,
) -> Result<(f64, f64, f64, f64)> {
    assert!(steps >= 2);
    let n = steps + 1;
    let dt = tau / steps as f64;

    // Per-step superoperators acting on vec(X) = [xgg, xge, xeg, xee].
    let basis: Vec<ComplexMatrix> = (0..4)
        .map(|i| {
            let mut m = ComplexMatrix::zeros(2);
            m[(i / 2, i % 2)] = Complex64::ONE;
            m
        })
        .collect();
    let mut step_ops: Vec<[Vec<Complex64>; 4]> = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = k as f64 * dt;
        let cols: Vec<Vec<Complex64>> = basis
            .iter()
            .map(|b| mat_to_vec(&rk4_step(ops, t, dt, b)))
            .collect();
        step_ops.push([
            cols[0].clone(),
            cols[1].clone(),
            cols[2].clone(),
            cols[3].clone(),
        ]);
    }
    let apply_step = |k: usize, v: &[Complex64; 4]| -> [Complex64; 4] {
        let cols = &step_ops[k];
        let mut out = [Complex64::ZERO; 4];
        for (c, col) in cols.iter().enumerate() {
            for r in 0..4 {
                out[r] += col[r] * v[c];
            }
        }
        out
    };
    // Propagate a vectorized matrix from grid point j to grid point i >= j.
    let propagate = |from: usize, to: usize, v: [Complex64; 4]| -> [Complex64; 4] {
        let mut out = v;
        for k in from..to {
            out = apply_step(k, &out);
        }
        out
    };

    // Trapezoid weight of node k on [0, t_j].
    let weight = |k: usize, j: usize| -> f64 {
        if k == 0 || k == j {
            0.5 * dt
        } else {
            dt
        }
    };

    // State on the grid, from the same per-step superoperators.
    let mut rho_grid: Vec<[Complex64; 4]> = Vec::with_capacity(n);
    let mut v = vec_of_mat(rho0);
    rho_grid.push(v);
    for k in 0..steps {
        v = apply_step(k, &v);
        rho_grid.push(v);
    }

    let power: Vec<ComplexMatrix> = (0..n).map(|k| ops.power(k as f64 * dt)).collect();
    let c2: Vec<ComplexMatrix> = (0..n).map(|k| ops.c2(k as f64 * dt)).collect();

    // First-level chains by explicit summation.
    let mut a1_grid: Vec<[Complex64; 4]> = Vec::with_capacity(n);
    let mut a2_grid: Vec<[Complex64; 4]> = Vec::with_capacity(n);
    let mut d_grid: Vec<[Complex64; 4]> = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc_a1 = [Complex64::ZERO; 4];
        let mut acc_a2 = [Complex64::ZERO; 4];
        let mut acc_d = [Complex64::ZERO; 4];
        if j > 0 {
            for k in 0..=j {
                let rho_k = mat_of_vec(&rho_grid[k]);
                let w = weight(k, j);
                let contrib_a1 = propagate(k, j, vec4_scaled(&power[k].matmul(&rho_k), w));
                let contrib_a2 = propagate(k, j, vec4_scaled(&rho_k.matmul(&power[k]), w));
                let contrib_d = propagate(k, j, vec4_scaled(&c2[k].matmul(&rho_k), w));
                for r in 0..4 {
                    acc_a1[r] += contrib_a1[r];
                    acc_a2[r] += contrib_a2[r];
                    acc_d[r] += contrib_d[r];
                }
            }
        }
        a1_grid.push(acc_a1);
        a2_grid.push(acc_a2);
        d_grid.push(acc_d);
    }

    // Second-level chains.
    let mut b_grid: Vec<[Complex64; 4]> = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = [Complex64::ZERO; 4];
        if i > 0 {
            for j in 0..=i {
                let a1_j = mat_of_vec(&a1_grid[j]);
                let a2_j = mat_of_vec(&a2_grid[j]);
                let w = weight(j, i);
                let src = &power[j].matmul(&a1_j) + &power[j].matmul(&a2_j);
                let contrib = propagate(j, i, vec4_scaled(&src, w));
                for r in 0..4 {
                    acc[r] += contrib[r];
                }
            }
        }
        b_grid.push(acc);
    }

    // Outer integrals.
    let (mut w1, mut w2, mut w3_0, mut cross) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let w = weight(i, n - 1);
        let rho_i = mat_of_vec(&rho_grid[i]);
        let a1_i = mat_of_vec(&a1_grid[i]);
        let b_i = mat_of_vec(&b_grid[i]);
        let d_i = mat_of_vec(&d_grid[i]);
        w1 += w * re_trace_prod(&power[i], &rho_i);
        w2 += w * 2.0 * re_trace_prod(&power[i], &a1_i);
        w3_0 += w * 3.0 * re_trace_prod(&power[i], &b_i);
        cross += w * 1.5 * re_trace_prod(&power[i], &d_i);
    }
    Ok((w1, w2, w3_0, cross))
}

fn mat_to_vec(m: &ComplexMatrix) -> Vec<Complex64> {
    vec![m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

fn vec_of_mat(m: &ComplexMatrix) -> [Complex64; 4] {
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

fn vec4_scaled(m: &ComplexMatrix, w: f64) -> [Complex64; 4] {
    [m[(0, 0)] * w, m[(0, 1)] * w, m[(1, 0)] * w, m[(1, 1)] * w]
}

fn mat_of_vec(v: &[Complex64; 4]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 0)] = v[0];
    m[(0, 1)] = v[1];
    m[(1, 0)] = v[2];
    m[(1, 1)] = v[3];
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{thermal_state, SystemParams};

    #[test]
    fn thermal_state_is_stationary_without_drive() {
        let p = SystemParams {
            lambda0: 0.0,
            ..SystemParams::default()
        };
        let rho = thermal_state(&p);
        let l = lindblad_apply(&p, 0.7, &rho);
        assert!(l.max_abs() < 1e-16, "residual {:.2e}", l.max_abs());
    }

    #[test]
    fn excited_population_decays_at_gamma_down() {
        let p = SystemParams {
            lambda0: 0.0,
            ..SystemParams::default()
        };
        let (gd, gu) = model::transition_rates(&p);
        let excited = ComplexMatrix::two_by_two(0.0, 0.0, 0.0, 1.0);
        let l = lindblad_apply(&p, 0.0, &excited);
        // population flow: d rho_ee/dt = -Γ↓ ρ_ee + Γ↑ ρ_gg = -Γ↓
        assert!((l[(1, 1)].re + gd).abs() < 1e-15);
        assert!((l[(0, 0)].re - gd).abs() < 1e-15);
        assert!(l.trace().norm() < 1e-16);
        let _ = gu;
    }

    #[test]
    fn coherence_decays_at_half_total_rate() {
        let p = SystemParams {
            lambda0: 0.0,
            ..SystemParams::default()
        };
        let (gd, gu) = model::transition_rates(&p);
        let coh = ComplexMatrix::two_by_two(0.0, 0.0, 1.0, 0.0); // |e><g|
        let l = lindblad_apply(&p, 0.0, &coh);
        let expected = Complex64::new(-(gd + gu) / 2.0, -p.omega0);
        assert!((l[(1, 0)] - expected).norm() < 1e-15);
        assert!(l[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn generator_is_linear_and_traceless() {
        let p = SystemParams::default();
        let x = ComplexMatrix::from_fn(2, |r, c| {
            Complex64::new(0.3 * r as f64 - 0.1, 0.2 * c as f64)
        });
        let y = ComplexMatrix::from_fn(2, |r, c| Complex64::new(0.7 - r as f64 * c as f64, -0.4));
        let alpha = Complex64::new(0.3, -1.2);
        let beta = Complex64::new(-0.8, 0.05);

        let mut combo = x.scale(alpha);
        combo.add_scaled(&y, beta);
        let lhs = lindblad_apply(&p, 3.3, &combo);
        let mut rhs = lindblad_apply(&p, 3.3, &x).scale(alpha);
        rhs.add_scaled(&lindblad_apply(&p, 3.3, &y), beta);
        assert!(lhs.max_abs_diff(&rhs) < 1e-13);
        assert!(lindblad_apply(&p, 3.3, &x).trace().norm() < 1e-14);
    }

    #[test]
    fn free_evolution_keeps_populations() {
        let p = SystemParams {
            lambda0: 0.0,
            gamma_down: 0.0,
            ..SystemParams::default()
        };
        let excited = ComplexMatrix::two_by_two(0.0, 0.0, 0.0, 1.0);
        let rho = propagate_state(&p, &excited, 0.0, 17.0, 1000).unwrap();
        assert!(rho.max_abs_diff(&excited) < 1e-12);
    }

    #[test]
    fn undriven_damped_system_relaxes_to_thermal_state() {
        let p = SystemParams {
            lambda0: 0.0,
            gamma_down: 0.05,
            ..SystemParams::default()
        };
        let excited = ComplexMatrix::two_by_two(0.0, 0.0, 0.0, 1.0);
        // ω₀ t = 400 ≫ 1/Γ↓ = 20
        let rho = propagate_state(&p, &excited, 0.0, 400.0, 8000).unwrap();
        assert!(rho.max_abs_diff(&thermal_state(&p)) < 1e-6);
    }

    #[test]
    fn propagation_preserves_trace_and_hermiticity() {
        let p = SystemParams::default();
        let rho = propagate_state(&p, &thermal_state(&p), 0.0, p.tau(), 2000).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-9);
        assert!(rho.hermiticity_deviation() == 0.0);
        assert!(min_eigenvalue_2x2(&rho) > -1e-8);
    }

    #[test]
    fn coevolution_vanishes_without_drive() {
        let p = SystemParams {
            lambda0: 0.0,
            steps: 500,
            ..SystemParams::default()
        };
        let out = coevolve_correlations(&p).unwrap();
        assert_eq!(out.w1, 0.0);
        assert_eq!(out.w2, 0.0);
        assert_eq!(out.w3_0, 0.0);
        assert_eq!(out.w3_cross, 0.0);
    }

    #[test]
    fn coevolution_matches_nested_reference_on_coarse_grid() {
        let p = SystemParams {
            steps: 100,
            cycles: 2.0,
            ..SystemParams::default()
        };
        let track = FullTrack::new(&p);
        let fast = coevolve_with(&track, &thermal_state(&p), p.tau(), p.steps).unwrap();
        let (w1, w2, w3_0, cross) = nested_regression_reference(&p, p.steps).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-12);
        assert!(rel(fast.w1, w1) < 1e-6, "w1 {} vs {}", fast.w1, w1);
        assert!(rel(fast.w2, w2) < 1e-6, "w2 {} vs {}", fast.w2, w2);
        assert!(
            rel(fast.w3_0, w3_0) < 1e-6,
            "w3_0 {} vs {}",
            fast.w3_0,
            w3_0
        );
        assert!(
            rel(fast.w3_cross, cross) < 1e-6,
            "cross {} vs {}",
            fast.w3_cross,
            cross
        );
    }

    #[test]
    fn chains_remain_adjoint_pairs() {
        let p = SystemParams {
            steps: 400,
            cycles: 3.0,
            ..SystemParams::default()
        };
        let out = coevolve_correlations(&p).unwrap();
        assert!(out.chain_adjoint_deviation < 1e-10);
    }

    #[test]
    fn trace_is_conserved_along_the_full_grid() {
        let p = SystemParams {
            steps: 2000,
            ..SystemParams::default()
        };
        let out = coevolve_correlations(&p).unwrap();
        for rho in &out.rho {
            assert!((rho.trace().re - 1.0).abs() <= 1e-9);
        }
    }
}
