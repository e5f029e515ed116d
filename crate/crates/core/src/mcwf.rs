//! Quantum-jump (Monte Carlo wave function) trajectory sampler.
//!
//! Each trajectory carries a pure state through a first-order jump
//! unraveling on the shared fixed grid: per step either one jump fires
//! (photon emission or absorption, drawn with probability
//! `Γ ⟨ψ|L†L|ψ⟩ dt`) or the state takes a deterministic non-Hermitian step
//! and is renormalized. Work per trajectory is the energy difference of
//! projective boundary measurements plus the heat read off the jump record,
//! so every sample sits exactly on the `ħω₀` lattice.
//!
//! Trajectory generators are seeded from `(master_seed, index)` with a
//! counter-style mixing function, and the ensemble reduction accumulates
//! integer counts only, so the statistics are bit-identical for any worker
//! count.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{self, SystemParams};
use crate::parallel;

/// Energy eigenlevel of the bare two-level system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Ground,
    Excited,
}

/// Kind of a recorded jump event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    /// `√Γ↓ a`: one quantum released to the bath.
    Emission,
    /// `√Γ↑ a†`: one quantum absorbed from the bath.
    Absorption,
}

/// Outcome of a single trajectory.
#[derive(Debug, Clone)]
pub struct WorkRecord {
    pub initial_level: Level,
    /// Jump log with strictly increasing times in `[0, τ]`.
    pub jumps: Vec<(f64, JumpKind)>,
    pub final_level: Level,
    /// Net work in quanta of `ħω₀`.
    pub work_quanta: i64,
}

impl WorkRecord {
    pub fn emissions(&self) -> usize {
        self.jumps
            .iter()
            .filter(|(_, k)| *k == JumpKind::Emission)
            .count()
    }

    pub fn absorptions(&self) -> usize {
        self.jumps.len() - self.emissions()
    }

    /// Work in reduced units `W/ħω₀`.
    pub fn work(&self) -> f64 {
        self.work_quanta as f64
    }
}

fn level_energy(level: Level) -> i64 {
    match level {
        Level::Ground => 0,
        Level::Excited => 1,
    }
}

/// Draw the initial level from the thermal occupation.
pub fn sample_initial_level(p: &SystemParams, rng: &mut impl Rng) -> Level {
    let (pg, _) = model::thermal_populations(p);
    if rng.random::<f64>() < pg {
        Level::Ground
    } else {
        Level::Excited
    }
}

#[derive(Clone, Copy)]
struct Mat2([Complex64; 4]);

impl Mat2 {
    fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.0[0] * v[0] + self.0[1] * v[1],
            self.0[2] * v[0] + self.0[3] * v[1],
        ]
    }
}

fn add_scaled(a: &Mat2, b: &Mat2, f: f64) -> Mat2 {
    let mut out = a.0;
    for i in 0..4 {
        out[i] += b.0[i] * f;
    }
    Mat2(out)
}

/// Precomputed per-step propagators of the no-jump evolution
/// `dψ/dt = -i H_eff(t) ψ`, shared by every trajectory of an ensemble.
///
/// For durations that do not end on a drive zero (admitted only with the
/// `instantaneous_basis` flag), the final measurement projects onto the
/// eigenbasis of `H_S(τ)` and the record counts the adiabatically connected
/// level indices; the sampled work then remains on the integer lattice while
/// the instantaneous eigenenergies differ from the bare ones at `O(λ₀²)`.
pub struct TrajectoryGrid {
    steps: Vec<Mat2>,
    dt: f64,
    gamma_down: f64,
    gamma_up: f64,
    prob_ground: f64,
    /// Row vectors `⟨E₋(τ)|` and `⟨E₊(τ)|` when measuring off the bare basis.
    final_basis: Option<[[Complex64; 2]; 2]>,
}

impl TrajectoryGrid {
    pub fn new(p: &SystemParams) -> Result<Self> {
        p.validate()?;
        p.check_measurement_basis()?;
        let (gd, gu) = model::transition_rates(p);
        let dt = p.dt();
        // Upper bound on the per-step jump probability; the runtime check
        // in `evolve_trajectory` can only fire below this.
        let bound = gd.max(gu) * dt;
        if bound > 0.1 {
            return Err(Error::StepTooCoarse {
                step: 0,
                probability: bound,
            });
        }

        // H_eff(t) = H_S(t) - (i/2)(Γ↓|e⟩⟨e| + Γ↑|g⟩⟨g|); the step matrix
        // integrates dM/dt = -iH_eff M with the same fixed-step order as
        // the master-equation propagation.
        let h_eff = |t: f64| -> Mat2 {
            let l = p.lambda(t);
            Mat2([
                Complex64::new(0.0, -0.5 * gu),
                Complex64::new(l, 0.0),
                Complex64::new(l, 0.0),
                Complex64::new(p.omega0, -0.5 * gd),
            ])
        };
        let deriv = |t: f64, m: &Mat2| -> Mat2 {
            let h = h_eff(t);
            let minus_i = Complex64::new(0.0, -1.0);
            let mut out = [Complex64::ZERO; 4];
            for r in 0..2 {
                for c in 0..2 {
                    out[2 * r + c] = minus_i * (h.0[2 * r] * m.0[c] + h.0[2 * r + 1] * m.0[2 + c]);
                }
            }
            Mat2(out)
        };

        let ident = Mat2([
            Complex64::ONE,
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::ONE,
        ]);
        let mut steps = Vec::with_capacity(p.steps);
        for k in 0..p.steps {
            let t = k as f64 * dt;
            let k1 = deriv(t, &ident);
            let k2 = deriv(t + 0.5 * dt, &add_scaled(&ident, &k1, 0.5 * dt));
            let k3 = deriv(t + 0.5 * dt, &add_scaled(&ident, &k2, 0.5 * dt));
            let k4 = deriv(t + dt, &add_scaled(&ident, &k3, dt));
            let mut m = ident;
            for i in 0..4 {
                m.0[i] += (k1.0[i] + (k2.0[i] + k3.0[i]) * 2.0 + k4.0[i]) * (dt / 6.0);
            }
            steps.push(m);
        }

        let final_basis = if p.measurement_aligned() {
            None
        } else {
            let h = model::system_hamiltonian(p, p.tau());
            let (_, vecs) = crate::linalg::hermitian_eigensystem(&h)?;
            Some([
                [vecs[(0, 0)].conj(), vecs[(1, 0)].conj()],
                [vecs[(0, 1)].conj(), vecs[(1, 1)].conj()],
            ])
        };

        let (pg, _) = model::thermal_populations(p);
        Ok(TrajectoryGrid {
            steps,
            dt,
            gamma_down: gd,
            gamma_up: gu,
            prob_ground: pg,
            final_basis,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }
}

/// Run one trajectory on a prepared grid.
pub fn evolve_trajectory(grid: &TrajectoryGrid, rng: &mut impl Rng) -> Result<WorkRecord> {
    let initial = if rng.random::<f64>() < grid.prob_ground {
        Level::Ground
    } else {
        Level::Excited
    };
    let mut psi: [Complex64; 2] = match initial {
        Level::Ground => [Complex64::ONE, Complex64::ZERO],
        Level::Excited => [Complex64::ZERO, Complex64::ONE],
    };
    let mut jumps = Vec::new();

    for (k, step) in grid.steps.iter().enumerate() {
        let pop_e = psi[1].norm_sqr();
        let pop_g = psi[0].norm_sqr();
        let p_down = grid.gamma_down * pop_e * grid.dt;
        let p_up = grid.gamma_up * pop_g * grid.dt;
        let total = p_down + p_up;
        if total > 0.1 {
            return Err(Error::StepTooCoarse {
                step: k,
                probability: total,
            });
        }
        let u: f64 = rng.random();
        if u < p_down {
            // emission: ψ ∝ a ψ
            let norm = pop_e.sqrt();
            psi = [psi[1] / norm, Complex64::ZERO];
            jumps.push(((k + 1) as f64 * grid.dt, JumpKind::Emission));
        } else if u < total {
            // absorption: ψ ∝ a† ψ
            let norm = pop_g.sqrt();
            psi = [Complex64::ZERO, psi[0] / norm];
            jumps.push(((k + 1) as f64 * grid.dt, JumpKind::Absorption));
        } else {
            psi = step.apply(psi);
            let norm = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
            psi[0] /= norm;
            psi[1] /= norm;
        }
    }

    let excited_weight = match &grid.final_basis {
        None => psi[1].norm_sqr(),
        Some(basis) => {
            let upper = basis[1][0] * psi[0] + basis[1][1] * psi[1];
            upper.norm_sqr()
        }
    };
    let final_level = if rng.random::<f64>() < excited_weight {
        Level::Excited
    } else {
        Level::Ground
    };

    let n_em = jumps
        .iter()
        .filter(|(_, k)| *k == JumpKind::Emission)
        .count() as i64;
    let n_ab = jumps.len() as i64 - n_em;
    let work_quanta = level_energy(final_level) - level_energy(initial) + n_em - n_ab;

    Ok(WorkRecord {
        initial_level: initial,
        jumps,
        final_level,
        work_quanta,
    })
}

/// Ensemble statistics of the sampled work distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkStatistics {
    pub n_traj: u64,
    /// Counts of trajectories per work value, keyed by `W/ħω₀`.
    pub histogram: BTreeMap<i64, u64>,
    /// Total jump event counts over the ensemble.
    pub n_emissions: u64,
    pub n_absorptions: u64,
    /// Trajectories that ended in the excited state.
    pub n_final_excited: u64,
}

impl WorkStatistics {
    /// Probability of measuring `W = n ħω₀`.
    pub fn probabilities(&self) -> Vec<(i64, f64)> {
        self.histogram
            .iter()
            .map(|(&k, &c)| (k, c as f64 / self.n_traj as f64))
            .collect()
    }

    /// `⟨Wⁿ⟩` in reduced units, computed exactly from the histogram.
    pub fn moment(&self, order: u32) -> f64 {
        let n = self.n_traj as f64;
        self.histogram
            .iter()
            .map(|(&k, &c)| (k as f64).powi(order as i32) * c as f64)
            .sum::<f64>()
            / n
    }

    /// Standard error of `⟨Wⁿ⟩`: sample standard deviation of `Wⁿ` over
    /// `√n_traj`. NaN when fewer than two trajectories were sampled.
    pub fn standard_error(&self, order: u32) -> f64 {
        if self.n_traj < 2 {
            return f64::NAN;
        }
        let n = self.n_traj as f64;
        let mean = self.moment(order);
        let second = self.moment(2 * order);
        let var = (second - mean * mean) * n / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }

    /// `⟨e^{-βW}⟩` and its standard error, from the histogram.
    pub fn exponential_average(&self, beta: f64) -> (f64, f64) {
        let n = self.n_traj as f64;
        let mean: f64 = self
            .histogram
            .iter()
            .map(|(&k, &c)| (-beta * k as f64).exp() * c as f64)
            .sum::<f64>()
            / n;
        let second: f64 = self
            .histogram
            .iter()
            .map(|(&k, &c)| (-2.0 * beta * k as f64).exp() * c as f64)
            .sum::<f64>()
            / n;
        let var = (second - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
        (mean, (var / n).sqrt())
    }

    /// Excited-state population at the final measurement.
    pub fn final_excited_fraction(&self) -> f64 {
        self.n_final_excited as f64 / self.n_traj as f64
    }

    fn merge(mut self, other: WorkStatistics) -> WorkStatistics {
        self.n_traj += other.n_traj;
        self.n_emissions += other.n_emissions;
        self.n_absorptions += other.n_absorptions;
        self.n_final_excited += other.n_final_excited;
        for (k, c) in other.histogram {
            *self.histogram.entry(k).or_insert(0) += c;
        }
        self
    }

    fn empty() -> WorkStatistics {
        WorkStatistics {
            n_traj: 0,
            histogram: BTreeMap::new(),
            n_emissions: 0,
            n_absorptions: 0,
            n_final_excited: 0,
        }
    }

    fn push(&mut self, record: &WorkRecord) {
        self.n_traj += 1;
        self.n_emissions += record.emissions() as u64;
        self.n_absorptions += record.absorptions() as u64;
        if record.final_level == Level::Excited {
            self.n_final_excited += 1;
        }
        *self.histogram.entry(record.work_quanta).or_insert(0) += 1;
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic per-trajectory generator, independent of execution order.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(master_seed ^ splitmix64(index.wrapping_add(1))))
}

struct EnsembleAcc {
    stats: WorkStatistics,
    error: Option<Error>,
}

fn run_indices(
    grid: &TrajectoryGrid,
    n_traj: u64,
    master_seed: u64,
    sequential: bool,
) -> Result<WorkStatistics> {
    let fold_one = |mut acc: EnsembleAcc, i: usize| -> EnsembleAcc {
        if acc.error.is_some() {
            return acc;
        }
        let mut rng = trajectory_rng(master_seed, i as u64);
        match evolve_trajectory(grid, &mut rng) {
            Ok(record) => acc.stats.push(&record),
            Err(e) => acc.error = Some(e),
        }
        acc
    };
    let identity = || EnsembleAcc {
        stats: WorkStatistics::empty(),
        error: None,
    };
    let merge = |a: EnsembleAcc, b: EnsembleAcc| match (a.error, b.error) {
        (Some(e), _) | (None, Some(e)) => EnsembleAcc {
            stats: WorkStatistics::empty(),
            error: Some(e),
        },
        (None, None) => EnsembleAcc {
            stats: a.stats.merge(b.stats),
            error: None,
        },
    };

    let acc = if sequential {
        (0..n_traj as usize).fold(identity(), fold_one)
    } else {
        parallel::fold_indexed(n_traj as usize, identity, fold_one, merge)
    };

    match acc.error {
        Some(e) => Err(e),
        None => Ok(acc.stats),
    }
}

/// Sample `n_traj` independent trajectories.
///
/// Per-trajectory generators derive deterministically from
/// `(master_seed, index)` and the reduction merges integer counts only, so
/// the result is identical for any parallelism degree.
pub fn run_ensemble(p: &SystemParams, n_traj: u64, master_seed: u64) -> Result<WorkStatistics> {
    assert!(n_traj >= 1);
    let grid = TrajectoryGrid::new(p)?;
    run_indices(&grid, n_traj, master_seed, false)
}

/// Single-threaded reference path of [`run_ensemble`]; used by the
/// determinism tests and the benchmark suite.
pub fn run_ensemble_seq(p: &SystemParams, n_traj: u64, master_seed: u64) -> Result<WorkStatistics> {
    assert!(n_traj >= 1);
    let grid = TrajectoryGrid::new(p)?;
    run_indices(&grid, n_traj, master_seed, true)
}

/// Sample an ensemble keeping every record, for raw dumps and
/// per-trajectory analysis. Records are ordered by trajectory index.
pub fn run_ensemble_records(
    p: &SystemParams,
    n_traj: u64,
    master_seed: u64,
) -> Result<Vec<WorkRecord>> {
    let grid = TrajectoryGrid::new(p)?;
    let results = parallel::map_indexed(n_traj as usize, |i| {
        let mut rng = trajectory_rng(master_seed, i as u64);
        evolve_trajectory(&grid, &mut rng)
    });
    results.into_iter().collect()
}

/// Statistics computed from explicit records; matches the streamed
/// accumulation exactly.
pub fn statistics_from_records(records: &[WorkRecord]) -> WorkStatistics {
    let mut stats = WorkStatistics::empty();
    for r in records {
        stats.push(r);
    }
    stats
}
