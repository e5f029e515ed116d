//! Physical configuration and operator builders for the driven two-level
//! system.
//!
//! Internally `ħ = 1` and `ω₀ = 1`: energies are in units of `ħω₀`, rates in
//! units of `ω₀`, times in units of `1/ω₀`. Basis convention throughout the
//! crate: index 0 is the ground state `|g⟩`, index 1 the excited state `|e⟩`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Physical configuration of the driven, damped two-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Level splitting, the energy unit. Kept at 1.0 in reduced units.
    pub omega0: f64,
    /// Inverse temperature as the dimensionless product `β ħ ω₀`.
    pub beta: f64,
    /// Photon emission rate `Γ↓` in units of `ω₀`.
    pub gamma_down: f64,
    /// Drive amplitude `λ₀` in units of `ħω₀`.
    pub lambda0: f64,
    /// Drive angular frequency in units of `ω₀`.
    pub drive_omega: f64,
    /// Duration of the protocol in drive periods; integer or half-integer
    /// values end the protocol at a vanishing drive.
    pub cycles: f64,
    /// Number of fixed time steps over the protocol.
    pub steps: usize,
    /// Permit durations that do not align with the drive zeroes; the final
    /// measurement then uses the instantaneous eigenbasis of `H_S(τ)`.
    pub instantaneous_basis: bool,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            omega0: 1.0,
            beta: 2.0,
            gamma_down: 0.01,
            lambda0: 0.05,
            drive_omega: 1.0,
            cycles: 10.0,
            steps: 10_000,
            instantaneous_basis: false,
        }
    }
}

impl SystemParams {
    /// Validated constructor; the CLI goes through this path.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        omega0: f64,
        beta: f64,
        gamma_down: f64,
        lambda0: f64,
        drive_omega: f64,
        cycles: f64,
        steps: usize,
    ) -> Result<Self> {
        let p = SystemParams {
            omega0,
            beta,
            gamma_down,
            lambda0,
            drive_omega,
            cycles,
            steps,
            instantaneous_basis: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0) || !self.omega0.is_finite() {
            return Err(Error::invalid("omega0", "must be positive and finite"));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::invalid("beta", "must be positive and finite"));
        }
        if self.gamma_down < 0.0 || !self.gamma_down.is_finite() {
            return Err(Error::invalid("gamma_down", "must be nonnegative"));
        }
        if self.lambda0 < 0.0 || !self.lambda0.is_finite() {
            return Err(Error::invalid("lambda0", "must be nonnegative"));
        }
        if !(self.drive_omega > 0.0) || !self.drive_omega.is_finite() {
            return Err(Error::invalid("drive_omega", "must be positive"));
        }
        if !(self.cycles > 0.0) || !self.cycles.is_finite() {
            return Err(Error::invalid("cycles", "must be positive"));
        }
        if self.steps < 2 {
            return Err(Error::invalid("steps", "must be at least 2"));
        }
        Ok(())
    }

    /// Protocol duration `τ = cycles · 2π / ω`.
    pub fn tau(&self) -> f64 {
        self.cycles * 2.0 * PI / self.drive_omega
    }

    /// Grid spacing `τ / steps`.
    pub fn dt(&self) -> f64 {
        self.tau() / self.steps as f64
    }

    pub fn drive(&self) -> Drive {
        Drive {
            amplitude: self.lambda0,
            omega: self.drive_omega,
        }
    }

    /// True when the duration ends on an integer or half-integer cycle, so
    /// the drive vanishes at both measurement times.
    pub fn measurement_aligned(&self) -> bool {
        let half_cycles = 2.0 * self.cycles;
        (half_cycles - half_cycles.round()).abs() <= 1e-9
    }

    /// Fails unless the protocol ends where the drive vanishes or the caller
    /// opted into instantaneous-basis measurement.
    pub fn check_measurement_basis(&self) -> Result<()> {
        if self.measurement_aligned() || self.instantaneous_basis {
            Ok(())
        } else {
            Err(Error::MisalignedMeasurement {
                cycles: self.cycles,
            })
        }
    }

    pub fn lambda(&self, t: f64) -> f64 {
        self.drive().lambda(t)
    }

    pub fn lambda_dot(&self, t: f64) -> f64 {
        self.drive().lambda_dot(t)
    }
}

/// Sinusoidal drive protocol `λ(t) = λ₀ sin(ωt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    pub amplitude: f64,
    pub omega: f64,
}

impl Drive {
    pub fn lambda(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t).sin()
    }

    pub fn lambda_dot(&self, t: f64) -> f64 {
        self.amplitude * self.omega * (self.omega * t).cos()
    }
}

/// Two-level lowering and raising operators: `a = |g⟩⟨e|`, `a† = |e⟩⟨g|`.
pub fn ladder_operators() -> (ComplexMatrix, ComplexMatrix) {
    let a = ComplexMatrix::two_by_two(0.0, 1.0, 0.0, 0.0);
    let a_dag = a.adjoint();
    (a, a_dag)
}

/// Bare Hamiltonian `H₀ = ħω₀ a†a = diag(0, ω₀)`.
pub fn bare_hamiltonian(p: &SystemParams) -> ComplexMatrix {
    ComplexMatrix::two_by_two(0.0, 0.0, 0.0, p.omega0)
}

/// Full system Hamiltonian `H_S(t) = H₀ + λ(t)(a + a†)`.
pub fn system_hamiltonian(p: &SystemParams, t: f64) -> ComplexMatrix {
    let l = p.lambda(t);
    ComplexMatrix::two_by_two(0.0, l, l, p.omega0)
}

/// Power operator `P(t) = ∂_t H_S(t) = λ̇(t)(a + a†)`.
pub fn power_operator(p: &SystemParams, t: f64) -> ComplexMatrix {
    let ld = p.lambda_dot(t);
    ComplexMatrix::two_by_two(0.0, ld, ld, 0.0)
}

/// Emission and absorption rates `(Γ↓, Γ↑)` with `Γ↑ = Γ↓ e^{-βħω₀}`.
pub fn transition_rates(p: &SystemParams) -> (f64, f64) {
    let gamma_down = p.gamma_down;
    let gamma_up = gamma_down * (-p.beta * p.omega0).exp();
    (gamma_down, gamma_up)
}

/// Gibbs state of the bare Hamiltonian: `diag(p_g, p_e)` with
/// `p_g = 1/(1 + e^{-βħω₀})`.
pub fn thermal_state(p: &SystemParams) -> ComplexMatrix {
    let (pg, pe) = thermal_populations(p);
    ComplexMatrix::two_by_two(pg, 0.0, 0.0, pe)
}

/// Ground and excited occupation probabilities of the thermal state.
pub fn thermal_populations(p: &SystemParams) -> (f64, f64) {
    let w = (-p.beta * p.omega0).exp();
    let pg = 1.0 / (1.0 + w);
    (pg, 1.0 - pg)
}

/// Transition probability `p_ge = |⟨e|U(τ,0)|g⟩|²` of the undamped system,
/// from a direct Runge-Kutta integration of the Schrödinger equation.
///
/// Serves as an independent reference for the closed-system checks; it does
/// not share any code with the master-equation or trajectory paths beyond
/// the Hamiltonian builder.
pub fn closed_system_flip_probability(p: &SystemParams, steps: usize) -> f64 {
    let tau = p.tau();
    let dt = tau / steps as f64;
    let mut psi = [Complex64::ONE, Complex64::ZERO]; // |g>

    let deriv = |t: f64, s: &[Complex64; 2]| -> [Complex64; 2] {
        let h = system_hamiltonian(p, t);
        let minus_i = Complex64::new(0.0, -1.0);
        [
            minus_i * (h[(0, 0)] * s[0] + h[(0, 1)] * s[1]),
            minus_i * (h[(1, 0)] * s[0] + h[(1, 1)] * s[1]),
        ]
    };

    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = deriv(t, &psi);
        let s2 = [psi[0] + k1[0] * (dt / 2.0), psi[1] + k1[1] * (dt / 2.0)];
        let k2 = deriv(t + dt / 2.0, &s2);
        let s3 = [psi[0] + k2[0] * (dt / 2.0), psi[1] + k2[1] * (dt / 2.0)];
        let k3 = deriv(t + dt / 2.0, &s3);
        let s4 = [psi[0] + k3[0] * dt, psi[1] + k3[1] * dt];
        let k4 = deriv(t + dt, &s4);
        for i in 0..2 {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }
        let norm = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
        psi[0] /= norm;
        psi[1] /= norm;
    }
    psi[1].norm_sqr()
}
