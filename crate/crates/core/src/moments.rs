//! Assembly of the first three work moments from the master-equation
//! engine, the third-moment correction terms, the rotating-frame analytic
//! track, and the fluctuation-dissipation analysis.

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::lindblad::{self, Coevolution, TrackOps};
use crate::model::{self, SystemParams};
use crate::parallel;

/// Which route produced a set of moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Master-equation correlation functions with the exact drive.
    FullNumeric,
    /// Regression theorem in the rotating frame with the averaged drive.
    RwaRegression,
    /// Quantum-jump trajectory ensemble.
    Mcwf,
    /// Brute-force two-point measurement on a small total system.
    Oracle,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::FullNumeric => "full_numeric",
            Method::RwaRegression => "rwa_regression",
            Method::Mcwf => "mcwf",
            Method::Oracle => "oracle",
        }
    }
}

/// First three moments of work in reduced units `⟨Wⁿ⟩/(ħω₀)ⁿ`, together
/// with the third-moment correction bookkeeping.
#[derive(Debug, Clone)]
pub struct MomentsReport {
    pub method: Method,
    pub w1: f64,
    pub w2: f64,
    /// Third moment of the commuting-generator approximation.
    pub w3_0: f64,
    /// Single-time double-commutator correction `(1/4)∫⟨[H,[H,P]]⟩`.
    pub corr_c3_system: f64,
    /// Two-time cross correction `(3/2)∫∫Re⟨P(t₁)[H,P](t₂)⟩`.
    pub corr_cross: f64,
    /// Bath-assisted correction estimated from the reduced dynamics.
    pub corr_sb: f64,
    /// Corrected third moment; always `w3_0 + corr_c3_system + corr_cross + corr_sb`.
    pub w3: f64,
    /// Standard errors of `w1..w3` for sampled methods.
    pub stderr: Option<[f64; 3]>,
}

impl MomentsReport {
    fn assemble(
        method: Method,
        w1: f64,
        w2: f64,
        w3_0: f64,
        corr_c3_system: f64,
        corr_cross: f64,
        corr_sb: f64,
    ) -> Self {
        MomentsReport {
            method,
            w1,
            w2,
            w3_0,
            corr_c3_system,
            corr_cross,
            corr_sb,
            w3: w3_0 + corr_c3_system + corr_cross + corr_sb,
            stderr: None,
        }
    }
}

/// Rotating-frame track with the additional rotating wave approximation:
/// constant effective drive and power operators.
pub(crate) struct RwaTrack {
    h: ComplexMatrix,
    p: ComplexMatrix,
    c2: ComplexMatrix,
    c3: ComplexMatrix,
    rates: (f64, f64),
}

impl RwaTrack {
    pub(crate) fn new(params: &SystemParams) -> Result<Self> {
        if (params.drive_omega - params.omega0).abs() > 1e-12 * params.omega0 {
            return Err(Error::NonResonantDrive {
                drive_omega: params.drive_omega,
            });
        }
        let l0 = params.lambda0;
        let w = params.omega0;
        let mut h = ComplexMatrix::zeros(2);
        h[(0, 1)] = num_complex::Complex64::new(0.0, -l0 / 2.0);
        h[(1, 0)] = num_complex::Complex64::new(0.0, l0 / 2.0);
        let p = ComplexMatrix::two_by_two(0.0, l0 * w / 2.0, l0 * w / 2.0, 0.0);
        let c2 = ComplexMatrix::two_by_two(0.0, -l0 * w * w / 2.0, l0 * w * w / 2.0, 0.0);
        let c3 = ComplexMatrix::two_by_two(0.0, l0 * w * w * w / 2.0, l0 * w * w * w / 2.0, 0.0);
        Ok(RwaTrack {
            h,
            p,
            c2,
            c3,
            rates: model::transition_rates(params),
        })
    }
}

impl TrackOps for RwaTrack {
    fn hamiltonian(&self, _t: f64) -> ComplexMatrix {
        self.h.clone()
    }
    fn power(&self, _t: f64) -> ComplexMatrix {
        self.p.clone()
    }
    fn c2(&self, _t: f64) -> ComplexMatrix {
        self.c2.clone()
    }
    fn c3(&self, _t: f64) -> ComplexMatrix {
        self.c3.clone()
    }
    fn rates(&self) -> (f64, f64) {
        self.rates
    }
}

fn trapezoid(dt: f64, samples: &[f64]) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let interior: f64 = samples[1..samples.len() - 1].iter().sum();
    dt * (0.5 * samples[0] + interior + 0.5 * samples[samples.len() - 1])
}

/// `(1/4) ∫ Tr{[H(t),[H(t),P(t)]] ρ(t)} dt` on the sampled trajectory.
fn double_commutator_correction<T: TrackOps>(ops: &T, co: &Coevolution, dt: f64) -> f64 {
    let samples: Vec<f64> = co
        .times
        .iter()
        .zip(co.rho.iter())
        .map(|(&t, rho)| {
            let c3 = ops.c3(t);
            (c3[(0, 0)] * rho[(0, 0)]
                + c3[(0, 1)] * rho[(1, 0)]
                + c3[(1, 0)] * rho[(0, 1)]
                + c3[(1, 1)] * rho[(1, 1)])
                .re
        })
        .collect();
    0.25 * trapezoid(dt, &samples)
}

/// Bath-assisted third-moment correction from the reduced trajectory:
/// `(ħ²ω₀/2)(Γ↑+Γ↓) ∫ λ̇(t) Im ρ_eg(t) dt`.
pub fn third_moment_bath_correction(p: &SystemParams, times: &[f64], rho: &[ComplexMatrix]) -> f64 {
    assert_eq!(times.len(), rho.len());
    if times.len() < 2 {
        return 0.0;
    }
    let (gd, gu) = model::transition_rates(p);
    let dt = times[1] - times[0];
    let samples: Vec<f64> = times
        .iter()
        .zip(rho.iter())
        .map(|(&t, r)| p.lambda_dot(t) * r[(1, 0)].im)
        .collect();
    0.5 * p.omega0 * (gd + gu) * trapezoid(dt, &samples)
}

/// Resonant rotating-frame form of the bath-assisted correction:
/// `(λ₀ ħ²ω₀²/4)(Γ↑+Γ↓) ∫ Im ρ^I_eg(t) dt`.
///
/// Only defined for a resonant drive; `rho_i` is the trajectory in the
/// rotating frame.
pub fn third_moment_bath_correction_rwa(
    p: &SystemParams,
    times: &[f64],
    rho_i: &[ComplexMatrix],
) -> Result<f64> {
    if (p.drive_omega - p.omega0).abs() > 1e-12 * p.omega0 {
        return Err(Error::NonResonantDrive {
            drive_omega: p.drive_omega,
        });
    }
    assert_eq!(times.len(), rho_i.len());
    if times.len() < 2 {
        return Ok(0.0);
    }
    let (gd, gu) = model::transition_rates(p);
    let dt = times[1] - times[0];
    let samples: Vec<f64> = rho_i.iter().map(|r| r[(1, 0)].im).collect();
    Ok(0.25 * p.lambda0 * p.omega0 * p.omega0 * (gd + gu) * trapezoid(dt, &samples))
}

/// Full-numeric moments together with the underlying co-evolution pass.
pub fn moments_full_detailed(p: &SystemParams) -> Result<(MomentsReport, Coevolution)> {
    let track = lindblad::FullTrack::new(p);
    let co = lindblad::coevolve_with(&track, &model::thermal_state(p), p.tau(), p.steps)?;
    let corr_c3 = double_commutator_correction(&track, &co, p.dt());
    let corr_sb = third_moment_bath_correction(p, &co.times, &co.rho);
    let report = MomentsReport::assemble(
        Method::FullNumeric,
        co.w1,
        co.w2,
        co.w3_0,
        corr_c3,
        co.w3_cross,
        corr_sb,
    );
    Ok((report, co))
}

/// First three moments from the master-equation correlation functions.
pub fn moments_full(p: &SystemParams) -> Result<MomentsReport> {
    moments_full_detailed(p).map(|(report, _)| report)
}

/// Rotating-frame moments together with the underlying pass. The state
/// trajectory of the returned co-evolution lives in the rotating frame.
pub fn moments_rwa_detailed(p: &SystemParams) -> Result<(MomentsReport, Coevolution)> {
    moments_rwa_from(p, &model::thermal_state(p))
}

/// Rotating-frame moments for an arbitrary initial state.
pub(crate) fn moments_rwa_from(
    p: &SystemParams,
    rho0: &ComplexMatrix,
) -> Result<(MomentsReport, Coevolution)> {
    let track = RwaTrack::new(p)?;
    let co = lindblad::coevolve_with(&track, rho0, p.tau(), p.steps)?;
    let corr_c3 = double_commutator_correction(&track, &co, p.dt());
    let corr_sb = third_moment_bath_correction_rwa(p, &co.times, &co.rho)?;
    let report = MomentsReport::assemble(
        Method::RwaRegression,
        co.w1,
        co.w2,
        co.w3_0,
        corr_c3,
        co.w3_cross,
        corr_sb,
    );
    Ok((report, co))
}

/// First three moments in the rotating frame with the averaged drive.
pub fn moments_rwa(p: &SystemParams) -> Result<MomentsReport> {
    moments_rwa_detailed(p).map(|(report, _)| report)
}

/// Smallest first moment that still admits a meaningful ratio.
const RATIO_FLOOR: f64 = 1e-12;

/// Fluctuation-dissipation ratio `⟨W²⟩_RWA / ⟨W⟩_RWA` in units of `ħω₀`.
pub fn fdt_ratio(p: &SystemParams) -> Result<f64> {
    let (report, _) = moments_rwa_detailed(p)?;
    if report.w1.abs() <= RATIO_FLOOR {
        return Err(Error::UndefinedRatio { w1: report.w1 });
    }
    Ok(report.w2 / report.w1)
}

/// Taylor expansion of the fluctuation-dissipation ratio around zero drive
/// and zero coupling, in units of `ħω₀`:
///
/// `coth(βħω₀/2) + Γ↓ (λ₀²τ³/60)(1 - e^{-βħω₀})(1 - Γ↓(τ/6)(1 + e^{-βħω₀}))`
pub fn fdt_taylor(p: &SystemParams) -> f64 {
    let beta = p.beta * p.omega0;
    let coth = 1.0 / (beta / 2.0).tanh();
    let tau = p.tau();
    let e = (-beta).exp();
    coth + p.gamma_down
        * (p.lambda0 * p.lambda0 * tau.powi(3) / 60.0)
        * (1.0 - e)
        * (1.0 - p.gamma_down * (tau / 6.0) * (1.0 + e))
}

/// One grid point of the fluctuation-dissipation scan.
#[derive(Debug, Clone, Copy)]
pub struct FdtPoint {
    pub lambda0: f64,
    pub gamma_down: f64,
    /// Numeric ratio; `None` where the first moment vanishes.
    pub ratio: Option<f64>,
    pub taylor: f64,
}

/// Evaluate the fluctuation-dissipation ratio over a `(λ₀, Γ↓)` grid.
///
/// Points run row-major over `gammas × lambdas` and are computed
/// concurrently with a deterministic output ordering.
pub fn fdt_scan(base: &SystemParams, lambdas: &[f64], gammas: &[f64]) -> Vec<FdtPoint> {
    let total = lambdas.len() * gammas.len();
    parallel::map_indexed(total, |idx| {
        let gamma_down = gammas[idx / lambdas.len()];
        let lambda0 = lambdas[idx % lambdas.len()];
        let p = SystemParams {
            lambda0,
            gamma_down,
            ..base.clone()
        };
        let ratio = fdt_ratio(&p).ok();
        FdtPoint {
            lambda0,
            gamma_down,
            ratio,
            taylor: fdt_taylor(&p),
        }
    })
}
