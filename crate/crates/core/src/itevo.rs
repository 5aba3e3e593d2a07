//! Imaginary-time projection of a trial state and the overlap machinery.
//!
//! Two energy estimators are tracked along `|phi(tau)> ~ exp(-tau H)|psi_v>`:
//!
//! - mixed: `<psi_v|H|phi(tau)> / <psi_v|phi(tau)>`
//! - symmetric: `<phi(tau)|H|phi(tau)>` with `phi` normalized
//!
//! The area between the mixed curve and `E_0` is `kappa = -ln |<psi_v|psi_0>|^2`
//! exactly, and its initial slope is `-sigma^2`. The symmetric curve equals the
//! mixed one at twice the imaginary time, so its area is `kappa / 2` and its
//! slope `-2 sigma^2`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{apply_sum, PauliSum, StateVector};

pub const DEFAULT_DTAU: f64 = 0.01;
pub const DEFAULT_TAU_MAX: f64 = 50.0;
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-7;

/// `|<psi_v|phi>|` below this aborts the mixed estimator.
const MIN_TRIAL_OVERLAP: f64 = 1e-14;

/// Largest `dt * (spectral spread)` taken in a single RK4 stage.
const RK4_STABLE_STEP: f64 = 2.0;

/// Fraction of the curve used for the exponential tail fit.
const TAIL_FRACTION: f64 = 0.1;

/// Relative tolerance of the slope diagnostic.
const SLOPE_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItSample {
    pub tau: f64,
    pub e_mixed: f64,
    pub e_symmetric: f64,
}

/// Sampled energy curve `E(tau)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ItCurve {
    pub samples: Vec<ItSample>,
    pub tau_step: f64,
    /// RK4 sub-steps taken per stored sample.
    pub substeps: usize,
}

impl ItCurve {
    /// CSV with header `tau,E_mixed,E_symmetric`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,E_mixed,E_symmetric\n");
        for s in &self.samples {
            let _ = writeln!(out, "{:.6},{:.15e},{:.15e}", s.tau, s.e_mixed, s.e_symmetric);
        }
        out
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Evolves `psi_v` in imaginary time up to `tau_max`, storing both
/// estimators every `dtau`.
///
/// Each step integrates `d phi / d tau = -(H - E_ref) phi` with classical
/// RK4, `E_ref` frozen at the step's symmetric energy, then renormalizes.
pub fn propagate(h: &PauliSum, psi_v: &StateVector, tau_max: f64, dtau: f64) -> Result<ItCurve> {
    if !(dtau > 0.0) || !(tau_max >= dtau) {
        return Err(Error::InvalidInput(format!("need dtau > 0 and tau_max >= dtau (got {dtau}, {tau_max})")));
    }
    if h.n_qubits() != psi_v.n_qubits() {
        return Err(Error::QubitMismatch { expected: psi_v.n_qubits(), found: h.n_qubits() });
    }
    if (psi_v.norm_sqr() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput("trial state must be normalized".into()));
    }
    let n_steps = (tau_max / dtau).round() as usize;
    let spread = 2.0 * h.one_norm();
    let substeps = ((dtau * spread / RK4_STABLE_STEP).ceil() as usize).max(1);
    let dt = dtau / substeps as f64;
    let n = h.n_qubits();
    let trial = psi_v.amplitudes();

    let mut phi = psi_v.clone();
    let mut samples = Vec::with_capacity(n_steps + 1);
    for step in 0..=n_steps {
        let tau = step as f64 * dtau;
        let hphi = apply_sum(h, &phi)?;
        let e_sym = dot(phi.amplitudes(), hphi.amplitudes()).re;
        let ov = dot(trial, phi.amplitudes());
        if ov.norm() < MIN_TRIAL_OVERLAP {
            return Err(Error::OrthogonalTrial { tau });
        }
        let e_mixed = (dot(trial, hphi.amplitudes()) / ov).re;
        samples.push(ItSample { tau, e_mixed, e_symmetric: e_sym });
        if step == n_steps {
            break;
        }
        let mut hphi = Some(hphi);
        for _ in 0..substeps {
            phi = rk4_step(h, &phi, hphi.take(), dt, n)?;
        }
    }
    Ok(ItCurve { samples, tau_step: dtau, substeps })
}

fn rk4_step(h: &PauliSum, phi: &StateVector, hphi: Option<StateVector>, dt: f64, n: usize) -> Result<StateVector> {
    let hphi = match hphi {
        Some(v) => v,
        None => apply_sum(h, phi)?,
    };
    let e_ref = dot(phi.amplitudes(), hphi.amplitudes()).re;
    let x = phi.amplitudes();
    // k = -(H - E_ref) v
    let deriv = |v: &[Complex64], hv: &[Complex64]| -> Vec<Complex64> {
        v.iter().zip(hv).map(|(a, b)| a * e_ref - b).collect()
    };
    let shifted = |k: &[Complex64], f: f64| -> Result<StateVector> {
        StateVector::from_raw(n, x.iter().zip(k).map(|(a, b)| a + b * f).collect())
    };
    let k1 = deriv(x, hphi.amplitudes());
    let s2 = shifted(&k1, 0.5 * dt)?;
    let k2 = deriv(s2.amplitudes(), apply_sum(h, &s2)?.amplitudes());
    let s3 = shifted(&k2, 0.5 * dt)?;
    let k3 = deriv(s3.amplitudes(), apply_sum(h, &s3)?.amplitudes());
    let s4 = shifted(&k3, dt)?;
    let k4 = deriv(s4.amplitudes(), apply_sum(h, &s4)?.amplitudes());
    let next: Vec<Complex64> =
        (0..x.len()).map(|i| x[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0)).collect();
    StateVector::from_amplitudes(n, next)
}

/// Area under `E_mixed(tau) - E_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaResult {
    pub kappa: f64,
    /// Exponential tail beyond the last sample.
    pub tail_correction: f64,
    /// Fitted decay rate of the tail, when a fit was possible.
    pub decay_rate: Option<f64>,
    pub tail_converged: bool,
}

/// Trapezoid quadrature of `E_mixed - e0` with the leading Euler-Maclaurin
/// endpoint correction, plus an exponential tail `f(tau_max) / rate`
/// fitted by log-linear regression over the last tenth of the curve.
pub fn kappa_integral(curve: &ItCurve, e0: f64, tail_threshold: f64) -> Result<KappaResult> {
    let f: Vec<f64> = curve.samples.iter().map(|s| s.e_mixed - e0).collect();
    if f.len() < 2 {
        return Err(Error::InvalidInput("curve needs at least two samples".into()));
    }
    let h = curve.tau_step;
    let last = f.len() - 1;
    let mut area = h * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[last]));
    if f.len() >= 4 {
        let d0 = (-11.0 * f[0] + 18.0 * f[1] - 9.0 * f[2] + 2.0 * f[3]) / (6.0 * h);
        let dn = (11.0 * f[last] - 18.0 * f[last - 1] + 9.0 * f[last - 2] - 2.0 * f[last - 3]) / (6.0 * h);
        area -= h * h / 12.0 * (dn - d0);
    }

    let f_last = f[last];
    let fit = tail_fit(curve, &f);
    let (tail_correction, decay_rate, fit_ok) = match fit {
        Some(rate) if f_last > 0.0 => (f_last / rate, Some(rate), true),
        Some(rate) => (0.0, Some(rate), true),
        None => (0.0, None, false),
    };
    let tail_converged = f_last.abs() < tail_threshold || fit_ok;
    Ok(KappaResult { kappa: area + tail_correction, tail_correction, decay_rate, tail_converged })
}

/// Decay rate from `ln f = c - rate * tau` over the tail; `None` when the
/// tail is non-positive, at the rounding floor, or not exponential.
fn tail_fit(curve: &ItCurve, f: &[f64]) -> Option<f64> {
    let start = ((1.0 - TAIL_FRACTION) * f.len() as f64).floor() as usize;
    let tail: Vec<(f64, f64)> = curve.samples[start..].iter().zip(&f[start..]).map(|(s, &v)| (s.tau, v)).collect();
    if tail.len() < 3 || tail.iter().any(|&(_, v)| !(v > 1e-13)) {
        return None;
    }
    let pts: Vec<(f64, f64)> = tail.iter().map(|&(t, v)| (t, v.ln())).collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 0.0 };
    (slope < 0.0 && r2 > 0.99).then_some(-slope)
}

/// `(E_V - E_0)^2 / (2 sigma^2)`.
///
/// Zero variance returns `0` when `e_v` equals `e0` (within 1e-9) and
/// `+inf` otherwise.
pub fn overlap_index(e_v: f64, variance: f64, e0: f64) -> Result<f64> {
    let gap = e_v - e0;
    if gap < -1e-9 {
        return Err(Error::InvalidInput(format!("variational energy {e_v} lies below the ground-state energy {e0}")));
    }
    if variance < 0.0 {
        return Err(Error::InvalidInput(format!("negative variance {variance}")));
    }
    if variance == 0.0 {
        return Ok(if gap.abs() <= 1e-9 { 0.0 } else { f64::INFINITY });
    }
    Ok(gap * gap / (2.0 * variance))
}

/// `exp(-I_Omega)`.
pub fn predicted_overlap(i_omega: f64) -> f64 {
    (-i_omega).exp()
}

/// Measured initial slopes of both estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeDiagnostic {
    pub mixed_slope: f64,
    pub symmetric_slope: f64,
    /// `mixed_slope` within 2% of `-variance`.
    pub mixed_ok: bool,
    /// `symmetric_slope` within 2% of `-2 variance`.
    pub symmetric_ok: bool,
}

/// One-sided finite-difference slopes at `tau = 0`.
pub fn slope_check(curve: &ItCurve, variance: f64) -> Result<SlopeDiagnostic> {
    let s = &curve.samples;
    if s.len() < 3 {
        return Err(Error::InvalidInput("slope check needs at least three samples".into()));
    }
    let h = curve.tau_step;
    let slope = |f: &dyn Fn(&ItSample) -> f64| -> f64 {
        if s.len() >= 4 {
            (-11.0 * f(&s[0]) + 18.0 * f(&s[1]) - 9.0 * f(&s[2]) + 2.0 * f(&s[3])) / (6.0 * h)
        } else {
            (-3.0 * f(&s[0]) + 4.0 * f(&s[1]) - f(&s[2])) / (2.0 * h)
        }
    };
    let mixed_slope = slope(&|x| x.e_mixed);
    let symmetric_slope = slope(&|x| x.e_symmetric);
    let close = |measured: f64, expected: f64| {
        if expected == 0.0 {
            measured.abs() < 1e-8
        } else {
            (measured - expected).abs() <= SLOPE_TOLERANCE * expected.abs()
        }
    };
    Ok(SlopeDiagnostic {
        mixed_slope,
        symmetric_slope,
        mixed_ok: close(mixed_slope, -variance),
        symmetric_ok: close(symmetric_slope, -2.0 * variance),
    })
}

/// Overlap estimates for one trial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub kappa: f64,
    pub omega_from_kappa: f64,
    pub overlap_index: f64,
    pub omega_from_index: f64,
    pub omega_exact: Option<f64>,
    pub tail_correction: f64,
    pub tail_converged: bool,
    /// Area under the symmetric curve; half of `kappa` in exact arithmetic.
    pub kappa_symmetric: f64,
    pub slopes: SlopeDiagnostic,
}

/// Combines the curve with `(E_V, sigma^2, E_0)` and an optional exact overlap.
pub fn overlap_report(
    curve: &ItCurve,
    e0: f64,
    variance: f64,
    omega_exact: Option<f64>,
    tail_threshold: f64,
) -> Result<OverlapReport> {
    let k = kappa_integral(curve, e0, tail_threshold)?;
    let e_v = curve.samples[0].e_mixed;
    let idx = overlap_index(e_v, variance, e0)?;
    let symmetric = ItCurve {
        samples: curve
            .samples
            .iter()
            .map(|s| ItSample { tau: s.tau, e_mixed: s.e_symmetric, e_symmetric: s.e_symmetric })
            .collect(),
        ..curve.clone()
    };
    let ks = kappa_integral(&symmetric, e0, tail_threshold)?;
    Ok(OverlapReport {
        kappa: k.kappa,
        omega_from_kappa: (-k.kappa).exp().clamp(0.0, 1.0),
        overlap_index: idx,
        omega_from_index: predicted_overlap(idx),
        omega_exact,
        tail_correction: k.tail_correction,
        tail_converged: k.tail_converged,
        kappa_symmetric: ks.kappa,
        slopes: slope_check(curve, variance)?,
    })
}
