//! Go/no-go criteria for VQE under noise and for QPE state preparation,
//! the scaling fits behind them, and the JSON report.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::vqe::{fidelity, noisy_energy, shots_required};

/// 1 kcal/mol rounded to 1.6 mHa.
pub const CHEMICAL_ACCURACY: f64 = 1.6e-3;
/// Minimum ground-state overlap for a positive QPE verdict.
pub const DEFAULT_QPE_THRESHOLD: f64 = 0.1;
pub const HARTREE_TO_KELVIN: f64 = 315_775.0;
pub const HARTREE_TO_KCAL_PER_MOL: f64 = 627.5;

/// Inputs of the noise bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VqeCriterionInput {
    pub eta: f64,
    pub e_noise: f64,
    pub e0: f64,
    pub n_g: f64,
}

impl VqeCriterionInput {
    pub fn new(e_noise: f64, e0: f64, n_g: f64) -> Self {
        Self { eta: CHEMICAL_ACCURACY, e_noise, e0, n_g }
    }
}

/// Largest per-gate error rate keeping the depolarizing bias below `eta`:
/// `eta / ((e_noise - e0) n_g)`.
pub fn max_tolerable_error(input: &VqeCriterionInput) -> Result<f64> {
    let VqeCriterionInput { eta, e_noise, e0, n_g } = *input;
    if !(eta > 0.0) {
        return Err(Error::InvalidInput(format!("eta must be positive, got {eta}")));
    }
    if !(n_g >= 1.0) {
        return Err(Error::InvalidInput(format!("gate count must be at least 1, got {n_g}")));
    }
    let gap = e_noise - e0;
    if !(gap > 0.0) {
        return Err(Error::Undefined(format!("noise floor {e_noise} does not lie above the ground energy {e0}")));
    }
    Ok(eta / (gap * n_g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    /// `a N + b N^2`.
    Quadratic,
    /// `C x`.
    Proportional,
    /// `c0 + c1 x + ... + cd x^d`.
    Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FitCoefficient {
    pub name: String,
    pub value: f64,
    /// Absent when there are no residual degrees of freedom.
    pub std_error: Option<f64>,
}

/// Unweighted least-squares fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScalingFit {
    pub model: FitModel,
    pub coefficients: Vec<FitCoefficient>,
    pub residual_norm: f64,
    pub samples: usize,
}

impl ScalingFit {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.coefficients.iter().find(|c| c.name == name).map(|c| c.value)
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.coefficients.iter().find(|c| c.name == name).and_then(|c| c.std_error)
    }

    /// Model value at `x`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let c: Vec<f64> = self.coefficients.iter().map(|c| c.value).collect();
        match self.model {
            FitModel::Quadratic => c[0] * x + c[1] * x * x,
            FitModel::Proportional => c[0] * x,
            FitModel::Polynomial => c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci),
        }
    }
}

/// Householder least squares with covariance `s^2 (X^T X)^-1`.
fn least_squares(x: DMatrix<f64>, y: &[f64]) -> Result<(Vec<f64>, Vec<Option<f64>>, f64)> {
    let (m, p) = x.shape();
    let yv = DVector::from_column_slice(y);
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = (0..p).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..p).any(|i| r[(i, i)].abs() <= 1e-12 * scale) || scale == 0.0 {
        return Err(Error::RankDeficient(format!("{m} samples do not determine {p} coefficients")));
    }
    let qty = qr.q().transpose() * &yv;
    let beta =
        r.solve_upper_triangular(&qty).ok_or_else(|| Error::RankDeficient("singular triangular factor".into()))?;
    let resid = &yv - &x * &beta;
    let rss = resid.norm_squared();
    let errors = if m > p {
        let s2 = rss / (m - p) as f64;
        let rinv = r
            .solve_upper_triangular(&DMatrix::identity(p, p))
            .ok_or_else(|| Error::RankDeficient("singular triangular factor".into()))?;
        let cov = &rinv * rinv.transpose();
        (0..p).map(|i| Some((s2 * cov[(i, i)]).sqrt())).collect()
    } else {
        vec![None; p]
    };
    Ok((beta.iter().copied().collect(), errors, rss.sqrt()))
}

fn check_finite(data: &[(f64, f64)]) -> Result<()> {
    match data.iter().position(|(x, y)| !x.is_finite() || !y.is_finite()) {
        Some(i) => Err(Error::InvalidInput(format!("non-finite value in sample {i}"))),
        None => Ok(()),
    }
}

fn build_fit(model: FitModel, names: &[&str], fitted: (Vec<f64>, Vec<Option<f64>>, f64), n: usize) -> ScalingFit {
    let (values, errors, residual_norm) = fitted;
    ScalingFit {
        model,
        coefficients: names
            .iter()
            .zip(values.into_iter().zip(errors))
            .map(|(name, (value, std_error))| FitCoefficient { name: (*name).into(), value, std_error })
            .collect(),
        residual_norm,
        samples: n,
    }
}

/// Fits `E = a N + b N^2` with no constant term.
pub fn noise_energy_fit(data: &[(f64, f64)]) -> Result<ScalingFit> {
    check_finite(data)?;
    if data.len() < 3 {
        return Err(Error::InvalidInput(format!("quadratic fit needs at least 3 points, got {}", data.len())));
    }
    let x = DMatrix::from_fn(data.len(), 2, |i, j| data[i].0.powi(j as i32 + 1));
    let y: Vec<f64> = data.iter().map(|d| d.1).collect();
    Ok(build_fit(FitModel::Quadratic, &["a", "b"], least_squares(x, &y)?, data.len()))
}

/// Fits `I = C x` through the origin. A single point determines `C` but
/// carries no standard error.
pub fn overlap_scaling_fit(data: &[(f64, f64)]) -> Result<ScalingFit> {
    check_finite(data)?;
    if data.is_empty() {
        return Err(Error::InvalidInput("proportional fit needs at least one point".into()));
    }
    let sxx: f64 = data.iter().map(|(x, _)| x * x).sum();
    if sxx == 0.0 {
        return Err(Error::RankDeficient("all abscissae are zero".into()));
    }
    let sxy: f64 = data.iter().map(|(x, y)| x * y).sum();
    let c = sxy / sxx;
    let rss: f64 = data.iter().map(|(x, y)| (y - c * x).powi(2)).sum();
    let std_error = (data.len() > 1).then(|| (rss / (data.len() - 1) as f64 / sxx).sqrt());
    Ok(ScalingFit {
        model: FitModel::Proportional,
        coefficients: vec![FitCoefficient { name: "C".into(), value: c, std_error }],
        residual_norm: rss.sqrt(),
        samples: data.len(),
    })
}

/// Polynomial of the given degree with intercept, coefficients `c0..cd`.
pub fn polynomial_fit(data: &[(f64, f64)], degree: usize) -> Result<ScalingFit> {
    check_finite(data)?;
    if data.len() < degree + 1 {
        return Err(Error::InvalidInput(format!(
            "degree {degree} fit needs at least {} points, got {}",
            degree + 1,
            data.len()
        )));
    }
    let x = DMatrix::from_fn(data.len(), degree + 1, |i, j| data[i].0.powi(j as i32));
    let y: Vec<f64> = data.iter().map(|d| d.1).collect();
    let names: Vec<String> = (0..=degree).map(|k| format!("c{k}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    Ok(build_fit(FitModel::Polynomial, &names, least_squares(x, &y)?, data.len()))
}

/// `|c2 x^2 / y(x)|` at the largest abscissa of a degree-2 polynomial fit.
pub fn quadratic_share(fit: &ScalingFit, data: &[(f64, f64)]) -> Result<f64> {
    let c2 = fit.value("c2").ok_or_else(|| Error::InvalidInput("fit has no quadratic coefficient".into()))?;
    let &(x, y) =
        data.iter().max_by(|a, b| a.0.total_cmp(&b.0)).ok_or_else(|| Error::InvalidInput("no data".into()))?;
    if y == 0.0 {
        return Err(Error::Undefined("largest-N value is zero".into()));
    }
    Ok((c2 * x * x / y).abs())
}

/// `Omega(N) = exp(-alpha N)`.
pub fn qpe_success_extrapolation(alpha: f64, n: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be non-negative, got {alpha}")));
    }
    Ok((-alpha * n).exp())
}

/// Smallest integer `N` with `exp(-alpha N) < threshold`; `None` when the
/// overlap never decays.
pub fn qpe_threshold_crossing(alpha: f64, threshold: f64) -> Result<Option<u64>> {
    if !(alpha >= 0.0) || !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidInput(format!("need alpha >= 0 and threshold in (0, 1], got {alpha}, {threshold}")));
    }
    if alpha == 0.0 {
        return Ok(None);
    }
    let x = -threshold.ln() / alpha;
    Ok(Some(x.floor() as u64 + 1))
}

/// Where a reported number came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Exact diagonalization or another in-process computation.
    Computed,
    /// Supplied on the command line or in an input file.
    User,
    /// `E_V` standing in for an unavailable `E_0`; low confidence.
    Variational,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MoleculeInfo {
    pub name: String,
    pub n_orb: usize,
    pub n_elec: usize,
    pub n_qubits: usize,
    pub spacing: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Energies {
    #[serde(rename = "E0")]
    pub e0: Option<f64>,
    #[serde(rename = "EV")]
    pub e_v: Option<f64>,
    #[serde(rename = "EHF")]
    pub e_hf: Option<f64>,
    #[serde(rename = "Einf")]
    pub e_inf: Option<f64>,
    #[serde(rename = "Emax")]
    pub e_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseBlock {
    pub eps: Option<f64>,
    #[serde(rename = "Ng")]
    pub n_g: Option<u64>,
    #[serde(rename = "F")]
    pub fidelity: Option<f64>,
    #[serde(rename = "deltaE")]
    pub delta_e: Option<f64>,
    #[serde(rename = "epsMax")]
    pub eps_max: Option<f64>,
    pub shots: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OverlapBlock {
    #[serde(rename = "IOmega")]
    pub i_omega: Option<f64>,
    #[serde(rename = "omegaIndex")]
    pub omega_index: Option<f64>,
    #[serde(rename = "omegaKappa")]
    pub omega_kappa: Option<f64>,
    #[serde(rename = "omegaExact")]
    pub omega_exact: Option<f64>,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// `deltaE <= eta`; absent without an error rate.
    pub vqe: Option<bool>,
    /// Best available overlap estimate `>= qpeOmega`.
    pub qpe: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Thresholds {
    pub eta: f64,
    pub qpe_omega: f64,
}

/// Aggregated criteria for one molecule, energies in hartree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub molecule: MoleculeInfo,
    pub energies: Energies,
    pub variance: Option<f64>,
    pub noise: NoiseBlock,
    pub overlap: OverlapBlock,
    pub fits: BTreeMap<String, ScalingFit>,
    pub verdict: Verdict,
    pub thresholds: Thresholds,
    pub provenance: BTreeMap<String, Provenance>,
    pub warnings: Vec<String>,
}

/// Everything `assemble_report` may use; unset fields stay absent.
#[derive(Debug, Clone)]
pub struct ReportInputs {
    pub molecule: MoleculeInfo,
    /// Energy unit of all inputs; only `"Ha"` is accepted.
    pub units: String,
    pub e_v: f64,
    pub variance: f64,
    pub e0_exact: Option<f64>,
    pub e0_user: Option<f64>,
    pub e_hf: Option<f64>,
    pub e_inf: Option<f64>,
    pub e_max: Option<f64>,
    pub eps: Option<f64>,
    pub n_g: Option<u64>,
    pub n_g_provenance: Provenance,
    pub kappa: Option<f64>,
    pub omega_exact: Option<f64>,
    pub eta: f64,
    pub qpe_threshold: f64,
    pub fits: BTreeMap<String, ScalingFit>,
    pub warnings: Vec<String>,
}

impl ReportInputs {
    pub fn new(molecule: MoleculeInfo, e_v: f64, variance: f64) -> Self {
        Self {
            molecule,
            units: "Ha".into(),
            e_v,
            variance,
            e0_exact: None,
            e0_user: None,
            e_hf: None,
            e_inf: None,
            e_max: None,
            eps: None,
            n_g: None,
            n_g_provenance: Provenance::Computed,
            kappa: None,
            omega_exact: None,
            eta: CHEMICAL_ACCURACY,
            qpe_threshold: DEFAULT_QPE_THRESHOLD,
            fits: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }
}

/// Fills every derivable field and both verdicts.
///
/// `E_0` is taken from the exact value, else the user estimate, else `E_V`
/// (flagged). The noise floor is `E_inf`. The QPE verdict uses the exact
/// overlap when known, then `exp(-kappa)`, then `exp(-I_Omega)`.
pub fn assemble_report(inputs: &ReportInputs) -> Result<CriterionReport> {
    if inputs.units != "Ha" {
        return Err(Error::InvalidInput(format!("energies must be in Ha, got {:?}", inputs.units)));
    }
    if !inputs.e_v.is_finite() || !(inputs.variance >= 0.0) {
        return Err(Error::InvalidInput("E_V must be finite and the variance non-negative".into()));
    }
    if !(inputs.eta > 0.0) || !(inputs.qpe_threshold > 0.0 && inputs.qpe_threshold <= 1.0) {
        return Err(Error::InvalidInput("eta must be positive and the QPE threshold in (0, 1]".into()));
    }
    let mut provenance = BTreeMap::new();
    let mut warnings = inputs.warnings.clone();
    provenance.insert("EV".to_string(), Provenance::Computed);
    provenance.insert("variance".to_string(), Provenance::Computed);

    let (e0, e0_src) = match (inputs.e0_exact, inputs.e0_user) {
        (Some(e), _) => (e, Provenance::Computed),
        (None, Some(e)) => (e, Provenance::User),
        (None, None) => {
            warnings.push("E0 unavailable; E_V used as a low-confidence stand-in".into());
            (inputs.e_v, Provenance::Variational)
        }
    };
    provenance.insert("E0".to_string(), e0_src);
    for (key, v) in [("EHF", inputs.e_hf), ("Einf", inputs.e_inf), ("Emax", inputs.e_max)] {
        if v.is_some() {
            provenance.insert(key.to_string(), Provenance::Computed);
        }
    }

    let mut noise =
        NoiseBlock { shots: Some(shots_required(inputs.variance.sqrt(), inputs.eta)?), ..Default::default() };
    noise.n_g = inputs.n_g;
    if inputs.n_g.is_some() {
        provenance.insert("Ng".to_string(), inputs.n_g_provenance);
    }
    let mut verdict = Verdict::default();
    if let Some(e_inf) = inputs.e_inf {
        if let Some(n_g) = inputs.n_g {
            let input = VqeCriterionInput { eta: inputs.eta, e_noise: e_inf, e0, n_g: (n_g as f64).max(1.0) };
            match max_tolerable_error(&input) {
                Ok(e) => {
                    noise.eps_max = Some(e);
                    provenance.insert("epsMax".to_string(), Provenance::Computed);
                }
                Err(err) => warnings.push(format!("epsMax: {err}")),
            }
        }
        if let (Some(eps), Some(n_g)) = (inputs.eps, inputs.n_g) {
            let f = fidelity(eps, n_g as f64)?;
            let ne = noisy_energy(inputs.e_v, e_inf, f)?;
            noise.eps = Some(eps);
            noise.fidelity = Some(f);
            noise.delta_e = Some(ne.delta_e);
            verdict.vqe = Some(ne.delta_e <= inputs.eta);
            provenance.insert("eps".to_string(), Provenance::User);
        }
    } else if inputs.eps.is_some() {
        noise.eps = inputs.eps;
        warnings.push("noise floor unavailable; deltaE not computed".into());
    }

    let mut overlap = OverlapBlock { kappa: inputs.kappa, omega_exact: inputs.omega_exact, ..Default::default() };
    match crate::itevo::overlap_index(inputs.e_v.max(e0), inputs.variance, e0) {
        Ok(i) => {
            overlap.i_omega = Some(i);
            overlap.omega_index = Some(crate::itevo::predicted_overlap(i));
        }
        Err(err) => warnings.push(format!("IOmega: {err}")),
    }
    overlap.omega_kappa = inputs.kappa.map(|k| (-k).exp().clamp(0.0, 1.0));
    let best =
        [("omegaExact", overlap.omega_exact), ("omegaKappa", overlap.omega_kappa), ("omegaIndex", overlap.omega_index)]
            .into_iter()
            .find_map(|(k, v)| v.map(|v| (k, v)));
    if let Some((_, omega)) = best {
        verdict.qpe = Some(omega >= inputs.qpe_threshold);
    }
    for (key, v) in [("omegaExact", overlap.omega_exact), ("omegaKappa", overlap.omega_kappa)] {
        if v.is_some() {
            provenance.insert(key.to_string(), Provenance::Computed);
        }
    }
    if overlap.omega_index.is_some() {
        provenance.insert("IOmega".to_string(), e0_src);
    }

    Ok(CriterionReport {
        molecule: inputs.molecule.clone(),
        energies: Energies {
            e0: Some(e0),
            e_v: Some(inputs.e_v),
            e_hf: inputs.e_hf,
            e_inf: inputs.e_inf,
            e_max: inputs.e_max,
        },
        variance: Some(inputs.variance),
        noise,
        overlap,
        fits: inputs.fits.clone(),
        verdict,
        thresholds: Thresholds { eta: inputs.eta, qpe_omega: inputs.qpe_threshold },
        provenance,
        warnings,
    })
}

/// Rounds to 12 significant digits; idempotent.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            *v = serde_json::Number::from_f64(round_sig12(x)).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with floats at 12 significant digits and non-finite values
/// as `null`.
pub fn to_json_rounded<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    round_value(&mut v);
    serde_json::to_string_pretty(&v).map_err(|e| Error::InvalidInput(e.to_string()))
}

impl CriterionReport {
    pub fn to_json(&self) -> Result<String> {
        to_json_rounded(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })
    }

    /// One-line summary with unit conversions for humans.
    pub fn summary_line(&self) -> String {
        let mut parts = Vec::new();
        if let (Some(e0), Some(ei)) = (self.energies.e0, self.energies.e_inf) {
            let gap = ei - e0;
            parts.push(format!(
                "Einf-E0 = {gap:.6} Ha ({:.0} K, {:.1} kcal/mol)",
                gap * HARTREE_TO_KELVIN,
                gap * HARTREE_TO_KCAL_PER_MOL
            ));
        }
        if let Some(e) = self.noise.eps_max {
            parts.push(format!("epsMax = {e:.3e}"));
        }
        let verdict = |v: Option<bool>| match v {
            Some(true) => "go",
            Some(false) => "no-go",
            None => "n/a",
        };
        parts.push(format!("VQE {}", verdict(self.verdict.vqe)));
        parts.push(format!("QPE {}", verdict(self.verdict.qpe)));
        format!("{}: {}", self.molecule.name, parts.join("; "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_max_unit_case() {
        let e = max_tolerable_error(&VqeCriterionInput { eta: 1.6e-3, e_noise: 1.0, e0: 0.0, n_g: 1.0 }).unwrap();
        assert_eq!(e, 1.6e-3);
        let bad = VqeCriterionInput { eta: 1.6e-3, e_noise: 0.0, e0: 0.0, n_g: 1.0 };
        assert!(matches!(max_tolerable_error(&bad), Err(Error::Undefined(_))));
        let bad = VqeCriterionInput { n_g: 0.5, ..bad };
        assert!(max_tolerable_error(&bad).is_err());
    }

    #[test]
    fn benzene_scale_bound() {
        let e = max_tolerable_error(&VqeCriterionInput::new(3.0, 0.0, 30f64.powi(6))).unwrap();
        assert!(e < 1e-12);
    }

    #[test]
    fn quadratic_recovery() {
        let data: Vec<(f64, f64)> = (1..=8).map(|n| (n as f64, 2.0 * n as f64 + 0.5 * (n * n) as f64)).collect();
        let fit = noise_energy_fit(&data).unwrap();
        assert!((fit.value("a").unwrap() - 2.0).abs() < 1e-10);
        assert!((fit.value("b").unwrap() - 0.5).abs() < 1e-10);
        assert!(fit.residual_norm < 1e-10);
    }

    #[test]
    fn pure_line_has_no_quadratic_term() {
        let data: Vec<(f64, f64)> = (2..=16).step_by(2).map(|n| (n as f64, 3.0 * n as f64)).collect();
        let fit = noise_energy_fit(&data).unwrap();
        let b = fit.value("b").unwrap();
        assert!(b.abs() <= fit.std_error("b").unwrap().max(1e-12));
    }

    #[test]
    fn single_abscissa_is_rank_deficient() {
        let data = [(4.0, 1.0), (4.0, 1.1), (4.0, 0.9)];
        assert!(matches!(noise_energy_fit(&data), Err(Error::RankDeficient(_))));
        assert!(noise_energy_fit(&data[..2]).is_err());
    }

    #[test]
    fn proportional_examples() {
        let fit = overlap_scaling_fit(&[(1.0, 5.0)]).unwrap();
        assert_eq!(fit.value("C"), Some(5.0));
        assert_eq!(fit.std_error("C"), None);
        let data: Vec<(f64, f64)> = (1..10).map(|i| (0.01 * i as f64, 27.8 * 0.01 * i as f64)).collect();
        let fit = overlap_scaling_fit(&data).unwrap();
        assert!((fit.value("C").unwrap() / 27.8 - 1.0).abs() < 1e-10);
        assert!(overlap_scaling_fit(&[(0.0, 1.0), (0.0, 2.0)]).is_err());
    }

    #[test]
    fn polynomial_share() {
        let data: Vec<(f64, f64)> = (4..=16).step_by(2).map(|n| (n as f64, 1.0 - 0.5 * n as f64)).collect();
        let fit = polynomial_fit(&data, 2).unwrap();
        assert!(quadratic_share(&fit, &data).unwrap() < 1e-10);
        assert!((fit.evaluate(10.0) + 4.0).abs() < 1e-10);
    }

    #[test]
    fn qpe_extrapolation_examples() {
        assert_eq!(qpe_success_extrapolation(0.0, 1e6).unwrap(), 1.0);
        let ln2 = std::f64::consts::LN_2;
        assert!((qpe_success_extrapolation(ln2, 3.0).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(qpe_threshold_crossing(ln2, 1e-3).unwrap(), Some(10));
        assert_eq!(qpe_threshold_crossing(0.0, 1e-3).unwrap(), None);
        assert!(qpe_success_extrapolation(-1.0, 1.0).is_err());
    }

    fn h2_like() -> ReportInputs {
        let mut r = ReportInputs::new(
            MoleculeInfo { name: "H2".into(), n_orb: 2, n_elec: 2, n_qubits: 4, spacing: Some(1.4) },
            -1.116_7,
            0.03,
        );
        r.e0_exact = Some(-1.137_3);
        r.e_inf = Some(-0.099);
        r.n_g = Some(56);
        r.omega_exact = Some(0.987);
        r
    }

    #[test]
    fn report_fields_and_verdicts() {
        let rep = assemble_report(&h2_like()).unwrap();
        assert_eq!(rep.verdict.qpe, Some(true));
        assert_eq!(rep.verdict.vqe, None);
        assert!(rep.noise.eps_max.unwrap() > 0.0);
        assert_eq!(rep.provenance["E0"], Provenance::Computed);

        let mut noiseless = h2_like();
        noiseless.eps = Some(0.0);
        noiseless.n_g = Some(1_000_000_000);
        let rep = assemble_report(&noiseless).unwrap();
        assert_eq!(rep.noise.delta_e, Some(0.0));
        assert_eq!(rep.verdict.vqe, Some(true));
    }

    #[test]
    fn e0_provenance_hierarchy() {
        let mut r = h2_like();
        r.e0_exact = None;
        r.e0_user = Some(-1.13);
        assert_eq!(assemble_report(&r).unwrap().provenance["E0"], Provenance::User);
        r.e0_user = None;
        let rep = assemble_report(&r).unwrap();
        assert_eq!(rep.provenance["E0"], Provenance::Variational);
        assert!(!rep.warnings.is_empty());
    }

    #[test]
    fn units_are_checked() {
        let mut r = h2_like();
        r.units = "eV".into();
        assert!(assemble_report(&r).is_err());
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let mut r = h2_like();
        r.eps = Some(1e-4);
        r.kappa = Some(0.013_086_954_321_987_6);
        r.fits.insert("prop".into(), overlap_scaling_fit(&[(0.1, 2.78), (0.2, 5.5)]).unwrap());
        let rep = assemble_report(&r).unwrap();
        let a = rep.to_json().unwrap();
        let b = CriterionReport::from_json(&a).unwrap().to_json().unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"E0\""));
        assert!(a.contains("\"omegaExact\""));
    }

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig12(0.1234567890123456), 0.123456789012);
        assert_eq!(round_sig12(round_sig12(std::f64::consts::PI)), round_sig12(std::f64::consts::PI));
        let v = to_json_rounded(&vec![f64::NAN, 1.0]).unwrap();
        assert!(v.contains("null"));
    }
}
