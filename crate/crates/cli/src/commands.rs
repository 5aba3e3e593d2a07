use std::path::{Path, PathBuf};

use gonogo_core::criteria::{
    assemble_report, max_tolerable_error, noise_energy_fit, overlap_scaling_fit, to_json_rounded, MoleculeInfo,
    Provenance, ReportInputs, VqeCriterionInput, HARTREE_TO_KCAL_PER_MOL, HARTREE_TO_KELVIN,
};
use gonogo_core::fermion::{
    aufbau_occupation, determinant_energy, determinant_variance, fock_space_trace_mean, jordan_wigner, write_fcidump,
    MolecularIntegrals, SpinOrbitalConvention,
};
use gonogo_core::hchain::{scan_csv, solve_hchain, ScanRow, ScfOptions};
use gonogo_core::itevo::{overlap_report, propagate};
use gonogo_core::pauli::{energy_and_variance, PauliSum, StateVector, MAX_STATE_QUBITS};
use gonogo_core::spectra::{exact_overlap, ground_state, max_energy, LanczosOptions, Sector};
use gonogo_core::vqe::{
    build_uccsd, fidelity, gate_count, noisy_energy, optimize, prepare_state, GroundReference, OptimizerConfig,
};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{
    AnalyzeArgs, Cli, Command, CriteriaArgs, FitArgs, FitKind, HchainArgs, NoiseArgs, OverlapArgs, VqeArgs,
};
use crate::io::{
    load_fcidump, molecule_name, parse_state, partial_path, prepare_out_dir, read_columns, read_input, state_to_text,
    write_atomic,
};
use crate::CliError;

/// Above this many UCCSD excitations `--ng auto` gives up and asks for an
/// explicit count.
const MAX_AUTO_EXCITATIONS: usize = 200_000;

/// Global settings shared by all subcommands.
struct Context {
    seed: u64,
    out: PathBuf,
    json: bool,
    csv: bool,
    max_qubits: usize,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn lanczos(&self) -> LanczosOptions {
        LanczosOptions { seed: self.seed, ..Default::default() }
    }

    fn guard(&self, n_qubits: usize) -> Result<(), CliError> {
        if n_qubits > self.max_qubits {
            return Err(CliError::usage(format!(
                "{n_qubits} qubits exceeds the limit of {} (raise with --max-qubits, at most {MAX_STATE_QUBITS})",
                self.max_qubits
            )));
        }
        Ok(())
    }

    fn print_json(&self, text: &str) {
        if self.json {
            println!("{text}");
        }
    }

    fn print_csv(&self, text: &str) {
        if self.csv {
            print!("{text}");
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if cli.max_qubits > MAX_STATE_QUBITS {
        return Err(CliError::usage(format!("--max-qubits is at most {MAX_STATE_QUBITS}")));
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::usage("--threads must be positive"));
        }
        // fails only if a pool already exists, e.g. when called twice in-process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let ctx = Context { seed: cli.seed, out: cli.out, json: cli.json, csv: cli.csv, max_qubits: cli.max_qubits };
    match cli.command {
        Command::Hchain(a) => hchain(&ctx, &a),
        Command::Analyze(a) => analyze(&ctx, &a),
        Command::Vqe(a) => vqe(&ctx, &a),
        Command::Overlap(a) => overlap(&ctx, &a),
        Command::Criteria(a) => criteria(&ctx, &a),
        Command::Fit(a) => fit(&ctx, &a),
    }
}

fn parse_scan(spec: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::usage(format!("--scan expects start:stop:step, got {spec:?}"));
    let parts: Vec<usize> = spec.split(':').map(|s| s.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let [start, stop, step] = parts[..] else { return Err(bad()) };
    if step == 0 || start > stop || start == 0 {
        return Err(bad());
    }
    Ok((start..=stop).step_by(step).collect())
}

fn hchain(ctx: &Context, a: &HchainArgs) -> Result<(), CliError> {
    let list = match (&a.scan, a.n) {
        (Some(s), _) => parse_scan(s)?,
        (None, Some(n)) => vec![n],
        (None, None) => return Err(CliError::usage("give --n or --scan")),
    };
    if let Some(n) = list.iter().find(|&&n| n == 0 || n % 2 != 0) {
        return Err(CliError::usage(format!("chain length {n} is not a positive even number")));
    }
    if !(a.spacing.is_finite() && a.spacing > 0.0) {
        return Err(CliError::usage(format!("spacing must be positive, got {}", a.spacing)));
    }
    prepare_out_dir(&ctx.out)?;

    let solved: Vec<(ScanRow, MolecularIntegrals)> = list
        .par_iter()
        .map(|&n| {
            let sol = solve_hchain(n, a.spacing, &ScfOptions::default())?;
            let occ = aufbau_occupation(n)?;
            let row = ScanRow {
                n_atoms: n,
                e_hf: sol.scf.energy,
                var_hf: determinant_variance(&sol.integrals, &occ)?,
                e_inf: fock_space_trace_mean(&sol.integrals),
            };
            Ok((row, sol.integrals))
        })
        .collect::<Result<_, gonogo_core::Error>>()
        .map_err(|e| match e {
            gonogo_core::Error::ScfNotConverged { .. } | gonogo_core::Error::SingularOverlap(_) => {
                CliError::compute(e.to_string())
            }
            other => other.into(),
        })?;

    for (row, ints) in &solved {
        write_atomic(&ctx.path(&format!("h{}.fcidump", row.n_atoms)), &write_fcidump(ints))?;
    }
    let rows: Vec<ScanRow> = solved.iter().map(|(r, _)| *r).collect();
    let csv = scan_csv(&rows);
    write_atomic(&ctx.path("scan.csv"), &csv)?;
    ctx.print_csv(&csv);
    if ctx.json {
        let v: Vec<_> = rows
            .iter()
            .map(|r| json!({ "N": r.n_atoms, "E_HF": r.e_hf, "var_HF": r.var_hf, "E_inf": r.e_inf }))
            .collect();
        ctx.print_json(&to_json_rounded(&v)?);
    }
    for r in &rows {
        eprintln!("H{}: E_HF = {:.8} Ha, var_HF = {:.6} Ha^2, E_inf = {:.6} Ha", r.n_atoms, r.e_hf, r.var_hf, r.e_inf);
    }
    Ok(())
}

fn validate_noise(n: &NoiseArgs) -> Result<(), CliError> {
    if let Some(eps) = n.eps {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(CliError::usage(format!("--eps must be non-negative, got {eps}")));
        }
    }
    if !(n.eta > 0.0 && n.eta.is_finite()) {
        return Err(CliError::usage(format!("--eta must be positive, got {}", n.eta)));
    }
    if !(n.qpe_threshold > 0.0 && n.qpe_threshold <= 1.0) {
        return Err(CliError::usage(format!("--qpe-threshold must lie in (0, 1], got {}", n.qpe_threshold)));
    }
    if let Some(e0) = n.e0 {
        if !e0.is_finite() {
            return Err(CliError::usage("--e0 must be finite"));
        }
    }
    if n.ng != "auto" {
        parse_count(&n.ng)?;
    }
    Ok(())
}

/// Accepts `1000` as well as `1e6`, provided the value is a whole number.
fn parse_count(s: &str) -> Result<u64, CliError> {
    if let Ok(v) = s.parse::<u64>() {
        if v >= 1 {
            return Ok(v);
        }
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 1.0 && v.fract() == 0.0 && v < u64::MAX as f64 => Ok(v as u64),
        _ => Err(CliError::usage(format!("--ng expects `auto` or a positive integer, got {s:?}"))),
    }
}

/// Gate count from `--ng`; `auto` builds the UCCSD circuit unless it is
/// too large to enumerate, in which case the count is left out with a
/// warning.
fn resolve_ng(
    spec: &str,
    ints: &MolecularIntegrals,
    conv: &SpinOrbitalConvention,
    warnings: &mut Vec<String>,
) -> Result<(Option<u64>, Provenance), CliError> {
    if spec != "auto" {
        return Ok((Some(parse_count(spec)?), Provenance::User));
    }
    let occ = ints.n_elec();
    let virt = ints.n_qubits() - occ;
    let doubles_bound = occ * occ.saturating_sub(1) / 2 * (virt * virt.saturating_sub(1) / 2);
    if occ * virt + doubles_bound > MAX_AUTO_EXCITATIONS {
        warnings.push(format!(
            "UCCSD has up to {} excitations; gate count not enumerated, pass --ng",
            occ * virt + doubles_bound
        ));
        return Ok((None, Provenance::Computed));
    }
    let ansatz = build_uccsd(ints.n_orb(), ints.n_elec(), conv)?;
    Ok((Some(gate_count(&ansatz)), Provenance::Computed))
}

fn molecule(path: &Path, ints: &MolecularIntegrals) -> MoleculeInfo {
    MoleculeInfo {
        name: molecule_name(path),
        n_orb: ints.n_orb(),
        n_elec: ints.n_elec(),
        n_qubits: ints.n_qubits(),
        spacing: None,
    }
}

fn base_inputs(path: &Path, ints: &MolecularIntegrals, noise: &NoiseArgs, e_v: f64, variance: f64) -> ReportInputs {
    let mut r = ReportInputs::new(molecule(path, ints), e_v, variance);
    r.e_inf = Some(fock_space_trace_mean(ints));
    r.eps = noise.eps;
    r.eta = noise.eta;
    r.qpe_threshold = noise.qpe_threshold;
    r.e0_user = noise.e0;
    r
}

/// Hamiltonian and ground state reached from the Hartree-Fock determinant
/// inside its closed-shell sector.
struct Exact {
    h: PauliSum,
    hf: StateVector,
    e0: f64,
    ground: StateVector,
}

fn exact_ground(
    ctx: &Context,
    ints: &MolecularIntegrals,
    conv: &SpinOrbitalConvention,
    warnings: &mut Vec<String>,
) -> Result<Exact, CliError> {
    let h = jordan_wigner(ints, conv)?;
    let occ = aufbau_occupation(ints.n_elec())?;
    let hf = StateVector::determinant(ints.n_qubits(), &conv.determinant_qubits(&occ))?;
    let opts = LanczosOptions {
        start: Some(hf.clone()),
        sector: Some(Sector::closed_shell(conv, ints.n_elec())),
        ..ctx.lanczos()
    };
    let g = ground_state(&h, &opts)?;
    if !g.converged {
        warnings.push(format!("ground-state Lanczos stopped at residual {:.3e}", g.residual));
    }
    let ground = g.vector.ok_or_else(|| CliError::compute("Lanczos returned no eigenvector"))?;
    Ok(Exact { h, hf, e0: g.value, ground })
}

fn finish_report(ctx: &Context, inputs: &ReportInputs) -> Result<(), CliError> {
    let report = assemble_report(inputs)?;
    let text = report.to_json()?;
    write_atomic(&ctx.path("report.json"), &(text.clone() + "\n"))?;
    ctx.print_json(&text);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!("{}", report.summary_line());
    Ok(())
}

fn analyze(ctx: &Context, a: &AnalyzeArgs) -> Result<(), CliError> {
    validate_noise(&a.noise)?;
    let ints = load_fcidump(&a.fcidump)?;
    prepare_out_dir(&ctx.out)?;
    let conv = SpinOrbitalConvention::interleaved(ints.n_orb());
    let occ = aufbau_occupation(ints.n_elec())?;
    let e_hf = determinant_energy(&ints, &occ)?;
    let var = determinant_variance(&ints, &occ)?;

    let mut inputs = base_inputs(&a.fcidump, &ints, &a.noise, e_hf, var);
    inputs.e_hf = Some(e_hf);
    let (n_g, prov) = resolve_ng(&a.noise.ng, &ints, &conv, &mut inputs.warnings)?;
    inputs.n_g = n_g;
    inputs.n_g_provenance = prov;

    if ints.n_qubits() <= ctx.max_qubits {
        let ex = exact_ground(ctx, &ints, &conv, &mut inputs.warnings)?;
        inputs.e0_exact = Some(ex.e0);
        inputs.omega_exact = Some(exact_overlap(&ex.ground, &ex.hf)?);
        let top = max_energy(&ex.h, &ctx.lanczos())?;
        if !top.converged {
            inputs.warnings.push(format!("E_max Lanczos stopped at residual {:.3e}", top.residual));
        }
        inputs.e_max = Some(top.value);
    } else {
        inputs.warnings.push(format!(
            "{} qubits exceeds the limit of {}; E0, Emax and the exact overlap are unavailable",
            ints.n_qubits(),
            ctx.max_qubits
        ));
    }
    finish_report(ctx, &inputs)
}

fn vqe(ctx: &Context, a: &VqeArgs) -> Result<(), CliError> {
    validate_noise(&a.noise)?;
    if !(a.g_tol > 0.0) {
        return Err(CliError::usage("--g-tol must be positive"));
    }
    let ints = load_fcidump(&a.fcidump)?;
    ctx.guard(ints.n_qubits())?;
    prepare_out_dir(&ctx.out)?;
    let conv = SpinOrbitalConvention::interleaved(ints.n_orb());
    let mut warnings = Vec::new();
    let ex = exact_ground(ctx, &ints, &conv, &mut warnings)?;
    let ansatz = build_uccsd(ints.n_orb(), ints.n_elec(), &conv)?;
    let config = OptimizerConfig { max_steps: a.max_steps, g_tol: a.g_tol, ..Default::default() };
    let reference = GroundReference { e0: Some(ex.e0), vector: Some(ex.ground.clone()) };

    let csv_path = ctx.path("trajectory.csv");
    let traj = match optimize(&ex.h, &ansatz, &config, &reference) {
        Ok(t) => t,
        Err(fail) => {
            write_atomic(&partial_path(&csv_path), &fail.partial.to_csv())?;
            return Err(CliError::compute(format!(
                "optimizer failed after {} logged steps: {}",
                fail.partial.steps.len(),
                fail.error
            )));
        }
    };
    if !traj.converged {
        warnings.push(format!("gradient norm above {:e} after {} steps", a.g_tol, traj.steps.len() - 1));
    }
    let last = traj.last();
    let state = prepare_state(&ansatz, &last.theta)?;

    let mut inputs = base_inputs(&a.fcidump, &ints, &a.noise, last.e_v, last.sigma_v * last.sigma_v);
    inputs.warnings = warnings;
    inputs.e0_exact = Some(ex.e0);
    inputs.e_hf = Some(traj.steps[0].e_v);
    inputs.omega_exact = last.omega_exact;
    let (n_g, prov) = resolve_ng(&a.noise.ng, &ints, &conv, &mut inputs.warnings)?;
    inputs.n_g = n_g;
    inputs.n_g_provenance = prov;

    let pairs: Vec<(f64, f64)> = traj
        .steps
        .iter()
        .filter_map(|s| Some(((s.e_v - ex.e0).abs(), s.i_omega?)))
        .filter(|&(x, y)| x > 1e-12 && y.is_finite())
        .collect();
    if !pairs.is_empty() {
        match overlap_scaling_fit(&pairs) {
            Ok(f) => {
                inputs.fits.insert("overlapIndex".into(), f);
            }
            Err(e) => inputs.warnings.push(format!("overlap-index fit: {e}")),
        }
    }

    let csv = traj.to_csv();
    write_atomic(&csv_path, &csv)?;
    write_atomic(&ctx.path("vqe_state.txt"), &state_to_text(&state))?;
    ctx.print_csv(&csv);
    finish_report(ctx, &inputs)
}

fn overlap(ctx: &Context, a: &OverlapArgs) -> Result<(), CliError> {
    if !(a.dtau > 0.0 && a.tau_max >= a.dtau) {
        return Err(CliError::usage("need 0 < --dtau <= --tau-max"));
    }
    if !(a.tail_threshold > 0.0) {
        return Err(CliError::usage("--tail-threshold must be positive"));
    }
    let ints = load_fcidump(&a.fcidump)?;
    ctx.guard(ints.n_qubits())?;
    let conv = SpinOrbitalConvention::interleaved(ints.n_orb());
    let loaded = match &a.state {
        Some(p) => {
            let s = parse_state(&read_input(p)?)?;
            if s.n_qubits() != ints.n_qubits() {
                return Err(CliError::usage(format!(
                    "state has {} qubits, Hamiltonian has {}",
                    s.n_qubits(),
                    ints.n_qubits()
                )));
            }
            Some(s)
        }
        None => None,
    };
    prepare_out_dir(&ctx.out)?;
    let mut warnings = Vec::new();
    let (h, trial, e0, ground) = match loaded {
        None => {
            let ex = exact_ground(ctx, &ints, &conv, &mut warnings)?;
            (ex.h, ex.hf, ex.e0, ex.ground)
        }
        Some(s) => {
            let h = jordan_wigner(&ints, &conv)?;
            let opts = LanczosOptions { start: Some(s.clone()), sector: particle_sector(&s), ..ctx.lanczos() };
            let g = ground_state(&h, &opts)?;
            if !g.converged {
                warnings.push(format!("ground-state Lanczos stopped at residual {:.3e}", g.residual));
            }
            let v = g.vector.ok_or_else(|| CliError::compute("Lanczos returned no eigenvector"))?;
            (h, s, g.value, v)
        }
    };
    let (e_v, var) = energy_and_variance(&h, &trial)?;
    let omega = exact_overlap(&ground, &trial)?;
    let curve = propagate(&h, &trial, a.tau_max, a.dtau)?;
    let rep = overlap_report(&curve, e0, var, Some(omega), a.tail_threshold)?;
    if !rep.tail_converged {
        warnings.push("imaginary-time tail not converged; kappa may be underestimated".into());
    }
    // the slope test is relative and meaningless for a near-eigenstate
    if !rep.slopes.mixed_ok && var > 1e-8 {
        warnings.push(format!("initial slope {:.6e} differs from -variance {:.6e}", rep.slopes.mixed_slope, -var));
    }

    let body = json!({
        "molecule": molecule(&a.fcidump, &ints),
        "trial": if a.state.is_some() { "file" } else { "hartree-fock" },
        "E0": e0,
        "EV": e_v,
        "variance": var,
        "dtau": a.dtau,
        "tauMax": a.tau_max,
        "substeps": curve.substeps,
        "kappa": rep.kappa,
        "omegaKappa": rep.omega_from_kappa,
        "IOmega": rep.overlap_index,
        "omegaIndex": rep.omega_from_index,
        "omegaExact": omega,
        "kappaSymmetric": rep.kappa_symmetric,
        "tailCorrection": rep.tail_correction,
        "tailConverged": rep.tail_converged,
        "slopes": rep.slopes,
        "warnings": warnings,
    });
    let text = to_json_rounded(&body)?;
    let csv = curve.to_csv();
    write_atomic(&ctx.path("itcurve.csv"), &csv)?;
    write_atomic(&ctx.path("overlap.json"), &(text.clone() + "\n"))?;
    ctx.print_csv(&csv);
    ctx.print_json(&text);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "{}: kappa = {:.6e}, exp(-kappa) = {:.8}, exp(-I) = {:.8}, Omega = {:.8}",
        molecule_name(&a.fcidump),
        rep.kappa,
        rep.omega_from_kappa,
        rep.omega_from_index,
        omega
    );
    Ok(())
}

/// Particle-number sector of a state with definite particle number.
fn particle_sector(s: &StateVector) -> Option<Sector> {
    let n = s.n_qubits();
    let mut counts = s.amplitudes().iter().enumerate().filter(|(_, a)| a.norm_sqr() > 0.0).map(|(i, _)| i.count_ones());
    let first = counts.next()?;
    counts.all(|c| c == first).then(|| Sector::particles(n, first as usize))
}

fn criteria(ctx: &Context, a: &CriteriaArgs) -> Result<(), CliError> {
    let input = VqeCriterionInput { eta: a.eta, e_noise: a.gap, e0: 0.0, n_g: a.ng };
    let eps_max = max_tolerable_error(&input)?;
    let mut body = json!({
        "inputs": { "eta": a.eta, "gap": a.gap, "Ng": a.ng, "eps": a.eps },
        "epsMax": eps_max,
        "provenance": { "eta": "user", "gap": "user", "Ng": "user", "epsMax": "computed" },
    });
    let mut verdict = None;
    if let Some(eps) = a.eps {
        if !(eps >= 0.0) {
            return Err(CliError::usage("--eps must be non-negative"));
        }
        let f = fidelity(eps, a.ng)?;
        let de = noisy_energy(0.0, a.gap, f)?.delta_e;
        body["F"] = json!(f);
        body["deltaE"] = json!(de);
        verdict = Some(de <= a.eta);
        body["verdict"] = json!({ "vqe": verdict });
    }
    let text = to_json_rounded(&body)?;
    prepare_out_dir(&ctx.out)?;
    write_atomic(&ctx.path("criteria.json"), &(text.clone() + "\n"))?;
    ctx.print_json(&text);
    let v = match verdict {
        Some(true) => "; VQE go",
        Some(false) => "; VQE no-go",
        None => "",
    };
    eprintln!(
        "epsMax = {eps_max:.6e} (gap {:.6} Ha = {:.0} K = {:.2} kcal/mol){v}",
        a.gap,
        a.gap * HARTREE_TO_KELVIN,
        a.gap * HARTREE_TO_KCAL_PER_MOL
    );
    Ok(())
}

fn fit(ctx: &Context, a: &FitArgs) -> Result<(), CliError> {
    let data = read_columns(&read_input(&a.csv_file)?, a.x_col, a.y_col)
        .map_err(|e| CliError::usage(format!("{}: {e}", a.csv_file.display())))?;
    let (model, f) = match a.model {
        FitKind::Quad => ("quad", noise_energy_fit(&data)?),
        FitKind::Prop => ("prop", overlap_scaling_fit(&data)?),
    };
    let mut body = json!({
        "model": model,
        "input": a.csv_file.file_name().map(|s| s.to_string_lossy().into_owned()),
        "xColumn": a.x_col,
        "yColumn": a.y_col,
        "fit": f,
    });
    if a.model == FitKind::Quad {
        // share of the N^2 term in the value at the largest N
        if let (Some(b), Some(&(x, y))) = (f.value("b"), data.iter().max_by(|p, q| p.0.total_cmp(&q.0))) {
            body["quadraticShare"] = json!((b * x * x / y).abs());
        }
    }
    let text = to_json_rounded(&body)?;
    prepare_out_dir(&ctx.out)?;
    write_atomic(&ctx.path("fit.json"), &(text.clone() + "\n"))?;
    ctx.print_json(&text);
    let coeffs: Vec<String> = f
        .coefficients
        .iter()
        .map(|c| match c.std_error {
            Some(se) => format!("{} = {:.10e} +/- {:.3e}", c.name, c.value, se),
            None => format!("{} = {:.10e}", c.name, c.value),
        })
        .collect();
    eprintln!("{model} fit over {} points: {}", f.samples, coeffs.join(", "));
    Ok(())
}
