use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fps_core::heisenberg::rep_x;
use fps_core::matrix::random;
use fps_core::phasepoint::{verify_wigner_set, wigner_of_operator, wigner_with_tolerance};
use fps_core::radon::{
    born_probabilities, marginal_even_general, marginal_from_born, marginal_qubit_w1, marginal_record,
    marginal_simple_odd, simulate_counts, validate_distribution, MarginalSource,
};
use fps_core::reconstruct::{
    dataset_lines, fidelity, process_matrix_forward, process_radon_check, reconstruct_state_with,
};
use fps_core::zn::cover_lines;
use fps_core::{
    AssemblyOptions, ComplexMatrix, FpsError, FrequencyLine, MarginalRecord, MeasurementPlan, PhasePointSet,
    RadonDataset, Sl2Matrix, Superoperator, Variant,
};
use serde::Serialize;

use crate::error::CliError;
use crate::files::*;

/// Numeric tolerance for density checks and set verification.
pub const DEFAULT_CLI_TOLERANCE: f64 = 1e-9;

pub fn tolerance() -> Result<f64, CliError> {
    match std::env::var("FPS_TOLERANCE") {
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t > 0.0 => Ok(t),
            _ => Err(CliError::Usage(format!("FPS_TOLERANCE must be a positive number, got {s:?}"))),
        },
        Err(_) => Ok(DEFAULT_CLI_TOLERANCE),
    }
}

pub fn parse_matrix_arg(s: &str, n: usize) -> Result<Sl2Matrix, CliError> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("bad matrix {s:?}: {e}")))?;
    let [a, b, c, d] = parts[..] else {
        return Err(CliError::Usage(format!("matrix {s:?} needs four entries a,b,c,d")));
    };
    Ok(Sl2Matrix::new(a, b, c, d, n)?)
}

fn resolve_variant(v: Option<&str>, n: usize) -> Result<Variant, CliError> {
    let v = match v {
        Some(s) => parse_variant(s)?,
        None => Variant::default_for(n),
    };
    v.check(n)?;
    Ok(v)
}

fn build_set(variant: Variant, n: usize, tol: f64) -> Result<PhasePointSet, CliError> {
    variant.check(n)?;
    let f = fps_core::OrderingFunction::new(variant, n)?;
    Ok(PhasePointSet::build_with_tolerance(f, tol)?)
}

/// State file as a matrix; checked as a density matrix unless `raw`.
pub fn load_state(path: &Path, raw: bool, tol: f64) -> Result<ComplexMatrix, CliError> {
    let file: StateFile = read_json(path)?;
    let m = file.to_matrix()?;
    if !raw {
        m.check_density(tol)?;
    }
    Ok(m)
}

// ---- gen -------------------------------------------------------------------

pub fn gen(dim: usize, variant: &str, out: &Path) -> Result<String, CliError> {
    let tol = tolerance()?;
    let variant = parse_variant(variant)?;
    let set = build_set(variant, dim, tol)?;
    let report = verify_wigner_set(&set);
    let mut operators = Vec::with_capacity(dim * dim);
    for x in 0..dim {
        for z in 0..dim {
            operators.push(OperatorJson { x, z, matrix: MatrixJson::from_matrix(set.get(x, z)) });
        }
    }
    write_json(out, &SetFile { format: FORMAT, dim, variant: variant_name(variant), operators })?;
    let sidecar = ReportFile {
        format: FORMAT,
        dim,
        variant: variant_name(variant),
        tolerance: tol,
        hermiticity: report.hermiticity,
        orthogonality: report.orthogonality,
        completeness: report.completeness,
        diagonal: report.diagonal,
        position_projectors: report.position_projectors,
        momentum_projectors: report.momentum_projectors,
        pass: report.require(tol).is_ok(),
    };
    let report_path = sidecar_path(out);
    write_json(&report_path, &sidecar)?;
    Ok(format!(
        "wrote {} operators to {} (max violation {:.3e}, report {})",
        dim * dim,
        out.display(),
        report.max(),
        report_path.display()
    ))
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".report.json");
    PathBuf::from(s)
}

// ---- wigner ----------------------------------------------------------------

pub fn wigner(state: &Path, variant: Option<&str>, out: &Path, raw: bool) -> Result<String, CliError> {
    let tol = tolerance()?;
    let rho = load_state(state, raw, tol)?;
    let n = rho.dim();
    let variant = resolve_variant(variant, n)?;
    let set = build_set(variant, n, tol)?;
    let grid = if raw { wigner_of_operator(&rho, &set, tol)? } else { wigner_with_tolerance(&rho, &set, tol)? };
    let mut csv = String::from("x,z,w\n");
    for x in 0..n {
        for z in 0..n {
            writeln!(csv, "{x},{z},{:.16e}", grid.get(x, z)).unwrap();
        }
    }
    write_text(out, &csv)?;
    Ok(format!("wrote {} rows to {} (sum {:.12})", n * n, out.display(), grid.sum()))
}

// ---- marginal --------------------------------------------------------------

pub struct MarginalArgs<'a> {
    pub state: &'a Path,
    pub variant: Option<&'a str>,
    pub m: &'a str,
    pub shots: Option<u64>,
    pub seed: u64,
    pub kernel: bool,
    pub out: &'a Path,
}

fn exact_marginal(
    rho: &ComplexMatrix,
    m: &Sl2Matrix,
    set: &PhasePointSet,
    kernel: bool,
) -> Result<MarginalRecord, CliError> {
    if kernel {
        return Ok(marginal_record(rho, m, set)?);
    }
    Ok(match set.variant() {
        Variant::Odd => marginal_simple_odd(rho, m, set)?,
        Variant::QubitW1 => marginal_qubit_w1(rho, m, set)?,
        Variant::EvenNu => marginal_even_general(rho, m, set)?,
    })
}

pub fn marginal(args: MarginalArgs<'_>) -> Result<String, CliError> {
    let tol = tolerance()?;
    let rho = load_state(args.state, false, tol)?;
    let n = rho.dim();
    let variant = resolve_variant(args.variant, n)?;
    let m = parse_matrix_arg(args.m, n)?;
    let set = build_set(variant, n, tol)?;
    let rec = exact_marginal(&rho, &m, &set, args.kernel)?;
    let op = rec.basis.operator;
    let mut file = MarginalFile {
        format: FORMAT,
        dim: n,
        variant: variant_name(variant),
        m: m.entries().map(|e| e as i64),
        probs: rec.probs.clone(),
        basis: BasisJson { m: op.m, n: op.n, gamma_power: op.gamma_power, shift: rec.basis.shift },
        source: rec.source.name().into(),
        shots: None,
        seed: None,
        counts: None,
        sampled_probs: None,
    };
    if let Some(shots) = args.shots {
        if shots == 0 {
            return Err(CliError::Usage("--shots must be positive".into()));
        }
        let born = born_probabilities(&rho, &m)?;
        let counts = simulate_counts(&born, shots, args.seed)?;
        let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / shots as f64).collect();
        let (sampled, _, _) = marginal_from_born(set.ordering(), &m, &freq)?;
        file.shots = Some(shots);
        file.seed = Some(args.seed);
        file.counts = Some(counts);
        file.sampled_probs = Some(sampled);
    }
    write_json(args.out, &file)?;
    Ok(format!("wrote marginal for M = {m} ({}) to {}", rec.basis.describe(), args.out.display()))
}

// ---- reconstruct -----------------------------------------------------------

pub struct ReconstructArgs<'a> {
    pub marginals: &'a Path,
    pub variant: Option<&'a str>,
    pub out: &'a Path,
    pub report: Option<&'a Path>,
    pub truth: Option<&'a Path>,
    pub consistency_tol: Option<f64>,
    pub exact: bool,
}

#[derive(Serialize)]
struct ReconstructReport {
    format: u32,
    dim: usize,
    variant: String,
    files: Vec<String>,
    sampled: bool,
    consistency_tolerance: Option<f64>,
    plan: Vec<PlanLine>,
    imaginary_residue: f64,
    min_eigenvalue: f64,
    physical: bool,
    trace_distance_to_physical: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    frobenius_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frobenius_error_physical: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity: Option<f64>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct PlanLine {
    pub a: usize,
    pub c: usize,
    #[serde(rename = "M")]
    pub m: [usize; 4],
}

fn marginal_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for e in entries {
        let p = e.map_err(|e| CliError::Io(e.to_string()))?.path();
        if p.extension().is_some_and(|x| x == "json") && p.is_file() {
            paths.push(p);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Io(format!("{}: no .json marginal files", dir.display())));
    }
    Ok(paths)
}

fn record_from_file(file: &MarginalFile, exact: bool) -> Result<MarginalRecord, CliError> {
    check_format(file.format)?;
    let m = file.matrix()?;
    let use_sampled = !exact && file.sampled_probs.is_some();
    let probs = if use_sampled { file.sampled_probs.clone().unwrap() } else { file.probs.clone() };
    if probs.len() != file.dim {
        return Err(CliError::Parse(format!("probs has {} entries, dim is {}", probs.len(), file.dim)));
    }
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|p| !p.is_finite()) || (total - 1.0).abs() > 1e-6 {
        return Err(FpsError::InvalidDistribution(format!("marginal for M = {m} sums to {total}")).into());
    }
    if let Some(counts) = &file.counts {
        let shots: u64 = counts.iter().sum();
        if counts.len() != file.dim || file.shots.is_some_and(|s| s != shots) {
            return Err(FpsError::InvalidDistribution(format!("counts for M = {m} do not match shots")).into());
        }
        validate_distribution(&counts.iter().map(|&c| c as f64 / shots.max(1) as f64).collect::<Vec<_>>(), 1e-9)?;
    }
    let source = match file.source.as_str() {
        "direct" => MarginalSource::Direct,
        "born-shift" => MarginalSource::BornShift,
        "even-closed-form" => MarginalSource::EvenClosedForm,
        "kernel" => MarginalSource::Kernel,
        other => return Err(CliError::Parse(format!("unknown marginal source {other:?}"))),
    };
    let mut basis = fps_core::radon::BasisTag::for_matrix(&m);
    basis.shift = file.basis.shift;
    Ok(MarginalRecord { m, probs, basis, source, shots: if use_sampled { file.shots } else { None } })
}

pub fn plan_lines(n: usize, dataset: &RadonDataset) -> Vec<FrequencyLine> {
    cover_lines(n).unwrap_or_else(|_| dataset_lines(dataset))
}

pub fn reconstruct(args: ReconstructArgs<'_>) -> Result<String, CliError> {
    let tol = tolerance()?;
    let paths = marginal_files(args.marginals)?;
    let files: Vec<MarginalFile> = paths.iter().map(|p| read_json(p)).collect::<Result<_, _>>()?;
    let n = files[0].dim;
    let file_variant = parse_variant(&files[0].variant)?;
    let variant = match args.variant {
        Some(v) => parse_variant(v)?,
        None => file_variant,
    };
    variant.check(n)?;
    let mut dataset = RadonDataset::new(n, variant);
    let mut sampled = false;
    for (file, path) in files.iter().zip(&paths) {
        if file.dim != n || parse_variant(&file.variant)? != variant {
            return Err(CliError::Usage(format!(
                "{}: dim {} variant {} does not match dim {n} variant {variant}",
                path.display(),
                file.dim,
                file.variant
            )));
        }
        let rec = record_from_file(file, args.exact)?;
        sampled |= rec.shots.is_some();
        dataset.push(rec)?;
    }
    // Sampled lines disagree on shared frequencies by design; the average is the estimate.
    let consistency =
        args.consistency_tol.or(if sampled { None } else { Some(AssemblyOptions::EXACT.consistency_tolerance) });
    let opts = AssemblyOptions::with_tolerance(consistency.unwrap_or(f64::INFINITY));
    let set = build_set(variant, n, tol)?;
    let plan = plan_lines(n, &dataset);
    let rec = reconstruct_state_with(&dataset, &set, &plan, opts)?;
    write_json(args.out, &StateFile::new(&rec.physical))?;

    let truth = args.truth.map(|p| load_state(p, false, tol)).transpose()?;
    if let Some(t) = &truth {
        if t.dim() != n {
            return Err(FpsError::DimensionMismatch { expected: n, actual: t.dim() }.into());
        }
    }
    let plan_json = plan
        .iter()
        .map(|l| {
            let m = dataset.find_line(l).map(|r| r.m).unwrap_or(l.measurement_matrix()?);
            Ok(PlanLine { a: l.a, c: l.c, m: m.entries() })
        })
        .collect::<Result<Vec<_>, FpsError>>()?;
    let report = ReconstructReport {
        format: FORMAT,
        dim: n,
        variant: variant_name(variant),
        files: paths.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect(),
        sampled,
        consistency_tolerance: consistency,
        plan: plan_json,
        imaginary_residue: rec.imaginary_residue,
        min_eigenvalue: rec.min_eigenvalue,
        physical: rec.min_eigenvalue >= -tol,
        trace_distance_to_physical: (&rec.rho - &rec.physical).frobenius_norm(),
        frobenius_error: truth.as_ref().map(|t| (&rec.rho - t).frobenius_norm()),
        frobenius_error_physical: truth.as_ref().map(|t| (&rec.physical - t).frobenius_norm()),
        fidelity: truth.as_ref().map(|t| fidelity(&rec.physical, t)),
    };
    if let Some(p) = args.report {
        write_json(p, &report)?;
    }
    let mut msg = format!(
        "reconstructed N = {n} from {} files (min eigenvalue {:.3e}, residue {:.3e})",
        report.files.len(),
        report.min_eigenvalue,
        report.imaginary_residue
    );
    if let (Some(e), Some(f)) = (report.frobenius_error, report.fidelity) {
        write!(msg, ", frobenius error {e:.3e}, fidelity {f:.9}").unwrap();
    }
    Ok(msg)
}

// ---- process ---------------------------------------------------------------

pub fn load_channel(path: &Path) -> Result<Superoperator, CliError> {
    let file: ChannelFile = read_json(path)?;
    check_format(file.format)?;
    if file.vectorization != "row-major" {
        return Err(CliError::Channel(format!("vectorization {:?} unsupported, only row-major", file.vectorization)));
    }
    if file.dim < 2 {
        return Err(CliError::Channel(format!("dim {} too small", file.dim)));
    }
    let nn = file.dim * file.dim;
    let m =
        file.matrix.to_matrix(nn).map_err(|e| CliError::Channel(format!("{}: {e} (N^2 = {nn})", path.display())))?;
    if !m.is_finite() {
        return Err(CliError::Channel("non-finite entries".into()));
    }
    Ok(Superoperator::from_matrix(file.dim, m)?)
}

pub fn process(channel: &Path, variant: Option<&str>, out: &Path, check: Option<&str>) -> Result<String, CliError> {
    let tol = tolerance()?;
    let ch = load_channel(channel)?;
    let n = ch.n;
    let variant = resolve_variant(variant, n)?;
    let set = build_set(variant, n, tol)?;
    let t = process_matrix_forward(&ch, &set)?;
    let nn = n * n;
    let values = (0..nn).map(|r| t.values[r * nn..(r + 1) * nn].to_vec()).collect();
    write_json(out, &ProcessFile { format: FORMAT, dim: n, variant: variant_name(variant), values })?;
    let mut msg = format!("wrote {nn}x{nn} process matrix to {}", out.display());
    if let Some(pair) = check {
        let (a, b) = pair
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("--check wants a,b,c,d:a',b',c',d', got {pair:?}")))?;
        let (m, mp) = (parse_matrix_arg(a, n)?, parse_matrix_arg(b, n)?);
        let dev = process_radon_check(&ch, &set, &m, &mp)?;
        write!(msg, "\ncheck M = {m}, M' = {mp}: deviation {dev:.3e}").unwrap();
    }
    Ok(msg)
}

pub fn apply(channel: &Path, state: &Path, out: &Path, raw: bool) -> Result<String, CliError> {
    let tol = tolerance()?;
    let ch = load_channel(channel)?;
    let a = load_state(state, raw, tol)?;
    let image = ch.apply(&a)?;
    write_json(out, &StateFile::new(&image))?;
    Ok(format!("wrote channel image to {}", out.display()))
}

// ---- generators ------------------------------------------------------------

pub fn random_state(dim: usize, seed: u64, pure: bool, out: &Path) -> Result<String, CliError> {
    if dim < 2 {
        return Err(FpsError::InvalidDimension(dim).into());
    }
    let mut rng = random::seeded(seed);
    let rho = if pure { random::pure_density(&mut rng, dim) } else { random::mixed_density(&mut rng, dim) };
    write_json(out, &StateFile::new(&rho))?;
    Ok(format!("wrote {} state of dim {dim} to {}", if pure { "pure" } else { "mixed" }, out.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ChannelKind {
    Identity,
    Depolarizing,
    UnitaryX,
    RandomUnitary,
}

pub fn channel(kind: ChannelKind, dim: usize, p: f64, seed: u64, out: &Path) -> Result<String, CliError> {
    if dim < 2 {
        return Err(FpsError::InvalidDimension(dim).into());
    }
    let ch = match kind {
        ChannelKind::Identity => Superoperator::identity(dim),
        ChannelKind::Depolarizing => {
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::Usage(format!("depolarizing p must lie in [0, 1], got {p}")));
            }
            Superoperator::depolarizing(dim, p)
        }
        ChannelKind::UnitaryX => Superoperator::unitary(&rep_x(dim)),
        ChannelKind::RandomUnitary => Superoperator::unitary(&random::unitary(&mut random::seeded(seed), dim)),
    };
    let file = ChannelFile {
        format: FORMAT,
        dim,
        vectorization: "row-major".into(),
        matrix: MatrixJson::from_matrix(&ch.matrix),
    };
    write_json(out, &file)?;
    Ok(format!("wrote {kind:?} channel of dim {dim} to {}", out.display()))
}

pub fn plan(dim: usize, out: Option<&Path>) -> Result<String, CliError> {
    let plan = MeasurementPlan::for_dimension(dim)?;
    let lines: Vec<PlanLine> =
        plan.lines.iter().zip(&plan.matrices).map(|(l, m)| PlanLine { a: l.a, c: l.c, m: m.entries() }).collect();
    let text = serde_json::to_string_pretty(&serde_json::json!({ "format": FORMAT, "dim": dim, "lines": lines }))
        .map_err(|e| CliError::Parse(e.to_string()))?;
    match out {
        Some(p) => {
            write_text(p, &(text + "\n"))?;
            Ok(format!("wrote {} lines to {}", lines.len(), p.display()))
        }
        None => Ok(text),
    }
}
