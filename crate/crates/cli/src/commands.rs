use std::fmt::Write as _;
use std::path::Path;

use projection_core::config::BRUTE_FORCE_MAX_ORDER;
use projection_core::lalg::{brute_force_determinant, lu_factor, replaced_determinant, solve_columns, DenseMatrix, LalgError};
use projection_core::projector::{
    integral_projector_matrix, lowdin_projector_matrix, radial_moment, radial_moment_normalization,
    radial_moment_target,
};
use projection_core::spectrum::{energy_spectrum, Route, SpectrumError, SpectrumRequest, SpectrumResult};

use crate::format::{half_integer, number, parse_half_integer};
use crate::model_file::ModelFile;
use crate::{CliError, Format};

/// Text report plus the status the command should exit with.
pub struct Report {
    pub text: String,
    pub status: Result<(), CliError>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub const CSV_HEADER: &str = "twoJ,normKernel,energyBrillouin,energyLowdin,brillouinResidual";

fn parse_j_list(text: &str) -> Result<Option<Vec<u32>>, CliError> {
    if text.trim() == "auto" {
        return Ok(None);
    }
    text.split(',').map(parse_half_integer).collect::<Result<Vec<_>, _>>().map(Some)
}

fn spectrum_error(e: SpectrumError) -> CliError {
    match e {
        SpectrumError::InvalidJ { .. } | SpectrumError::EmptyJList | SpectrumError::TooFewPoints { .. } => {
            CliError::Parse(e.to_string())
        }
        SpectrumError::AllNormsVanish | SpectrumError::ManyBody(_) => CliError::Numerical(e.to_string()),
    }
}

pub fn spectrum(
    path: &Path,
    points: usize,
    route: Route,
    j: &str,
    format: Format,
    err: &mut dyn std::io::Write,
) -> Result<String, CliError> {
    let file = ModelFile::parse(&read(path)?)?;
    let model = file.to_model()?;
    let two_js = parse_j_list(j)?;
    let req = SpectrumRequest::new(&model, two_js, points, route).map_err(spectrum_error)?;
    let result = energy_spectrum(&req).map_err(spectrum_error)?;
    for w in &result.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok(match format {
        Format::Csv => spectrum_csv(&result),
        Format::Table => spectrum_table(&file.name, points, &result),
    })
}

pub fn spectrum_csv(result: &SpectrumResult) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut s = format!("{CSV_HEADER}\n");
    for line in &result.lines {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            line.two_j,
            line.norm_kernel,
            opt(line.energy_brillouin),
            opt(line.energy_lowdin),
            result.brillouin_residual_max
        );
    }
    s
}

fn spectrum_table(name: &str, points: usize, result: &SpectrumResult) -> String {
    let mut s = String::new();
    if !name.is_empty() {
        let _ = writeln!(s, "model: {name}");
    }
    let _ = writeln!(
        s,
        "M = {}   points = {points}   E_HF = {}   max Brillouin residual = {:.3e}",
        half_integer_signed(result.two_m),
        number(result.hf_energy),
        result.brillouin_residual_max
    );
    let _ = writeln!(s, "{:>6} {:>18} {:>18} {:>20} {:>20}", "J", "n_J", "weight", "E_J (Brillouin)", "E_J (Lowdin)");
    let opt = |v: Option<f64>| v.map(number).unwrap_or_else(|| "-".into());
    for line in &result.lines {
        let _ = writeln!(
            s,
            "{:>6} {:>18} {:>18} {:>20} {:>20}",
            half_integer(line.two_j),
            format!("{:.10e}", line.norm_kernel),
            number(line.weight),
            opt(line.energy_brillouin),
            opt(line.energy_lowdin)
        );
    }
    s
}

fn half_integer_signed(two_m: i32) -> String {
    let body = half_integer(two_m.unsigned_abs());
    if two_m < 0 {
        format!("-{body}")
    } else {
        body
    }
}

fn read_rows(path: &Path, what: &str) -> Result<Vec<Vec<f64>>, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Parse(format!("{what} {}: {e}", path.display())))
}

fn lalg_error(e: LalgError) -> CliError {
    match e {
        LalgError::SingularMatrix { .. } => CliError::Singular(e.to_string()),
        _ => CliError::Parse(e.to_string()),
    }
}

pub fn cramer(matrix_path: &Path, rhs_path: &Path, columns: &[usize]) -> Result<Report, CliError> {
    let rows = read_rows(matrix_path, "matrix")?;
    let rhs = read_rows(rhs_path, "right-hand sides")?;
    let a = DenseMatrix::from_rows(&rows).map_err(lalg_error)?;
    if !a.is_square() {
        return Err(CliError::Parse(format!("matrix is {}x{}, expected square", a.rows(), a.cols())));
    }
    let n = a.rows();
    if rhs.len() != columns.len() {
        return Err(CliError::Parse(format!("{} right-hand sides for {} columns", rhs.len(), columns.len())));
    }
    if let Some(b) = rhs.iter().find(|b| b.len() != n) {
        return Err(CliError::Parse(format!("right-hand side of length {} for an order-{n} matrix", b.len())));
    }
    let cols = columns
        .iter()
        .map(|&c| {
            if c == 0 || c > n {
                Err(CliError::Parse(format!("column {c} outside 1..{n}")))
            } else {
                Ok(c - 1)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rhs_rows: Vec<usize> = (0..rhs.len()).collect();

    let lu = lu_factor(&a).map_err(lalg_error)?;
    let x = solve_columns(&lu, &rhs).map_err(lalg_error)?;
    let replaced = replaced_determinant(lu.determinant(), &x, &rhs_rows, &cols).map_err(lalg_error)?;

    let mut text = String::new();
    let _ = writeln!(text, "det(A) = {}", number(lu.determinant()));
    let _ = writeln!(text, "minor x(k, i):");
    let minor = x.minor_matrix(&rhs_rows, &cols);
    for r in 0..minor.rows() {
        let row: Vec<String> = minor.row(r).iter().map(|&v| number(v)).collect();
        let _ = writeln!(text, "  {}", row.join("  "));
    }
    let _ = writeln!(text, "replaced determinant = {}", number(replaced));
    let mut status = Ok(());
    if n <= BRUTE_FORCE_MAX_ORDER {
        let mut substituted = a.clone();
        for (b, &c) in rhs.iter().zip(&cols) {
            substituted = substituted.with_column(c, b);
        }
        let oracle = brute_force_determinant(&substituted).map_err(lalg_error)?;
        let diff = (oracle - replaced).abs();
        let matches = diff <= 1e-10 * oracle.abs() || diff <= 1e-12;
        let _ = writeln!(text, "cofactor expansion = {}", number(oracle));
        let _ = writeln!(text, "oracle: {}", if matches { "match" } else { "MISMATCH" });
        if !matches {
            status = Err(CliError::Numerical(format!("Cramer result {replaced} differs from cofactor value {oracle}")));
        }
    } else {
        let _ = writeln!(text, "oracle: skipped (n > {BRUTE_FORCE_MAX_ORDER})");
    }
    Ok(Report { text, status })
}

pub struct ProjectorCheckConfig {
    pub two_j_max: u32,
    pub two_m_max: Option<u32>,
    pub radial_points: usize,
    pub angular_points: usize,
    pub series_tol: f64,
    pub integral_tol: f64,
    pub leak_tol: f64,
    pub radial_tol: f64,
}

/// Largest `2j` the projector checks accept.
pub const CHECK_MAX_TWO_J: u32 = 20;

/// Extra `2l` kept above the target when truncating the axial space.
const TRUNCATION_MARGIN: u32 = 6;

/// Highest radial power checked in the radial identity.
const RADIAL_MAX_POWER: usize = 4;

pub fn check_projectors(cfg: &ProjectorCheckConfig) -> Result<Report, CliError> {
    if cfg.two_j_max > CHECK_MAX_TWO_J {
        return Err(CliError::Parse(format!(
            "jmax = {} exceeds {}",
            half_integer(cfg.two_j_max),
            half_integer(CHECK_MAX_TWO_J)
        )));
    }
    if cfg.radial_points == 0 || cfg.angular_points == 0 {
        return Err(CliError::Parse("quadrature point counts must be positive".into()));
    }
    let two_m_max = cfg.two_m_max.unwrap_or(cfg.two_j_max);
    let mut text = format!(
        "{:>5} {:>5} {:>12} {:>12} {:>12} {:>12} {:>12}  status\n",
        "j", "m", "idempotence", "extraction", "integral", "leakage", "radial"
    );
    let mut failures = Vec::new();
    for two_j in 0..=cfg.two_j_max {
        for two_m in (two_j % 2..=two_j.min(two_m_max)).step_by(2) {
            let two_m = two_m as i32;
            let two_l_max = two_j + TRUNCATION_MARGIN;
            let numerical = |e: projection_core::projector::ProjectorError| CliError::Numerical(e.to_string());
            let p = lowdin_projector_matrix(two_j, two_m, two_l_max).map_err(numerical)?;
            let mut idempotence = 0.0_f64;
            let mut extraction = 0.0_f64;
            for slot in 0..p.rows() {
                let v = p[(slot, slot)];
                let two_l = two_m as u32 + 2 * slot as u32;
                let want = if two_l == two_j { 1.0 } else { 0.0 };
                idempotence = idempotence.max((v * v - v).abs());
                extraction = extraction.max((v - want).abs());
            }
            let disk = integral_projector_matrix(two_j, two_m, two_l_max, cfg.radial_points, cfg.angular_points)
                .map_err(numerical)?;
            let norm = radial_moment_normalization(two_j, two_m).map_err(numerical)?;
            let mut radial = 0.0_f64;
            for r in 0..=RADIAL_MAX_POWER {
                let target = radial_moment_target(two_j, r);
                let moment = radial_moment(two_j, two_m, r, cfg.radial_points).map_err(numerical)?;
                radial = radial.max(((norm * moment - target) / target).abs());
            }
            let ok = idempotence <= cfg.series_tol
                && extraction <= cfg.series_tol
                && disk.series_deviation <= cfg.integral_tol
                && disk.leakage <= cfg.leak_tol
                && radial <= cfg.radial_tol;
            let (j, m) = (half_integer(two_j), half_integer(two_m as u32));
            let _ = writeln!(
                text,
                "{j:>5} {m:>5} {idempotence:>12.2e} {extraction:>12.2e} {:>12.2e} {:>12.2e} {radial:>12.2e}  {}",
                disk.series_deviation,
                disk.leakage,
                if ok { "ok" } else { "FAIL" }
            );
            if !ok {
                failures.push(format!("(j={j}, m={m})"));
            }
        }
    }
    let status = if failures.is_empty() {
        let _ = writeln!(text, "all checks passed");
        Ok(())
    } else {
        let _ = writeln!(text, "failed: {}", failures.join(" "));
        Err(CliError::Numerical(format!("projector checks failed for {}", failures.join(" "))))
    };
    Ok(Report { text, status })
}
