use std::fs;
use std::path::{Path, PathBuf};

use polybounds_core::attain::{attain_with, AdOutcome, Construction};
use polybounds_core::bounds::{rectangle, BoundsRectangle, Corner};
use polybounds_core::corners_bc::{
    disk_coverage_sweep, upper_frame, CoverageOptions, CoverageReport, Portion,
};
use polybounds_core::laminate::{evaluate_tree, verify_attainment};
use polybounds_core::{voigt_to_rho, Error, RhoTensor, Tolerances, VoigtTensor, C64};
use serde::{Deserialize, Serialize};

use crate::config::{Command, RunConfig, SweepConfig};
use crate::error::{CliError, CliResult};
use crate::output::{emit_json, tagged, write_file, CsvTable};
use crate::svg::{self, Tail};

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    match cfg.command {
        Command::Bounds => bounds(cfg),
        Command::Attain => attain(cfg),
        Command::Trajectories => trajectories(cfg),
        Command::Verify => verify(cfg),
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn input(cfg: &RunConfig) -> CliResult<&Path> {
    cfg.input
        .as_deref()
        .ok_or_else(|| CliError::Config("--input is required".into()))
}

/// Reads a crystal and checks that it is a positive-definite elasticity tensor.
pub fn load_crystal(path: &Path) -> CliResult<(VoigtTensor, RhoTensor)> {
    let v: VoigtTensor = read_json(path)?;
    let entries = [v.c1111, v.c1122, v.c1112, v.c2222, v.c2212, v.c1212];
    if entries.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            message: "crystal entries must be finite".into(),
        });
    }
    if !v.is_positive_definite() {
        return Err(Error::NotPositiveDefinite.into());
    }
    Ok((v, voigt_to_rho(&v)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsSummary {
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    pub mu_minus: f64,
    pub mu_plus: f64,
}

impl BoundsSummary {
    fn of(rect: &BoundsRectangle) -> BoundsSummary {
        BoundsSummary {
            kappa_minus: rect.kappa_minus(),
            kappa_plus: rect.kappa_plus(),
            mu_minus: rect.mu_minus(),
            mu_plus: rect.mu_plus(),
        }
    }

    fn values(&self) -> [(&'static str, f64); 4] {
        [
            ("kappa-", self.kappa_minus),
            ("kappa+", self.kappa_plus),
            ("mu-", self.mu_minus),
            ("mu+", self.mu_plus),
        ]
    }
}

#[derive(Debug, Serialize)]
struct BoundsReport {
    command: &'static str,
    crystal: VoigtTensor,
    bounds: BoundsSummary,
    /// Both intervals shrink to a point (isotropic crystals).
    degenerate: bool,
    alpha1: f64,
    beta1: f64,
    rectangle: BoundsRectangle,
}

fn bounds(cfg: &RunConfig) -> CliResult<()> {
    let (crystal, c0) = load_crystal(input(cfg)?)?;
    let rect = rectangle(&c0, &cfg.search)?;
    let b = BoundsSummary::of(&rect);
    let spread = (b.kappa_plus - b.kappa_minus)
        .abs()
        .max((b.mu_plus - b.mu_minus).abs());
    let degenerate = spread <= cfg.tol.global * b.kappa_plus.abs().max(b.mu_plus.abs());
    eprintln!(
        "kappa in [{:.10}, {:.10}], mu in [{:.10}, {:.10}]{}",
        b.kappa_minus,
        b.kappa_plus,
        b.mu_minus,
        b.mu_plus,
        if degenerate { " (degenerate)" } else { "" }
    );
    let report = BoundsReport {
        command: "bounds",
        crystal,
        bounds: b,
        degenerate,
        alpha1: rect.alpha1,
        beta1: rect.beta1,
        rectangle: rect,
    };
    emit_json(&report, cfg.output.as_deref())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEntry {
    pub category: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CornerStatus {
    /// Laminate built and every attainment condition holds.
    Attained,
    /// Degenerate branch described by parameters instead of a laminate tree.
    Special,
    ChecksFailed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerEntry {
    pub corner: Corner,
    pub status: CornerStatus,
    pub max_residual: Option<f64>,
    pub error: Option<ErrorEntry>,
    pub construction: Option<Construction>,
}

/// Contents of the file written by `attain` and read back by `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionFile {
    pub command: String,
    pub crystal: VoigtTensor,
    pub rays: usize,
    pub tolerances: Tolerances,
    pub bounds: BoundsSummary,
    pub corners: Vec<CornerEntry>,
}

fn attain(cfg: &RunConfig) -> CliResult<()> {
    let (crystal, c0) = load_crystal(input(cfg)?)?;
    let rect = rectangle(&c0, &cfg.search)?;
    let mut first_error: Option<CliError> = None;
    let mut corners = Vec::new();
    for &corner in &cfg.corners {
        let entry = match attain_with(&c0, corner, &rect, &cfg.tol) {
            Ok(construction) => {
                let (status, max_residual) = match construction.report() {
                    Some(r) if r.passed => (CornerStatus::Attained, Some(r.max_residual())),
                    Some(r) => {
                        first_error.get_or_insert(CliError::Verification(format!(
                            "corner {corner}: attainment checks failed (max residual {:.3e})",
                            r.max_residual()
                        )));
                        (CornerStatus::ChecksFailed, Some(r.max_residual()))
                    }
                    None => (CornerStatus::Special, None),
                };
                CornerEntry {
                    corner,
                    status,
                    max_residual,
                    error: None,
                    construction: Some(construction),
                }
            }
            Err(e) => {
                let error = ErrorEntry {
                    category: e.category().into(),
                    message: e.to_string(),
                };
                first_error.get_or_insert(CliError::Core(e));
                CornerEntry {
                    corner,
                    status: CornerStatus::Failed,
                    max_residual: None,
                    error: Some(error),
                    construction: None,
                }
            }
        };
        eprintln!(
            "corner {}: {:?}{}",
            entry.corner,
            entry.status,
            entry
                .max_residual
                .map(|r| format!(" (max residual {r:.3e})"))
                .unwrap_or_default()
        );
        corners.push(entry);
    }
    let file = ConstructionFile {
        command: "attain".into(),
        crystal,
        rays: cfg.search.rays,
        tolerances: cfg.tol,
        bounds: BoundsSummary::of(&rect),
        corners,
    };
    emit_json(&file, cfg.output.as_deref())?;
    first_error.map_or(Ok(()), Err)
}

/// Thinned run of consecutive samples of one family member.
#[derive(Debug, Clone)]
struct Segment {
    member: usize,
    zi: f64,
    zr: f64,
    portion: Portion,
    samples: Vec<(f64, C64)>,
}

#[derive(Debug, Serialize)]
struct SweepEntry {
    alpha1: f64,
    coverage: CoverageReport,
    plotted_members: usize,
    csv: PathBuf,
    svg: PathBuf,
}

#[derive(Debug, Serialize)]
struct TrajectoriesReport {
    command: &'static str,
    /// Bulk coordinate of the input crystal in its corner-B frame.
    crystal_point: Option<C64>,
    sweeps: Vec<SweepEntry>,
}

fn sweep(alpha1: f64, s: &SweepConfig) -> polybounds_core::Result<(CoverageReport, Vec<Segment>)> {
    let opts = CoverageOptions {
        zi_count: s.zi_count,
        zi_range: s.zi_range,
        points_per_tail: s.points_per_tail,
        grid: s.grid,
        epsilon: s.epsilon,
        emit_loops: true,
    };
    let member_stride = (2 * s.zi_count).div_ceil(s.plot_members).max(1);
    let point_stride = (s.points_per_tail / 100).max(1);
    let mut segments: Vec<Segment> = Vec::new();
    let mut index = 0usize;
    let report = disk_coverage_sweep(alpha1, &opts, |x| {
        if x.member % member_stride != 0 {
            return;
        }
        match segments.last_mut() {
            Some(seg) if seg.member == x.member && seg.portion == x.portion => index += 1,
            _ => {
                index = 0;
                segments.push(Segment {
                    member: x.member,
                    zi: x.zi,
                    zr: x.zr,
                    portion: x.portion,
                    samples: Vec::new(),
                });
            }
        }
        if index % point_stride == 0 {
            segments
                .last_mut()
                .expect("segment pushed above")
                .samples
                .push((x.t, x.c1_prime));
        }
    })?;
    Ok((report, segments))
}

fn trajectories(cfg: &RunConfig) -> CliResult<()> {
    let mut alphas = cfg.sweep.alpha1.clone();
    let mut crystal_point = None;
    if let Some(path) = &cfg.input {
        let (_, c0) = load_crystal(path)?;
        let rect = rectangle(&c0, &cfg.search)?;
        let (_, c1) = upper_frame(&c0, Corner::B, &rect)?;
        crystal_point = Some(c1);
        if alphas.is_empty() {
            alphas.push(rect.alpha1);
        }
    }
    let base_csv = cfg.csv.clone().unwrap_or_else(|| match &cfg.output {
        Some(o) => o.with_extension("csv"),
        None => PathBuf::from("trajectories.csv"),
    });
    let base_svg = cfg
        .svg
        .clone()
        .unwrap_or_else(|| base_csv.with_extension("svg"));
    let name = |base: &Path, a: f64| {
        if alphas.len() == 1 {
            base.to_path_buf()
        } else {
            tagged(base, &format!("a{a}"))
        }
    };

    // One sweep per weight, in parallel; results are collected in input order.
    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = alphas
            .iter()
            .map(|&a| scope.spawn(move || sweep(a, &cfg.sweep)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep thread panicked"))
            .collect()
    });

    let mut sweeps = Vec::new();
    for (&alpha1, result) in alphas.iter().zip(results) {
        let (coverage, segments) = result?;
        let mut table = CsvTable::new();
        let mut tails = Vec::new();
        for seg in &segments {
            let on_loop = seg.portion == Portion::Loop;
            for &(t, p) in &seg.samples {
                table.row(seg.zi, seg.zr, t, p.re, p.im, on_loop);
            }
            if !on_loop {
                tails.push(Tail {
                    points: seg.samples.iter().map(|s| s.1).collect(),
                    leading: seg.portion == Portion::Leading,
                });
            }
        }
        let (csv, svg_path) = (name(&base_csv, alpha1), name(&base_svg, alpha1));
        write_file(&csv, table.as_str())?;
        let title = format!("alpha1 = {alpha1}, coverage {:.4}", coverage.coverage);
        write_file(&svg_path, &svg::render(&title, &tails, crystal_point))?;
        let mut members: Vec<usize> = segments.iter().map(|s| s.member).collect();
        members.dedup();
        eprintln!(
            "alpha1 = {alpha1}: {} looping members, coverage {:.4} within {} ({} x {} grid)",
            coverage.looping_members,
            coverage.coverage,
            coverage.epsilon,
            cfg.sweep.grid,
            cfg.sweep.grid
        );
        sweeps.push(SweepEntry {
            alpha1,
            coverage,
            plotted_members: members.len(),
            csv,
            svg: svg_path,
        });
    }
    emit_json(
        &TrajectoriesReport {
            command: "trajectories",
            crystal_point,
            sweeps,
        },
        cfg.output.as_deref(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub scope: String,
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    command: &'static str,
    checks: Vec<CheckLine>,
    passed: bool,
}

fn relative_gap(a: &RhoTensor, b: &RhoTensor) -> f64 {
    (a.0 - b.0).norm() / b.norm()
}

fn check(out: &mut Vec<CheckLine>, scope: &str, name: &str, value: f64, tolerance: f64) {
    // NaN fails.
    let passed = value.abs() <= tolerance;
    out.push(CheckLine {
        scope: scope.into(),
        name: name.into(),
        value,
        tolerance,
        passed,
    });
}

/// Residual checks for a stored construction, recomputed from the stored crystal.
pub fn verify_file(file: &ConstructionFile, tol: &Tolerances) -> CliResult<Vec<CheckLine>> {
    let c0 = voigt_to_rho(&file.crystal);
    let rect = rectangle(&c0, &polybounds_core::SearchOptions { rays: file.rays })?;
    let fresh = BoundsSummary::of(&rect);
    let mut out = Vec::new();
    for ((name, stored), (_, now)) in file.bounds.values().iter().zip(fresh.values()) {
        check(
            &mut out,
            "bounds",
            name,
            (stored - now) / now.abs().max(f64::MIN_POSITIVE),
            tol.residual,
        );
    }
    for entry in &file.corners {
        let scope = format!("corner {}", entry.corner);
        let Some(construction) = &entry.construction else {
            continue;
        };
        let Some(c_prime) = construction.c_prime() else {
            continue;
        };
        let trees: Vec<(&str, _)> = match construction {
            Construction::LowerBulk(a) => match &a.outcome {
                AdOutcome::Laminate { trees, .. } => {
                    vec![
                        ("self-similar tree = C'", &trees.self_similar),
                        ("mirror-pair tree = C'", &trees.mirror_pair),
                    ]
                }
                _ => Vec::new(),
            },
            Construction::UpperBulk(b) => vec![("laminate tree = C'", &b.tree)],
        };
        for (name, tree) in trees {
            let gap = match tree.validate().and_then(|_| evaluate_tree(tree, &c0, tol)) {
                Ok(t) => relative_gap(&t, c_prime),
                Err(_) => f64::INFINITY,
            };
            check(&mut out, &scope, name, gap, tol.residual);
        }
        match verify_attainment(c_prime, entry.corner, &rect, tol) {
            Ok(report) => {
                for c in report.conditions {
                    let value = if c.name.ends_with(">= 0") {
                        (-c.value).max(0.0)
                    } else {
                        c.value
                    };
                    check(&mut out, &scope, &c.name, value, c.tolerance);
                }
            }
            Err(e) => check(
                &mut out,
                &scope,
                &format!("stored C' usable ({})", e.category()),
                f64::INFINITY,
                0.0,
            ),
        }
    }
    Ok(out)
}

fn verify(cfg: &RunConfig) -> CliResult<()> {
    let file: ConstructionFile = read_json(input(cfg)?)?;
    let checks = verify_file(&file, &cfg.tol)?;
    for c in &checks {
        eprintln!(
            "{:<10} {:<26} {:>12.3e}  tol {:.1e}  {}",
            c.scope,
            c.name,
            c.value,
            c.tolerance,
            if c.passed { "ok" } else { "FAIL" }
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let passed = failed == 0;
    emit_json(
        &VerifyReport {
            command: "verify",
            checks,
            passed,
        },
        cfg.output.as_deref(),
    )?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Verification(format!("{failed} check(s) failed")))
    }
}
