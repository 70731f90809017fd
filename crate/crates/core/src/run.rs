//! The `construct`, `verify` and `catalog` commands as library calls.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::catalog::{catalog_filter, catalog_lookup_in, parse_params, Built, CatalogEntry, EntryKind};
use crate::constructor::{construct_lifts, AmbientKind, LiftedImmersion};
use crate::io::{mesh_deviation, mesh_from_lift, timestamp, ConfigEcho, LiftRow, Mesh, RunReport, MEAN_CURVATURE_CONVENTION};
use crate::verifier::{assemble_report, Verdict};
use crate::{GeomError, Tolerances};

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Fail = 1,
    Inconclusive = 2,
    Usage = 3,
    Pipeline = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("mesh {path} does not match its entry (deviation {deviation:e})")]
    MeshMismatch { path: PathBuf, deviation: f64 },
}

impl RunError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            RunError::Usage(_) | RunError::Io { .. } => ExitStatus::Usage,
            RunError::MeshMismatch { .. } => ExitStatus::Pipeline,
            RunError::Geom(e) => match e.root_cause() {
                GeomError::UnknownEntry(_)
                | GeomError::ParamConstraint(_)
                | GeomError::Parse(_)
                | GeomError::UnsupportedAmbient(_)
                | GeomError::MissingRoot { .. } => ExitStatus::Usage,
                GeomError::Argument(_) if matches!(e, GeomError::Argument(_)) => ExitStatus::Usage,
                _ => ExitStatus::Pipeline,
            },
        }
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

/// Settings for one command. `None` fields fall back to entry or mesh defaults.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub entry: Option<String>,
    pub params: BTreeMap<String, String>,
    pub ambient: Option<AmbientKind>,
    pub grid: Option<Vec<usize>>,
    pub step: Option<f64>,
    pub tol_marginal: Option<f64>,
    pub out_dir: PathBuf,
    pub root_index: Option<usize>,
    pub expect: Option<Verdict>,
    pub mesh: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(entry: &str) -> Self {
        Self {
            entry: Some(entry.to_string()),
            out_dir: PathBuf::from("."),
            ..Self::default()
        }
    }

    pub fn tolerances(&self) -> RunResult<Tolerances> {
        let mut tol = Tolerances::default();
        if let Some(h) = self.step {
            tol = tol.with_step(h);
        }
        if let Some(t) = self.tol_marginal {
            tol = tol.with_tol_marginal(t);
        }
        tol.validate().map_err(|e| RunError::Usage(e.to_string()))?;
        Ok(tol)
    }

    fn entry_name(&self) -> RunResult<&str> {
        self.entry.as_deref().ok_or_else(|| RunError::Usage("--entry is required".into()))
    }
}

/// `NxM` (or `N`, `NxMxK`) into per-axis resolutions, each at least 3.
pub fn parse_grid(s: &str) -> RunResult<Vec<usize>> {
    let grid = s
        .split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>().map_err(|_| RunError::Usage(format!("bad grid `{s}`; expected NxM"))))
        .collect::<RunResult<Vec<usize>>>()?;
    if grid.iter().any(|&g| g < 3) {
        return Err(RunError::Usage(format!("grid `{s}`: every resolution must be at least 3")));
    }
    Ok(grid)
}

/// What a command did.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: ExitStatus,
    pub reports: Vec<RunReport>,
    pub files: Vec<PathBuf>,
    pub messages: Vec<String>,
}

fn write_file(path: &Path, text: &str) -> RunResult<()> {
    std::fs::write(path, text).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn build_entry(cfg: &RunConfig) -> RunResult<CatalogEntry> {
    let mut entry = catalog_lookup_in(cfg.entry_name()?, &cfg.params, cfg.ambient)?;
    if let Some(grid) = &cfg.grid {
        if grid.len() != entry.chart().dim() {
            return Err(RunError::Usage(format!(
                "grid has {} axes, `{}` needs {}",
                grid.len(),
                entry.name(),
                entry.chart().dim()
            )));
        }
        entry = entry.with_resolution(grid.clone())?;
    }
    Ok(entry)
}

fn status_of(verdicts: &[Verdict], expect: Option<Verdict>) -> ExitStatus {
    let want = expect.unwrap_or(Verdict::MarginallyTrapped);
    if verdicts.iter().all(|v| *v == want) {
        ExitStatus::Pass
    } else if verdicts.iter().any(|v| *v == Verdict::Inconclusive) {
        ExitStatus::Inconclusive
    } else {
        ExitStatus::Fail
    }
}

fn base_report(command: &str, entry: &CatalogEntry, ambient: AmbientKind, tol: &Tolerances, cfg: &RunConfig) -> RunReport {
    RunReport {
        generated_at: timestamp(),
        command: command.to_string(),
        entry: entry.name().to_string(),
        params: entry.params_string(),
        ambient: ambient.to_string(),
        mean_curvature_convention: MEAN_CURVATURE_CONVENTION.to_string(),
        verdict: None,
        expected_verdict: cfg.expect,
        warnings: entry.warnings.clone(),
        config: ConfigEcho {
            grid: entry.chart().resolution.clone(),
            root_index: cfg.root_index,
            mesh: cfg.mesh.as_ref().map(|p| p.display().to_string()),
            tolerances: *tol,
        },
        lifts: Vec::new(),
    }
}

fn file_stem(entry: &CatalogEntry, ambient: AmbientKind, root: Option<usize>) -> String {
    match root {
        Some(k) => format!("{}-{}-root{k}", entry.name(), ambient),
        None => format!("{}-{}", entry.name(), ambient),
    }
}

/// Builds every lift of the entry (or the one selected by `root_index`),
/// verifies it, and writes one mesh and one report per lift.
pub fn cmd_construct(cfg: &RunConfig) -> RunResult<RunOutcome> {
    let tol = cfg.tolerances()?;
    let entry = build_entry(cfg)?;
    let ambient = cfg
        .ambient
        .or(entry.ambient())
        .ok_or_else(|| RunError::Usage(format!("`{}` has no ambient", entry.name())))?;
    let mut warnings = entry.warnings.clone();
    let lifts: Vec<LiftedImmersion> = match &entry.built {
        Built::Lift(l) => vec![l.clone()],
        Built::Hypersurface { imm, .. } => {
            let c = construct_lifts(imm, ambient, &tol)?;
            warnings.extend(c.warnings);
            match cfg.root_index {
                Some(k) if k >= c.lifts.len() => {
                    return Err(GeomError::MissingRoot {
                        index: k,
                        available: c.lifts.len(),
                    }
                    .into())
                }
                Some(k) => vec![c.lifts[k].clone()],
                None => c.lifts,
            }
        }
    };
    std::fs::create_dir_all(&cfg.out_dir).map_err(|source| RunError::Io {
        path: cfg.out_dir.clone(),
        source,
    })?;

    let mut out = RunOutcome {
        status: ExitStatus::Pass,
        reports: Vec::new(),
        files: Vec::new(),
        messages: Vec::new(),
    };
    if lifts.is_empty() {
        // nothing to verify: recorded, but not a failure
        let mut report = base_report("construct", &entry, ambient, &tol, cfg);
        report.warnings = warnings.clone();
        let path = cfg.out_dir.join(format!("{}.toml", file_stem(&entry, ambient, None)));
        write_file(&path, &report.to_toml()?)?;
        out.files.push(path);
        out.reports.push(report);
        out.messages.extend(warnings.iter().map(|w| format!("warning: {w}")));
        out.messages.push(format!("{} in {ambient}: 0 lifts", entry.name()));
        return Ok(out);
    }

    let mut verdicts = Vec::new();
    for lift in &lifts {
        let report = assemble_report(lift, &tol)?;
        let stem = file_stem(&entry, ambient, lift.provenance.root_index);
        let mesh_path = cfg.out_dir.join(format!("{stem}.mesh"));
        let mesh = mesh_from_lift(lift, &report, entry.name(), &entry.params_string(), &tol)?;
        write_file(&mesh_path, &mesh.to_text())?;

        let mut row = LiftRow::new(lift, &report);
        row.mesh = mesh_path.file_name().map(|f| f.to_string_lossy().into_owned());
        let mut run = base_report("construct", &entry, ambient, &tol, cfg);
        run.warnings = warnings.clone();
        run.verdict = Some(report.verdict());
        run.config.root_index = lift.provenance.root_index;
        run.lifts.push(row);
        let report_path = cfg.out_dir.join(format!("{stem}.toml"));
        write_file(&report_path, &run.to_toml()?)?;

        out.messages.push(format!(
            "{stem}: {} (max null residual {})",
            report.verdict(),
            report.summary.null_residual.map_or("n/a".into(), |s| format!("{:.3e}", s.max))
        ));
        verdicts.push(report.verdict());
        out.files.push(mesh_path);
        out.files.push(report_path);
        out.reports.push(run);
    }
    out.messages.extend(warnings.iter().map(|w| format!("warning: {w}")));
    out.status = status_of(&verdicts, None);
    Ok(out)
}

/// Verifies a catalog lift, or re-ingests a mesh and verifies it at its stored grid.
pub fn cmd_verify(cfg: &RunConfig) -> RunResult<RunOutcome> {
    let mut cfg = cfg.clone();
    let mesh = match &cfg.mesh {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
                path: path.clone(),
                source,
            })?;
            let mesh = Mesh::parse(&text)?;
            let h = &mesh.header;
            if cfg.entry.as_ref().is_some_and(|e| *e != h.entry) {
                return Err(RunError::Usage(format!("--entry conflicts with mesh entry `{}`", h.entry)));
            }
            cfg.entry = Some(h.entry.clone());
            if cfg.params.is_empty() {
                cfg.params = parse_params(&h.params)?;
            }
            cfg.ambient = cfg.ambient.or(Some(h.ambient));
            cfg.grid = Some(h.grid.clone());
            cfg.root_index = cfg.root_index.or(h.root_index);
            cfg.step = cfg.step.or(Some(h.step));
            cfg.tol_marginal = cfg.tol_marginal.or(Some(h.tol_marginal));
            Some((path.clone(), mesh))
        }
        None => None,
    };
    let tol = cfg.tolerances()?;
    let entry = build_entry(&cfg)?;
    let root = match (&entry.built, cfg.root_index) {
        (Built::Hypersurface { .. }, None) => 0,
        (_, k) => k.unwrap_or(0),
    };
    let lift = entry.lift(cfg.ambient, root, &tol)?;
    let ambient = lift.ambient.kind;

    let mut row_deviation = None;
    if let Some((path, mesh)) = &mesh {
        let deviation = mesh_deviation(mesh, &lift)?;
        if !(deviation <= 1e-9) {
            return Err(RunError::MeshMismatch {
                path: path.clone(),
                deviation,
            });
        }
        row_deviation = Some(deviation);
    }

    let report = assemble_report(&lift, &tol)?;
    let mut row = LiftRow::new(&lift, &report);
    row.mesh_coordinate_residual = row_deviation;
    let mut run = base_report("verify", &entry, ambient, &tol, &cfg);
    run.verdict = Some(report.verdict());
    run.lifts.push(row);

    std::fs::create_dir_all(&cfg.out_dir).map_err(|source| RunError::Io {
        path: cfg.out_dir.clone(),
        source,
    })?;
    let stem = file_stem(&entry, ambient, lift.provenance.root_index);
    let path = cfg.out_dir.join(format!("{stem}-verify.toml"));
    write_file(&path, &run.to_toml()?)?;

    let status = status_of(&[report.verdict()], cfg.expect);
    let mut messages: Vec<String> = run.warnings.iter().map(|w| format!("warning: {w}")).collect();
    messages.push(format!(
        "{stem}: {} (max null residual {}){}",
        report.verdict(),
        report.summary.null_residual.map_or("n/a".into(), |s| format!("{:.3e}", s.max)),
        cfg.expect.map_or(String::new(), |e| format!(", expected {e}"))
    ));
    Ok(RunOutcome {
        status,
        reports: vec![run],
        files: vec![path],
        messages,
    })
}

/// Listing of entries whose name contains `filter`.
pub fn cmd_catalog_list(filter: &str) -> String {
    let mut out = String::new();
    for e in catalog_filter(filter) {
        let kind = match e.kind {
            EntryKind::Hypersurface(k) => format!("hypersurface in {k}"),
            EntryKind::Lift => "lift".to_string(),
        };
        let _ = writeln!(out, "{}  [{kind}]", e.name);
        let _ = writeln!(out, "    {}", e.citation);
        for p in e.params {
            let _ = writeln!(out, "    {}={}  {}", p.name, p.default, p.doc);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("64x32").unwrap(), vec![64, 32]);
        assert!(parse_grid("2x8").is_err());
        assert!(parse_grid("ax8").is_err());
    }

    #[test]
    fn status_rules() {
        use Verdict::*;
        assert_eq!(status_of(&[MarginallyTrapped, MarginallyTrapped], None), ExitStatus::Pass);
        assert_eq!(status_of(&[MarginallyTrapped, NotMarginal], None), ExitStatus::Fail);
        assert_eq!(status_of(&[Inconclusive], None), ExitStatus::Inconclusive);
        assert_eq!(status_of(&[NotMarginal], Some(NotMarginal)), ExitStatus::Pass);
        assert_eq!(status_of(&[MarginallyTrapped], Some(NotMarginal)), ExitStatus::Fail);
    }

    #[test]
    fn error_classes() {
        let usage = RunError::from(GeomError::UnknownEntry("x".into()));
        assert_eq!(usage.exit_status(), ExitStatus::Usage);
        let pipe = RunError::from(GeomError::FrameError { det: 0.0 }.at("frame", &[0.0]));
        assert_eq!(pipe.exit_status(), ExitStatus::Pipeline);
    }

    #[test]
    fn listing_is_deterministic() {
        let a = cmd_catalog_list("");
        assert_eq!(a, cmd_catalog_list(""));
        assert!(a.contains("chen-l4") && a.contains("palmer-sphere"));
        assert!(!cmd_catalog_list("chen").contains("torus"));
    }
}
