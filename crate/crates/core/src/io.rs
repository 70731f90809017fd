//! Plain-text mesh tables and structured run reports.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::constructor::{AmbientKind, LiftedImmersion};
use crate::verifier::{MarginalityReport, Stat, Verdict};
use crate::{GeomError, Result, Tolerances};

pub const MESH_MAGIC: &str = "# marginal mesh v1";

/// Averaged-trace convention used for every mean curvature vector.
pub const MEAN_CURVATURE_CONVENTION: &str = "H = (1/n) tr_g h";

/// Metadata carried in the `#` lines of a mesh file; enough to rebuild the lift.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshHeader {
    pub entry: String,
    pub params: String,
    pub ambient: AmbientKind,
    pub root_index: Option<usize>,
    pub grid: Vec<usize>,
    pub step: f64,
    pub tol_marginal: f64,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshRow {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `None` where the sample was excluded.
    pub null_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub header: MeshHeader,
    pub rows: Vec<MeshRow>,
}

fn mesh_columns(n: usize, dim: usize) -> Vec<String> {
    (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=dim).map(|i| format!("y{i}")))
        .chain(std::iter::once("null_residual".to_string()))
        .collect()
}

/// One row per chart sample, in the chart's flat order. `report` must come
/// from the same lift and chart.
pub fn mesh_from_lift(lift: &LiftedImmersion, report: &MarginalityReport, entry: &str, params: &str, tol: &Tolerances) -> Result<Mesh> {
    let samples = lift.chart.samples();
    if samples.len() != report.points.len() {
        return Err(GeomError::Dimension {
            expected: samples.len(),
            found: report.points.len(),
        });
    }
    let dim = lift.ambient.container_signature.dim();
    let rows = samples
        .iter()
        .zip(&report.points)
        .map(|(x, rec)| MeshRow {
            x: x.clone(),
            y: lift.eval_at(x).unwrap_or_else(|_| vec![f64::NAN; dim]),
            null_residual: rec.null_residual(),
        })
        .collect();
    Ok(Mesh {
        header: MeshHeader {
            entry: entry.to_string(),
            params: params.to_string(),
            ambient: lift.ambient.kind,
            root_index: lift.provenance.root_index,
            grid: lift.chart.resolution.clone(),
            step: tol.step,
            tol_marginal: tol.tol_marginal,
            columns: mesh_columns(lift.chart.dim(), dim),
        },
        rows,
    })
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.17e}")
    }
}

impl Mesh {
    pub fn to_text(&self) -> String {
        let h = &self.header;
        let mut out = String::new();
        let grid: Vec<String> = h.grid.iter().map(|g| g.to_string()).collect();
        let root = h.root_index.map_or("none".to_string(), |k| k.to_string());
        let _ = writeln!(out, "{MESH_MAGIC}");
        let _ = writeln!(out, "# entry: {}", h.entry);
        let _ = writeln!(out, "# params: {}", h.params);
        let _ = writeln!(out, "# ambient: {}", h.ambient);
        let _ = writeln!(out, "# root_index: {root}");
        let _ = writeln!(out, "# grid: {}", grid.join("x"));
        let _ = writeln!(out, "# step: {:e}", h.step);
        let _ = writeln!(out, "# tol_marginal: {:e}", h.tol_marginal);
        let _ = writeln!(out, "# columns: {}", h.columns.join(" "));
        for r in &self.rows {
            let cells: Vec<String> = r
                .x
                .iter()
                .chain(&r.y)
                .copied()
                .chain(std::iter::once(r.null_residual.unwrap_or(f64::NAN)))
                .map(num)
                .collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MESH_MAGIC) {
            return Err(GeomError::Parse(format!("mesh must start with `{MESH_MAGIC}`")));
        }
        let mut fields = std::collections::BTreeMap::new();
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.split_once(':') {
                    fields.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            let vals = line
                .split_whitespace()
                .map(|c| c.parse::<f64>().map_err(|_| GeomError::Parse(format!("mesh line {}: bad number `{c}`", lineno + 2))))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(vals);
        }
        let get = |k: &str| -> Result<&String> { fields.get(k).ok_or_else(|| GeomError::Parse(format!("mesh header lacks `{k}`"))) };
        let bad = |k: &str, v: &str| GeomError::Parse(format!("mesh header `{k}`: cannot read `{v}`"));
        let grid = get("grid")?
            .split('x')
            .map(|g| g.trim().parse::<usize>().map_err(|_| bad("grid", g)))
            .collect::<Result<Vec<usize>>>()?;
        let root_index = match get("root_index")?.as_str() {
            "none" => None,
            v => Some(v.parse().map_err(|_| bad("root_index", v))?),
        };
        let step_s = get("step")?;
        let tol_s = get("tol_marginal")?;
        let header = MeshHeader {
            entry: get("entry")?.clone(),
            params: fields.get("params").cloned().unwrap_or_default(),
            ambient: get("ambient")?.parse()?,
            root_index,
            step: step_s.parse().map_err(|_| bad("step", step_s))?,
            tol_marginal: tol_s.parse().map_err(|_| bad("tol_marginal", tol_s))?,
            columns: get("columns")?.split_whitespace().map(String::from).collect(),
            grid,
        };
        let n = header.columns.iter().filter(|c| c.starts_with('x')).count();
        let dim = header.columns.iter().filter(|c| c.starts_with('y')).count();
        if header.columns.len() != n + dim + 1 || header.columns.last().map(String::as_str) != Some("null_residual") {
            return Err(GeomError::Parse(format!("unexpected mesh columns {:?}", header.columns)));
        }
        if n != header.grid.len() {
            return Err(GeomError::Parse(format!("grid {:?} does not match {n} chart columns", header.grid)));
        }
        let expected: usize = header.grid.iter().product();
        if rows.len() != expected {
            return Err(GeomError::Parse(format!("mesh has {} rows, grid needs {expected}", rows.len())));
        }
        let rows = rows
            .into_iter()
            .map(|v| {
                if v.len() != n + dim + 1 {
                    return Err(GeomError::Parse(format!("row has {} cells, expected {}", v.len(), n + dim + 1)));
                }
                let r = v[n + dim];
                Ok(MeshRow {
                    x: v[..n].to_vec(),
                    y: v[n..n + dim].to_vec(),
                    null_residual: (!r.is_nan()).then_some(r),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { header, rows })
    }
}

/// Largest deviation of stored sample coordinates and ambient points from a
/// fresh evaluation of `lift`, relative to `1 + |y|`.
pub fn mesh_deviation(mesh: &Mesh, lift: &LiftedImmersion) -> Result<f64> {
    let samples = lift.chart.samples();
    if samples.len() != mesh.rows.len() {
        return Err(GeomError::Dimension {
            expected: samples.len(),
            found: mesh.rows.len(),
        });
    }
    let mut worst: f64 = 0.0;
    for (x, row) in samples.iter().zip(&mesh.rows) {
        let dx = x.iter().zip(&row.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(dx);
        if row.y.iter().any(|v| v.is_nan()) {
            continue;
        }
        let y = lift.eval_at(x)?;
        if y.len() != row.y.len() {
            return Err(GeomError::Dimension {
                expected: y.len(),
                found: row.y.len(),
            });
        }
        let scale = 1.0 + y.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let dy = y.iter().zip(&row.y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(dy / scale);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstPoint {
    pub x: Vec<f64>,
    pub null_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_eig_g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hvec_norm_sq: Option<f64>,
}

/// Summary row for one lift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root_index: Option<usize>,
    pub route: String,
    pub note: String,
    pub verdict: Verdict,
    pub samples: usize,
    pub excluded: usize,
    pub spacelike_violations: usize,
    pub degenerate_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh_coordinate_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_eig_g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_exclusion: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_residual: Option<Stat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_residual_primary: Option<Stat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_residual_opposite: Option<Stat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hvec_norm_sq: Option<Stat>,
    #[serde(rename = "eqH_residual", skip_serializing_if = "Option::is_none")]
    pub eq_h_residual: Option<Stat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma_metric_residual: Option<Stat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma_secondform_residual: Option<Stat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub legendrian_residual: Option<Stat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primary_mismatch: Option<Stat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_point: Option<WorstPoint>,
}

impl LiftRow {
    pub fn new(lift: &LiftedImmersion, report: &MarginalityReport) -> Self {
        let s = &report.summary;
        Self {
            root_index: lift.provenance.root_index,
            route: lift.provenance.route.to_string(),
            note: lift.provenance.note.clone(),
            verdict: s.verdict,
            samples: s.samples,
            excluded: s.excluded,
            spacelike_violations: s.spacelike_violations,
            degenerate_samples: lift.provenance.degenerate_samples,
            mesh: None,
            mesh_coordinate_residual: None,
            min_eig_g: s.min_eig_g,
            first_exclusion: report.points.iter().find_map(|p| p.error.clone()),
            null_residual: s.null_residual,
            null_residual_primary: s.null_residual_primary,
            null_residual_opposite: s.null_residual_opposite,
            hvec_norm_sq: s.hvec_norm_sq,
            eq_h_residual: s.eq_h_residual,
            lemma_metric_residual: s.lemma_metric_residual,
            lemma_secondform_residual: s.lemma_secondform_residual,
            legendrian_residual: s.legendrian_residual,
            primary_mismatch: s.primary_mismatch,
            worst_point: report.worst_point().map(|p| WorstPoint {
                x: p.x.clone(),
                null_residual: p.null_residual().unwrap_or(f64::NAN),
                min_eig_g: p.min_eig,
                hvec_norm_sq: p.hvec_norm_sq,
            }),
        }
    }
}

/// Echo of the settings a run used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub grid: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<String>,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Only field that differs between identical runs.
    pub generated_at: String,
    pub command: String,
    pub entry: String,
    pub params: String,
    pub ambient: String,
    pub mean_curvature_convention: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_verdict: Option<Verdict>,
    pub warnings: Vec<String>,
    pub config: ConfigEcho,
    pub lifts: Vec<LiftRow>,
}

impl RunReport {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| GeomError::Parse(format!("report serialization: {e}")))
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| GeomError::Parse(format!("report: {e}")))
    }
}

/// RFC 3339 timestamp for `generated_at`.
pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructor::null_lift;
    use crate::geometry::{Chart, ScalarMap};
    use crate::verifier::assemble_report;
    use std::sync::Arc;

    fn sample_lift() -> LiftedImmersion {
        let chart = Chart::rect((-1.0, 1.0), (-0.5, 0.5), (4, 3)).unwrap();
        let tau: ScalarMap = Arc::new(|x: &[f64]| Ok(x[0] * x[1] + 0.1));
        null_lift(AmbientKind::Minkowski, chart, None, tau).unwrap()
    }

    #[test]
    fn mesh_round_trip_is_exact() {
        let tol = Tolerances::default();
        let lift = sample_lift();
        let report = assemble_report(&lift, &tol).unwrap();
        let mesh = mesh_from_lift(&lift, &report, "null-lift", "tau=x*y+0.1", &tol).unwrap();
        let text = mesh.to_text();
        assert!(text.lines().nth(8).unwrap().starts_with("# columns: x1 x2 y1 y2 y3 y4 null_residual"));
        let back = Mesh::parse(&text).unwrap();
        assert_eq!(back, mesh);
        assert_eq!(mesh_deviation(&back, &lift).unwrap(), 0.0);
    }

    #[test]
    fn malformed_meshes_are_rejected() {
        let tol = Tolerances::default();
        let lift = sample_lift();
        let report = assemble_report(&lift, &tol).unwrap();
        let text = mesh_from_lift(&lift, &report, "null-lift", "", &tol).unwrap().to_text();
        assert!(Mesh::parse("0 1 2").is_err());
        assert!(Mesh::parse(&text.replace("# grid: 4x3", "# grid: 4x4")).is_err());
        assert!(Mesh::parse(&text.replace("# ambient: minkowski", "# ambient: flat")).is_err());
        let truncated: String = text.lines().take(12).map(|l| format!("{l}\n")).collect();
        assert!(Mesh::parse(&truncated).is_err());
    }

    #[test]
    fn report_serializes_with_fixed_field_names() {
        let tol = Tolerances::default();
        let lift = sample_lift();
        let report = assemble_report(&lift, &tol).unwrap();
        let run = RunReport {
            generated_at: timestamp(),
            command: "verify".into(),
            entry: "null-lift".into(),
            params: String::new(),
            ambient: "minkowski".into(),
            mean_curvature_convention: MEAN_CURVATURE_CONVENTION.into(),
            verdict: Some(report.verdict()),
            expected_verdict: None,
            warnings: vec![],
            config: ConfigEcho {
                grid: vec![4, 3],
                root_index: None,
                mesh: None,
                tolerances: tol,
            },
            lifts: vec![LiftRow::new(&lift, &report)],
        };
        let text = run.to_toml().unwrap();
        for key in ["min_eig_g", "null_residual", "hvec_norm_sq", "verdict = \"marginally_trapped\""] {
            assert!(text.contains(key), "{key} missing from\n{text}");
        }
        assert_eq!(RunReport::from_toml(&text).unwrap(), run);
    }
}
