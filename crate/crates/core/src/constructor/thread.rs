//! Pointwise roots threaded into continuous fields over the chart grid, and
//! the top-level construction driver.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::ambient::AmbientKind;
use super::lift::{lift_from_rule, HeightRule, LiftSource, LiftedImmersion};
use super::polynomial::{curvature_polynomial, solve_roots};
use crate::config::Tolerances;
use crate::hypersurface::{frame_at, pattern_over_grid, spectrum_at, HypersurfaceImmersion, PatternSummary};
use crate::{GeomError, Result};

/// Roots at every chart sample, indexed by the chart's flat order.
#[derive(Debug, Clone, PartialEq)]
pub struct RootThreads {
    /// `None` for excluded or failed samples.
    pub values: Vec<Option<Vec<f64>>>,
    /// Root count seen at the usable samples.
    pub count: usize,
    pub failed: usize,
}

fn roots_at(imm: &HypersurfaceImmersion, kind: AmbientKind, x: &[f64], tol: &Tolerances) -> Result<Vec<f64>> {
    let frame = frame_at(imm, x, tol)?;
    let spec = spectrum_at(&frame, tol)?;
    let poly = curvature_polynomial(&spec, kind, tol)?;
    let set = solve_roots(&poly, tol.tol_root)?;
    if set.roots.iter().any(|r| r.degenerate) {
        return Err(GeomError::ConstructionConsistency("degenerate root".into()));
    }
    Ok(set.values())
}

/// Solves at every sample and checks that the roots form continuous fields:
/// constant count, and no neighbour jump larger than `thread_jump_factor` times
/// the adjacent jumps along the same axis.
pub fn thread_roots(imm: &HypersurfaceImmersion, kind: AmbientKind, tol: &Tolerances) -> Result<RootThreads> {
    let chart = &imm.chart;
    let values: Vec<Option<Vec<f64>>> = chart
        .samples()
        .par_iter()
        .map(|x| {
            if chart.is_excluded(x) {
                None
            } else {
                roots_at(imm, kind, x, tol).ok()
            }
        })
        .collect();
    let failed = values.iter().filter(|v| v.is_none()).count();
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for v in values.iter().flatten() {
        *counts.entry(v.len()).or_insert(0) += 1;
    }
    if counts.len() > 1 {
        return Err(GeomError::ConstructionConsistency(format!(
            "root count changes across the chart: {counts:?} (count -> samples)"
        )));
    }
    let count = counts.keys().next().copied().unwrap_or(0);

    for axis in 0..chart.dim() {
        for start in 0..chart.len() {
            let idx = chart.multi_index(start);
            if idx[axis] != 0 {
                continue;
            }
            let line: Vec<Option<&Vec<f64>>> = (0..chart.resolution[axis])
                .map(|i| {
                    let mut j = idx.clone();
                    j[axis] = i;
                    values[chart.flat_index(&j)].as_ref()
                })
                .collect();
            for k in 0..count {
                check_line(&line, k, tol.thread_jump_factor)?;
            }
        }
    }
    Ok(RootThreads { values, count, failed })
}

fn check_line(line: &[Option<&Vec<f64>>], k: usize, factor: f64) -> Result<()> {
    let diffs: Vec<Option<(f64, f64, f64)>> = line
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => Some(((b[k] - a[k]).abs(), a[k], b[k])),
            _ => None,
        })
        .collect();
    for j in 0..diffs.len() {
        let Some((d, from, to)) = diffs[j] else { continue };
        let prev = if j > 0 { diffs[j - 1].map(|v| v.0) } else { None };
        let next = diffs.get(j + 1).copied().flatten().map(|v| v.0);
        let local = match (prev, next) {
            (None, None) => continue,
            (a, b) => a.unwrap_or(0.0).max(b.unwrap_or(0.0)),
        };
        if d > factor * local + 1e-12 * (1.0 + from.abs().max(to.abs())) {
            return Err(GeomError::ThreadBreak { from, to });
        }
    }
    Ok(())
}

/// Outcome of [`construct_lifts`].
#[derive(Debug, Clone)]
pub struct Construction {
    pub lifts: Vec<LiftedImmersion>,
    pub threads: RootThreads,
    pub pattern: PatternSummary,
    pub warnings: Vec<String>,
}

/// One lift per threaded root field, each checked against its ambient constraint.
pub fn construct_lifts(imm: &HypersurfaceImmersion, kind: AmbientKind, tol: &Tolerances) -> Result<Construction> {
    tol.validate()?;
    let pattern = pattern_over_grid(imm, tol);
    let mut warnings = Vec::new();
    if !pattern.is_constant() {
        warnings.push(format!(
            "multiplicity pattern changes across the chart: {:?}",
            pattern.patterns
        ));
    }
    let threads = thread_roots(imm, kind, tol)?;
    if threads.count == 0 {
        warnings.push(format!(
            "no {} roots: the curvature polynomial has no admissible solution (pattern {:?})",
            kind,
            pattern.dominant().unwrap_or_default()
        ));
    }
    let mut lifts = Vec::with_capacity(threads.count);
    for k in 0..threads.count {
        let mut lift = lift_from_rule(imm, kind, HeightRule::Root(k), tol)?;
        lift.provenance.degenerate_samples = threads.failed;
        check_constraints(&lift, tol)?;
        lifts.push(lift);
    }
    Ok(Construction {
        lifts,
        threads,
        pattern,
        warnings,
    })
}

/// Constraint residual at every usable sample must stay below `tol_constraint`.
pub fn check_constraints(lift: &LiftedImmersion, tol: &Tolerances) -> Result<()> {
    let worst = lift
        .chart
        .samples()
        .par_iter()
        .filter(|x| !lift.chart.is_excluded(x))
        .filter_map(|x| lift.eval_at(x).ok())
        .map(|y| {
            let sig = lift.ambient.container_signature;
            lift.ambient.constraint_residual(&y) / (1.0 + sig.dot(&y, &y).abs())
        })
        .reduce(|| 0.0, f64::max);
    if worst > tol.tol_constraint {
        return Err(GeomError::ConstructionConsistency(format!(
            "ambient constraint residual {worst:e} exceeds {:e}",
            tol.tol_constraint
        )));
    }
    Ok(())
}

impl LiftSource {
    /// Threaded roots of this source's hypersurface.
    pub fn threads(&self) -> Result<RootThreads> {
        thread_roots(&self.hypersurface, self.kind, &self.tol)
    }
}
