//! Measurement on simulated fields: zero contours, junction position,
//! dihedral angles, junction velocity, boundary profiles, and
//! partition-of-unity defects.
//!
//! Contours come from marching squares with linear interpolation along
//! cell edges; the ambiguous saddle cases are resolved by the sign of the
//! cell-center average. Crossing points are computed once per grid edge
//! in a canonical orientation, so segments from neighboring cells share
//! endpoints bit-for-bit and chain into polylines exactly.
//!
//! A triple junction is located by minimizing the largest `|psi_i|` over
//! the phases (bilinear interpolation plus a deterministic local zoom),
//! and dihedral angles are read from the pairwise difference fields
//! `psi_i - psi_j`, whose zero contours continue smoothly through the
//! junction core where the individual contours break up. Points inside
//! an annulus around the junction, restricted to where the two phases of
//! the pair dominate the third, are fitted by a least-squares ray.

use std::collections::HashMap;
use std::path::Path;

use crate::analytic;
use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::levelset::{heaviside, Phase};

/// Polylines of a zero contour, in physical coordinates. Closed paths
/// repeat their first point at the end.
#[derive(Clone, Debug, Default)]
pub struct Contour {
    pub paths: Vec<Vec<[f64; 2]>>,
}

impl Contour {
    pub fn total_points(&self) -> usize {
        self.paths.iter().map(|p| p.len()).sum()
    }

    pub fn points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.paths.iter().flatten().copied()
    }

    /// Sum of enclosed areas of the closed paths (shoelace, unsigned).
    pub fn closed_area(&self) -> f64 {
        let mut total = 0.0;
        for path in &self.paths {
            if path.len() > 3 && path.first() == path.last() {
                let mut a = 0.0;
                for w in path.windows(2) {
                    a += w[0][0] * w[1][1] - w[1][0] * w[0][1];
                }
                total += 0.5 * a.abs();
            }
        }
        total
    }
}

/// Marching-squares zero contour of `psi`.
pub fn extract_contour(psi: &ScalarField) -> Result<Contour> {
    if psi.min() >= 0.0 || psi.max() <= 0.0 {
        return Err(Error::NoInterface);
    }
    let g = psi.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let inside = |v: f64| v >= 0.0;

    // Canonical crossing on the edge from node a to node b (a before b in
    // row-major order), exact zeros landing on the node itself.
    let crossing = |ia: usize, ja: usize, ib: usize, jb: usize| -> [f64; 2] {
        let va = psi.get(ia, ja);
        let vb = psi.get(ib, jb);
        let t = va / (va - vb);
        let (xa, ya) = (g.x(ia), g.y(ja));
        let (xb, yb) = (g.x(ib), g.y(jb));
        [xa + t * (xb - xa), ya + t * (yb - ya)]
    };

    let mut segments: Vec<([f64; 2], [f64; 2])> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let v00 = psi.get(i, j);
            let v10 = psi.get(i + 1, j);
            let v11 = psi.get(i + 1, j + 1);
            let v01 = psi.get(i, j + 1);
            let mask = (inside(v00) as usize)
                | (inside(v10) as usize) << 1
                | (inside(v11) as usize) << 2
                | (inside(v01) as usize) << 3;
            if mask == 0 || mask == 15 {
                continue;
            }
            // Edge crossings, computed lazily per case.
            let bottom = || crossing(i, j, i + 1, j);
            let right = || crossing(i + 1, j, i + 1, j + 1);
            let top = || crossing(i, j + 1, i + 1, j + 1);
            let left = || crossing(i, j, i, j + 1);
            let mut emit = |a: [f64; 2], b: [f64; 2]| {
                if a != b {
                    segments.push((a, b));
                }
            };
            match mask {
                1 => emit(left(), bottom()),
                2 => emit(bottom(), right()),
                3 => emit(left(), right()),
                4 => emit(right(), top()),
                6 => emit(bottom(), top()),
                7 => emit(left(), top()),
                8 => emit(left(), top()),
                9 => emit(bottom(), top()),
                11 => emit(right(), top()),
                12 => emit(left(), right()),
                13 => emit(bottom(), right()),
                14 => emit(left(), bottom()),
                5 | 10 => {
                    let center_in = inside(0.25 * (v00 + v10 + v11 + v01));
                    let pairs: [([f64; 2], [f64; 2]); 2] = if (mask == 5) == center_in {
                        [(left(), top()), (bottom(), right())]
                    } else {
                        [(left(), bottom()), (top(), right())]
                    };
                    emit(pairs[0].0, pairs[0].1);
                    emit(pairs[1].0, pairs[1].1);
                }
                _ => unreachable!(),
            }
        }
    }
    Ok(chain_segments(segments))
}

fn point_key(p: [f64; 2]) -> (u64, u64) {
    (p[0].to_bits(), p[1].to_bits())
}

/// Chains a segment soup into polylines. Endpoints match bit-for-bit by
/// construction; lookup uses a map but walking follows segment insertion
/// order, so output is deterministic.
fn chain_segments(segments: Vec<([f64; 2], [f64; 2])>) -> Contour {
    let mut at_point: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        at_point.entry(point_key(*a)).or_default().push(k);
        at_point.entry(point_key(*b)).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut paths = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = segments[start];
        let mut path = vec![a, b];
        // Extend forward from the tail, then backward from the head.
        for dir in 0..2 {
            loop {
                let end = if dir == 0 { *path.last().unwrap() } else { path[0] };
                let Some(candidates) = at_point.get(&point_key(end)) else { break };
                let Some(&next) = candidates.iter().find(|&&k| !used[k]) else { break };
                used[next] = true;
                let (na, nb) = segments[next];
                let other = if point_key(na) == point_key(end) { nb } else { na };
                if dir == 0 {
                    path.push(other);
                } else {
                    path.insert(0, other);
                }
                if point_key(path[0]) == point_key(*path.last().unwrap()) {
                    break; // closed loop
                }
            }
        }
        paths.push(path);
    }
    Contour { paths }
}

/// Junction residual `max_i |psi_i|` interpolated at a point.
fn junction_residual(phases: &[Phase], p: [f64; 2]) -> f64 {
    phases.iter().map(|ph| ph.psi.bilinear(p[0], p[1]).abs()).fold(0.0, f64::max)
}

/// Locates the junction of three or more phases as the minimizer of
/// `max_i |psi_i|`: a coarse node scan followed by a deterministic
/// bilinear zoom. Errors if the best residual still exceeds one cell.
pub fn locate_tj(phases: &[Phase]) -> Result<[f64; 2]> {
    if phases.len() < 3 {
        return Err(Error::NoJunction(format!(
            "need at least 3 phases to form a junction, got {}",
            phases.len()
        )));
    }
    let g = phases[0].psi.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let mut best = f64::INFINITY;
    let mut best_node = [0.0, 0.0];
    for j in 0..ny {
        for i in 0..nx {
            let m = phases.iter().map(|ph| ph.psi.get(i, j).abs()).fold(0.0, f64::max);
            if m < best {
                best = m;
                best_node = g.pos(i, j);
            }
        }
    }
    // Pattern zoom: sample a shrinking 9x9 box around the best point.
    let mut center = best_node;
    let mut half = g.h();
    for _ in 0..10 {
        let mut local_best = junction_residual(phases, center);
        let mut local_pt = center;
        for sj in -4i32..=4 {
            for si in -4i32..=4 {
                let p = [
                    center[0] + si as f64 * half / 4.0,
                    center[1] + sj as f64 * half / 4.0,
                ];
                let m = junction_residual(phases, p);
                if m < local_best {
                    local_best = m;
                    local_pt = p;
                }
            }
        }
        center = local_pt;
        half *= 0.5;
    }
    if junction_residual(phases, center) > g.h() {
        return Err(Error::NoJunction(format!(
            "residual {:.3e} exceeds one cell {:.3e}",
            junction_residual(phases, center),
            g.h()
        )));
    }
    Ok(center)
}

/// Ray fit through `origin`: principal direction of the scatter, oriented
/// toward the point cloud. Returns the ray angle.
fn fit_ray(origin: [f64; 2], points: &[[f64; 2]]) -> f64 {
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (qx, qy) = (p[0] - origin[0], p[1] - origin[1]);
        sxx += qx * qx;
        sxy += qx * qy;
        syy += qy * qy;
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (ux, uy) = (theta.cos(), theta.sin());
    let along: f64 = points.iter().map(|p| (p[0] - origin[0]) * ux + (p[1] - origin[1]) * uy).sum();
    if along >= 0.0 {
        uy.atan2(ux)
    } else {
        (-uy).atan2(-ux)
    }
}

fn wrap_tau(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut x = a % tau;
    if x < 0.0 {
        x += tau;
    }
    x
}

/// Dihedral angles `xi[k]` of the three grains at junction `tj`, from
/// pairwise difference-field contours fitted as rays over the annulus
/// `r_in <= |p - tj| <= r_out`.
pub fn dihedral_angles(phases: &[Phase], tj: [f64; 2], r_in: f64, r_out: f64) -> Result<[f64; 3]> {
    if phases.len() != 3 {
        return Err(Error::NoJunction(format!(
            "dihedral angles need exactly 3 phases, got {}",
            phases.len()
        )));
    }
    if !(r_in > 0.0 && r_out > r_in) {
        return Err(Error::Domain(format!("invalid annulus [{r_in}, {r_out}]")));
    }
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let mut ray_angle = [0.0f64; 3];
    for (pi, &(a, b)) in pairs.iter().enumerate() {
        let diff = phases[a].psi.zip_map(&phases[b].psi, |x, y| x - y);
        let contour = extract_contour(&diff).map_err(|_| {
            Error::InsufficientData(format!("no boundary contour between phases {a} and {b}"))
        })?;
        let third = 3 - a - b;
        let mut pts = Vec::new();
        for path in &contour.paths {
            for w in path.windows(2) {
                let mid = [0.5 * (w[0][0] + w[1][0]), 0.5 * (w[0][1] + w[1][1])];
                let r = (mid[0] - tj[0]).hypot(mid[1] - tj[1]);
                if r < r_in || r > r_out {
                    continue;
                }
                let va = phases[a].psi.bilinear(mid[0], mid[1]);
                let vb = phases[b].psi.bilinear(mid[0], mid[1]);
                let vc = phases[third].psi.bilinear(mid[0], mid[1]);
                // Keep only the true boundary branch: both phases of the
                // pair must dominate the third (the equality ridge
                // continuing past the junction fails this).
                if vc <= va.min(vb) {
                    pts.push(mid);
                }
            }
        }
        if pts.len() < 4 {
            return Err(Error::InsufficientData(format!(
                "only {} contour points on boundary {a}-{b} in the annulus, need 4",
                pts.len()
            )));
        }
        ray_angle[pi] = fit_ray(tj, &pts);
    }

    // Grain k is bounded by the two rays of its adjacent boundaries; pick
    // the sector (of the two candidates) whose midpoint lies in grain k.
    let rays_of_grain = [(0usize, 1usize), (0, 2), (1, 2)]; // indices into ray_angle
    let mut xi = [0.0f64; 3];
    let rho = 0.5 * (r_in + r_out);
    for k in 0..3 {
        let (ra, rb) = rays_of_grain[k];
        let (a1, a2) = (ray_angle[ra], ray_angle[rb]);
        let delta = wrap_tau(a2 - a1);
        let mut best_margin = f64::NEG_INFINITY;
        let mut best_angle = delta;
        for (mid, angle) in [
            (a1 + 0.5 * delta, delta),
            (a1 + 0.5 * delta + std::f64::consts::PI, std::f64::consts::TAU - delta),
        ] {
            let q = [tj[0] + rho * mid.cos(), tj[1] + rho * mid.sin()];
            let vk = phases[k].psi.bilinear(q[0], q[1]);
            let other = (0..3)
                .filter(|&m| m != k)
                .map(|m| phases[m].psi.bilinear(q[0], q[1]))
                .fold(f64::NEG_INFINITY, f64::max);
            let margin = vk - other;
            if margin > best_margin {
                best_margin = margin;
                best_angle = angle;
            }
        }
        xi[k] = best_angle;
    }
    Ok(xi)
}

/// One junction measurement along a trajectory.
#[derive(Clone, Copy, Debug)]
pub struct TJRecord {
    pub t: f64,
    pub pos: [f64; 2],
    pub xi: [f64; 3],
    /// Signed instantaneous slope of the junction height, if known.
    pub v_inst: f64,
    pub quasi_static: bool,
}

/// Junction velocity over the trailing `window` records.
#[derive(Clone, Copy, Debug)]
pub struct VelocityEstimate {
    /// Signed least-squares slope of junction height versus time.
    pub v: f64,
    pub quasi_static: bool,
}

/// Velocity magnitude below which a junction counts as stationary; the
/// relative slope-agreement test degenerates at equilibria.
pub const STATIONARY_FLOOR: f64 = 1e-3;

/// Maximum dihedral-angle range (radians) over the window for the state
/// to count as quasi-static: 0.5 degrees.
pub const ANGLE_DRIFT_LIMIT: f64 = 0.5 * std::f64::consts::PI / 180.0;

fn lsq_slope(records: &[TJRecord]) -> f64 {
    let n = records.len() as f64;
    let tm: f64 = records.iter().map(|r| r.t).sum::<f64>() / n;
    let ym: f64 = records.iter().map(|r| r.pos[1]).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for r in records {
        num += (r.t - tm) * (r.pos[1] - ym);
        den += (r.t - tm) * (r.t - tm);
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Least-squares junction velocity over the trailing `window` records,
/// flagged quasi-static when the slopes of the two window halves agree
/// within 1% (or both sit under [`STATIONARY_FLOOR`]) and no dihedral
/// angle ranges more than [`ANGLE_DRIFT_LIMIT`] across the window.
pub fn tj_velocity(records: &[TJRecord], window: usize) -> Result<VelocityEstimate> {
    if window < 4 {
        return Err(Error::InsufficientData(format!("window {window} too short, need 4")));
    }
    if records.len() < window {
        return Err(Error::InsufficientData(format!(
            "{} records, need a full window of {window}",
            records.len()
        )));
    }
    let tail = &records[records.len() - window..];
    let v = lsq_slope(tail);
    let half = window / 2;
    let s1 = lsq_slope(&tail[..half]);
    let s2 = lsq_slope(&tail[half..]);
    let slope_ok =
        (s1 - s2).abs() < 0.01 * s1.abs().max(s2.abs()) || s1.abs().max(s2.abs()) < STATIONARY_FLOOR;
    let mut drift_ok = true;
    for k in 0..3 {
        let lo = tail.iter().map(|r| r.xi[k]).fold(f64::INFINITY, f64::min);
        let hi = tail.iter().map(|r| r.xi[k]).fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > ANGLE_DRIFT_LIMIT {
            drift_ok = false;
        }
    }
    Ok(VelocityEstimate { v, quasi_static: slope_ok && drift_ok })
}

/// Samples the top-grain boundary height `y(x)` at `n` uniform stations
/// across the grid width. Phase 0 is the top grain; its boundary is the
/// union of the 0-1 and 0-2 difference contours.
pub fn sample_profile(phases: &[Phase], n: usize) -> Result<Vec<[f64; 2]>> {
    if phases.len() != 3 {
        return Err(Error::InsufficientData(format!(
            "profile sampling needs 3 phases, got {}",
            phases.len()
        )));
    }
    if n < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 stations, got {n}")));
    }
    let g = phases[0].psi.grid();
    let h = g.h();
    // Collect dominance-filtered boundary segments of the top grain.
    let mut segs: Vec<([f64; 2], [f64; 2])> = Vec::new();
    for &b in &[1usize, 2] {
        let diff = phases[0].psi.zip_map(&phases[b].psi, |x, y| x - y);
        let contour = extract_contour(&diff)
            .map_err(|_| Error::InsufficientData(format!("no boundary between phases 0 and {b}")))?;
        let third = 3 - b;
        for path in &contour.paths {
            for w in path.windows(2) {
                let mid = [0.5 * (w[0][0] + w[1][0]), 0.5 * (w[0][1] + w[1][1])];
                let va = phases[0].psi.bilinear(mid[0], mid[1]);
                let vb = phases[b].psi.bilinear(mid[0], mid[1]);
                let vc = phases[third].psi.bilinear(mid[0], mid[1]);
                if vc <= va.min(vb) {
                    segs.push((w[0], w[1]));
                }
            }
        }
    }
    if segs.is_empty() {
        return Err(Error::InsufficientData("no top-boundary segments found".into()));
    }
    let x0 = g.origin()[0];
    let span = g.x_max() - x0;
    let mut profile = Vec::with_capacity(n);
    let mut gap_start: Option<f64> = None;
    let mut widest_gap = 0.0f64;
    for s in 0..n {
        let xs = x0 + span * s as f64 / (n - 1) as f64;
        // Average the y of every segment straddling this station.
        let (mut sum, mut count) = (0.0, 0);
        for (a, b) in &segs {
            let (xa, xb) = (a[0], b[0]);
            if (xa - xs) * (xb - xs) <= 0.0 && (xa - xb).abs() > 0.0 {
                let t = (xs - xa) / (xb - xa);
                sum += a[1] + t * (b[1] - a[1]);
                count += 1;
            }
        }
        if count > 0 {
            profile.push([xs, sum / count as f64]);
            gap_start = None;
        } else {
            let start = *gap_start.get_or_insert(xs);
            widest_gap = widest_gap.max(xs - start + span / (n - 1) as f64);
        }
    }
    if widest_gap > 2.0 * h {
        return Err(Error::InsufficientData(format!(
            "top boundary has a gap of {widest_gap:.3e}, wider than 2h = {:.3e}",
            2.0 * h
        )));
    }
    if profile.len() < 3 {
        return Err(Error::InsufficientData("fewer than 3 profile stations resolved".into()));
    }
    Ok(profile)
}

/// RMS distance between a measured profile and the analytic translating
/// profile of speed `v`, after aligning both vertically at the junction
/// station `x = 0`. Stations are mapped to the normalized `[-1/2, 1/2]`
/// domain by centering the measured x range.
pub fn profile_rms_vs_analytic(profile: &[[f64; 2]], v: f64) -> Result<f64> {
    if profile.len() < 3 {
        return Err(Error::InsufficientData("need at least 3 profile points".into()));
    }
    let xmin = profile.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let xmax = profile.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (xmin + xmax);
    let width = xmax - xmin;
    if !(width > 0.0) {
        return Err(Error::InsufficientData("profile has zero width".into()));
    }
    // Measured height at the junction station (x nearest the center).
    let y_tj = profile
        .iter()
        .min_by(|a, b| {
            (a[0] - mid).abs().partial_cmp(&(b[0] - mid).abs()).unwrap()
        })
        .unwrap()[1];
    let a_tj = analytic::garcke_profile(0.0, 0.0, v)?;
    let mut sq = 0.0;
    for p in profile {
        let xn = ((p[0] - mid) / width).clamp(-0.5, 0.5);
        let a = analytic::garcke_profile(xn, 0.0, v)?;
        let d = (p[1] - y_tj) - (a - a_tj);
        sq += d * d;
    }
    Ok((sq / profile.len() as f64).sqrt())
}

/// Partition-of-unity defect of the smoothed indicators.
#[derive(Clone, Copy, Debug, Default)]
pub struct DefectReport {
    pub max_vacuum: f64,
    pub max_overlap: f64,
    /// Trapezoid integral of `|1 - sum H|` over the reported area.
    pub l1_defect: f64,
}

/// Node-wise vacuum/overlap extrema and L1 defect, skipping disks of
/// `exclusion_radius` around the given junction points (the indicator sum
/// is legitimately non-unital in a junction core).
pub fn vacuum_overlap_report(
    phases: &[Phase],
    eps: f64,
    junctions: &[[f64; 2]],
    exclusion_radius: f64,
) -> DefectReport {
    let g = phases[0].psi.grid();
    let mut report = DefectReport::default();
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let p = g.pos(i, j);
            if junctions
                .iter()
                .any(|c| (p[0] - c[0]).hypot(p[1] - c[1]) < exclusion_radius)
            {
                continue;
            }
            let s: f64 = phases.iter().map(|ph| heaviside(ph.psi.get(i, j), eps)).sum();
            report.max_vacuum = report.max_vacuum.max(1.0 - s);
            report.max_overlap = report.max_overlap.max(s - 1.0);
            report.l1_defect += g.node_weight(i, j) * (1.0 - s).abs() * g.dx() * g.dy();
        }
    }
    report.max_vacuum = report.max_vacuum.max(0.0);
    report.max_overlap = report.max_overlap.max(0.0);
    report
}

/// Writes junction records as CSV with angles in degrees.
pub fn write_tj_records_csv<P: AsRef<Path>>(path: P, records: &[TJRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "x", "y", "xi0_deg", "xi1_deg", "xi2_deg", "v_inst", "quasi_static"])?;
    for r in records {
        w.write_record(&[
            format!("{:.9e}", r.t),
            format!("{:.9e}", r.pos[0]),
            format!("{:.9e}", r.pos[1]),
            format!("{:.6}", r.xi[0].to_degrees()),
            format!("{:.6}", r.xi[1].to_degrees()),
            format!("{:.6}", r.xi[2].to_degrees()),
            format!("{:.9e}", r.v_inst),
            r.quasi_static.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{EdgeBcs, Grid2};
    use crate::levelset::{init_signed_distance, InterfaceGeometry, Region};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn unit_grid(h: f64) -> Grid2 {
        Grid2::cover([0.0, 0.0], 1.0, 1.0, h, EdgeBcs::ZERO_FLUX).unwrap()
    }

    fn phase(id: usize, psi: ScalarField) -> Phase {
        Phase::new(id, psi, 1.0).unwrap()
    }

    /// Three ideal sector grains around `center` with prescribed dihedral
    /// angles (degrees), first ray along `base_deg`.
    fn sector_phases(center: [f64; 2], base_deg: f64, xi_deg: [f64; 3], g: Grid2) -> Vec<Phase> {
        let ray_dirs: Vec<f64> = {
            let mut acc = vec![base_deg.to_radians()];
            acc.push(acc[0] + xi_deg[0].to_radians());
            acc.push(acc[1] + xi_deg[1].to_radians());
            acc
        };
        let far = 3.0;
        let seg = |angle: f64| -> [[f64; 2]; 2] {
            [center, [center[0] + far * angle.cos(), center[1] + far * angle.sin()]]
        };
        // Grain k spans from ray k to ray k+1 (ccw); sector membership by
        // two half-planes when the opening is below pi, complement of the
        // reversed sector otherwise.
        (0..3)
            .map(|k| {
                let a = ray_dirs[k];
                let b = ray_dirs[(k + 1) % 3] + if k == 2 { std::f64::consts::TAU } else { 0.0 };
                let opening = b - a;
                let sector = |lo: f64, hi: f64| {
                    Region::All(vec![
                        Region::HalfPlane {
                            point: center,
                            normal: [-lo.sin(), lo.cos()],
                        },
                        Region::HalfPlane {
                            point: center,
                            normal: [hi.sin(), -hi.cos()],
                        },
                    ])
                };
                let inside = if opening <= std::f64::consts::PI {
                    sector(a, b)
                } else {
                    Region::Not(Box::new(sector(b, a + std::f64::consts::TAU)))
                };
                let geo = InterfaceGeometry::Polylines {
                    segments: vec![seg(a), seg(b)],
                    inside,
                };
                phase(k, init_signed_distance(&geo, g).unwrap())
            })
            .collect()
    }

    #[test]
    fn contour_of_linear_field_is_exact_line() {
        let g = unit_grid(0.05);
        let f = ScalarField::from_fn(g, |x, _| 0.3 - x);
        let c = extract_contour(&f).unwrap();
        assert_eq!(c.paths.len(), 1);
        assert!(c.total_points() >= g.ny());
        for p in c.points() {
            assert_abs_diff_eq!(p[0], 0.3, epsilon = 1e-12);
        }
        let ys: Vec<f64> = c.paths[0].iter().map(|p| p[1]).collect();
        assert_abs_diff_eq!(ys.iter().fold(f64::INFINITY, |a, &b| a.min(b)), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ys.iter().fold(0.0f64, |a, &b| a.max(b)), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn contour_of_disk_closes_with_correct_area() {
        let g = unit_grid(5e-3);
        let geo = InterfaceGeometry::Circle { center: [0.5, 0.5], radius: 0.25 };
        let psi = init_signed_distance(&geo, g).unwrap();
        let c = extract_contour(&psi).unwrap();
        assert_eq!(c.paths.len(), 1);
        assert_eq!(c.paths[0].first(), c.paths[0].last());
        assert_relative_eq!(
            c.closed_area(),
            std::f64::consts::PI * 0.0625,
            max_relative = 0.01
        );
    }

    #[test]
    fn contour_points_interpolate_to_zero_along_their_edge() {
        let g = unit_grid(0.02);
        let psi = ScalarField::from_fn(g, |x, y| (x - 0.45).hypot(y - 0.55) - 0.2);
        let c = extract_contour(&psi).unwrap();
        let h = g.h();
        for p in c.points() {
            // Each point sits on a grid line; linear interpolation of the
            // two bracketing node values must vanish there.
            let fx = (p[0] - g.origin()[0]) / h;
            let fy = (p[1] - g.origin()[1]) / h;
            let on_x_line = (fx - fx.round()).abs() < 1e-9;
            let (t, va, vb);
            if on_x_line {
                let i = fx.round() as usize;
                let j = fy.floor() as usize;
                t = fy - j as f64;
                va = psi.get(i, j);
                vb = psi.get(i, (j + 1).min(g.ny() - 1));
            } else {
                let j = fy.round() as usize;
                let i = fx.floor() as usize;
                t = fx - i as f64;
                va = psi.get(i, j);
                vb = psi.get((i + 1).min(g.nx() - 1), j);
            }
            assert!(((1.0 - t) * va + t * vb).abs() <= 1e-9);
        }
    }

    #[test]
    fn contour_requires_sign_change() {
        let g = unit_grid(0.1);
        let f = ScalarField::from_fn(g, |x, _| x + 2.0);
        assert!(matches!(extract_contour(&f), Err(Error::NoInterface)));
    }

    #[test]
    fn saddle_cells_resolve_without_panicking() {
        let g = Grid2::new(3, 3, 1.0, 1.0, [0.0, 0.0], EdgeBcs::ZERO_FLUX).unwrap();
        let values = vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0];
        let f = ScalarField::from_values(g, values).unwrap();
        let c = extract_contour(&f).unwrap();
        assert!(c.total_points() > 0);
    }

    #[test]
    fn junction_of_ideal_sectors_is_found() {
        let g = unit_grid(0.01);
        let phases = sector_phases([0.3, 0.4], 90.0, [120.0, 120.0, 120.0], g);
        let tj = locate_tj(&phases).unwrap();
        assert!((tj[0] - 0.3).hypot(tj[1] - 0.4) <= g.h());
    }

    #[test]
    fn junction_needs_three_phases() {
        let g = unit_grid(0.1);
        let phases = vec![phase(0, ScalarField::zeros(g)), phase(1, ScalarField::zeros(g))];
        assert!(matches!(locate_tj(&phases), Err(Error::NoJunction(_))));
    }

    #[test]
    fn dihedral_angles_recover_constructed_sectors() {
        let g = unit_grid(5e-3);
        let h = g.h();
        let want = [150.0, 130.0, 80.0];
        let phases = sector_phases([0.52, 0.48], 10.0, want, g);
        let tj = locate_tj(&phases).unwrap();
        let xi = dihedral_angles(&phases, tj, 2.0 * h, 10.0 * h).unwrap();
        let sum: f64 = xi.iter().sum();
        assert_relative_eq!(sum, std::f64::consts::TAU, max_relative = 1e-6);
        for k in 0..3 {
            assert_abs_diff_eq!(xi[k].to_degrees(), want[k], epsilon = 1.0);
        }
    }

    #[test]
    fn dihedral_angles_validate_annulus_and_phase_count() {
        let g = unit_grid(0.01);
        let phases = sector_phases([0.5, 0.5], 0.0, [120.0, 120.0, 120.0], g);
        assert!(dihedral_angles(&phases, [0.5, 0.5], 0.05, 0.02).is_err());
        assert!(dihedral_angles(&phases[..2], [0.5, 0.5], 0.02, 0.05).is_err());
    }

    #[test]
    fn velocity_fit_recovers_linear_motion() {
        let xi = [2.0, 2.1, 2.18];
        let records: Vec<TJRecord> = (0..40)
            .map(|k| {
                let t = k as f64 * 0.01;
                TJRecord {
                    t,
                    pos: [0.0, 0.2 + 1.0472 * t],
                    xi,
                    v_inst: 0.0,
                    quasi_static: false,
                }
            })
            .collect();
        let est = tj_velocity(&records, 20).unwrap();
        assert_relative_eq!(est.v, 1.0472, max_relative = 1e-9);
        assert!(est.quasi_static);
    }

    #[test]
    fn velocity_flags_transients_and_angle_drift() {
        // Decelerating motion: halves disagree.
        let records: Vec<TJRecord> = (0..40)
            .map(|k| {
                let t = k as f64 * 0.01;
                TJRecord {
                    t,
                    pos: [0.0, t * t],
                    xi: [2.0, 2.0, 2.28],
                    v_inst: 0.0,
                    quasi_static: false,
                }
            })
            .collect();
        assert!(!tj_velocity(&records, 40).unwrap().quasi_static);

        // Steady motion but drifting angles.
        let records: Vec<TJRecord> = (0..40)
            .map(|k| {
                let t = k as f64 * 0.01;
                TJRecord {
                    t,
                    pos: [0.0, t],
                    xi: [2.0 + 0.1 * t, 2.0, 2.28],
                    v_inst: 0.0,
                    quasi_static: false,
                }
            })
            .collect();
        assert!(!tj_velocity(&records, 40).unwrap().quasi_static);

        // Stationary junction counts as quasi-static.
        let records: Vec<TJRecord> = (0..40)
            .map(|k| TJRecord {
                t: k as f64 * 0.01,
                pos: [0.0, 0.5],
                xi: [2.0, 2.0, 2.28],
                v_inst: 0.0,
                quasi_static: false,
            })
            .collect();
        let est = tj_velocity(&records, 20).unwrap();
        assert!(est.quasi_static);
        assert_abs_diff_eq!(est.v, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn velocity_needs_full_window() {
        let records: Vec<TJRecord> = (0..3)
            .map(|k| TJRecord {
                t: k as f64,
                pos: [0.0, 0.0],
                xi: [2.0; 3],
                v_inst: 0.0,
                quasi_static: false,
            })
            .collect();
        assert!(matches!(tj_velocity(&records, 10), Err(Error::InsufficientData(_))));
        assert!(tj_velocity(&records, 2).is_err());
    }

    #[test]
    fn profile_of_flat_t_junction_setup() {
        // Top grain above y = 0.7, bottom split at x = 0.5.
        let g = unit_grid(0.01);
        let top = InterfaceGeometry::Polylines {
            segments: vec![[[0.0, 0.7], [1.0, 0.7]]],
            inside: Region::HalfPlane { point: [0.0, 0.7], normal: [0.0, 1.0] },
        };
        let bl = InterfaceGeometry::Polylines {
            segments: vec![[[0.0, 0.7], [0.5, 0.7]], [[0.5, 0.0], [0.5, 0.7]]],
            inside: Region::All(vec![
                Region::HalfPlane { point: [0.5, 0.7], normal: [0.0, -1.0] },
                Region::HalfPlane { point: [0.5, 0.7], normal: [-1.0, 0.0] },
            ]),
        };
        let br = InterfaceGeometry::Polylines {
            segments: vec![[[0.5, 0.7], [1.0, 0.7]], [[0.5, 0.0], [0.5, 0.7]]],
            inside: Region::All(vec![
                Region::HalfPlane { point: [0.5, 0.7], normal: [0.0, -1.0] },
                Region::HalfPlane { point: [0.5, 0.7], normal: [1.0, 0.0] },
            ]),
        };
        let phases = vec![
            phase(0, init_signed_distance(&top, g).unwrap()),
            phase(1, init_signed_distance(&bl, g).unwrap()),
            phase(2, init_signed_distance(&br, g).unwrap()),
        ];
        let profile = sample_profile(&phases, 101).unwrap();
        assert_eq!(profile.len(), 101);
        for p in &profile {
            assert_abs_diff_eq!(p[1], 0.7, epsilon = g.h() / 2.0);
        }
        // A flat profile matches the zero-speed analytic profile exactly.
        let rms = profile_rms_vs_analytic(&profile, 0.0).unwrap();
        assert!(rms <= 1e-9);
    }

    #[test]
    fn defect_report_on_complementary_and_gapped_fields() {
        let g = unit_grid(0.01);
        let eps = 2.0 * g.h();
        let top = ScalarField::from_fn(g, |_, y| y - 0.5);
        let bottom = top.map(|v| -v);
        let r = vacuum_overlap_report(
            &[phase(0, top), phase(1, bottom)],
            eps,
            &[],
            0.0,
        );
        assert!(r.max_vacuum <= 1e-12);
        assert!(r.max_overlap <= 1e-12);
        assert!(r.l1_defect <= 1e-12);

        // Vacuum strip of width 4h between the grains.
        let gap = 2.0 * g.h();
        let top = ScalarField::from_fn(g, |_, y| y - 0.5 - gap);
        let bottom = ScalarField::from_fn(g, |_, y| 0.5 - gap - y);
        let r = vacuum_overlap_report(
            &[phase(0, top.clone()), phase(1, bottom.clone())],
            eps,
            &[],
            0.0,
        );
        assert_relative_eq!(r.max_vacuum, 1.0, max_relative = 1e-12);
        assert!(r.max_overlap <= 1e-12);
        assert!(r.l1_defect > 0.0);

        // Excluding a band around the strip hides the defect.
        let r = vacuum_overlap_report(
            &[phase(0, top), phase(1, bottom)],
            eps,
            &[[0.5, 0.5]],
            2.0,
        );
        assert!(r.max_vacuum <= 1e-12);

        // Overlap strip: both phases claim the middle.
        let top = ScalarField::from_fn(g, |_, y| y - 0.5 + gap);
        let bottom = ScalarField::from_fn(g, |_, y| 0.5 + gap - y);
        let r = vacuum_overlap_report(
            &[phase(0, top), phase(1, bottom)],
            eps,
            &[],
            0.0,
        );
        assert_relative_eq!(r.max_overlap, 1.0, max_relative = 1e-12);
        assert!(r.max_vacuum <= 1e-12);
    }

    #[test]
    fn reinitialization_keeps_contour_in_place() {
        // Cross-module check: the redistanced field's zero contour stays
        // within half a cell of the original.
        let g = unit_grid(5e-3);
        let geo = InterfaceGeometry::Circle { center: [0.5, 0.5], radius: 0.25 };
        let skew = init_signed_distance(&geo, g).unwrap().map(|v| 1.8 * v + 0.3 * v * v);
        let before = extract_contour(&skew).unwrap();
        let after = crate::levelset::reinitialize(&skew, 20.0 * g.h()).unwrap();
        let mut worst = 0.0f64;
        for p in before.points() {
            // The redistanced value at an old contour point bounds the
            // displacement because |grad| is about 1.
            worst = worst.max(after.bilinear(p[0], p[1]).abs());
        }
        assert!(worst <= g.h() / 2.0, "contour moved by up to {worst:.3e}");
    }
}
