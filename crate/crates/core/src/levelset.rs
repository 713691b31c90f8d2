//! Signed-distance grain fields: initialization from geometry, smoothed
//! indicator, curvature, and redistancing.
//!
//! Each grain carries a level-set function `psi`, positive inside and
//! equal to signed distance near its boundary. Curvature and normal
//! reduce to `-laplacian(psi)` and `-grad(psi)` only while `psi` stays a
//! distance function, so the evolution redistances on a schedule.
//!
//! Redistancing is geometric and contour-preserving: nodes next to the
//! zero level set are seeded with `psi` normalized by its Godunov upwind
//! gradient (which leaves the interpolated zero crossing untouched
//! instead of snapping it onto a chord polygon, an error that would
//! accumulate curvature-dependent drift when redistancing every step),
//! and the far field is rebuilt by fast sweeping of the eikonal equation
//! with four alternating Gauss-Seidel passes, then clamped to the band.

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{Grid2, ScalarField};

/// Membership test for a grain region, composed from primitives.
#[derive(Clone, Debug)]
pub enum Region {
    Circle { center: [f64; 2], radius: f64 },
    /// Points `p` with `(p - point) . normal >= 0`.
    HalfPlane { point: [f64; 2], normal: [f64; 2] },
    All(Vec<Region>),
    Any(Vec<Region>),
    Not(Box<Region>),
}

impl Region {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            Region::Circle { center, radius } => {
                (p[0] - center[0]).hypot(p[1] - center[1]) <= *radius
            }
            Region::HalfPlane { point, normal } => {
                (p[0] - point[0]) * normal[0] + (p[1] - point[1]) * normal[1] >= 0.0
            }
            Region::All(rs) => rs.iter().all(|r| r.contains(p)),
            Region::Any(rs) => rs.iter().any(|r| r.contains(p)),
            Region::Not(r) => !r.contains(p),
        }
    }
}

/// A grain's in-domain boundary plus the inside/outside test that signs
/// distances. Domain walls are not part of the boundary; they are handled
/// by grid boundary conditions or pinned collars.
#[derive(Clone, Debug)]
pub enum InterfaceGeometry {
    /// Disk grain with exact signed distance `radius - |p - center|`.
    Circle { center: [f64; 2], radius: f64 },
    /// Boundary polyline segments with a membership region.
    Polylines { segments: Vec<[[f64; 2]; 2]>, inside: Region },
}

/// Exact signed distance to the geometry at every node, positive inside.
pub fn init_signed_distance(geometry: &InterfaceGeometry, grid: Grid2) -> Result<ScalarField> {
    match geometry {
        InterfaceGeometry::Circle { center, radius } => {
            if !(*radius > 0.0) {
                return Err(Error::DegenerateGeometry(format!(
                    "circle radius must be positive, got {radius}"
                )));
            }
            let [cx, cy] = *center;
            let r = *radius;
            Ok(ScalarField::from_fn(grid, move |x, y| r - (x - cx).hypot(y - cy)))
        }
        InterfaceGeometry::Polylines { segments, inside } => {
            if segments.is_empty() {
                return Err(Error::DegenerateGeometry("no boundary segments".into()));
            }
            let scale = grid.dx().max(grid.dy());
            for s in segments {
                let len = (s[1][0] - s[0][0]).hypot(s[1][1] - s[0][1]);
                if len < 1e-9 * scale {
                    return Err(Error::DegenerateGeometry(format!(
                        "zero-length segment at ({}, {})",
                        s[0][0], s[0][1]
                    )));
                }
            }
            Ok(ScalarField::from_fn(grid, move |x, y| {
                let p = [x, y];
                let d = segments
                    .iter()
                    .map(|s| point_segment_distance(p, s[0], s[1]))
                    .fold(f64::INFINITY, f64::min);
                if inside.contains(p) {
                    d
                } else {
                    -d
                }
            }))
        }
    }
}

pub fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (abx, aby) = (b[0] - a[0], b[1] - a[1]);
    let (apx, apy) = (p[0] - a[0], p[1] - a[1]);
    let len2 = abx * abx + aby * aby;
    let t = if len2 > 0.0 { ((apx * abx + apy * aby) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (apx - t * abx).hypot(apy - t * aby)
}

/// Sine-smoothed Heaviside of half-width `eps`: 0 below `-eps`, 1 above
/// `eps`, and `(1 + x/eps + sin(pi x/eps)/pi) / 2` in between.
pub fn heaviside(psi: f64, eps: f64) -> f64 {
    debug_assert!(eps > 0.0);
    if psi <= -eps {
        0.0
    } else if psi >= eps {
        1.0
    } else {
        let u = psi / eps;
        0.5 * (1.0 + u + (std::f64::consts::PI * u).sin() / std::f64::consts::PI)
    }
}

pub fn heaviside_smoothed(psi: &ScalarField, eps: f64) -> Result<ScalarField> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("Heaviside half-width must be positive, got {eps}")));
    }
    Ok(psi.map(|v| heaviside(v, eps)))
}

/// Boundary curvature field `-laplacian(psi)`, meaningful near the zero
/// contour of a distance-like field (positive for a shrinking disk).
pub fn curvature(psi: &ScalarField) -> ScalarField {
    psi.laplacian().map(|v| -v)
}

/// Dirichlet node pinning: a boolean mask plus the values to re-impose.
#[derive(Clone, Debug)]
pub struct Pinning {
    mask: Vec<bool>,
    values: Vec<f64>,
}

impl Pinning {
    /// Captures the field's current values at masked nodes.
    pub fn capture(field: &ScalarField, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != field.values().len() {
            return Err(Error::Config(format!(
                "pin mask length {} does not match field with {} nodes",
                mask.len(),
                field.values().len()
            )));
        }
        let values = field.values().to_vec();
        Ok(Pinning { mask, values })
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_pinned(&self, k: usize) -> bool {
        self.mask[k]
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Re-imposes the captured values on masked nodes.
    pub fn apply(&self, field: &mut ScalarField) {
        for (k, v) in field.values_mut().iter_mut().enumerate() {
            if self.mask[k] {
                *v = self.values[k];
            }
        }
    }
}

/// One grain: its level-set field, penalization strength, and optional
/// pinned collar.
#[derive(Clone, Debug)]
pub struct Phase {
    pub id: usize,
    pub psi: ScalarField,
    lambda: f64,
    pub pinned: Option<Pinning>,
}

impl Phase {
    pub fn new(id: usize, psi: ScalarField, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::Config(format!(
                "penalization strength must lie in (0, 1], got {lambda} for phase {id}"
            )));
        }
        Ok(Phase { id, psi, lambda, pinned: None })
    }

    pub fn with_pinning(mut self, pinned: Pinning) -> Self {
        self.pinned = Some(pinned);
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Rebuilds `psi` as signed distance to its own zero contour, clamped to
/// `[-band_width, band_width]`. The zero crossing is preserved to
/// interpolation accuracy.
pub fn reinitialize(psi: &ScalarField, band_width: f64) -> Result<ScalarField> {
    let grid = *psi.grid();
    if !(band_width > 0.0) {
        return Err(Error::Domain(format!("band width must be positive, got {band_width}")));
    }
    if psi.min() >= 0.0 || psi.max() <= 0.0 {
        return Err(Error::NoInterface);
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let h = grid.h();
    let v = psi.values();
    // Central-difference gradient for the seed normalization: it varies
    // smoothly from node to node, so the seeded collar stays second-order
    // smooth and its discrete Laplacian (the curvature estimate driving
    // the flow) is not corrupted. The one-sided Godunov norm would add
    // angle-dependent O(h) jitter that second differences amplify to
    // O(1/h) curvature noise.
    let central = psi.gradient_norm();
    let gn = central.values();

    // Seed a collar around the zero contour with gradient-normalized
    // magnitudes. Nodes adjacent to a sign change (8-neighborhood) are
    // always seeded, capped so pathological inputs cannot seed distances
    // a crossing-adjacent node could not have. Nodes further out but
    // within 3h (and with a trustworthy gradient) are seeded too: the
    // Laplacian stencil of every near-contour node then reads only the
    // smooth normalized values, never the sweeper's output, which keeps
    // the curvature estimate clean. Ridge and plateau nodes fail the
    // gradient test and are left to the sweeps.
    let mut dist = vec![f64::INFINITY; grid.n()];
    let mut seed = vec![false; grid.n()];
    exec::fill_rows(&mut dist, nx, |j, row| {
        for (i, d) in row.iter_mut().enumerate() {
            let k = j * nx + i;
            let c = v[k];
            if c == 0.0 {
                *d = 0.0;
                continue;
            }
            let mut near = false;
            'scan: for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                        continue;
                    }
                    let n = v[jj as usize * nx + ii as usize];
                    if n == 0.0 || (n > 0.0) != (c > 0.0) {
                        near = true;
                        break 'scan;
                    }
                }
            }
            let est = c.abs() / gn[k].max(1e-12);
            if near {
                *d = est.min(2.0 * h);
            } else if gn[k] >= 0.5 && est <= 3.0 * h {
                *d = est;
            }
        }
    });
    for (s, d) in seed.iter_mut().zip(&dist) {
        *s = d.is_finite();
    }

    fast_sweep(&mut dist, &seed, nx, ny, h);

    let mut out = vec![0.0; grid.n()];
    exec::fill_rows(&mut out, nx, |j, row| {
        for (i, o) in row.iter_mut().enumerate() {
            let k = j * nx + i;
            let s = if v[k] >= 0.0 { 1.0 } else { -1.0 };
            *o = s * dist[k].min(band_width);
        }
    });
    ScalarField::from_values(grid, out)
}

/// Gauss-Seidel fast sweeping for `|grad d| = 1` from frozen seed values,
/// four alternating directions per round, two rounds.
fn fast_sweep(dist: &mut [f64], seed: &[bool], nx: usize, ny: usize, h: f64) {
    let update = |dist: &mut [f64], i: usize, j: usize| {
        let k = j * nx + i;
        if seed[k] {
            return;
        }
        let mut a = f64::INFINITY; // best x neighbor
        if i > 0 {
            a = a.min(dist[k - 1]);
        }
        if i + 1 < nx {
            a = a.min(dist[k + 1]);
        }
        let mut b = f64::INFINITY; // best y neighbor
        if j > 0 {
            b = b.min(dist[k - nx]);
        }
        if j + 1 < ny {
            b = b.min(dist[k + nx]);
        }
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if lo == f64::INFINITY {
            return;
        }
        let cand = if hi - lo >= h {
            lo + h
        } else {
            0.5 * (lo + hi + (2.0 * h * h - (hi - lo) * (hi - lo)).sqrt())
        };
        if cand < dist[k] {
            dist[k] = cand;
        }
    };
    for _ in 0..2 {
        for j in 0..ny {
            for i in 0..nx {
                update(dist, i, j);
            }
        }
        for j in 0..ny {
            for i in (0..nx).rev() {
                update(dist, i, j);
            }
        }
        for j in (0..ny).rev() {
            for i in (0..nx).rev() {
                update(dist, i, j);
            }
        }
        for j in (0..ny).rev() {
            for i in 0..nx {
                update(dist, i, j);
            }
        }
    }
}
