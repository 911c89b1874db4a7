//! Quadrature for the normalized rotation-invariant measure on `S^{2n−1}`.
//!
//! Two kinds of rules live here. [`SphereRule`] stores nodes and weights for
//! the whole sphere. [`Quadrature`] wraps it together with rules that are
//! rebuilt at every `(x, t)` and only cover the part of the sphere where the
//! integrand can be nonzero; those use the chart
//!
//! ```text
//! ω(α, η) = √(1−|η|²)(cos α u + sin α v) + Σ_k η_k w_k,    η ∈ B^{2n−2},
//! ```
//!
//! whose surface element is exactly `dα dη` (the projection of `S^{N−1}` to
//! `N−2` coordinates is uniform on the ball).

use gauss_quad::GaussLegendre;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};
use crate::group::{random_unit, PointRef};
use crate::linalg;

use std::f64::consts::PI;

/// Nodes on `S^{2n−1}` with positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    certified: bool,
}

impl SphereRule {
    /// Ambient dimension `2n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.nodes[k * self.dim..(k + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    /// False for the Monte Carlo fallback used when `n ≥ 3`.
    pub fn certified(&self) -> bool {
        self.certified
    }
}

/// Deterministic rule on `S^{2n−1}`.
///
/// `n = 1`: `resolution` equispaced points on the circle.
/// `n = 2`: Hopf coordinates `ω = (cos η e^{iξ₁}, sin η e^{iξ₂})`, in which the
/// normalized measure is `du dξ₁ dξ₂ / 4π²` with `u = sin²η`; Gauss–Legendre in
/// `u` times uniform grids in both angles.
/// `n ≥ 3`: `resolution³` seeded Monte Carlo points, flagged uncertified.
pub fn sphere_rule(n: usize, resolution: usize) -> Result<SphereRule> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    if resolution < 4 {
        return Err(domain(format!("sphere resolution must be at least 4, got {resolution}")));
    }
    match n {
        1 => {
            let mut nodes = Vec::with_capacity(2 * resolution);
            for k in 0..resolution {
                let a = 2.0 * PI * k as f64 / resolution as f64;
                nodes.extend_from_slice(&[a.cos(), a.sin()]);
            }
            Ok(SphereRule { dim: 2, nodes, weights: vec![1.0 / resolution as f64; resolution], certified: true })
        }
        2 => {
            let gl = gauss_legendre(resolution);
            let total = resolution * resolution * gl.len();
            let mut nodes = Vec::with_capacity(4 * total);
            let mut weights = Vec::with_capacity(total);
            for &(x, w) in &gl {
                let u = 0.5 * (x + 1.0);
                let (c, s) = ((1.0 - u).sqrt(), u.sqrt());
                for i in 0..resolution {
                    let a = 2.0 * PI * i as f64 / resolution as f64;
                    for j in 0..resolution {
                        let b = 2.0 * PI * (j as f64 + 0.5) / resolution as f64;
                        nodes.extend_from_slice(&[c * a.cos(), c * a.sin(), s * b.cos(), s * b.sin()]);
                        weights.push(0.5 * w / (resolution * resolution) as f64);
                    }
                }
            }
            Ok(SphereRule { dim: 4, nodes, weights, certified: true })
        }
        _ => Ok(monte_carlo_rule(n, resolution.pow(3), 0x5f3759df ^ (n as u64) << 32 ^ resolution as u64)),
    }
}

/// Seeded Monte Carlo rule with `count` equally weighted points.
pub fn monte_carlo_rule(n: usize, count: usize, seed: u64) -> SphereRule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::with_capacity(2 * n * count);
    for _ in 0..count {
        nodes.extend(random_unit(&mut rng, 2 * n));
    }
    SphereRule { dim: 2 * n, nodes, weights: vec![1.0 / count as f64; count], certified: false }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(k: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(k.max(2)).expect("degree at least 2").as_node_weight_pairs().to_vec()
}

/// Surface area of `S^{N−1}`.
pub fn sphere_area(ambient: usize) -> f64 {
    // 2π^{N/2} / Γ(N/2), by recursion |S^{N+1}| = 2π/N |S^{N−1}|
    let (mut area, mut k) = if ambient.is_multiple_of(2) { (2.0 * PI, 2) } else { (2.0, 1) };
    while k < ambient {
        area *= 2.0 * PI / k as f64;
        k += 2;
    }
    area
}

/// Orthonormal frame `(u, v, w_1..w_{N−2})` of `ℝ^N`, used by the chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<Vec<f64>>,
}

impl Frame {
    /// Completes the orthonormal pair `(u, v)` by Gram–Schmidt on the standard basis.
    pub fn from_plane(u: Vec<f64>, v: Vec<f64>) -> Self {
        let mut basis = vec![u.clone(), v.clone()];
        complete_basis(&mut basis);
        let w = basis.split_off(2);
        Self { u, v, w }
    }

    /// Frame with `u` along `dir`; `v` is the first completion vector.
    pub fn along(dir: &[f64]) -> Self {
        let norm = linalg::norm(dir);
        let u: Vec<f64> = dir.iter().map(|x| x / norm).collect();
        let mut basis = vec![u];
        complete_basis(&mut basis);
        let mut rest = basis.split_off(1);
        let u = basis.pop().unwrap();
        let v = rest.remove(0);
        Self { u, v, w: rest }
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    fn point(&self, alpha: f64, eta: &[f64], out: &mut [f64]) {
        let r = (1.0 - linalg::dot(eta, eta)).max(0.0).sqrt();
        let (c, s) = (r * alpha.cos(), r * alpha.sin());
        for k in 0..out.len() {
            out[k] = c * self.u[k] + s * self.v[k];
        }
        for (e, wk) in eta.iter().zip(&self.w) {
            for k in 0..out.len() {
                out[k] += e * wk[k];
            }
        }
    }
}

fn complete_basis(basis: &mut Vec<Vec<f64>>) {
    let dim = basis[0].len();
    for e in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut cand = vec![0.0; dim];
        cand[e] = 1.0;
        for b in basis.iter() {
            let p = linalg::dot(&cand, b);
            for k in 0..dim {
                cand[k] -= p * b[k];
            }
        }
        // second pass for stability
        for b in basis.iter() {
            let p = linalg::dot(&cand, b);
            for k in 0..dim {
                cand[k] -= p * b[k];
            }
        }
        let nrm = linalg::norm(&cand);
        if nrm > 0.3 {
            basis.push(cand.into_iter().map(|c| c / nrm).collect());
        }
    }
}

/// A box `[α₀ ± A] × (η₀ + [−H, H]^{N−2})` in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartWindow {
    pub alpha_center: f64,
    pub alpha_half: f64,
    pub eta_center: Vec<f64>,
    pub eta_half: f64,
}

/// Midpoint rule on a chart window, `resolution` points per axis.
fn visit_window(frame: &Frame, win: &ChartWindow, resolution: usize, visit: &mut dyn FnMut(&[f64], f64)) {
    let dim = frame.dim();
    let ed = dim - 2;
    let area = sphere_area(dim);
    let da = 2.0 * win.alpha_half / resolution as f64;
    let de = 2.0 * win.eta_half / resolution as f64;
    let weight = da * de.powi(ed as i32) / area;
    let mut eta = vec![0.0; ed];
    let mut idx = vec![0usize; ed];
    let mut omega = vec![0.0; dim];
    loop {
        for k in 0..ed {
            eta[k] = win.eta_center[k] - win.eta_half + (idx[k] as f64 + 0.5) * de;
        }
        if linalg::dot(&eta, &eta) < 1.0 {
            for a in 0..resolution {
                let alpha = win.alpha_center - win.alpha_half + (a as f64 + 0.5) * da;
                frame.point(alpha, &eta, &mut omega);
                visit(&omega, weight);
            }
        }
        // odometer over the η grid
        let mut k = 0;
        loop {
            if k == ed {
                return;
            }
            idx[k] += 1;
            if idx[k] < resolution {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Angle `θ ∈ (0, π)` between `q` and the unit vectors `ω` with `|q − ω| = r`,
/// where `κ = |q|`; `None` when no such `ω` exists. Uses the half-angle form,
/// which stays accurate for tiny `r`.
fn cap_angle(kappa: f64, r: f64) -> Option<f64> {
    let s2 = (r * r - (1.0 - kappa).powi(2)) / (4.0 * kappa);
    if s2 <= 0.0 || s2 >= 1.0 {
        return None;
    }
    Some(2.0 * s2.sqrt().asin())
}

/// Gauss–Legendre arc rule on `S¹`, graded geometrically toward an angle.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedArc {
    /// Horizontal point the arc is graded toward (`ω` closest to `(x̲ − c)/t`).
    pub center: Vec<f64>,
    /// Radii `ρ` at which `|x̲ − tω − c| = ρ` produces a breakpoint.
    pub radii: Vec<f64>,
    /// Geometric refinement below the smallest breakpoint.
    pub inner_octaves: usize,
    pub nodes_per_piece: usize,
}

impl GradedArc {
    fn visit(&self, ubar: &[f64], t: f64, visit: &mut dyn FnMut(&[f64], f64)) {
        let q: Vec<f64> = ubar.iter().zip(&self.center).map(|(a, c)| (a - c) / t).collect();
        let kappa = linalg::norm(&q);
        let base = if kappa > 0.0 { q[1].atan2(q[0]) } else { 0.0 };
        let mut breaks: Vec<f64> = self
            .radii
            .iter()
            .filter_map(|&rho| {
                if kappa == 0.0 {
                    return None;
                }
                cap_angle(kappa, rho / t).filter(|a| *a < PI)
            })
            .collect();
        breaks.push(PI);
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        let mut pieces = Vec::new();
        let first = breaks[0];
        let mut lo = first * 0.5f64.powi(self.inner_octaves as i32);
        pieces.push((0.0, lo));
        for _ in 0..self.inner_octaves {
            pieces.push((lo, 2.0 * lo));
            lo *= 2.0;
        }
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let steps = ((b / a).log2().ceil() as usize).max(1);
            let ratio = (b / a).powf(1.0 / steps as f64);
            let mut s = a;
            for k in 0..steps {
                let e = if k + 1 == steps { b } else { s * ratio };
                pieces.push((s, e));
                s = e;
            }
        }
        let gl = gauss_legendre(self.nodes_per_piece);
        for (a, b) in pieces {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for &(x, w) in &gl {
                let s = mid + half * x;
                let weight = w * half / (2.0 * PI);
                for sign in [1.0, -1.0] {
                    let ang = base + sign * s;
                    visit(&[ang.cos(), ang.sin()], weight);
                }
            }
        }
    }
}

/// Where the averaging integrand may be supported, and how to sample it.
#[derive(Debug, Clone, PartialEq)]
pub enum Quadrature {
    /// A fixed rule on the whole sphere.
    Global(SphereRule),
    /// Rebuilt per `(x, t)` around `{ω : |x̲ − tω − center| ≤ radius}`.
    Cap { center: Vec<f64>, radius: f64, resolution: usize, fallback: SphereRule },
    /// Fixed frame with `u, v` spanning a plane `V`; the support is
    /// `|π(x̲ − tω − c)| ≤ par` and `|π_⊥(x̲ − tω − c)| ≤ perp`.
    Split { frame: Frame, center: Vec<f64>, par: f64, perp: f64, resolution: usize, fallback: SphereRule },
    /// Circle only.
    Arc(GradedArc),
}

impl Quadrature {
    /// Calls `visit(ω, weight)` for every node used to average at `(x, t)`.
    pub fn visit(&self, x: PointRef<'_>, t: f64, visit: &mut dyn FnMut(&[f64], f64)) {
        match self {
            Quadrature::Global(rule) => {
                for (w, wt) in rule.iter() {
                    visit(w, wt);
                }
            }
            Quadrature::Cap { center, radius, resolution, fallback } => {
                let q: Vec<f64> = x.ubar.iter().zip(center).map(|(a, c)| (a - c) / t).collect();
                let kappa = linalg::norm(&q);
                let rho = radius / t;
                if kappa <= rho - 1.0 || kappa == 0.0 {
                    return Quadrature::Global(fallback.clone()).visit(x, t, visit);
                }
                if kappa >= rho + 1.0 {
                    return;
                }
                let c0 = (1.0 + kappa * kappa - rho * rho) / (2.0 * kappa);
                let half = cap_angle(kappa, rho).unwrap_or(PI);
                if c0 <= 0.0 {
                    for (w, wt) in fallback.iter() {
                        visit(w, wt);
                    }
                    return;
                }
                let frame = Frame::along(&q);
                let win = ChartWindow {
                    alpha_center: 0.0,
                    alpha_half: half,
                    eta_center: vec![0.0; q.len() - 2],
                    eta_half: half.sin(),
                };
                visit_window(&frame, &win, *resolution, visit);
            }
            Quadrature::Split { frame, center, par, perp, resolution, fallback } => {
                let z: Vec<f64> = x.ubar.iter().zip(center).map(|(a, c)| a - c).collect();
                let (pu, pv) = (linalg::dot(&z, &frame.u), linalg::dot(&z, &frame.v));
                let plane = pu.hypot(pv);
                if plane <= *par {
                    for (w, wt) in fallback.iter() {
                        visit(w, wt);
                    }
                    return;
                }
                let eta_center: Vec<f64> = frame.w.iter().map(|wk| linalg::dot(&z, wk) / t).collect();
                let win = ChartWindow {
                    alpha_center: pv.atan2(pu),
                    alpha_half: (par / plane).asin(),
                    eta_center,
                    eta_half: perp / t,
                };
                visit_window(frame, &win, *resolution, visit);
            }
            Quadrature::Arc(arc) => arc.visit(x.ubar, t, visit),
        }
    }

    pub fn certified(&self) -> bool {
        match self {
            Quadrature::Global(r) => r.certified(),
            Quadrature::Cap { fallback, .. } | Quadrature::Split { fallback, .. } => fallback.certified(),
            Quadrature::Arc(_) => true,
        }
    }
}

impl From<SphereRule> for Quadrature {
    fn from(rule: SphereRule) -> Self {
        Quadrature::Global(rule)
    }
}
