//! Unimodular level sets `{ zeta in T^2 : p~(zeta) = alpha p(zeta) }` of
//! two-variable rational inner functions.
//!
//! The level set is traced as `n = deg_{z2} p` analytic graphs
//! `zeta2 = g_j(zeta1)` sampled on a uniform grid in `zeta1`, plus possibly
//! finitely many vertical lines `zeta1 = tau`. Horizontal lines `zeta2 = tau`
//! show up as constant branches.

use crate::blaschke::{self, ZERO_SLICE_TOL};
use crate::clark;
use crate::error::{Error, Result};
use crate::quadrature::{
    angle_0_2pi, angular_distance, cauchy_mixture_rule, to_circle, uniform_angles, uniform_rule, unimodular,
};
use crate::rif::Rif;
use crate::roots;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

const REFINE_FACTOR: usize = 8;
const REFINE_LEVELS: usize = 3;
/// A match is accepted when every predicted-vs-assigned distance is below
/// this fraction of the smallest separation between distinct roots.
const MATCH_RATIO: f64 = 0.3;
/// Roots closer than this are treated as coincident (a genuine crossing).
const COINCIDENT: f64 = 1e-9;

/// One sampled branch `zeta2 = g(zeta1)` of the level set with its weight
/// `1 / |d phi / d z2|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub alpha: C64,
    pub theta: Vec<f64>,
    /// Quadrature weights of the nodes for `d theta / 2 pi` (`1 / N` on the
    /// uniform rule).
    pub quad_weights: Vec<f64>,
    pub values: Vec<C64>,
    pub weights: Vec<f64>,
    /// Grid index where branch labels may be permuted (the base point of the
    /// continuation); `None` when every branch closes up on itself.
    pub jump_index: Option<usize>,
    /// Nodes whose value was interpolated because the slice there vanished
    /// identically or lost roots.
    pub filled_nodes: Vec<usize>,
    /// Nodes whose weight was a 0/0 limit taken along the branch.
    pub limit_weight_nodes: Vec<usize>,
}

impl Branch {
    pub fn grid_n(&self) -> usize {
        self.theta.len()
    }

    /// Largest `|p~ - alpha p|` over the samples.
    pub fn max_residual(&self, rif: &Rif) -> f64 {
        self.theta
            .iter()
            .zip(&self.values)
            .map(|(&t, &g)| rif.level_residual(self.alpha, &[unimodular(t), g]))
            .fold(0.0, f64::max)
    }
}

/// Which coordinate a line component freezes; serialized as 1 or 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum FrozenAxis {
    /// `zeta1 = tau` (vertical line).
    First,
    /// `zeta2 = tau` (horizontal line).
    Second,
}

impl FrozenAxis {
    /// 1-based coordinate index as used in file formats.
    pub fn number(self) -> u8 {
        match self {
            FrozenAxis::First => 1,
            FrozenAxis::Second => 2,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(FrozenAxis::First),
            2 => Ok(FrozenAxis::Second),
            _ => Err(Error::InvalidArgument(format!("axis must be 1 or 2, got {n}"))),
        }
    }
}

impl From<FrozenAxis> for u8 {
    fn from(a: FrozenAxis) -> u8 {
        a.number()
    }
}

impl TryFrom<u8> for FrozenAxis {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        Self::from_number(n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineComponent {
    pub axis: FrozenAxis,
    pub tau: C64,
    pub constant: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaKind {
    Generic,
    Exceptional,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaClass {
    pub kind: AlphaKind,
    pub lines: Vec<LineComponent>,
}

fn require_bidisk(rif: &Rif) -> Result<()> {
    if rif.nvars() != 2 {
        return Err(Error::InvalidArgument(format!(
            "expected a two-variable function, got {} variables",
            rif.nvars()
        )));
    }
    Ok(())
}

/// Roots of the slice at one node, or `None` for an identically zero slice.
fn node_roots(rif: &Rif, alpha: C64, zeta1: C64) -> Result<Option<Vec<C64>>> {
    match blaschke::slice_roots_unchecked(rif, &[zeta1], alpha) {
        Ok(sr) => Ok(Some(sr.roots)),
        Err(Error::IdenticallyZeroSlice { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Greedy nearest-neighbour assignment of `roots` to `pred`. Returns the
/// assignment (`None` for branches left without a root) and whether it is
/// unambiguous.
pub(crate) fn assign(pred: &[C64], roots: &[C64]) -> (Vec<Option<C64>>, bool) {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(pred.len() * roots.len());
    for (j, p) in pred.iter().enumerate() {
        for (k, r) in roots.iter().enumerate() {
            pairs.push(((p - r).norm(), j, k));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = vec![None; pred.len()];
    let mut used = vec![false; roots.len()];
    let mut worst: f64 = 0.0;
    for (dist, j, k) in pairs {
        if out[j].is_none() && !used[k] {
            out[j] = Some(roots[k]);
            used[k] = true;
            worst = worst.max(dist);
        }
    }
    let mut sep = f64::INFINITY;
    for a in 0..roots.len() {
        for b in a + 1..roots.len() {
            let d = (roots[a] - roots[b]).norm();
            if d > COINCIDENT {
                sep = sep.min(d);
            }
        }
    }
    // a single branch with a single root has nothing to confuse it with
    let ok = (pred.len() == 1 && roots.len() == 1) || worst < MATCH_RATIO * sep;
    (out, ok)
}

fn predict(cur: &[C64], slope: &[C64], h: f64) -> Vec<C64> {
    cur.iter().zip(slope).map(|(c, s)| to_circle(c + s * h)).collect()
}

struct Tracer<'a> {
    rif: &'a Rif,
    alpha: C64,
}

impl Tracer<'_> {
    /// Continue `cur` (with per-unit-angle slope estimate) from `t0` to `t1`,
    /// where the slice at `t1` has `roots_t1`. Returns ordered values at `t1`
    /// (`None` for branches that found no root) and a fresh slope estimate.
    fn advance(
        &self,
        cur: &[C64],
        slope: &[C64],
        t0: f64,
        t1: f64,
        roots_t1: &[C64],
        level: usize,
    ) -> Result<Vec<Option<C64>>> {
        let pred = predict(cur, slope, t1 - t0);
        let (assigned, ok) = assign(&pred, roots_t1);
        if ok {
            return Ok(assigned);
        }
        if level >= REFINE_LEVELS || roots_t1.len() < cur.len() {
            if roots_t1.len() < cur.len() {
                // deficient slice: keep the unambiguous part, fill later
                return Ok(assigned);
            }
            return Err(Error::ContinuationCollision { theta: t1 });
        }
        let h = (t1 - t0) / REFINE_FACTOR as f64;
        let mut vals = cur.to_vec();
        let mut sl = slope.to_vec();
        for k in 1..=REFINE_FACTOR {
            let ta = t0 + h * (k - 1) as f64;
            let tb = t0 + h * k as f64;
            let rts = if k == REFINE_FACTOR {
                roots_t1.to_vec()
            } else {
                node_roots(self.rif, self.alpha, unimodular(tb))?
                    .ok_or(Error::ContinuationCollision { theta: tb })?
            };
            let next = self.advance(&vals, &sl, ta, tb, &rts, level + 1)?;
            if next.iter().any(|v| v.is_none()) {
                return Err(Error::ContinuationCollision { theta: tb });
            }
            let next: Vec<C64> = next.into_iter().map(|v| to_circle(v.unwrap())).collect();
            sl = next.iter().zip(&vals).map(|(b, a)| (b - a) / h).collect();
            vals = next;
        }
        Ok(vals.into_iter().map(Some).collect())
    }
}

/// Trace the `n = deg_{z2} p` branches of the level set on `grid_n` uniform
/// nodes in `zeta1`.
pub fn trace_branches(rif: &Rif, alpha: C64, grid_n: usize) -> Result<Vec<Branch>> {
    check_grid(grid_n)?;
    let (theta, quad) = uniform_rule(grid_n);
    trace_on_rule(rif, alpha, &theta, &quad)
}

fn check_grid(grid_n: usize) -> Result<()> {
    if grid_n < 256 || !grid_n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "grid size must be a power of two >= 256, got {grid_n}"
        )));
    }
    Ok(())
}

/// Trace the branches on an arbitrary increasing rule in `[0, 2 pi)`;
/// `quad` are the quadrature weights for `d theta / 2 pi`.
pub fn trace_on_rule(rif: &Rif, alpha: C64, theta: &[f64], quad: &[f64]) -> Result<Vec<Branch>> {
    require_bidisk(rif)?;
    blaschke::check_unimodular(alpha, "alpha")?;
    let grid_n = theta.len();
    if grid_n < 4 || quad.len() != grid_n || theta.windows(2).any(|w| w[1] <= w[0]) || theta[grid_n - 1] - theta[0] >= TAU
    {
        return Err(Error::InvalidArgument("rule nodes must increase within one turn".into()));
    }
    let nb = rif.degrees()[1];

    let node: Vec<Option<Vec<C64>>> = theta
        .par_iter()
        .map(|&t| node_roots(rif, alpha, unimodular(t)))
        .collect::<Result<_>>()?;

    // start where the slice is regular and its roots are well separated
    let start = (0..grid_n)
        .filter(|&i| node[i].as_ref().is_some_and(|r| r.len() == nb))
        .max_by(|&a, &b| {
            let sep = |i: usize| {
                let r = node[i].as_ref().unwrap();
                let mut s = f64::INFINITY;
                for x in 0..r.len() {
                    for y in x + 1..r.len() {
                        s = s.min((r[x] - r[y]).norm());
                    }
                }
                // prefer the earliest node among comparably separated ones
                if s > 0.5 {
                    0.5 - i as f64 * 1e-12
                } else {
                    s
                }
            };
            sep(a).partial_cmp(&sep(b)).unwrap_or(std::cmp::Ordering::Equal)
        })
        .ok_or_else(|| Error::InvalidArgument("no regular slice found on the grid".into()))?;

    // unwrapped angle of sequence position q = (i - start) mod N
    let xs: Vec<f64> = (0..=grid_n)
        .map(|q| {
            let i = start + q;
            if i >= grid_n {
                theta[i - grid_n] + TAU
            } else {
                theta[i]
            }
        })
        .collect();

    let mut init: Vec<C64> = node[start].as_ref().unwrap().iter().map(|r| to_circle(*r)).collect();
    init.sort_by(|a, b| angle_0_2pi(*a).partial_cmp(&angle_0_2pi(*b)).unwrap());

    let tracer = Tracer { rif, alpha };
    let mut seq: Vec<Vec<Option<C64>>> = vec![vec![None; nb]; grid_n + 1];
    seq[0] = init.iter().map(|v| Some(*v)).collect();
    let mut cur = init.clone();
    let mut slope = vec![C64::new(0.0, 0.0); nb];
    let mut t_cur = xs[0];
    let mut last_pos = 0usize;
    for q in 1..=grid_n {
        let i = (start + q) % grid_n;
        let t_next = xs[q];
        let Some(rts) = node[i].as_ref() else {
            continue;
        };
        let next = tracer.advance(&cur, &slope, t_cur, t_next, rts, 0)?;
        if next.iter().any(|v| v.is_none()) && q == grid_n {
            return Err(Error::ContinuationCollision { theta: t_next });
        }
        let dt = t_next - t_cur;
        let mut new_cur = cur.clone();
        for j in 0..nb {
            if let Some(v) = next[j] {
                let v = to_circle(v);
                new_cur[j] = v;
                seq[q][j] = Some(v);
            } else {
                new_cur[j] = predict(&cur[j..=j], &slope[j..=j], dt)[0];
            }
        }
        // slope only from steps between adjacent regular nodes
        if q - last_pos == 1 {
            slope = new_cur.iter().zip(&cur).map(|(b, a)| (b - a) / dt).collect();
        }
        cur = new_cur;
        t_cur = t_next;
        last_pos = q;
    }

    // closure: seq[grid_n] is the continuation back to the start node
    let end: Vec<C64> = seq[grid_n].iter().map(|v| v.unwrap()).collect();
    let mut perm_identity = true;
    for j in 0..nb {
        let k = (0..nb)
            .min_by(|&a, &b| {
                (end[j] - init[a]).norm().partial_cmp(&(end[j] - init[b]).norm()).unwrap()
            })
            .unwrap();
        if k != j {
            perm_identity = false;
        }
    }

    let scale = rif.scale();
    let den_tol = 1e-10 * scale;
    let pos_x = &xs[..grid_n];
    let mut branches = Vec::with_capacity(nb);
    for j in 0..nb {
        let mut pos_vals: Vec<Option<C64>> = (0..grid_n).map(|q| seq[q][j]).collect();
        let filled: Vec<usize> = (0..grid_n).filter(|&q| pos_vals[q].is_none()).collect();
        for &q in &filled {
            let v = interpolate_phase(pos_x, &pos_vals, q).ok_or(Error::ContinuationCollision { theta: xs[q] })?;
            pos_vals[q] = Some(v);
        }
        let vals: Vec<C64> = pos_vals.into_iter().map(|v| v.unwrap()).collect();
        let mut pos_w: Vec<Option<f64>> = vals
            .iter()
            .zip(pos_x)
            .map(|(&g, &t)| rif.weight_sample(alpha, 1, &[unimodular(t), g]).value(den_tol))
            .collect();
        let limit_nodes: Vec<usize> = (0..grid_n).filter(|&q| pos_w[q].is_none()).collect();
        for &q in &limit_nodes {
            let w = interpolate_real(pos_x, &pos_w, q).ok_or(Error::ZeroOverZero {
                re: vals[q].re,
                im: vals[q].im,
            })?;
            pos_w[q] = Some(w.max(0.0));
        }
        // back to grid order
        let mut values = vec![C64::new(0.0, 0.0); grid_n];
        let mut weights = vec![0.0; grid_n];
        for q in 0..grid_n {
            let i = (start + q) % grid_n;
            values[i] = vals[q];
            weights[i] = pos_w[q].unwrap();
        }
        let to_grid = |qs: &[usize]| -> Vec<usize> {
            let mut v: Vec<usize> = qs.iter().map(|q| (start + q) % grid_n).collect();
            v.sort_unstable();
            v
        };
        branches.push(Branch {
            alpha,
            theta: theta.to_vec(),
            quad_weights: quad.to_vec(),
            values,
            weights,
            jump_index: if perm_identity { None } else { Some(start) },
            filled_nodes: to_grid(&filled),
            limit_weight_nodes: to_grid(&limit_nodes),
        });
    }
    Ok(branches)
}

/// Narrow features of the level set in `zeta1`: places where the curve is
/// nearly vertical, so that a branch sweeps most of the circle over a short
/// `zeta1`-interval. They are found from the `zeta1`-roots of `scan`
/// horizontal slices, which pile up there. Known vertical lines are excluded.
/// Returns `(center, width)` pairs.
pub fn steep_spots(rif: &Rif, alpha: C64, scan: usize, lines: &[C64]) -> Result<Vec<(f64, f64)>> {
    require_bidisk(rif)?;
    let level_scale = rif.level_poly(alpha).max_abs_coeff();
    let per_slice: Vec<Vec<f64>> = uniform_angles(scan)
        .par_iter()
        .map(|&t| {
            let coeffs = rif.level_slice(alpha, 0, &[C64::new(0.0, 0.0), unimodular(t)]);
            if coeffs.iter().all(|c| c.norm() < ZERO_SLICE_TOL * level_scale) {
                return Vec::new();
            }
            roots::roots(&coeffs)
                .unwrap_or_default()
                .into_iter()
                .filter(|r| (r.norm() - 1.0).abs() < 1e-6)
                .map(to_circle)
                .filter(|r| lines.iter().all(|l| angular_distance(*l, *r) > 1e-9))
                .map(angle_0_2pi)
                .collect()
        })
        .collect();
    let mut a: Vec<f64> = per_slice.into_iter().flatten().collect();
    if a.is_empty() {
        return Ok(Vec::new());
    }
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let len = a.len();
    let ext: Vec<f64> = a.iter().cloned().chain(a.iter().map(|x| x + TAU)).collect();
    let window = 0.25 * TAU / scan as f64;
    const DENSE: usize = 16;
    let mut dense = vec![false; len];
    let mut hi = 0;
    for k in 0..len {
        hi = hi.max(k);
        while hi + 1 < ext.len() && ext[hi + 1] < ext[k] + window {
            hi += 1;
        }
        if hi + 1 - k >= DENSE {
            for m in k..=hi {
                dense[m % len] = true;
            }
        }
    }
    if dense.iter().all(|&d| d) {
        return Ok(Vec::new());
    }
    // rotate so that a cluster never straddles the start
    let first_sparse = dense.iter().position(|&d| !d).unwrap();
    let mut spots = Vec::new();
    let mut cluster: Vec<f64> = Vec::new();
    let mut flush = |cluster: &mut Vec<f64>| {
        if cluster.len() >= DENSE {
            let mid = cluster[cluster.len() / 2];
            let mut dev: Vec<f64> = cluster.iter().map(|x| (x - mid).abs()).collect();
            dev.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let width = dev[dev.len() / 2].max(1e-12);
            spots.push((mid.rem_euclid(TAU), width));
        }
        cluster.clear();
    };
    for step in 0..len {
        let k = first_sparse + step;
        let x = ext[k];
        if dense[k % len] && cluster.last().is_none_or(|&l| x - l < window) {
            cluster.push(x);
        } else {
            flush(&mut cluster);
            if dense[k % len] {
                cluster.push(x);
            }
        }
    }
    flush(&mut cluster);
    spots.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    Ok(spots)
}

/// Trace on `grid_n` nodes, concentrating nodes at steep spots when there are
/// any and using the uniform rule otherwise.
pub fn trace_adaptive(rif: &Rif, alpha: C64, grid_n: usize, lines: &[C64]) -> Result<Vec<Branch>> {
    check_grid(grid_n)?;
    let spots = steep_spots(rif, alpha, grid_n, lines)?;
    let (theta, quad) = cauchy_mixture_rule(grid_n, &spots, 0.5);
    trace_on_rule(rif, alpha, &theta, &quad)
}

/// Neighbours used to fill position `q`: up to two on each side, never
/// wrapping around the sequence ends. Abscissae are relative to `xs[q]`.
fn stencil<T: Copy>(xs: &[f64], vals: &[Option<T>], q: usize) -> Vec<(f64, T)> {
    let n = vals.len() as isize;
    let mut pts = Vec::new();
    let take = |offs: &[isize], pts: &mut Vec<(f64, T)>| {
        for &off in offs {
            let k = q as isize + off;
            if k >= 0 && k < n {
                if let Some(v) = vals[k as usize] {
                    pts.push((xs[k as usize] - xs[q], v));
                }
            }
        }
    };
    take(&[-2, -1, 1, 2], &mut pts);
    if pts.len() < 2 {
        // one-sided fallback further out
        take(&[-3, 3, -4, 4], &mut pts);
    }
    pts
}

fn lagrange_at_zero(pts: &[(f64, f64)]) -> f64 {
    let mut s = 0.0;
    for (a, &(xa, ya)) in pts.iter().enumerate() {
        let mut l = 1.0;
        for (b, &(xb, _)) in pts.iter().enumerate() {
            if a != b {
                l *= (0.0 - xb) / (xa - xb);
            }
        }
        s += l * ya;
    }
    s
}

fn interpolate_real(xs: &[f64], vals: &[Option<f64>], q: usize) -> Option<f64> {
    let pts = stencil(xs, vals, q);
    if pts.is_empty() {
        return None;
    }
    Some(lagrange_at_zero(&pts))
}

/// Interpolate a unimodular sequence through its unwrapped phase.
fn interpolate_phase(xs: &[f64], vals: &[Option<C64>], q: usize) -> Option<C64> {
    let pts = stencil(xs, vals, q);
    let reference = pts.first()?.1;
    let phase: Vec<(f64, f64)> = pts.iter().map(|&(x, v)| (x, (v * reference.conj()).arg())).collect();
    Some(reference * unimodular(lagrange_at_zero(&phase)))
}

/// Common unimodular zeros of a family of univariate polynomials, confirmed
/// against `confirm_tol`.
fn common_unimodular_zeros(polys: &[Vec<C64>], confirm_tol: f64) -> Vec<C64> {
    let max = polys
        .iter()
        .flat_map(|p| p.iter().map(|c| c.norm()))
        .fold(0.0, f64::max);
    let nonzero: Vec<&Vec<C64>> = polys
        .iter()
        .filter(|p| p.iter().any(|c| c.norm() > 1e-12 * max))
        .collect();
    let Some(base) = nonzero
        .iter()
        .min_by_key(|p| roots::effective_degree(p, 1e-12).unwrap_or(usize::MAX))
    else {
        return Vec::new();
    };
    let Some(found) = roots::roots(base) else {
        return Vec::new();
    };
    let mut out: Vec<C64> = Vec::new();
    for (r, m) in roots::cluster_roots(&found, 1e-5) {
        let r = roots::polish_multiple(base, r, m);
        if (r.norm() - 1.0).abs() > 1e-4 {
            continue;
        }
        let tau = to_circle(r);
        let vanishes = polys.iter().all(|p| roots::horner(p, tau).0.norm() < confirm_tol);
        if vanishes && out.iter().all(|o| angular_distance(*o, tau) > 1e-7) {
            out.push(tau);
        }
    }
    out.sort_by(|a, b| angle_0_2pi(*a).partial_cmp(&angle_0_2pi(*b)).unwrap());
    out
}

/// Lines `zeta_axis = tau` contained in the level set, with their constants.
pub fn detect_lines_on_axis(rif: &Rif, alpha: C64, axis: FrozenAxis) -> Result<Vec<LineComponent>> {
    require_bidisk(rif)?;
    blaschke::check_unimodular(alpha, "alpha")?;
    let level = rif.level_poly(alpha);
    // coefficients in the free variable, each a polynomial in the frozen one
    let free = match axis {
        FrozenAxis::First => 1,
        FrozenAxis::Second => 0,
    };
    let polys = level.coefficient_polys_2d(free);
    let confirm = ZERO_SLICE_TOL * level.max_abs_coeff();
    common_unimodular_zeros(&polys, confirm)
        .into_iter()
        .map(|tau| {
            let constant = clark::line_constant(rif, axis, tau, alpha)?;
            Ok(LineComponent {
                axis,
                tau,
                constant,
            })
        })
        .collect()
}

/// Vertical lines of the level set (the canonical line list of a Clark
/// measure; horizontal lines appear as constant branches instead).
pub fn detect_lines(rif: &Rif, alpha: C64) -> Result<Vec<LineComponent>> {
    detect_lines_on_axis(rif, alpha, FrozenAxis::First)
}

/// Lines on both axes.
pub fn detect_lines_all(rif: &Rif, alpha: C64) -> Result<Vec<LineComponent>> {
    let mut v = detect_lines_on_axis(rif, alpha, FrozenAxis::First)?;
    v.extend(detect_lines_on_axis(rif, alpha, FrozenAxis::Second)?);
    Ok(v)
}

/// `alpha` is exceptional when the level set contains a line on either axis.
pub fn classify_alpha(rif: &Rif, alpha: C64) -> Result<AlphaClass> {
    let lines = detect_lines_all(rif, alpha)?;
    let kind = if lines.is_empty() {
        AlphaKind::Generic
    } else {
        AlphaKind::Exceptional
    };
    Ok(AlphaClass { kind, lines })
}

/// Roots of `p(zeta1, .)` and the squared-modulus gap `min |r|^2 - 1`.
fn p_slice_gap(rif: &Rif, theta: f64) -> Option<(f64, C64)> {
    let z1 = unimodular(theta);
    let coeffs = rif.p().slice_unchecked(1, &[z1, C64::new(0.0, 0.0)]);
    let rts = roots::roots(&coeffs)?;
    rts.into_iter()
        .map(|r| (r.norm_sqr() - 1.0, r))
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
}

/// Derivative in `theta` of `|r(theta)|^2 - 1` along the root branch through
/// `r`, after polishing `r` at `theta`.
fn gap_derivative(rif: &Rif, theta: f64, r: C64) -> Option<(f64, C64)> {
    let z1 = unimodular(theta);
    let coeffs = rif.p().slice_unchecked(1, &[z1, C64::new(0.0, 0.0)]);
    let r = roots::newton_polish(&coeffs, r, 8);
    let z = [z1, r];
    let d1 = rif.p().eval_partial_unchecked(0, &z);
    let d2 = rif.p().eval_partial_unchecked(1, &z);
    if d2.norm() == 0.0 {
        return None;
    }
    let dr = -d1 * C64::new(0.0, 1.0) * z1 / d2;
    Some((2.0 * (r.conj() * dr).re, r))
}

/// Points of `T^2` where `p` (and hence `p~`) vanishes.
pub fn find_singularities(rif: &Rif) -> Result<Vec<[C64; 2]>> {
    require_bidisk(rif)?;
    const SCAN: usize = 2048;
    let h = TAU / SCAN as f64;
    let gaps: Vec<Option<(f64, C64)>> = (0..SCAN).map(|i| p_slice_gap(rif, h * i as f64)).collect();
    let scale = rif.scale();
    let mut found: Vec<[C64; 2]> = Vec::new();
    for i in 0..SCAN {
        let Some((g, r)) = gaps[i] else { continue };
        let prev = gaps[(i + SCAN - 1) % SCAN].map_or(f64::INFINITY, |x| x.0);
        let next = gaps[(i + 1) % SCAN].map_or(f64::INFINITY, |x| x.0);
        if !(g <= prev && g < next && g < 0.05) {
            continue;
        }
        // bisection on the sign of the derivative across [t_{i-1}, t_{i+1}]
        let mut lo = h * (i as f64 - 1.0);
        let mut hi = h * (i as f64 + 1.0);
        let mut root = r;
        let mut theta = h * i as f64;
        if let (Some((dl, _)), Some((dh, _))) = (gap_derivative(rif, lo, r), gap_derivative(rif, hi, r)) {
            if dl <= 0.0 && dh >= 0.0 {
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    match gap_derivative(rif, mid, root) {
                        Some((dm, rm)) => {
                            root = rm;
                            if dm < 0.0 {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        None => break,
                    }
                    if hi - lo < 1e-15 {
                        break;
                    }
                }
                theta = 0.5 * (lo + hi);
            }
        }
        let tau = unimodular(theta);
        let coeffs = rif.p().slice_unchecked(1, &[tau, C64::new(0.0, 0.0)]);
        let Some(rts) = roots::roots(&coeffs) else { continue };
        for (r, _) in roots::cluster_roots(&rts, 1e-6) {
            if (r.norm() - 1.0).abs() > 1e-6 {
                continue;
            }
            let gamma = to_circle(r);
            let z = [tau, gamma];
            let small = |v: C64| v.norm() < 1e-8 * scale;
            if small(rif.p().eval_unchecked(&z)) && small(rif.p_tilde().eval_unchecked(&z)) {
                let dup = found
                    .iter()
                    .any(|s| angular_distance(s[0], tau) < 1e-6 && angular_distance(s[1], gamma) < 1e-6);
                if !dup {
                    found.push(z);
                }
            }
        }
    }
    found.sort_by(|a, b| {
        (angle_0_2pi(a[0]), angle_0_2pi(a[1]))
            .partial_cmp(&(angle_0_2pi(b[0]), angle_0_2pi(b[1])))
            .unwrap()
    });
    Ok(found)
}
