//! Global minimization of `q ↦ F*(y − X(q))` over a closed surface.
//!
//! Node values are bracketed cheaply: with `w = ν/F(ν)`,
//! `F*(v) ≥ max(|v|/R, ⟨v, w⟩)` where `R` bounds the Wulff shape, and
//! `F*(v) ≤ min(a + |v − aφ(ν)|/r, |v|/r)` with `a = ⟨v, w⟩` and `r` the
//! inradius.
//! Both are tight when `ν` is the foot-point normal of `y`, so exact dual
//! solves are only needed where the bracket is loose and the node matters.

use std::cell::Cell;

use rstar::primitives::GeomWithData;
use rstar::RTree;

use crate::anisotropy::AnisotropyNorm;
use crate::surface::Hypersurface;
use crate::{Error, Param, Result, Vector};

type Entry = GeomWithData<[f64; 3], u32>;

/// Sampled surface with a spatial index, dense enough (4× the base
/// quadrature nodes) to seed local refinement.
pub(crate) struct SurfaceSearch<'a, const D: usize> {
    pub norm: &'a AnisotropyNorm<D>,
    pub surface: &'a Hypersurface<D>,
    shape: [usize; 2],
    step: [f64; 2],
    params: Vec<Param>,
    pos: Vec<Vector<D>>,
    normal: Vec<Vector<D>>,
    w: Vec<Vector<D>>,
    phi: Vec<Vector<D>>,
    /// Largest distance between grid neighbours.
    cell: f64,
    r_max: f64,
    f_min: f64,
    diameter: f64,
    tree: RTree<Entry>,
}

/// Reusable per-thread scratch for node values. It also remembers the
/// last dual maximizer `ψ` at each node, with `ψ/F(ψ)`: a near-exact lower
/// bound `⟨v, ψ⟩/F(ψ)` for nearby query points, and a seed for exact solves.
pub(crate) struct Scratch<const D: usize> {
    value: Vec<f64>,
    dual: Vec<(Vector<D>, Vector<D>)>,
    touched: Vec<usize>,
    dense: bool,
    nodes: Vec<usize>,
    low: Vec<usize>,
}

impl<const D: usize> Scratch<D> {
    fn reset(&mut self) {
        if self.dense {
            self.value.fill(f64::NAN);
            self.dense = false;
        } else {
            for &i in &self.touched {
                self.value[i] = f64::NAN;
            }
        }
        self.touched.clear();
        self.low.clear();
    }
}

/// Outcome of a threshold test.
pub(crate) enum Threshold {
    /// Every surface point is at distance ≥ the threshold.
    Holds,
    /// A point closer than the threshold.
    Below(Param),
}

/// Which node values matter for a threshold `t`: a continuous minimum
/// lies within half a cell of some node, and near a node of value `v` the
/// distance function bends by at most about `stretch/(f_min·v)`, so only
/// nodes with `v < t + margin + C/v` can hide one.
#[derive(Clone, Copy)]
struct Window {
    base: f64,
    bend: f64,
    tol: f64,
}

impl Window {
    fn ceiling(&self, v: f64) -> f64 {
        self.base + self.bend / v.max(self.tol)
    }

    /// Largest value that can fall under its own ceiling.
    fn reach(&self) -> f64 {
        if self.bend == 0.0 {
            return self.base;
        }
        0.5 * (self.base + (self.base * self.base + 4.0 * self.bend).sqrt())
    }

    /// Every value matters.
    const ALL: Window = Window { base: f64::INFINITY, bend: 0.0, tol: 0.0 };
}

fn pad<const D: usize>(v: &Vector<D>) -> [f64; 3] {
    [v[0], v[1], if D > 2 { v[2] } else { 0.0 }]
}

impl<'a, const D: usize> SurfaceSearch<'a, D> {
    /// `count` is the total node target: `4·N` midpoints on curves, and a
    /// `2N_θ × 2N_φ` grid on surfaces.
    pub fn new(
        norm: &'a AnisotropyNorm<D>,
        surface: &'a Hypersurface<D>,
        base_shape: [usize; 2],
        diameter: f64,
    ) -> Result<Self> {
        let tau = std::f64::consts::TAU;
        let (shape, params): ([usize; 2], Vec<Param>) = if D == 2 {
            let m = 4 * base_shape[0];
            ([m, 1], (0..m).map(|k| [tau * (k as f64 + 0.5) / m as f64, 0.0]).collect())
        } else {
            let (nt, np) = (2 * base_shape[0], 2 * base_shape[1]);
            let mut ps = Vec::with_capacity(nt * np);
            for i in 0..nt {
                let t = std::f64::consts::PI * (i as f64 + 0.5) / nt as f64;
                for j in 0..np {
                    ps.push([t, tau * j as f64 / np as f64]);
                }
            }
            ([nt, np], ps)
        };
        let step = if D == 2 {
            [tau / shape[0] as f64, 0.0]
        } else {
            [std::f64::consts::PI / shape[0] as f64, tau / shape[1] as f64]
        };
        let mut pos = Vec::with_capacity(params.len());
        let mut normal = Vec::with_capacity(params.len());
        let mut w = Vec::with_capacity(params.len());
        let mut phi = Vec::with_capacity(params.len());
        for p in &params {
            let x = surface.position(p);
            let nu = surface.gauss_map(p)?;
            let (f, g, _) = norm.jet(&nu);
            pos.push(x);
            normal.push(nu);
            w.push(nu / f);
            phi.push(g);
        }
        let mut search = Self {
            norm,
            surface,
            shape,
            step,
            params,
            pos,
            normal,
            w,
            phi,
            cell: 0.0,
            r_max: norm.max_radius(),
            f_min: norm.min_support(),
            diameter,
            tree: RTree::new(),
        };
        let mut cell: f64 = 0.0;
        for i in 0..search.params.len() {
            for j in search.neighbours(i) {
                cell = cell.max((search.pos[i] - search.pos[j]).norm());
            }
        }
        search.cell = cell;
        let entries = search.pos.iter().enumerate().map(|(i, x)| Entry::new(pad(x), i as u32)).collect();
        search.tree = RTree::bulk_load(entries);
        Ok(search)
    }

    pub fn scratch(&self) -> Scratch<D> {
        Scratch {
            value: vec![f64::NAN; self.params.len()],
            dual: self.normal.iter().zip(&self.w).map(|(n, w)| (*n, *w)).collect(),
            touched: Vec::new(),
            dense: false,
            nodes: Vec::new(),
            low: Vec::new(),
        }
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn node_count(&self) -> usize {
        self.params.len()
    }

    /// Grid neighbours, including across the seam and the poles.
    fn neighbours(&self, idx: usize) -> impl Iterator<Item = usize> {
        let mut out = [0usize; 8];
        if D == 2 {
            let m = self.shape[0];
            out[0] = (idx + m - 1) % m;
            out[1] = (idx + 1) % m;
            return out.into_iter().take(2);
        }
        let (nt, np) = (self.shape[0] as isize, self.shape[1] as isize);
        let (i, j) = ((idx / self.shape[1]) as isize, (idx % self.shape[1]) as isize);
        let mut k = 0;
        for di in -1..=1 {
            for dj in -1..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (mut ii, mut jj) = (i + di, j + dj);
                if ii < 0 || ii >= nt {
                    ii = if ii < 0 { 0 } else { nt - 1 };
                    jj += np / 2;
                }
                out[k] = (ii * np + jj.rem_euclid(np)) as usize;
                k += 1;
            }
        }
        out.into_iter().take(8)
    }

    /// Neighbour pairs along each parameter direction, for parabolic fits.
    fn axis_pairs(&self, idx: usize) -> impl Iterator<Item = (usize, usize)> {
        if D == 2 {
            let m = self.shape[0];
            let pair = ((idx + m - 1) % m, (idx + 1) % m);
            return [pair, pair].into_iter().take(1);
        }
        let (nt, np) = (self.shape[0], self.shape[1]);
        let (i, j) = (idx / np, idx % np);
        let up = if i == 0 { (j + np / 2) % np } else { (i - 1) * np + j };
        let down = if i + 1 == nt { (nt - 1) * np + (j + np / 2) % np } else { (i + 1) * np + j };
        [(up, down), (i * np + (j + np - 1) % np, i * np + (j + 1) % np)].into_iter().take(2)
    }

    /// Lower bound on `F*(v)` for `v = y − X_i`.
    #[inline]
    fn lower(&self, scratch: &Scratch<D>, i: usize, v: &Vector<D>) -> f64 {
        (v.norm() / self.r_max).max(v.dot(&self.w[i])).max(v.dot(&scratch.dual[i].1))
    }

    /// Upper bound on `F*(v)` for `v = y − X_i`.
    #[inline]
    fn upper(&self, i: usize, v: &Vector<D>) -> f64 {
        let a = v.dot(&self.w[i]);
        let round = v.norm() / self.f_min;
        if a > 0.0 {
            (a + (v - self.phi[i] * a).norm() / self.f_min).min(round)
        } else {
            round
        }
    }

    /// `F*(v)` from a bracket, solving exactly when it is loose.
    fn resolve(&self, scratch: &mut Scratch<D>, i: usize, v: &Vector<D>, lo: f64, hi: f64, tight: f64) -> Result<f64> {
        if hi - lo <= tight {
            return Ok(lo);
        }
        let (value, psi) = self.exact(v, &scratch.dual[i].0)?;
        scratch.dual[i] = (psi, psi / self.norm.eval(&psi));
        Ok(value)
    }

    /// `F*(y − X_i)`, exact when the bracket is loose and its lower end
    /// is under the window's ceiling; otherwise the lower end.
    fn node_value(&self, scratch: &mut Scratch<D>, i: usize, y: &Vector<D>, tight: f64, win: Window) -> Result<f64> {
        let v = y - self.pos[i];
        let lo = self.lower(scratch, i, &v);
        if lo >= win.ceiling(lo) {
            return Ok(lo);
        }
        let hi = self.upper(i, &v);
        self.resolve(scratch, i, &v, lo, hi, tight)
    }

    fn exact(&self, v: &Vector<D>, seed: &Vector<D>) -> Result<(f64, Vector<D>)> {
        match self.norm.dual_seeded(v, seed) {
            Ok(s) => Ok((s.value, s.point)),
            Err(_) => self.norm.dual_solve(v).map(|s| (s.value, s.point)),
        }
    }

    fn cached(&self, scratch: &mut Scratch<D>, i: usize, y: &Vector<D>, tight: f64, win: Window) -> Result<f64> {
        if scratch.value[i].is_nan() {
            scratch.value[i] = self.node_value(scratch, i, y, tight, win)?;
            scratch.touched.push(i);
        }
        Ok(scratch.value[i])
    }

    /// Nodes that can hold values below `bound`, or `None` for all of them.
    fn candidates(&self, y: &Vector<D>, bound: f64, out: &mut Vec<usize>) -> bool {
        let radius = self.r_max * bound + self.cell;
        // Large balls are cheaper to scan than to query.
        if radius >= 0.5 * self.diameter {
            return false;
        }
        out.clear();
        out.extend(self.tree.locate_within_distance(pad(y), radius * radius).map(|e| e.data as usize));
        true
    }

    fn window(&self, t: f64, tol: f64) -> Window {
        let stretch = self.r_max / self.f_min;
        Window {
            base: t + 0.005 * t + 2.0 * tol,
            bend: stretch * self.cell * self.cell / (4.0 * self.f_min),
            tol,
        }
    }

    /// Is `d_F(M, y) ≥ threshold`, up to `tol/2`? Nodes more than `window`
    /// above the threshold are not examined further; local minima whose
    /// parabolic extrapolation drops below `threshold − tol/2` are refined.
    /// Flat ties (spheres at their centre) therefore cost no refinement.
    pub fn threshold_test(&self, scratch: &mut Scratch<D>, y: &Vector<D>, threshold: f64, tol: f64) -> Result<Threshold> {
        scratch.reset();
        let win = self.window(threshold, tol);
        let tight = 1e-3 * tol;
        let mut nodes = std::mem::take(&mut scratch.nodes);
        let sparse = self.candidates(y, win.reach(), &mut nodes);
        let count = if sparse { nodes.len() } else { self.params.len() };
        scratch.dense = !sparse;
        for k in 0..count {
            let i = if sparse { nodes[k] } else { k };
            let v = y - self.pos[i];
            let lo = self.lower(scratch, i, &v);
            if lo >= win.ceiling(lo) {
                scratch.value[i] = lo;
                if sparse {
                    scratch.touched.push(i);
                }
                continue;
            }
            let hi = self.upper(i, &v);
            if hi < threshold {
                scratch.nodes = nodes;
                return self.witness(i, y, tol);
            }
            let value = self.resolve(scratch, i, &v, lo, hi, tight)?;
            scratch.value[i] = value;
            if sparse {
                scratch.touched.push(i);
            }
            if value < threshold {
                scratch.nodes = nodes;
                return self.witness(i, y, tol);
            }
            if value < win.ceiling(value) {
                scratch.low.push(i);
            }
        }
        scratch.nodes = nodes;
        let low = std::mem::take(&mut scratch.low);
        let mut outcome = Threshold::Holds;
        for &i in &low {
            let v = scratch.value[i];
            let dip = self.parabolic_dip(scratch, i, y, tight, win)?;
            if v - 1.5 * dip >= threshold - 0.5 * tol || !self.is_local_min(scratch, i, y, tight, win)? {
                continue;
            }
            let (_, m) = self.refine(i, y, Some(threshold), 1e-3 * tol)?;
            if m < threshold {
                outcome = self.witness(i, y, tol)?;
                break;
            }
        }
        scratch.low = low;
        Ok(outcome)
    }

    /// A sub-threshold node, polished to its local minimizer: the sharper
    /// the witness, the closer its root lands to the cut time.
    fn witness(&self, i: usize, y: &Vector<D>, tol: f64) -> Result<Threshold> {
        let (q, _) = self.refine(i, y, None, 1e-3 * tol)?;
        Ok(Threshold::Below(q))
    }

    fn is_local_min(&self, scratch: &mut Scratch<D>, i: usize, y: &Vector<D>, tight: f64, win: Window) -> Result<bool> {
        let v = scratch.value[i];
        for j in self.neighbours(i) {
            if self.cached(scratch, j, y, tight, win)? < v {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn parabolic_dip(&self, scratch: &mut Scratch<D>, i: usize, y: &Vector<D>, tight: f64, win: Window) -> Result<f64> {
        let f0 = scratch.value[i];
        let mut dip = 0.0;
        for (a, b) in self.axis_pairs(i) {
            let fa = self.cached(scratch, a, y, tight, win)?;
            let fb = self.cached(scratch, b, y, tight, win)?;
            let curv = fa + fb - 2.0 * f0;
            if curv > 0.0 {
                dip += (fb - fa).powi(2) / (8.0 * curv);
            }
        }
        Ok(dip)
    }

    /// `d_F(M, y)` and a minimizing parameter.
    pub fn distance(&self, scratch: &mut Scratch<D>, y: &Vector<D>) -> Result<(f64, Param)> {
        scratch.reset();
        let tight = 1e-14 * self.diameter;
        let mut best_upper = f64::INFINITY;
        let mut lowers = Vec::with_capacity(self.params.len());
        for i in 0..self.params.len() {
            let v = y - self.pos[i];
            let lo = self.lower(scratch, i, &v);
            best_upper = best_upper.min(self.upper(i, &v).max(lo));
            lowers.push(lo);
        }
        let win = self.window(best_upper, 1e-10 * self.diameter);
        let mut low = Vec::new();
        for (i, lo) in lowers.iter().enumerate() {
            if *lo < win.ceiling(*lo) {
                let v = self.cached(scratch, i, y, tight, Window::ALL)?;
                low.push((v, i));
            }
        }
        low.sort_by(|a, b| a.0.total_cmp(&b.0));
        let discrete_best = low[0].0;
        let win = self.window(discrete_best, 1e-10 * self.diameter);
        let mut best = (discrete_best, self.params[low[0].1]);
        for &(v, i) in &low {
            if v >= win.ceiling(v) {
                continue;
            }
            if !self.is_local_min(scratch, i, y, tight, Window::ALL)? {
                continue;
            }
            let dip = self.parabolic_dip(scratch, i, y, tight, Window::ALL)?;
            if v - 1.5 * dip - 1e-12 * self.diameter > best.0 {
                continue;
            }
            let (q, m) = self.refine(i, y, None, 0.0)?;
            if m < best.0 {
                best = (m, q);
            }
        }
        Ok(best)
    }

    /// Value and parameter gradient of `q ↦ F*(y − X(q))`. The gradient is
    /// `−⟨∇F*(v), X_q⟩` with `∇F*(v) = ψ/F(ψ)`. `None` where the chart
    /// degenerates.
    fn value_gradient(&self, q: &Param, y: &Vector<D>, seed: &mut Vector<D>) -> Result<Option<(f64, [f64; 2])>> {
        let Ok(jet) = self.surface.jet(q) else {
            return Ok(None);
        };
        let (value, psi) = self.exact(&(y - jet.position), seed)?;
        *seed = psi;
        let f = self.norm.eval(&psi);
        let mut g = [0.0; 2];
        for k in 0..D - 1 {
            g[k] = -psi.dot(&jet.tangents[k]) / f;
        }
        Ok(Some((value, g)))
    }

    /// Damped Newton from node `i` with a differenced Hessian. `None` if the
    /// chart degenerates on the way or it fails to settle.
    fn newton(&self, i: usize, y: &Vector<D>, stop_below: Option<f64>, value_tol: f64) -> Result<Option<(Param, f64)>> {
        let n = D - 1;
        let mut seed = self.normal[i];
        let mut q = self.params[i];
        let Some((mut fq, mut g)) = self.value_gradient(&q, y, &mut seed)? else {
            return Ok(None);
        };
        let mut hess = [[0.0; 2]; 2];
        // Chord steps: the Hessian is only refreshed after a rejected step.
        let mut stale = true;
        let mut fresh = false;
        for _ in 0..40 {
            if stop_below.map_or(false, |s| fq < s) {
                return Ok(Some((q, fq)));
            }
            if stale {
                let Some(h) = self.param_hessian(&q, y, &seed)? else {
                    return Ok(None);
                };
                hess = h;
                fresh = true;
            }
            let off = hess[0][1];
            // Shift to positive definite, keep a floor for flat directions.
            let scale = hess[0][0].abs() + hess[1][1].abs() + 2.0 * off.abs();
            let lmin = if n == 1 {
                hess[0][0]
            } else {
                let m = 0.5 * (hess[0][0] + hess[1][1]);
                let r = (0.25 * (hess[0][0] - hess[1][1]).powi(2) + off * off).sqrt();
                m - r
            };
            let mu = (1e-6 * scale - lmin).max(1e-6 * scale).max(f64::MIN_POSITIVE);
            let mut d = [0.0; 2];
            if n == 1 {
                d[0] = -g[0] / (hess[0][0] + mu);
            } else {
                let (a, b, c) = (hess[0][0] + mu, off, hess[1][1] + mu);
                let det = a * c - b * b;
                d = [-(c * g[0] - b * g[1]) / det, -(a * g[1] - b * g[0]) / det];
            }
            let cap = (0..n).map(|k| d[k].abs() / self.step[k]).fold(0.0, f64::max);
            if cap > 1.0 {
                d = d.map(|x| x / cap);
            }
            let predicted = -(0..n).map(|k| g[k] * d[k]).sum::<f64>();
            if predicted <= value_tol || (0..n).all(|k| d[k].abs() <= 1e-13 * self.step[k]) {
                return Ok(Some((q, fq)));
            }
            // The model minimum is about `fq − predicted/2`; twice the full
            // prediction clear of the threshold is settled.
            if fresh && stop_below.map_or(false, |s| fq - 2.0 * predicted >= s) {
                return Ok(Some((q, fq)));
            }
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..if fresh { 30 } else { 1 } {
                let trial = [q[0] + t * d[0], q[1] + t * d[1]];
                let mut s = seed;
                let Some((ft, gt)) = self.value_gradient(&trial, y, &mut s)? else {
                    return Ok(None);
                };
                if ft < fq {
                    q = trial;
                    fq = ft;
                    g = gt;
                    seed = s;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved && fresh {
                return Ok(Some((q, fq)));
            }
            stale = !moved;
            fresh = false;
        }
        Ok(None)
    }

    /// Differenced parameter Hessian of `q ↦ F*(y − X(q))`, symmetrized.
    fn param_hessian(&self, q: &Param, y: &Vector<D>, seed: &Vector<D>) -> Result<Option<[[f64; 2]; 2]>> {
        let n = D - 1;
        let mut hess = [[0.0; 2]; 2];
        for k in 0..n {
            let h = 1e-5 * self.step[k];
            let (mut qp, mut qm) = (*q, *q);
            qp[k] += h;
            qm[k] -= h;
            let mut s = *seed;
            let Some((_, gp)) = self.value_gradient(&qp, y, &mut s)? else {
                return Ok(None);
            };
            let mut s = *seed;
            let Some((_, gm)) = self.value_gradient(&qm, y, &mut s)? else {
                return Ok(None);
            };
            for l in 0..n {
                hess[l][k] = (gp[l] - gm[l]) / (2.0 * h);
            }
        }
        let off = 0.5 * (hess[0][1] + hess[1][0]);
        hess[0][1] = off;
        hess[1][0] = off;
        Ok(Some(hess))
    }

    /// Local minimization from node `i`: Newton, falling back to golden
    /// section on curves and Nelder–Mead on surfaces. Stops early once a
    /// value drops below `stop_below`, or when the predicted (or observed)
    /// decrease falls under `value_tol`.
    fn refine(&self, i: usize, y: &Vector<D>, stop_below: Option<f64>, value_tol: f64) -> Result<(Param, f64)> {
        if let Some((q, v)) = self.newton(i, y, stop_below, value_tol)? {
            let q = if D == 2 { [q[0].rem_euclid(std::f64::consts::TAU), 0.0] } else { q };
            return Ok((q, v));
        }
        self.derivative_free(i, y, stop_below, value_tol)
    }

    fn derivative_free(&self, i: usize, y: &Vector<D>, stop_below: Option<f64>, value_tol: f64) -> Result<(Param, f64)> {
        let seed = Cell::new(self.normal[i]);
        let f = |q: &Param| -> Result<f64> {
            let v = y - self.surface.position(q);
            let (val, psi) = self.exact(&v, &seed.get())?;
            seed.set(psi);
            Ok(val)
        };
        let below = |v: f64| stop_below.map_or(false, |s| v < s);
        let start = self.params[i];
        if D == 2 {
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let (mut a, mut b) = (start[0] - self.step[0], start[0] + self.step[0]);
            let mut c = b - g * (b - a);
            let mut d = a + g * (b - a);
            let (mut fc, mut fd) = (f(&[c, 0.0])?, f(&[d, 0.0])?);
            for _ in 0..200 {
                if below(fc.min(fd)) || b - a <= 1e-10 || (fc - fd).abs() <= value_tol && b - a <= 1e-6 * self.step[0] {
                    break;
                }
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = f(&[c, 0.0])?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = f(&[d, 0.0])?;
                }
            }
            let (q, v) = if fc < fd { (c, fc) } else { (d, fd) };
            let f0 = f(&start)?;
            return Ok(if f0 < v { (start, f0) } else { ([q.rem_euclid(std::f64::consts::TAU), 0.0], v) });
        }
        nelder_mead(&f, start, self.step, &below, value_tol)
    }
}

/// Nelder–Mead on the 2-parameter chart.
fn nelder_mead<F, B>(f: &F, start: Param, step: [f64; 2], below: &B, value_tol: f64) -> Result<(Param, f64)>
where
    F: Fn(&Param) -> Result<f64>,
    B: Fn(f64) -> bool,
{
    let mut simplex = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut values = [f(&simplex[0])?, f(&simplex[1])?, f(&simplex[2])?];
    let lerp = |a: &Param, b: &Param, t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for iteration in 0.. {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|k| simplex[k]);
        values = order.map(|k| values[k]);
        if below(values[0]) {
            break;
        }
        let size = (0..2)
            .map(|k| (simplex[k + 1][0] - simplex[0][0]).abs().max((simplex[k + 1][1] - simplex[0][1]).abs()))
            .fold(0.0, f64::max);
        if values[2] - values[0] <= value_tol || size <= 1e-10 {
            break;
        }
        if iteration >= 500 {
            return Err(Error::RefinementStall { param: simplex[0] });
        }
        let centroid = lerp(&simplex[0], &simplex[1], 0.5);
        let reflected = lerp(&simplex[2], &centroid, 2.0);
        let fr = f(&reflected)?;
        if fr < values[0] {
            let expanded = lerp(&simplex[2], &centroid, 3.0);
            let fe = f(&expanded)?;
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] {
                lerp(&simplex[2], &centroid, 1.5)
            } else {
                lerp(&simplex[2], &centroid, 0.5)
            };
            let fc = f(&contracted)?;
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = lerp(&simplex[0], &simplex[k], 0.5);
                    values[k] = f(&simplex[k])?;
                }
            }
        }
    }
    Ok((simplex[0], values[0]))
}
