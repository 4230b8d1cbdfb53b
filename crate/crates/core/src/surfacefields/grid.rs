//! Discretization substrates: a periodic grid on the unit torus with spectral
//! derivatives, and a planar patch with 9-point finite differences.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Result};
use crate::linalg::{Pick, M2, V2};

/// Quantities stored per node that differentiate componentwise.
pub trait Components: Copy + Send + Sync {
    const N: usize;
    fn zero() -> Self;
    fn get(&self, k: usize) -> f64;
    fn set(&mut self, k: usize, v: f64);
}

impl Components for f64 {
    const N: usize = 1;
    fn zero() -> Self {
        0.0
    }
    fn get(&self, _: usize) -> f64 {
        *self
    }
    fn set(&mut self, _: usize, v: f64) {
        *self = v;
    }
}

impl Components for V2 {
    const N: usize = 2;
    fn zero() -> Self {
        V2::zeros()
    }
    fn get(&self, k: usize) -> f64 {
        self[k]
    }
    fn set(&mut self, k: usize, v: f64) {
        self[k] = v;
    }
}

impl Components for M2 {
    const N: usize = 4;
    fn zero() -> Self {
        M2::zeros()
    }
    fn get(&self, k: usize) -> f64 {
        self[(k / 2, k % 2)]
    }
    fn set(&mut self, k: usize, v: f64) {
        self[(k / 2, k % 2)] = v;
    }
}

impl Components for Pick {
    const N: usize = 8;
    fn zero() -> Self {
        [M2::zeros(), M2::zeros()]
    }
    fn get(&self, k: usize) -> f64 {
        Components::get(&self[k / 4], k % 4)
    }
    fn set(&mut self, k: usize, v: f64) {
        Components::set(&mut self[k / 4], k % 4, v);
    }
}

/// Periodic grid of `n × n` nodes on `[0,1)²` with FFT derivatives.
#[derive(Clone)]
pub struct TorusGrid {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TorusGrid").field("n", &self.n).finish()
    }
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 16 || n % 2 != 0 {
            return domain(format!("torus grid needs an even resolution of at least 16, got {n}"));
        }
        let mut planner = FftPlanner::new();
        Ok(Self { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Signed integer frequency of index `i`.
    pub fn freq(&self, i: usize) -> f64 {
        let n = self.n as i64;
        let i = i as i64;
        (if i <= n / 2 { i } else { i - n }) as f64
    }

    /// Angular wavenumber `2π·freq`.
    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.freq(i)
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// 2D forward transform of a real field, index `iy * n + ix`.
    pub fn forward(&self, f: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.fwd);
        data
    }

    /// 2D inverse transform, normalized, real part.
    pub fn inverse_real(&self, mut data: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut data, &self.inv);
        let s = 1.0 / (self.n * self.n) as f64;
        data.iter().map(|c| c.re * s).collect()
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        for row in data.chunks_mut(n) {
            plan.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for ix in 0..n {
            for iy in 0..n {
                col[iy] = data[iy * n + ix];
            }
            plan.process(&mut col);
            for iy in 0..n {
                data[iy * n + ix] = col[iy];
            }
        }
    }

    /// Applies the Fourier multiplier `m(ix, iy)` to a real field.
    pub fn multiplier(&self, f: &[f64], m: impl Fn(usize, usize) -> Complex64) -> Vec<f64> {
        let n = self.n;
        let mut hat = self.forward(f);
        for iy in 0..n {
            for ix in 0..n {
                hat[iy * n + ix] *= m(ix, iy);
            }
        }
        self.inverse_real(hat)
    }

    fn deriv_scalar(&self, f: &[f64], axis: usize) -> Vec<f64> {
        self.multiplier(f, |ix, iy| {
            let i = if axis == 0 { ix } else { iy };
            if self.is_nyquist(i) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, self.wavenumber(i))
            }
        })
    }

    /// Flat Laplacian.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        self.multiplier(f, |ix, iy| {
            let (kx, ky) = (self.wavenumber(ix), self.wavenumber(iy));
            Complex64::new(-(kx * kx + ky * ky), 0.0)
        })
    }

    /// Solves `(−Δ + σ) u = f`; for `σ = 0` the mean of `u` is set to zero.
    pub fn solve_shifted(&self, f: &[f64], sigma: f64) -> Vec<f64> {
        self.multiplier(f, |ix, iy| {
            let (kx, ky) = (self.wavenumber(ix), self.wavenumber(iy));
            let d = kx * kx + ky * ky + sigma;
            if d == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0 / d, 0.0)
            }
        })
    }

    /// Ratio of the largest coefficient in the outer third of the spectrum to the largest overall.
    pub fn spectral_tail(&self, f: &[f64]) -> f64 {
        let n = self.n;
        let hat = self.forward(f);
        let cut = n as f64 / 3.0;
        let (mut tail, mut top) = (0.0_f64, 0.0_f64);
        for iy in 0..n {
            for ix in 0..n {
                let a = hat[iy * n + ix].norm();
                top = top.max(a);
                if self.freq(ix).abs() > cut || self.freq(iy).abs() > cut {
                    tail = tail.max(a);
                }
            }
        }
        if top == 0.0 {
            0.0
        } else {
            tail / top
        }
    }
}

/// Finite-difference weights for the first derivative at `x0` on `nodes` (Fornberg).
pub fn fornberg_first_derivative(x0: f64, nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    let mut c = vec![[0.0_f64; 2]; m];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..m {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Square planar patch with `n × n` nodes, spacing `h`, 9-point stencils.
#[derive(Debug, Clone)]
pub struct PatchGrid {
    n: usize,
    origin: [f64; 2],
    h: f64,
    margin: usize,
    /// `(start, weights)` for each node position along an axis.
    stencils: Arc<Vec<(usize, Vec<f64>)>>,
}

const STENCIL: usize = 9;

impl PatchGrid {
    pub fn new(n: usize, origin: [f64; 2], side: f64, margin: usize) -> Result<Self> {
        if n < 2 * STENCIL || !(side > 0.0) {
            return domain(format!("patch needs at least {} nodes per side and positive size", 2 * STENCIL));
        }
        let h = side / (n - 1) as f64;
        let stencils = (0..n)
            .map(|i| {
                let start = i.saturating_sub(STENCIL / 2).min(n - STENCIL);
                let nodes: Vec<f64> = (start..start + STENCIL).map(|k| k as f64 * h).collect();
                (start, fornberg_first_derivative(i as f64 * h, &nodes))
            })
            .collect();
        Ok(Self { n, origin, h, margin, stencils: Arc::new(stencils) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    fn deriv_scalar(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for iy in 0..n {
            for ix in 0..n {
                let (i, stride, base) = if axis == 0 { (ix, 1, iy * n) } else { (iy, n, ix) };
                let (start, w) = &self.stencils[i];
                let mut s = 0.0;
                for (k, wk) in w.iter().enumerate() {
                    s += wk * f[base + (start + k) * stride];
                }
                out[iy * n + ix] = s;
            }
        }
        out
    }
}

/// A discretization: a periodic spectral torus or a finite-difference patch.
#[derive(Debug, Clone)]
pub enum Grid {
    Torus(TorusGrid),
    Patch(PatchGrid),
}

impl Grid {
    pub fn torus(n: usize) -> Result<Self> {
        Ok(Grid::Torus(TorusGrid::new(n)?))
    }

    pub fn patch(n: usize, origin: [f64; 2], side: f64) -> Result<Self> {
        Ok(Grid::Patch(PatchGrid::new(n, origin, side, 4)?))
    }

    pub fn n(&self) -> usize {
        match self {
            Grid::Torus(t) => t.n(),
            Grid::Patch(p) => p.n(),
        }
    }

    pub fn len(&self) -> usize {
        self.n() * self.n()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_torus(&self) -> Option<&TorusGrid> {
        match self {
            Grid::Torus(t) => Some(t),
            Grid::Patch(_) => None,
        }
    }

    /// Node coordinates of flat index `idx = iy * n + ix`.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        let n = self.n();
        let (ix, iy) = (idx % n, idx / n);
        match self {
            Grid::Torus(_) => (ix as f64 / n as f64, iy as f64 / n as f64),
            Grid::Patch(p) => (p.origin[0] + ix as f64 * p.h, p.origin[1] + iy as f64 * p.h),
        }
    }

    /// Area weight of one node for the uniform Riemann sum.
    pub fn cell_area(&self) -> f64 {
        match self {
            Grid::Torus(t) => 1.0 / (t.n() * t.n()) as f64,
            Grid::Patch(p) => p.h * p.h,
        }
    }

    /// Nodes where residuals are evaluated: every node on the torus, nodes
    /// beyond the boundary margin on a patch.
    pub fn interior(&self) -> Vec<bool> {
        let n = self.n();
        match self {
            Grid::Torus(_) => vec![true; n * n],
            Grid::Patch(p) => (0..n * n)
                .map(|idx| {
                    let (ix, iy) = (idx % n, idx / n);
                    let m = p.margin;
                    ix >= m && iy >= m && ix + m < n && iy + m < n
                })
                .collect(),
        }
    }

    pub fn sample<T>(&self, f: impl Fn(f64, f64) -> T) -> Vec<T> {
        (0..self.len()).map(|i| {
            let (x, y) = self.point(i);
            f(x, y)
        }).collect()
    }

    fn deriv_scalar(&self, f: &[f64], axis: usize) -> Vec<f64> {
        match self {
            Grid::Torus(t) => t.deriv_scalar(f, axis),
            Grid::Patch(p) => p.deriv_scalar(f, axis),
        }
    }

    /// Partial derivative along `axis` (0 for x, 1 for y), componentwise.
    pub fn d<T: Components>(&self, f: &[T], axis: usize) -> Vec<T> {
        let mut out = vec![T::zero(); f.len()];
        let mut comp = vec![0.0; f.len()];
        for k in 0..T::N {
            for (c, v) in comp.iter_mut().zip(f) {
                *c = v.get(k);
            }
            let dk = self.deriv_scalar(&comp, axis);
            for (o, v) in out.iter_mut().zip(dk) {
                o.set(k, v);
            }
        }
        out
    }

    pub fn dx<T: Components>(&self, f: &[T]) -> Vec<T> {
        self.d(f, 0)
    }

    pub fn dy<T: Components>(&self, f: &[T]) -> Vec<T> {
        self.d(f, 1)
    }

    /// Riemann sum over the grid.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.cell_area()
    }

    /// Largest absolute value over the residual nodes.
    pub fn interior_max(&self, f: impl Iterator<Item = f64>) -> f64 {
        let mask = self.interior();
        f.zip(mask).filter(|(_, m)| *m).fold(0.0, |acc, (v, _)| acc.max(v.abs()))
    }
}
