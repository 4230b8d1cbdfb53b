//! Analytic test data: trigonometric polynomials, area-preserving shears of
//! the torus, a warp of the patch, and the standard field configurations.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::fields::{pullback_point, FieldState, TangentField};
use super::grid::Grid;
use crate::error::Result;
use crate::linalg::{j0, M2, V2};
use crate::pointmodel::{point_from_coords, CoordPoint, PointState};

/// One term `amp · cos(2π(kx x + ky y) + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub amp: f64,
    pub kx: i32,
    pub ky: i32,
    pub phase: f64,
}

/// A real trigonometric polynomial on the unit torus with exact derivatives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    pub terms: Vec<TrigTerm>,
}

impl TrigPoly {
    pub fn new(terms: Vec<TrigTerm>) -> Self {
        Self { terms }
    }

    pub fn single(amp: f64, kx: i32, ky: i32, phase: f64) -> Self {
        Self { terms: vec![TrigTerm { amp, kx, ky, phase }] }
    }

    /// Random coefficients on `|kx|, |ky| ≤ kmax`, decaying like `1/(1 + |k|²)`.
    pub fn random(rng: &mut impl Rng, kmax: i32, amp: f64) -> Self {
        let mut terms = Vec::new();
        for kx in 0..=kmax {
            for ky in -kmax..=kmax {
                if kx == 0 && ky < 0 {
                    continue;
                }
                let decay = 1.0 / (1.0 + (kx * kx + ky * ky) as f64);
                let a = amp * decay * rng.random_range(-1.0..1.0);
                terms.push(TrigTerm { amp: a, kx, ky, phase: rng.random_range(0.0..2.0 * PI) });
            }
        }
        Self { terms }
    }

    fn angle(t: &TrigTerm, x: f64, y: f64) -> f64 {
        2.0 * PI * (t.kx as f64 * x + t.ky as f64 * y) + t.phase
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms.iter().map(|t| t.amp * Self::angle(t, x, y).cos()).sum()
    }

    pub fn grad(&self, x: f64, y: f64) -> V2 {
        self.terms.iter().fold(V2::zeros(), |acc, t| {
            let s = -t.amp * Self::angle(t, x, y).sin() * 2.0 * PI;
            acc + V2::new(s * t.kx as f64, s * t.ky as f64)
        })
    }

    pub fn hessian(&self, x: f64, y: f64) -> M2 {
        self.terms.iter().fold(M2::zeros(), |acc, t| {
            let c = -t.amp * Self::angle(t, x, y).cos() * 4.0 * PI * PI;
            let (kx, ky) = (t.kx as f64, t.ky as f64);
            acc + M2::new(kx * kx, kx * ky, kx * ky, ky * ky) * c
        })
    }

    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        grid.sample(|x, y| self.eval(x, y))
    }

    /// Hamiltonian vector field `(∂_y H, −∂_x H)` at a point.
    pub fn hamiltonian_at(&self, x: f64, y: f64) -> V2 {
        let d = self.grad(x, y);
        V2::new(d[1], -d[0])
    }

    /// Jacobian of [`TrigPoly::hamiltonian_at`].
    pub fn hamiltonian_jacobian(&self, x: f64, y: f64) -> M2 {
        let h = self.hessian(x, y);
        M2::new(h[(0, 1)], h[(1, 1)], -h[(0, 0)], -h[(0, 1)])
    }
}

/// The area-preserving torus map `(x, y) ↦ (x + a(y), y) ↦ (x', y' + b(x'))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShearMap {
    pub a: TrigPoly,
    pub b: TrigPoly,
}

impl ShearMap {
    pub fn identity() -> Self {
        Self { a: TrigPoly::default(), b: TrigPoly::default() }
    }

    /// `a(y) = s cos(2πy + 0.3) + (s/4) cos(4πy)`, `b(x) = s cos(2πx + 1.1)`.
    pub fn standard(s: f64) -> Self {
        Self {
            a: TrigPoly::new(vec![
                TrigTerm { amp: s, kx: 0, ky: 1, phase: 0.3 },
                TrigTerm { amp: s / 4.0, kx: 0, ky: 2, phase: 0.0 },
            ]),
            b: TrigPoly::single(s, 1, 0, 1.1),
        }
    }

    pub fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let qx = x + self.a.eval(0.0, y);
        (qx, y + self.b.eval(qx, 0.0))
    }

    pub fn jacobian(&self, x: f64, y: f64) -> M2 {
        let qx = x + self.a.eval(0.0, y);
        let s1 = M2::new(1.0, self.a.grad(0.0, y)[1], 0.0, 1.0);
        let s2 = M2::new(1.0, 0.0, self.b.grad(qx, 0.0)[0], 1.0);
        s2 * s1
    }
}

/// The constant Ţiţeica point `(J₀, A_w)` with `‖A‖₀² = |w|²/2`.
pub fn titeica_point(w: Complex64) -> PointState {
    point_from_coords(&CoordPoint { z: Complex64::i(), w }).expect("i lies in the upper half-plane")
}

/// Pull-back of the constant configuration by a shear, at one point.
pub fn titeica_at(w: Complex64, shear: &ShearMap, x: f64, y: f64) -> PointState {
    pullback_point(&titeica_point(w), &shear.jacobian(x, y))
}

pub fn titeica_field(grid: &Grid, w: Complex64, shear: &ShearMap) -> Result<FieldState> {
    let pts = grid.sample(|x, y| titeica_at(w, shear, x, y));
    FieldState::from_points(grid.clone(), &pts)
}

/// A non-area-preserving local diffeomorphism of the patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Warp {
    pub strength: f64,
}

impl Warp {
    /// `(x + s(x²/2 + sin y), y + s(sin x + xy))`.
    pub fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let s = self.strength;
        (x + s * (0.5 * x * x + y.sin()), y + s * (x.sin() + x * y))
    }

    pub fn jacobian(&self, x: f64, y: f64) -> M2 {
        let s = self.strength;
        M2::new(1.0 + s * x, s * y.cos(), s * (x.cos() + y), 1.0 + s * x)
    }
}

/// Pull-back by `warp` of the flat field whose cubic form is `Re(Q dz³)`.
pub fn holomorphic_at(q: &impl Fn(Complex64) -> Complex64, warp: &Warp, x: f64, y: f64) -> PointState {
    let (u, v) = warp.map(x, y);
    let flat = titeica_point(q(Complex64::new(u, v)).conj());
    pullback_point(&flat, &warp.jacobian(x, y))
}

pub fn holomorphic_field(grid: &Grid, q: impl Fn(Complex64) -> Complex64, warp: Warp) -> Result<FieldState> {
    let pts = grid.sample(|x, y| holomorphic_at(&q, &warp, x, y));
    FieldState::from_points(grid.clone(), &pts)
}

/// `J = P J₀ P^{-1}` with `P = [[e^a, b], [0, e^{-a}]]`.
pub fn conjugated_structure(a: f64, b: f64) -> M2 {
    let p = M2::new(a.exp(), b, 0.0, (-a).exp());
    let pi = M2::new((-a).exp(), -b, 0.0, a.exp());
    p * j0() * pi
}

/// Smooth periodic random data: `J` conjugated by an SL(2,ℝ) field and `A`
/// with random frame components. Not a Codazzi pair in general.
pub fn random_smooth_field(grid: &Grid, rng: &mut impl Rng, amp: f64) -> Result<FieldState> {
    let polys: Vec<TrigPoly> = (0..4).map(|_| TrigPoly::random(rng, 2, amp)).collect();
    let pts = grid.sample(|x, y| {
        let j = conjugated_structure(polys[0].eval(x, y), polys[1].eval(x, y));
        let (u, v) = (polys[2].eval(x, y), polys[3].eval(x, y));
        PointState::from_frame(j, [M2::new(u, v, v, -u), M2::new(v, -u, -u, -v)])
    });
    FieldState::from_points(grid.clone(), &pts)
}

/// Random smooth tangent field built from frame data.
pub fn random_tangent(fs: &FieldState, rng: &mut impl Rng, amp: f64) -> TangentField {
    let grid = fs.grid();
    let parts: Vec<Vec<f64>> = (0..4).map(|_| TrigPoly::random(rng, 2, amp).sample(grid)).collect();
    TangentField::from_frame_parts(fs, &parts[0], &parts[1], &parts[2], &parts[3])
}

/// The field scenarios offered to the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldScenario {
    Titeica,
    PatchHolomorphic,
    RandomSmooth,
}

impl std::str::FromStr for FieldScenario {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "titeica" => Ok(Self::Titeica),
            "patch-holomorphic" => Ok(Self::PatchHolomorphic),
            "random-smooth" => Ok(Self::RandomSmooth),
            other => Err(format!("unknown scenario `{other}` (titeica | patch-holomorphic | random-smooth)")),
        }
    }
}

impl std::fmt::Display for FieldScenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Titeica => "titeica",
            Self::PatchHolomorphic => "patch-holomorphic",
            Self::RandomSmooth => "random-smooth",
        })
    }
}

/// The cubic coefficient used by the patch scenario, `Q(z) = 1 + 0.4z + 0.3z² − 0.2i z³`.
pub fn patch_polynomial(z: Complex64) -> Complex64 {
    Complex64::new(1.0, 0.0) + z * 0.4 + z * z * 0.3 - Complex64::new(0.0, 0.2) * z * z * z
}
