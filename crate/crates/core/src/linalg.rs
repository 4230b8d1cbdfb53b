//! Small dense helpers shared by the point model and the field operators.

use nalgebra::{Matrix2, Vector2};

pub type M2 = Matrix2<f64>;
pub type V2 = Vector2<f64>;

/// Endomorphism-valued one-form on a plane: `a[i]` is the value on the i-th basis vector.
pub type Pick = [M2; 2];

/// Standard complex structure, rotation by a quarter turn.
pub fn j0() -> M2 {
    M2::new(0.0, -1.0, 1.0, 0.0)
}

/// Matrix of the area form dx∧dy, so that `rho(v, w) = v^T omega w`.
pub fn omega() -> M2 {
    M2::new(0.0, 1.0, -1.0, 0.0)
}

/// Diagonal reflection used by the tangent Pick form decomposition.
pub fn reflection_e() -> M2 {
    M2::new(1.0, 0.0, 0.0, -1.0)
}

pub fn commutator(a: &M2, b: &M2) -> M2 {
    a * b - b * a
}

pub fn pick_zero() -> Pick {
    [M2::zeros(), M2::zeros()]
}

pub fn pick_add(a: &Pick, b: &Pick) -> Pick {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn pick_sub(a: &Pick, b: &Pick) -> Pick {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn pick_scale(a: &Pick, s: f64) -> Pick {
    [a[0] * s, a[1] * s]
}

/// Right multiplication of each slot, `(A M)(X) = A(X) M`.
pub fn pick_mul_right(a: &Pick, m: &M2) -> Pick {
    [a[0] * m, a[1] * m]
}

/// Pre-composition of the one-form slot with `p`: `(A(p·))_i = sum_k p_{ki} A_k`.
pub fn pick_precompose(a: &Pick, p: &M2) -> Pick {
    [
        a[0] * p[(0, 0)] + a[1] * p[(1, 0)],
        a[0] * p[(0, 1)] + a[1] * p[(1, 1)],
    ]
}

/// Conjugation of each slot, `M A_i M^-1`.
pub fn pick_conj(a: &Pick, m: &M2, m_inv: &M2) -> Pick {
    [m * a[0] * m_inv, m * a[1] * m_inv]
}

/// Largest absolute entry.
pub fn pick_max_abs(a: &Pick) -> f64 {
    a[0].amax().max(a[1].amax())
}

/// Trace-free part of a 2×2 matrix.
pub fn trace_free(m: &M2) -> M2 {
    m - M2::identity() * (0.5 * m.trace())
}

/// Symmetric cubic form on the plane stored as `c[i][j][k]`.
pub type Cubic = [[[f64; 2]; 2]; 2];

/// Lower the endomorphism index: `C_{ijm} = g_{mk} (A_i)^k_j`.
pub fn lower_pick(a: &Pick, g: &M2) -> Cubic {
    let mut c = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        let ga = g * a[i];
        for j in 0..2 {
            for m in 0..2 {
                c[i][j][m] = ga[(m, j)];
            }
        }
    }
    c
}

/// Raise the last index: `(A_i)^k_j = g^{km} C_{ijm}`.
pub fn raise_cubic(c: &Cubic, g_inv: &M2) -> Pick {
    let mut a = pick_zero();
    for i in 0..2 {
        let mut ci = M2::zeros();
        for j in 0..2 {
            for m in 0..2 {
                ci[(m, j)] = c[i][j][m];
            }
        }
        a[i] = g_inv * ci;
    }
    a
}

/// Trace-free projection of a symmetric cubic form with respect to `g`:
/// `C - (3/4) sym(g ⊗ theta)` with `theta_k = g^{ij} C_{ijk}`.
pub fn cubic_trace_free(c: &Cubic, g: &M2, g_inv: &M2) -> Cubic {
    let theta = cubic_trace(c, g_inv);
    let mut out = *c;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let s = (g[(i, j)] * theta[k] + g[(i, k)] * theta[j] + g[(j, k)] * theta[i]) / 3.0;
                out[i][j][k] -= 0.75 * s;
            }
        }
    }
    out
}

/// Metric trace `theta_k = g^{ij} C_{ijk}`.
pub fn cubic_trace(c: &Cubic, g_inv: &M2) -> [f64; 2] {
    let mut theta = [0.0; 2];
    for (k, th) in theta.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                *th += g_inv[(i, j)] * c[i][j][k];
            }
        }
    }
    theta
}

/// `sum_ij g^{ij} tr(X_i Y_j)`, the invariant pairing of endomorphism-valued one-forms.
pub fn pick_inner(x: &Pick, y: &Pick, g_inv: &M2) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += g_inv[(i, j)] * (x[i] * y[j]).trace();
        }
    }
    s
}
