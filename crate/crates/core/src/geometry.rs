//! Small fixed-size vector helpers for the unit torus.

/// Planar vector `(x, y)`.
pub type Vec2 = [f64; 2];

/// Row-major 2x2 matrix; `m[i][j]` is the derivative of component `i`
/// with respect to coordinate `j` when used as a Jacobian.
pub type Mat2 = [[f64; 2]; 2];

/// Maps a coordinate onto `[-1/2, 1/2)`.
#[inline]
pub fn wrap_coord(x: f64) -> f64 {
    let w = x - (x + 0.5).floor();
    if w >= 0.5 {
        w - 1.0
    } else {
        w
    }
}

#[inline]
pub fn wrap(r: Vec2) -> Vec2 {
    [wrap_coord(r[0]), wrap_coord(r[1])]
}

#[inline]
pub fn norm(v: Vec2) -> f64 {
    v[0].hypot(v[1])
}

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn mat_vec(m: &Mat2, v: Vec2) -> Vec2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

#[inline]
pub fn trace(m: &Mat2) -> f64 {
    m[0][0] + m[1][1]
}

#[inline]
pub fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_stays_in_half_open_box() {
        for &x in &[-0.5, 0.5, 1.5, -1.5, 0.49999999999999994, -0.5000000000000001, 7.25, -3.75] {
            let w = wrap_coord(x);
            assert!((-0.5..0.5).contains(&w), "{x} -> {w}");
            assert!(((x - w) - (x - w).round()).abs() < 1e-12);
        }
        assert_eq!(wrap_coord(0.5), -0.5);
    }
}
