//! Truncated singular potentials.
//!
//! `G_eps` regularizes `-log(u)` and `F_eps` regularizes `u log u - u + 1` by
//! clamping their second derivatives outside `(eps, 1/eps)`:
//!
//! ```text
//! G''(u) = 1/eps^2   (u < eps)      F''(u) = 1/a_eps(u),
//!          1/u^2     (eps..1/eps)   a_eps(u) = eps (u <= eps), u, 1/eps (u >= 1/eps)
//!          eps^2     (u > 1/eps)
//! ```
//!
//! The outer branches are the quadratic continuations that match value and
//! slope of the middle branch at `eps` and `1/eps`.

use crate::error::{Error, Result};
use crate::mesh::{CellField, NodalField};

/// Truncation parameter `eps` in `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    eps: f64,
}

impl Truncation {
    pub fn new(eps: f64) -> Result<Self> {
        if eps > 0.0 && eps < 1.0 {
            Ok(Self { eps })
        } else {
            Err(Error::InvalidParameter(format!(
                "truncation eps must lie in (0, 1), got {eps}"
            )))
        }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn g_second(&self, u: f64) -> f64 {
        let e = self.eps;
        if u < e {
            1.0 / (e * e)
        } else if u <= 1.0 / e {
            1.0 / (u * u)
        } else {
            e * e
        }
    }

    pub fn g_prime(&self, u: f64) -> f64 {
        let e = self.eps;
        if u < e {
            -1.0 / e + (u - e) / (e * e)
        } else if u <= 1.0 / e {
            -1.0 / u
        } else {
            -e + e * e * (u - 1.0 / e)
        }
    }

    /// `G_eps(u) - 1/eps`. Differences of `G_eps` should go through this to
    /// avoid cancelling the large constant.
    pub fn g_shifted(&self, u: f64) -> f64 {
        let e = self.eps;
        if u < e {
            let d = u - e;
            -e.ln() - d / e + d * d / (2.0 * e * e)
        } else if u <= 1.0 / e {
            -u.ln()
        } else {
            let d = u - 1.0 / e;
            e.ln() - e * d + 0.5 * e * e * d * d
        }
    }

    pub fn g(&self, u: f64) -> f64 {
        self.g_shifted(u) + 1.0 / self.eps
    }

    /// Average of `G''` over the interval between `u1` and `u2`, i.e. the
    /// divided difference `(G'(u2) - G'(u1)) / (u2 - u1)` evaluated without
    /// subtracting nearly equal numbers.
    pub fn g_second_mean(&self, u1: f64, u2: f64) -> f64 {
        let (lo, hi) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
        if hi == lo {
            return self.g_second(lo);
        }
        let e = self.eps;
        let upper = 1.0 / e;
        let mut integral = 0.0;
        if lo < e {
            integral += (hi.min(e) - lo) / (e * e);
        }
        let (p, q) = (lo.max(e), hi.min(upper));
        if q > p {
            integral += (q - p) / (p * q);
        }
        if hi > upper {
            integral += (hi - lo.max(upper)) * e * e;
        }
        integral / (hi - lo)
    }

    pub fn a(&self, u: f64) -> f64 {
        let e = self.eps;
        if u <= e {
            e
        } else if u < 1.0 / e {
            u
        } else {
            1.0 / e
        }
    }

    pub fn f_second(&self, u: f64) -> f64 {
        1.0 / self.a(u)
    }

    pub fn f_prime(&self, u: f64) -> f64 {
        let e = self.eps;
        if u <= e {
            e.ln() + (u - e) / e
        } else if u < 1.0 / e {
            u.ln()
        } else {
            -e.ln() + e * (u - 1.0 / e)
        }
    }

    pub fn f(&self, u: f64) -> f64 {
        let e = self.eps;
        if u <= e {
            let d = u - e;
            e * e.ln() - e + 1.0 + e.ln() * d + d * d / (2.0 * e)
        } else if u < 1.0 / e {
            u * u.ln() - u + 1.0
        } else {
            let top = 1.0 / e;
            let d = u - top;
            -top * e.ln() - top + 1.0 - e.ln() * d + 0.5 * e * d * d
        }
    }

    /// Element-wise sensitivity coefficient with `(L dG')^2 = du dG'` on every
    /// element, where `dG'` is the element derivative of `I_h G_eps'(u)`.
    ///
    /// On elements where `u_j != u_{j+1}` the magnitude is
    /// `sqrt(du / dG') = 1 / sqrt(mean G'')` and the sign follows the element
    /// midpoint value (`+` on a tie). Flat elements take the value `u_j`.
    pub fn lambda(&self, u: &NodalField) -> CellField {
        let values = u
            .values()
            .windows(2)
            .map(|p| {
                let (l, r) = (p[0], p[1]);
                if l == r {
                    return l;
                }
                let magnitude = 1.0 / self.g_second_mean(l, r).sqrt();
                if l + r >= 0.0 {
                    magnitude
                } else {
                    -magnitude
                }
            })
            .collect();
        CellField::new(*u.mesh(), values).expect("one value per element")
    }
}

pub fn pos_part(u: f64) -> f64 {
    u.max(0.0)
}

pub fn neg_part(u: f64) -> f64 {
    u.min(0.0)
}
