//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the odd-indexed Kronrod nodes (XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub initial_panels: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            initial_panels: 64,
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            max_panels: 8192,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: Complex64,
    pub error_estimate: f64,
    pub panels: usize,
}

struct Panel {
    lo: f64,
    hi: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut k15 = fc * WGK[7];
    let mut g7 = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        k15 += pair * WGK[j];
        if j % 2 == 1 {
            g7 += pair * WG[j / 2];
        }
    }
    let value = k15 * half;
    let error = ((k15 - g7) * half).norm();
    Panel {
        lo,
        hi,
        value,
        error,
    }
}

/// Integrate `f` over `[lo, hi]` (either orientation).
pub fn integrate<F>(f: F, lo: f64, hi: f64, opts: &QuadratureOptions) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    if lo == hi {
        return Ok(Integral {
            value: Complex64::new(0.0, 0.0),
            error_estimate: 0.0,
            panels: 0,
        });
    }
    if hi < lo {
        let mut r = integrate(f, hi, lo, opts)?;
        r.value = -r.value;
        return Ok(r);
    }

    let n0 = opts.initial_panels.max(1);
    let width = (hi - lo) / n0 as f64;
    let mut heap = BinaryHeap::with_capacity(2 * n0);
    for i in 0..n0 {
        let a = lo + width * i as f64;
        let b = if i + 1 == n0 { hi } else { a + width };
        heap.push(kronrod(&f, a, b));
    }

    loop {
        let (value, error) = heap.iter().fold((Complex64::new(0.0, 0.0), 0.0), |acc, p| {
            (acc.0 + p.value, acc.1 + p.error)
        });
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Quadrature {
                estimate: format!("{value}"),
                error_estimate: f64::INFINITY,
            });
        }
        if error <= opts.abs_tol.max(opts.rel_tol * value.norm()) {
            return Ok(Integral {
                value,
                error_estimate: error,
                panels: heap.len(),
            });
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::Quadrature {
                estimate: format!("{value}"),
                error_estimate: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        heap.push(kronrod(&f, worst.lo, mid));
        heap.push(kronrod(&f, mid, worst.hi));
    }
}
