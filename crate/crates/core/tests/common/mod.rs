//! Reference implementations shared by the integration tests.
//!
//! Nothing here calls into the kernel math of the library. Formulas are
//! written along different algebraic routes and integrals come from adaptive
//! Simpson, so agreement is evidence rather than tautology.

#![allow(dead_code)]

use l0_sampler::KernelKind;

pub const CLAMP: f64 = 1e-5;

/// Kernel value at `s`, from the weighted-mean form of each interpolant.
pub fn eval(kind: KernelKind, a: f64, b: f64, s: f64) -> f64 {
    let (a, b) = (a.max(CLAMP), b.max(CLAMP));
    match kind {
        KernelKind::Constant => 0.5 * (a + b),
        KernelKind::Linear => a * (1.0 - s) + b * s,
        // weighted geometric mean
        KernelKind::Exponential => a.powf(1.0 - s) * b.powf(s),
        // weighted harmonic mean
        KernelKind::Inverse => 1.0 / ((1.0 - s) / a + s / b),
        KernelKind::ArgmaxDelta => panic!("no unit shape"),
    }
}

/// `∫₀ˣ eval` from antiderivatives written out independently.
pub fn cdf(kind: KernelKind, a: f64, b: f64, x: f64) -> f64 {
    let (a, b) = (a.max(CLAMP), b.max(CLAMP));
    match kind {
        KernelKind::Constant => 0.5 * (a + b) * x,
        KernelKind::Linear => x * (a + 0.5 * (b - a) * x),
        KernelKind::Exponential => {
            let c = b.ln() - a.ln();
            if c.abs() < 1e-12 {
                a * x
            } else {
                a * (c * x).exp_m1() / c
            }
        }
        KernelKind::Inverse => {
            if a == b {
                a * x
            } else {
                a * b / (a - b) * ((a - b) * x / b).ln_1p()
            }
        }
        KernelKind::ArgmaxDelta => panic!("no unit shape"),
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    flo: f64,
    fmid: f64,
    fhi: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let (lm, rm) = (0.5 * (lo + mid), 0.5 * (mid + hi));
    let (flm, frm) = (f(lm), f(rm));
    let left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    let right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_step(f, lo, mid, flo, flm, fmid, left, 0.5 * tol, depth - 1)
        + simpson_step(f, mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson with Richardson extrapolation to an absolute tolerance.
pub fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let (flo, fhi) = (f(lo), f(hi));
    let mid = 0.5 * (lo + hi);
    let fmid = f(mid);
    let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    simpson_step(&f, lo, hi, flo, fmid, fhi, whole, tol, 48)
}

/// Quadrature of the kernel over `[0, x]`.
pub fn quad_cdf(kind: KernelKind, a: f64, b: f64, x: f64, tol: f64) -> f64 {
    simpson(|s| eval(kind, a, b, s), 0.0, x, tol)
}

/// Quadrature of `s · ŵ(s)` over `[0, 1]` divided by the mass.
pub fn quad_bias(kind: KernelKind, a: f64, b: f64) -> f64 {
    let moment = simpson(|s| s * eval(kind, a, b, s), 0.0, 1.0, 1e-15);
    moment / quad_cdf(kind, a, b, 1.0, 1e-15)
}

/// Solves `∫₀ˣ ŵ = r` by bisection on the quadrature CDF.
///
/// The CDF at the lower bracket is carried along, so each step only integrates
/// the half it discards.
pub fn bisect_icdf(kind: KernelKind, a: f64, b: f64, r: f64, tol: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut mass_lo = 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let mass_mid = mass_lo + simpson(|s| eval(kind, a, b, s), lo, mid, 1e-16);
        if mass_mid < r {
            lo = mid;
            mass_lo = mass_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// NeRF-style inversion of a piecewise-uniform density: prefix-sum the
/// normalized bin masses, find each `u` with a right-sided search, interpolate.
pub fn searchsorted_inversion(edges: &[f64], masses: &[f64], u: &[f64]) -> Vec<f64> {
    let total: f64 = masses.iter().sum();
    let mut cdf = vec![0.0];
    for m in masses {
        let last = *cdf.last().unwrap();
        cdf.push(last + m / total);
    }
    u.iter()
        .map(|&u| {
            let mut above = cdf.len() - 1;
            for (j, &c) in cdf.iter().enumerate() {
                if c > u {
                    above = j;
                    break;
                }
            }
            let below = above.saturating_sub(1);
            let span = cdf[above] - cdf[below];
            let frac = if span > 0.0 { (u - cdf[below]) / span } else { 0.0 };
            edges[below] + frac * (edges[above] - edges[below])
        })
        .collect()
}

/// Exact normalized CDF of the piecewise density over knots `t` with endpoint weights `w`.
pub struct PiecewiseCdf {
    t: Vec<f64>,
    w: Vec<f64>,
    kind: KernelKind,
    cum: Vec<f64>,
}

impl PiecewiseCdf {
    pub fn new(t: &[f64], w: &[f64], kind: KernelKind) -> Self {
        let n = t.len();
        let masses: Vec<f64> = if kind == KernelKind::ArgmaxDelta {
            let mut best = 0;
            for i in 1..n {
                if w[i] > w[best] {
                    best = i;
                }
            }
            let target = if best == n - 1 { n - 2 } else { best };
            (0..n - 1).map(|i| if i == target { 1.0 } else { 0.0 }).collect()
        } else {
            (0..n - 1)
                .map(|i| (t[i + 1] - t[i]) * cdf(kind, w[i], w[i + 1], 1.0))
                .collect()
        };
        let mut cum = vec![0.0];
        for m in &masses {
            cum.push(cum[cum.len() - 1] + m);
        }
        PiecewiseCdf {
            t: t.to_vec(),
            w: w.to_vec(),
            kind,
            cum,
        }
    }

    pub fn mass_fraction(&self, i: usize) -> f64 {
        (self.cum[i + 1] - self.cum[i]) / self.cum[self.cum.len() - 1]
    }

    pub fn at(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x <= self.t[0] {
            return 0.0;
        }
        if x >= self.t[n - 1] {
            return 1.0;
        }
        let i = (0..n - 1).rev().find(|&i| self.t[i] <= x).unwrap();
        let delta = self.t[i + 1] - self.t[i];
        let frac = (x - self.t[i]) / delta;
        let partial = if self.kind == KernelKind::ArgmaxDelta {
            (self.cum[i + 1] - self.cum[i]) * frac
        } else {
            delta * cdf(self.kind, self.w[i], self.w[i + 1], frac)
        };
        (self.cum[i] + partial) / self.cum[n - 1]
    }
}

/// Two-sided KS distance of ascending `sorted` against `cdf`.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}
