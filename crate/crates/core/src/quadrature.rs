//! Adaptive Gauss–Kronrod (7, 15) quadrature.
//!
//! Used for reference renderings where the integrand is only known pointwise.

// Kronrod abscissae on [-1, 1]; odd indices are the Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 60;

/// Integral estimate with an error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn gk15(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adapt(
    f: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    whole: (f64, f64),
    abs_tol: f64,
    depth: u32,
) -> Estimate {
    let (value, error) = whole;
    let mid = 0.5 * (lo + hi);
    if error <= abs_tol || depth >= MAX_DEPTH || mid <= lo || mid >= hi {
        return Estimate { value, error };
    }
    let left = gk15(f, lo, mid);
    let right = gk15(f, mid, hi);
    let l = adapt(f, lo, mid, left, 0.5 * abs_tol, depth + 1);
    let r = adapt(f, mid, hi, right, 0.5 * abs_tol, depth + 1);
    Estimate {
        value: l.value + r.value,
        error: l.error + r.error,
    }
}

/// Integrates `f` over `[lo, hi]` to an absolute tolerance.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, abs_tol: f64) -> Estimate {
    if hi <= lo {
        return Estimate {
            value: 0.0,
            error: 0.0,
        };
    }
    let whole = gk15(&f, lo, hi);
    adapt(&f, lo, hi, whole, abs_tol, 0)
}

/// Integrates over `[lo, hi]` split at `breaks`, which need not be sorted or inside the range.
pub fn integrate_with_breaks(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    abs_tol: f64,
) -> Estimate {
    let mut edges: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&b| b > lo && b < hi)
        .collect();
    edges.push(lo);
    edges.push(hi);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let pieces = (edges.len() - 1).max(1) as f64;
    edges.windows(2).fold(
        Estimate {
            value: 0.0,
            error: 0.0,
        },
        |acc, w| {
            let e = integrate(&f, w[0], w[1], abs_tol / pieces);
            Estimate {
                value: acc.value + e.value,
                error: acc.error + e.error,
            }
        },
    )
}
