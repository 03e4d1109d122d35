//! Interpolation kernels on the unit interval.
//!
//! A coarse interval `[t_i, t_{i+1}]` is mapped to `s ∈ [0, 1]` and the weight
//! function inside it is reconstructed from the two endpoint weights `a` (at
//! `s = 0`) and `b` (at `s = 1`). Each [`KernelKind`] fixes the shape of that
//! reconstruction:
//!
//! | kind          | `ŵ(s)`                  | `∫₀¹ ŵ`                    |
//! |---------------|-------------------------|----------------------------|
//! | `Constant`    | `(a + b) / 2`           | `(a + b) / 2`              |
//! | `Linear`      | `a + (b − a) s`         | `(a + b) / 2`              |
//! | `Exponential` | `a (b / a)^s`           | `(b − a) / (ln b − ln a)`  |
//! | `Inverse`     | `ab / ((a − b) s + b)`  | `ab (ln b − ln a) / (b − a)` |
//!
//! `ArgmaxDelta` is not a per-interval density. It only exists at ray level,
//! where all mass goes to the interval next to the largest coarse weight.
//!
//! All closed forms are written in terms of `c = ln(b / a)`, evaluated as
//! `ln_1p((b − a) / a)` so that nearly equal endpoints keep full precision.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Endpoint weights below this value are raised to it before a kernel is built.
pub const MIN_WEIGHT: f64 = 1e-5;

/// Below this `|ln b − ln a|` the exponential and inverse kernels use their
/// constant limits.
pub const DEGENERACY_THRESHOLD: f64 = 1e-7;

/// Relative slack accepted on a residual mass passed to [`UnitKernel::icdf`].
const RESIDUAL_SLACK: f64 = 1e-9;

/// Below this `|c|` the barycenter uses its Taylor series.
const BIAS_SERIES_CUTOFF: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Constant,
    Linear,
    Exponential,
    Inverse,
    ArgmaxDelta,
}

impl KernelKind {
    pub const ALL: [KernelKind; 5] = [
        KernelKind::Constant,
        KernelKind::Linear,
        KernelKind::Exponential,
        KernelKind::Inverse,
        KernelKind::ArgmaxDelta,
    ];

    /// The four kinds that define a density inside an interval.
    pub const INTERPOLATING: [KernelKind; 4] = [
        KernelKind::Constant,
        KernelKind::Linear,
        KernelKind::Exponential,
        KernelKind::Inverse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Constant => "constant",
            KernelKind::Linear => "linear",
            KernelKind::Exponential => "exponential",
            KernelKind::Inverse => "inverse",
            KernelKind::ArgmaxDelta => "argmax-delta",
        }
    }

    pub fn is_interpolating(self) -> bool {
        self != KernelKind::ArgmaxDelta
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        KernelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown kernel '{s}'"))
    }
}

/// One interval's reconstruction of the weight function, parameterized on `[0, 1]`.
///
/// Endpoint weights are clamped to at least [`MIN_WEIGHT`] on construction,
/// so every kernel is strictly positive and logarithms are always defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitKernel {
    kind: KernelKind,
    a: f64,
    b: f64,
    /// `ln(b / a)`.
    log_ratio: f64,
}

impl UnitKernel {
    pub fn new(kind: KernelKind, a: f64, b: f64) -> Result<Self> {
        let a = clamp_weight("a", a)?;
        let b = clamp_weight("b", b)?;
        let log_ratio = ((b - a) / a).ln_1p();
        Ok(UnitKernel {
            kind,
            a,
            b,
            log_ratio,
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    /// Clamped weight at `s = 0`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Clamped weight at `s = 1`.
    pub fn b(&self) -> f64 {
        self.b
    }

    fn is_degenerate(&self) -> bool {
        self.log_ratio.abs() < DEGENERACY_THRESHOLD
    }

    fn require_interpolating(&self, op: &'static str) -> Result<()> {
        if self.kind.is_interpolating() {
            Ok(())
        } else {
            Err(Error::Unsupported(self.kind, op))
        }
    }

    /// Kernel value `ŵ(s)`.
    pub fn eval(&self, s: f64) -> Result<f64> {
        self.require_interpolating("eval")?;
        check_unit("s", s)?;
        let (a, b) = (self.a, self.b);
        Ok(match self.kind {
            KernelKind::Constant => 0.5 * (a + b),
            KernelKind::Linear => a * (1.0 - s) + b * s,
            // grown from the nearer endpoint so both ends are exact
            KernelKind::Exponential if s <= 0.5 => a * (self.log_ratio * s).exp(),
            KernelKind::Exponential => b * (-self.log_ratio * (1.0 - s)).exp(),
            KernelKind::Inverse => a * b / (a * s + b * (1.0 - s)),
            KernelKind::ArgmaxDelta => unreachable!(),
        })
    }

    /// Mass `∫₀¹ ŵ(s) ds`.
    pub fn integral(&self) -> Result<f64> {
        self.require_interpolating("integral")?;
        let (a, b, c) = (self.a, self.b, self.log_ratio);
        Ok(match self.kind {
            KernelKind::Constant | KernelKind::Linear => 0.5 * (a + b),
            _ if self.is_degenerate() => a,
            // logarithmic mean
            KernelKind::Exponential => (b - a) / c,
            KernelKind::Inverse => a * b * c / (b - a),
            KernelKind::ArgmaxDelta => unreachable!(),
        })
    }

    /// Partial mass `∫₀ˣ ŵ(s) ds`, the unnormalized CDF inside the interval.
    pub fn partial_integral(&self, x: f64) -> Result<f64> {
        self.require_interpolating("partial_integral")?;
        check_unit("x", x)?;
        let (a, b, c) = (self.a, self.b, self.log_ratio);
        Ok(match self.kind {
            KernelKind::Constant => 0.5 * (a + b) * x,
            KernelKind::Linear => x * (a + 0.5 * (b - a) * x),
            _ if self.is_degenerate() => a * x,
            KernelKind::Exponential => a * (c * x).exp_m1() / c,
            KernelKind::Inverse => -a * b / (b - a) * ((a - b) * x / b).ln_1p(),
            KernelKind::ArgmaxDelta => unreachable!(),
        })
    }

    /// Position `x ∈ [0, 1]` with `∫₀ˣ ŵ(s) ds = r`.
    pub fn icdf(&self, r: f64) -> Result<f64> {
        self.require_interpolating("icdf")?;
        let total = self.integral()?;
        let slack = RESIDUAL_SLACK * total;
        if !r.is_finite() || r < -slack || r > total + slack {
            return Err(Error::OutOfRange {
                value: r,
                lo: 0.0,
                hi: total,
            });
        }
        let r = r.clamp(0.0, total);
        let (a, b, c) = (self.a, self.b, self.log_ratio);
        let x = match self.kind {
            KernelKind::Constant => r / total,
            // Root of a x + (b − a) x² / 2 = r written without cancellation.
            KernelKind::Linear => 2.0 * r / (a + (a * a + 2.0 * (b - a) * r).sqrt()),
            _ if self.is_degenerate() => r / a,
            KernelKind::Exponential => (r * c / a).ln_1p() / c,
            // solves ab/(a − b) · ln(1 + (a − b) x / b) = r
            KernelKind::Inverse => b / (a - b) * (r * (a - b) / (a * b)).exp_m1(),
            KernelKind::ArgmaxDelta => unreachable!(),
        };
        Ok(x.clamp(0.0, 1.0))
    }

    /// Barycenter `∫₀¹ s ŵ(s) ds / ∫₀¹ ŵ(s) ds` of the interval density.
    pub fn bias(&self) -> Result<f64> {
        self.require_interpolating("bias")?;
        let (a, b, c) = (self.a, self.b, self.log_ratio);
        Ok(match self.kind {
            KernelKind::Constant => 0.5,
            KernelKind::Linear => (a + 2.0 * b) / (3.0 * (a + b)),
            _ if self.is_degenerate() => 0.5,
            _ if c.abs() < BIAS_SERIES_CUTOFF => {
                let c2 = c * c;
                0.5 + c / 12.0 * (1.0 - c2 / 60.0 * (1.0 - c2 / 42.0))
            }
            // e^c / (e^c − 1) − 1/c
            KernelKind::Exponential => -1.0 / (-c).exp_m1() - 1.0 / c,
            // b / (b − a) − 1/c, from the first moment ab((a − b) + bc) / (a − b)²
            KernelKind::Inverse => b / (b - a) - 1.0 / c,
            KernelKind::ArgmaxDelta => unreachable!(),
        })
    }
}

fn clamp_weight(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::InvalidWeight { name, value });
    }
    Ok(value.max(MIN_WEIGHT))
}

fn check_unit(_name: &'static str, s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            value: s,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn k(kind: KernelKind, a: f64, b: f64) -> UnitKernel {
        UnitKernel::new(kind, a, b).unwrap()
    }

    /// Composite Simpson on a fine grid; plenty for smooth kernels in unit tests.
    fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        let n = 20_000;
        let h = (hi - lo) / n as f64;
        let mut sum = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(lo + i as f64 * h);
        }
        sum * h / 3.0
    }

    #[test]
    fn eval_examples() {
        assert_eq!(k(KernelKind::Exponential, 1.0, 1.0).eval(0.37).unwrap(), 1.0);
        let v = k(KernelKind::Exponential, 0.5, 0.5 * E * E).eval(0.5).unwrap();
        assert!((v - 0.5 * E).abs() < 1e-14);
        assert!((v - 1.359_140_914_229_522_6).abs() < 1e-12);
        assert_eq!(k(KernelKind::Inverse, 1.0, 1.0).eval(0.8).unwrap(), 1.0);
    }

    #[test]
    fn eval_rejects_bad_inputs() {
        let ker = k(KernelKind::Linear, 0.2, 0.4);
        assert!(ker.eval(-0.1).is_err());
        assert!(ker.eval(1.0001).is_err());
        assert!(ker.eval(f64::NAN).is_err());
        assert!(UnitKernel::new(KernelKind::Linear, f64::NAN, 1.0).is_err());
        assert!(UnitKernel::new(KernelKind::Linear, 1.0, f64::INFINITY).is_err());
        assert!(UnitKernel::new(KernelKind::Linear, -0.5, 1.0).is_err());
    }

    #[test]
    fn argmax_delta_is_not_a_unit_density() {
        let ker = k(KernelKind::ArgmaxDelta, 0.1, 0.9);
        assert!(matches!(ker.eval(0.5), Err(Error::Unsupported(..))));
        assert!(ker.integral().is_err());
        assert!(ker.icdf(0.0).is_err());
        assert!(ker.bias().is_err());
    }

    #[test]
    fn weights_are_clamped() {
        let ker = k(KernelKind::Exponential, 0.0, 1.0);
        assert_eq!(ker.a(), MIN_WEIGHT);
        assert!(ker.integral().unwrap().is_finite());
    }

    #[test]
    fn integral_examples() {
        assert_eq!(k(KernelKind::Exponential, 0.3, 0.3).integral().unwrap(), 0.3);
        let v = k(KernelKind::Exponential, 1.0, E).integral().unwrap();
        assert!((v - (E - 1.0)).abs() < 1e-14);
        let v = k(KernelKind::Inverse, 0.01, 1.0).integral().unwrap();
        assert!((v - 0.01 * 100f64.ln() / 0.99).abs() < 1e-15);
        assert!((v - 0.046_517).abs() < 1e-6);
        let quad = simpson(|s| 0.01 / (-0.99 * s + 1.0), 0.0, 1.0);
        assert!((v - quad).abs() / v < 1e-9);
    }

    #[test]
    fn icdf_endpoints() {
        for kind in KernelKind::INTERPOLATING {
            for (a, b) in [(0.01, 1.0), (1.0, 0.01), (0.4, 0.4), (0.3, 0.7)] {
                let ker = k(kind, a, b);
                let total = ker.integral().unwrap();
                assert_eq!(ker.icdf(0.0).unwrap(), 0.0, "{kind} {a} {b}");
                assert!((ker.icdf(total).unwrap() - 1.0).abs() < 1e-12, "{kind} {a} {b}");
            }
        }
    }

    #[test]
    fn icdf_rejects_out_of_range_mass() {
        let ker = k(KernelKind::Exponential, 0.2, 0.9);
        let total = ker.integral().unwrap();
        assert!(ker.icdf(-1e-6).is_err());
        assert!(ker.icdf(total * 1.01).is_err());
        assert!(ker.icdf(f64::NAN).is_err());
        // rounding-level overshoot is accepted and clamped
        assert_eq!(ker.icdf(total * (1.0 + 1e-12)).unwrap(), 1.0);
    }

    #[test]
    fn partial_integral_matches_quadrature() {
        for kind in KernelKind::INTERPOLATING {
            let ker = k(kind, 0.05, 0.8);
            for x in [0.1, 0.5, 0.93] {
                let quad = simpson(|s| ker.eval(s).unwrap(), 0.0, x);
                let got = ker.partial_integral(x).unwrap();
                assert!((got - quad).abs() < 1e-12, "{kind} x={x}: {got} vs {quad}");
            }
        }
    }

    #[test]
    fn bias_examples() {
        assert_eq!(k(KernelKind::Constant, 0.6, 0.6).bias().unwrap(), 0.5);
        let lin = k(KernelKind::Linear, 0.0, 1.0).bias().unwrap();
        // clamped a = 1e-5 shifts the limit 2/3 slightly
        assert!((lin - 2.0 / 3.0).abs() < 1e-5);
        let exp = k(KernelKind::Exponential, 0.01, 1.0).bias().unwrap();
        let quad = simpson(|s| s * 0.01 * 100f64.powf(s), 0.0, 1.0)
            / simpson(|s| 0.01 * 100f64.powf(s), 0.0, 1.0);
        assert!((exp - quad).abs() < 1e-10);
        assert!((exp - 0.793).abs() < 1e-3);
    }

    #[test]
    fn bias_series_and_direct_forms_agree_at_cutoff() {
        let a = 0.5;
        for kind in [KernelKind::Exponential, KernelKind::Inverse] {
            let below = k(kind, a, a * (0.999 * BIAS_SERIES_CUTOFF).exp()).bias().unwrap();
            let above = k(kind, a, a * (1.001 * BIAS_SERIES_CUTOFF).exp()).bias().unwrap();
            assert!((above - below).abs() < 1e-6, "{kind}: {below} vs {above}");
            assert!(above > below);
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in KernelKind::ALL {
            assert_eq!(kind.name().parse::<KernelKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.name()));
        }
        assert!("cubic".parse::<KernelKind>().is_err());
    }
}
