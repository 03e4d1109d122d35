//! The classical hierarchical-volume-sampling inversion, written the way NeRF's
//! `sample_pdf` does it: normalize per-bin masses, prefix-sum into a CDF, locate
//! each uniform with a right-sided `searchsorted`, and interpolate linearly
//! between the bracketing bin edges.

/// Piecewise-uniform inverse transform of `uniforms` over `edges`, one mass per bin.
pub fn classical_hvs(edges: &[f64], masses: &[f64], uniforms: &[f64]) -> Vec<f64> {
    assert_eq!(edges.len(), masses.len() + 1, "one mass per bin");
    let total: f64 = masses.iter().sum();
    let mut cdf = Vec::with_capacity(edges.len());
    cdf.push(0.0);
    let mut acc = 0.0;
    for m in masses {
        acc += m / total;
        cdf.push(acc);
    }
    let last = cdf.len() - 1;
    uniforms
        .iter()
        .map(|&u| {
            let above = cdf.partition_point(|&c| c <= u).min(last);
            let below = above.saturating_sub(1);
            let denom = cdf[above] - cdf[below];
            let frac = if denom > 0.0 { (u - cdf[below]) / denom } else { 0.0 };
            edges[below] + frac * (edges[above] - edges[below])
        })
        .collect()
}
