#![allow(dead_code)]

/// Central differences with step 1e-5 for every coordinate.
pub fn finite_difference(params: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let h = 1e-5;
    let mut p = params.to_vec();
    (0..p.len())
        .map(|i| {
            let x = p[i];
            p[i] = x + h;
            let up = f(&p);
            p[i] = x - h;
            let down = f(&p);
            p[i] = x;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Relative error at most 1e-4, measured against the larger magnitude;
/// entries where both sides are below 1e-7 count as zero.
pub fn assert_gradient(analytic: &[f64], numeric: &[f64], what: &str) {
    assert_eq!(analytic.len(), numeric.len());
    for (i, (a, n)) in analytic.iter().zip(numeric).enumerate() {
        let scale = a.abs().max(n.abs());
        if scale < 1e-7 {
            continue;
        }
        let rel = (a - n).abs() / scale;
        assert!(rel <= 1e-4, "{what}: parameter {i}: analytic {a} numeric {n} (rel {rel:.2e})");
    }
}

/// Every count within 3 standard deviations of its expectation.
pub fn assert_multinomial(counts: &[usize], probs: &[f64]) {
    let total: usize = counts.iter().sum();
    for (i, (&c, &p)) in counts.iter().zip(probs).enumerate() {
        let mean = total as f64 * p;
        let sd = (total as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (c as f64 - mean).abs() <= 3.0 * sd.max(1e-9),
            "category {i}: {c} draws, expected {mean:.1} +- {:.1}",
            3.0 * sd
        );
    }
}
