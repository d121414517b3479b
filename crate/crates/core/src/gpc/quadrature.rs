use std::sync::OnceLock;

/// Nodes and weights of the n-point Gauss–Hermite rule for
/// ∫ exp(−x²) g(x) dx, found by Newton iteration on the normalized
/// Hermite recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

pub(crate) fn gauss_hermite_32() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite(32))
}

/// E[g(f)] for f ~ N(mean, var) with the 32-point rule. Mirrored nodes are
/// summed in pairs, so an odd g at mean 0 gives exactly 0.
pub(crate) fn gaussian_expectation(mean: f64, var: f64, g: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_hermite_32();
    let s = (2.0 * var).sqrt();
    let total: f64 = x[..x.len() / 2]
        .iter()
        .zip(w)
        .map(|(xi, wi)| wi * (g(mean + s * xi) + g(mean - s * xi)))
        .sum();
    total / std::f64::consts::PI.sqrt()
}
