//! Gauss-Legendre rules and composite panels.

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(x) and P_n'(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Composite panels over [0, 1]: `panels` intervals with an npp-point rule
/// each. Returns (t, weight) pairs in increasing order of t.
pub fn composite_unit(panels: usize, npp: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(npp);
    let mut out = Vec::with_capacity(panels * npp);
    let h = 1.0 / panels as f64;
    for p in 0..panels {
        let lo = p as f64 * h;
        for i in 0..npp {
            out.push((lo + 0.5 * h * (x[i] + 1.0), 0.5 * h * w[i]));
        }
    }
    out
}

/// Split a total node budget into panels of roughly 16 points.
pub fn panels_for(total_nodes: usize) -> (usize, usize) {
    let npp = 16usize;
    let panels = (total_nodes / npp).max(1);
    (panels, npp)
}
