//! Small quadrature toolbox: Gauss-Legendre panels and trapezoid weights.

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            // Chebyshev-like initial guess, then Newton on P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to `[lo, hi]`.
    pub fn on(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    /// Composite rule over `[lo, hi]` split at `breaks` (which must be sorted
    /// and lie inside), each piece divided into panels no wider than `max_width`.
    pub fn composite(&self, breaks: &[f64], max_width: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi <= lo {
                continue;
            }
            let panels = ((hi - lo) / max_width).ceil().max(1.0) as usize;
            let step = (hi - lo) / panels as f64;
            for p in 0..panels {
                let a = lo + p as f64 * step;
                out.extend(self.on(a, a + step));
            }
        }
        out
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Uniformly spaced nodes on `[lo, hi]` with trapezoid weights.
pub fn trapezoid(lo: f64, hi: f64, count: usize) -> Vec<(f64, f64)> {
    if count == 1 {
        return vec![(0.5 * (lo + hi), hi - lo)];
    }
    let h = (hi - lo) / (count - 1) as f64;
    (0..count)
        .map(|i| {
            let w = if i == 0 || i == count - 1 { 0.5 * h } else { h };
            (lo + i as f64 * h, w)
        })
        .collect()
}

/// Uniform periodic rule on `[lo, lo + period)`.
pub fn periodic(lo: f64, period: f64, count: usize) -> Vec<(f64, f64)> {
    let h = period / count as f64;
    (0..count).map(|i| (lo + i as f64 * h, h)).collect()
}
