//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use qmeter_core::Complex64;

pub type Dense = Vec<Vec<Complex64>>;

fn zeros(dim: usize) -> Dense {
    vec![vec![Complex64::new(0.0, 0.0); dim]; dim]
}

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let dim = a.len();
    let mut out = zeros(dim);
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i][k];
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..dim {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// exp(α a† − α* a) on a truncated space by scaling and squaring of a
/// Taylor series.
pub fn expm_displacement(alpha: Complex64, dim: usize) -> Dense {
    let mut g = zeros(dim);
    for n in 1..dim {
        let s = (n as f64).sqrt();
        g[n][n - 1] = alpha * s;
        g[n - 1][n] = -alpha.conj() * s;
    }
    let norm = alpha.norm() * 2.0 * (dim as f64).sqrt();
    let mut squarings = 0u32;
    while norm / 2f64.powi(squarings as i32) > 0.25 {
        squarings += 1;
    }
    let scale = 1.0 / 2f64.powi(squarings as i32);
    for row in g.iter_mut() {
        for z in row.iter_mut() {
            *z *= scale;
        }
    }
    let mut result = zeros(dim);
    let mut term = zeros(dim);
    for i in 0..dim {
        result[i][i] = Complex64::new(1.0, 0.0);
        term[i][i] = Complex64::new(1.0, 0.0);
    }
    for k in 1..30 {
        term = matmul(&term, &g);
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z /= k as f64;
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// Error-free transformation based accumulator (double-double sum).
#[derive(Default, Clone, Copy)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    pub fn add(&mut self, x: f64) {
        let s = self.hi + x;
        let bp = s - self.hi;
        let err = (self.hi - (s - bp)) + (x - bp);
        self.hi = s;
        self.lo += err;
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// Unnormalized Kraus weight e^{−|a|²/2} a^n / √n!, by direct recursion.
pub fn kraus_amp(a: Complex64, n: usize) -> Complex64 {
    let mut v = Complex64::new((-0.5 * a.norm_sqr()).exp(), 0.0);
    for k in 1..=n {
        v = v * a / (k as f64).sqrt();
    }
    v
}

/// Binary channel of a Bayes-argmax sequence by enumerating every outcome
/// tuple with entries ≤ `kmax`. Returns ([p_g, p_e], [[gg, ee, ge] per
/// result, unnormalized]).
pub fn enumerate_sequence(
    alpha_bar: f64,
    epsilon: f64,
    n_steps: usize,
    kmax: usize,
    p_g: f64,
    rho_ge: Complex64,
) -> ([f64; 2], [[Complex64; 3]; 2]) {
    let a1 = Complex64::new(alpha_bar + epsilon, 0.0);
    let a2 = Complex64::new(alpha_bar - epsilon, 0.0);
    let m1: Vec<Complex64> = (0..=kmax).map(|n| kraus_amp(a1, n)).collect();
    let m2: Vec<Complex64> = (0..=kmax).map(|n| kraus_amp(a2, n)).collect();
    let p_e = 1.0 - p_g;
    let mut probs = [DoubleDouble::default(); 2];
    let zero = Complex64::new(0.0, 0.0);
    let mut blocks = [[zero; 3]; 2];
    let mut tuple = vec![0usize; n_steps];
    loop {
        let mut k1 = Complex64::new(1.0, 0.0);
        let mut k2 = Complex64::new(1.0, 0.0);
        for &n in &tuple {
            k1 *= m1[n];
            k2 *= m2[n];
        }
        let gg = p_g * k1.norm_sqr();
        let ee = p_e * k2.norm_sqr();
        let ge = rho_ge * k1 * k2.conj();
        // posterior ∝ prior × likelihood; ties to g
        let r = usize::from(gg < ee);
        probs[r].add(gg + ee);
        blocks[r][0] += gg;
        blocks[r][1] += ee;
        blocks[r][2] += ge;
        let mut i = 0;
        loop {
            if i == n_steps {
                return ([probs[0].value(), probs[1].value()], blocks);
            }
            tuple[i] += 1;
            if tuple[i] <= kmax {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
    }
}
