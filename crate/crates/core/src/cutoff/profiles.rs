/// Real function on R with analytic derivatives up to `smoothness()`.
pub trait SmoothProfile: Send + Sync {
    fn derivative(&self, order: usize, x: f64) -> f64;

    fn smoothness(&self) -> usize;

    /// Points where the derivatives change regime, used to split quadrature.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }
}

/// amplitude * exp(-(x - center)^2 / (2 width^2)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianProfile {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl GaussianProfile {
    pub fn new(center: f64, width: f64) -> Self {
        GaussianProfile {
            center,
            width,
            amplitude: 1.0,
        }
    }
}

impl SmoothProfile for GaussianProfile {
    fn derivative(&self, order: usize, x: f64) -> f64 {
        // f^(k) = (-1)^k He_k(z) e^{-z^2/2} / w^k with probabilists' Hermite He_k
        let z = (x - self.center) / self.width;
        let mut he_prev = 1.0;
        let mut he = z;
        let he_k = if order == 0 {
            1.0
        } else {
            for k in 1..order {
                let next = z * he - k as f64 * he_prev;
                he_prev = he;
                he = next;
            }
            he
        };
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        self.amplitude * sign * he_k * (-0.5 * z * z).exp() / self.width.powi(order as i32)
    }

    fn smoothness(&self) -> usize {
        usize::MAX
    }

    fn breakpoints(&self) -> Vec<f64> {
        let c = self.center;
        let w = self.width;
        vec![c - 8.0 * w, c - 2.0 * w, c, c + 2.0 * w, c + 8.0 * w]
    }
}
