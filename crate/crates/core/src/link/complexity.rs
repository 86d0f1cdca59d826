//! Leading-order operation counts with unit constants.

/// Operation counts for one coherence block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexityTable {
    /// W̃Ũ log₂(W̃Ũ).
    pub oam_estimation: f64,
    /// W P⁴ 𝔑³ U³.
    pub oam_precoding: f64,
    /// W P³ 𝔑³ M³.
    pub mimo_estimation: f64,
    /// W P⁴ 𝔑³ M³.
    pub mimo_precoding: f64,
}

impl ComplexityTable {
    pub fn oam_total(&self) -> f64 {
        self.oam_estimation + self.oam_precoding
    }

    pub fn mimo_total(&self) -> f64 {
        self.mimo_estimation + self.mimo_precoding
    }
}

/// Evaluate the four counts. Arguments: W, W̃, U, Ũ, P, 𝔑, M.
pub fn complexity_estimates(
    w: usize,
    w_train: usize,
    u: usize,
    u_train: usize,
    p: usize,
    rings: usize,
    m: usize,
) -> ComplexityTable {
    let n = (w_train * u_train) as f64;
    let (w, u, p, r, m) = (w as f64, u as f64, p as f64, rings as f64, m as f64);
    ComplexityTable {
        oam_estimation: if n > 1.0 { n * n.log2() } else { 0.0 },
        oam_precoding: w * p.powi(4) * r.powi(3) * u.powi(3),
        mimo_estimation: w * p.powi(3) * r.powi(3) * m.powi(3),
        mimo_precoding: w * p.powi(4) * r.powi(3) * m.powi(3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oam_cheaper_at_reference_dims() {
        let t = complexity_estimates(128, 64, 30, 30, 3, 4, 32);
        assert!(t.oam_total() < t.mimo_total());
    }

    #[test]
    fn user_scaling() {
        let a = complexity_estimates(128, 64, 10, 10, 2, 1, 1);
        let b = complexity_estimates(128, 64, 10, 10, 4, 1, 1);
        assert!((b.oam_precoding / a.oam_precoding - 16.0).abs() < 1e-12);
    }
}
