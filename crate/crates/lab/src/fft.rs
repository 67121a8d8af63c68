//! FFT evaluation of midpoint-frequency trigonometric sums.
//!
//! With `ξ_k = (k + ½)Δξ`, `x_j = jΔx` and `Δξ·Δx·P = 2π`,
//!
//! ```text
//! Σ_k c_k cos ξ_k x_j + s_k sin ξ_k x_j = Re[ e^{iπj/P} Σ_m C_m e^{2πimj/P} ],
//! C_m = Σ_{k ≡ m (mod P)} (c_k - i s_k),
//! ```
//!
//! so one inverse FFT of size `P` gives the first `P` grid values.

use std::f64::consts::PI;
use std::sync::Arc;

use dynkin_core::synth::Coefficients;
use dynkin_core::{Error, Result, SpatialGrid, SpectralGrid};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Relative tolerance on `Δξ·Δx·P = 2π`.
const GRID_MATCH: f64 = 1e-12;

/// Inverse-FFT evaluator for one frequency grid and spatial grid.
#[derive(Clone)]
pub struct FoldedIdft {
    size: usize,
    points: usize,
    modes: usize,
    fft: Arc<dyn Fft<f64>>,
    phase: Vec<Complex64>,
}

impl std::fmt::Debug for FoldedIdft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FoldedIdft").field("size", &self.size).field("points", &self.points).finish()
    }
}

impl FoldedIdft {
    /// Plan for FFT size `size`; requires `Δξ·Δx·size = 2π` and at most
    /// `size` spatial points.
    pub fn new(grid: &SpectralGrid, space: &SpatialGrid, size: usize) -> Result<Self> {
        let product = grid.delta() * space.dx() * size as f64;
        if size < 2 || (product / (2.0 * PI) - 1.0).abs() > GRID_MATCH {
            return Err(Error::InvalidParameter {
                name: "fft_size",
                reason: format!("need dxi*dx*P = 2*pi, got {product}"),
            });
        }
        if space.points() > size {
            return Err(Error::InvalidParameter {
                name: "points",
                reason: format!("{} points exceed the FFT size {size}", space.points()),
            });
        }
        let fft = FftPlanner::new().plan_fft_inverse(size);
        let phase = (0..space.points()).map(|j| Complex64::from_polar(1.0, PI * j as f64 / size as f64)).collect();
        Ok(Self { size, points: space.points(), modes: grid.modes(), fft, phase })
    }

    /// FFT size.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Field values at the spatial grid points.
    pub fn evaluate(&self, c: &Coefficients) -> Vec<f64> {
        assert_eq!(c.cos.len(), self.modes, "coefficient count differs from the plan");
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for (k, (&a, &b)) in c.cos.iter().zip(&c.sin).enumerate() {
            buf[k % self.size] += Complex64::new(a, -b);
        }
        self.fft.process(&mut buf);
        buf.iter().zip(&self.phase).map(|(z, p)| (z * p).re).collect()
    }
}
