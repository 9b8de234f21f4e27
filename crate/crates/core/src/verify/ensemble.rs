//! Seeded random grid functions: half smooth sine combinations, half nodal noise.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::grid::{Grid, GridFunction};

/// Whether samples must vanish at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Dirichlet,
    /// Nonzero end values (an affine part is added to smooth samples).
    Free,
}

/// A sample that can be re-evaluated on any grid (smooth) or is tied to one grid (rough).
#[derive(Debug, Clone)]
pub enum Sample {
    Smooth {
        offset: f64,
        slope: f64,
        coeffs: Vec<f64>,
    },
    Rough(Vec<f64>),
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

impl Sample {
    pub fn is_smooth(&self) -> bool {
        matches!(self, Sample::Smooth { .. })
    }

    /// Draws sample number `k`: even `k` smooth, odd `k` rough.
    pub fn draw(rng: &mut ChaCha8Rng, k: usize, grid: &Grid, boundary: Boundary) -> Self {
        if k % 2 == 0 {
            Self::draw_smooth(rng, boundary)
        } else {
            let mut v: Vec<f64> = (0..=grid.n).map(|_| normal(rng)).collect();
            if boundary == Boundary::Dirichlet {
                v[0] = 0.0;
                v[grid.n] = 0.0;
            }
            Sample::Rough(v)
        }
    }

    /// Up to 8 sine modes with standard normal coefficients.
    pub fn draw_smooth(rng: &mut ChaCha8Rng, boundary: Boundary) -> Self {
        let modes = rng.random_range(1..=8usize);
        let coeffs = (0..modes).map(|_| normal(rng)).collect();
        let (offset, slope) = match boundary {
            Boundary::Dirichlet => (0.0, 0.0),
            Boundary::Free => {
                let a = normal(rng);
                let b = normal(rng);
                // keep the left end value away from zero
                (a + a.signum() * 0.5, b)
            }
        };
        Sample::Smooth { offset, slope, coeffs }
    }

    /// Nodal values on `grid`; rough samples must be drawn on the same grid.
    pub fn on(&self, grid: &Grid) -> GridFunction {
        match self {
            Sample::Smooth { offset, slope, coeffs } => {
                let t_end = grid.t_end;
                let mut v = grid.sample(|t| {
                    let s: f64 = coeffs
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c * ((j + 1) as f64 * PI * t / t_end).sin())
                        .sum();
                    offset + slope * t / t_end + s
                });
                if *offset == 0.0 && *slope == 0.0 {
                    v[0] = 0.0;
                    v[grid.n] = 0.0;
                    GridFunction { values: v, dirichlet: true }
                } else {
                    GridFunction::free(v)
                }
            }
            Sample::Rough(v) => {
                assert_eq!(v.len(), grid.n + 1, "rough sample used on another grid");
                if v[0] == 0.0 && v[v.len() - 1] == 0.0 {
                    GridFunction { values: v.clone(), dirichlet: true }
                } else {
                    GridFunction::free(v.clone())
                }
            }
        }
    }
}

/// `count` samples alternating smooth and rough.
pub fn ensemble(rng: &mut ChaCha8Rng, count: usize, grid: &Grid, boundary: Boundary) -> Vec<Sample> {
    (0..count).map(|k| Sample::draw(rng, k, grid, boundary)).collect()
}
