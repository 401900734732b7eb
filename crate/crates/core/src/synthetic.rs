//! Planted-neighborhood regression data for exercising graph-based learners.
//!
//! Samples come in neighborhoods. Each neighborhood has a random unit
//! direction (the structural columns, which make members cosine-close) and a
//! latent scalar `z`. The measurement columns observe `z` through heavy
//! per-sample noise, and the target is a smooth function of `z`. A single
//! row is a poor estimate of `z`; pooling over cosine neighbors is a good one.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::TabularDataset;
use crate::error::Result;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborhoodSpec {
    pub neighborhoods: usize,
    pub per_neighborhood: usize,
    pub structural_dims: usize,
    pub measurement_dims: usize,
    /// Length of each neighborhood's direction vector.
    pub structural_scale: f64,
    pub structural_noise: f64,
    pub measurement_noise: f64,
    /// Target noise standard deviation as a fraction of the clean target's.
    pub target_noise: f64,
    pub seed: u64,
}

impl NeighborhoodSpec {
    /// 800 samples by 8 features: 100 neighborhoods of 8, six structural and
    /// two measurement columns, 5% target noise.
    pub fn standard(seed: u64) -> Self {
        Self {
            neighborhoods: 100,
            per_neighborhood: 8,
            structural_dims: 6,
            measurement_dims: 2,
            structural_scale: 3.0,
            structural_noise: 0.3,
            measurement_noise: 1.0,
            target_noise: 0.05,
            seed,
        }
    }

    pub fn n_samples(&self) -> usize {
        self.neighborhoods * self.per_neighborhood
    }

    pub fn n_features(&self) -> usize {
        self.structural_dims + self.measurement_dims
    }
}

/// Smooth, non-monotone-in-slope response to the latent.
pub fn latent_response(z: f64) -> f64 {
    z.sin() + 0.5 * z
}

/// Generated data plus the planted ground truth.
#[derive(Debug, Clone)]
pub struct NeighborhoodData {
    pub dataset: TabularDataset,
    /// Neighborhood of each sample.
    pub membership: Vec<usize>,
    /// Latent of each neighborhood.
    pub latent: Vec<f64>,
}

fn gauss<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Samples are ordered neighborhood by neighborhood.
pub fn neighborhood_dataset(spec: &NeighborhoodSpec) -> Result<NeighborhoodData> {
    let mut rng = seed::rng(spec.seed);
    let (s, f) = (spec.n_samples(), spec.n_features());
    let mut directions = Vec::with_capacity(spec.neighborhoods);
    let mut latent = Vec::with_capacity(spec.neighborhoods);
    for _ in 0..spec.neighborhoods {
        let mut u: Vec<f64> = (0..spec.structural_dims).map(|_| gauss(&mut rng)).collect();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        u.iter_mut().for_each(|v| *v *= spec.structural_scale / norm);
        directions.push(u);
        latent.push(rng.random_range(-2.0..2.0));
    }
    let mut x = Array2::zeros((s, f));
    let mut clean = Array1::zeros(s);
    let mut membership = Vec::with_capacity(s);
    for c in 0..spec.neighborhoods {
        for m in 0..spec.per_neighborhood {
            let row = c * spec.per_neighborhood + m;
            for (j, u) in directions[c].iter().enumerate() {
                x[[row, j]] = u + spec.structural_noise * gauss(&mut rng);
            }
            for j in 0..spec.measurement_dims {
                x[[row, spec.structural_dims + j]] = latent[c] + spec.measurement_noise * gauss(&mut rng);
            }
            clean[row] = latent_response(latent[c]);
            membership.push(c);
        }
    }
    let mean = clean.mean().unwrap_or(0.0);
    let sd = clean.mapv(|v: f64| (v - mean).powi(2)).mean().unwrap_or(0.0).sqrt();
    let y = clean.mapv(|v| v + spec.target_noise * sd * gauss(&mut rng));
    let names = (0..spec.structural_dims)
        .map(|j| format!("s{j}"))
        .chain((0..spec.measurement_dims).map(|j| format!("m{j}")))
        .collect();
    Ok(NeighborhoodData {
        dataset: TabularDataset::new(x, y, names)?,
        membership,
        latent,
    })
}
