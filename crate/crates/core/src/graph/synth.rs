use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Graph;
use crate::error::{invalid, Result};
use crate::numerics::DenseMatrix;

/// How target-domain class means move relative to the source.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DomainShift {
    /// The same offset for every class (length F).
    Uniform(Vec<f64>),
    /// One offset row per class (C x F).
    PerClass(DenseMatrix),
}

/// Two-block-structured graphs that share a label space but differ in
/// feature distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedPairParams {
    pub class_sizes: Vec<usize>,
    pub p_intra: f64,
    pub p_inter: f64,
    /// C x F matrix of source class means.
    pub class_means: DenseMatrix,
    pub shift: DomainShift,
    /// Standard deviation of the isotropic Gaussian feature noise.
    pub noise: f64,
    /// Fraction of each source class that is labeled (at least one node per class).
    pub source_label_fraction: f64,
    pub seed: u64,
}

impl ShiftedPairParams {
    pub fn num_classes(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn num_features(&self) -> usize {
        self.class_means.cols()
    }
}

/// Draws class means with i.i.d. `N(0, scale^2)` entries.
pub fn random_class_means(classes: usize, features: usize, scale: f64, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(classes, features, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        scale * z
    })
}

/// Samples a source graph and a target graph from the same block model.
/// Source labels are partially revealed; the target keeps ground truth but
/// reveals none of it.
pub fn generate_shifted_pair(params: &ShiftedPairParams) -> Result<(Graph, Graph)> {
    let classes = params.num_classes();
    let features = params.num_features();
    if classes < 2 {
        return Err(invalid("at least two classes are required"));
    }
    if params.class_sizes.contains(&0) {
        return Err(invalid("every class needs at least one node"));
    }
    if params.class_means.rows() != classes {
        return Err(invalid(format!(
            "{} class mean rows for {classes} classes",
            params.class_means.rows()
        )));
    }
    for (name, p) in [("p_intra", params.p_intra), ("p_inter", params.p_inter)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("{name} = {p} is not a probability")));
        }
    }
    if !(params.noise >= 0.0 && params.noise.is_finite()) {
        return Err(invalid("noise scale must be finite and nonnegative"));
    }
    if !(0.0..=1.0).contains(&params.source_label_fraction) {
        return Err(invalid("source label fraction must lie in [0, 1]"));
    }
    let target_means = match &params.shift {
        DomainShift::Uniform(v) => {
            if v.len() != features {
                return Err(invalid("shift vector length differs from feature count"));
            }
            DenseMatrix::from_fn(classes, features, |r, c| params.class_means.get(r, c) + v[c])
        }
        DomainShift::PerClass(m) => {
            if m.shape() != params.class_means.shape() {
                return Err(invalid("per-class shift must match the class mean shape"));
            }
            params.class_means.add(m)?
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let source = sample_domain(params, &params.class_means, &mut rng, true)?;
    let target = sample_domain(params, &target_means, &mut rng, false)?;
    Ok((source, target))
}

fn sample_domain(
    params: &ShiftedPairParams,
    means: &DenseMatrix,
    rng: &mut ChaCha8Rng,
    reveal_labels: bool,
) -> Result<Graph> {
    let classes: Vec<usize> = params
        .class_sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &size)| core::iter::repeat_n(c, size))
        .collect();
    let n = classes.len();

    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if classes[i] == classes[j] {
                params.p_intra
            } else {
                params.p_inter
            };
            if p > 0.0 && rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }

    let x = DenseMatrix::from_fn(n, means.cols(), |r, c| {
        let noise: f64 = StandardNormal.sample(rng);
        means.get(classes[r], c) + params.noise * noise
    });

    let mut labeled = vec![false; n];
    if reveal_labels {
        let mut offset = 0;
        for &size in &params.class_sizes {
            let count = (libm::ceil(params.source_label_fraction * size as f64) as usize).clamp(1, size);
            for idx in sample(rng, size, count).into_iter() {
                labeled[offset + idx] = true;
            }
            offset += size;
        }
    }

    Graph::from_edges(
        &edges,
        x,
        classes.into_iter().map(Some).collect(),
        labeled,
        params.num_classes(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(seed: u64) -> ShiftedPairParams {
        ShiftedPairParams {
            class_sizes: vec![60; 5],
            p_intra: 0.08,
            p_inter: 0.005,
            class_means: random_class_means(5, 4, 1.0, seed),
            shift: DomainShift::Uniform(vec![0.5; 4]),
            noise: 0.3,
            source_label_fraction: 0.05,
            seed,
        }
    }

    #[test]
    fn zero_shift_zero_noise_matches_means() {
        let mut p = params(1);
        p.shift = DomainShift::Uniform(vec![0.0; 4]);
        p.noise = 0.0;
        let (s, t) = generate_shifted_pair(&p).unwrap();
        assert_eq!(s.features(), t.features());
    }

    #[test]
    fn zero_probabilities_give_no_edges() {
        let mut p = params(2);
        p.p_intra = 0.0;
        p.p_inter = 0.0;
        let (s, t) = generate_shifted_pair(&p).unwrap();
        assert_eq!(s.num_edges() + t.num_edges(), 0);
    }

    #[test]
    fn labels_and_masks() {
        let (s, t) = generate_shifted_pair(&params(3)).unwrap();
        assert_eq!(s.labeled_nodes().len(), 5 * 3);
        assert!(t.labeled_nodes().is_empty());
        assert!(t.labels().iter().all(|l| l.is_some()));
        for c in 0..5 {
            assert!(s.labeled_nodes().iter().any(|&i| s.labels()[i] == Some(c)));
        }
    }

    #[test]
    fn degenerate_inputs() {
        let mut p = params(4);
        p.class_sizes[2] = 0;
        assert!(generate_shifted_pair(&p).is_err());
        let mut p = params(4);
        p.p_intra = 1.5;
        assert!(generate_shifted_pair(&p).is_err());
        let mut p = params(4);
        p.class_sizes = vec![10];
        p.class_means = random_class_means(1, 4, 1.0, 0);
        assert!(generate_shifted_pair(&p).is_err());
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        assert_eq!(
            generate_shifted_pair(&params(9)).unwrap(),
            generate_shifted_pair(&params(9)).unwrap()
        );
    }
}
