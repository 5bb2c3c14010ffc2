use alloc::vec::Vec;

use crate::numerics::DenseMatrix;

/// Adam with decoupled weight decay.
#[derive(Debug, Clone)]
pub(crate) struct Adam {
    learning_rate: f64,
    weight_decay: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: i32,
    first: Vec<DenseMatrix>,
    second: Vec<DenseMatrix>,
}

impl Adam {
    pub fn new(learning_rate: f64, weight_decay: f64, shapes: &[(usize, usize)]) -> Self {
        Self {
            learning_rate,
            weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            first: shapes.iter().map(|&(r, c)| DenseMatrix::zeros(r, c)).collect(),
            second: shapes.iter().map(|&(r, c)| DenseMatrix::zeros(r, c)).collect(),
        }
    }

    /// `decays[i]` selects which parameters receive weight decay.
    pub fn step(&mut self, params: Vec<&mut DenseMatrix>, grads: &[DenseMatrix], decays: &[bool]) {
        self.step += 1;
        let c1 = 1.0 - libm::pow(self.beta1, self.step as f64);
        let c2 = 1.0 - libm::pow(self.beta2, self.step as f64);
        let lr = self.learning_rate;
        for (i, p) in params.into_iter().enumerate() {
            let wd = if decays[i] { self.weight_decay } else { 0.0 };
            let m = self.first[i].data_mut();
            let v = self.second[i].data_mut();
            for (k, (theta, &g)) in p.data_mut().iter_mut().zip(grads[i].data()).enumerate() {
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g;
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g * g;
                let update = (m[k] / c1) / (libm::sqrt(v[k] / c2) + self.eps);
                *theta -= lr * (update + wd * *theta);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = DenseMatrix::from_rows(&[[1.0, -1.0]]).unwrap();
        let mut adam = Adam::new(0.1, 0.0, &[(1, 2)]);
        let g = DenseMatrix::from_rows(&[[3.0, -0.5]]).unwrap();
        adam.step(vec![&mut p], &[g], &[true]);
        assert!((p.get(0, 0) - 0.9).abs() < 1e-7);
        assert!((p.get(0, 1) + 0.9).abs() < 1e-7);
    }

    #[test]
    fn decoupled_decay_shrinks_without_gradient() {
        let mut p = DenseMatrix::filled(1, 1, 2.0);
        let mut adam = Adam::new(0.5, 0.1, &[(1, 1)]);
        adam.step(vec![&mut p], &[DenseMatrix::zeros(1, 1)], &[true]);
        assert!((p.get(0, 0) - 1.9).abs() < 1e-12);
    }
}
