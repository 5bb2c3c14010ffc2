//! Reverse-mode gradient tape over the fixed primitive set the subnetworks use.
//!
//! Nodes are appended in evaluation order, so every operand id is smaller than
//! the id of the node consuming it and a reverse sweep visits nodes in a valid
//! topological order.

use alloc::vec;
use alloc::vec::Vec;

use super::ops::{self, hadamard};
use super::power_series::PowerSeriesCache;
use super::{DenseMatrix, PowerSeriesOperator, SparseCsr};
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`GradTape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

enum Op<'a> {
    Parameter,
    Constant,
    MatMul(Var, Var),
    SpMM(&'a SparseCsr, Var),
    PathAggregate {
        operator: &'a PowerSeriesOperator,
        energies: Var,
        temperature: f64,
        weights: Vec<f64>,
        input: Var,
        cache: PowerSeriesCache,
    },
    Relu(Var),
    Mask(Var, DenseMatrix),
    Add(Var, Var),
    Scale(Var, f64),
    ReverseGradient(Var, f64),
    Sum(Var),
    CrossEntropy(Var, DenseMatrix),
    BinaryCrossEntropy(Var, DenseMatrix),
}

struct Node<'a> {
    op: Op<'a>,
    value: DenseMatrix,
}

/// Ordered record of forward operations. Confined to one thread.
#[derive(Default)]
pub struct GradTape<'a> {
    nodes: Vec<Node<'a>>,
}

/// Gradients produced by [`GradTape::backward`], indexed by [`Var`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<DenseMatrix>,
}

impl Gradients {
    pub fn get(&self, var: Var) -> &DenseMatrix {
        &self.grads[var.0]
    }

    pub fn take(&mut self, var: Var) -> DenseMatrix {
        core::mem::replace(&mut self.grads[var.0], DenseMatrix::zeros(0, 0))
    }
}

impl<'a> GradTape<'a> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn clear(&mut self) {
        self.nodes.clear();
    }

    pub fn value(&self, var: Var) -> &DenseMatrix {
        &self.nodes[var.0].value
    }

    pub fn scalar(&self, var: Var) -> f64 {
        self.nodes[var.0].value.get(0, 0)
    }

    fn push(&mut self, op: Op<'a>, value: DenseMatrix) -> Var {
        self.nodes.push(Node { op, value });
        Var(self.nodes.len() - 1)
    }

    /// A leaf whose gradient is reported by `backward`.
    pub fn parameter(&mut self, value: DenseMatrix) -> Var {
        self.push(Op::Parameter, value)
    }

    pub fn constant(&mut self, value: DenseMatrix) -> Var {
        self.push(Op::Constant, value)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        Ok(self.push(Op::MatMul(a, b), value))
    }

    pub fn spmm(&mut self, a: &'a SparseCsr, b: Var) -> Result<Var> {
        let value = a.spmm(self.value(b))?;
        Ok(self.push(Op::SpMM(a, b), value))
    }

    /// Path aggregation with weights `exp(-E_n / T)` taken from a `1 x (L+1)` energy row.
    pub fn path_aggregate(
        &mut self,
        operator: &'a PowerSeriesOperator,
        energies: Var,
        temperature: f64,
        input: Var,
    ) -> Result<Var> {
        let weights: Vec<f64> = self
            .value(energies)
            .data()
            .iter()
            .map(|&e| libm::exp(-e / temperature))
            .collect();
        let (value, cache) = operator.forward(&weights, self.value(input))?;
        Ok(self.push(
            Op::PathAggregate {
                operator,
                energies,
                temperature,
                weights,
                input,
                cache,
            },
            value,
        ))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let value = ops::relu(self.value(a));
        self.push(Op::Relu(a), value)
    }

    /// Elementwise multiplication by a constant mask (dropout).
    pub fn mask(&mut self, a: Var, mask: DenseMatrix) -> Result<Var> {
        if mask.shape() != self.value(a).shape() {
            return Err(Error::DimensionMismatch {
                op: "mask",
                lhs: self.value(a).shape(),
                rhs: mask.shape(),
            });
        }
        let value = hadamard(self.value(a), &mask);
        Ok(self.push(Op::Mask(a, mask), value))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).add(self.value(b))?;
        Ok(self.push(Op::Add(a, b), value))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        let value = self.value(a).scale(factor);
        self.push(Op::Scale(a, factor), value)
    }

    /// Identity forward; multiplies the incoming gradient by `-scale`.
    pub fn reverse_gradient(&mut self, a: Var, scale: f64) -> Var {
        let value = self.value(a).clone();
        self.push(Op::ReverseGradient(a, scale), value)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let value = DenseMatrix::filled(1, 1, self.value(a).sum());
        self.push(Op::Sum(a), value)
    }

    pub fn cross_entropy(&mut self, logits: Var, labels: &[usize], mask: &[bool]) -> Result<Var> {
        let (loss, grad) = ops::softmax_cross_entropy(self.value(logits), labels, mask)?;
        Ok(self.push(Op::CrossEntropy(logits, grad), DenseMatrix::filled(1, 1, loss)))
    }

    pub fn binary_cross_entropy(&mut self, logits: Var, target: f64) -> Result<Var> {
        let (loss, grad) = ops::sigmoid_binary_cross_entropy(self.value(logits), target)?;
        Ok(self.push(
            Op::BinaryCrossEntropy(logits, grad),
            DenseMatrix::filled(1, 1, loss),
        ))
    }

    /// Propagates from a scalar root. Every recorded node gets a gradient;
    /// nodes the root does not depend on get zeros.
    pub fn backward(&self, root: Var) -> Result<Gradients> {
        if self.nodes.is_empty() {
            return Err(Error::Internal("backward on an empty tape"));
        }
        if self.value(root).shape() != (1, 1) {
            return Err(Error::DimensionMismatch {
                op: "backward",
                lhs: self.value(root).shape(),
                rhs: (1, 1),
            });
        }
        let mut grads: Vec<Option<DenseMatrix>> = vec![None; self.nodes.len()];
        grads[root.0] = Some(DenseMatrix::filled(1, 1, 1.0));

        for id in (0..=root.0).rev() {
            let Some(g) = grads[id].take() else { continue };
            let node = &self.nodes[id];
            let mut send = |target: Var, contribution: DenseMatrix| -> Result<()> {
                if target.0 >= id {
                    return Err(Error::Internal("tape operand recorded after its consumer"));
                }
                match &mut grads[target.0] {
                    Some(acc) => acc.add_assign(&contribution),
                    slot @ None => *slot = Some(contribution),
                }
                Ok(())
            };
            match &node.op {
                Op::Parameter | Op::Constant => {
                    grads[id] = Some(g);
                    continue;
                }
                Op::MatMul(a, b) => {
                    send(*a, g.matmul_tr(self.value(*b))?)?;
                    send(*b, self.value(*a).tr_matmul(&g)?)?;
                }
                Op::SpMM(m, b) => send(*b, m.tr_spmm(&g)?)?,
                Op::PathAggregate {
                    operator,
                    energies,
                    temperature,
                    weights,
                    input,
                    cache,
                } => {
                    let (grad_input, grad_weights) =
                        operator.backward(weights, self.value(*input), cache, &g)?;
                    send(*input, grad_input)?;
                    let grad_energies: Vec<f64> = grad_weights
                        .iter()
                        .zip(weights)
                        .map(|(gw, w)| -gw * w / temperature)
                        .collect();
                    let len = grad_energies.len();
                    send(*energies, DenseMatrix::from_vec(1, len, grad_energies)?)?;
                }
                Op::Relu(a) => {
                    let x = self.value(*a);
                    let data = g
                        .data()
                        .iter()
                        .zip(x.data())
                        .map(|(&gv, &xv)| if xv > 0.0 { gv } else { 0.0 })
                        .collect();
                    send(*a, DenseMatrix::from_vec(g.rows(), g.cols(), data)?)?;
                }
                Op::Mask(a, mask) => send(*a, hadamard(&g, mask))?,
                Op::Add(a, b) => {
                    send(*a, g.clone())?;
                    send(*b, g)?;
                }
                Op::Scale(a, f) => send(*a, g.scale(*f))?,
                Op::ReverseGradient(a, s) => send(*a, g.scale(-*s))?,
                Op::Sum(a) => {
                    let (r, c) = self.value(*a).shape();
                    send(*a, DenseMatrix::filled(r, c, g.get(0, 0)))?;
                }
                Op::CrossEntropy(a, local) | Op::BinaryCrossEntropy(a, local) => {
                    send(*a, local.scale(g.get(0, 0)))?;
                }
            }
        }

        Ok(Gradients {
            grads: grads
                .into_iter()
                .zip(&self.nodes)
                .map(|(g, n)| g.unwrap_or_else(|| DenseMatrix::zeros(n.value.rows(), n.value.cols())))
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_sum_gradient_is_transpose_product() {
        let x = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, -1.0], [0.5, 0.0]]).unwrap();
        let w = DenseMatrix::from_rows(&[[0.2, -0.4], [1.0, 0.3]]).unwrap();
        let mut tape = GradTape::new();
        let xv = tape.constant(x.clone());
        let wv = tape.parameter(w);
        let y = tape.matmul(xv, wv).unwrap();
        let loss = tape.sum(y);
        let grads = tape.backward(loss).unwrap();
        // d sum(XW) / dW = X^T 1
        let expected = x.tr_matmul(&DenseMatrix::filled(3, 2, 1.0)).unwrap();
        assert_eq!(grads.get(wv), &expected);
    }

    #[test]
    fn zero_weights_block_relu_path() {
        let mut tape = GradTape::new();
        let x = tape.constant(DenseMatrix::filled(2, 2, 1.0));
        let w0 = tape.parameter(DenseMatrix::zeros(2, 2));
        let w1 = tape.parameter(DenseMatrix::zeros(2, 1));
        let h = tape.matmul(x, w0).unwrap();
        let h = tape.relu(h);
        let y = tape.matmul(h, w1).unwrap();
        let loss = tape.sum(y);
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get(w0), &DenseMatrix::zeros(2, 2));
        assert_eq!(grads.get(w1), &DenseMatrix::zeros(2, 1));
    }

    #[test]
    fn untouched_parameter_gets_zero_gradient() {
        let mut tape = GradTape::new();
        let a = tape.parameter(DenseMatrix::filled(1, 3, 2.0));
        let unused = tape.parameter(DenseMatrix::filled(2, 2, 5.0));
        let loss = tape.sum(a);
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get(unused), &DenseMatrix::zeros(2, 2));
        assert_eq!(grads.get(a), &DenseMatrix::filled(1, 3, 1.0));
    }

    #[test]
    fn reversal_flips_and_scales() {
        let mut tape = GradTape::new();
        let a = tape.parameter(DenseMatrix::filled(1, 2, 1.0));
        let r = tape.reverse_gradient(a, 0.5);
        let loss = tape.sum(r);
        assert_eq!(tape.scalar(loss), 2.0);
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get(a), &DenseMatrix::filled(1, 2, -0.5));
    }

    #[test]
    fn backward_requires_scalar_root() {
        let mut tape = GradTape::new();
        let a = tape.parameter(DenseMatrix::zeros(2, 2));
        assert!(tape.backward(a).is_err());
        assert!(GradTape::new().backward(Var(0)).is_err());
    }
}
