use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adam with bias correction. One first/second moment buffer per tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    /// Fresh state for tensors of the given lengths, default betas and epsilon.
    pub fn new(lr: f64, tensor_lens: &[usize]) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: tensor_lens.iter().map(|&n| vec![0.0; n]).collect(),
            v: tensor_lens.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn tensor_lens(&self) -> Vec<usize> {
        self.m.iter().map(Vec::len).collect()
    }

    /// Clears the moments and step counter, keeping hyperparameters.
    pub fn reset(&mut self) {
        self.step = 0;
        for buf in self.m.iter_mut().chain(self.v.iter_mut()) {
            buf.fill(0.0);
        }
    }

    /// Applies one update in place. `params[k]` and `grads[k]` must both
    /// match the length of moment buffer `k`.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Shape(format!(
                "adam tracks {} tensors, got {} params and {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        for (k, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != self.m[k].len() || g.len() != self.m[k].len() {
                return Err(Error::Shape(format!("adam tensor {k} length mismatch")));
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let inv_bc1 = 1.0 / (1.0 - self.beta1.powi(t));
        let inv_bc2 = 1.0 / (1.0 - self.beta2.powi(t));
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            for (((p, &g), m), v) in p.iter_mut().zip(g.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m * inv_bc1;
                let v_hat = *v * inv_bc2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut s = AdamState::new(0.1, &[3]);
        let mut p = vec![1.0, -2.0, 3.0];
        s.step(&mut [&mut p], &[&[0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 3.0]);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // m̂ = 1, v̂ = 1 -> Δ = lr / (1 + eps)
        let mut s = AdamState::new(0.1, &[1]);
        let mut p = vec![0.5];
        s.step(&mut [&mut p], &[&[1.0]]).unwrap();
        assert!((p[0] - (0.5 - 0.1 / (1.0 + 1e-8))).abs() < 1e-15);
    }

    #[test]
    fn zero_lr_is_a_no_op() {
        let mut s = AdamState::new(0.0, &[2]);
        let mut p = vec![0.25, 4.0];
        for _ in 0..5 {
            s.step(&mut [&mut p], &[&[3.0, -1.0]]).unwrap();
        }
        assert_eq!(p, vec![0.25, 4.0]);
    }

    #[test]
    fn deterministic_trajectories() {
        let run = || {
            let mut s = AdamState::new(0.01, &[2]);
            let mut p = vec![1.0, 1.0];
            for k in 0..20 {
                let g = [p[0] * 2.0 - k as f64 * 0.01, p[1].sin()];
                s.step(&mut [&mut p], &[&g]).unwrap();
            }
            (p, s)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_checks_and_reset() {
        let mut s = AdamState::new(0.1, &[2]);
        let mut p = vec![0.0; 3];
        assert!(s.step(&mut [&mut p], &[&[0.0; 3]]).is_err());
        let mut p = vec![0.0; 2];
        s.step(&mut [&mut p], &[&[1.0, 1.0]]).unwrap();
        s.reset();
        assert_eq!(s, AdamState::new(0.1, &[2]));
    }
}
