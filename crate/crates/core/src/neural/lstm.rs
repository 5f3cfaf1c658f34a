use rand::Rng;

use super::tensor::{gemv, gemv_t, ger, sigmoid, Tensor};

/// One LSTM layer. `w` is `[4h, in + h]` acting on `[x; h_prev]`, gate
/// blocks in the order input, forget, output, candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmLayer {
    pub w: Tensor,
    pub b: Tensor,
}

/// Saved activations of one time step.
#[derive(Clone, Debug)]
pub struct LstmStep {
    xh: Vec<f64>,
    gates: Vec<f64>,
    c_prev: Vec<f64>,
    tc: Vec<f64>,
    pub h: Vec<f64>,
}

impl LstmLayer {
    pub fn new<R: Rng + ?Sized>(input: usize, hidden: usize, range: f64, rng: &mut R) -> Self {
        LstmLayer {
            w: Tensor::uniform(&[4 * hidden, input + hidden], range, rng),
            b: Tensor::uniform(&[4 * hidden], range, rng),
        }
    }

    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmLayer {
            w: Tensor::zeros(&[4 * hidden, input + hidden]),
            b: Tensor::zeros(&[4 * hidden]),
        }
    }

    pub fn hidden(&self) -> usize {
        self.b.len() / 4
    }

    pub fn input(&self) -> usize {
        self.w.shape()[1] - self.hidden()
    }

    /// Runs over `xs` from zero state. `h_mask` multiplies the recurrent
    /// input at every step.
    pub fn forward(&self, xs: &[Vec<f64>], h_mask: Option<&[f64]>) -> Vec<LstmStep> {
        let h = self.hidden();
        let inp = self.input();
        let cols = inp + h;
        let mut steps: Vec<LstmStep> = Vec::with_capacity(xs.len());
        let mut h_prev = vec![0.0; h];
        let mut c_prev = vec![0.0; h];
        for x in xs {
            let mut xh = Vec::with_capacity(cols);
            xh.extend_from_slice(x);
            match h_mask {
                Some(m) => xh.extend(h_prev.iter().zip(m).map(|(a, b)| a * b)),
                None => xh.extend_from_slice(&h_prev),
            }
            let mut gates = self.b.data().to_vec();
            gemv(self.w.data(), cols, &xh, &mut gates);
            for v in &mut gates[..3 * h] {
                *v = sigmoid(*v);
            }
            for v in &mut gates[3 * h..] {
                *v = v.tanh();
            }
            let mut c = vec![0.0; h];
            let mut tc = vec![0.0; h];
            let mut hn = vec![0.0; h];
            for j in 0..h {
                c[j] = gates[h + j] * c_prev[j] + gates[j] * gates[3 * h + j];
                tc[j] = c[j].tanh();
                hn[j] = gates[2 * h + j] * tc[j];
            }
            steps.push(LstmStep {
                xh,
                gates,
                c_prev: std::mem::replace(&mut c_prev, c),
                tc,
                h: hn.clone(),
            });
            h_prev = hn;
        }
        steps
    }

    /// Backpropagation through time. `dh_out[t]` is the loss gradient with
    /// respect to the output at step `t`. Returns gradients for the inputs.
    pub fn backward(
        &self,
        steps: &[LstmStep],
        h_mask: Option<&[f64]>,
        dh_out: &[Vec<f64>],
        grads: &mut LstmLayer,
    ) -> Vec<Vec<f64>> {
        let h = self.hidden();
        let inp = self.input();
        let cols = inp + h;
        let mut dx = vec![Vec::new(); steps.len()];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut da = vec![0.0; 4 * h];
        for t in (0..steps.len()).rev() {
            let s = &steps[t];
            let g = &s.gates;
            for j in 0..h {
                let dh = dh_out[t][j] + dh_next[j];
                let (i, f, o, c) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                let dc = dh * o * (1.0 - s.tc[j] * s.tc[j]) + dc_next[j];
                da[j] = dc * c * i * (1.0 - i);
                da[h + j] = dc * s.c_prev[j] * f * (1.0 - f);
                da[2 * h + j] = dh * s.tc[j] * o * (1.0 - o);
                da[3 * h + j] = dc * i * (1.0 - c * c);
                dc_next[j] = dc * f;
            }
            ger(grads.w.data_mut(), cols, &da, &s.xh);
            for (gb, d) in grads.b.data_mut().iter_mut().zip(&da) {
                *gb += d;
            }
            let mut dxh = vec![0.0; cols];
            gemv_t(self.w.data(), cols, &da, &mut dxh);
            dh_next.copy_from_slice(&dxh[inp..]);
            if let Some(m) = h_mask {
                for (d, mv) in dh_next.iter_mut().zip(m) {
                    *d *= mv;
                }
            }
            dxh.truncate(inp);
            dx[t] = dxh;
        }
        dx
    }
}
