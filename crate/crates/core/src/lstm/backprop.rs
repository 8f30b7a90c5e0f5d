use crate::error::{Error, Result};

use super::network::{cell_step, CellState, GateActivations, LstmNetwork};

/// Mean squared error over every element.
pub fn mse(output: &[f64], target: &[f64]) -> Result<f64> {
    if output.len() != target.len() || output.is_empty() {
        return Err(Error::Dimension(format!(
            "mse over {} outputs and {} targets",
            output.len(),
            target.len()
        )));
    }
    let s: f64 = output.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(s / output.len() as f64)
}

struct LayerTape {
    input: Vec<f64>,
    /// (len + 1) × hidden; row 0 is the carried-in state.
    h: Vec<f64>,
    c: Vec<f64>,
    /// len × 4 × hidden: forget, input, candidate, output activations.
    act: Vec<f64>,
}

/// Full BPTT over one sequence from zero state. Returns the loss and its gradient.
pub fn bptt_gradients(
    net: &LstmNetwork,
    input: &[f64],
    target: &[f64],
) -> Result<(f64, LstmNetwork)> {
    let mut grads = net.zeros_like();
    let mut states = net.zero_states();
    let loss = chunk_gradients(net, input, target, &mut states, &mut grads, 1.0)?;
    Ok((loss, grads))
}

/// Forward and backward over one chunk starting from `states`.
///
/// Gradients are scaled by `weight` and accumulated into `grads`; `states`
/// is advanced to the end of the chunk. No gradient crosses the chunk start.
pub(crate) fn chunk_gradients(
    net: &LstmNetwork,
    input: &[f64],
    target: &[f64],
    states: &mut [CellState],
    grads: &mut LstmNetwork,
    weight: f64,
) -> Result<f64> {
    let ni = net.input_width();
    let no = net.output_width();
    if ni == 0 || input.len() % ni != 0 {
        return Err(Error::Dimension(format!(
            "input length {} is not a multiple of width {ni}",
            input.len()
        )));
    }
    let len = input.len() / ni;
    if len == 0 || target.len() != len * no {
        return Err(Error::Dimension(format!(
            "target length {} does not match {len} steps of {no} outputs",
            target.len()
        )));
    }

    let mut tapes: Vec<LayerTape> = Vec::with_capacity(net.layers.len());
    let mut seq = input.to_vec();
    for (layer, st) in net.layers.iter().zip(states.iter_mut()) {
        let nh = layer.hidden;
        let mut h = vec![0.0; (len + 1) * nh];
        let mut c = vec![0.0; (len + 1) * nh];
        let mut act = vec![0.0; len * 4 * nh];
        h[..nh].copy_from_slice(&st.h);
        c[..nh].copy_from_slice(&st.c);
        let mut a = GateActivations::zeros(nh);
        let mut hn = vec![0.0; nh];
        let mut cn = vec![0.0; nh];
        for t in 0..len {
            let x = &seq[t * layer.input..(t + 1) * layer.input];
            cell_step(
                layer,
                x,
                &h[t * nh..(t + 1) * nh],
                &c[t * nh..(t + 1) * nh],
                &mut a,
                &mut hn,
                &mut cn,
            );
            h[(t + 1) * nh..(t + 2) * nh].copy_from_slice(&hn);
            c[(t + 1) * nh..(t + 2) * nh].copy_from_slice(&cn);
            let base = t * 4 * nh;
            act[base..base + nh].copy_from_slice(&a.f1);
            act[base + nh..base + 2 * nh].copy_from_slice(&a.f2);
            act[base + 2 * nh..base + 3 * nh].copy_from_slice(&a.f3);
            act[base + 3 * nh..base + 4 * nh].copy_from_slice(&a.f4);
        }
        st.h.copy_from_slice(&h[len * nh..]);
        st.c.copy_from_slice(&c[len * nh..]);
        let out = h[nh..].to_vec();
        tapes.push(LayerTape {
            input: std::mem::replace(&mut seq, out),
            h,
            c,
            act,
        });
    }

    // Dense head and loss.
    let nh_top = net.dense.input;
    let mut y = vec![0.0; len * no];
    for t in 0..len {
        net.dense
            .apply(&seq[t * nh_top..(t + 1) * nh_top], &mut y[t * no..(t + 1) * no]);
    }
    let loss = mse(&y, target)?;
    if !loss.is_finite() {
        return Err(Error::Gradient {
            layer: net.layers.len(),
            step: 0,
        });
    }
    let scale = 2.0 / (len * no) as f64;
    let mut dh_seq = vec![0.0; len * nh_top];
    for t in 0..len {
        let h = &seq[t * nh_top..(t + 1) * nh_top];
        for o in 0..no {
            let dy = scale * (y[t * no + o] - target[t * no + o]);
            grads.dense.b[o] += weight * dy;
            let wrow = &net.dense.w[o * nh_top..(o + 1) * nh_top];
            let grow = &mut grads.dense.w[o * nh_top..(o + 1) * nh_top];
            for j in 0..nh_top {
                grow[j] += weight * dy * h[j];
                dh_seq[t * nh_top + j] += dy * wrow[j];
            }
        }
    }

    // Layers from the top down.
    for li in (0..net.layers.len()).rev() {
        let layer = &net.layers[li];
        let tape = &tapes[li];
        let gl = &mut grads.layers[li];
        let nh = layer.hidden;
        let nx = layer.input;
        let mut dx_seq = vec![0.0; len * nx];
        let mut dh_next = vec![0.0; nh];
        let mut dc_next = vec![0.0; nh];
        let mut dz = [vec![0.0; nh], vec![0.0; nh], vec![0.0; nh], vec![0.0; nh]];
        for t in (0..len).rev() {
            let base = t * 4 * nh;
            let (f1, rest) = tape.act[base..base + 4 * nh].split_at(nh);
            let (f2, rest) = rest.split_at(nh);
            let (f3, f4) = rest.split_at(nh);
            let c_prev = &tape.c[t * nh..(t + 1) * nh];
            let c = &tape.c[(t + 1) * nh..(t + 2) * nh];
            for r in 0..nh {
                let dh = dh_seq[t * nh + r] + dh_next[r];
                let tc = c[r].tanh();
                let dc = dh * f4[r] * (1.0 - tc * tc) + dc_next[r];
                dz[0][r] = dc * c_prev[r] * f1[r] * (1.0 - f1[r]);
                dz[1][r] = dc * f3[r] * f2[r] * (1.0 - f2[r]);
                dz[2][r] = dc * f2[r] * (1.0 - f3[r] * f3[r]);
                dz[3][r] = dh * tc * f4[r] * (1.0 - f4[r]);
                dc_next[r] = dc * f1[r];
            }
            let x = &tape.input[t * nx..(t + 1) * nx];
            let h_prev = &tape.h[t * nh..(t + 1) * nh];
            dh_next.iter_mut().for_each(|v| *v = 0.0);
            let dx = &mut dx_seq[t * nx..(t + 1) * nx];
            for (g, (gate, dzg)) in gl.gates_mut().into_iter().zip(&dz).enumerate() {
                let p = layer.gates()[g];
                for r in 0..nh {
                    let d = dzg[r];
                    if d == 0.0 {
                        continue;
                    }
                    gate.b[r] += weight * d;
                    let wd = weight * d;
                    let gw = &mut gate.w[r * nx..(r + 1) * nx];
                    let pw = &p.w[r * nx..(r + 1) * nx];
                    for i in 0..nx {
                        gw[i] += wd * x[i];
                        dx[i] += pw[i] * d;
                    }
                    let gu = &mut gate.u[r * nh..(r + 1) * nh];
                    let pu = &p.u[r * nh..(r + 1) * nh];
                    for j in 0..nh {
                        gu[j] += wd * h_prev[j];
                        dh_next[j] += pu[j] * d;
                    }
                }
            }
            if dh_next.iter().chain(&dc_next).any(|v| !v.is_finite()) {
                return Err(Error::Gradient { layer: li, step: t });
            }
        }
        dh_seq = dx_seq;
    }
    Ok(loss)
}
