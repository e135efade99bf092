//! Dense kernels with hand-written backward passes. Matrices are row-major `&[f64]`.

/// `c (m×n) = [c +] op(a) (m×k) · op(b) (k×n)`, where `op` optionally transposes the stored
/// matrix (`a` stored `k×m`, `b` stored `n×k` when transposed).
#[allow(clippy::too_many_arguments)]
pub fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_t: bool,
    b: &[f64],
    b_t: bool,
    c: &mut [f64],
    accumulate: bool,
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    let (rsa, csa) = if a_t { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_t { (1, k as isize) } else { (n as isize, 1) };
    let beta = if accumulate { 1.0 } else { 0.0 };
    // SAFETY: bounds asserted above; strides describe the stored layouts.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// `rows × in` · `in × out` + bias.
pub fn linear(x: &[f64], rows: usize, w: &[f64], b: Option<&[f64]>, inp: usize, out: usize) -> Vec<f64> {
    let mut y = vec![0.0; rows * out];
    if let Some(b) = b {
        for r in y.chunks_mut(out) {
            r.copy_from_slice(b);
        }
    }
    gemm(rows, inp, out, x, false, w, false, &mut y, b.is_some());
    y
}

/// Accumulates weight/bias gradients of [`linear`] and returns the input gradient.
#[allow(clippy::too_many_arguments)]
pub fn linear_backward(
    x: &[f64],
    dy: &[f64],
    rows: usize,
    w: &[f64],
    inp: usize,
    out: usize,
    dw: &mut [f64],
    db: Option<&mut [f64]>,
    want_dx: bool,
) -> Option<Vec<f64>> {
    gemm(inp, rows, out, x, true, dy, false, dw, true);
    if let Some(db) = db {
        for r in dy.chunks(out) {
            for (g, v) in db.iter_mut().zip(r) {
                *g += v;
            }
        }
    }
    want_dx.then(|| {
        let mut dx = vec![0.0; rows * inp];
        gemm(rows, out, inp, dy, false, w, true, &mut dx, false);
        dx
    })
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn silu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v * sigmoid(v)).collect()
}

/// `dy ⊙ silu'(x)`.
pub fn silu_backward(x: &[f64], dy: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(dy)
        .map(|(&v, &g)| {
            let s = sigmoid(v);
            g * s * (1.0 + v * (1.0 - s))
        })
        .collect()
}

const LN_EPS: f64 = 1e-5;

/// Per-row layer norm with affine gain/bias. Returns the output and per-row `(mean, rstd)`.
pub fn layer_norm(x: &[f64], width: usize, gain: &[f64], bias: &[f64]) -> (Vec<f64>, Vec<(f64, f64)>) {
    let rows = x.len() / width;
    let mut y = vec![0.0; x.len()];
    let mut stats = Vec::with_capacity(rows);
    for (xr, yr) in x.chunks(width).zip(y.chunks_mut(width)) {
        let mean = xr.iter().sum::<f64>() / width as f64;
        let var = xr.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / width as f64;
        let rstd = 1.0 / (var + LN_EPS).sqrt();
        for i in 0..width {
            yr[i] = (xr[i] - mean) * rstd * gain[i] + bias[i];
        }
        stats.push((mean, rstd));
    }
    (y, stats)
}

pub fn layer_norm_backward(
    x: &[f64],
    dy: &[f64],
    width: usize,
    stats: &[(f64, f64)],
    gain: &[f64],
    dgain: &mut [f64],
    dbias: &mut [f64],
) -> Vec<f64> {
    let mut dx = vec![0.0; x.len()];
    let mut xhat = vec![0.0; width];
    let mut g = vec![0.0; width];
    for (r, &(mean, rstd)) in stats.iter().enumerate() {
        let xr = &x[r * width..(r + 1) * width];
        let dyr = &dy[r * width..(r + 1) * width];
        for i in 0..width {
            xhat[i] = (xr[i] - mean) * rstd;
            dgain[i] += dyr[i] * xhat[i];
            dbias[i] += dyr[i];
            g[i] = dyr[i] * gain[i];
        }
        let mg = g.iter().sum::<f64>() / width as f64;
        let mgx = g.iter().zip(&xhat).map(|(a, b)| a * b).sum::<f64>() / width as f64;
        let dxr = &mut dx[r * width..(r + 1) * width];
        for i in 0..width {
            dxr[i] = rstd * (g[i] - mg - xhat[i] * mgx);
        }
    }
    dx
}

/// Depthwise 3×3 convolution with zero padding over a `qubits × slots` grid of `width`-channel
/// rows (row index `q·slots + t`). `w` holds 9 taps per channel, tap-major.
pub fn depthwise_conv(x: &[f64], qubits: usize, slots: usize, width: usize, w: &[f64], b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    for q in 0..qubits {
        for t in 0..slots {
            let out = &mut y[(q * slots + t) * width..(q * slots + t + 1) * width];
            out.copy_from_slice(b);
            for_taps(q, t, qubits, slots, |tap, src| {
                let taps = &w[tap * width..(tap + 1) * width];
                let inp = &x[src * width..(src + 1) * width];
                for c in 0..width {
                    out[c] += taps[c] * inp[c];
                }
            });
        }
    }
    y
}

/// Accumulates tap/bias gradients and returns the input gradient of [`depthwise_conv`].
#[allow(clippy::too_many_arguments)]
pub fn depthwise_conv_backward(
    x: &[f64],
    dy: &[f64],
    qubits: usize,
    slots: usize,
    width: usize,
    w: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
) -> Vec<f64> {
    let mut dx = vec![0.0; x.len()];
    for q in 0..qubits {
        for t in 0..slots {
            let p = q * slots + t;
            let g = &dy[p * width..(p + 1) * width];
            for c in 0..width {
                db[c] += g[c];
            }
            for_taps(q, t, qubits, slots, |tap, src| {
                let taps = &w[tap * width..(tap + 1) * width];
                let inp = &x[src * width..(src + 1) * width];
                let dtap = &mut dw[tap * width..(tap + 1) * width];
                for c in 0..width {
                    dtap[c] += g[c] * inp[c];
                }
                let dsrc = &mut dx[src * width..(src + 1) * width];
                for c in 0..width {
                    dsrc[c] += g[c] * taps[c];
                }
            });
        }
    }
    dx
}

#[inline]
fn for_taps(q: usize, t: usize, qubits: usize, slots: usize, mut f: impl FnMut(usize, usize)) {
    for dq in 0..3 {
        let sq = q + dq;
        if sq < 1 || sq > qubits {
            continue;
        }
        for dt in 0..3 {
            let st = t + dt;
            if st < 1 || st > slots {
                continue;
            }
            f(dq * 3 + dt, (sq - 1) * slots + (st - 1));
        }
    }
}

/// Transformer-style sinusoidal features of a scalar position.
pub fn sinusoidal(position: f64, dim: usize) -> Vec<f64> {
    let half = dim / 2;
    let mut out = vec![0.0; dim];
    for i in 0..half {
        let freq = (-(10_000f64.ln()) * i as f64 / half as f64).exp();
        out[i] = (position * freq).sin();
        out[half + i] = (position * freq).cos();
    }
    out
}
