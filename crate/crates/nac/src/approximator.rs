//! Convolutional network over compressed states: stacked same-size
//! convolutions with rectifiers, then a fully connected head with one output
//! per slot. Gradients are exact and hand-derived.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use harvest_core::{Error, Result};

/// Output stored in masked slots of a VALUES head. Aggregations skip masked
/// slots by the mask, never by comparing against this value.
pub const VALUE_SENTINEL: f64 = -1e30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    Logits,
    Values,
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Head::Logits => "logits",
            Head::Values => "values",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    /// Slots per side of the input and number of outputs.
    pub k: usize,
    pub channels: usize,
    pub layers: usize,
    /// Odd square kernel side; padding keeps the map at `k x k`.
    pub kernel: usize,
    pub head: Head,
}

/// A named slice of the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    pub offset: usize,
    pub shape: Vec<usize>,
}

impl Block {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

impl NetSpec {
    pub const IN_CHANNELS: usize = 2;

    /// Three 3x3 layers of 64 channels.
    pub fn standard(k: usize, head: Head) -> Self {
        NetSpec {
            k,
            channels: 64,
            layers: 3,
            kernel: 3,
            head,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.channels == 0 || self.layers == 0 {
            return Err(Error::Config(format!("degenerate network: {self}")));
        }
        if self.kernel.is_multiple_of(2) {
            return Err(Error::Config(format!("kernel must be odd: {self}")));
        }
        Ok(())
    }

    pub fn input_len(&self) -> usize {
        Self::IN_CHANNELS * self.k * self.k
    }

    fn layer_in(&self, l: usize) -> usize {
        if l == 0 {
            Self::IN_CHANNELS
        } else {
            self.channels
        }
    }

    /// Shape registry in storage order.
    pub fn layout(&self) -> Vec<Block> {
        let mut blocks = Vec::with_capacity(2 * self.layers + 2);
        let mut offset = 0;
        let mut push = |name: String, shape: Vec<usize>| {
            let b = Block { name, offset, shape };
            offset += b.len();
            blocks.push(b);
        };
        for l in 0..self.layers {
            push(
                format!("conv{l}.weight"),
                vec![self.channels, self.layer_in(l), self.kernel, self.kernel],
            );
            push(format!("conv{l}.bias"), vec![self.channels]);
        }
        push("head.weight".into(), vec![self.k, self.channels * self.k * self.k]);
        push("head.bias".into(), vec![self.k]);
        blocks
    }

    pub fn param_count(&self) -> usize {
        self.layout().iter().map(Block::len).sum()
    }

    /// Hex SHA-256 of the description and shape registry.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_string().as_bytes());
        for b in self.layout() {
            h.update(format!("\n{} {} {:?}", b.name, b.offset, b.shape).as_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Parses the `Display` form.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Config(format!("malformed network description {text:?}"));
        let mut spec = NetSpec::standard(0, Head::Logits);
        let mut seen = 0;
        for field in text.split_whitespace() {
            let (key, value) = field.split_once('=').ok_or_else(bad)?;
            let num = || value.parse::<usize>().map_err(|_| bad());
            match key {
                "k" => spec.k = num()?,
                "channels" => spec.channels = num()?,
                "layers" => spec.layers = num()?,
                "kernel" => spec.kernel = num()?,
                "head" => {
                    spec.head = match value {
                        "logits" => Head::Logits,
                        "values" => Head::Values,
                        _ => return Err(bad()),
                    }
                }
                _ => return Err(bad()),
            }
            seen += 1;
        }
        if seen != 5 {
            return Err(bad());
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for NetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "k={} channels={} layers={} kernel={} head={}",
            self.k, self.channels, self.layers, self.kernel, self.head
        )
    }
}

/// Flat parameter vector with its shape registry.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub spec: NetSpec,
    pub values: Vec<f64>,
}

impl ParamSet {
    pub fn zeros(spec: &NetSpec) -> Self {
        ParamSet {
            spec: spec.clone(),
            values: vec![0.0; spec.param_count()],
        }
    }

    /// Weights and biases uniform in `+-1/sqrt(fan_in)`.
    pub fn init(spec: &NetSpec, rng: &mut ChaCha8Rng) -> Self {
        let mut p = Self::zeros(spec);
        for (l, pair) in spec.layout().chunks(2).enumerate() {
            let fan_in = if l < spec.layers {
                spec.layer_in(l) * spec.kernel * spec.kernel
            } else {
                spec.channels * spec.k * spec.k
            };
            let bound = 1.0 / (fan_in as f64).sqrt();
            for b in pair {
                for x in &mut p.values[b.range()] {
                    *x = rng.random_range(-bound..bound);
                }
            }
        }
        p
    }

    pub fn unflatten(&self) -> Vec<(String, Vec<f64>)> {
        self.spec
            .layout()
            .into_iter()
            .map(|b| (b.name.clone(), self.values[b.range()].to_vec()))
            .collect()
    }

    pub fn flatten(spec: &NetSpec, blocks: &[(String, Vec<f64>)]) -> Result<Self> {
        let layout = spec.layout();
        if layout.len() != blocks.len() {
            return Err(Error::Contract(format!(
                "expected {} blocks, got {}",
                layout.len(),
                blocks.len()
            )));
        }
        let mut values = Vec::with_capacity(spec.param_count());
        for (b, (name, data)) in layout.iter().zip(blocks) {
            if &b.name != name || b.len() != data.len() {
                return Err(Error::Contract(format!(
                    "block {name} ({}) does not match {} {:?}",
                    data.len(),
                    b.name,
                    b.shape
                )));
            }
            values.extend_from_slice(data);
        }
        Ok(ParamSet {
            spec: spec.clone(),
            values,
        })
    }

    /// Writes `<stem>.bin` (little-endian f64) and `<stem>.shapes.txt`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let bin = dir.join(format!("{stem}.bin"));
        let bytes: Vec<u8> = self.values.iter().flat_map(|x| x.to_le_bytes()).collect();
        fs::write(&bin, bytes).map_err(|e| Error::io(&bin, e))?;
        let mut text = format!("hash {}\nspec {}\n", self.spec.hash(), self.spec);
        for b in self.spec.layout() {
            let dims: Vec<String> = b.shape.iter().map(usize::to_string).collect();
            text.push_str(&format!("{} {} {}\n", b.name, b.offset, dims.join("x")));
        }
        let shapes = dir.join(format!("{stem}.shapes.txt"));
        fs::write(&shapes, text).map_err(|e| Error::io(&shapes, e))
    }

    /// Reads a checkpoint written by `save`, verifying the stored hash and
    /// the vector length against the stored network description.
    pub fn load(dir: &Path, stem: &str) -> Result<Self> {
        let shapes = dir.join(format!("{stem}.shapes.txt"));
        let text = fs::read_to_string(&shapes).map_err(|e| Error::io(&shapes, e))?;
        let parse_err = |line: usize, message: &str| Error::Parse {
            path: shapes.clone(),
            line,
            message: message.into(),
        };
        let mut lines = text.lines();
        let hash = lines
            .next()
            .and_then(|l| l.strip_prefix("hash "))
            .ok_or_else(|| parse_err(1, "missing hash line"))?;
        let spec_text = lines
            .next()
            .and_then(|l| l.strip_prefix("spec "))
            .ok_or_else(|| parse_err(2, "missing spec line"))?;
        let spec = NetSpec::parse(spec_text)?;
        if spec.hash() != hash {
            return Err(Error::Contract(format!(
                "checkpoint {} hash mismatch: stored {hash}, computed {}",
                shapes.display(),
                spec.hash()
            )));
        }
        let bin = dir.join(format!("{stem}.bin"));
        let bytes = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
        if bytes.len() != 8 * spec.param_count() {
            return Err(Error::Contract(format!(
                "checkpoint {} holds {} bytes, expected {}",
                bin.display(),
                bytes.len(),
                8 * spec.param_count()
            )));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(ParamSet { spec, values })
    }

    /// Loads and additionally requires the stored network to equal `spec`.
    pub fn load_expecting(dir: &Path, stem: &str, spec: &NetSpec) -> Result<Self> {
        let p = Self::load(dir, stem)?;
        if &p.spec != spec {
            return Err(Error::Contract(format!(
                "checkpoint network {} differs from expected {spec}",
                p.spec
            )));
        }
        Ok(p)
    }
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    /// Head outputs before masking.
    pub raw: Vec<f64>,
    /// Head outputs with masked slots replaced (sentinel or `-inf`).
    pub output: Vec<f64>,
    mask: Vec<bool>,
    /// Input followed by each layer's rectified output.
    acts: Vec<Vec<f64>>,
}

fn check_shapes(spec: &NetSpec, params: &[f64], x: &[f64], mask: &[bool]) -> Result<()> {
    let mismatch = |what: &str, got: usize, want: usize| {
        Err(Error::Contract(format!(
            "{what} has length {got}, network {spec} expects {want}"
        )))
    };
    if params.len() != spec.param_count() {
        return mismatch("parameter vector", params.len(), spec.param_count());
    }
    if x.len() != spec.input_len() {
        return mismatch("input tensor", x.len(), spec.input_len());
    }
    if mask.len() != spec.k {
        return mismatch("mask", mask.len(), spec.k);
    }
    Ok(())
}

/// Row-major `C = A B + beta C` where `A` is `m x k` with strides `sa` and
/// `B` is `k x n` with strides `sb`.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    sa: (usize, usize),
    b: &[f64],
    sb: (usize, usize),
    beta: f64,
    c: &mut [f64],
) {
    if m == 0 || n == 0 {
        return;
    }
    let last = |rows: usize, cols: usize, (r, c): (usize, usize)| (rows - 1) * r + (cols - 1) * c;
    if k > 0 {
        assert!(last(m, k, sa) < a.len() && last(k, n, sb) < b.len(), "gemm operand bounds");
    }
    assert!(m * n <= c.len(), "gemm output bounds");
    // SAFETY: every index the kernel touches was bounds-checked above and
    // `c` does not alias `a` or `b` (distinct borrows).
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            sa.0 as isize,
            sa.1 as isize,
            b.as_ptr(),
            sb.0 as isize,
            sb.1 as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Output positions `y` whose input position `y + d - pad` lies inside.
fn valid_range(k: usize, d: usize, pad: usize) -> (usize, usize) {
    (pad.saturating_sub(d), (k + pad).saturating_sub(d).min(k))
}

/// Patch matrix `(cin * ks * ks) x (k * k)` of a zero-padded map.
fn im2col(input: &[f64], cin: usize, k: usize, ks: usize) -> Vec<f64> {
    let pad = ks / 2;
    let plane = k * k;
    let mut col = vec![0.0; cin * ks * ks * plane];
    for i in 0..cin {
        let ip = &input[i * plane..(i + 1) * plane];
        for dy in 0..ks {
            let (y0, y1) = valid_range(k, dy, pad);
            for dx in 0..ks {
                let (x0, x1) = valid_range(k, dx, pad);
                let row = &mut col[((i * ks + dy) * ks + dx) * plane..][..plane];
                for y in y0..y1 {
                    let iy = y + dy - pad;
                    row[y * k + x0..y * k + x1]
                        .copy_from_slice(&ip[iy * k + x0 + dx - pad..iy * k + x1 + dx - pad]);
                }
            }
        }
    }
    col
}

/// Adds a patch-matrix gradient back onto the map it was taken from.
fn col2im(gcol: &[f64], cin: usize, k: usize, ks: usize, gin: &mut [f64]) {
    let pad = ks / 2;
    let plane = k * k;
    for i in 0..cin {
        let gp = &mut gin[i * plane..(i + 1) * plane];
        for dy in 0..ks {
            let (y0, y1) = valid_range(k, dy, pad);
            for dx in 0..ks {
                let (x0, x1) = valid_range(k, dx, pad);
                let row = &gcol[((i * ks + dy) * ks + dx) * plane..][..plane];
                for y in y0..y1 {
                    let iy = y + dy - pad;
                    let dst = &mut gp[iy * k + x0 + dx - pad..iy * k + x1 + dx - pad];
                    for (a, &g) in dst.iter_mut().zip(&row[y * k + x0..y * k + x1]) {
                        *a += g;
                    }
                }
            }
        }
    }
}

fn conv_forward(
    w: &[f64],
    b: &[f64],
    input: &[f64],
    cin: usize,
    cout: usize,
    k: usize,
    ks: usize,
) -> Vec<f64> {
    let plane = k * k;
    let taps = cin * ks * ks;
    let col = im2col(input, cin, k, ks);
    let mut out = vec![0.0; cout * plane];
    for (o, op) in out.chunks_mut(plane).enumerate() {
        op.fill(b[o]);
    }
    gemm(cout, taps, plane, w, (taps, 1), &col, (plane, 1), 1.0, &mut out);
    out
}

/// Accumulates weight/bias gradients and, when `gin` is given, the input
/// gradient of one convolution.
#[allow(clippy::too_many_arguments)]
fn conv_backward(
    w: &[f64],
    input: &[f64],
    gout: &[f64],
    cin: usize,
    cout: usize,
    k: usize,
    ks: usize,
    gw: &mut [f64],
    gb: &mut [f64],
    gin: Option<&mut [f64]>,
) {
    let plane = k * k;
    let taps = cin * ks * ks;
    for (o, go) in gout.chunks(plane).enumerate() {
        gb[o] += go.iter().sum::<f64>();
    }
    let col = im2col(input, cin, k, ks);
    // dW = dOut * col^T
    gemm(cout, plane, taps, gout, (plane, 1), &col, (1, plane), 1.0, gw);
    if let Some(gin) = gin {
        // dCol = W^T * dOut
        let mut gcol = vec![0.0; taps * plane];
        gemm(taps, cout, plane, w, (1, taps), gout, (plane, 1), 0.0, &mut gcol);
        col2im(&gcol, cin, k, ks, gin);
    }
}

/// Samples per head pass in the batched functions; bounds scratch memory.
const HEAD_CHUNK: usize = 32;

fn conv_stack(spec: &NetSpec, layout: &[Block], params: &[f64], x: &[f64]) -> Vec<Vec<f64>> {
    let mut acts = Vec::with_capacity(spec.layers + 1);
    acts.push(x.to_vec());
    for l in 0..spec.layers {
        let (wb, bb) = (&layout[2 * l], &layout[2 * l + 1]);
        let mut h = conv_forward(
            &params[wb.range()],
            &params[bb.range()],
            &acts[l],
            spec.layer_in(l),
            spec.channels,
            spec.k,
            spec.kernel,
        );
        h.iter_mut().for_each(|v| *v = v.max(0.0));
        acts.push(h);
    }
    acts
}

/// Runs the network on a batch of `2 x k x k` tensors. Masked slots read
/// the value sentinel (VALUES) or `-inf` (LOGITS) in `output`. The head is
/// evaluated as one matrix product per chunk of samples.
pub fn forward_batch(
    spec: &NetSpec,
    params: &[f64],
    inputs: &[(&[f64], &[bool])],
) -> Result<Vec<Forward>> {
    for &(x, mask) in inputs {
        check_shapes(spec, params, x, mask)?;
    }
    let layout = spec.layout();
    let k = spec.k;
    let (hw, hb) = (&layout[2 * spec.layers], &layout[2 * spec.layers + 1]);
    let m = spec.channels * k * k;
    let fill = match spec.head {
        Head::Logits => f64::NEG_INFINITY,
        Head::Values => VALUE_SENTINEL,
    };
    let mut out = Vec::with_capacity(inputs.len());
    let mut feats = Vec::new();
    let mut raw = Vec::new();
    for chunk in inputs.chunks(HEAD_CHUNK) {
        let stacks: Vec<Vec<Vec<f64>>> = chunk
            .iter()
            .map(|&(x, _)| conv_stack(spec, &layout, params, x))
            .collect();
        let b = chunk.len();
        feats.clear();
        for acts in &stacks {
            feats.extend_from_slice(acts.last().expect("at least the input"));
        }
        raw.clear();
        for _ in 0..b {
            raw.extend_from_slice(&params[hb.range()]);
        }
        // raw (b x k) += feats (b x m) * W^T
        gemm(b, m, k, &feats, (m, 1), &params[hw.range()], (1, m), 1.0, &mut raw);
        for (i, (acts, &(_, mask))) in stacks.into_iter().zip(chunk).enumerate() {
            let r = raw[i * k..(i + 1) * k].to_vec();
            let output = r
                .iter()
                .zip(mask)
                .map(|(&v, &m)| if m { v } else { fill })
                .collect();
            out.push(Forward {
                raw: r,
                output,
                mask: mask.to_vec(),
                acts,
            });
        }
    }
    Ok(out)
}

/// Single-sample form of `forward_batch`.
pub fn forward(spec: &NetSpec, params: &[f64], x: &[f64], mask: &[bool]) -> Result<Forward> {
    Ok(forward_batch(spec, params, &[(x, mask)])?.pop().expect("one sample"))
}

/// Adds `sum_i upstream_i . d(output_i)/d(params)` into `grad`. Upstream
/// entries on masked slots are ignored.
pub fn backward_batch_into(
    spec: &NetSpec,
    params: &[f64],
    fwds: &[Forward],
    upstreams: &[Vec<f64>],
    grad: &mut [f64],
) -> Result<()> {
    if fwds.len() != upstreams.len()
        || upstreams.iter().any(|u| u.len() != spec.k)
        || grad.len() != spec.param_count()
    {
        return Err(Error::Contract(format!(
            "backward buffers do not match network {spec}"
        )));
    }
    let layout = spec.layout();
    let k = spec.k;
    let (hw, hb) = (&layout[2 * spec.layers], &layout[2 * spec.layers + 1]);
    let m = spec.channels * k * k;
    let mut g = Vec::new();
    let mut feats = Vec::new();
    for (fchunk, uchunk) in fwds.chunks(HEAD_CHUNK).zip(upstreams.chunks(HEAD_CHUNK)) {
        let b = fchunk.len();
        g.clear();
        for (f, u) in fchunk.iter().zip(uchunk) {
            g.extend(u.iter().zip(&f.mask).map(|(&u, &m)| if m { u } else { 0.0 }));
        }
        if g.iter().all(|&x| x == 0.0) {
            continue;
        }
        feats.clear();
        for f in fchunk {
            feats.extend_from_slice(f.acts.last().expect("at least the input"));
        }
        for row in g.chunks(k) {
            for (a, &x) in grad[hb.range()].iter_mut().zip(row) {
                *a += x;
            }
        }
        // dW (k x m) += g^T (k x b) * feats (b x m)
        gemm(k, b, m, &g, (1, k), &feats, (m, 1), 1.0, &mut grad[hw.range()]);
        // dFeat (b x m) = g (b x k) * W (k x m)
        let mut gfeats = vec![0.0; b * m];
        gemm(b, k, m, &g, (k, 1), &params[hw.range()], (m, 1), 0.0, &mut gfeats);
        for (f, gfeat) in fchunk.iter().zip(gfeats.chunks(m)) {
            conv_stack_backward(spec, &layout, params, f, gfeat.to_vec(), grad);
        }
    }
    Ok(())
}

fn conv_stack_backward(
    spec: &NetSpec,
    layout: &[Block],
    params: &[f64],
    fwd: &Forward,
    mut gfeat: Vec<f64>,
    grad: &mut [f64],
) {
    let k = spec.k;
    for l in (0..spec.layers).rev() {
        // Rectifier: pass gradient where the output was positive.
        for (gv, &h) in gfeat.iter_mut().zip(&fwd.acts[l + 1]) {
            if h <= 0.0 {
                *gv = 0.0;
            }
        }
        let (wb, bb) = (&layout[2 * l], &layout[2 * l + 1]);
        let cin = spec.layer_in(l);
        let mut gin = if l > 0 { vec![0.0; cin * k * k] } else { Vec::new() };
        let (head, tail) = grad.split_at_mut(bb.offset);
        conv_backward(
            &params[wb.range()],
            &fwd.acts[l],
            &gfeat,
            cin,
            spec.channels,
            k,
            spec.kernel,
            &mut head[wb.range()],
            &mut tail[..bb.len()],
            (l > 0).then_some(gin.as_mut_slice()),
        );
        gfeat = gin;
    }
}

/// Single-sample form of `backward_batch_into`.
pub fn backward_into(
    spec: &NetSpec,
    params: &[f64],
    fwd: &Forward,
    upstream: &[f64],
    grad: &mut [f64],
) -> Result<()> {
    backward_batch_into(
        spec,
        params,
        std::slice::from_ref(fwd),
        &[upstream.to_vec()],
        grad,
    )
}

/// Gradient of `upstream . output` with respect to the parameters.
pub fn backward(spec: &NetSpec, params: &[f64], fwd: &Forward, upstream: &[f64]) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; spec.param_count()];
    backward_into(spec, params, fwd, upstream, &mut grad)?;
    Ok(grad)
}

/// Softmax over unmasked slots; masked slots get exactly 0.
pub fn softmax_policy(logits: &[f64], mask: &[bool]) -> Vec<f64> {
    let max = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&l, _)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = logits
        .iter()
        .zip(mask)
        .map(|(&l, &m)| if m { (l - max).exp() } else { 0.0 })
        .collect();
    let z: f64 = p.iter().sum();
    if z > 0.0 {
        p.iter_mut().for_each(|x| *x /= z);
    }
    p
}

/// Shannon entropy (nats) of a probability vector.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(len: usize, lr: f64) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One bias-corrected descent step along `grad`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter length");
        assert_eq!(grad.len(), self.m.len(), "gradient length");
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let mhat = self.m[i] / c1;
            let vhat = self.v[i] / c2;
            params[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
    }
}
