//! Versioned little-endian binary cache container.
//!
//! Layout: 8 magic bytes, a version byte, a payload-kind byte, a
//! length-prefixed metadata string (provenance), then the kind-specific
//! payload. Round-trips are bit-exact.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::embedding::EmbeddingMatrix;
use crate::error::{CoreError, Result};
use crate::fastica::{IcaConfig, IcaResult, Nonlinearity};
use crate::graph::{SpanningTree, TreeEdge};
use crate::hoc::HocMatrix;
use crate::intrusion::{ConsistencyScore, SigmaOrder};
use crate::whitening::WhiteningModel;

pub const MAGIC: &[u8; 8] = b"ICMPCHE\0";
pub const VERSION: u8 = 1;

/// Payload kind tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Kind {
    Embedding = 1,
    Whitening = 2,
    Ica = 3,
    Hoc = 4,
    Intrusion = 5,
    Tree = 6,
}

impl Kind {
    fn from_byte(b: u8) -> Option<Self> {
        match b {
            1 => Some(Kind::Embedding),
            2 => Some(Kind::Whitening),
            3 => Some(Kind::Ica),
            4 => Some(Kind::Hoc),
            5 => Some(Kind::Intrusion),
            6 => Some(Kind::Tree),
            _ => None,
        }
    }
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn i8(&mut self, v: i8) {
        self.buf.push(v as u8);
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        let bytes = s.as_bytes();
        self.buf.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
        self.buf.extend_from_slice(bytes);
    }
    fn f64_slice(&mut self, vs: impl IntoIterator<Item = f64>) {
        for v in vs {
            self.f64(v);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(CoreError::UnexpectedEndOfCache);
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn i8(&mut self) -> Result<i8> {
        Ok(self.take(1)?[0] as i8)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn usize(&mut self) -> Result<usize> {
        Ok(self.u64()? as usize)
    }
    fn str(&mut self) -> Result<String> {
        let len = u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| CoreError::UnexpectedEndOfCache)
    }
    fn f64_vec(&mut self, n: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.f64()?);
        }
        Ok(out)
    }
    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(CoreError::TrailingCacheBytes);
        }
        Ok(())
    }
}

fn write_container(path: &Path, kind: Kind, meta: &str, payload: Vec<u8>) -> Result<()> {
    let mut out = Vec::with_capacity(payload.len() + 64);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(kind as u8);
    out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    out.extend_from_slice(meta.as_bytes());
    out.extend_from_slice(&payload);
    fs::write(path, out)?;
    Ok(())
}

fn read_container(path: &Path, expected: Kind) -> Result<(String, Vec<u8>)> {
    let data = fs::read(path)?;
    let mut r = Reader::new(&data);
    let magic = r.take(MAGIC.len())?;
    if magic != MAGIC {
        return Err(CoreError::CacheMagic);
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(CoreError::CacheVersion {
            found: version,
            expected: VERSION,
        });
    }
    let kind = r.u8()?;
    if Kind::from_byte(kind) != Some(expected) {
        return Err(CoreError::CacheKind {
            found: kind,
            expected: expected as u8,
        });
    }
    let meta = r.str()?;
    let payload = data[r.pos..].to_vec();
    Ok((meta, payload))
}

/// Reads only the metadata string of a cache file.
pub fn read_meta(path: &Path, expected: Kind) -> Result<String> {
    read_container(path, expected).map(|(meta, _)| meta)
}

// ---------------------------------------------------------------- embedding

pub fn save_embedding(m: &EmbeddingMatrix, path: &Path, meta: &str) -> Result<()> {
    let mut w = Writer::default();
    w.u64(m.n() as u64);
    w.u64(m.d() as u64);
    w.f64_slice(m.vectors().iter().copied());
    for word in m.vocab() {
        w.str(word);
    }
    for &c in m.freq() {
        w.u64(c);
    }
    write_container(path, Kind::Embedding, meta, w.buf)
}

pub fn load_embedding(path: &Path) -> Result<EmbeddingMatrix> {
    let (_, payload) = read_container(path, Kind::Embedding)?;
    let mut r = Reader::new(&payload);
    let n = r.usize()?;
    let d = r.usize()?;
    let data = r.f64_vec(n * d)?;
    let mut vocab = Vec::with_capacity(n);
    for _ in 0..n {
        vocab.push(r.str()?);
    }
    let mut freq = Vec::with_capacity(n);
    for _ in 0..n {
        freq.push(r.u64()?);
    }
    r.finish()?;
    let vectors =
        Array2::from_shape_vec((n, d), data).map_err(|_| CoreError::UnexpectedEndOfCache)?;
    EmbeddingMatrix::new(vectors, vocab, freq)
}

// ---------------------------------------------------------------- whitening

pub fn save_whitening(m: &WhiteningModel, path: &Path, meta: &str) -> Result<()> {
    let mut w = Writer::default();
    w.u64(m.input_dim() as u64);
    w.u64(m.output_dim() as u64);
    w.f64_slice(m.mean.iter().copied());
    w.f64_slice(m.map.iter().copied());
    w.f64_slice(m.basis.iter().copied());
    w.f64_slice(m.eigenvalues.iter().copied());
    w.u64(m.dropped as u64);
    write_container(path, Kind::Whitening, meta, w.buf)
}

pub fn load_whitening(path: &Path) -> Result<WhiteningModel> {
    let (_, payload) = read_container(path, Kind::Whitening)?;
    let mut r = Reader::new(&payload);
    let d = r.usize()?;
    let k = r.usize()?;
    let mean = Array1::from_vec(r.f64_vec(d)?);
    let map = Array2::from_shape_vec((d, k), r.f64_vec(d * k)?)
        .map_err(|_| CoreError::UnexpectedEndOfCache)?;
    let basis = Array2::from_shape_vec((d, k), r.f64_vec(d * k)?)
        .map_err(|_| CoreError::UnexpectedEndOfCache)?;
    let eigenvalues = Array1::from_vec(r.f64_vec(k)?);
    let dropped = r.usize()?;
    r.finish()?;
    Ok(WhiteningModel {
        mean,
        map,
        basis,
        eigenvalues,
        dropped,
    })
}

// ---------------------------------------------------------------- ica

pub fn save_ica(res: &IcaResult, cfg: &IcaConfig, path: &Path, meta: &str) -> Result<()> {
    let mut w = Writer::default();
    let (n, d) = (res.components.nrows(), res.components.ncols());
    w.u64(n as u64);
    w.u64(d as u64);
    w.f64_slice(res.rotation.iter().copied());
    w.f64_slice(res.components.iter().copied());
    w.f64_slice(res.skewness.iter().copied());
    for &o in &res.order {
        w.u64(o as u64);
    }
    for &s in &res.signs {
        w.i8(s);
    }
    w.u64(res.iterations as u64);
    w.u8(res.converged as u8);
    match cfg.nonlinearity {
        Nonlinearity::LogCosh { alpha } => {
            w.u8(0);
            w.f64(alpha);
        }
        Nonlinearity::Cube => {
            w.u8(1);
            w.f64(0.0);
        }
    }
    w.u64(cfg.max_iter as u64);
    w.f64(cfg.tol);
    w.u64(cfg.seed);
    write_container(path, Kind::Ica, meta, w.buf)
}

pub fn load_ica(path: &Path) -> Result<(IcaResult, IcaConfig)> {
    let (_, payload) = read_container(path, Kind::Ica)?;
    let mut r = Reader::new(&payload);
    let n = r.usize()?;
    let d = r.usize()?;
    let rotation = Array2::from_shape_vec((d, d), r.f64_vec(d * d)?)
        .map_err(|_| CoreError::UnexpectedEndOfCache)?;
    let components = Array2::from_shape_vec((n, d), r.f64_vec(n * d)?)
        .map_err(|_| CoreError::UnexpectedEndOfCache)?;
    let skewness = Array1::from_vec(r.f64_vec(d)?);
    let mut order = Vec::with_capacity(d);
    for _ in 0..d {
        order.push(r.usize()?);
    }
    let mut signs = Vec::with_capacity(d);
    for _ in 0..d {
        signs.push(r.i8()?);
    }
    let iterations = r.usize()?;
    let converged = r.u8()? != 0;
    let nl = r.u8()?;
    let alpha = r.f64()?;
    let nonlinearity = match nl {
        0 => Nonlinearity::LogCosh { alpha },
        _ => Nonlinearity::Cube,
    };
    let max_iter = r.usize()?;
    let tol = r.f64()?;
    let seed = r.u64()?;
    r.finish()?;
    Ok((
        IcaResult {
            rotation,
            components,
            skewness,
            order,
            signs,
            iterations,
            converged,
        },
        IcaConfig {
            nonlinearity,
            max_iter,
            tol,
            seed,
        },
    ))
}

// ---------------------------------------------------------------- hoc

pub fn save_hoc(h: &HocMatrix, path: &Path, meta: &str) -> Result<()> {
    let mut w = Writer::default();
    w.u64(h.values.nrows() as u64);
    w.f64_slice(h.values.iter().copied());
    w.u8(h.diag_is_fourth_moment as u8);
    write_container(path, Kind::Hoc, meta, w.buf)
}

pub fn load_hoc(path: &Path) -> Result<HocMatrix> {
    let (_, payload) = read_container(path, Kind::Hoc)?;
    let mut r = Reader::new(&payload);
    let d = r.usize()?;
    let values = Array2::from_shape_vec((d, d), r.f64_vec(d * d)?)
        .map_err(|_| CoreError::UnexpectedEndOfCache)?;
    let diag_is_fourth_moment = r.u8()? != 0;
    r.finish()?;
    Ok(HocMatrix {
        values,
        diag_is_fourth_moment,
    })
}

// ---------------------------------------------------------------- intrusion

pub fn save_intrusion(
    scores: &[ConsistencyScore],
    sigma: &SigmaOrder,
    path: &Path,
    meta: &str,
) -> Result<()> {
    let mut w = Writer::default();
    w.u64(scores.len() as u64);
    for s in scores {
        w.u64(s.axis as u64);
        w.f64(s.score);
        w.f64(s.intra);
        w.f64(s.inter);
        w.u64(s.intruder_sample.len() as u64);
        w.u64(s.seed);
    }
    for &a in &sigma.sigma {
        w.u64(a as u64);
    }
    write_container(path, Kind::Intrusion, meta, w.buf)
}

pub fn load_intrusion(path: &Path) -> Result<(Vec<ConsistencyScore>, SigmaOrder)> {
    let (_, payload) = read_container(path, Kind::Intrusion)?;
    let mut r = Reader::new(&payload);
    let d = r.usize()?;
    let mut scores = Vec::with_capacity(d);
    for _ in 0..d {
        let axis = r.usize()?;
        let score = r.f64()?;
        let intra = r.f64()?;
        let inter = r.f64()?;
        let l = r.usize()?;
        let seed = r.u64()?;
        scores.push(ConsistencyScore {
            axis,
            score,
            intra,
            inter,
            // Samples are not persisted; only their size is recorded.
            intruder_sample: Vec::with_capacity(l),
            seed,
        });
    }
    let mut sigma = Vec::with_capacity(d);
    for _ in 0..d {
        sigma.push(r.usize()?);
    }
    r.finish()?;
    Ok((scores, SigmaOrder { sigma }))
}

// ---------------------------------------------------------------- tree

pub fn save_tree(t: &SpanningTree, path: &Path, meta: &str) -> Result<()> {
    let mut w = Writer::default();
    w.u64(t.nodes.len() as u64);
    for &n in &t.nodes {
        w.u64(n as u64);
    }
    w.u64(t.edges.len() as u64);
    for e in &t.edges {
        w.u64(e.a as u64);
        w.u64(e.b as u64);
        w.f64(e.weight);
    }
    write_container(path, Kind::Tree, meta, w.buf)
}

pub fn load_tree(path: &Path) -> Result<SpanningTree> {
    let (_, payload) = read_container(path, Kind::Tree)?;
    let mut r = Reader::new(&payload);
    let n = r.usize()?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        nodes.push(r.usize()?);
    }
    let m = r.usize()?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        edges.push(TreeEdge {
            a: r.usize()?,
            b: r.usize()?,
            weight: r.f64()?,
        });
    }
    r.finish()?;
    Ok(SpanningTree { nodes, edges })
}
