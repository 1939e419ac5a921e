//! Binary artifact container: magic, version, key=value header, named f32
//! blocks and a trailing FNV-1a checksum.

use std::fs;
use std::hash::Hasher;
use std::path::Path;

use fnv::FnvHasher;

use crate::error::{Error, Result};
use crate::ndmath::{Matrix, Parameters};

pub const MAGIC: &[u8; 4] = b"HS2S";
pub const FORMAT_VERSION: u32 = 1;
const MANIFEST_KEY: &str = "manifest";

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub name: String,
    pub dims: Vec<usize>,
    pub values: Vec<f32>,
}

impl Block {
    pub fn new(name: impl Into<String>, dims: Vec<usize>, values: &[f64]) -> Self {
        Self {
            name: name.into(),
            dims,
            values: values.iter().map(|&v| v as f32).collect(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        match self.dims[..] {
            [r, c] => Matrix::from_vec(r, c, self.to_f64()),
            _ => Err(Error::Structure(format!("block {} is not rank 2", self.name))),
        }
    }
}

/// Header entries in insertion order plus named blocks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Container {
    pub header: Vec<(String, String)>,
    pub blocks: Vec<Block>,
}

fn checksum(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Corruption("unexpected end of data".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u64(&mut self) -> Result<u64> {
        let b = self.take(8)?;
        let mut a = [0u8; 8];
        a.copy_from_slice(b);
        Ok(u64::from_le_bytes(a))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::Corruption("invalid UTF-8".into()))
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

impl Container {
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.header.iter_mut().find(|(k, _)| *k == key) {
            Some(entry) => entry.1 = value,
            None => self.header.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Structure(format!("header lacks `{key}`")))
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.require(key)?;
        v.parse()
            .map_err(|_| Error::Structure(format!("header `{key}` has invalid value {v:?}")))
    }

    pub fn block(&self, name: &str) -> Result<&Block> {
        self.blocks
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| Error::Structure(format!("missing block `{name}`")))
    }

    pub fn has_block(&self, name: &str) -> bool {
        self.blocks.iter().any(|b| b.name == name)
    }

    /// Blocks whose name starts with `prefix`.
    pub fn section<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Block> + 'a {
        self.blocks.iter().filter(move |b| b.name.starts_with(prefix))
    }

    pub fn push_block(&mut self, block: Block) {
        self.blocks.push(block);
    }

    /// Adds every tensor of `params` under `prefix`.
    pub fn push_params<P: Parameters>(&mut self, prefix: &str, params: &P) {
        let mut list = Vec::new();
        params.tensors(prefix, &mut list);
        for t in list {
            self.blocks.push(Block::new(t.name, t.dims, t.values));
        }
    }

    /// Overwrites `params` from blocks under `prefix`, checking names and dims.
    pub fn read_params<P: Parameters>(&self, prefix: &str, params: &mut P) -> Result<()> {
        let mut list = Vec::new();
        params.tensors_mut(prefix, &mut list);
        for t in list {
            let b = self.block(&t.name)?;
            if b.dims != t.dims {
                return Err(Error::Structure(format!(
                    "block `{}` has dims {:?}, expected {:?}",
                    t.name, b.dims, t.dims
                )));
            }
            for (dst, &src) in t.values.iter_mut().zip(&b.values) {
                *dst = src as f64;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut header = String::new();
        let manifest: Vec<&str> = self.blocks.iter().map(|b| b.name.as_str()).collect();
        for (k, v) in self
            .header
            .iter()
            .filter(|(k, _)| k != MANIFEST_KEY)
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .chain([(MANIFEST_KEY, manifest.join(",").as_str())])
        {
            header.push_str(k);
            header.push('=');
            header.push_str(v);
            header.push('\n');
        }
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        put_str(&mut out, &header);
        out.extend_from_slice(&(self.blocks.len() as u32).to_le_bytes());
        for b in &self.blocks {
            put_str(&mut out, &b.name);
            out.extend_from_slice(&(b.dims.len() as u32).to_le_bytes());
            for &d in &b.dims {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for v in &b.values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let sum = checksum(&out);
        out.extend_from_slice(&sum.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..4] != MAGIC {
            return Err(Error::Corruption("not an HS2S container".into()));
        }
        let version = u32::from_le_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]);
        if version != FORMAT_VERSION {
            return Err(Error::Version {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        if bytes.len() < 16 {
            return Err(Error::Corruption("file too short".into()));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 8);
        let mut stored = [0u8; 8];
        stored.copy_from_slice(tail);
        if checksum(body) != u64::from_le_bytes(stored) {
            return Err(Error::Corruption("checksum mismatch".into()));
        }
        let mut r = Reader { bytes: body, pos: 8 };
        let text = r.string()?;
        let mut header = Vec::new();
        for line in text.lines() {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Structure(format!("header line without `=`: {line:?}")))?;
            header.push((k.to_string(), v.to_string()));
        }
        let count = r.u32()? as usize;
        let mut blocks = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let name = r.string()?;
            let rank = r.u32()? as usize;
            let mut dims = Vec::with_capacity(rank.min(8));
            for _ in 0..rank {
                dims.push(r.u64()? as usize);
            }
            let len = dims
                .iter()
                .try_fold(1usize, |a, &d| a.checked_mul(d))
                .and_then(|n| n.checked_mul(4))
                .ok_or_else(|| Error::Corruption(format!("block `{name}` size overflows")))?;
            let raw = r.take(len)?;
            let values = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            blocks.push(Block { name, dims, values });
        }
        if r.pos != body.len() {
            return Err(Error::Corruption("trailing bytes after the last block".into()));
        }
        let container = Self { header, blocks };
        container.check_manifest()?;
        Ok(container)
    }

    fn check_manifest(&self) -> Result<()> {
        let manifest = self.require(MANIFEST_KEY)?;
        let names: Vec<&str> = manifest.split(',').filter(|s| !s.is_empty()).collect();
        for name in &names {
            let n = self.blocks.iter().filter(|b| b.name == *name).count();
            if n != 1 {
                return Err(Error::Structure(format!("manifest block `{name}` present {n} times")));
            }
        }
        if let Some(b) = self.blocks.iter().find(|b| !names.contains(&b.name.as_str())) {
            return Err(Error::Structure(format!("block `{}` not in manifest", b.name)));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

/// Comma-joined shortest round-trip decimal text.
pub fn join_f64(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

pub fn split_f64(s: &str) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.parse().map_err(|_| Error::Structure(format!("invalid number {t:?}"))))
        .collect()
}
