//! Self-describing binary checkpoints.
//!
//! Layout: magic, format version, architecture hash, ruleset hash, training
//! step, parameter count, architecture JSON, then little-endian `f64`
//! parameters. Loading refuses any mismatch.

use std::io::{Read, Write};
use std::path::Path;

use super::net::{Arch, Network};
use super::AgentError;
use crate::game::Ruleset;

const MAGIC: &[u8; 8] = b"ARENACKP";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub network: Network,
    pub step: u64,
}

impl Checkpoint {
    pub fn new(network: Network, step: u64) -> Checkpoint {
        Checkpoint { network, step }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let arch_json = serde_json::to_vec(&self.network.arch).expect("arch serializes");
        let mut out = Vec::with_capacity(128 + arch_json.len() + 8 * self.network.params.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(self.network.arch.hash().as_bytes());
        out.extend_from_slice(Ruleset::bundled().hash().as_bytes());
        out.extend_from_slice(&self.step.to_le_bytes());
        out.extend_from_slice(&(self.network.params.len() as u64).to_le_bytes());
        out.extend_from_slice(&(arch_json.len() as u32).to_le_bytes());
        out.extend_from_slice(&arch_json);
        for p in &self.network.params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    /// Parse a checkpoint. `expected` rejects files with a different
    /// architecture.
    pub fn from_bytes(bytes: &[u8], expected: Option<&Arch>) -> Result<Checkpoint, AgentError> {
        let mut r = bytes;
        let bad = |m: &str| AgentError::Checkpoint(m.to_string());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
        if &magic != MAGIC {
            return Err(bad("not a checkpoint file"));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(AgentError::Checkpoint(format!("unsupported format version {version}")));
        }
        let arch_hash = read_str(&mut r, 64)?;
        let rules_hash = read_str(&mut r, 64)?;
        if rules_hash != Ruleset::bundled().hash() {
            return Err(bad("ruleset hash differs from the bundled rules"));
        }
        let step = read_u64(&mut r)?;
        let n = read_u64(&mut r)? as usize;
        let len = read_u32(&mut r)? as usize;
        if r.len() < len {
            return Err(bad("truncated architecture descriptor"));
        }
        let arch: Arch = serde_json::from_slice(&r[..len])
            .map_err(|e| AgentError::Checkpoint(format!("architecture descriptor: {e}")))?;
        r = &r[len..];
        if arch.hash() != arch_hash {
            return Err(bad("architecture hash does not match descriptor"));
        }
        if let Some(exp) = expected {
            if exp != &arch {
                return Err(AgentError::Arch(format!("checkpoint holds {arch:?}, expected {exp:?}")));
            }
        }
        if n != arch.n_params() {
            return Err(bad("parameter count does not match the architecture"));
        }
        if r.len() != 8 * n {
            return Err(AgentError::Checkpoint(format!("expected {} payload bytes, found {}", 8 * n, r.len())));
        }
        let params = r.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        Ok(Checkpoint { network: Network { arch, params }, step })
    }

    pub fn save(&self, path: &Path) -> Result<(), AgentError> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path, expected: Option<&Arch>) -> Result<Checkpoint, AgentError> {
        Checkpoint::from_bytes(&std::fs::read(path)?, expected)
    }
}

fn read_u32(r: &mut &[u8]) -> Result<u32, AgentError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| AgentError::Checkpoint("truncated header".into()))?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut &[u8]) -> Result<u64, AgentError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|_| AgentError::Checkpoint("truncated header".into()))?;
    Ok(u64::from_le_bytes(b))
}

fn read_str(r: &mut &[u8], n: usize) -> Result<String, AgentError> {
    if r.len() < n {
        return Err(AgentError::Checkpoint("truncated header".into()));
    }
    let s = String::from_utf8(r[..n].to_vec()).map_err(|_| AgentError::Checkpoint("corrupt hash field".into()))?;
    *r = &r[n..];
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ckpt() -> Checkpoint {
        Checkpoint::new(Network::init(Arch::actor(1, 4, 4), 3), 17)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let c = ckpt();
        let back = Checkpoint::from_bytes(&c.to_bytes(), Some(&c.network.arch)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn architecture_mismatch_is_refused() {
        let c = ckpt();
        let other = Arch::actor(1, 4, 8);
        assert!(matches!(Checkpoint::from_bytes(&c.to_bytes(), Some(&other)), Err(AgentError::Arch(_))));
    }

    #[test]
    fn corruption_is_refused() {
        let mut b = ckpt().to_bytes();
        b.truncate(b.len() - 3);
        assert!(Checkpoint::from_bytes(&b, None).is_err());
        let mut b = ckpt().to_bytes();
        b[0] = b'X';
        assert!(Checkpoint::from_bytes(&b, None).is_err());
        let mut b = ckpt().to_bytes();
        b[20] ^= 1;
        assert!(Checkpoint::from_bytes(&b, None).is_err());
    }
}
