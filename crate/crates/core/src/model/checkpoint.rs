//! Binary checkpoint format.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic "BGCK" | version u32 | seed u64 | feature_width u64 | latent_dim u64
//! | encoder_enabled u8
//! | for encoder, generator, discriminator:
//!     layer_count u32, then per layer: fan_in u64, fan_out u64, activation u8
//! | parameters: per network, per layer, weights (row-major) then bias, f64
//! ```
//!
//! Identical models serialise to identical bytes, so the SHA-256 of the
//! bytes identifies a trained model.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{BiGanModel, ModelShape};
use crate::data::dataset::ByteReader;
use crate::error::{Error, Result};
use crate::tensor::{Activation, DenseLayer, Matrix, Network};

const MAGIC: &[u8; 4] = b"BGCK";
pub const CHECKPOINT_VERSION: u32 = 1;

fn bad(msg: impl Into<String>) -> Error {
    Error::Format {
        kind: "checkpoint",
        msg: msg.into(),
    }
}

impl BiGanModel {
    fn networks(&self) -> [&Network; 3] {
        [&self.encoder, &self.generator, &self.discriminator]
    }

    pub fn to_checkpoint_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(64 + 8 * self.param_count());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        buf.extend_from_slice(&self.seed.to_le_bytes());
        buf.extend_from_slice(&(self.shape.feature_width as u64).to_le_bytes());
        buf.extend_from_slice(&(self.shape.latent_dim as u64).to_le_bytes());
        buf.push(u8::from(self.encoder_enabled));
        for net in self.networks() {
            buf.extend_from_slice(&(net.layers().len() as u32).to_le_bytes());
            for layer in net.layers() {
                buf.extend_from_slice(&(layer.fan_in() as u64).to_le_bytes());
                buf.extend_from_slice(&(layer.fan_out() as u64).to_le_bytes());
                buf.push(layer.activation.code());
            }
        }
        for net in self.networks() {
            for slice in net.param_slices() {
                for v in slice {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        buf
    }

    pub fn from_checkpoint_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        let truncated = || bad("truncated");
        if r.take(4).ok_or_else(truncated)? != MAGIC {
            return Err(bad("bad magic"));
        }
        let version = r.u32().ok_or_else(truncated)?;
        if version != CHECKPOINT_VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let seed = r.u64().ok_or_else(truncated)?;
        let feature_width = r.u64().ok_or_else(truncated)? as usize;
        let latent_dim = r.u64().ok_or_else(truncated)? as usize;
        let encoder_enabled = match r.take(1).ok_or_else(truncated)?[0] {
            0 => false,
            1 => true,
            other => return Err(bad(format!("bad encoder flag {other}"))),
        };

        let mut shapes: Vec<Vec<(usize, usize, Activation)>> = Vec::with_capacity(3);
        for _ in 0..3 {
            let count = r.u32().ok_or_else(truncated)? as usize;
            let mut layers = Vec::with_capacity(count.min(64));
            for _ in 0..count {
                let fan_in = r.u64().ok_or_else(truncated)? as usize;
                let fan_out = r.u64().ok_or_else(truncated)? as usize;
                let code = r.take(1).ok_or_else(truncated)?[0];
                let act = Activation::from_code(code)
                    .ok_or_else(|| bad(format!("bad activation code {code}")))?;
                layers.push((fan_in, fan_out, act));
            }
            shapes.push(layers);
        }

        let mut nets = Vec::with_capacity(3);
        for layers in &shapes {
            let mut built = Vec::with_capacity(layers.len());
            for &(fan_in, fan_out, act) in layers {
                let n = fan_in
                    .checked_mul(fan_out)
                    .ok_or_else(|| bad("implausible layer size"))?;
                let mut w = Vec::with_capacity(n.min(1 << 24));
                for _ in 0..n {
                    w.push(r.f64().ok_or_else(truncated)?);
                }
                let mut b = Vec::with_capacity(fan_out.min(1 << 24));
                for _ in 0..fan_out {
                    b.push(r.f64().ok_or_else(truncated)?);
                }
                built.push(DenseLayer {
                    weights: Matrix::new(fan_in, fan_out, w)?,
                    bias: b,
                    activation: act,
                });
            }
            nets.push(Network::new(built)?);
        }
        if !r.is_empty() {
            return Err(bad("trailing bytes"));
        }
        let discriminator = nets.pop().unwrap();
        let generator = nets.pop().unwrap();
        let encoder = nets.pop().unwrap();

        let hidden_widths: Vec<usize> = encoder
            .layers()
            .iter()
            .skip(1)
            .map(DenseLayer::fan_in)
            .collect();
        if discriminator.layers().len() != 2 {
            return Err(bad("discriminator must have one hidden layer"));
        }
        let shape = ModelShape {
            feature_width,
            latent_dim,
            hidden_widths,
            discriminator_hidden: discriminator.layers()[0].fan_out(),
        };
        let consistent = encoder.input_width() == feature_width
            && encoder.output_width() == latent_dim
            && generator.input_width() == latent_dim
            && generator.output_width() == feature_width
            && discriminator.input_width() == shape.pair_width()
            && discriminator.output_width() == 1;
        if !consistent {
            return Err(bad("network widths disagree with the header"));
        }
        Ok(Self {
            encoder,
            generator,
            discriminator,
            shape,
            seed,
            encoder_enabled,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_checkpoint_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_checkpoint_bytes(&fs::read(path)?)
    }

    /// Hex SHA-256 of the checkpoint bytes.
    pub fn checkpoint_hash(&self) -> String {
        sha256_hex(&self.to_checkpoint_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn save_load_preserves_forward_outputs() {
        let mut shape = ModelShape::new(20, 4);
        shape.hidden_widths = vec![12, 8, 6];
        shape.discriminator_hidden = 9;
        let mut model = BiGanModel::init(shape, 77).unwrap();
        model.encoder_enabled = false;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        model.save(&path).unwrap();
        let loaded = BiGanModel::load(&path).unwrap();
        assert_eq!(loaded, model);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = crate::model::sample_noise(6, 4, &mut rng);
        let x = model.generate(&z).unwrap();
        assert_eq!(loaded.generate(&z).unwrap(), x);
        assert_eq!(
            loaded.discriminate(&loaded.real_pair(&x).unwrap()).unwrap(),
            model.discriminate(&model.real_pair(&x).unwrap()).unwrap()
        );
        assert_eq!(loaded.checkpoint_hash(), model.checkpoint_hash());
    }

    #[test]
    fn corrupted_bytes_are_rejected() {
        let model = BiGanModel::init(ModelShape::new(8, 2), 1).unwrap();
        let bytes = model.to_checkpoint_bytes();
        assert!(BiGanModel::from_checkpoint_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(BiGanModel::from_checkpoint_bytes(&extra).is_err());
        let mut magic = bytes;
        magic[0] = b'X';
        assert!(BiGanModel::from_checkpoint_bytes(&magic).is_err());
    }

    #[test]
    fn hash_tracks_parameters() {
        let a = BiGanModel::init(ModelShape::default(), 1).unwrap();
        let mut b = a.clone();
        assert_eq!(a.checkpoint_hash(), b.checkpoint_hash());
        b.discriminator.layers_mut()[0].bias[0] = 1e-9;
        assert_ne!(a.checkpoint_hash(), b.checkpoint_hash());
    }
}
