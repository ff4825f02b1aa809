//! Binary checkpoints for trained Siamese encoders.
//!
//! Layout, little endian: 8-byte magic, `u32` version, `u32` width count,
//! the widths (`d`, hidden widths..., embedding) as `u32`, `u64` parameter
//! count, then the parameters as `f64`.

use std::io::{Read, Write};

use im_meta::inference::{PairModel, SiameseModel};

use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"IMMSIAM\0";
const VERSION: u32 = 1;

pub fn save<W: Write>(mut out: W, model: &SiameseModel) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(model.dims().len() as u32).to_le_bytes())?;
    for &d in model.dims() {
        out.write_all(&(d as u32).to_le_bytes())?;
    }
    out.write_all(&(model.params().len() as u64).to_le_bytes())?;
    for p in model.params() {
        out.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn load<R: Read>(mut input: R) -> Result<SiameseModel> {
    if &read_array::<8, _>(&mut input)? != MAGIC {
        return Err(Error::Format("not a model checkpoint".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let count = u32::from_le_bytes(read_array(&mut input)?) as usize;
    if !(2..=64).contains(&count) {
        return Err(Error::Format(format!("implausible layer count {count}")));
    }
    let dims = (0..count)
        .map(|_| Ok(u32::from_le_bytes(read_array(&mut input)?) as usize))
        .collect::<Result<Vec<_>>>()?;
    let len = u64::from_le_bytes(read_array(&mut input)?) as usize;
    let mut params = Vec::with_capacity(len.min(1 << 24));
    for _ in 0..len {
        params.push(f64::from_le_bytes(read_array(&mut input)?));
    }
    Ok(SiameseModel::from_parts(dims, params)?)
}
