use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Writes `contents` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// File stem of a setting, e.g. `alpha60.000_theta-2.500`.
pub fn stem_for(alpha_deg: f64, theta_deg: f64) -> String {
    format!("alpha{:.3}_theta{:.3}", alpha_deg + 0.0, theta_deg + 0.0)
}

pub(crate) fn time_dir(out: &Path, t_ms: f64) -> PathBuf {
    out.join(format!("t{:.3}ms", t_ms + 0.0))
}

/// ChaCha stream of a setting: FNV-1a of its label, so streams do not depend on setting order.
pub fn setting_stream(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

pub(crate) fn rng_for(seed: u64, label: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(setting_stream(label));
    rng
}
