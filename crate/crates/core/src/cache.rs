//! Optional on-disk cache for expensive artifacts (q-expansion lattices and
//! per-space job results), keyed by content: kind, level, canonical
//! character key, precision and engine version. Payloads carry a checksum
//! that is verified on read; writes are atomic (write to a temporary file,
//! then rename). A version bump invalidates everything by key mismatch.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};

fn cache_dir() -> &'static Mutex<Option<PathBuf>> {
    static DIR: OnceLock<Mutex<Option<PathBuf>>> = OnceLock::new();
    DIR.get_or_init(|| Mutex::new(None))
}

/// Set (or clear) the cache directory. The environment variable
/// WEIGHT1_CACHE_DIR is read by the CLI and passed through here.
pub fn set_dir(path: Option<&Path>) {
    *cache_dir().lock().unwrap() = path.map(|p| p.to_path_buf());
}

pub fn dir() -> Option<PathBuf> {
    cache_dir().lock().unwrap().clone()
}

/// 128-bit FNV-1a, as two independent 64-bit passes.
fn checksum(data: &[u8]) -> String {
    let mut h1: u64 = 0xcbf29ce484222325;
    let mut h2: u64 = 0x9e3779b97f4a7c15;
    for &b in data {
        h1 ^= b as u64;
        h1 = h1.wrapping_mul(0x100000001b3);
        h2 ^= (b as u64).rotate_left(17);
        h2 = h2.wrapping_mul(0x100000001b3).rotate_left(5);
    }
    format!("{:016x}{:016x}", h1, h2)
}

fn key_path(dir: &Path, kind: &str, key: &str) -> PathBuf {
    // keys are filesystem-safe by construction (alphanumeric, '_', '-')
    dir.join(kind).join(format!("{}.json", key))
}

pub fn content_key(level: u64, chi_key: &str, precision: i64) -> String {
    format!("{}_{}_p{}_v{}", level, chi_key, precision, crate::ENGINE_VERSION)
}

/// Fetch a payload; returns None on a miss or a checksum mismatch (a
/// corrupted entry is removed so the next run rebuilds it).
pub fn get(kind: &str, key: &str) -> Option<Vec<u8>> {
    let dir = dir()?;
    let path = key_path(&dir, kind, key);
    let raw = fs::read(&path).ok()?;
    let text = String::from_utf8(raw).ok()?;
    let (sum_line, payload) = text.split_once('\n')?;
    if checksum(payload.as_bytes()) != sum_line {
        let _ = fs::remove_file(&path);
        return None;
    }
    Some(payload.as_bytes().to_vec())
}

/// Store a payload atomically.
pub fn put(kind: &str, key: &str, payload: &[u8]) {
    let Some(dir) = dir() else { return };
    let path = key_path(&dir, kind, key);
    if let Some(parent) = path.parent() {
        let _ = fs::create_dir_all(parent);
    }
    let mut data = checksum(payload).into_bytes();
    data.push(b'\n');
    data.extend_from_slice(payload);
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    if fs::write(&tmp, &data).is_ok() {
        let _ = fs::rename(&tmp, &path);
    }
}

/// Verify every entry under the cache directory; returns (ok, corrupt)
/// counts, removing corrupt entries.
pub fn verify_all() -> (usize, usize) {
    let Some(dir) = dir() else { return (0, 0) };
    let mut ok = 0;
    let mut bad = 0;
    let mut stack = vec![dir];
    while let Some(d) = stack.pop() {
        let Ok(entries) = fs::read_dir(&d) else { continue };
        for e in entries.flatten() {
            let path = e.path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            if path.extension().map(|x| x == "json").unwrap_or(false) {
                let good = fs::read(&path)
                    .ok()
                    .and_then(|raw| String::from_utf8(raw).ok())
                    .and_then(|text| {
                        let (sum, payload) = text.split_once('\n')?;
                        Some(checksum(payload.as_bytes()) == sum)
                    })
                    .unwrap_or(false);
                if good {
                    ok += 1;
                } else {
                    bad += 1;
                    let _ = fs::remove_file(&path);
                }
            }
        }
    }
    (ok, bad)
}

/// Remove every cache entry.
pub fn evict_all() -> usize {
    let Some(dir) = dir() else { return 0 };
    let mut removed = 0;
    let mut stack = vec![dir];
    while let Some(d) = stack.pop() {
        let Ok(entries) = fs::read_dir(&d) else { continue };
        for e in entries.flatten() {
            let path = e.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().map(|x| x == "json").unwrap_or(false) {
                if fs::remove_file(&path).is_ok() {
                    removed += 1;
                }
            }
        }
    }
    removed
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_corruption() {
        let tmp = std::env::temp_dir().join(format!("w1cache_test_{}", std::process::id()));
        set_dir(Some(&tmp));
        put("test", "k1", b"payload-data");
        assert_eq!(get("test", "k1").as_deref(), Some(b"payload-data".as_ref()));
        // corrupt the file
        let path = tmp.join("test").join("k1.json");
        std::fs::write(&path, b"deadbeef\npayload-data").unwrap();
        assert!(get("test", "k1").is_none());
        // corrupted entries are removed
        assert!(!path.exists());
        set_dir(None);
        let _ = std::fs::remove_dir_all(&tmp);
    }
}
