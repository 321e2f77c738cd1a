//! On-disk formats: the binary field checkpoint (magic "MACH", little-endian
//! throughout, bit-exact round trip) and the plain-text sectioned key-value
//! manifest used for run and sweep metadata.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;

/// Leading bytes of every checkpoint record.
pub const MAGIC: [u8; 4] = *b"MACH";

/// Checkpoint format version this build reads and writes.
pub const FORMAT_VERSION: u32 = 1;

/// One stored field with the run metadata needed to reinterpret it.
#[derive(Clone, Debug)]
pub struct FieldRecord {
    pub field: SpectralField,
    pub t: f64,
    pub eps: f64,
    pub nu: f64,
}

fn format_err(path: &Path, why: impl Into<String>) -> Error {
    Error::Format { path: path.display().to_string(), why: why.into() }
}

fn write_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_f64(w: &mut impl Write, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_u32(r: &mut impl Read, path: &Path, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf).map_err(|e| format_err(path, format!("truncated {what}: {e}")))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read, path: &Path, what: &str) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(|e| format_err(path, format!("truncated {what}: {e}")))?;
    Ok(f64::from_le_bytes(buf))
}

/// Append one record (header then coefficients, row-major wavevector order)
/// to an open writer.
pub fn encode_record(w: &mut impl Write, rec: &FieldRecord) -> Result<()> {
    let grid = rec.field.grid();
    w.write_all(&MAGIC)?;
    write_u32(w, FORMAT_VERSION)?;
    write_u32(w, grid.d() as u32)?;
    for _ in 0..grid.d() {
        write_u32(w, grid.n() as u32)?;
    }
    write_f64(w, grid.l())?;
    write_f64(w, rec.t)?;
    write_f64(w, rec.eps)?;
    write_f64(w, rec.nu)?;
    for c in rec.field.coeffs() {
        write_f64(w, c.re)?;
        write_f64(w, c.im)?;
    }
    Ok(())
}

/// Decode the next record, or None at a clean end of stream.
pub fn decode_record(r: &mut impl Read, path: &Path) -> Result<Option<FieldRecord>> {
    let mut magic = [0u8; 4];
    match r.read_exact(&mut magic) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(format_err(path, format!("unreadable header: {e}"))),
    }
    if magic != MAGIC {
        return Err(format_err(path, format!("bad magic {magic:?}, expected {MAGIC:?}")));
    }
    let version = read_u32(r, path, "version")?;
    if version != FORMAT_VERSION {
        return Err(format_err(path, format!("unsupported format version {version}")));
    }
    let d = read_u32(r, path, "dimension")? as usize;
    if !(2..=3).contains(&d) {
        return Err(format_err(path, format!("dimension {d} outside 2..=3")));
    }
    let mut n = 0usize;
    for axis in 0..d {
        let na = read_u32(r, path, "axis size")? as usize;
        if axis == 0 {
            n = na;
        } else if na != n {
            return Err(format_err(path, format!("anisotropic axes {n} vs {na} unsupported")));
        }
    }
    let l = read_f64(r, path, "box size")?;
    let t = read_f64(r, path, "time")?;
    let eps = read_f64(r, path, "eps")?;
    let nu = read_f64(r, path, "nu")?;
    let grid = Grid::new(d, n, l).map_err(|e| format_err(path, e.to_string()))?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.modes()];
    for c in coeffs.iter_mut() {
        c.re = read_f64(r, path, "coefficient")?;
        c.im = read_f64(r, path, "coefficient")?;
    }
    let field =
        SpectralField::from_coeffs(grid, coeffs).map_err(|e| format_err(path, e.to_string()))?;
    Ok(Some(FieldRecord { field, t, eps, nu }))
}

/// Write records to a file, one after another.
pub fn write_records(path: impl AsRef<Path>, records: &[FieldRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    for rec in records {
        encode_record(&mut w, rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Read every record in a file.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<FieldRecord>> {
    let path = path.as_ref();
    let mut r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    while let Some(rec) = decode_record(&mut r, path)? {
        out.push(rec);
    }
    Ok(out)
}

/// Ordered sectioned key-value document: `[section]` lines group `key = value`
/// pairs; `#` starts a comment. Order is preserved so emitted files are
/// deterministic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl Manifest {
    pub fn new() -> Manifest {
        Manifest::default()
    }

    /// Set `section.key`, creating the section as needed; an existing key is
    /// overwritten in place.
    pub fn set(&mut self, section: &str, key: &str, value: impl ToString) {
        let value = value.to_string();
        let sec = match self.sections.iter_mut().find(|(name, _)| name == section) {
            Some((_, entries)) => entries,
            None => {
                self.sections.push((section.to_string(), Vec::new()));
                &mut self.sections.last_mut().expect("just pushed").1
            }
        };
        match sec.iter_mut().find(|(k, _)| k == key) {
            Some((_, v)) => *v = value,
            None => sec.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .find(|(name, _)| name == section)
            .and_then(|(_, entries)| entries.iter().find(|(k, _)| k == key))
            .map(|(_, v)| v.as_str())
    }

    /// Value that must be present.
    pub fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key)
            .ok_or_else(|| Error::validation(format!("{section}.{key}"), "missing entry"))
    }

    pub fn require_f64(&self, section: &str, key: &str) -> Result<f64> {
        let raw = self.require(section, key)?;
        raw.parse().map_err(|_| {
            Error::validation(format!("{section}.{key}"), format!("not a number: {raw:?}"))
        })
    }

    pub fn require_usize(&self, section: &str, key: &str) -> Result<usize> {
        let raw = self.require(section, key)?;
        raw.parse().map_err(|_| {
            Error::validation(format!("{section}.{key}"), format!("not an integer: {raw:?}"))
        })
    }

    pub fn require_u64(&self, section: &str, key: &str) -> Result<u64> {
        let raw = self.require(section, key)?;
        raw.parse().map_err(|_| {
            Error::validation(format!("{section}.{key}"), format!("not an integer: {raw:?}"))
        })
    }

    pub fn require_bool(&self, section: &str, key: &str) -> Result<bool> {
        match self.require(section, key)? {
            "true" => Ok(true),
            "false" => Ok(false),
            raw => Err(Error::validation(
                format!("{section}.{key}"),
                format!("not true/false: {raw:?}"),
            )),
        }
    }

    /// Section names in document order.
    pub fn section_names(&self) -> impl Iterator<Item = &str> {
        self.sections.iter().map(|(name, _)| name.as_str())
    }

    /// Keys of one section in document order.
    pub fn keys<'a>(&'a self, section: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.sections
            .iter()
            .filter(move |(name, _)| name == section)
            .flat_map(|(_, entries)| entries.iter().map(|(k, _)| k.as_str()))
    }

    pub fn parse(text: &str) -> Result<Manifest> {
        let mut out = Manifest::new();
        let mut current: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return Err(Error::validation(
                        format!("line {}", lineno + 1),
                        format!("unterminated section header {raw:?}"),
                    ));
                };
                current = Some(name.trim().to_string());
                continue;
            }
            let Some(section) = current.as_deref() else {
                return Err(Error::validation(
                    format!("line {}", lineno + 1),
                    format!("entry {raw:?} before any [section] header"),
                ));
            };
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::validation(
                    format!("line {}", lineno + 1),
                    format!("expected key = value, got {raw:?}"),
                ));
            };
            let key = key.trim();
            if out.get(section, key).is_some() {
                return Err(Error::validation(
                    format!("{section}.{key}"),
                    format!("duplicate entry at line {}", lineno + 1),
                ));
            }
            out.set(section, key, value.trim());
        }
        Ok(out)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, entries) in &self.sections {
            out.push('[');
            out.push_str(name);
            out.push_str("]\n");
            for (k, v) in entries {
                out.push_str(k);
                out.push_str(" = ");
                out.push_str(v);
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.render())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Manifest> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Manifest::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bony::sample_pair;
    use std::path::PathBuf;

    fn scratch(name: &str) -> PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("lowmach-io-{}-{name}", std::process::id()));
        p
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let g = Grid::new(2, 16, 1.25).unwrap();
        let (z, _) = sample_pair(&g, 99);
        let rec = FieldRecord { field: z.clone(), t: 0.3, eps: 0.1, nu: 1.5 };
        let path = scratch("roundtrip.chk");
        write_records(&path, &[rec]).unwrap();
        let back = read_records(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(back.len(), 1);
        let r = &back[0];
        assert_eq!(r.t.to_bits(), 0.3f64.to_bits());
        assert_eq!(r.eps.to_bits(), 0.1f64.to_bits());
        assert_eq!(r.nu.to_bits(), 1.5f64.to_bits());
        assert_eq!(r.field.grid().l().to_bits(), 1.25f64.to_bits());
        assert_eq!(r.field.grid().n(), 16);
        for (a, b) in r.field.coeffs().iter().zip(z.coeffs()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn several_records_share_one_file() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let (z1, z2) = sample_pair(&g, 5);
        let recs = vec![
            FieldRecord { field: z1, t: 0.0, eps: 0.5, nu: 1.0 },
            FieldRecord { field: z2, t: 0.1, eps: 0.5, nu: 1.0 },
        ];
        let path = scratch("multi.chk");
        write_records(&path, &recs).unwrap();
        let back = read_records(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].t, 0.1);
    }

    #[test]
    fn bad_magic_and_truncation_are_format_errors() {
        let path = scratch("badmagic.chk");
        std::fs::write(&path, b"MUCH").unwrap();
        let err = read_records(&path).unwrap_err();
        assert!(matches!(err, Error::Format { .. }), "got {err:?}");

        let g = Grid::new(2, 8, 1.0).unwrap();
        let (z, _) = sample_pair(&g, 1);
        write_records(&path, &[FieldRecord { field: z, t: 0.0, eps: 1.0, nu: 1.0 }]).unwrap();
        let full = std::fs::read(&path).unwrap();
        std::fs::write(&path, &full[..full.len() - 3]).unwrap();
        let err = read_records(&path).unwrap_err();
        std::fs::remove_file(&path).ok();
        assert!(matches!(err, Error::Format { .. }), "got {err:?}");
    }

    #[test]
    fn manifest_round_trip_preserves_order_and_values() {
        let mut m = Manifest::new();
        m.set("grid", "d", 2);
        m.set("grid", "n", 64);
        m.set("physics", "eps", 0.1);
        m.set("grid", "l", 1.0);
        let text = m.render();
        let back = Manifest::parse(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.require_usize("grid", "n").unwrap(), 64);
        assert_eq!(back.require_f64("physics", "eps").unwrap(), 0.1);
        let names: Vec<&str> = back.section_names().collect();
        assert_eq!(names, vec!["grid", "physics"]);
    }

    #[test]
    fn manifest_errors_name_the_field() {
        let m = Manifest::parse("[grid]\nn = sixty-four\n").unwrap();
        let err = m.require_usize("grid", "n").unwrap_err();
        assert!(err.to_string().contains("grid.n"), "message: {err}");
        let err = m.require_f64("grid", "l").unwrap_err();
        assert!(err.to_string().contains("grid.l"), "message: {err}");

        let err = Manifest::parse("n = 3\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "message: {err}");
        let err = Manifest::parse("[grid]\nn = 3\nn = 4\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "message: {err}");
    }
}
