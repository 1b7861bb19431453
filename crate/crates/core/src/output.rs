//! Solution artifacts.
//!
//! CSV: one file per output time, header `x1,..,xn,re,im`, one row per grid
//! point in row-major order, values printed with 17 significant digits.
//!
//! Binary dump (all little-endian):
//!
//! | field  | type          |
//! |--------|---------------|
//! | magic  | `b"OPC1"`     |
//! | dim    | u32           |
//! | shape  | u32 × dim     |
//! | box    | f64 × dim     |
//! | ntimes | u32           |
//! | times  | f64 × ntimes  |
//! | data   | (f64 re, f64 im) × len, per time |

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::config::Formats;
use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::kernel::Solution;

type C = Complex64;

pub const MAGIC: &[u8; 4] = b"OPC1";
pub const DUMP_NAME: &str = "solution.bin";
pub const STABILITY_NAME: &str = "stability.txt";

pub fn csv_name(index: usize) -> String {
    format!("u_{index:03}.csv")
}

pub fn write_csv(path: &Path, u: &Field) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let dim = u.grid.dim();
    let header: Vec<String> = (1..=dim).map(|d| format!("x{d}")).collect();
    writeln!(w, "{},re,im", header.join(","))?;
    let mut line = String::new();
    for (i, z) in u.data.iter().enumerate() {
        line.clear();
        for x in u.grid.point(i) {
            let _ = write!(line, "{x:.17e},");
        }
        let _ = write!(line, "{:.17e},{:.17e}", z.re, z.im);
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the `re,im` columns of a CSV written by [`write_csv`].
pub fn read_csv_values(path: &Path) -> Result<Vec<C>> {
    let text = fs::read_to_string(path)?;
    let bad = |n: usize| Error::Io(format!("{}: malformed row {n}", path.display()));
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(n, line)| {
            let mut cols = line.rsplit(',');
            let im: f64 = cols.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad(n))?;
            let re: f64 = cols.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad(n))?;
            Ok(C::new(re, im))
        })
        .collect()
}

pub fn write_dump(path: &Path, grid: &Grid, snapshots: &[(f64, Field)]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    for &n in &grid.shape {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    for &l in &grid.lengths {
        w.write_all(&l.to_le_bytes())?;
    }
    w.write_all(&(snapshots.len() as u32).to_le_bytes())?;
    for (t, _) in snapshots {
        w.write_all(&t.to_le_bytes())?;
    }
    for (_, u) in snapshots {
        for z in &u.data {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Io(format!("dump truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(chunk.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take()?) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

/// Decodes a dump written by [`write_dump`].
pub fn read_dump(path: &Path) -> Result<(Grid, Vec<(f64, Field)>)> {
    let bytes = fs::read(path)?;
    let mut r = Reader { bytes: &bytes, pos: 0 };
    if &r.take::<4>()? != MAGIC {
        return Err(Error::Io(format!("{}: not an OPC1 dump", path.display())));
    }
    let dim = r.u32()?;
    let shape = (0..dim).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
    let lengths = (0..dim).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let grid = Grid::new(shape, lengths)?;
    let nt = r.u32()?;
    let times = (0..nt).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let mut snapshots = Vec::with_capacity(nt);
    for t in times {
        let data = (0..grid.len())
            .map(|_| Ok(C::new(r.f64()?, r.f64()?)))
            .collect::<Result<Vec<_>>>()?;
        snapshots.push((t, Field::new(grid.clone(), data)?));
    }
    if r.pos != bytes.len() {
        return Err(Error::Io(format!(
            "{}: {} trailing bytes",
            path.display(),
            bytes.len() - r.pos
        )));
    }
    Ok((grid, snapshots))
}

/// Writes the selected formats plus the stability report into `dir`.
pub fn write_solution(dir: &Path, grid: &Grid, sol: &Solution, formats: Formats) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if formats.csv {
        for (i, (_, u)) in sol.snapshots.iter().enumerate() {
            let path = dir.join(csv_name(i));
            write_csv(&path, u)?;
            written.push(path);
        }
    }
    if formats.binary {
        let path = dir.join(DUMP_NAME);
        write_dump(&path, grid, &sol.snapshots)?;
        written.push(path);
    }
    let mut report = String::new();
    let times: Vec<String> = sol.snapshots.iter().map(|(t, _)| format!("{t}")).collect();
    let _ = writeln!(report, "times = {}", times.join(", "));
    report.push_str(&sol.report.to_text());
    let path = dir.join(STABILITY_NAME);
    fs::write(&path, report)?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trip_is_exact() {
        let grid = Grid::new(vec![4, 3], vec![1.5, 2.0]).unwrap();
        let snaps: Vec<(f64, Field)> = [0.0, 0.3]
            .iter()
            .map(|&t| (t, Field::from_fn(&grid, |x| C::new(x[0] + t, x[1].sin() / 3.0))))
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.bin");
        write_dump(&path, &grid, &snaps).unwrap();
        let (g, back) = read_dump(&path).unwrap();
        assert_eq!(g, grid);
        assert_eq!(back.len(), 2);
        for ((t0, u0), (t1, u1)) in snaps.iter().zip(&back) {
            assert_eq!(t0, t1);
            assert_eq!(u0.data, u1.data);
        }
        let bytes = fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 4 + 4 + 8 + 16 + 4 + 16 + 2 * 12 * 16);
        fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(read_dump(&path).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let grid = Grid::cube(2, 4);
        let u = Field::from_fn(&grid, |x| C::new((x[0] * x[1]).cos() / 7.0, -x[0]));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        write_csv(&path, &u).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x1,x2,re,im\n"));
        assert_eq!(read_csv_values(&path).unwrap(), u.data);
    }
}
