use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{max_abs, GridSpec};

/// Canonical field variables on the grid.
///
/// `a` holds the covariant components `A_i`; `p` holds the density-weighted
/// contravariant momenta `p^i = sqrt(-g) F^{i0} / (4 pi c^2)`; `p0` is the
/// momentum conjugate to `A_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub grid: GridSpec,
    pub time: f64,
    pub a0: Vec<f64>,
    pub a: [Vec<f64>; 3],
    pub p0: Vec<f64>,
    pub p: [Vec<f64>; 3],
}

pub const ARRAY_NAMES: [&str; 8] = ["A0", "A1", "A2", "A3", "p0", "p1", "p2", "p3"];

impl FieldState {
    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        let z = || vec![0.0; n];
        Self {
            grid,
            time: 0.0,
            a0: z(),
            a: [z(), z(), z()],
            p0: z(),
            p: [z(), z(), z()],
        }
    }

    /// Arrays in snapshot order: `A_0, A_1..A_3, p^0, p^1..p^3`.
    pub fn arrays(&self) -> [&Vec<f64>; 8] {
        [
            &self.a0, &self.a[0], &self.a[1], &self.a[2], &self.p0, &self.p[0], &self.p[1], &self.p[2],
        ]
    }

    pub fn arrays_mut(&mut self) -> [&mut Vec<f64>; 8] {
        let [a1, a2, a3] = &mut self.a;
        let [p1, p2, p3] = &mut self.p;
        [&mut self.a0, a1, a2, a3, &mut self.p0, p1, p2, p3]
    }

    pub fn check(&self) -> Result<()> {
        let n = self.grid.len();
        for (name, arr) in ARRAY_NAMES.iter().zip(self.arrays()) {
            if arr.len() != n {
                return Err(Error::GridMismatch(format!(
                    "{name} has {} entries, grid has {n}",
                    arr.len()
                )));
            }
        }
        self.check_finite()
    }

    pub fn check_finite(&self) -> Result<()> {
        const FIELDS: [&str; 8] = ["A0", "A1", "A2", "A3", "p0", "p1", "p2", "p3"];
        for (name, arr) in FIELDS.iter().zip(self.arrays()) {
            if arr.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState {
                    field: name,
                    time: self.time,
                });
            }
        }
        if !self.time.is_finite() {
            return Err(Error::NonFiniteState {
                field: "time",
                time: self.time,
            });
        }
        Ok(())
    }

    pub fn p0_max(&self) -> f64 {
        max_abs(&self.p0)
    }

    pub fn p_max(&self) -> f64 {
        self.p.iter().map(|c| max_abs(c)).fold(0.0, f64::max)
    }

    /// Largest entrywise difference over all eight arrays.
    pub fn max_difference(&self, other: &FieldState) -> f64 {
        self.arrays()
            .iter()
            .zip(other.arrays())
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

const MAGIC: &[u8; 8] = b"DMSNAP01";

/// Metadata written next to every snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub format: String,
    pub dims: [usize; 3],
    pub dx: [f64; 3],
    pub time: f64,
    pub step: usize,
    pub arrays: Vec<String>,
    pub byte_order: String,
    pub layout: String,
    pub speed_of_light: f64,
}

/// Sidecar path for a snapshot: `name.bin` -> `name.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Write the binary snapshot plus its JSON sidecar.
pub fn write_snapshot(state: &FieldState, step: usize, speed_of_light: f64, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(format!("writing {}", path.display()), e);
    w.write_all(MAGIC).map_err(io)?;
    for n in state.grid.n {
        w.write_all(&(n as u64).to_le_bytes()).map_err(io)?;
    }
    for dx in state.grid.dx {
        w.write_all(&dx.to_le_bytes()).map_err(io)?;
    }
    w.write_all(&state.time.to_le_bytes()).map_err(io)?;
    w.write_all(&(ARRAY_NAMES.len() as u64).to_le_bytes()).map_err(io)?;
    for arr in state.arrays() {
        for v in arr.iter() {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)?;

    let meta = SnapshotMeta {
        format: "DMSNAP01".into(),
        dims: state.grid.n,
        dx: state.grid.dx,
        time: state.time,
        step,
        arrays: ARRAY_NAMES.iter().map(|s| s.to_string()).collect(),
        byte_order: "little".into(),
        layout: "C".into(),
        speed_of_light,
    };
    let side = sidecar_path(path);
    fs::write(&side, serde_json::to_string_pretty(&meta)?)
        .map_err(|e| Error::io(format!("writing {}", side.display()), e))?;
    Ok(())
}

fn read_u64(r: &mut impl Read) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> std::io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_snapshot(path: &Path) -> Result<FieldState> {
    let file = fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let mut r = BufReader::new(file);
    let io = |e| Error::io(format!("reading {}", path.display()), e);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot(format!("{}: bad magic", path.display())));
    }
    let mut n = [0usize; 3];
    for v in &mut n {
        *v = read_u64(&mut r).map_err(io)? as usize;
    }
    let mut dx = [0.0; 3];
    for v in &mut dx {
        *v = read_f64(&mut r).map_err(io)?;
    }
    let time = read_f64(&mut r).map_err(io)?;
    let count = read_u64(&mut r).map_err(io)?;
    if count != ARRAY_NAMES.len() as u64 {
        return Err(Error::Snapshot(format!("expected 8 arrays, header says {count}")));
    }
    let grid = GridSpec::new(n, dx)?;
    let mut state = FieldState::zeros(grid);
    state.time = time;
    for arr in state.arrays_mut() {
        for v in arr.iter_mut() {
            *v = read_f64(&mut r).map_err(io)?;
        }
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest).map_err(io)?;
    if !rest.is_empty() {
        return Err(Error::Snapshot(format!("{} trailing bytes", rest.len())));
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let grid = GridSpec::new([4, 5, 6], [0.1, 0.2, 0.3]).unwrap();
        let mut s = FieldState::zeros(grid);
        s.time = 1.25;
        for (k, arr) in s.arrays_mut().into_iter().enumerate() {
            for (i, v) in arr.iter_mut().enumerate() {
                *v = (k * 1000 + i) as f64 * 0.5 - 3.0;
            }
        }
        let dir = std::env::temp_dir().join(format!("dm-snap-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("s.bin");
        write_snapshot(&s, 7, 1.0, &path).unwrap();
        let back = read_snapshot(&path).unwrap();
        assert_eq!(back, s);
        let bytes = fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 8 + 24 + 24 + 8 + 8 + 8 * 8 * grid.len());
        let meta: SnapshotMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(meta.step, 7);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn non_finite_state_is_reported() {
        let mut s = FieldState::zeros(GridSpec::cube(4, 1.0).unwrap());
        s.p[1][3] = f64::NAN;
        assert!(matches!(s.check(), Err(Error::NonFiniteState { field: "p2", .. })));
    }
}
