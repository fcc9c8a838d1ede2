//! CSV tables, binary snapshots and trajectory manifests.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{Snapshot, Trajectory};
use crate::grid::Grid;
use crate::nonlinearity::Nonlinearity;
use crate::profile::TravelingWaveProfile;
use crate::transform::WaveField;

pub const SNAPSHOT_MAGIC: [u8; 8] = *b"GSLSNAP\0";
pub const SNAPSHOT_VERSION: u32 = 1;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header plus rows of floats.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::Shape(format!(
                "row of {} values for {} columns",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("missing column {name}")))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.header)?;
        for r in &self.rows {
            wr.write_record(r.iter().map(|&x| fmt_f64(x)))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
        if header.is_empty() {
            return Err(Error::Format("empty header".into()));
        }
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Format(format!("not a number: {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != header.len() {
                return Err(Error::Format(format!("row of {} fields, header has {}", row.len(), header.len())));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

/// Columns `x, eta, v` on the profile grid.
pub fn profile_table(p: &TravelingWaveProfile) -> Table {
    let mut t = Table::new(["x", "eta", "v"]);
    for j in 0..p.grid.n {
        t.rows.push(vec![p.grid.x(j), p.eta[j], p.v[j]]);
    }
    t
}

/// Golden profile read back from CSV: samples only.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileSamples {
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
    pub v: Vec<f64>,
}

impl ProfileSamples {
    pub fn from_table(t: &Table) -> Result<Self> {
        Ok(Self {
            x: t.column("x")?,
            eta: t.column("eta")?,
            v: t.column("v")?,
        })
    }

    /// Largest deviation of `p` from these samples, evaluating `p` off-grid.
    pub fn max_deviation(&self, p: &TravelingWaveProfile) -> f64 {
        self.x
            .iter()
            .zip(self.eta.iter().zip(&self.v))
            .map(|(&x, (&e, &v))| (p.eta_at(x) - e).abs().max((p.v_at(x) - v).abs()))
            .fold(0.0, f64::max)
    }
}

/// Header `(magic, version, n, L, t, κ)` then interleaved `(re, im)`, all little-endian.
pub fn write_snapshot<W: Write>(mut w: W, t: f64, field: &WaveField) -> Result<()> {
    if !field.grid.periodic {
        return Err(Error::Shape("snapshots are stored for periodic boxes only".into()));
    }
    w.write_all(&SNAPSHOT_MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    w.write_all(&(field.grid.n as u64).to_le_bytes())?;
    for x in [field.grid.length(), t, field.kappa] {
        w.write_all(&x.to_le_bytes())?;
    }
    for z in &field.psi {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot> {
    let magic: [u8; 8] = read_array(&mut r)?;
    if magic != SNAPSHOT_MAGIC {
        return Err(Error::Format("bad snapshot magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != SNAPSHOT_VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {version}")));
    }
    let n = u64::from_le_bytes(read_array(&mut r)?) as usize;
    let l = f64::from_le_bytes(read_array(&mut r)?);
    let t = f64::from_le_bytes(read_array(&mut r)?);
    let kappa = f64::from_le_bytes(read_array(&mut r)?);
    let grid = Grid::periodic_box(l, n)?;
    let mut psi = Vec::with_capacity(n);
    for _ in 0..n {
        let re = f64::from_le_bytes(read_array(&mut r)?);
        let im = f64::from_le_bytes(read_array(&mut r)?);
        psi.push(Complex64::new(re, im));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after snapshot".into()));
    }
    Ok(Snapshot {
        t,
        field: WaveField { grid, psi, kappa },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub t: f64,
    /// Relative to the manifest's directory.
    pub path: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub nonlinearity: Nonlinearity,
    pub grid: Grid,
    pub snapshots: Vec<SnapshotEntry>,
}

/// Write `snap_00000.bin`, … and `trajectory.json` into `dir`.
pub fn write_trajectory(dir: &Path, traj: &Trajectory, nl: &Nonlinearity) -> Result<TrajectoryManifest> {
    std::fs::create_dir_all(dir)?;
    let grid = traj
        .snapshots
        .first()
        .map(|s| s.field.grid)
        .ok_or_else(|| Error::Shape("empty trajectory".into()))?;
    let mut snapshots = Vec::with_capacity(traj.len());
    for (i, s) in traj.snapshots.iter().enumerate() {
        let name = PathBuf::from(format!("snap_{i:05}.bin"));
        write_snapshot(BufWriter::new(File::create(dir.join(&name))?), s.t, &s.field)?;
        snapshots.push(SnapshotEntry { t: s.t, path: name });
    }
    let m = TrajectoryManifest {
        nonlinearity: *nl,
        grid,
        snapshots,
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join("trajectory.json"))?), &m)?;
    Ok(m)
}

pub fn read_trajectory(dir: &Path) -> Result<(TrajectoryManifest, Trajectory)> {
    let m: TrajectoryManifest = serde_json::from_reader(BufReader::new(File::open(dir.join("trajectory.json"))?))?;
    let mut traj = Trajectory::default();
    for e in &m.snapshots {
        let s = read_snapshot(BufReader::new(File::open(dir.join(&e.path))?))?;
        if s.t != e.t || !s.field.grid.matches(&m.grid) {
            return Err(Error::Format(format!("snapshot {} disagrees with the manifest", e.path.display())));
        }
        traj.snapshots.push(s);
    }
    Ok((m, traj))
}
