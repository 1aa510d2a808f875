//! File emission: atomic writes, trajectory CSV, profile CSV and
//! gnuplot-style block data.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use phoc_core::model::Trajectory;
use phoc_core::numerics::SubspaceBasis;
use phoc_core::ocp::OcpSolution;

pub fn ensure_dir(dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)
}

/// Write-then-rename so partially written files never land under the final
/// name.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp: PathBuf = path.with_extension("tmp~");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> std::io::Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    write_atomic(path, &s)
}

fn push_vec(line: &mut String, v: &DVector<f64>) {
    for x in v.iter() {
        line.push(',');
        line.push_str(&format!("{x}"));
    }
}

/// `trajectory.csv` with header `t,x1..xn,u1..um,y1..ym,lambda1..lambdan,distW`.
/// For descriptor problems the adjoint lives in the reduced coordinates and
/// is zero-padded to the state dimension.
pub fn trajectory_csv(
    traj: &Trajectory,
    sol: &OcpSolution,
    dist_profile: &[f64],
) -> String {
    let n = traj.states[0].len();
    let m = traj.controls[0].len();
    let mut s = String::from("t");
    for i in 1..=n {
        s.push_str(&format!(",x{i}"));
    }
    for i in 1..=m {
        s.push_str(&format!(",u{i}"));
    }
    for i in 1..=m {
        s.push_str(&format!(",y{i}"));
    }
    for i in 1..=n {
        s.push_str(&format!(",lambda{i}"));
    }
    s.push_str(",distW\n");
    for k in 0..traj.times.len() {
        let mut line = format!("{}", traj.times[k]);
        push_vec(&mut line, &traj.states[k]);
        push_vec(&mut line, &traj.controls[k]);
        push_vec(&mut line, &traj.outputs[k]);
        let lam = &sol.adjoint[k];
        for i in 0..n {
            line.push(',');
            let v = if i < lam.len() { lam[i] } else { 0.0 };
            line.push_str(&format!("{v}"));
        }
        line.push_str(&format!(",{}\n", dist_profile[k]));
        s.push_str(&line);
    }
    s
}

/// `profile_T<..>.csv` with header `t,dist,lambda_norm`.
pub fn profile_csv(traj: &Trajectory, profile: &[f64], adjoint: &[DVector<f64>]) -> String {
    let mut s = String::from("t,dist,lambda_norm\n");
    for k in 0..traj.times.len() {
        s.push_str(&format!(
            "{},{},{}\n",
            traj.times[k],
            profile[k],
            adjoint[k].norm()
        ));
    }
    s
}

/// Whitespace-separated gnuplot blocks, one block per horizon.
pub struct PlotBlocks {
    header: String,
    blocks: Vec<String>,
}

impl PlotBlocks {
    pub fn new(header: &str) -> Self {
        Self {
            header: header.to_string(),
            blocks: Vec::new(),
        }
    }

    pub fn add_block(&mut self, title: &str, rows: impl Iterator<Item = Vec<f64>>) {
        let mut b = format!("# {title}\n");
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            b.push_str(&cells.join(" "));
            b.push('\n');
        }
        self.blocks.push(b);
    }

    pub fn render(&self) -> String {
        let mut s = format!("# {}\n", self.header);
        s.push_str(&self.blocks.join("\n\n"));
        s
    }
}

/// Distance profile for CSV emission: joint `(x,u)` to ker W for ODE output,
/// state-only for DAE output.
pub fn csv_distances(
    traj: &Trajectory,
    subspace: &SubspaceBasis,
    joint: bool,
) -> Vec<f64> {
    phoc_core::turnpike::distance_profile(traj, subspace, joint)
        .expect("profile dimensions verified by the caller")
}
