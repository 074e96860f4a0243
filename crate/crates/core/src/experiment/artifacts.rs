//! CSV and pixmap writers. Column sets are fixed; every header names the
//! unit of its column.

use std::fmt::Write as _;

use crate::isolated::IsolatedComponent;
use crate::pfax::PfaxModel;
use crate::sim::{DistanceMap, Point, Trajectory};

use super::commands::SweepRow;

pub const TRAIN_LOG_HEADER: &str = "quantity,index,value_sphered_sq";
pub const TRAJECTORY_HEADER: &str =
    "step,x_world,y_world,ux_world,uy_world,feature_distance_feature_units,events";
pub const GRID_HEADER: &str = "ix,iy,x_world,y_world,distance_feature_units";
pub const SWEEP_HEADER: &str = "r,k,steps,seed,start_x_world,start_y_world,goal_x_world,goal_y_world,status,reached,success,final_distance_world,path_length_world,path_ratio,nav_steps,touched_obstacle,error";
pub const ISOLATED_HEADER: &str = "component,iterations,converged,error_sphered_sq";
pub const ISOLATED_VECTORS_HEADER: &str = "component,vector,index,value_unitless";

/// Marker for map cells where the sensor is undefined.
pub const SENTINEL: &str = "nan";

pub fn train_log_csv(model: &PfaxModel) -> String {
    let mut s = format!("{TRAIN_LOG_HEADER}\n");
    for (i, v) in model.residual_eigenvalues.iter().enumerate() {
        writeln!(s, "residual_eigenvalue,{i},{v}").unwrap();
    }
    for (i, v) in model.term_errors.iter().enumerate() {
        writeln!(s, "term_error,{i},{v}").unwrap();
    }
    s
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = format!("{TRAJECTORY_HEADER}\n");
    for (i, p) in traj.positions.iter().enumerate() {
        let (ux, uy) = traj
            .controls
            .get(i)
            .map(|u| (u.x.to_string(), u.y.to_string()))
            .unwrap_or_default();
        let dist = traj.feature_distances.get(i).map(|d| d.to_string()).unwrap_or_default();
        let events: Vec<_> = traj.events.iter().filter(|e| e.step == i).map(|e| e.kind.as_str()).collect();
        writeln!(s, "{i},{},{},{ux},{uy},{dist},{}", p.x, p.y, events.join(";")).unwrap();
    }
    s
}

pub fn grid_csv(map: &DistanceMap) -> String {
    let mut s = format!("{GRID_HEADER}\n");
    for iy in 0..map.ny {
        for ix in 0..map.nx {
            let c = map.center(ix, iy);
            let v = map.get(ix, iy).map_or_else(|| SENTINEL.to_string(), |v| v.to_string());
            writeln!(s, "{ix},{iy},{},{},{v}", c.x, c.y).unwrap();
        }
    }
    s
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = format!("{SWEEP_HEADER}\n");
    for r in rows {
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.r,
            r.k,
            r.steps,
            r.seed,
            r.start.x,
            r.start.y,
            r.goal.x,
            r.goal.y,
            if r.error.is_some() { "error" } else { "ok" },
            r.reached as u8,
            r.success as u8,
            opt(r.final_distance),
            opt(r.path_length),
            opt(r.path_ratio),
            r.nav_steps,
            r.touched_obstacle as u8,
            r.error.as_deref().unwrap_or("").replace([',', '\n'], " "),
        )
        .unwrap();
    }
    s
}

pub fn isolated_csv(components: &[IsolatedComponent]) -> (String, String) {
    let mut summary = format!("{ISOLATED_HEADER}\n");
    let mut vectors = format!("{ISOLATED_VECTORS_HEADER}\n");
    for (c, comp) in components.iter().enumerate() {
        writeln!(summary, "{c},{},{},{}", comp.iterations, comp.converged as u8, comp.error).unwrap();
        for (name, values) in [("a", comp.a.as_slice()), ("b", comp.b.as_slice()), ("objective", &comp.history[..])] {
            for (i, v) in values.iter().enumerate() {
                writeln!(vectors, "{c},{name},{i},{v}").unwrap();
            }
        }
    }
    (summary, vectors)
}

const MASK_RGB: [u8; 3] = [128, 128, 128];
const CROSS_RGB: [u8; 3] = [255, 255, 255];

/// Dark blue through teal to yellow.
fn colormap(t: f64) -> [u8; 3] {
    const STOPS: [[f64; 3]; 3] = [[68.0, 1.0, 84.0], [33.0, 145.0, 140.0], [253.0, 231.0, 37.0]];
    let t = t.clamp(0.0, 1.0) * 2.0;
    let i = (t as usize).min(1);
    let f = t - i as f64;
    let mut rgb = [0u8; 3];
    for c in 0..3 {
        rgb[c] = (STOPS[i][c] + f * (STOPS[i + 1][c] - STOPS[i][c])).round() as u8;
    }
    rgb
}

/// Binary PPM (P6), one pixel per cell with the top image row at the
/// largest y. Values are scaled linearly between their minimum and
/// maximum; undefined cells are grey and the goal carries a crosshair.
pub fn map_ppm(map: &DistanceMap, goal: &Point, config_hash: &str) -> Vec<u8> {
    let defined: Vec<f64> = map.values.iter().flatten().copied().collect();
    let lo = defined.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = defined.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (gx, gy) = map.cell_of(goal);
    let arm = (map.nx.min(map.ny) / 20).max(2);
    let mut out = format!("P6\n# config-hash {config_hash}\n{} {}\n255\n", map.nx, map.ny).into_bytes();
    for iy in (0..map.ny).rev() {
        for ix in 0..map.nx {
            let on_cross = (ix == gx && iy.abs_diff(gy) <= arm) || (iy == gy && ix.abs_diff(gx) <= arm);
            let rgb = if on_cross {
                CROSS_RGB
            } else {
                map.get(ix, iy).map_or(MASK_RGB, |v| colormap((v - lo) / span))
            };
            out.extend_from_slice(&rgb);
        }
    }
    out
}
