//! Stable text formats: CSV with 17 significant digits and versioned JSON.

use serde::Serialize;

use crate::compactify::InfinityEquilibrium;
use crate::dynamics::Trajectory;
use crate::experiments::{BasinReport, Table1Row};
use crate::model::{MetricParams, RicciComponents};

pub const SCHEMA_VERSION: u32 = 1;

/// Scientific notation with 17 significant digits, which round-trips f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_csv(tr: &Trajectory) -> String {
    let with_chart = tr.samples.iter().any(|s| s.chart.is_some());
    let mut out = String::from(if with_chart {
        "t,x1,x2,x3,chart,z1,z2,z3\n"
    } else {
        "t,x1,x2,x3\n"
    });
    for s in &tr.samples {
        let mut row: Vec<String> = std::iter::once(s.t).chain(s.x).map(fmt17).collect();
        if with_chart {
            match s.chart {
                Some(p) => {
                    row.push(p.chart.to_string());
                    row.extend(p.z.map(fmt17));
                }
                None => row.extend(["", "", "", ""].map(String::from)),
            }
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON with a leading `schema_version` field.
pub fn versioned_json<T: Serialize>(body: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Versioned {
        schema_version: SCHEMA_VERSION,
        body,
    })
    .expect("report types serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct Equilibria<'a> {
    equilibria: &'a [InfinityEquilibrium],
}

pub fn equilibria_json(eqs: &[InfinityEquilibrium]) -> String {
    versioned_json(&Equilibria { equilibria: eqs })
}

pub fn equilibria_csv(eqs: &[InfinityEquilibrium]) -> String {
    let mut out = String::from("chart,z1,z2,z3,d1,d2,d3,re1,im1,re2,im2,re3,im3,stability,first_octant\n");
    for e in eqs {
        let mut row = vec![e.chart.to_string()];
        row.extend(e.z.iter().chain(&e.direction).map(|&v| fmt17(v)));
        for ev in &e.eigenvalues {
            row.push(fmt17(ev.re));
            row.push(fmt17(ev.im));
        }
        row.push(e.stability.to_string());
        row.push(e.first_octant.to_string());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn lyapunov_csv(rows: &[Table1Row]) -> String {
    let mut out = String::from("line,chart,lambda1,lambda2,lambda3,t_used,converged\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.line.index(),
            r.chart,
            fmt17(r.exponents[0]),
            fmt17(r.exponents[1]),
            fmt17(r.exponents[2]),
            fmt17(r.t_used),
            r.converged
        ));
    }
    out
}

#[derive(Serialize)]
struct Rows<'a> {
    rows: &'a [Table1Row],
}

pub fn lyapunov_json(rows: &[Table1Row]) -> String {
    versioned_json(&Rows { rows })
}

pub fn basin_json(report: &BasinReport) -> String {
    versioned_json(report)
}

pub fn basin_csv(report: &BasinReport) -> String {
    let mut out = String::from("seed_index,x1,x2,x3,end1,end2,end3,termination,converged,max_line_deviation\n");
    for r in &report.records {
        let mut row = vec![r.seed_index.to_string()];
        row.extend(r.start.iter().chain(&r.end_ball_point).map(|&v| fmt17(v)));
        row.push(r.termination.to_string());
        row.push(r.converged.to_string());
        row.push(fmt17(r.max_line_deviation));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn ricci_csv(m: &MetricParams, r: &RicciComponents) -> String {
    let vals = [m.l12, m.l13, m.l23, r.r12, r.r13, r.r23].map(fmt17);
    format!("l12,l13,l23,r12,r13,r23\n{}\n", vals.join(","))
}
