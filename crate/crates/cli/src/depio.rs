//! Reading final-deployment CSV files back into a `Deployment` (the
//! writer side lives on `RunTrace`).

use httl_core::geom::Point;
use httl_core::scenario::validate_deployment;
use httl_core::{Deployment, Scenario};

use crate::error::CliError;

/// Parses a `kind,index,x,y,assigned_fc,volume` file produced by the run
/// subcommands and validates it against the scenario.
pub fn parse_deployment_csv(s: &Scenario, text: &str) -> Result<Deployment, CliError> {
    let mut p = vec![None; s.n_aps()];
    let mut q = vec![None; s.n_fcs()];
    let mut t = vec![None; s.n_aps()];
    let mut lines = text.lines();
    match lines.next() {
        Some("kind,index,x,y,assigned_fc,volume") => {}
        other => {
            return Err(CliError::BadArgument(format!(
                "unexpected deployment header: {other:?}"
            )))
        }
    }
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(CliError::BadArgument(format!(
                "deployment line {}: expected 6 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let bad = |what: &str| {
            CliError::BadArgument(format!("deployment line {}: bad {what}", lineno + 2))
        };
        let index: usize = fields[1].parse().map_err(|_| bad("index"))?;
        let x: f64 = fields[2].parse().map_err(|_| bad("x"))?;
        let y: f64 = fields[3].parse().map_err(|_| bad("y"))?;
        match fields[0] {
            "ap" => {
                if index == 0 || index > s.n_aps() {
                    return Err(bad("ap index"));
                }
                let fc: usize = fields[4].parse().map_err(|_| bad("assigned_fc"))?;
                if fc == 0 || fc > s.n_fcs() {
                    return Err(bad("assigned_fc"));
                }
                p[index - 1] = Some(Point::new(x, y));
                t[index - 1] = Some(fc - 1);
            }
            "fc" => {
                if index == 0 || index > s.n_fcs() {
                    return Err(bad("fc index"));
                }
                q[index - 1] = Some(Point::new(x, y));
            }
            other => {
                return Err(CliError::BadArgument(format!(
                    "deployment line {}: unknown kind '{other}'",
                    lineno + 2
                )))
            }
        }
    }
    let collect = |xs: Vec<Option<Point>>, what: &str| {
        xs.into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| CliError::BadArgument(format!("missing {what} {}", i + 1)))
            })
            .collect::<Result<Vec<Point>, CliError>>()
    };
    let d = Deployment {
        p: collect(p, "ap")?,
        q: collect(q, "fc")?,
        t: t.into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| CliError::BadArgument(format!("missing ap {}", i + 1)))
            })
            .collect::<Result<Vec<usize>, CliError>>()?,
    };
    let issues = validate_deployment(s, &d);
    if !issues.is_empty() {
        let msgs: Vec<String> = issues.iter().map(|i| i.to_string()).collect();
        return Err(CliError::BadArgument(msgs.join("; ")));
    }
    Ok(d)
}
