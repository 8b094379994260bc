//! CSV result files. Headers follow the row field order.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::Serialize;

pub const SETTING1_HEADER: &str = "graph_id,variable,theta,is_parent,method,px_mode,converged";
pub const SETTING2_HEADER: &str = "graph_id,variable,theta,is_parent,n_interventional,converged";
pub const JOINT_HEADER: &str = "graph_id,scenario,x1,x2,estimated,true,residual,converged";

pub fn write_rows<R: Serialize, W: Write>(sink: W, rows: &[R]) -> anyhow::Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_rows(file, rows).with_context(|| format!("writing {}", path.display()))
}

pub fn read_csv<R: DeserializeOwned>(path: &Path) -> anyhow::Result<Vec<R>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let rows = reader.deserialize().collect::<Result<Vec<R>, _>>();
    rows.with_context(|| format!("reading {}", path.display()))
}
