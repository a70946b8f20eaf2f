//! `object_id,cluster_id` label files.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use sdc_core::{ClusterPartition, ObjectId};

use crate::CliError;

pub const HEADER: [&str; 2] = ["object_id", "cluster_id"];

/// Writes one row per object in id order, with a header.
pub fn write_labels<W: Write>(partition: &ClusterPartition, writer: W) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(HEADER)?;
    for (object, cluster) in partition.iter() {
        wtr.write_record([object.to_string(), cluster.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads `object_id,label` rows. The label may be any text; a first row
/// whose id is not an integer is taken as a header.
pub fn read_labels<R: Read>(reader: R, name: &str) -> Result<BTreeMap<ObjectId, String>, CliError> {
    let bad = |message: String| CliError::Labels {
        path: name.to_string(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = BTreeMap::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            return Err(bad(format!("row {} has {} fields, expected 2", i + 1, record.len())));
        }
        let id = match record[0].parse::<ObjectId>() {
            Ok(id) => id,
            Err(_) if i == 0 => continue,
            Err(_) => return Err(bad(format!("row {}: bad object id {:?}", i + 1, &record[0]))),
        };
        if out.insert(id, record[1].to_string()).is_some() {
            return Err(bad(format!("object {id} listed twice")));
        }
    }
    if out.is_empty() {
        return Err(bad("no labels".into()));
    }
    Ok(out)
}
