use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Sample, State};
use crate::error::Result;
use crate::grid::Grid1D;

/// One row of `timeseries.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeseriesRow {
    pub t: f64,
    #[serde(rename = "E_total")]
    pub e_total: f64,
    #[serde(rename = "E_kin")]
    pub e_kin: f64,
    #[serde(rename = "E_el")]
    pub e_el: f64,
    #[serde(rename = "E_th")]
    pub e_th: f64,
    pub drift: f64,
    pub mass_theta: f64,
    pub min_theta: f64,
    pub l2_vx: f64,
    pub l2_uxx: f64,
    pub l2_thetax: f64,
    pub cum_vx4: f64,
    pub cum_theta_pow: f64,
    pub cum_thetaxx2: f64,
    pub cum_vxx2: f64,
    pub lq_value: f64,
    pub w12_theta: f64,
    pub z_residual: f64,
    pub clamp_count: usize,
}

impl From<&Sample> for TimeseriesRow {
    fn from(s: &Sample) -> Self {
        let m = &s.monitors;
        TimeseriesRow {
            t: s.t,
            e_total: s.energy.total,
            e_kin: s.energy.kinetic,
            e_el: s.energy.elastic,
            e_th: s.energy.thermal,
            drift: s.energy.drift,
            mass_theta: s.mass_theta,
            min_theta: s.min_theta,
            l2_vx: m.l2_vx,
            l2_uxx: m.l2_uxx,
            l2_thetax: m.l2_thetax,
            cum_vx4: m.cum_vx4,
            cum_theta_pow: m.cum_theta_pow,
            cum_thetaxx2: m.cum_thetaxx2,
            cum_vxx2: m.cum_vxx2,
            lq_value: m.lq_value,
            w12_theta: m.w12_theta,
            z_residual: s.z_residual,
            clamp_count: s.clamp_count,
        }
    }
}

pub fn write_timeseries(path: &Path, samples: &[Sample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    for s in samples {
        w.serialize(TimeseriesRow::from(s))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_timeseries(path: &Path) -> Result<Vec<TimeseriesRow>> {
    let mut r = csv::Reader::from_reader(File::open(path)?);
    let rows = r.deserialize().collect::<std::result::Result<Vec<TimeseriesRow>, _>>()?;
    Ok(rows)
}

#[derive(Serialize)]
struct FieldRow {
    x: f64,
    u: f64,
    v: f64,
    theta: f64,
}

pub fn write_final_state(path: &Path, state: &State, grid: &Grid1D) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    for (i, x) in grid.nodes().enumerate() {
        w.serialize(FieldRow {
            x,
            u: state.u[i],
            v: state.v[i],
            theta: state.theta[i],
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Where a reported number comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Read off the computed trajectory.
    Measured,
    /// Numerical estimate without a certified error bound.
    Estimated,
    /// Taken from the configuration.
    Configured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Quantity {
    pub fn measured(value: f64) -> Self {
        Quantity {
            value,
            provenance: Provenance::Measured,
            note: None,
        }
    }

    pub fn configured(value: f64) -> Self {
        Quantity {
            value,
            provenance: Provenance::Configured,
            note: None,
        }
    }

    pub fn estimated(value: f64, note: &str) -> Self {
        Quantity {
            value,
            provenance: Provenance::Estimated,
            note: Some(note.into()),
        }
    }
}
