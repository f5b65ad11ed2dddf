//! SUMO plain-XML export of the intersection and its traffic.
//!
//! Writes the `grid.nod.xml` / `grid.edg.xml` / `grid.rou.xml` triplet that
//! SUMO's netconvert and sumo binaries accept: a traffic-light center node
//! with four 200 m stub approaches, one in- and one out-edge per approach,
//! one route per through movement, and one vehicle element per scenario
//! vehicle departing at its entrance time. The export is one-way; nothing
//! here reads SUMO output back.

use std::fs;
use std::io;
use std::path::Path;

use super::artifacts::write_atomic;
use crate::signal::Movement;
use crate::sim::Scenario;

const EDGE_SPEED: &str = "13.89"; // 50 km/h in m/s

fn node_file() -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<nodes>\n");
    out.push_str("    <node id=\"center\" x=\"0.00\" y=\"0.00\" type=\"traffic_light\"/>\n");
    out.push_str("    <node id=\"north\" x=\"0.00\" y=\"200.00\" type=\"priority\"/>\n");
    out.push_str("    <node id=\"south\" x=\"0.00\" y=\"-200.00\" type=\"priority\"/>\n");
    out.push_str("    <node id=\"east\" x=\"200.00\" y=\"0.00\" type=\"priority\"/>\n");
    out.push_str("    <node id=\"west\" x=\"-200.00\" y=\"0.00\" type=\"priority\"/>\n");
    out.push_str("</nodes>\n");
    out
}

fn edge_file() -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<edges>\n");
    for stub in ["north", "south", "east", "west"] {
        out.push_str(&format!(
            "    <edge id=\"{stub}_in\" from=\"{stub}\" to=\"center\" numLanes=\"1\" speed=\"{EDGE_SPEED}\"/>\n"
        ));
        out.push_str(&format!(
            "    <edge id=\"{stub}_out\" from=\"center\" to=\"{stub}\" numLanes=\"1\" speed=\"{EDGE_SPEED}\"/>\n"
        ));
    }
    out.push_str("</edges>\n");
    out
}

fn route_edges(movement: Movement) -> &'static str {
    match movement {
        Movement::Ns => "north_in south_out",
        Movement::Sn => "south_in north_out",
        Movement::Ew => "east_in west_out",
        Movement::We => "west_in east_out",
    }
}

fn route_file(scenario: &Scenario) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<routes>\n");
    for m in Movement::ALL {
        out.push_str(&format!(
            "    <route id=\"{}\" edges=\"{}\"/>\n",
            m.name(),
            route_edges(m)
        ));
    }
    for v in &scenario.vehicles {
        out.push_str(&format!(
            "    <vehicle id=\"{}\" route=\"{}\" depart=\"{}\"/>\n",
            v.id,
            v.movement.name(),
            v.entrance_time
        ));
    }
    out.push_str("</routes>\n");
    out
}

/// Writes the three plain-XML files into `dir` (created if missing).
pub fn export_sumo_files(scenario: &Scenario, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    write_atomic(&dir.join("grid.nod.xml"), &node_file())?;
    write_atomic(&dir.join("grid.edg.xml"), &edge_file())?;
    write_atomic(&dir.join("grid.rou.xml"), &route_file(scenario))
}
