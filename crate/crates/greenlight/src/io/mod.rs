//! File formats: scenario parsing, result artifacts, and SUMO export.

pub mod artifacts;
pub mod scenario;
pub mod sumo;

pub use artifacts::{
    emit_plot_data, generation_log_to_string, plot_data_to_string, vehicle_table_to_string,
    write_atomic, write_generation_log, write_vehicle_table,
};
pub use scenario::{load_scenario, parse_scenario, scenario_to_string, LoadError};
pub use sumo::export_sumo_files;
