//! Instance sources: seeded random networks, the Northern Netherlands case, and files.

mod case_study;
mod generator;
mod io;

pub use case_study::{default_case_study_path, load_case_study, CaseStudyOptions, DEFAULT_CONVERSION};
pub use generator::{generate_random, with_vertex_support, GeneratorSpec, NormalParams};
pub use io::{
    instance_from_json, instance_to_json, instance_to_json_with_manifest, load_instance, load_instance_with_warnings, save_instance, SCHEMA_VERSION,
};
