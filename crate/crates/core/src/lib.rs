//! Sampled certification of Kannan-type and Pata-type contractive
//! conditions on concrete metric spaces, with Picard iteration and checks of
//! the quantitative bounds that drive its convergence.
//!
//! * [`metric`]: points, spaces with a zero point, seeded sample sets.
//! * [`maps`]: the catalog of test maps.
//! * [`conditions`]: certificates for the contractive conditions.
//! * [`solver`]: Picard iteration and trajectory bounds.
//! * [`report_cli`]: run configuration, the acceptance battery, and the
//!   commands behind the `fixpoint-lab` binary.

pub mod certificate;
pub mod conditions;
pub mod error;
pub mod maps;
pub mod metric;
pub mod report_cli;
pub mod solver;
pub mod tolerances;

pub use certificate::{CertificateReport, Witness};
pub use error::{Error, Result};
pub use maps::{apply_map, catalog_get, Catalog, CatalogEntry, MapFamily, SelfMap, Status};
pub use metric::{distance, norm, verify_metric_axioms, Metric, MetricSpace, Point, SamplePlan, SampleSet};
