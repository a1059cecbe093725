//! Data ingestion: typed county records, schema-driven CSV loading,
//! fips-keyed joins, precinct vote aggregation, seeded splits, and
//! validation reports.

mod dataset;
mod frame;
mod model_frame;
mod precinct;
mod record;
mod report;
mod schema;

pub use dataset::{Dataset, LoadOutcome, SplitSpec, CANONICAL_COLUMNS};
pub use frame::{frame_from_map, join_by_fips, KeyedFrame};
pub use model_frame::ModelFrame;
pub use precinct::{aggregate_precincts, load_precinct_csv, PrecinctAggregate, PrecinctRow};
pub use record::{
    is_valid_fips, normalize_fips, CountyRecord, FIPS, PREDICTORS, RACE_SHARE_TOLERANCE, TARGET,
    WEIGHT,
};
pub use report::{
    write_jsonl, Exclusion, Finding, JoinFinding, JoinReport, LoadReport, ValidationReport,
};
pub use schema::{Schema, ShareScale, OPTIONAL_FIELDS, REQUIRED_FIELDS};
